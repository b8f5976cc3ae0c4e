//! Subcommand bodies. Each returns its artifacts; nothing is written here.

use std::fmt::Write as _;

use dwmix::dynamics::{linspace, regime_metrics, TimeSeries};
use dwmix::manybody::{hamiltonian_csv, CouplingParams};
use dwmix::model::Model;
use dwmix::sweep::{self, Axis, EntropyState};
use dwmix::units::Species;
use dwmix::{Error, Result};
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::manifest::Artifact;
use crate::plot;

/// What a subcommand produced.
pub struct Outcome {
    pub model: Model,
    pub artifacts: Vec<Artifact>,
    pub results: Value,
}

fn couplings_json(p: &CouplingParams) -> Value {
    json!({ "lambda_bb": p.lambda_bb, "lambda_ff": p.lambda_ff, "lambda_bf": p.lambda_bf })
}

fn axis_json(name: &str, a: &Axis) -> Value {
    json!({ "name": name, "min": a.min, "max": a.max, "n": a.n })
}

pub fn build_model(cfg: &RunConfig) -> Result<Model> {
    Model::build(&cfg.model_spec())
}

pub fn solve_modes(cfg: &RunConfig) -> Result<Outcome> {
    let model = build_model(cfg)?;
    let artifacts = vec![
        Artifact::new("modes_boson.csv", model.modes_b.to_csv()),
        Artifact::new("modes_fermion.csv", model.modes_f.to_csv()),
    ];
    Ok(Outcome {
        model,
        artifacts,
        results: json!({}),
    })
}

fn regimes(model: &Model, series: &TimeSeries) -> Result<Value> {
    let mut out = serde_json::Map::new();
    for sp in [Species::Boson, Species::Fermion] {
        let omega = model.omega(sp);
        let m = regime_metrics(&series.times, series.species(sp), omega)?;
        out.insert(
            sp.as_str().into(),
            json!({
                "omega": omega,
                "nominal_period": std::f64::consts::TAU / omega,
                "period_estimate": m.period_estimate,
                "damping_estimate": m.damping_estimate,
                "plateau_intervals": m.plateau_intervals,
                "plateau_total": m.plateau_total(),
            }),
        );
    }
    Ok(Value::Object(out))
}

pub fn evolve(cfg: &RunConfig) -> Result<Outcome> {
    let model = build_model(cfg)?;
    let times = match cfg.t_max {
        Some(t) => linspace(t, cfg.samples),
        None => model.default_times(cfg.periods, cfg.samples)?,
    };
    let h = model.hamiltonian(&cfg.couplings)?;
    let series = model.return_series(&cfg.couplings, &times)?;
    let mut report = regimes(&model, &series)?;
    report["couplings"] = couplings_json(&cfg.couplings);
    report["time_grid"] = json!({ "t_max": times[times.len() - 1], "samples": times.len() });
    let mut regimes_text = serde_json::to_string_pretty(&report).expect("regimes serialize");
    regimes_text.push('\n');
    let mut artifacts = vec![
        Artifact::new("p_rr.csv", series.to_csv()),
        Artifact::new("regimes.json", regimes_text),
    ];
    if cfg.hamiltonian_csv {
        artifacts.push(Artifact::new("hamiltonian.csv", hamiltonian_csv(&h)));
    }
    Ok(Outcome {
        model,
        artifacts,
        results: report,
    })
}

pub fn fidelity_map(cfg: &RunConfig, workers: usize, with_plot: bool) -> Result<Outcome> {
    let model = build_model(cfg)?;
    let spec = &cfg.sweep;
    let surface = sweep::fidelity_map(&model, spec, workers)?;
    let (xname, yname) = spec.plane.axis_names();
    let min = surface.values.iter().copied().fold(f64::INFINITY, f64::min);
    let results = json!({
        "plane": spec.plane.as_str(),
        "x_axis": axis_json(xname, &spec.x),
        "y_axis": yname.map(|n| axis_json(n, &spec.y)),
        "fixed": couplings_json(&spec.fixed),
        "reference": couplings_json(&surface.reference),
        "reference_energy": surface.reference_energy,
        "reference_degenerate": surface.reference_degenerate,
        "degenerate_cells": surface.degenerate_cells(),
        "min_fidelity": min,
    });
    let mut artifacts = vec![Artifact::new("fidelity_map.csv", surface.to_csv())];
    if with_plot {
        artifacts.push(Artifact::new(
            "plot_fidelity_map.py",
            plot::fidelity_script(spec.plane),
        ));
    }
    Ok(Outcome {
        model,
        artifacts,
        results,
    })
}

pub fn entropy_scan(cfg: &RunConfig, workers: usize, with_plot: bool) -> Result<Outcome> {
    let spec = &cfg.sweep;
    if !spec.plane.is_line() {
        return Err(Error::config(format!(
            "entropy-scan runs along a λ_FF line; set sweep.plane = line_ff (got {})",
            spec.plane
        )));
    }
    let model = build_model(cfg)?;
    let curve = sweep::entropy_scan(
        &model,
        spec,
        cfg.entropy_state,
        cfg.single_particle_entropy,
        workers,
    )?;
    let (i, smax) = curve.argmax();
    let state = match cfg.entropy_state {
        EntropyState::Ground => json!({ "kind": "ground" }),
        EntropyState::Evolved { tau } => json!({ "kind": "evolved", "tau": tau }),
    };
    let results = json!({
        "plane": spec.plane.as_str(),
        "x_axis": axis_json("lambda_ff", &spec.x),
        "fixed": couplings_json(&spec.fixed),
        "state": state,
        "argmax_lambda_ff": curve.lambda_ff[i],
        "max_entropy": smax,
        "interior_maximum": curve.has_interior_maximum(),
        "degenerate_points": curve.degenerate.iter().filter(|&&d| d).count(),
    });
    let mut artifacts = vec![Artifact::new("entropy_scan.csv", curve.to_csv())];
    if let Some(sp) = curve.single_particle_csv() {
        artifacts.push(Artifact::new("single_particle_entropy.csv", sp));
    }
    if with_plot {
        artifacts.push(Artifact::new(
            "plot_entropy_scan.py",
            plot::entropy_script(cfg.single_particle_entropy),
        ));
    }
    Ok(Outcome {
        model,
        artifacts,
        results,
    })
}

/// Human-readable validity report; fails like a model build would.
pub fn validate(cfg: &RunConfig) -> Result<String> {
    let model = build_model(cfg)?;
    let mut s = String::new();
    let _ = writeln!(s, "config ok");
    let _ = writeln!(s, "potential: {}", cfg.potential_kind);
    let _ = writeln!(
        s,
        "grid: x in [-{0}, {0}] um, {1} points",
        cfg.grid.x_max(),
        cfg.grid.n_points()
    );
    for sp in [Species::Boson, Species::Fermion] {
        let m = model.modes(sp);
        let _ = writeln!(
            s,
            "{sp}: omega = {:.6e}, gap ratio (E2 - E_a)/omega = {:.3} (min {}), right-mode mass = {:.6}",
            m.bohr_frequency(),
            m.gap_ratio(),
            cfg.min_gap_ratio,
            m.right_mass()
        );
    }
    let p = cfg.couplings;
    let _ = writeln!(
        s,
        "couplings: lambda_bb = {}, lambda_ff = {}, lambda_bf = {}",
        p.lambda_bb, p.lambda_ff, p.lambda_bf
    );
    let _ = writeln!(s, "basis: {} ({} states)", model.basis.tag(), model.basis.dim());
    let _ = writeln!(s, "\nresolved config:");
    s.push_str(&cfg.to_text());
    Ok(s)
}
