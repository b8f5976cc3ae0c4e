//! Generated matplotlib scripts. The tool never runs them itself.

use dwmix::sweep::Plane;

const HEADER: &str = "\
#!/usr/bin/env python3
# Generated by dwmix. Run from the output directory: python3 <this script>
import csv

import matplotlib

matplotlib.use(\"Agg\")
import matplotlib.pyplot as plt


def read(path):
    with open(path, newline=\"\") as f:
        rows = list(csv.DictReader(f))
    return {k: [float(r[k]) for r in rows] for k in rows[0]}

";

fn label(name: &str) -> String {
    match name {
        "lambda_bb" => r"$\lambda_{BB}$".into(),
        "lambda_ff" => r"$\lambda_{FF}$".into(),
        "lambda_bf" => r"$\lambda_{BF}$".into(),
        other => other.into(),
    }
}

/// Heat map of `fidelity_map.csv`, or a line plot for a line scan.
pub fn fidelity_script(plane: Plane) -> String {
    let (xname, yname) = plane.axis_names();
    let mut s = String::from(HEADER);
    s.push_str("d = read(\"fidelity_map.csv\")\n");
    match yname {
        Some(yname) => {
            s.push_str(&format!(
                "\
xs = sorted(set(d[\"lambda_x\"]))
ys = sorted(set(d[\"lambda_y\"]))
z = [[0.0] * len(xs) for _ in ys]
for x, y, v in zip(d[\"lambda_x\"], d[\"lambda_y\"], d[\"fidelity\"]):
    z[ys.index(y)][xs.index(x)] = v
fig, ax = plt.subplots(figsize=(5.5, 4.5))
mesh = ax.pcolormesh(xs, ys, z, shading=\"nearest\", cmap=\"viridis\")
fig.colorbar(mesh, ax=ax, label=\"fidelity\")
ax.set_xlabel(r\"{}\")
ax.set_ylabel(r\"{}\")
",
                label(xname),
                label(yname)
            ));
        }
        None => {
            s.push_str(&format!(
                "\
fig, ax = plt.subplots(figsize=(5.5, 4))
ax.plot(d[\"lambda_x\"], d[\"fidelity\"])
ax.set_xlabel(r\"{}\")
ax.set_ylabel(\"fidelity\")
",
                label(xname)
            ));
        }
    }
    s.push_str("fig.tight_layout()\nfig.savefig(\"fidelity_map.png\", dpi=150)\n");
    s
}

/// Line plot of `entropy_scan.csv`, plus single-particle entropies if present.
pub fn entropy_script(single_particle: bool) -> String {
    let mut s = String::from(HEADER);
    s.push_str(
        "\
d = read(\"entropy_scan.csv\")
fig, ax = plt.subplots(figsize=(5.5, 4))
ax.plot(d[\"lambda_ff\"], d[\"s_bosons\"], label=\"bosons\")
ax.plot(d[\"lambda_ff\"], d[\"s_fermions\"], \"--\", label=\"fermions\")
",
    );
    if single_particle {
        s.push_str(
            "\
sp = read(\"single_particle_entropy.csv\")
ax.plot(sp[\"lambda_ff\"], sp[\"s1_bosons\"], \":\", label=\"single-particle bosons\")
ax.plot(sp[\"lambda_ff\"], sp[\"s1_fermions\"], \"-.\", label=\"single-particle fermions\")
",
        );
    }
    s.push_str(
        "\
ax.set_xlabel(r\"$\\lambda_{FF}$\")
ax.set_ylabel(\"entropy (bits)\")
ax.legend()
fig.tight_layout()
fig.savefig(\"entropy_scan.png\", dpi=150)
",
    );
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn heat_map_for_planes_and_line_for_lines() {
        let s = fidelity_script(Plane::BbFf);
        assert!(s.contains("pcolormesh"));
        assert!(s.contains(r"$\lambda_{BB}$") && s.contains(r"$\lambda_{FF}$"));
        let s = fidelity_script(Plane::LineFf);
        assert!(!s.contains("pcolormesh") && s.contains("ax.plot"));
    }

    #[test]
    fn entropy_script_reads_optional_file() {
        assert!(!entropy_script(false).contains("single_particle_entropy.csv"));
        assert!(entropy_script(true).contains("single_particle_entropy.csv"));
        assert!(entropy_script(false).contains(r"$\lambda_{FF}$"));
    }
}
