//! Composite Simpson quadrature on uniform grids.

/// Simpson weights for `n` equally spaced nodes with spacing `h`.
///
/// For an even number of intervals this is the classical 1-4-2-...-4-1 rule.
/// For an odd number the last three intervals use Simpson's 3/8 rule so the
/// order stays at h⁴.
pub fn simpson_weights(n: usize, h: f64) -> Vec<f64> {
    assert!(n >= 2, "need at least two nodes");
    let mut w = vec![0.0; n];
    let intervals = n - 1;
    if intervals == 1 {
        w[0] = 0.5 * h;
        w[1] = 0.5 * h;
        return w;
    }
    let (simpson_intervals, tail) = if intervals.is_multiple_of(2) {
        (intervals, 0)
    } else if intervals >= 3 {
        (intervals - 3, 3)
    } else {
        unreachable!()
    };
    for i in (0..simpson_intervals).step_by(2) {
        w[i] += h / 3.0;
        w[i + 1] += 4.0 * h / 3.0;
        w[i + 2] += h / 3.0;
    }
    if tail == 3 {
        let s = simpson_intervals;
        let c = 3.0 * h / 8.0;
        w[s] += c;
        w[s + 1] += 3.0 * c;
        w[s + 2] += 3.0 * c;
        w[s + 3] += c;
    }
    w
}

/// ∫ f over the nodes with spacing `h`.
pub fn simpson(values: &[f64], h: f64) -> f64 {
    simpson_weights(values.len(), h)
        .iter()
        .zip(values)
        .map(|(w, v)| w * v)
        .sum()
}

/// Precomputed weights for one grid.
#[derive(Debug, Clone)]
pub struct Quadrature {
    weights: Vec<f64>,
}

impl Quadrature {
    pub fn new(n: usize, h: f64) -> Self {
        Self {
            weights: simpson_weights(n, h),
        }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn integrate(&self, values: &[f64]) -> f64 {
        debug_assert_eq!(values.len(), self.weights.len());
        self.weights.iter().zip(values).map(|(w, v)| w * v).sum()
    }

    /// ∫ f g.
    pub fn inner(&self, f: &[f64], g: &[f64]) -> f64 {
        self.weights
            .iter()
            .zip(f.iter().zip(g))
            .map(|(w, (a, b))| w * a * b)
            .sum()
    }
}
