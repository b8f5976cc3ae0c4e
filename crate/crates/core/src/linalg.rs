//! Eigen-solvers: Sturm-sequence bisection with inverse iteration for the
//! lowest states of a symmetric tridiagonal matrix, and a sorted wrapper over
//! nalgebra's dense symmetric decomposition.

use nalgebra::{DMatrix, DVector};

use crate::{Error, Result};

/// Real symmetric tridiagonal matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTridiagonal {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl SymTridiagonal {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Result<Self> {
        if diag.is_empty() || off.len() + 1 != diag.len() {
            return Err(Error::invalid(format!(
                "tridiagonal shape mismatch: {} diagonal vs {} off-diagonal entries",
                diag.len(),
                off.len()
            )));
        }
        Ok(Self { diag, off })
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let n = self.dim();
        (0..n)
            .map(|i| {
                let mut s = self.diag[i] * v[i];
                if i > 0 {
                    s += self.off[i - 1] * v[i - 1];
                }
                if i + 1 < n {
                    s += self.off[i] * v[i + 1];
                }
                s
            })
            .collect()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.dim();
        DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                self.diag[i]
            } else if i + 1 == j {
                self.off[i]
            } else if j + 1 == i {
                self.off[j]
            } else {
                0.0
            }
        })
    }

    fn gershgorin(&self) -> (f64, f64) {
        let n = self.dim();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let r = if i > 0 { self.off[i - 1].abs() } else { 0.0 }
                + if i + 1 < n { self.off[i].abs() } else { 0.0 };
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    /// Number of eigenvalues strictly below `x`.
    pub fn count_below(&self, x: f64) -> usize {
        let tiny = f64::MIN_POSITIVE.sqrt();
        let mut count = 0;
        let mut q = 1.0;
        for i in 0..self.dim() {
            q = self.diag[i]
                - x
                - if i > 0 {
                    self.off[i - 1] * self.off[i - 1] / q
                } else {
                    0.0
                };
            // a zero pivot counts as negative, as in LAPACK's dstebz
            if q.abs() < tiny {
                q = -tiny;
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// The k-th smallest eigenvalue (0-based) by bisection.
    pub fn eigenvalue(&self, k: usize) -> f64 {
        let (mut lo, mut hi) = self.gershgorin();
        let scale = lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi || hi - lo <= 2.0 * f64::EPSILON * scale {
                break;
            }
            if self.count_below(mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Solve (T - shift) y = b with partial pivoting.
    fn shifted_solve(&self, shift: f64, b: &[f64]) -> Vec<f64> {
        let n = self.dim();
        // Row i of the upper-triangular factor holds u[i], u1[i], u2[i]
        // in columns i, i+1, i+2.
        let mut u = vec![0.0; n];
        let mut u1 = vec![0.0; n];
        let mut u2 = vec![0.0; n];
        let mut rhs = b.to_vec();
        let eps = f64::EPSILON * (self.gershgorin().1.abs() + self.gershgorin().0.abs()).max(1.0);

        let mut cur_d = self.diag[0] - shift;
        let mut cur_e = if n > 1 { self.off[0] } else { 0.0 };
        let mut cur_f = 0.0;
        for i in 0..n {
            if i + 1 < n {
                let sub = self.off[i];
                let nd = self.diag[i + 1] - shift;
                let ne = if i + 2 < n { self.off[i + 1] } else { 0.0 };
                if sub.abs() > cur_d.abs() {
                    // swap rows i and i+1
                    u[i] = sub;
                    u1[i] = nd;
                    u2[i] = ne;
                    let m = cur_d / sub;
                    let r = rhs[i];
                    rhs[i] = rhs[i + 1];
                    rhs[i + 1] = r - m * rhs[i];
                    cur_d = cur_e - m * nd;
                    cur_e = cur_f - m * ne;
                    cur_f = 0.0;
                } else {
                    let d = if cur_d == 0.0 { eps } else { cur_d };
                    u[i] = d;
                    u1[i] = cur_e;
                    u2[i] = cur_f;
                    let m = sub / d;
                    rhs[i + 1] -= m * rhs[i];
                    cur_d = nd - m * cur_e;
                    cur_e = ne - m * cur_f;
                    cur_f = 0.0;
                }
            } else {
                u[i] = if cur_d == 0.0 { eps } else { cur_d };
            }
        }
        let mut y = vec![0.0; n];
        for i in (0..n).rev() {
            let mut s = rhs[i];
            if i + 1 < n {
                s -= u1[i] * y[i + 1];
            }
            if i + 2 < n {
                s -= u2[i] * y[i + 2];
            }
            y[i] = s / u[i];
        }
        y
    }

    /// Lowest `count` eigenpairs, ascending, with unit Euclidean-norm vectors.
    pub fn lowest_eigenpairs(&self, count: usize) -> Result<Vec<(f64, Vec<f64>)>> {
        let n = self.dim();
        if count == 0 || count > n {
            return Err(Error::invalid(format!(
                "requested {count} eigenpairs of a {n}x{n} matrix"
            )));
        }
        let (glo, ghi) = self.gershgorin();
        let norm = glo.abs().max(ghi.abs()).max(1.0);
        let mut pairs: Vec<(f64, Vec<f64>)> = Vec::with_capacity(count);
        for k in 0..count {
            let lambda = self.eigenvalue(k);
            // deterministic, non-degenerate start vector
            let mut v: Vec<f64> = (0..n)
                .map(|i| 1.0 + 0.5 * ((i as f64 + 1.0) * (k as f64 + 1.3)).sin())
                .collect();
            let shift = lambda - 4.0 * f64::EPSILON * norm;
            for _ in 0..4 {
                v = self.shifted_solve(shift, &v);
                for (_, prev) in &pairs {
                    let ov: f64 = prev.iter().zip(&v).map(|(a, b)| a * b).sum();
                    v.iter_mut().zip(prev).for_each(|(x, p)| *x -= ov * p);
                }
                let nv = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                if !(nv > 0.0) || !nv.is_finite() {
                    return Err(Error::Solver(format!(
                        "inverse iteration broke down for state {k}"
                    )));
                }
                v.iter_mut().for_each(|x| *x /= nv);
            }
            let hv = self.apply(&v);
            let rayleigh: f64 = hv.iter().zip(&v).map(|(a, b)| a * b).sum();
            pairs.push((rayleigh, v));
        }
        Ok(pairs)
    }
}

/// Eigen-decomposition of a dense real symmetric matrix, eigenvalues ascending,
/// eigenvectors as the matching columns.
#[derive(Debug, Clone)]
pub struct SortedEigen {
    pub values: Vec<f64>,
    pub vectors: DMatrix<f64>,
}

pub fn symmetric_eigen(m: &DMatrix<f64>) -> SortedEigen {
    let eig = m.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]).then(a.cmp(&b)));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let cols: Vec<DVector<f64>> = order
        .iter()
        .map(|&i| eig.eigenvectors.column(i).into_owned())
        .collect();
    SortedEigen {
        values,
        vectors: DMatrix::from_columns(&cols),
    }
}
