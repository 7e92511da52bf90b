//! Symmetric eigenvalue counting via tridiagonal reduction and Sturm
//! sequences.
//!
//! Counting eigenvalues above a shift never needs the eigenvalues themselves:
//! Householder reduction to tridiagonal form preserves the spectrum, and the
//! signs of the pivots of T - sigma I (a symmetric LDL^T factorization) give
//! the inertia. One O(n^3) reduction then supports any number of O(n) counts,
//! which also makes extreme-eigenvalue bisection cheap.

use nalgebra::DMatrix;

/// Symmetric tridiagonal matrix: `diag` of length n, `offdiag` of length n-1.
#[derive(Debug, Clone)]
pub struct Tridiagonal {
    pub diag: Vec<f64>,
    pub offdiag: Vec<f64>,
}

/// Reduce a symmetric matrix to tridiagonal form by Householder reflections.
/// Only the spectrum is preserved (no transform accumulation).
pub fn householder_tridiagonalize(a: &DMatrix<f64>) -> Tridiagonal {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "matrix must be square");
    if n == 0 {
        return Tridiagonal {
            diag: Vec::new(),
            offdiag: Vec::new(),
        };
    }
    // row-major working copy; the matrix is symmetric so the layout of the
    // source does not matter
    let mut w: Vec<f64> = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            w[i * n + j] = a[(i, j)];
        }
    }
    let mut diag = vec![0.0; n];
    let mut offdiag = vec![0.0; n.saturating_sub(1)];
    let mut v = vec![0.0; n];
    let mut u = vec![0.0; n];

    for k in 0..n.saturating_sub(2) {
        // x = w[k+1.., k]
        let mut norm2 = 0.0;
        for i in k + 1..n {
            let x = w[i * n + k];
            norm2 += x * x;
        }
        let norm = norm2.sqrt();
        diag[k] = w[k * n + k];
        if norm == 0.0 {
            offdiag[k] = 0.0;
            continue;
        }
        let x0 = w[(k + 1) * n + k];
        let alpha = if x0 >= 0.0 { -norm } else { norm };
        offdiag[k] = alpha;

        // v = (x - alpha e1) normalized
        let mut vnorm2 = 0.0;
        for i in k + 1..n {
            let mut vi = w[i * n + k];
            if i == k + 1 {
                vi -= alpha;
            }
            v[i] = vi;
            vnorm2 += vi * vi;
        }
        if vnorm2 == 0.0 {
            continue;
        }
        let inv = 1.0 / vnorm2.sqrt();
        for vi in v.iter_mut().take(n).skip(k + 1) {
            *vi *= inv;
        }

        // u = A v on the trailing block, gamma = v^T u
        let mut gamma = 0.0;
        for i in k + 1..n {
            let row = &w[i * n..i * n + n];
            let mut s = 0.0;
            for j in k + 1..n {
                s += row[j] * v[j];
            }
            u[i] = s;
            gamma += v[i] * s;
        }
        // A <- A - 2 v u^T - 2 u v^T + 4 gamma v v^T
        for i in k + 1..n {
            let vi = v[i];
            let ui = u[i];
            let ci = 2.0 * ui - 4.0 * gamma * vi; // A_ij -= 2 vi u_j + ci' ...
            let row = &mut w[i * n..(i + 1) * n];
            for j in k + 1..n {
                row[j] -= 2.0 * vi * u[j] + ci * v[j];
            }
        }
    }
    if n >= 2 {
        diag[n - 2] = w[(n - 2) * n + (n - 2)];
        offdiag[n - 2] = w[(n - 1) * n + (n - 2)];
    }
    diag[n - 1] = w[(n - 1) * n + (n - 1)];
    Tridiagonal { diag, offdiag }
}

impl Tridiagonal {
    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    fn scale(&self) -> f64 {
        let d = self.diag.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let e = self.offdiag.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        d.max(e).max(1.0)
    }

    /// Number of eigenvalues strictly below `sigma`, from the pivot signs of
    /// T - sigma I. Returns `None` on an exact zero pivot (factorization
    /// breakdown: sigma is an eigenvalue of a leading principal block).
    pub fn count_below_strict(&self, sigma: f64) -> Option<usize> {
        let mut count = 0usize;
        let mut d = f64::INFINITY;
        for i in 0..self.diag.len() {
            let off2 = if i == 0 {
                0.0
            } else {
                self.offdiag[i - 1] * self.offdiag[i - 1]
            };
            d = (self.diag[i] - sigma) - off2 / d;
            if d == 0.0 || d.is_nan() {
                return None;
            }
            if d < 0.0 {
                count += 1;
            }
        }
        Some(count)
    }

    /// Same count with LAPACK-style pivot replacement: a vanishing pivot is
    /// nudged to a tiny negative value, so the walk always completes. The
    /// perturbation is far below eigenvalue resolution.
    pub fn count_below(&self, sigma: f64) -> usize {
        let pivmin = f64::EPSILON * f64::EPSILON * self.scale();
        let mut count = 0usize;
        let mut d = f64::INFINITY;
        for i in 0..self.diag.len() {
            let off2 = if i == 0 {
                0.0
            } else {
                self.offdiag[i - 1] * self.offdiag[i - 1]
            };
            d = (self.diag[i] - sigma) - off2 / d;
            if d.abs() < pivmin {
                d = -pivmin;
            }
            if d < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// Largest eigenvalue by Sturm bisection inside the Gershgorin bracket.
    pub fn max_eigenvalue(&self, tol: f64) -> f64 {
        let n = self.len();
        if n == 0 {
            return f64::NEG_INFINITY;
        }
        let (mut lo, mut hi) = self.gershgorin();
        // widen so the count predicate is unambiguous at the ends
        let pad = 1e-12 * self.scale();
        lo -= pad;
        hi += pad;
        while hi - lo > tol {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.count_below(mid) == n {
                hi = mid; // all eigenvalues below mid
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    fn gershgorin(&self) -> (f64, f64) {
        let n = self.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let mut r = 0.0;
            if i > 0 {
                r += self.offdiag[i - 1].abs();
            }
            if i + 1 < n {
                r += self.offdiag[i].abs();
            }
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }
}
