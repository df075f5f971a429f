//! Symmetric tridiagonal eigenvalues by Sturm-sequence bisection, and a
//! complex tridiagonal linear solver.

use num_complex::Complex64;

/// Real symmetric tridiagonal matrix with diagonal `diag` and off-diagonal
/// `off` (`off[k]` couples rows `k` and `k+1`).
#[derive(Debug, Clone)]
pub struct SymTridiagonal {
    diag: Vec<f64>,
    off: Vec<f64>,
}

impl SymTridiagonal {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Self {
        assert!(!diag.is_empty());
        assert_eq!(off.len() + 1, diag.len(), "off-diagonal must have n-1 entries");
        Self { diag, off }
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    /// Gershgorin interval containing the spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.dim();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for k in 0..n {
            let left = if k > 0 { self.off[k - 1].abs() } else { 0.0 };
            let right = if k + 1 < n { self.off[k].abs() } else { 0.0 };
            lo = lo.min(self.diag[k] - left - right);
            hi = hi.max(self.diag[k] + left + right);
        }
        (lo, hi)
    }

    /// Number of eigenvalues strictly below `x` (Sturm count via the LDLᵀ
    /// pivots of `T - x`).
    pub fn count_below(&self, x: f64) -> usize {
        let tiny = f64::MIN_POSITIVE.sqrt();
        let mut count = 0;
        let mut d = self.diag[0] - x;
        for k in 0..self.dim() {
            if k > 0 {
                let e2 = self.off[k - 1] * self.off[k - 1];
                d = self.diag[k] - x - e2 / d;
            }
            if d == 0.0 {
                d = -tiny;
            }
            if d < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// The `k`-th smallest eigenvalue (0-based), bisected to `tol`.
    pub fn eigenvalue(&self, k: usize, tol: f64) -> f64 {
        assert!(k < self.dim());
        let (mut lo, mut hi) = self.gershgorin();
        lo -= 1e-12;
        hi += 1e-12;
        while hi - lo > tol * (1.0 + lo.abs().max(hi.abs())) {
            let mid = 0.5 * (lo + hi);
            if mid == lo || mid == hi {
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

    /// All eigenvalues outside `[lower, upper]`, ascending.
    pub fn eigenvalues_outside(&self, lower: f64, upper: f64, tol: f64) -> Vec<f64> {
        let below = self.count_below(lower);
        let not_above = self.count_below(upper.next_up());
        (0..below)
            .chain(not_above..self.dim())
            .map(|k| self.eigenvalue(k, tol))
            .collect()
    }
}

/// Solves `M x = rhs` for a complex tridiagonal `M` with sub-diagonal `lower`,
/// diagonal `diag` and super-diagonal `upper`. The factorisation is computed
/// once and reused across right-hand sides.
#[derive(Debug, Clone)]
pub struct TridiagonalSolver {
    lower: Vec<Complex64>,
    c_prime: Vec<Complex64>,
    inv_pivot: Vec<Complex64>,
}

impl TridiagonalSolver {
    pub fn new(lower: &[Complex64], diag: &[Complex64], upper: &[Complex64]) -> Self {
        let n = diag.len();
        assert!(n > 0 && lower.len() + 1 == n && upper.len() + 1 == n);
        let mut c_prime = vec![Complex64::default(); n.saturating_sub(1)];
        let mut inv_pivot = vec![Complex64::default(); n];
        let mut pivot = diag[0];
        inv_pivot[0] = pivot.inv();
        for k in 1..n {
            c_prime[k - 1] = upper[k - 1] * inv_pivot[k - 1];
            pivot = diag[k] - lower[k - 1] * c_prime[k - 1];
            inv_pivot[k] = pivot.inv();
        }
        Self {
            lower: lower.to_vec(),
            c_prime,
            inv_pivot,
        }
    }

    pub fn solve_in_place(&self, x: &mut [Complex64]) {
        let n = self.inv_pivot.len();
        assert_eq!(x.len(), n);
        x[0] *= self.inv_pivot[0];
        for k in 1..n {
            x[k] = (x[k] - self.lower[k - 1] * x[k - 1]) * self.inv_pivot[k];
        }
        for k in (0..n - 1).rev() {
            let next = x[k + 1];
            x[k] -= self.c_prime[k] * next;
        }
    }
}
