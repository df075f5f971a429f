//! Jost solutions `e^±(θ, n)`, their Fourier-series data `A_±(n)`,
//! `K_{±,j}(n)`, and the explicit coefficient bounds.
//!
//! The solutions are computed from their exact free tails: `e^+(θ, n) = θ^n`
//! for `n` above the perturbation window and `e^-(θ, n) = θ^{-n}` for `n` at or
//! below its lower end, then continued through the window with the three-term
//! recurrence. Inside the unit disk the continuation runs in the direction in
//! which the wanted solution grows.

use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::dd::DdComplex;
use crate::error::{Error, Result};
use crate::lattice::{
    lambda_of_theta, reflect_profile, ComplexSequence, CoefficientProfile, GridWindow,
};

/// Relative size below which an extracted Fourier coefficient is treated as
/// quadrature noise.
pub const QUADRATURE_NOISE: f64 = 1e-12;

/// Slack allowed on the coefficient bound ratio.
pub const K_BOUND_TOLERANCE: f64 = 1e-6;

pub const DEFAULT_J_MAX: usize = 64;
pub const DEFAULT_CIRCLE_SAMPLES: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Plus,
    Minus,
}

impl Side {
    pub fn label(self) -> &'static str {
        match self {
            Side::Plus => "plus",
            Side::Minus => "minus",
        }
    }

    fn sign(self) -> i32 {
        match self {
            Side::Plus => 1,
            Side::Minus => -1,
        }
    }
}

/// Values of `e^+` or `e^-` on `[lo, hi]` for any `θ ≠ 0`. For windowed
/// profiles `θ^{∓n} e^±(θ, n)` is a polynomial in `θ`, so this is also the
/// entire continuation beyond the unit disk.
pub(crate) fn jost_values(
    profile: &CoefficientProfile,
    theta: Complex64,
    side: Side,
    lo: i64,
    hi: i64,
) -> Vec<Complex64> {
    debug_assert!(lo <= hi);
    let lambda = 0.5 * (theta + theta.inv());
    let p_lo = profile.window_lo();
    let p_hi = profile.window_hi();
    match side {
        Side::Plus => {
            let top = hi.max(p_hi + 2);
            let len = (top - lo + 1) as usize;
            let mut f = vec![Complex64::default(); len];
            let idx = |n: i64| (n - lo) as usize;
            for n in (p_hi + 1).max(lo)..=top {
                f[idx(n)] = theta.powi(n as i32);
            }
            let start = (p_hi + 1).min(top);
            for n in (lo + 1..=start).rev() {
                if n - 1 > p_hi {
                    continue;
                }
                let next = f[idx(n + 1)];
                f[idx(n - 1)] =
                    ((lambda - profile.b(n)) * f[idx(n)] - profile.a(n) * next) / profile.a(n - 1);
            }
            f.truncate(idx(hi) + 1);
            f
        }
        Side::Minus => {
            let bottom = lo.min(p_lo - 1);
            let len = (hi - bottom + 1) as usize;
            let mut f = vec![Complex64::default(); len];
            let idx = |n: i64| (n - bottom) as usize;
            for n in bottom..=p_lo.min(hi) {
                f[idx(n)] = theta.powi(-n as i32);
            }
            for n in p_lo.max(bottom + 1)..hi {
                let prev = f[idx(n - 1)];
                f[idx(n + 1)] =
                    ((lambda - profile.b(n)) * f[idx(n)] - profile.a(n - 1) * prev) / profile.a(n);
            }
            f.drain(..idx(lo));
            f
        }
    }
}

/// [`jost_values`] in double-double arithmetic, for the scattering
/// coefficients and their identities.
pub(crate) fn jost_values_dd(
    profile: &CoefficientProfile,
    theta: DdComplex,
    side: Side,
    lo: i64,
    hi: i64,
) -> Vec<DdComplex> {
    debug_assert!(lo <= hi);
    let lambda = (theta + theta.inv()) * 0.5;
    let p_lo = profile.window_lo();
    let p_hi = profile.window_hi();
    match side {
        Side::Plus => {
            let top = hi.max(p_hi + 2);
            let len = (top - lo + 1) as usize;
            let mut f = vec![DdComplex::default(); len];
            let idx = |n: i64| (n - lo) as usize;
            for n in (p_hi + 1).max(lo)..=top {
                f[idx(n)] = theta.powi(n as i32);
            }
            let start = (p_hi + 1).min(top);
            for n in (lo + 1..=start).rev() {
                if n - 1 > p_hi {
                    continue;
                }
                let shifted = lambda - DdComplex::real(profile.b(n));
                f[idx(n - 1)] = (shifted * f[idx(n)] - f[idx(n + 1)] * profile.a(n)).div_f64(profile.a(n - 1));
            }
            f.truncate(idx(hi) + 1);
            f
        }
        Side::Minus => {
            let bottom = lo.min(p_lo - 1);
            let len = (hi - bottom + 1) as usize;
            let mut f = vec![DdComplex::default(); len];
            let idx = |n: i64| (n - bottom) as usize;
            for n in bottom..=p_lo.min(hi) {
                f[idx(n)] = theta.powi(-n as i32);
            }
            for n in p_lo.max(bottom + 1)..hi {
                let shifted = lambda - DdComplex::real(profile.b(n));
                f[idx(n + 1)] = (shifted * f[idx(n)] - f[idx(n - 1)] * profile.a(n - 1)).div_f64(profile.a(n));
            }
            f.drain(..idx(lo));
            f
        }
    }
}

/// Max over interior `n` of `|τf - λf|`, divided by `max|f|`.
pub(crate) fn eigen_residual(
    profile: &CoefficientProfile,
    lambda: Complex64,
    lo: i64,
    values: &[Complex64],
) -> f64 {
    let scale = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return 0.0;
    }
    let mut worst = 0.0f64;
    for k in 1..values.len().saturating_sub(1) {
        let n = lo + k as i64;
        let tau = profile.a(n) * values[k + 1] + profile.a(n - 1) * values[k - 1] + profile.b(n) * values[k];
        worst = worst.max((tau - lambda * values[k]).norm());
    }
    worst / scale
}

/// A sampled Jost solution.
#[derive(Debug, Clone)]
pub struct JostSolution {
    pub side: Side,
    pub theta: Complex64,
    pub values: ComplexSequence,
    /// Relative residual of `τf = λ(θ)f` over the interior of the window.
    pub residual: f64,
}

/// Computes `e^±(θ, ·)` on `window` for `0 < |θ| ≤ 1`.
pub fn compute_jost(
    profile: &CoefficientProfile,
    theta: Complex64,
    side: Side,
    window: GridWindow,
) -> Result<JostSolution> {
    let modulus = theta.norm();
    if modulus == 0.0 || modulus > 1.0 + 1e-12 {
        return Err(Error::Domain(format!(
            "Jost solutions are sampled for 0 < |θ| ≤ 1, got |θ| = {modulus}"
        )));
    }
    window.require_covers(profile, 1)?;
    let values = jost_values(profile, theta, side, window.n_lo(), window.n_hi());
    let residual = eigen_residual(profile, lambda_of_theta(theta)?, window.n_lo(), &values);
    Ok(JostSolution {
        side,
        theta,
        values: ComplexSequence::new(window.n_lo(), values),
        residual,
    })
}

/// `e^+(z, ·)` on `window` for any `z ≠ 0`, through the entire continuation.
pub fn jost_plus_entire(
    profile: &CoefficientProfile,
    z: Complex64,
    window: GridWindow,
) -> Result<ComplexSequence> {
    if z.norm() == 0.0 {
        return Err(Error::Domain("e^+ is evaluated at z ≠ 0".into()));
    }
    Ok(ComplexSequence::new(
        window.n_lo(),
        jost_values(profile, z, Side::Plus, window.n_lo(), window.n_hi()),
    ))
}

/// Fourier data of a Jost solution:
/// `e^±(θ, n) = θ^{±n}/A_±(n) · Σ_{j≥0} K_{±,j}(n) θ^j`.
#[derive(Debug, Clone)]
pub struct JostExpansion {
    pub side: Side,
    pub window: GridWindow,
    pub j_max: usize,
    pub m_samples: usize,
    /// `A_±(n)` on the window.
    pub a_values: Vec<f64>,
    /// `K_{±,j}(n)`, indexed `[n - n_lo][j]` for `j = 0..=j_max`.
    pub k_table: Vec<Vec<f64>>,
    /// Per-row level below which coefficients are quadrature noise.
    pub noise: Vec<f64>,
    /// Largest imaginary part seen in the extracted coefficients.
    pub max_imag: f64,
    /// Largest `|K_{±,j_max}(n)|` over the window.
    pub last_coefficient: f64,
    pub aliasing_warning: bool,
}

impl JostExpansion {
    pub fn k(&self, n: i64, j: usize) -> f64 {
        self.k_table[(n - self.window.n_lo()) as usize][j]
    }

    pub fn a(&self, n: i64) -> f64 {
        self.a_values[(n - self.window.n_lo()) as usize]
    }

    /// Rebuilds `e^±(θ, n)` from the truncated series.
    pub fn reconstruct(&self, theta: Complex64, n: i64) -> Complex64 {
        let row = &self.k_table[(n - self.window.n_lo()) as usize];
        let series = row.iter().rev().fold(Complex64::default(), |acc, &k| acc * theta + k);
        theta.powi(self.side.sign() * n as i32) * series / self.a(n)
    }

    /// Writes `side,n,j,K`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        wtr.write_record(["side", "n", "j", "K"])?;
        for (row, n) in self.k_table.iter().zip(self.window.indices()) {
            for (j, k) in row.iter().enumerate() {
                wtr.write_record([self.side.label().to_string(), n.to_string(), j.to_string(), k.to_string()])?;
            }
        }
        wtr.flush()?;
        Ok(())
    }
}

/// Extracts `A_±(n)` and `K_{±,j}(n)` by sampling `A_±(n) θ^{∓n} e^±(θ, n)` at
/// the `m_samples`-th roots of unity and taking a discrete Fourier transform.
pub fn jost_expansion_extract(
    profile: &CoefficientProfile,
    side: Side,
    window: GridWindow,
    m_samples: usize,
    j_max: usize,
) -> Result<JostExpansion> {
    if !m_samples.is_power_of_two() || m_samples < 2 * j_max.max(1) {
        return Err(Error::Domain(format!(
            "sample count {m_samples} must be a power of two and at least 2·J_max = {}",
            2 * j_max
        )));
    }
    window.require_covers(profile, 1)?;
    let thetas: Vec<Complex64> = (0..m_samples)
        .map(|k| Complex64::from_polar(1.0, std::f64::consts::TAU * k as f64 / m_samples as f64))
        .collect();
    let columns: Vec<Vec<Complex64>> = thetas
        .par_iter()
        .map(|&theta| jost_values(profile, theta, side, window.n_lo(), window.n_hi()))
        .collect();

    let a_values: Vec<f64> = window
        .indices()
        .map(|n| match side {
            Side::Plus => profile.a_plus(n),
            Side::Minus => profile.a_minus(n),
        })
        .collect();

    let fft = FftPlanner::<f64>::new().plan_fft_forward(m_samples);
    let mut k_table = Vec::with_capacity(window.len());
    let mut noise = Vec::with_capacity(window.len());
    let mut max_imag = 0.0f64;
    let mut last_coefficient = 0.0f64;
    let mut buffer = vec![Complex64::default(); m_samples];
    for (row, n) in window.indices().enumerate() {
        let mut peak = 0.0f64;
        for (k, theta) in thetas.iter().enumerate() {
            let g = columns[k][row] * a_values[row] * theta.powi(-side.sign() * n as i32);
            peak = peak.max(g.norm());
            buffer[k] = g;
        }
        fft.process(&mut buffer);
        let scale = 1.0 / m_samples as f64;
        let coeffs: Vec<f64> = buffer[..=j_max]
            .iter()
            .map(|c| {
                max_imag = max_imag.max((c.im * scale).abs());
                c.re * scale
            })
            .collect();
        last_coefficient = last_coefficient.max(coeffs[j_max].abs());
        noise.push(QUADRATURE_NOISE * peak.max(1.0));
        k_table.push(coeffs);
    }
    let aliasing_warning = noise.iter().zip(&k_table).any(|(tol, row)| row[j_max].abs() > *tol);
    Ok(JostExpansion {
        side,
        window,
        j_max,
        m_samples,
        a_values,
        k_table,
        noise,
        max_imag,
        last_coefficient,
        aliasing_warning,
    })
}

/// The quantities entering the coefficient bound,
/// `c(n) = 2|b(n)| + |4a(n)² - 1|`, `C_+(n) = Σ_{m≥n} c(m)`,
/// `D_{+,m}(n) = Π_{j=1}^{m-1} (1 + C_+(n+j))`.
///
/// For `Side::Minus` everything is computed on the reflected profile and
/// indexed by the reflected site `-n`.
#[derive(Debug, Clone)]
pub struct DecayBounds {
    pub side: Side,
    /// Lower end of the profile window the `c` values refer to.
    pub c_lo: i64,
    pub c_values: Vec<f64>,
    /// `C_+` suffix sums aligned with `c_values`.
    c_plus_suffix: Vec<f64>,
    /// Window of (reflected, for minus) sites covered by `d_plus`.
    pub window: GridWindow,
    pub j_max: usize,
    /// `D_{+,m}(n)`, indexed `[n - n_lo][m]`, `m = 0..=j_max`.
    pub d_plus: Vec<Vec<f64>>,
}

impl DecayBounds {
    pub fn c(&self, n: i64) -> f64 {
        let k = n - self.c_lo;
        if k >= 0 && (k as usize) < self.c_values.len() {
            self.c_values[k as usize]
        } else {
            0.0
        }
    }

    /// `C_+(n)` in the bound's own coordinates.
    pub fn c_plus(&self, n: i64) -> f64 {
        let k = n - self.c_lo;
        if k < 0 {
            self.c_plus_suffix[0]
        } else if (k as usize) < self.c_plus_suffix.len() {
            self.c_plus_suffix[k as usize]
        } else {
            0.0
        }
    }

    pub fn d_plus(&self, m: usize, n: i64) -> f64 {
        (1..m as i64).map(|j| 1.0 + self.c_plus(n + j)).product()
    }

    fn local(&self, n: i64) -> i64 {
        match self.side {
            Side::Plus => n,
            Side::Minus => -n,
        }
    }

    /// `D_{±,j}(n) C_±(n ± (⌊j/2⌋ + 1))` for the original site `n`.
    pub fn bound(&self, n: i64, j: usize) -> f64 {
        let m = self.local(n);
        self.d_plus(j, m) * self.c_plus(m + (j / 2) as i64 + 1)
    }

    /// Same with the tail starting at `n ± ⌊j/2⌋`.
    pub fn bound_without_offset(&self, n: i64, j: usize) -> f64 {
        let m = self.local(n);
        self.d_plus(j, m) * self.c_plus(m + (j / 2) as i64)
    }

    /// `sup_{m,n} D_{+,m}(n)` over the stored table.
    pub fn d_sup(&self) -> f64 {
        self.d_plus
            .iter()
            .flat_map(|row| row.iter().copied())
            .fold(1.0, f64::max)
    }
}

/// Builds the bound data for the expansion on `window` (original coordinates).
pub fn decay_bounds(
    profile: &CoefficientProfile,
    side: Side,
    window: GridWindow,
    j_max: usize,
) -> DecayBounds {
    let (source, local_window) = match side {
        Side::Plus => (profile.clone(), window),
        Side::Minus => (
            reflect_profile(profile),
            GridWindow::new(-window.n_hi(), -window.n_lo()).expect("reflected window is valid"),
        ),
    };
    let c_lo = source.window_lo();
    let c_values: Vec<f64> = (c_lo..=source.window_hi())
        .map(|n| 2.0 * source.b(n).abs() + (4.0 * source.a(n).powi(2) - 1.0).abs())
        .collect();
    let mut c_plus_suffix = c_values.clone();
    for k in (0..c_plus_suffix.len().saturating_sub(1)).rev() {
        c_plus_suffix[k] += c_plus_suffix[k + 1];
    }
    let mut bounds = DecayBounds {
        side,
        c_lo,
        c_values,
        c_plus_suffix,
        window: local_window,
        j_max,
        d_plus: Vec::new(),
    };
    bounds.d_plus = local_window
        .indices()
        .map(|n| {
            let mut row = Vec::with_capacity(j_max + 1);
            let mut acc = 1.0;
            row.push(1.0);
            for m in 1..=j_max {
                if m >= 2 {
                    acc *= 1.0 + bounds.c_plus(n + m as i64 - 1);
                }
                row.push(acc);
            }
            row
        })
        .collect();
    bounds
}

#[derive(Debug, Clone)]
pub struct KBoundReport {
    pub side: Side,
    /// `max |K_{±,j}(n)| / (D_{±,j}(n) C_±(n ± (⌊j/2⌋+1)))` over `j ≥ 1`.
    pub max_ratio: f64,
    pub argmax: Option<(i64, usize)>,
    /// The same ratio against the tail starting at `n ± ⌊j/2⌋`.
    pub max_ratio_without_offset: f64,
    /// `(n, j, K, bound)` for every coefficient over the bound.
    pub violations: Vec<(i64, usize, f64, f64)>,
    pub checked: usize,
    pub passed: bool,
}

/// Compares every extracted coefficient with its bound. A coefficient at
/// quadrature-noise level counts as zero, so `0/0` passes.
pub fn verify_k_bounds(expansion: &JostExpansion, bounds: &DecayBounds) -> Result<KBoundReport> {
    if expansion.side != bounds.side {
        return Err(Error::GridMismatch("expansion and bounds are for different sides".into()));
    }
    if bounds.j_max < expansion.j_max {
        return Err(Error::GridMismatch("bounds do not cover J_max".into()));
    }
    let ratio_of = |k: f64, noise: f64, bound: f64| -> f64 {
        if k <= noise {
            0.0
        } else if bound == 0.0 {
            f64::INFINITY
        } else {
            k / bound
        }
    };
    let mut report = KBoundReport {
        side: expansion.side,
        max_ratio: 0.0,
        argmax: None,
        max_ratio_without_offset: 0.0,
        violations: Vec::new(),
        checked: 0,
        passed: true,
    };
    for (row, n) in expansion.window.indices().enumerate() {
        let noise = expansion.noise[row];
        for j in 1..=expansion.j_max {
            let k = expansion.k_table[row][j].abs();
            let bound = bounds.bound(n, j);
            let ratio = ratio_of(k, noise, bound);
            report.checked += 1;
            if ratio > report.max_ratio {
                report.max_ratio = ratio;
                report.argmax = Some((n, j));
            }
            report.max_ratio_without_offset = report
                .max_ratio_without_offset
                .max(ratio_of(k, noise, bounds.bound_without_offset(n, j)));
            if ratio > 1.0 + K_BOUND_TOLERANCE {
                report.violations.push((n, j, expansion.k_table[row][j], bound));
            }
        }
    }
    report.passed = report.violations.is_empty();
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::A_FREE;

    fn golden() -> f64 {
        1.25f64.sqrt() - 0.5
    }

    #[test]
    fn free_jost_solutions_are_plane_waves() {
        let profile = CoefficientProfile::free();
        let window = GridWindow::symmetric(40).unwrap();
        for theta in [Complex64::from_polar(1.0, 0.3), Complex64::from_polar(0.4, -2.0)] {
            let plus = compute_jost(&profile, theta, Side::Plus, window).unwrap();
            let minus = compute_jost(&profile, theta, Side::Minus, window).unwrap();
            for n in window.indices() {
                let p = theta.powi(n as i32);
                let m = theta.powi(-n as i32);
                assert!((plus.values[n] - p).norm() <= 1e-12 * p.norm().max(1.0));
                assert!((minus.values[n] - m).norm() <= 1e-12 * m.norm().max(1.0));
            }
        }
    }

    #[test]
    fn bound_state_jost_solution() {
        let profile = CoefficientProfile::single_site(0, 0.5);
        let theta = Complex64::new(golden(), 0.0);
        let window = GridWindow::symmetric(25).unwrap();
        let plus = compute_jost(&profile, theta, Side::Plus, window).unwrap();
        assert!(plus.residual < 1e-12);
        // the decaying branch only holds to the left while roundoff in θ stays small
        for n in -10..=25 {
            assert!((plus.values[n].re - golden().powi(n.abs() as i32)).abs() < 1e-10);
        }
    }

    #[test]
    fn residual_small_across_disk() {
        let profile = CoefficientProfile::new(-2, vec![0.6, 0.45, 0.5, 0.55], vec![0.2, -0.3, 0.1, 0.0]).unwrap();
        let window = GridWindow::symmetric(30).unwrap();
        for r in [0.1, 0.3, 0.7, 1.0] {
            for k in 0..7 {
                let theta = Complex64::from_polar(r, 0.4 + k as f64);
                for side in [Side::Plus, Side::Minus] {
                    let sol = compute_jost(&profile, theta, side, window).unwrap();
                    assert!(sol.residual < 1e-10, "r={r} side={side:?} residual={}", sol.residual);
                }
            }
        }
    }

    #[test]
    fn conjugation_symmetry_on_circle() {
        let profile = CoefficientProfile::new(-1, vec![0.7, 0.4, 0.5], vec![0.2, -0.3, 0.25]).unwrap();
        let window = GridWindow::symmetric(20).unwrap();
        let theta = Complex64::from_polar(1.0, 1.1);
        for side in [Side::Plus, Side::Minus] {
            let a = compute_jost(&profile, theta, side, window).unwrap();
            let b = compute_jost(&profile, theta.conj(), side, window).unwrap();
            for n in window.indices() {
                assert!((a.values[n].conj() - b.values[n]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn outside_disk_is_rejected() {
        let window = GridWindow::symmetric(5).unwrap();
        let profile = CoefficientProfile::free();
        assert!(compute_jost(&profile, Complex64::new(1.5, 0.0), Side::Plus, window).is_err());
        assert!(compute_jost(&profile, Complex64::new(0.0, 0.0), Side::Plus, window).is_err());
    }

    #[test]
    fn free_expansion_is_trivial() {
        let window = GridWindow::symmetric(10).unwrap();
        let exp = jost_expansion_extract(&CoefficientProfile::free(), Side::Plus, window, 512, 64).unwrap();
        for (row, n) in window.indices().enumerate() {
            assert_eq!(exp.a(n), 1.0);
            assert!((exp.k_table[row][0] - 1.0).abs() < 1e-14);
            assert!(exp.k_table[row][1..].iter().all(|k| k.abs() < 1e-14));
        }
        assert!(!exp.aliasing_warning);
    }

    #[test]
    fn single_site_invisible_from_the_right() {
        let g = 0.37;
        let profile = CoefficientProfile::single_site(0, g);
        let window = GridWindow::symmetric(12).unwrap();
        let exp = jost_expansion_extract(&profile, Side::Plus, window, 512, 64).unwrap();
        for n in 1..=12 {
            assert!(exp.k_table[(n + 12) as usize][1..].iter().all(|k| k.abs() < 1e-13));
        }
        // the first row that sees the potential
        assert!((exp.k(-1, 1) + 2.0 * g).abs() < 1e-13);
    }

    #[test]
    fn minus_expansion_matches_reflected_plus() {
        let profile = CoefficientProfile::new(-2, vec![0.6, 0.45, 0.5, 0.55], vec![0.2, -0.3, 0.1, 0.0]).unwrap();
        let reflected = reflect_profile(&profile);
        let window = GridWindow::symmetric(9).unwrap();
        let minus = jost_expansion_extract(&profile, Side::Minus, window, 256, 32).unwrap();
        let plus = jost_expansion_extract(&reflected, Side::Plus, window, 256, 32).unwrap();
        for n in window.indices() {
            assert!((minus.a(n) - plus.a(-n)).abs() < 1e-14);
            for j in 0..=32 {
                assert!((minus.k(n, j) - plus.k(-n, j)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn reconstruction_matches_recurrence() {
        let profile = CoefficientProfile::new(-2, vec![0.6, 0.45, 0.5, 0.55], vec![0.2, -0.3, 0.1, 0.0]).unwrap();
        let window = GridWindow::symmetric(8).unwrap();
        let exp = jost_expansion_extract(&profile, Side::Plus, window, 512, 64).unwrap();
        for k in 0..16 {
            let theta = Complex64::from_polar(1.0, 0.1 + 0.39 * k as f64);
            let direct = compute_jost(&profile, theta, Side::Plus, window).unwrap();
            for n in window.indices() {
                assert!((exp.reconstruct(theta, n) - direct.values[n]).norm() < 1e-8);
            }
        }
    }

    #[test]
    fn bad_sample_counts_are_rejected() {
        let window = GridWindow::symmetric(5).unwrap();
        let p = CoefficientProfile::free();
        assert!(jost_expansion_extract(&p, Side::Plus, window, 500, 64).is_err());
        assert!(jost_expansion_extract(&p, Side::Plus, window, 64, 64).is_err());
    }

    #[test]
    fn decay_bound_examples() {
        let window = GridWindow::symmetric(4).unwrap();
        let free = decay_bounds(&CoefficientProfile::free(), Side::Plus, window, 8);
        assert!(free.c_values.iter().all(|&c| c == 0.0));
        assert!(free.d_plus.iter().flatten().all(|&d| d == 1.0));

        let single = decay_bounds(&CoefficientProfile::single_site(0, 0.5), Side::Plus, window, 8);
        assert_eq!(single.c(0), 1.0);
        assert_eq!(single.c_plus(0), 1.0);
        assert_eq!(single.c_plus(1), 0.0);
        assert_eq!(single.c_plus(-3), 1.0);

        let wide = CoefficientProfile::new(0, vec![0.6], vec![0.0]).unwrap();
        let bounds = decay_bounds(&wide, Side::Plus, window, 8);
        assert!((bounds.c(0) - 0.44).abs() < 1e-15);
    }

    #[test]
    fn d_table_matches_product_definition() {
        let profile = CoefficientProfile::new(-1, vec![0.6, 0.45, 0.5], vec![0.2, -0.3, 0.1]).unwrap();
        let window = GridWindow::symmetric(5).unwrap();
        let bounds = decay_bounds(&profile, Side::Plus, window, 10);
        for (row, n) in window.indices().enumerate() {
            for m in 0..=10 {
                assert!((bounds.d_plus[row][m] - bounds.d_plus(m, n)).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn coefficient_bound_holds_for_fixtures() {
        let window = GridWindow::symmetric(10).unwrap();
        for profile in [CoefficientProfile::free(), CoefficientProfile::single_site(0, 0.5)] {
            for side in [Side::Plus, Side::Minus] {
                let exp = jost_expansion_extract(&profile, side, window, 512, 64).unwrap();
                let bounds = decay_bounds(&profile, side, window, 64);
                let report = verify_k_bounds(&exp, &bounds).unwrap();
                assert!(report.passed, "{side:?}: {report:?}");
                assert!(report.max_ratio <= 1.0 + K_BOUND_TOLERANCE);
            }
        }
    }

    #[test]
    fn single_site_bound_is_attained() {
        let window = GridWindow::symmetric(10).unwrap();
        let profile = CoefficientProfile::single_site(0, 0.5);
        let exp = jost_expansion_extract(&profile, Side::Plus, window, 512, 64).unwrap();
        let report = verify_k_bounds(&exp, &decay_bounds(&profile, Side::Plus, window, 64)).unwrap();
        assert!((report.max_ratio - 1.0).abs() < 1e-12);
    }

    #[test]
    fn off_diagonal_perturbation_breaks_the_offset_bound() {
        // K_{+,2}(-1) = 1 - 4a(0)² while C_+(1) = 0: the tail starting at
        // n + ⌊j/2⌋ + 1 misses the site that produced the coefficient.
        let profile = CoefficientProfile::new(0, vec![0.6], vec![0.0]).unwrap();
        let window = GridWindow::symmetric(6).unwrap();
        let exp = jost_expansion_extract(&profile, Side::Plus, window, 256, 32).unwrap();
        assert!((exp.k(-1, 2) + 0.44).abs() < 1e-13);
        let report = verify_k_bounds(&exp, &decay_bounds(&profile, Side::Plus, window, 32)).unwrap();
        assert!(!report.passed);
        assert!(report.violations.iter().any(|&(n, j, _, bound)| n == -1 && j == 2 && bound == 0.0));
        assert!(report.max_ratio_without_offset <= 1.0 + K_BOUND_TOLERANCE);
        let _ = A_FREE;
    }
}
