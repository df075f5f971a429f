//! Wronskians, the scattering coefficients `α`, `β_±`, bound states and
//! norming constants.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::dd::{Dd, DdComplex};
use crate::error::{Error, Result};
use crate::jost::{jost_values, jost_values_dd, Side};
use crate::lattice::{lambda_of_theta, theta_of_lambda, ComplexSequence, CoefficientProfile, GridWindow};
use crate::tridiag::SymTridiagonal;

/// Below this `|1 - θ²|` the pole of the prefactor is avoided by extrapolation.
pub const POLE_GUARD: f64 = 1e-6;
const EXTRAPOLATION_STEP: f64 = 1e-5;

/// Radius of the circle used for the argument-principle count.
pub const WINDING_RADIUS: f64 = 0.999;
/// Minimum number of samples on the winding circle.
pub const WINDING_SAMPLES: usize = 4096;

/// Aliasing level `r^M` for the interior circle carrying the coefficient FFT.
const COEFF_ALIAS_LEVEL: f64 = 1e-15;

/// Grid size of the real-axis sign-change search for zeros of `α`.
pub const ROOT_SCAN_SAMPLES: usize = 20_000;
/// Bound states closer than this in `θ` are reported as a multiplicity problem.
pub const ROOT_SEPARATION: f64 = 1e-9;

/// A scattering coefficient value, flagged when it was obtained by
/// extrapolation next to `θ² = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatteringValue {
    pub value: Complex64,
    pub extrapolated: bool,
}

/// `W(f, g)(n) = a(n) (f(n) g(n+1) - g(n) f(n+1))`.
pub fn wronskian(
    profile: &CoefficientProfile,
    f: &ComplexSequence,
    g: &ComplexSequence,
    n: i64,
) -> Result<Complex64> {
    for seq in [f, g] {
        for m in [n, n + 1] {
            if seq.get(m).is_none() {
                return Err(Error::OutOfWindow {
                    index: m,
                    lo: seq.lo(),
                    hi: seq.hi(),
                });
            }
        }
    }
    Ok(bracket(profile.a(n), f[n], f[n + 1], g[n], g[n + 1]))
}

fn bracket(a: f64, f0: Complex64, f1: Complex64, g0: Complex64, g1: Complex64) -> Complex64 {
    a * (f0 * g1 - g0 * f1)
}

/// Wronskian of `e^{s1}(z1)` and `e^{s2}(z2)` at the site just below the
/// perturbation window, where both are cheapest to evaluate.
fn jost_wronskian(profile: &CoefficientProfile, s1: Side, z1: DdComplex, s2: Side, z2: DdComplex) -> DdComplex {
    let n = profile.window_lo() - 1;
    let f = jost_values_dd(profile, z1, s1, n, n + 1);
    let g = jost_values_dd(profile, z2, s2, n, n + 1);
    (f[0] * g[1] - g[0] * f[1]) * profile.a(n)
}

fn prefactor(theta: DdComplex) -> DdComplex {
    (theta * 2.0).div(DdComplex::real(1.0) - theta * theta)
}

// α and β are evaluated in double-double: for small transmission the
// identities among them cancel to 1/|α|² relative.
pub(crate) fn alpha_dd(profile: &CoefficientProfile, theta: Complex64) -> DdComplex {
    alpha_at(profile, DdComplex::from_complex(theta))
}

pub(crate) fn beta_dd(profile: &CoefficientProfile, theta: Complex64, side: Side) -> DdComplex {
    beta_at(profile, DdComplex::from_complex(theta), side)
}

fn alpha_at(profile: &CoefficientProfile, z: DdComplex) -> DdComplex {
    prefactor(z) * jost_wronskian(profile, Side::Plus, z, Side::Minus, z)
}

fn beta_at(profile: &CoefficientProfile, z: DdComplex, side: Side) -> DdComplex {
    let inv = z.inv();
    match side {
        Side::Plus => prefactor(z) * jost_wronskian(profile, Side::Minus, z, Side::Plus, inv),
        Side::Minus => -(prefactor(z) * jost_wronskian(profile, Side::Plus, z, Side::Minus, inv)),
    }
}

pub(crate) fn alpha_raw(profile: &CoefficientProfile, theta: Complex64) -> Complex64 {
    alpha_dd(profile, theta).to_complex()
}

/// `β_±(θ)` from the Wronskian formula; valid for any `θ ≠ 0, ±1`.
pub(crate) fn beta_raw(profile: &CoefficientProfile, theta: Complex64, side: Side) -> Complex64 {
    beta_dd(profile, theta, side).to_complex()
}

fn near_pole(theta: Complex64) -> bool {
    (1.0 - theta * theta).norm() < POLE_GUARD
}

/// `α(θ) = 2θ/(1-θ²) W(e^+(θ), e^-(θ))` for `0 < |θ| ≤ 1`.
pub fn alpha_of_theta(profile: &CoefficientProfile, theta: Complex64) -> Result<ScatteringValue> {
    let r = theta.norm();
    if r == 0.0 || r > 1.0 + 1e-12 || !r.is_finite() {
        return Err(Error::Domain(format!("α is evaluated for 0 < |θ| ≤ 1, got |θ| = {r}")));
    }
    if near_pole(theta) {
        // radial two-point extrapolation from inside the disk
        let direction = theta / r;
        let f1 = alpha_raw(profile, direction * (1.0 - EXTRAPOLATION_STEP));
        let f2 = alpha_raw(profile, direction * (1.0 - 2.0 * EXTRAPOLATION_STEP));
        let offset = (1.0 - r) / EXTRAPOLATION_STEP;
        let value = f1 + (f1 - f2) * (1.0 - offset);
        return Ok(ScatteringValue { value, extrapolated: true });
    }
    Ok(ScatteringValue {
        value: alpha_raw(profile, theta),
        extrapolated: false,
    })
}

/// `β_±(θ) = ±2θ/(1-θ²) W(e^∓(θ), e^±(θ⁻¹))` on `|θ| = 1`.
pub fn beta_of_theta(profile: &CoefficientProfile, theta: Complex64, side: Side) -> Result<ScatteringValue> {
    if (theta.norm() - 1.0).abs() > 1e-10 {
        return Err(Error::Domain(format!("β is evaluated on |θ| = 1, got |θ| = {}", theta.norm())));
    }
    if near_pole(theta) {
        // extrapolate along the circle from the side θ is already on
        let angle = theta.arg();
        let dir = if angle.sin() >= 0.0 { 1.0 } else { -1.0 };
        let base = if angle.cos() >= 0.0 { 0.0 } else { PI };
        let at = |k: f64| beta_raw(profile, Complex64::from_polar(1.0, base + dir * k * EXTRAPOLATION_STEP), side);
        let (f1, f2) = (at(1.0), at(2.0));
        let offset = (angle - base).sin().abs().asin() / EXTRAPOLATION_STEP;
        let value = f1 + (f1 - f2) * (1.0 - offset);
        return Ok(ScatteringValue { value, extrapolated: true });
    }
    Ok(ScatteringValue {
        value: beta_raw(profile, theta, side),
        extrapolated: false,
    })
}

/// Max over `thetas`, `n` in `window` and both signs of
/// `|e^±(θ) - α(θ) e^∓(θ⁻¹) - β_∓(θ) e^∓(θ)| / max(1, |e^±(θ)|)`.
pub fn scattering_relation_residual(
    profile: &CoefficientProfile,
    thetas: &[Complex64],
    window: GridWindow,
) -> Result<f64> {
    if thetas.iter().any(|&t| near_pole(t) || (t.norm() - 1.0).abs() > 1e-10) {
        return Err(Error::Domain("the relation is checked on |θ| = 1 away from θ² = 1".into()));
    }
    let (lo, hi) = (window.n_lo(), window.n_hi());
    let worst = thetas
        .par_iter()
        .map(|&theta| {
            let z = DdComplex::from_complex(theta);
            let alpha = alpha_dd(profile, theta);
            let mut worst = 0.0f64;
            for (side, other) in [(Side::Plus, Side::Minus), (Side::Minus, Side::Plus)] {
                let lhs = jost_values_dd(profile, z, side, lo, hi);
                let reflected = jost_values_dd(profile, z.inv(), other, lo, hi);
                let direct = jost_values_dd(profile, z, other, lo, hi);
                let beta = beta_dd(profile, theta, other);
                for k in 0..lhs.len() {
                    let defect = lhs[k] - alpha * reflected[k] - beta * direct[k];
                    worst = worst.max(defect.to_complex().norm() / lhs[k].to_complex().norm().max(1.0));
                }
            }
            worst
        })
        .reduce(|| 0.0, f64::max);
    Ok(worst)
}

/// `|α(θ)|² - |β_+(θ)|² - 1` on `|θ| = 1`, accumulated in double-double.
pub fn unitarity_defect_at(profile: &CoefficientProfile, theta: Complex64) -> Result<f64> {
    if near_pole(theta) || (theta.norm() - 1.0).abs() > 1e-10 {
        return Err(Error::Domain("unitarity is checked on |θ| = 1 away from θ² = 1".into()));
    }
    // a double is only unimodular to ~1e-16, which |α|² amplifies; project
    // back onto the circle in extended precision first
    let z = DdComplex::from_complex(theta);
    let z = z.div_dd(z.norm_sqr().sqrt());
    let a = alpha_at(profile, z).norm_sqr();
    let b = beta_at(profile, z, Side::Plus).norm_sqr();
    Ok((a - b - Dd::new(1.0)).to_f64())
}

/// `e^+(θ_j, ·)` on `window` for a real bound-state parameter, using the
/// decaying left tail `e^+(θ_j, n) = e^+(θ_j, lo) θ_j^{lo-n}` below the
/// perturbation window.
pub fn bound_state_vector(profile: &CoefficientProfile, theta: f64, window: GridWindow) -> ComplexSequence {
    let p_lo = profile.window_lo();
    let start = window.n_lo().max(p_lo);
    let hi = window.n_hi().max(start);
    let core = jost_values(profile, Complex64::new(theta, 0.0), Side::Plus, start, hi);
    let anchor = jost_values(profile, Complex64::new(theta, 0.0), Side::Plus, p_lo, p_lo)[0].re;
    ComplexSequence::from_fn(window, |n| {
        if n >= start {
            Complex64::new(core[(n - start) as usize].re, 0.0)
        } else {
            Complex64::new(anchor * theta.powi((p_lo - n) as i32), 0.0)
        }
    })
}

/// `γ^{-1} = Σ_n |e^+(θ_j, n)|²` with both free tails summed in closed form.
pub fn inverse_norming_constant(profile: &CoefficientProfile, theta: f64) -> f64 {
    let (p_lo, p_hi) = (profile.window_lo(), profile.window_hi());
    let values = jost_values(profile, Complex64::new(theta, 0.0), Side::Plus, p_lo, p_hi);
    let t2 = theta * theta;
    let core: f64 = values.iter().map(|v| v.re * v.re).sum();
    let right = theta.powi(2 * (p_hi + 1) as i32) / (1.0 - t2);
    let left = values[0].re * values[0].re * t2 / (1.0 - t2);
    core + right + left
}

/// Number of zeros of `α` inside `|θ| = radius`, by winding of `α`.
pub fn winding_count(profile: &CoefficientProfile, radius: f64, samples: usize) -> Result<i64> {
    let values: Vec<Complex64> = (0..samples)
        .into_par_iter()
        .map(|k| alpha_raw(profile, Complex64::from_polar(radius, TAU * k as f64 / samples as f64)))
        .collect();
    if values.iter().any(|v| v.norm() == 0.0 || !v.is_finite()) {
        return Err(Error::Precondition(format!("α vanishes or overflows on |θ| = {radius}")));
    }
    let mut total = 0.0;
    for k in 0..samples {
        let next = values[(k + 1) % samples];
        total += (next / values[k]).arg();
    }
    Ok((total / TAU).round() as i64)
}

/// Bound states: `θ_j`, `λ_j = λ(θ_j)`, `γ_j`.
#[derive(Debug, Clone, Default)]
pub struct BoundStates {
    pub thetas: Vec<f64>,
    pub lambdas: Vec<f64>,
    pub gammas: Vec<f64>,
    /// `|α(θ_j)|` after polishing.
    pub alpha_residuals: Vec<f64>,
    pub winding_count: i64,
}

impl BoundStates {
    pub fn len(&self) -> usize {
        self.thetas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.thetas.is_empty()
    }

    /// Writes `theta_j,lambda_j,gamma_j`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        wtr.write_record(["theta_j", "lambda_j", "gamma_j"])?;
        for k in 0..self.len() {
            wtr.write_record([
                format!("{:.17e}", self.thetas[k]),
                format!("{:.17e}", self.lambdas[k]),
                format!("{:.17e}", self.gammas[k]),
            ])?;
        }
        wtr.flush()?;
        Ok(())
    }
}

fn polish_root(profile: &CoefficientProfile, start: f64) -> f64 {
    let f = |x: f64| alpha_raw(profile, Complex64::new(x, 0.0)).re;
    let clamp = |x: f64| x.clamp(-1.0 + 1e-15, 1.0 - 1e-15);
    let mut x0 = start;
    let mut x1 = clamp(start * (1.0 - 1e-7));
    let (mut f0, mut f1) = (f(x0), f(x1));
    for _ in 0..80 {
        if f1 == 0.0 || f1 == f0 {
            break;
        }
        let x2 = clamp(x1 - f1 * (x1 - x0) / (f1 - f0));
        if (x2 - x1).abs() <= 1e-16 * x2.abs().max(1e-300) {
            x1 = x2;
            break;
        }
        x0 = x1;
        f0 = f1;
        x1 = x2;
        f1 = f(x1);
    }
    let polished = x1;
    // keep the truncated estimate if the secant wandered off
    if (polished - start).abs() > 1e-3 || polished == 0.0 {
        start
    } else {
        polished
    }
}

/// Sign changes of `α` on the real `θ`-axis, refined by bisection. The grid
/// is `sin(πx/2)` for uniform `x`, which resolves roots close to `±1`.
fn real_axis_roots(profile: &CoefficientProfile) -> Vec<f64> {
    let f = |x: f64| alpha_raw(profile, Complex64::new(x, 0.0)).re;
    let grid: Vec<f64> = (1..ROOT_SCAN_SAMPLES)
        .map(|k| (FRAC_PI_2 * (2.0 * k as f64 / ROOT_SCAN_SAMPLES as f64 - 1.0)).sin())
        .filter(|x| 1.0 - x * x >= POLE_GUARD && *x != 0.0)
        .collect();
    let values: Vec<f64> = grid.iter().map(|&x| f(x)).collect();
    let mut roots = Vec::new();
    for k in 0..grid.len() - 1 {
        let (mut lo, mut hi) = (grid[k], grid[k + 1]);
        let (mut flo, fhi) = (values[k], values[k + 1]);
        if flo == 0.0 {
            roots.push(lo);
            continue;
        }
        if flo.signum() == fhi.signum() || fhi == 0.0 || lo < 0.0 && hi > 0.0 {
            // θ = 0 is never a bound state and α is not evaluated there
            continue;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let fm = f(mid);
            if fm.signum() == flo.signum() {
                lo = mid;
                flo = fm;
            } else {
                hi = mid;
            }
        }
        roots.push(0.5 * (lo + hi));
    }
    roots
}

/// Bound states as zeros of `α` on the real axis, plus eigenvalues of the
/// tridiagonal truncation of `H` on `window` whose `θ` lies too close to `±1`
/// for the scan, cross-checked against the argument principle on
/// `|θ| = 0.999`.
pub fn find_eigenvalues(profile: &CoefficientProfile, window: GridWindow) -> Result<BoundStates> {
    window.require_covers(profile, 1)?;
    let diag: Vec<f64> = window.indices().map(|n| profile.b(n)).collect();
    let off: Vec<f64> = (window.n_lo()..window.n_hi()).map(|n| profile.a(n)).collect();
    let matrix = SymTridiagonal::new(diag, off);
    let outside = matrix.eigenvalues_outside(-1.0, 1.0, 1e-16);

    // the scan is authoritative where it runs; the truncation only adds
    // states too close to ±1 for the scan grid
    let mut thetas = real_axis_roots(profile);
    for lambda in outside {
        let theta = polish_root(profile, theta_of_lambda(lambda)?);
        if 1.0 - theta * theta < POLE_GUARD {
            thetas.push(theta);
        }
    }
    thetas.sort_by(f64::total_cmp);
    if thetas.windows(2).any(|w| w[1] - w[0] < ROOT_SEPARATION) {
        return Err(Error::Precondition("two bound states closer than the root separation".into()));
    }

    let samples = WINDING_SAMPLES.max(64 * profile.a_values().len());
    let winding = winding_count(profile, WINDING_RADIUS, samples)?;
    let inside = thetas.iter().filter(|t| t.abs() < WINDING_RADIUS).count();
    if winding != inside as i64 {
        return Err(Error::EigenCountMismatch { found: inside, winding });
    }

    let mut states = BoundStates {
        winding_count: winding,
        ..Default::default()
    };
    for theta in thetas {
        states.alpha_residuals.push(alpha_raw(profile, Complex64::new(theta, 0.0)).norm());
        states.lambdas.push(0.5 * (theta + 1.0 / theta));
        states.gammas.push(1.0 / inverse_norming_constant(profile, theta));
        states.thetas.push(theta);
    }
    Ok(states)
}

/// `M` points `θ_k = e^{iπ(2k+1)/M}`: the upper semicircle followed by the
/// conjugates.
pub fn rotated_circle_grid(m_samples: usize) -> Vec<Complex64> {
    (0..m_samples)
        .map(|k| Complex64::from_polar(1.0, PI * (2 * k + 1) as f64 / m_samples as f64))
        .collect()
}

/// Largest `log|α(θ)|` on `|θ| = r` for `r = 1/2, 1/4, 1/8`, and whether
/// `r · max log|α|` decreases along the sequence.
#[derive(Debug, Clone)]
pub struct AlphaGrowthProxy {
    pub radii: Vec<f64>,
    pub max_log_alpha: Vec<f64>,
    pub sublinear: bool,
}

pub fn alpha_growth_proxy(profile: &CoefficientProfile) -> AlphaGrowthProxy {
    let radii = vec![0.5, 0.25, 0.125];
    let max_log_alpha: Vec<f64> = radii
        .iter()
        .map(|&r| {
            (0..256)
                .map(|k| alpha_raw(profile, Complex64::from_polar(r, TAU * k as f64 / 256.0)).norm().ln())
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect();
    let scaled: Vec<f64> = radii.iter().zip(&max_log_alpha).map(|(r, m)| r * m.max(0.0)).collect();
    let sublinear = scaled.windows(2).all(|w| w[1] <= w[0] + 1e-12);
    AlphaGrowthProxy {
        radii,
        max_log_alpha,
        sublinear,
    }
}

/// Scattering data on the rotated circle grid.
#[derive(Debug, Clone)]
pub struct ScatteringData {
    pub theta_grid: Vec<Complex64>,
    pub alpha: Vec<Complex64>,
    pub beta_plus: Vec<Complex64>,
    pub beta_minus: Vec<Complex64>,
    pub eigen: BoundStates,
    /// `K_j` with `α(θ) = (1/A) Σ_j K_j θ^j`, `j < M/2`.
    pub alpha_coeffs: Vec<f64>,
    pub total_product: f64,
    /// Max relative variation in `n` of `W(e^+(θ), e^-(θ))` over the window.
    pub wronskian_drift: f64,
}

impl ScatteringData {
    pub fn compute(profile: &CoefficientProfile, m_samples: usize, window: GridWindow) -> Result<Self> {
        if m_samples < 8 || m_samples % 2 != 0 {
            return Err(Error::Domain(format!("grid size {m_samples} must be even and at least 8")));
        }
        window.require_covers(profile, 1)?;
        let theta_grid = rotated_circle_grid(m_samples);
        let values: Vec<(Complex64, Complex64, Complex64)> = theta_grid
            .par_iter()
            .map(|&t| {
                (
                    alpha_raw(profile, t),
                    beta_raw(profile, t, Side::Plus),
                    beta_raw(profile, t, Side::Minus),
                )
            })
            .collect();
        let alpha: Vec<Complex64> = values.iter().map(|v| v.0).collect();
        let beta_plus = values.iter().map(|v| v.1).collect();
        let beta_minus = values.iter().map(|v| v.2).collect();

        // α generally has poles at θ = ±1, so its Taylor coefficients are
        // taken on an interior circle with r^M at roundoff level
        let total_product = profile.total_product();
        let radius = (COEFF_ALIAS_LEVEL.ln() / m_samples as f64).exp();
        let mut spectrum: Vec<Complex64> = (0..m_samples)
            .into_par_iter()
            .map(|k| alpha_raw(profile, Complex64::from_polar(radius, TAU * k as f64 / m_samples as f64)))
            .collect();
        FftPlanner::<f64>::new().plan_fft_forward(m_samples).process(&mut spectrum);
        let alpha_coeffs = (0..m_samples / 2)
            .map(|j| spectrum[j].re * total_product / (m_samples as f64 * radius.powi(j as i32)))
            .collect();

        let stride = (m_samples / 64).max(1);
        let wronskian_drift = theta_grid
            .par_iter()
            .step_by(stride)
            .map(|&t| {
                let e_plus = jost_values(profile, t, Side::Plus, window.n_lo(), window.n_hi());
                let e_minus = jost_values(profile, t, Side::Minus, window.n_lo(), window.n_hi());
                let ws: Vec<Complex64> = (0..e_plus.len() - 1)
                    .map(|k| {
                        let n = window.n_lo() + k as i64;
                        bracket(profile.a(n), e_plus[k], e_plus[k + 1], e_minus[k], e_minus[k + 1])
                    })
                    .collect();
                let scale = ws.iter().map(|w| w.norm()).fold(0.0, f64::max);
                ws.iter().map(|w| (w - ws[0]).norm()).fold(0.0, f64::max) / scale
            })
            .reduce(|| 0.0, f64::max);

        Ok(Self {
            theta_grid,
            alpha,
            beta_plus,
            beta_minus,
            eigen: find_eigenvalues(profile, window)?,
            alpha_coeffs,
            total_product,
            wronskian_drift,
        })
    }

    /// `(1/A) Σ_j K_j θ^j`.
    pub fn alpha_from_coeffs(&self, theta: Complex64) -> Complex64 {
        let series = self
            .alpha_coeffs
            .iter()
            .rev()
            .fold(Complex64::default(), |acc, &k| acc * theta + k);
        series / self.total_product
    }

    /// `max ||α|² - |β_+|² - 1|` over the grid.
    pub fn unitarity_defect(&self) -> f64 {
        self.alpha
            .iter()
            .zip(&self.beta_plus)
            .map(|(a, b)| (a.norm_sqr() - b.norm_sqr() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// `max ||β_+| - |β_-||` over the grid.
    pub fn beta_asymmetry(&self) -> f64 {
        self.beta_plus
            .iter()
            .zip(&self.beta_minus)
            .map(|(p, m)| (p.norm() - m.norm()).abs())
            .fold(0.0, f64::max)
    }

    /// Writes `theta_re,theta_im,alpha_re,alpha_im,beta_re,beta_im` with `β_+`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        wtr.write_record(["theta_re", "theta_im", "alpha_re", "alpha_im", "beta_re", "beta_im"])?;
        for k in 0..self.theta_grid.len() {
            let (t, a, b) = (self.theta_grid[k], self.alpha[k], self.beta_plus[k]);
            wtr.write_record([t.re, t.im, a.re, a.im, b.re, b.im].map(|v| format!("{v:.17e}")))?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// `λ(θ_j)` helper for callers that hold complex bound-state parameters.
pub fn bound_state_lambda(theta: f64) -> Result<f64> {
    Ok(lambda_of_theta(Complex64::new(theta, 0.0))?.re)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn golden() -> f64 {
        1.25f64.sqrt() - 0.5
    }

    fn mixed() -> CoefficientProfile {
        CoefficientProfile::new(-2, vec![0.6, 0.45, 0.5, 0.55], vec![0.2, -0.3, 0.1, 0.0]).unwrap()
    }

    #[test]
    fn wronskian_examples() {
        let profile = CoefficientProfile::free();
        let window = GridWindow::symmetric(6).unwrap();
        let theta = Complex64::new(0.3, 0.4);
        let f = ComplexSequence::from_fn(window, |n| theta.powi(n as i32));
        let g = ComplexSequence::from_fn(window, |n| theta.powi(-n as i32));
        assert_eq!(wronskian(&profile, &f, &f, 0).unwrap(), Complex64::default());
        let expected = (1.0 - theta * theta) / (2.0 * theta);
        for n in -6..6 {
            assert!((wronskian(&profile, &f, &g, n).unwrap() - expected).norm() < 1e-12);
        }
        let i = Complex64::i();
        let f = ComplexSequence::from_fn(window, |n| i.powi(n as i32));
        let g = ComplexSequence::from_fn(window, |n| i.powi(-n as i32));
        assert!((wronskian(&profile, &f, &g, 2).unwrap() + i).norm() < 1e-14);
        assert!(wronskian(&profile, &f, &g, 6).is_err());
    }

    #[test]
    fn free_alpha_is_one_and_beta_vanishes() {
        let profile = CoefficientProfile::free();
        for k in 0..12 {
            let theta = Complex64::from_polar(1.0, 0.2 + 0.5 * k as f64);
            assert!((alpha_of_theta(&profile, theta).unwrap().value - 1.0).norm() < 1e-13);
            for side in [Side::Plus, Side::Minus] {
                assert!(beta_of_theta(&profile, theta, side).unwrap().value.norm() < 1e-13);
            }
        }
        assert!((alpha_of_theta(&profile, Complex64::new(0.3, -0.1)).unwrap().value - 1.0).norm() < 1e-13);
    }

    #[test]
    fn alpha_vanishes_at_bound_state() {
        let profile = CoefficientProfile::single_site(0, 0.5);
        let value = alpha_of_theta(&profile, Complex64::new(golden(), 0.0)).unwrap();
        assert!(value.value.norm() < 1e-8);
        assert!(!value.extrapolated);
    }

    #[test]
    fn alpha_tends_to_inverse_product() {
        let profile = mixed();
        let a = profile.total_product();
        let value = alpha_of_theta(&profile, Complex64::new(1e-7, 1e-7)).unwrap().value;
        assert!((value - 1.0 / a).norm() < 1e-5);
    }

    #[test]
    fn pole_is_extrapolated_and_flagged() {
        let profile = mixed();
        let exact = alpha_of_theta(&profile, Complex64::new(1.0, 0.0)).unwrap();
        assert!(exact.extrapolated);
        let nearby = alpha_of_theta(&profile, Complex64::new(1.0 - 1e-3, 0.0)).unwrap();
        assert!(!nearby.extrapolated);
        assert!(exact.value.is_finite());
        let b = beta_of_theta(&profile, Complex64::new(-1.0, 0.0), Side::Plus).unwrap();
        assert!(b.extrapolated && b.value.is_finite());
        assert!(alpha_of_theta(&profile, Complex64::new(0.0, 0.0)).is_err());
        assert!(beta_of_theta(&profile, Complex64::new(0.5, 0.0), Side::Plus).is_err());
    }

    #[test]
    fn beta_moduli_agree_and_unitarity_holds() {
        let profile = mixed();
        for theta in rotated_circle_grid(64) {
            let a = alpha_of_theta(&profile, theta).unwrap().value;
            let bp = beta_of_theta(&profile, theta, Side::Plus).unwrap().value;
            let bm = beta_of_theta(&profile, theta, Side::Minus).unwrap().value;
            assert!((bp.norm() - bm.norm()).abs() < 1e-12);
            assert!((bp + bm.conj()).norm() < 1e-12);
            assert!((a.norm_sqr() - bp.norm_sqr() - 1.0).abs() < 1e-10);
        }
        let single = CoefficientProfile::single_site(0, 0.5);
        assert!(beta_of_theta(&single, Complex64::i(), Side::Plus).unwrap().value.norm() > 1e-3);
    }

    #[test]
    fn scattering_relation_holds() {
        let window = GridWindow::symmetric(15).unwrap();
        let grid = rotated_circle_grid(32);
        assert!(scattering_relation_residual(&CoefficientProfile::free(), &grid, window).unwrap() < 1e-13);
        assert!(scattering_relation_residual(&CoefficientProfile::single_site(0, 0.5), &grid, window).unwrap() < 1e-9);
        assert!(scattering_relation_residual(&mixed(), &grid, window).unwrap() < 1e-9);
    }

    #[test]
    fn single_site_bound_state() {
        let window = GridWindow::symmetric(50).unwrap();
        let states = find_eigenvalues(&CoefficientProfile::single_site(0, 0.5), window).unwrap();
        assert_eq!(states.len(), 1);
        let theta = golden();
        assert!((states.thetas[0] - theta).abs() < 1e-12);
        assert!((states.lambdas[0] - 1.25f64.sqrt()).abs() < 1e-12);
        let inv = (1.0 + theta * theta) / (1.0 - theta * theta);
        assert!((1.0 / states.gammas[0] - inv).abs() < 1e-12);

        let states = find_eigenvalues(&CoefficientProfile::single_site(0, -0.5), window).unwrap();
        assert_eq!(states.len(), 1);
        assert!((states.thetas[0] + theta).abs() < 1e-12);
        assert!((states.lambdas[0] + 1.25f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn free_profile_has_no_bound_states() {
        let window = GridWindow::symmetric(50).unwrap();
        let states = find_eigenvalues(&CoefficientProfile::free(), window).unwrap();
        assert!(states.is_empty());
        assert_eq!(states.winding_count, 0);
    }

    #[test]
    fn norming_constant_matches_direct_sum() {
        let profile = mixed();
        let window = GridWindow::symmetric(60).unwrap();
        let states = find_eigenvalues(&profile, window).unwrap();
        for (&theta, &gamma) in states.thetas.iter().zip(&states.gammas) {
            let v = bound_state_vector(&profile, theta, window);
            let direct: f64 = v.values().iter().map(|z| z.norm_sqr()).sum();
            assert!((direct * gamma - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn two_wells_give_two_bound_states() {
        let profile = CoefficientProfile::new(-3, vec![0.5; 7], vec![0.8, 0.0, 0.0, 0.0, 0.0, 0.0, -0.9]).unwrap();
        let states = find_eigenvalues(&profile, GridWindow::symmetric(50).unwrap()).unwrap();
        assert_eq!(states.len(), 2);
        assert!(states.alpha_residuals.iter().all(|&r| r < 1e-8));
    }

    #[test]
    fn scattering_data_is_consistent() {
        let profile = mixed();
        let data = ScatteringData::compute(&profile, 256, GridWindow::symmetric(45).unwrap()).unwrap();
        assert!((data.alpha_coeffs[0] - 1.0).abs() < 1e-10);
        assert!(data.unitarity_defect() < 1e-10);
        assert!(data.beta_asymmetry() < 1e-12);
        assert!(data.wronskian_drift < 1e-12);
        for k in 0..20 {
            let theta = Complex64::from_polar(0.9 * (k as f64 / 20.0), 0.7 * k as f64);
            if theta.norm() == 0.0 {
                continue;
            }
            let direct = alpha_of_theta(&profile, theta).unwrap().value;
            assert!((data.alpha_from_coeffs(theta) - direct).norm() < 1e-8);
        }
        let mut out = Vec::new();
        data.write_csv(&mut out).unwrap();
        assert!(String::from_utf8(out).unwrap().starts_with("theta_re,theta_im,alpha_re"));
    }

    #[test]
    fn growth_proxy_is_sublinear_for_windowed_profiles() {
        assert!(alpha_growth_proxy(&mixed()).sublinear);
    }
}
