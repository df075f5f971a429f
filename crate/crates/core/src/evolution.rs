//! Time evolution `u(t) = e^{-itH} u(0)`: through the spectral transform,
//! by the Cayley (trapezoidal) scheme, and by a Taylor series in time that
//! keeps relative accuracy at sites where `u` is far below roundoff of its
//! norm. The free Bessel kernel serves as the closed-form oracle.

use std::io::Write;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lattice::{apply_operator, BoundaryMode, ComplexSequence, CoefficientProfile, WavePacket};
use crate::spectral::{adequate_samples, BoundStateMode, SpectralBasis, DEFAULT_CIRCLE_SAMPLES};
use crate::tridiag::TridiagonalSolver;

pub const DEFAULT_TIME_STEP: f64 = 1e-3;
/// `|u|` at the window edge above this fraction of `‖u‖` counts as reflection.
pub const EDGE_TOLERANCE: f64 = 1e-12;
/// Relative size of the last Taylor term at which a site is converged.
const TAYLOR_TOLERANCE: f64 = 1e-18;
const TAYLOR_EXTRA_TERMS: usize = 600;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Method {
    #[default]
    Spectral,
    Direct,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolutionConfig {
    pub method: Method,
    /// Step of the Cayley scheme.
    pub time_step: f64,
    /// Circle samples `M` of the spectral method.
    pub circle_samples: usize,
    /// Free sites required between the support of `u0` and the window edge;
    /// `None` uses `ceil(|t|) + 20`.
    pub padding: Option<i64>,
    pub bound_states: BoundStateMode,
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        Self {
            method: Method::Spectral,
            time_step: DEFAULT_TIME_STEP,
            circle_samples: DEFAULT_CIRCLE_SAMPLES,
            padding: None,
            bound_states: BoundStateMode::Include,
        }
    }
}

pub fn required_padding(t: f64) -> i64 {
    t.abs().ceil() as i64 + 20
}

/// First and last index where `|u| > EDGE_TOLERANCE ‖u‖`.
pub fn effective_support(u: &ComplexSequence) -> Option<(i64, i64)> {
    let floor = EDGE_TOLERANCE * u.norm();
    let mut it = u.iter().filter(|(_, v)| v.norm() > floor).map(|(n, _)| n);
    let first = it.next()?;
    Some((first, it.last().unwrap_or(first)))
}

pub(crate) fn check_padding(u0: &WavePacket, t: f64, cfg: &EvolutionConfig) -> Result<()> {
    let padding = cfg.padding.unwrap_or_else(|| required_padding(t));
    let Some((first, last)) = effective_support(&u0.values) else {
        return Ok(());
    };
    let (lo, hi) = (u0.values.lo(), u0.values.hi());
    if first - lo < padding || hi - last < padding {
        return Err(Error::Padding(format!(
            "support [{first}, {last}] needs {padding} free sites inside the window [{lo}, {hi}]"
        )));
    }
    Ok(())
}

fn check_edges(u: &ComplexSequence) -> Result<()> {
    let limit = EDGE_TOLERANCE * u.norm();
    let values = u.values();
    let k = values.len().min(2);
    let edge = values[..k]
        .iter()
        .chain(&values[values.len() - k..])
        .map(|v| v.norm())
        .fold(0.0, f64::max);
    if edge > limit {
        return Err(Error::BoundaryReflection { edge, limit });
    }
    Ok(())
}

fn validate_time(t: f64) -> Result<()> {
    if !t.is_finite() {
        return Err(Error::Domain(format!("time {t} is not finite")));
    }
    Ok(())
}

/// Forward transform, phase `e^{-itλ}`, inverse transform.
pub fn evolve_spectral(
    profile: &CoefficientProfile,
    u0: &WavePacket,
    t: f64,
    cfg: &EvolutionConfig,
) -> Result<WavePacket> {
    validate_time(t)?;
    if t == 0.0 {
        return Ok(u0.clone());
    }
    check_padding(u0, t, cfg)?;
    let window = u0.values.window()?;
    if cfg.circle_samples <= window.len() {
        return Err(Error::Domain(format!(
            "{} circle samples cannot resolve a window of {} sites",
            cfg.circle_samples,
            window.len()
        )));
    }
    let samples = adequate_samples(profile, window, cfg.circle_samples)?;
    let basis = SpectralBasis::new(profile, window, samples)?;
    evolve_with_basis(&basis, u0, t, cfg.bound_states)
}

/// Spectral evolution with a prebuilt basis on the packet's window.
pub fn evolve_with_basis(
    basis: &SpectralBasis,
    u0: &WavePacket,
    t: f64,
    mode: BoundStateMode,
) -> Result<WavePacket> {
    let pair = basis.forward(&u0.values)?.evolve(t);
    let values = basis.inverse(&pair, mode)?;
    check_edges(&values)?;
    Ok(WavePacket::new(u0.time + t, values))
}

/// Cayley steps `(I + iΔt/2 H) u_{k+1} = (I - iΔt/2 H) u_k` for the matrix
/// with diagonal `diag` and off-diagonal `off` (Dirichlet truncation).
pub fn cayley_propagate(diag: &[f64], off: &[f64], u: &[Complex64], t: f64, time_step: f64) -> Vec<Complex64> {
    let len = diag.len();
    assert_eq!(u.len(), len);
    assert_eq!(off.len() + 1, len);
    let steps = (t.abs() / time_step).ceil().max(1.0) as usize;
    let h = Complex64::new(0.0, 0.5 * t / steps as f64);
    let lower: Vec<Complex64> = off.iter().map(|&a| h * a).collect();
    let main: Vec<Complex64> = diag.iter().map(|&b| 1.0 + h * b).collect();
    let solver = TridiagonalSolver::new(&lower, &main, &lower);
    let mut current = u.to_vec();
    let mut rhs = vec![Complex64::default(); len];
    for _ in 0..steps {
        for k in 0..len {
            let mut hu = diag[k] * current[k];
            if k > 0 {
                hu += off[k - 1] * current[k - 1];
            }
            if k + 1 < len {
                hu += off[k] * current[k + 1];
            }
            rhs[k] = current[k] - h * hu;
        }
        solver.solve_in_place(&mut rhs);
        std::mem::swap(&mut current, &mut rhs);
    }
    current
}

fn direct_with_coefficients(
    diag: Vec<f64>,
    off: Vec<f64>,
    u0: &WavePacket,
    t: f64,
    cfg: &EvolutionConfig,
) -> Result<WavePacket> {
    validate_time(t)?;
    if !(cfg.time_step > 0.0) {
        return Err(Error::Domain("time step must be positive".into()));
    }
    if t == 0.0 {
        return Ok(u0.clone());
    }
    check_padding(u0, t, cfg)?;
    let values = cayley_propagate(&diag, &off, u0.values.values(), t, cfg.time_step);
    let values = ComplexSequence::new(u0.values.lo(), values);
    check_edges(&values)?;
    Ok(WavePacket::new(u0.time + t, values))
}

/// Cayley integration of `i∂_t u = Hu` on the packet's window.
pub fn evolve_direct(
    profile: &CoefficientProfile,
    u0: &WavePacket,
    t: f64,
    cfg: &EvolutionConfig,
) -> Result<WavePacket> {
    let window = u0.values.window()?;
    let (diag, off) = profile.scaled_coefficients(window, 1.0, 0.0);
    direct_with_coefficients(diag, off, u0, t, cfg)
}

/// Cayley integration of `i∂_t v = (αH + β)v`.
pub fn evolve_direct_scaled(
    profile: &CoefficientProfile,
    u0: &WavePacket,
    t: f64,
    alpha: f64,
    beta: f64,
    cfg: &EvolutionConfig,
) -> Result<WavePacket> {
    let window = u0.values.window()?;
    let (diag, off) = profile.scaled_coefficients(window, alpha, beta);
    direct_with_coefficients(diag, off, u0, t, cfg)
}

pub fn evolve(profile: &CoefficientProfile, u0: &WavePacket, t: f64, cfg: &EvolutionConfig) -> Result<WavePacket> {
    match cfg.method {
        Method::Spectral => evolve_spectral(profile, u0, t, cfg),
        Method::Direct => evolve_direct(profile, u0, t, cfg),
    }
}

/// `Σ_k (-itH)^k u0 / k!` on the packet's window (zero outside), summed until
/// the last term is negligible relative to the partial sum at every site.
/// Times beyond 1 are split into unit pieces.
pub fn evolve_taylor(profile: &CoefficientProfile, u0: &WavePacket, t: f64) -> Result<WavePacket> {
    validate_time(t)?;
    let pieces = t.abs().ceil().max(1.0) as usize;
    let tau = t / pieces as f64;
    let mut current = u0.values.clone();
    if t != 0.0 {
        for _ in 0..pieces {
            current = taylor_piece(profile, &current, tau)?;
        }
    }
    Ok(WavePacket::new(u0.time + t, current))
}

fn taylor_piece(profile: &CoefficientProfile, u: &ComplexSequence, tau: f64) -> Result<ComplexSequence> {
    let len = u.len();
    let mut sum = u.clone();
    let mut term = u.clone();
    for k in 1..=len + TAYLOR_EXTRA_TERMS {
        let factor = Complex64::new(0.0, -tau / k as f64);
        term = apply_operator(profile, &term, BoundaryMode::ZeroExtend)?.scaled(factor);
        let mut converged = k >= len;
        for (s, d) in sum.values_mut().iter_mut().zip(term.values()) {
            *s += d;
            if converged && d.norm() > TAYLOR_TOLERANCE * s.norm() && d.norm() > f64::MIN_POSITIVE {
                converged = false;
            }
        }
        if converged {
            return Ok(sum);
        }
    }
    Err(Error::Precondition(format!(
        "time series did not converge within {} terms",
        len + TAYLOR_EXTRA_TERMS
    )))
}

/// `J_k(t)` from its power series. Accurate for `|t| ≲ 4`; terms below the
/// floating-point range are dropped.
pub fn bessel_j(k: i64, t: f64) -> f64 {
    let order = k.unsigned_abs();
    let sign = if k < 0 && order % 2 == 1 { -1.0 } else { 1.0 };
    let half = 0.5 * t;
    let mut term = 1.0;
    for j in 1..=order {
        term *= half / j as f64;
        if term == 0.0 {
            return 0.0;
        }
    }
    let mut sum = term;
    let q = half * half;
    let mut s = 0u64;
    loop {
        s += 1;
        term *= -q / (s as f64 * (s + order) as f64);
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() || term == 0.0 {
            break;
        }
    }
    sign * sum
}

/// Matrix element `(−i)^{n−m} J_{n−m}(t)` of `e^{-itH}` for the free profile.
pub fn free_kernel(n: i64, m: i64, t: f64) -> Complex64 {
    let d = n - m;
    let phase = match d.rem_euclid(4) {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, -1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, 1.0),
    };
    phase * bessel_j(d, t)
}

/// `‖spectral − direct‖ / ‖u0‖`.
pub fn cross_validate(profile: &CoefficientProfile, u0: &WavePacket, t: f64, cfg: &EvolutionConfig) -> Result<f64> {
    let norm = u0.norm();
    if norm == 0.0 {
        return Ok(0.0);
    }
    let spectral = evolve_spectral(profile, u0, t, cfg)?;
    let direct = evolve_direct(profile, u0, t, cfg)?;
    Ok(spectral.values.distance(&direct.values) / norm)
}

/// Writes several snapshots into one `t,n,re_u,im_u,abs_u` table.
pub fn write_snapshots<W: Write>(packets: &[WavePacket], writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(["t", "n", "re_u", "im_u", "abs_u"])?;
    for p in packets {
        p.append_rows(&mut wtr)?;
    }
    wtr.flush()?;
    Ok(())
}
