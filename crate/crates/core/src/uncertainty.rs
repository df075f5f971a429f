//! The auxiliary function `Φ(t, θ) = Σ_n u(t, n) e^-(θ, n)`, its split into
//! `A_1 + β_+ A_2 + α B`, the series `B_1`, `B_2`, and the end-to-end
//! dynamic uncertainty experiment: a nonzero solution cannot stay below the
//! envelope `C (T e / ((4+ε) n))^n` at two times `T` apart.

use std::f64::consts::{E, FRAC_PI_2, PI};
use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::evolution::{evolve_direct, evolve_spectral, evolve_taylor, EvolutionConfig};
use crate::fixtures;
use crate::growth::{exponential_type_from_coeffs, indicator_estimate, indicator_sum_check, power_series, IndicatorSum, TypeEstimate};
use crate::jost::{decay_bounds, jost_expansion_extract, jost_values, Side};
use crate::lattice::{admissibility_check, CoefficientProfile, ComplexSequence, GridWindow, WavePacket};
use crate::scattering::{alpha_raw, beta_raw};

/// Amplitudes below this fraction of `‖u‖` are not used for verdicts.
pub const NOISE_FLOOR: f64 = 1e-12;
pub const DEFAULT_SCAN_FIRST: i64 = 3;
pub const DEFAULT_SCAN_LAST: i64 = 25;
/// Coefficients `v(t, 0..TYPE_COEFFICIENTS)` used for type estimates.
pub const TYPE_COEFFICIENTS: usize = 64;
/// Coefficients kept for evaluating `B_1(t, ·)`.
pub const SERIES_COEFFICIENTS: usize = 100;
/// Radii for indicator estimates of `B_1`; kept small enough that the
/// truncated series does not cancel below roundoff in the decaying directions.
pub const B1_LADDER: [f64; 6] = [4.0, 8.0, 12.0, 16.0, 20.0, 24.0];
pub const J_MAX: usize = 64;
const K_SAMPLES: usize = 512;
const PHI_SAMPLES: usize = 256;

/// `envelope(n) = C (T e / ((4+ε) n))^n` for `n ≥ 1`, and `C` at `n = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopeSpec {
    pub epsilon: f64,
    pub constant: f64,
    pub time_gap: f64,
}

impl Default for EnvelopeSpec {
    fn default() -> Self {
        Self {
            epsilon: 0.5,
            constant: 1.0,
            time_gap: 1.0,
        }
    }
}

impl EnvelopeSpec {
    pub fn new(epsilon: f64, constant: f64, time_gap: f64) -> Result<Self> {
        for (name, v) in [("ε", epsilon), ("C", constant), ("time gap", time_gap)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Domain(format!("{name} must be positive and finite, got {v}")));
            }
        }
        Ok(Self {
            epsilon,
            constant,
            time_gap,
        })
    }

    /// `log` of the envelope without the constant.
    pub fn ln_shape(&self, n: i64) -> f64 {
        if n <= 0 {
            return 0.0;
        }
        let nf = n as f64;
        nf * (self.time_gap * E / ((4.0 + self.epsilon) * nf)).ln()
    }

    pub fn shape(&self, n: i64) -> f64 {
        self.ln_shape(n).exp()
    }

    pub fn value(&self, n: i64) -> f64 {
        self.constant * self.shape(n)
    }

    /// `1/(4+ε)`, the type bound for `B_1`.
    pub fn type_limit(&self) -> f64 {
        1.0 / (4.0 + self.epsilon)
    }

    /// `1/2 - 1/(4+ε)`, the growth forced at the later time.
    pub fn forced_type(&self) -> f64 {
        0.5 - self.type_limit()
    }

    /// Scan range `[first, n]` with `n ≤ last` the largest index at which the
    /// envelope is above `floor`.
    pub fn measurable_range(&self, first: i64, last: i64, floor: f64) -> Option<(i64, i64)> {
        let top = (first..=last).take_while(|&n| self.value(n) > floor).last()?;
        Some((first, top))
    }
}

/// `v(n) = u(n) / A_+(n)` for `n ≥ 0` inside the packet's window.
pub fn v_values(profile: &CoefficientProfile, u: &ComplexSequence) -> Vec<Complex64> {
    (0.max(u.lo())..=u.hi())
        .map(|n| u[n] / profile.a_plus(n))
        .collect()
}

fn v_coefficients(profile: &CoefficientProfile, u: &ComplexSequence, count: usize) -> Vec<Complex64> {
    (0..count as i64)
        .map(|n| u.get_or_zero(n) / profile.a_plus(n))
        .collect()
}

fn check_grid(thetas: &[Complex64]) -> Result<()> {
    for t in thetas {
        let r = t.norm();
        if r == 0.0 || r > 1.0 + 1e-12 {
            return Err(Error::Domain(format!("Φ is evaluated for 0 < |θ| ≤ 1, got |θ| = {r}")));
        }
        if (1.0 - t * t).norm() < crate::scattering::POLE_GUARD {
            return Err(Error::Domain("θ-grid must avoid θ² = 1".into()));
        }
    }
    Ok(())
}

/// `M` rotated points on the circle of radius `r` (never on the real axis).
pub fn circle_grid(m_samples: usize, radius: f64) -> Vec<Complex64> {
    (0..m_samples)
        .map(|k| Complex64::from_polar(radius, PI * (2 * k + 1) as f64 / m_samples as f64))
        .collect()
}

/// `Φ(θ) = Σ_n u(n) e^-(θ, n)`.
pub fn phi_values(profile: &CoefficientProfile, u: &ComplexSequence, thetas: &[Complex64]) -> Result<Vec<Complex64>> {
    check_grid(thetas)?;
    Ok(thetas
        .iter()
        .map(|&t| {
            let e = jost_values(profile, t, Side::Minus, u.lo(), u.hi());
            u.values().iter().zip(&e).map(|(a, b)| a * b).sum()
        })
        .collect())
}

#[derive(Debug, Clone)]
pub struct PhiDecomposition {
    pub theta_grid: Vec<Complex64>,
    pub phi: Vec<Complex64>,
    pub a1: Vec<Complex64>,
    pub a2: Vec<Complex64>,
    pub b: Vec<Complex64>,
    pub alpha: Vec<Complex64>,
    pub beta_plus: Vec<Complex64>,
    /// `B_1(θ^{-1}) + B_2(θ^{-1})` from `v` and the `K_{+,j}` coefficients.
    pub b_from_series: Vec<Complex64>,
    pub v_values: Vec<Complex64>,
    /// `max |Φ - (A_1 + β_+ A_2 + α B)| / max(1, |Φ|)`.
    pub decomposition_residual: f64,
    /// `max |B - (B_1 + B_2)| / max(1, |B|)`.
    pub series_residual: f64,
}

pub fn phi_transform(profile: &CoefficientProfile, u: &WavePacket, thetas: &[Complex64]) -> Result<PhiDecomposition> {
    check_grid(thetas)?;
    let seq = &u.values;
    let (lo, hi) = (seq.lo(), seq.hi());
    let phi = phi_values(profile, seq, thetas)?;
    let v = v_values(profile, seq);

    // K_{+,j}(n) for the rows where they can be nonzero
    let k_hi = profile.window_hi().max(1);
    let k_window = GridWindow::new(profile.window_lo().min(0) - 1, k_hi + 1)?;
    let expansion = jost_expansion_extract(profile, Side::Plus, k_window, K_SAMPLES, J_MAX)?;

    let mut out = PhiDecomposition {
        theta_grid: thetas.to_vec(),
        phi,
        a1: Vec::with_capacity(thetas.len()),
        a2: Vec::with_capacity(thetas.len()),
        b: Vec::with_capacity(thetas.len()),
        alpha: Vec::with_capacity(thetas.len()),
        beta_plus: Vec::with_capacity(thetas.len()),
        b_from_series: Vec::with_capacity(thetas.len()),
        v_values: v,
        decomposition_residual: 0.0,
        series_residual: 0.0,
    };
    for (k, &theta) in thetas.iter().enumerate() {
        let e_minus = jost_values(profile, theta, Side::Minus, lo, hi);
        let a1: Complex64 = seq.iter().filter(|(n, _)| *n < 0).map(|(n, x)| x * e_minus[(n - lo) as usize]).sum();
        let (a2, b) = if hi >= 0 {
            let start = lo.max(0);
            let e_plus = jost_values(profile, theta, Side::Plus, start, hi);
            let e_plus_inv = jost_values(profile, theta.inv(), Side::Plus, start, hi);
            let pos = &seq.values()[(start - lo) as usize..];
            (
                pos.iter().zip(&e_plus).map(|(x, e)| x * e).sum(),
                pos.iter().zip(&e_plus_inv).map(|(x, e)| x * e).sum(),
            )
        } else {
            (Complex64::default(), Complex64::default())
        };
        let alpha = alpha_raw(profile, theta);
        let beta = beta_raw(profile, theta, Side::Plus);
        let phi = out.phi[k];
        out.decomposition_residual = out
            .decomposition_residual
            .max((phi - (a1 + beta * a2 + alpha * b)).norm() / phi.norm().max(1.0));

        let z = theta.inv();
        let b1 = power_series(&out.v_values, z) * z.powi(0.max(lo) as i32);
        let mut b2 = Complex64::default();
        for n in 0.max(lo)..=hi.min(k_hi) {
            let row = &expansion.k_table[(n - k_window.n_lo()) as usize];
            let tail = row[1..].iter().rev().fold(Complex64::default(), |acc, &c| acc * z + c) * z;
            b2 += seq[n] / profile.a_plus(n) * z.powi(n as i32) * tail;
        }
        let series = b1 + b2;
        out.series_residual = out.series_residual.max((b - series).norm() / b.norm().max(1.0));

        out.a1.push(a1);
        out.a2.push(a2);
        out.b.push(b);
        out.alpha.push(alpha);
        out.beta_plus.push(beta);
        out.b_from_series.push(series);
    }
    Ok(out)
}

/// `max |Φ(t_1, θ) - e^{-i(t_1-t_0)λ(θ)} Φ(t_0, θ)| / max(1, |Φ(t_0, θ)|)`.
pub fn phi_evolution_residual(
    profile: &CoefficientProfile,
    u0: &WavePacket,
    u1: &WavePacket,
    thetas: &[Complex64],
) -> Result<f64> {
    let t = u1.time - u0.time;
    let phi0 = phi_values(profile, &u0.values, thetas)?;
    let phi1 = phi_values(profile, &u1.values, thetas)?;
    Ok(thetas
        .iter()
        .zip(phi0.iter().zip(&phi1))
        .map(|(&theta, (p0, p1))| {
            let lambda = 0.5 * (theta + theta.inv());
            let phase = (Complex64::new(0.0, -t) * lambda).exp();
            (p1 - phase * p0).norm() / p0.norm().max(1.0)
        })
        .fold(0.0, f64::max))
}

/// `b_j = Σ_{k<j} v(k) K_{+,j-k}(k)` with the bound
/// `C_v C_K (2/j)^{(1+δ)j} Σ_{k<j} (T e/((4+ε)k))^k`.
#[derive(Debug, Clone)]
pub struct BCoefficients {
    /// `b_1 ..= b_{J_max}`.
    pub values: Vec<Complex64>,
    pub bounds: Vec<f64>,
    /// Roundoff level of each `b_j` from the coefficient extraction.
    pub noise: Vec<f64>,
    /// `max_k |v(k)| / shape(k)`.
    pub c_v: f64,
    /// `sup D_{+} · max_N C_+(N) N^{2N(1+δ)}`.
    pub c_k: f64,
    pub max_ratio: f64,
    pub within_bounds: bool,
}

pub fn b_coefficients(
    profile: &CoefficientProfile,
    u: &WavePacket,
    j_max: usize,
    env: &EnvelopeSpec,
) -> Result<BCoefficients> {
    if j_max == 0 {
        return Err(Error::Domain("J_max must be positive".into()));
    }
    let window = GridWindow::new(profile.window_lo().min(0) - 1, (j_max as i64).max(profile.window_hi() + 1))?;
    let samples = (2 * j_max).next_power_of_two().max(K_SAMPLES);
    let expansion = jost_expansion_extract(profile, Side::Plus, window, samples, j_max)?;
    let bounds_data = decay_bounds(profile, Side::Plus, window, j_max);
    let v = v_coefficients(profile, &u.values, j_max);
    let row = |k: usize| (k as i64 - window.n_lo()) as usize;

    let mut values = Vec::with_capacity(j_max);
    let mut noise = Vec::with_capacity(j_max);
    for j in 1..=j_max {
        let mut sum = Complex64::default();
        let mut level = 0.0;
        for (k, vk) in v.iter().enumerate().take(j) {
            sum += vk * expansion.k_table[row(k)][j - k];
            level += vk.norm() * expansion.noise[row(k)];
        }
        values.push(sum);
        noise.push(level);
    }

    let ln_c_v = v
        .iter()
        .enumerate()
        .filter(|(_, x)| x.norm() > 0.0)
        .map(|(k, x)| x.norm().ln() - env.ln_shape(k as i64))
        .fold(f64::NEG_INFINITY, f64::max);
    let delta = profile.decay_exponent();
    let ln_c_sdec = (1..=profile.window_hi())
        .filter(|&n| bounds_data.c_plus(n) > 0.0)
        .map(|n| bounds_data.c_plus(n).ln() + 2.0 * n as f64 * (1.0 + delta) * (n as f64).ln())
        .fold(f64::NEG_INFINITY, f64::max);
    let ln_c_k = bounds_data.d_sup().ln() + ln_c_sdec;

    let mut bounds = Vec::with_capacity(j_max);
    let mut partial = 0.0f64;
    let mut max_ratio = 0.0f64;
    let mut within_bounds = true;
    for j in 1..=j_max {
        partial += env.shape(j as i64 - 1);
        let jf = j as f64;
        let ln_bound = ln_c_v + ln_c_k + (1.0 + delta) * jf * (2.0 / jf).ln() + partial.ln();
        let bound = ln_bound.exp();
        let size = values[j - 1].norm();
        let ratio = if size <= noise[j - 1] {
            0.0
        } else if bound == 0.0 {
            f64::INFINITY
        } else {
            size / bound
        };
        max_ratio = max_ratio.max(ratio);
        if ratio > 1.0 + 1e-6 {
            within_bounds = false;
        }
        bounds.push(bound);
    }
    Ok(BCoefficients {
        values,
        bounds,
        noise,
        c_v: ln_c_v.exp(),
        c_k: ln_c_k.exp(),
        max_ratio,
        within_bounds,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EntryStatus {
    Violated,
    WithinEnvelope,
    /// `|u(n)|` is at or below the noise floor.
    Indeterminate,
}

impl EntryStatus {
    pub fn flag(self) -> &'static str {
        match self {
            EntryStatus::Violated => "violated",
            EntryStatus::WithinEnvelope => "within",
            EntryStatus::Indeterminate => "indeterminate",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanEntry {
    pub n: i64,
    pub abs_u: f64,
    pub envelope: f64,
    pub ratio: f64,
    pub status: EntryStatus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScanVerdict {
    Violated,
    NotViolated,
    /// Nothing in range rose above the noise floor.
    Indeterminate,
    /// `u ≡ 0`, which satisfies every envelope.
    Vacuous,
}

#[derive(Debug, Clone)]
pub struct ScanReport {
    pub time: f64,
    pub noise_floor: f64,
    pub entries: Vec<ScanEntry>,
    pub verdict: ScanVerdict,
}

impl ScanReport {
    /// Largest measurable ratio and its site.
    pub fn max_ratio(&self) -> Option<(i64, f64)> {
        self.entries
            .iter()
            .filter(|e| e.status != EntryStatus::Indeterminate)
            .map(|e| (e.n, e.ratio))
            .fold(None, |best: Option<(i64, f64)>, x| match best {
                Some(b) if b.1 >= x.1 => Some(b),
                _ => Some(x),
            })
    }

    /// Not violated and every entry measurable.
    pub fn fully_satisfied(&self) -> bool {
        self.verdict == ScanVerdict::NotViolated
            && self.entries.iter().all(|e| e.status != EntryStatus::Indeterminate)
    }
}

/// Compares `|u(n)|` with the envelope on `first..=last`. The noise floor
/// defaults to `1e-12 ‖u‖`.
pub fn envelope_violation_scan(
    u: &WavePacket,
    env: &EnvelopeSpec,
    first: i64,
    last: i64,
    noise_floor: Option<f64>,
) -> Result<ScanReport> {
    if first < 1 || last < first {
        return Err(Error::Domain(format!("scan range [{first}, {last}] must be a nonempty range of positive sites")));
    }
    let norm = u.norm();
    let noise_floor = noise_floor.unwrap_or(NOISE_FLOOR * norm);
    let entries: Vec<ScanEntry> = (first..=last)
        .map(|n| {
            let abs_u = u.values.get_or_zero(n).norm();
            let envelope = env.value(n);
            let ratio = abs_u / envelope;
            let status = if abs_u <= noise_floor {
                EntryStatus::Indeterminate
            } else if ratio > 1.0 {
                EntryStatus::Violated
            } else {
                EntryStatus::WithinEnvelope
            };
            ScanEntry {
                n,
                abs_u,
                envelope,
                ratio,
                status,
            }
        })
        .collect();
    let verdict = if norm == 0.0 {
        ScanVerdict::Vacuous
    } else if entries.iter().any(|e| e.status == EntryStatus::Violated) {
        ScanVerdict::Violated
    } else if entries.iter().any(|e| e.status == EntryStatus::WithinEnvelope) {
        ScanVerdict::NotViolated
    } else {
        ScanVerdict::Indeterminate
    };
    Ok(ScanReport {
        time: u.time,
        noise_floor,
        entries,
        verdict,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialData {
    /// `u0(n) = envelope(n)` for `n ≥ 1`, `u0(0) = 1`, zero for `n < 0`.
    Envelope,
    Zero,
    /// Envelope-bounded random data: `|u0(n)| ∈ [1/2, 1]·envelope(n)` with
    /// random phases for `n ≥ 0`, and a geometrically decaying random
    /// negative side.
    Random { seed: u64 },
    Given(WavePacket),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub envelope: EnvelopeSpec,
    pub window: GridWindow,
    pub initial: InitialData,
    pub evolution: EvolutionConfig,
    pub scan_first: i64,
    pub scan_last: i64,
    /// Allowed relative disagreement between evolution methods.
    pub cross_tolerance: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            envelope: EnvelopeSpec::default(),
            window: GridWindow::new(-80, 128).expect("valid window"),
            initial: InitialData::Envelope,
            evolution: EvolutionConfig::default(),
            scan_first: DEFAULT_SCAN_FIRST,
            scan_last: DEFAULT_SCAN_LAST,
            cross_tolerance: 1e-6,
        }
    }
}

pub fn initial_packet(cfg: &ExperimentConfig) -> Result<WavePacket> {
    let env = cfg.envelope;
    let window = cfg.window;
    let values = match &cfg.initial {
        InitialData::Envelope => ComplexSequence::from_fn(window, |n| match n {
            n if n < 0 => Complex64::default(),
            0 => Complex64::new(1.0, 0.0),
            n => Complex64::new(env.value(n), 0.0),
        }),
        InitialData::Zero => ComplexSequence::zeros(window),
        InitialData::Random { seed } => {
            let mut rng = fixtures::rng(*seed);
            ComplexSequence::from_fn(window, |n| {
                let phase = rng.gen_range(0.0..2.0 * PI);
                let size = if n >= 0 {
                    rng.gen_range(0.5..=1.0) * env.value(n).min(1.0)
                } else if n >= -50 {
                    rng.gen_range(0.0..1.0) * 0.5f64.powi(-n as i32)
                } else {
                    0.0
                };
                Complex64::from_polar(size, phase)
            })
        }
        InitialData::Given(packet) => return Ok(packet.clone()),
    };
    Ok(WavePacket::new(0.0, values))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentVerdict {
    TrivialSolution,
    Violated { at_t0: bool, at_t1: bool },
    NotViolatedWithinMeasurableRange,
    /// Never expected for nonzero data.
    SatisfiedAtBothTimes,
}

impl ExperimentVerdict {
    pub fn describe(&self) -> String {
        match self {
            ExperimentVerdict::TrivialSolution => "consistent with trivial solution".into(),
            ExperimentVerdict::Violated { at_t0, at_t1 } => match (at_t0, at_t1) {
                (true, true) => "violated at t=0 and t=1".into(),
                (true, false) => "violated at t=0".into(),
                _ => "violated at t=1".into(),
            },
            ExperimentVerdict::NotViolatedWithinMeasurableRange => "not violated within measurable range".into(),
            ExperimentVerdict::SatisfiedAtBothTimes => "satisfied at both times".into(),
        }
    }
}

/// Numbers computed for a nonzero experiment.
#[derive(Debug, Clone)]
pub struct ExperimentDiagnostics {
    /// `‖spectral - direct‖ / ‖u0‖` at the later time.
    pub cross_validation: f64,
    /// `‖series - spectral‖ / ‖u0‖` at the later time.
    pub series_deviation: f64,
    pub type_t0: TypeEstimate,
    pub type_t1: TypeEstimate,
    /// Indicator of `B_1(t_1, ·)` at `φ = π/2`.
    pub indicator_t1: f64,
    pub indicator_sum_t1: IndicatorSum,
    /// `(|θ|, residual)` of the evolution identity for `Φ`.
    pub phi_residuals: Vec<(f64, f64)>,
    pub decomposition_residual: f64,
    pub series_residual: f64,
    pub b_t0: BCoefficients,
}

#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub envelope: EnvelopeSpec,
    pub initial_norm: f64,
    pub scan_t0: ScanReport,
    pub scan_t1: ScanReport,
    pub verdict: ExperimentVerdict,
    pub diagnostics: Option<ExperimentDiagnostics>,
}

impl ExperimentReport {
    /// Writes `t,n,abs_u,envelope,ratio,verdict_flag` for both scans.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        wtr.write_record(["t", "n", "abs_u", "envelope", "ratio", "verdict_flag"])?;
        for scan in [&self.scan_t0, &self.scan_t1] {
            for e in &scan.entries {
                wtr.write_record([
                    scan.time.to_string(),
                    e.n.to_string(),
                    format!("{:.17e}", e.abs_u),
                    format!("{:.17e}", e.envelope),
                    format!("{:.17e}", e.ratio),
                    e.status.flag().to_string(),
                ])?;
            }
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn summary(&self) -> String {
        let env = &self.envelope;
        let mut s = String::new();
        let _ = writeln!(s, "epsilon = {}, C = {}, time gap = {}", env.epsilon, env.constant, env.time_gap);
        let _ = writeln!(s, "|u0| = {:.6e}", self.initial_norm);
        for scan in [&self.scan_t0, &self.scan_t1] {
            let witness = scan
                .max_ratio()
                .map(|(n, r)| format!(", max ratio {r:.4e} at n = {n}"))
                .unwrap_or_default();
            let _ = writeln!(
                s,
                "scan t = {}: {:?} over n = {}..={}{witness}",
                scan.time,
                scan.verdict,
                scan.entries.first().map_or(0, |e| e.n),
                scan.entries.last().map_or(0, |e| e.n)
            );
        }
        if let Some(d) = &self.diagnostics {
            let _ = writeln!(s, "spectral vs direct: {:.3e}; series vs spectral: {:.3e}", d.cross_validation, d.series_deviation);
            let _ = writeln!(s, "type of B1 at t0: {:.6} (bound {:.6})", d.type_t0.sigma, env.type_limit());
            let _ = writeln!(
                s,
                "type of B1 at t1: {:.6} (forced growth {:.6} exceeds bound {:.6})",
                d.type_t1.sigma,
                env.forced_type(),
                env.type_limit()
            );
            let _ = writeln!(s, "indicator of B1 at t1, phi = pi/2: {:.6}; sum with phi = -pi/2: {:.6}", d.indicator_t1, d.indicator_sum_t1.sum);
            for (r, res) in &d.phi_residuals {
                let _ = writeln!(s, "Phi evolution residual on |theta| = {r}: {res:.3e}");
            }
            let _ = writeln!(s, "Phi decomposition residual: {:.3e}; B series residual: {:.3e}", d.decomposition_residual, d.series_residual);
            let _ = writeln!(s, "b_j against bound chain: max ratio {:.3e} ({})", d.b_t0.max_ratio, if d.b_t0.within_bounds { "within" } else { "exceeded" });
        }
        let _ = writeln!(s, "verdict: {}", self.verdict.describe());
        s
    }
}

/// Runs the two-time experiment, optionally writing `experiment.csv` and
/// `summary.txt` into `out_dir`.
pub fn run_uncertainty_experiment(
    profile: &CoefficientProfile,
    cfg: &ExperimentConfig,
    out_dir: Option<&Path>,
) -> Result<ExperimentReport> {
    if !admissibility_check(profile).admissible() {
        return Err(Error::Precondition("the profile is not admissible for its (C, δ)".into()));
    }
    let env = cfg.envelope;
    let u0 = initial_packet(cfg)?;
    let initial_norm = u0.norm();
    let t = env.time_gap;
    let range = |u: &WavePacket| {
        env.measurable_range(cfg.scan_first, cfg.scan_last, NOISE_FLOOR * u.norm())
            .unwrap_or((cfg.scan_first, cfg.scan_first))
    };

    let report = if initial_norm == 0.0 {
        let u1 = WavePacket::new(t, u0.values.clone());
        let (a, b) = range(&u0);
        ExperimentReport {
            envelope: env,
            initial_norm,
            scan_t0: envelope_violation_scan(&u0, &env, a, b, None)?,
            scan_t1: envelope_violation_scan(&u1, &env, a, b, None)?,
            verdict: ExperimentVerdict::TrivialSolution,
            diagnostics: None,
        }
    } else {
        let spectral = evolve_spectral(profile, &u0, t, &cfg.evolution)?;
        let direct = evolve_direct(profile, &u0, t, &cfg.evolution)?;
        let cross_validation = spectral.values.distance(&direct.values) / initial_norm;
        if cross_validation > cfg.cross_tolerance {
            return Err(Error::CrossValidation(cross_validation));
        }
        let series = evolve_taylor(profile, &u0, t)?;
        let series_deviation = series.values.distance(&spectral.values) / initial_norm;
        if series_deviation > cfg.cross_tolerance {
            return Err(Error::CrossValidation(series_deviation));
        }

        let (a0, b0) = range(&u0);
        let (a1, b1) = range(&spectral);
        let scan_t0 = envelope_violation_scan(&u0, &env, a0, b0, None)?;
        let scan_t1 = envelope_violation_scan(&spectral, &env, a1, b1, None)?;

        let type_t0 = exponential_type_from_coeffs(&v_coefficients(profile, &u0.values, TYPE_COEFFICIENTS))?;
        let type_t1 = exponential_type_from_coeffs(&v_coefficients(profile, &series.values, TYPE_COEFFICIENTS))?;
        let b1_coeffs = v_coefficients(profile, &series.values, SERIES_COEFFICIENTS);
        let b1 = |z: Complex64| power_series(&b1_coeffs, z);
        let indicator_t1 = indicator_estimate(b1, FRAC_PI_2, &B1_LADDER)?.value;
        let indicator_sum_t1 = indicator_sum_check(b1, FRAC_PI_2, &B1_LADDER)?;

        // the series solution keeps relative accuracy where |θ|^{-n} amplifies
        let phi_residuals = [1.0, 0.9, 0.5]
            .iter()
            .map(|&r| Ok((r, phi_evolution_residual(profile, &u0, &series, &circle_grid(PHI_SAMPLES, r))?)))
            .collect::<Result<Vec<_>>>()?;
        let decomposition = phi_transform(profile, &u0, &circle_grid(64, 1.0))?;
        let b_t0 = b_coefficients(profile, &u0, J_MAX, &env)?;

        let at_t0 = scan_t0.verdict == ScanVerdict::Violated;
        let at_t1 = scan_t1.verdict == ScanVerdict::Violated;
        let verdict = if at_t0 || at_t1 {
            ExperimentVerdict::Violated { at_t0, at_t1 }
        } else if scan_t0.fully_satisfied() && scan_t1.fully_satisfied() {
            ExperimentVerdict::SatisfiedAtBothTimes
        } else {
            ExperimentVerdict::NotViolatedWithinMeasurableRange
        };
        ExperimentReport {
            envelope: env,
            initial_norm,
            scan_t0,
            scan_t1,
            verdict,
            diagnostics: Some(ExperimentDiagnostics {
                cross_validation,
                series_deviation,
                type_t0,
                type_t1,
                indicator_t1,
                indicator_sum_t1,
                phi_residuals,
                decomposition_residual: decomposition.decomposition_residual,
                series_residual: decomposition.series_residual,
                b_t0,
            }),
        }
    };

    if let Some(dir) = out_dir {
        std::fs::create_dir_all(dir)?;
        report.write_csv(std::fs::File::create(dir.join("experiment.csv"))?)?;
        std::fs::write(dir.join("summary.txt"), report.summary())?;
    }
    Ok(report)
}
