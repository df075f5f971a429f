//! The acceptance suite on built-in fixtures: ten criteria, each with a
//! numeric tolerance and a runtime budget.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use num_complex::Complex64;

use crate::continuation::{continuation_check, ContinuationVerdict, SiteStatus, SolutionTrace};
use crate::error::Result;
use crate::evolution::{evolve_direct, evolve_spectral, free_kernel, EvolutionConfig, Method};
use crate::fixtures;
use crate::growth::{default_ladder, exponential_type_from_coeffs, indicator_estimate, indicator_sum_check};
use crate::jost::{compute_jost, decay_bounds, jost_expansion_extract, verify_k_bounds, Side, DEFAULT_J_MAX};
use crate::lattice::{CoefficientProfile, ComplexSequence, GridWindow, WavePacket};
use crate::scattering::{
    alpha_of_theta, beta_of_theta, find_eigenvalues, rotated_circle_grid, scattering_relation_residual, unitarity_defect_at, wronskian,
};
use crate::spectral::{BoundStateMode, SpectralBasis};
use crate::uncertainty::{run_uncertainty_experiment, ExperimentConfig, ExperimentVerdict, InitialData, ScanVerdict};

/// Number of seeded random profiles and experiments.
pub const RANDOM_SEEDS: u64 = 100;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SelfCheckOptions {
    /// Compares the free-case Jost solutions against a deliberately wrong
    /// closed form; a negative control for the harness itself.
    pub inject_fault: bool,
}

#[derive(Debug, Clone)]
pub struct CriterionResult {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
    pub budget: Duration,
}

impl CriterionResult {
    /// `PASS`/`FAIL` line without timing, stable across runs.
    pub fn line(&self) -> String {
        format!(
            "criterion {:>2} {:<32} {}  {}",
            self.id,
            self.name,
            if self.passed { "PASS" } else { "FAIL" },
            self.detail
        )
    }
}

pub const CRITERIA: [(u8, &str, u64); 10] = [
    (1, "free-case closed forms", 1),
    (2, "Bessel kernel oracle", 10),
    (3, "single-site bound state", 5),
    (4, "scattering relation, unitarity", 60),
    (5, "Parseval and diagonalization", 60),
    (6, "K-coefficient bound", 30),
    (7, "Phi evolution identity", 10),
    (8, "dynamic uncertainty", 120),
    (9, "unique continuation", 10),
    (10, "growth estimators", 5),
];

pub fn run_criterion(id: u8, options: SelfCheckOptions) -> CriterionResult {
    let (_, name, budget) = CRITERIA
        .iter()
        .copied()
        .find(|c| c.0 == id)
        .unwrap_or_else(|| panic!("unknown criterion {id}"));
    let start = Instant::now();
    let outcome = match id {
        1 => free_closed_forms(options),
        2 => bessel_oracle(),
        3 => single_site_bound_state(),
        4 => scattering_relation(),
        5 => parseval(),
        6 => k_bound(),
        7 => phi_identity(),
        8 => uncertainty(),
        9 => continuation(),
        _ => growth(),
    };
    let elapsed = start.elapsed();
    let budget = Duration::from_secs(budget);
    let (mut passed, mut detail) = match outcome {
        Ok(pair) => pair,
        Err(e) => (false, format!("error: {e}")),
    };
    if elapsed > budget {
        passed = false;
        detail.push_str(&format!("; over the {}s budget", budget.as_secs()));
    }
    CriterionResult {
        id,
        name,
        passed,
        detail,
        elapsed,
        budget,
    }
}

pub fn run_all(options: SelfCheckOptions) -> Vec<CriterionResult> {
    CRITERIA.iter().map(|c| run_criterion(c.0, options)).collect()
}

type Outcome = Result<(bool, String)>;

fn free_closed_forms(options: SelfCheckOptions) -> Outcome {
    let free = CoefficientProfile::free();
    let window = GridWindow::symmetric(20)?;
    let offset = if options.inject_fault { 1e-6 } else { 0.0 };
    let mut worst = 0.0f64;
    for theta in rotated_circle_grid(512) {
        let plus = compute_jost(&free, theta, Side::Plus, window)?;
        let minus = compute_jost(&free, theta, Side::Minus, window)?;
        for n in window.indices() {
            let expected = theta.powi(n as i32) * (1.0 + offset);
            worst = worst.max((plus.values[n] - expected).norm());
            worst = worst.max((minus.values[n] - theta.powi(-n as i32)).norm());
        }
        worst = worst.max((alpha_of_theta(&free, theta)?.value - 1.0).norm());
        worst = worst.max(beta_of_theta(&free, theta, Side::Plus)?.value.norm());
        worst = worst.max(beta_of_theta(&free, theta, Side::Minus)?.value.norm());
        let reflected = ComplexSequence::from_fn(window, |n| theta.inv().powi(n as i32));
        let w = wronskian(&free, &plus.values, &reflected, 0)?;
        worst = worst.max((w - (1.0 - theta * theta) / (2.0 * theta)).norm());
    }
    Ok((worst <= 1e-12, format!("max error {worst:.2e}")))
}

fn bessel_oracle() -> Outcome {
    let free = CoefficientProfile::free();
    let window = GridWindow::symmetric(60)?;
    let u0 = WavePacket::new(0.0, ComplexSequence::delta(window, 0));
    let direct_cfg = EvolutionConfig {
        method: Method::Direct,
        ..Default::default()
    };
    let (mut kernel_err, mut method_gap) = (0.0f64, 0.0f64);
    for t in [0.25, 0.5, 1.0] {
        let spectral = evolve_spectral(&free, &u0, t, &EvolutionConfig::default())?;
        let direct = evolve_direct(&free, &u0, t, &direct_cfg)?;
        for n in -30..=30 {
            let exact = free_kernel(n, 0, t);
            kernel_err = kernel_err.max((spectral.values[n] - exact).norm());
            kernel_err = kernel_err.max((direct.values[n] - exact).norm());
        }
        method_gap = method_gap.max(spectral.values.distance(&direct.values));
    }
    Ok((
        kernel_err <= 1e-7 && method_gap <= 1e-6,
        format!("kernel error {kernel_err:.2e}, methods differ by {method_gap:.2e}"),
    ))
}

fn single_site_bound_state() -> Outcome {
    let profile = fixtures::single_site(0.5);
    let states = find_eigenvalues(&profile, GridWindow::symmetric(60)?)?;
    if states.len() != 1 {
        return Ok((false, format!("{} bound states", states.len())));
    }
    let lambda = 1.25f64.sqrt();
    let theta = lambda - 0.5;
    let inv_gamma = (1.0 + theta * theta) / (1.0 - theta * theta);
    let (dl, dt, dg) = (
        (states.lambdas[0] - lambda).abs(),
        (states.thetas[0] - theta).abs(),
        (1.0 / states.gammas[0] - inv_gamma).abs(),
    );
    Ok((
        dl <= 1e-8 && dt <= 1e-8 && dg <= 1e-6,
        format!("|Δλ| {dl:.1e}, |Δθ| {dt:.1e}, |Δγ⁻¹| {dg:.1e}"),
    ))
}

fn fixture_profiles() -> Vec<(String, CoefficientProfile)> {
    let mut out = vec![
        ("free".to_string(), fixtures::free()),
        ("single-site".to_string(), fixtures::single_site(0.5)),
    ];
    out.extend((0..RANDOM_SEEDS).map(|s| (format!("seed {s}"), fixtures::random_admissible(s))));
    out
}

fn scattering_relation() -> Outcome {
    let grid = rotated_circle_grid(256);
    let (mut relation, mut unitarity) = (0.0f64, 0.0f64);
    for (_, profile) in fixture_profiles() {
        let window = GridWindow::around(&profile, 10);
        relation = relation.max(scattering_relation_residual(&profile, &grid, window)?);
        for &theta in &grid {
            unitarity = unitarity.max(unitarity_defect_at(&profile, theta)?.abs());
        }
    }
    Ok((
        relation <= 1e-8 && unitarity <= 1e-8,
        format!("relation residual {relation:.2e}, unitarity defect {unitarity:.2e}"),
    ))
}

fn parseval() -> Outcome {
    let window = GridWindow::symmetric(200)?;
    let f = fixtures::random_sequence(11, GridWindow::symmetric(10)?);
    let (mut pars, mut diag) = (0.0f64, 0.0f64);
    let mut control = 0.0;
    for (name, profile) in [("free", fixtures::free()), ("single-site", fixtures::single_site(0.5))] {
        let basis = SpectralBasis::new(&profile, window, 2048)?;
        pars = pars.max(basis.parseval_residual(&f, BoundStateMode::Include)?);
        diag = diag.max(basis.diagonalization_residual(&f)?);
        if name == "single-site" {
            control = basis.parseval_residual(&f, BoundStateMode::Omit)?;
        }
    }
    Ok((
        pars <= 1e-8 && diag <= 1e-9 && control >= 1e-3,
        format!("Parseval {pars:.2e}, diagonalization {diag:.2e}, without point mass {control:.2e}"),
    ))
}

fn k_bound() -> Outcome {
    let mut worst = 0.0f64;
    let mut worst_name = String::new();
    let mut worst_shift0 = 0.0f64;
    let mut failing = 0;
    let profiles = fixture_profiles();
    for (name, profile) in &profiles {
        let window = GridWindow::new(profile.window_lo() - 4, profile.window_hi() + 4)?;
        let mut ok = true;
        for side in [Side::Plus, Side::Minus] {
            let expansion = jost_expansion_extract(profile, side, window, 512, DEFAULT_J_MAX)?;
            let bounds = decay_bounds(profile, side, window, DEFAULT_J_MAX);
            let report = verify_k_bounds(&expansion, &bounds)?;
            if report.max_ratio > worst {
                worst = report.max_ratio;
                worst_name = format!("{name}, {} side", side.label());
            }
            worst_shift0 = worst_shift0.max(report.max_ratio_without_offset);
            ok &= report.max_ratio <= 1.0 + 1e-6;
        }
        failing += usize::from(!ok);
    }
    Ok((
        worst <= 1.0 + 1e-6,
        format!(
            "max ratio {worst:.3e} ({worst_name}); {failing}/{} profiles over; tail without offset: max ratio {worst_shift0:.3e}",
            profiles.len()
        ),
    ))
}

fn fixture_experiments() -> Result<Vec<(&'static str, crate::uncertainty::ExperimentReport)>> {
    [("free", fixtures::free()), ("single-site", fixtures::single_site(0.5))]
        .into_iter()
        .map(|(name, p)| Ok((name, run_uncertainty_experiment(&p, &ExperimentConfig::default(), None)?)))
        .collect()
}

fn phi_identity() -> Outcome {
    let mut worst = 0.0f64;
    for (_, report) in fixture_experiments()? {
        let d = report.diagnostics.expect("nonzero data");
        for (r, res) in d.phi_residuals {
            if r == 1.0 || r == 0.9 {
                worst = worst.max(res);
            }
        }
    }
    Ok((worst <= 1e-7, format!("max residual {worst:.2e} on |θ| ∈ {{1, 0.9}}")))
}

fn uncertainty() -> Outcome {
    let mut ok = true;
    let mut notes = Vec::new();
    for (name, report) in fixture_experiments()? {
        let env = report.envelope;
        let d = report.diagnostics.as_ref().expect("nonzero data");
        let big = report
            .scan_t1
            .entries
            .iter()
            .filter(|e| (3..=12).contains(&e.n))
            .map(|e| e.ratio)
            .fold(0.0, f64::max);
        let case_ok = report.scan_t0.verdict == ScanVerdict::NotViolated
            && report.scan_t1.verdict == ScanVerdict::Violated
            && big > 10.0
            && d.type_t0.sigma <= env.type_limit() * 1.02
            && d.type_t1.sigma >= env.forced_type() * 0.95
            && env.forced_type() > env.type_limit();
        ok &= case_ok;
        notes.push(format!(
            "{name}: t1 ratio {big:.1e}, types {:.4}/{:.4}",
            d.type_t0.sigma, d.type_t1.sigma
        ));
    }
    let mut satisfied = 0;
    let mut failures = 0;
    for seed in 0..RANDOM_SEEDS {
        let cfg = ExperimentConfig {
            initial: InitialData::Random { seed: 1000 + seed },
            ..Default::default()
        };
        match run_uncertainty_experiment(&fixtures::random_admissible(seed), &cfg, None) {
            Ok(r) if r.verdict == ExperimentVerdict::SatisfiedAtBothTimes => satisfied += 1,
            Ok(_) => {}
            Err(_) => failures += 1,
        }
    }
    ok &= satisfied == 0 && failures == 0;
    notes.push(format!("{RANDOM_SEEDS} seeded runs: {satisfied} satisfied at both times, {failures} errors"));
    Ok((ok, notes.join("; ")))
}

fn continuation() -> Outcome {
    let profile = fixtures::single_site(0.5);
    let window = GridWindow::symmetric(40)?;

    let zeros = SolutionTrace::new(
        (0..85)
            .map(|k| WavePacket::new(0.01 * k as f64, ComplexSequence::zeros(window)))
            .collect(),
    )?;
    let zero_report = continuation_check(&profile, &zeros, &zeros, 0, 0.0)?;
    let zero_ok = zero_report.verdict == ContinuationVerdict::Coincide
        && zero_report.sites.len() == window.len()
        && zero_report.sites.iter().all(|s| s.certified_bound == 0.0 && s.derived.unwrap_or(0.0) == 0.0);

    let u0 = WavePacket::new(0.0, ComplexSequence::delta(window, 0));
    let spectral = SolutionTrace::sample(&profile, &u0, 85, 0.01, &EvolutionConfig::default())?;
    let direct_cfg = EvolutionConfig {
        method: Method::Direct,
        ..Default::default()
    };
    let direct = SolutionTrace::sample(&profile, &u0, 85, 0.01, &direct_cfg)?;
    let diff = spectral.difference(&direct)?;
    let tol = [0, 1]
        .iter()
        .map(|&n| diff.site(n).map(|v| v.iter().map(|z| z.norm()).fold(0.0, f64::max)))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    let methods = continuation_check(&profile, &spectral, &direct, 0, tol)?;
    let methods_ok = methods.verdict == ContinuationVerdict::Coincide;

    let n0 = -10;
    let perturbed = SolutionTrace::new(
        spectral
            .snapshots()
            .iter()
            .map(|p| {
                let mut q = p.clone();
                q.values.values_mut()[(n0 + 5 - window.n_lo()) as usize] += 1e-3;
                q
            })
            .collect(),
    )?;
    let flagged = continuation_check(&profile, &spectral, &perturbed, n0, 0.0)?;
    let flag_ok = flagged.site(n0 + 5).map(|s| s.status) == Some(SiteStatus::Disagree);

    Ok((
        zero_ok && methods_ok && flag_ok,
        format!(
            "zero trace {}, spectral vs direct {} (seed tolerance {tol:.1e}), perturbation {}",
            if zero_ok { "exact" } else { "not exact" },
            methods.verdict.describe(),
            flagged.verdict.describe()
        ),
    ))
}

fn growth() -> Outcome {
    let mut coeffs = Vec::with_capacity(200);
    let mut term = 1.0f64;
    for n in 0..200 {
        if n > 0 {
            term *= 2.0 / n as f64;
        }
        coeffs.push(Complex64::new(term, 0.0));
    }
    let sigma = exponential_type_from_coeffs(&coeffs)?.sigma;
    let type_ok = (sigma - 2.0).abs() <= 0.02 * 2.0;

    let ladder = default_ladder();
    let h0 = indicator_estimate(|z| z.exp(), 0.0, &ladder)?.value;
    let hpi = indicator_estimate(|z| z.exp(), PI, &ladder)?.value;
    let ind_ok = (h0 - 1.0).abs() <= 0.05 && (hpi + 1.0).abs() <= 0.05;

    let mut sums = vec![
        indicator_sum_check(|z| z.exp(), 0.0, &ladder)?.sum,
        indicator_sum_check(|z| z.cos(), PI / 2.0, &ladder)?.sum,
    ];
    for (_, report) in fixture_experiments()? {
        sums.push(report.diagnostics.expect("nonzero data").indicator_sum_t1.sum);
    }
    let min_sum = sums.iter().copied().fold(f64::INFINITY, f64::min);
    let sum_ok = min_sum >= -0.05;
    Ok((
        type_ok && ind_ok && sum_ok,
        format!("type {sigma:.4}, h(0) {h0:.4}, h(π) {hpi:.4}, min indicator sum {min_sum:.3}"),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn injected_fault_fails_criterion_one() {
        assert!(run_criterion(1, SelfCheckOptions::default()).passed);
        let faulty = run_criterion(1, SelfCheckOptions { inject_fault: true });
        assert!(!faulty.passed);
        assert!(faulty.line().contains("FAIL"));
    }
}
