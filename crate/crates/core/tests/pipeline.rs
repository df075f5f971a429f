//! End-to-end runs across modules, through files where the CLI would.

use std::fs::File;

use num_complex::Complex64;
use tempfile::TempDir;

use jacobi_core::continuation::{continuation_check, ContinuationVerdict, SolutionTrace};
use jacobi_core::evolution::{bessel_j, evolve, EvolutionConfig, Method};
use jacobi_core::fixtures;
use jacobi_core::lattice::{CoefficientProfile, ComplexSequence, GridWindow, WavePacket};
use jacobi_core::scattering::find_eigenvalues;
use jacobi_core::spectral::{forward_transform, inverse_transform};
use jacobi_core::uncertainty::{run_uncertainty_experiment, ExperimentConfig, ExperimentVerdict};

#[test]
fn profile_and_packet_survive_a_csv_round_trip() {
    let dir = TempDir::new().unwrap();
    let profile = fixtures::random_admissible(7);
    let path = dir.path().join("profile.csv");
    profile.write_csv(File::create(&path).unwrap()).unwrap();
    let back = CoefficientProfile::read_csv(File::open(&path).unwrap()).unwrap();
    assert_eq!(back.window_lo(), profile.window_lo());
    assert_eq!(back.a_values(), profile.a_values());
    assert_eq!(back.b_values(), profile.b_values());

    let window = GridWindow::symmetric(60).unwrap();
    let u0 = WavePacket::new(0.0, fixtures::gaussian_packet(window, 0.0, 3.0, 0.7));
    let u1 = evolve(&profile, &u0, 2.0, &EvolutionConfig::default()).unwrap();
    let path = dir.path().join("u1.csv");
    u1.write_csv(File::create(&path).unwrap()).unwrap();
    let read = WavePacket::read_csv(File::open(&path).unwrap()).unwrap();
    assert_eq!(read, u1);
}

#[test]
fn transform_round_trip_recovers_the_sequence() {
    let profile = fixtures::single_site(0.5);
    let f = fixtures::random_sequence(3, GridWindow::symmetric(6).unwrap());
    let pair = forward_transform(&profile, &f).unwrap();
    let g = inverse_transform(&profile, &pair).unwrap();
    let err = g.indices().map(|n| (g.get_or_zero(n) - f.get_or_zero(n)).norm()).fold(0.0, f64::max);
    assert!(err < 1e-12, "round trip error {err}");
}

#[test]
fn free_evolution_of_a_delta_is_a_bessel_kernel() {
    let window = GridWindow::symmetric(40).unwrap();
    let u0 = WavePacket::new(0.0, ComplexSequence::delta(window, 0));
    for method in [Method::Spectral, Method::Direct] {
        let cfg = EvolutionConfig { method, time_step: 2e-4, ..Default::default() };
        let u = evolve(&fixtures::free(), &u0, 0.5, &cfg).unwrap();
        for n in -10..=10 {
            // (-i)^n J_n(t), evaluated from the series independently of the kernel helper
            let expected = Complex64::new(0.0, -1.0).powi(n as i32) * bessel_series(n, 0.5);
            assert!((u.values.get_or_zero(n) - expected).norm() < 1e-7, "{method:?} at n = {n}");
            assert!((bessel_j(n, 0.5) - bessel_series(n, 0.5)).abs() < 1e-14);
        }
    }
}

fn bessel_series(n: i64, t: f64) -> f64 {
    let k = n.unsigned_abs() as i32;
    let sign = if n < 0 && k % 2 == 1 { -1.0 } else { 1.0 };
    let mut term = (t / 2.0).powi(k) / (1..=k).map(f64::from).product::<f64>();
    let mut sum = term;
    for m in 1..40 {
        term *= -(t * t / 4.0) / (m as f64 * (m + k) as f64);
        sum += term;
    }
    sign * sum
}

#[test]
fn two_site_barrier_bound_states_match_closed_form() {
    // b(0) = b(1) = s: the even state f(0) = f(1) has θ = 1/(2s + 1); the odd
    // state f(0) = -f(1) has θ = 1/(2s - 1) and exists only for s > 1
    for (s, expected) in [(0.75, vec![1.0 / 2.5]), (2.0, vec![1.0 / 5.0, 1.0 / 3.0])] {
        let profile = CoefficientProfile::new(0, vec![0.5, 0.5], vec![s, s]).unwrap();
        let eig = find_eigenvalues(&profile, GridWindow::around(&profile, 20)).unwrap();
        let mut thetas = eig.thetas.clone();
        thetas.sort_by(f64::total_cmp);
        assert_eq!(thetas.len(), expected.len(), "s = {s}");
        for (t, e) in thetas.iter().zip(&expected) {
            assert!((t - e).abs() < 1e-10, "s = {s}: θ = {t}, expected {e}");
        }
    }
}

#[test]
fn experiment_writes_its_tables() {
    let dir = TempDir::new().unwrap();
    let report = run_uncertainty_experiment(&fixtures::free(), &ExperimentConfig::default(), Some(dir.path())).unwrap();
    assert!(matches!(report.verdict, ExperimentVerdict::Violated { at_t0: false, at_t1: true }));
    let mut rdr = csv::Reader::from_path(dir.path().join("experiment.csv")).unwrap();
    assert_eq!(
        rdr.headers().unwrap().iter().collect::<Vec<_>>(),
        ["t", "n", "abs_u", "envelope", "ratio", "verdict_flag"]
    );
    assert!(rdr.records().count() > 0);
    let summary = std::fs::read_to_string(dir.path().join("summary.txt")).unwrap();
    assert!(summary.contains("violated at t=1"));
}

#[test]
fn identical_solutions_coincide_everywhere() {
    let profile = fixtures::random_admissible(5);
    let window = GridWindow::symmetric(40).unwrap();
    let u0 = WavePacket::new(0.0, fixtures::gaussian_packet(window, 0.0, 2.0, 0.3));
    let trace = SolutionTrace::sample(&profile, &u0, 9, 0.02, &EvolutionConfig::default()).unwrap();
    let report = continuation_check(&profile, &trace, &trace, 0, 0.0).unwrap();
    assert!(matches!(report.verdict, ContinuationVerdict::Coincide | ContinuationVerdict::InconclusiveBeyond { .. }));
    assert!(report.sites.iter().all(|s| s.observed == 0.0));
}
