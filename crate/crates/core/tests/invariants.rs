//! Property tests over random perturbations of the free lattice.

use num_complex::Complex64;
use proptest::prelude::*;

use jacobi_core::evolution::{evolve_direct, evolve_spectral, EvolutionConfig, Method};
use jacobi_core::jost::{compute_jost, Side};
use jacobi_core::lattice::{reflect_profile, CoefficientProfile, ComplexSequence, GridWindow, WavePacket};
use jacobi_core::scattering::{alpha_of_theta, beta_of_theta, unitarity_defect_at, wronskian};
use jacobi_core::spectral::parseval_residual;

fn profile_strategy() -> impl Strategy<Value = CoefficientProfile> {
    (1i64..=3)
        .prop_flat_map(|h| {
            let len = (2 * h + 1) as usize;
            (
                Just(-h),
                prop::collection::vec(0.35f64..0.65, len),
                prop::collection::vec(-0.4f64..0.4, len),
            )
        })
        .prop_map(|(lo, a, b)| CoefficientProfile::new(lo, a, b).expect("valid coefficients"))
}

fn unit_theta() -> impl Strategy<Value = Complex64> {
    // away from the poles at ±1
    (0.05f64..std::f64::consts::PI - 0.05, any::<bool>())
        .prop_map(|(phi, upper)| Complex64::from_polar(1.0, if upper { phi } else { -phi }))
}

fn sequence_strategy(half: i64) -> impl Strategy<Value = ComplexSequence> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), (2 * half + 1) as usize)
        .prop_filter("nonzero", |v| v.iter().any(|(r, i)| r.abs() + i.abs() > 1e-3))
        .prop_map(move |v| ComplexSequence::new(-half, v.into_iter().map(|(r, i)| Complex64::new(r, i)).collect()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn wronskian_is_independent_of_site(p in profile_strategy(), theta in unit_theta()) {
        let window = GridWindow::around(&p, 6);
        let e_plus = compute_jost(&p, theta, Side::Plus, window).unwrap().values;
        let e_minus = compute_jost(&p, theta, Side::Minus, window).unwrap().values;
        let w0 = wronskian(&p, &e_plus, &e_minus, window.n_lo()).unwrap();
        for n in window.n_lo()..window.n_hi() {
            let w = wronskian(&p, &e_plus, &e_minus, n).unwrap();
            prop_assert!((w - w0).norm() <= 1e-11 * w0.norm().max(1.0));
        }
    }

    #[test]
    fn transmission_and_reflection_conserve_flux(p in profile_strategy(), theta in unit_theta()) {
        prop_assert!(unitarity_defect_at(&p, theta).unwrap().abs() < 1e-12);
        let alpha = alpha_of_theta(&p, theta).unwrap().value;
        let plus = beta_of_theta(&p, theta, Side::Plus).unwrap().value;
        let minus = beta_of_theta(&p, theta, Side::Minus).unwrap().value;
        prop_assert!(alpha.norm() >= 1.0 - 1e-12);
        prop_assert!((plus.norm() - minus.norm()).abs() <= 1e-10 * alpha.norm_sqr());
    }

    #[test]
    fn reflecting_twice_is_the_identity(p in profile_strategy()) {
        let back = reflect_profile(&reflect_profile(&p));
        prop_assert_eq!(back.window_lo(), p.window_lo());
        prop_assert_eq!(back.a_values(), p.a_values());
        prop_assert_eq!(back.b_values(), p.b_values());
    }

    #[test]
    fn direct_evolution_is_unitary(p in profile_strategy(), f in sequence_strategy(4), t in 0.1f64..1.5) {
        let window = GridWindow::symmetric(40).unwrap();
        let u0 = WavePacket::new(0.0, ComplexSequence::from_fn(window, |n| f.get_or_zero(n)));
        let cfg = EvolutionConfig { method: Method::Direct, ..Default::default() };
        let u1 = evolve_direct(&p, &u0, t, &cfg).unwrap();
        prop_assert!((u1.norm() - u0.norm()).abs() <= 1e-12 * u0.norm());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn transform_is_an_isometry(p in profile_strategy(), f in sequence_strategy(5)) {
        prop_assert!(parseval_residual(&p, &f).unwrap() <= 1e-10);
    }

    #[test]
    fn spectral_and_direct_evolution_agree(p in profile_strategy(), f in sequence_strategy(3)) {
        let window = GridWindow::symmetric(40).unwrap();
        let u0 = WavePacket::new(0.0, ComplexSequence::from_fn(window, |n| f.get_or_zero(n)));
        let spectral = evolve_spectral(&p, &u0, 1.0, &EvolutionConfig::default()).unwrap();
        let direct = evolve_direct(&p, &u0, 1.0, &EvolutionConfig { method: Method::Direct, ..Default::default() }).unwrap();
        prop_assert!(spectral.values.distance(&direct.values) <= 1e-6 * u0.norm());
    }
}
