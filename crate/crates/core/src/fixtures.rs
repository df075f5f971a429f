//! Reference profiles and seeded random data shared by tests, the CLI and
//! the self-check.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::lattice::{CoefficientProfile, ComplexSequence, GridWindow};

pub fn free() -> CoefficientProfile {
    CoefficientProfile::free()
}

/// `b(0) = strength`, otherwise free.
pub fn single_site(strength: f64) -> CoefficientProfile {
    CoefficientProfile::single_site(0, strength)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random profile on `[-h, h]`, `h ∈ {1,..,4}`, with `a = 1/2 + U(-0.15, 0.15)`
/// and `b = U(-0.4, 0.4)`; `δ = 1` and the smallest admissible `C`.
pub fn random_admissible(seed: u64) -> CoefficientProfile {
    let mut rng = rng(seed);
    let half: i64 = rng.gen_range(1..=4);
    let len = (2 * half + 1) as usize;
    let a = (0..len).map(|_| 0.5 + rng.gen_range(-0.15..0.15)).collect();
    let b = (0..len).map(|_| rng.gen_range(-0.4..0.4)).collect();
    CoefficientProfile::new(-half, a, b).expect("random coefficients are valid")
}

/// Unit-norm random sequence on `support` with independent uniform real and
/// imaginary parts.
pub fn random_sequence(seed: u64, support: GridWindow) -> ComplexSequence {
    let mut rng = rng(seed);
    let f = ComplexSequence::from_fn(support, |_| {
        Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    });
    let norm = f.norm();
    f.scaled(Complex64::new(1.0 / norm, 0.0))
}

/// Unit-norm Gaussian packet `exp(-(n-c)²/(2w²) + i k n)` on `window`.
pub fn gaussian_packet(window: GridWindow, center: f64, width: f64, wavenumber: f64) -> ComplexSequence {
    let f = ComplexSequence::from_fn(window, |n| {
        let x = n as f64 - center;
        Complex64::from_polar((-x * x / (2.0 * width * width)).exp(), wavenumber * n as f64)
    });
    let norm = f.norm();
    f.scaled(Complex64::new(1.0 / norm, 0.0))
}
