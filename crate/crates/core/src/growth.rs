//! Finite surrogates for the exponential type `σ_f` and the indicator
//! `h_f(φ) = limsup log|f(re^{iφ})| / r` of an entire function.

use num_complex::Complex64;

use crate::error::{Error, Result};

pub const MIN_COEFFICIENTS: usize = 32;
/// Tolerance of the indicator sum check `h(φ) + h(φ+π) ≥ 0`.
pub const INDICATOR_SUM_TOLERANCE: f64 = 0.05;

/// `max n|c_n|^{1/n} / e` over the trailing half of the indices.
#[derive(Debug, Clone, PartialEq)]
pub struct TypeEstimate {
    pub sigma: f64,
    /// Index range the maximum was taken over.
    pub from: usize,
    pub to: usize,
    /// Index attaining the maximum.
    pub argmax: Option<usize>,
    /// Every coefficient in the range vanished.
    pub degenerate: bool,
}

pub fn exponential_type_from_coeffs(c: &[Complex64]) -> Result<TypeEstimate> {
    exponential_type_with_fraction(c, 0.5)
}

/// As [`exponential_type_from_coeffs`] with the maximum taken over the last
/// `fraction` of the indices.
pub fn exponential_type_with_fraction(c: &[Complex64], fraction: f64) -> Result<TypeEstimate> {
    if c.len() < MIN_COEFFICIENTS {
        return Err(Error::InsufficientData(format!(
            "type estimation needs at least {MIN_COEFFICIENTS} coefficients, got {}",
            c.len()
        )));
    }
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::Domain(format!("fraction {fraction} must lie in (0, 1]")));
    }
    let from = ((c.len() as f64 * (1.0 - fraction)).floor() as usize).max(1);
    let to = c.len() - 1;
    let mut sigma = 0.0f64;
    let mut argmax = None;
    for (n, coeff) in c.iter().enumerate().take(to + 1).skip(from) {
        let modulus = coeff.norm();
        if modulus == 0.0 || !modulus.is_finite() {
            continue;
        }
        let nf = n as f64;
        let value = (nf.ln() + modulus.ln() / nf - 1.0).exp();
        if argmax.is_none() || value > sigma {
            sigma = value;
            argmax = Some(n);
        }
    }
    Ok(TypeEstimate {
        sigma,
        from,
        to,
        argmax,
        degenerate: argmax.is_none(),
    })
}

/// Slope of the last segment of the upper convex hull of
/// `(r, log|f(re^{iφ})|)` over the ladder.
#[derive(Debug, Clone, PartialEq)]
pub struct IndicatorEstimate {
    pub phi: f64,
    pub value: f64,
    /// Radii that produced finite samples.
    pub radii: Vec<f64>,
    /// Some samples overflowed or vanished and were dropped.
    pub truncated: bool,
}

pub fn default_ladder() -> Vec<f64> {
    (1..=8).map(|k| 5.0 * k as f64).collect()
}

fn upper_hull_last_slope(points: &[(f64, f64)]) -> f64 {
    let mut hull: Vec<(f64, f64)> = Vec::with_capacity(points.len());
    for &p in points {
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            let cross = (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
    (b.1 - a.1) / (b.0 - a.0)
}

pub fn indicator_estimate<F>(f: F, phi: f64, ladder: &[f64]) -> Result<IndicatorEstimate>
where
    F: Fn(Complex64) -> Complex64,
{
    if ladder.len() < 4 || ladder.windows(2).any(|w| !(w[1] > w[0])) || ladder[0] <= 0.0 {
        return Err(Error::Domain("the radius ladder needs at least 4 increasing positive radii".into()));
    }
    let mut truncated = false;
    let mut points = Vec::with_capacity(ladder.len());
    for &r in ladder {
        let value = f(Complex64::from_polar(r, phi)).norm().ln();
        if value.is_finite() {
            points.push((r, value));
        } else {
            truncated = true;
        }
    }
    if points.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "only {} finite samples along φ = {phi}",
            points.len()
        )));
    }
    Ok(IndicatorEstimate {
        phi,
        value: upper_hull_last_slope(&points),
        radii: points.iter().map(|p| p.0).collect(),
        truncated,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct IndicatorSum {
    pub at_phi: IndicatorEstimate,
    pub at_opposite: IndicatorEstimate,
    pub sum: f64,
    pub passed: bool,
}

/// `h(φ) + h(φ+π)`, which is nonnegative for entire functions of finite type.
pub fn indicator_sum_check<F>(f: F, phi: f64, ladder: &[f64]) -> Result<IndicatorSum>
where
    F: Fn(Complex64) -> Complex64,
{
    let at_phi = indicator_estimate(&f, phi, ladder)?;
    let at_opposite = indicator_estimate(&f, phi + std::f64::consts::PI, ladder)?;
    let sum = at_phi.value + at_opposite.value;
    Ok(IndicatorSum {
        at_phi,
        at_opposite,
        sum,
        passed: sum >= -INDICATOR_SUM_TOLERANCE,
    })
}

/// Type estimate together with indicator samples on a set of directions.
#[derive(Debug, Clone)]
pub struct GrowthEstimate {
    pub sigma_hat: TypeEstimate,
    pub indicator_samples: Vec<(f64, f64)>,
    pub r_ladder: Vec<f64>,
}

pub fn growth_estimate<F>(coeffs: &[Complex64], f: F, phis: &[f64], ladder: &[f64]) -> Result<GrowthEstimate>
where
    F: Fn(Complex64) -> Complex64,
{
    let sigma_hat = exponential_type_from_coeffs(coeffs)?;
    let indicator_samples = phis
        .iter()
        .map(|&phi| indicator_estimate(&f, phi, ladder).map(|e| (phi, e.value)))
        .collect::<Result<_>>()?;
    Ok(GrowthEstimate {
        sigma_hat,
        indicator_samples,
        r_ladder: ladder.to_vec(),
    })
}

/// Horner evaluation of `Σ c_n z^n`.
pub fn power_series(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    coeffs.iter().rev().fold(Complex64::default(), |acc, &c| acc * z + c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    fn exp_coeffs(sigma: f64, count: usize) -> Vec<Complex64> {
        let mut c = Vec::with_capacity(count);
        let mut term = 1.0;
        for n in 0..count {
            if n > 0 {
                term *= sigma / n as f64;
            }
            c.push(Complex64::new(term, 0.0));
        }
        c
    }

    #[test]
    fn type_of_exponential() {
        let est = exponential_type_from_coeffs(&exp_coeffs(2.0, 200)).unwrap();
        assert!((est.sigma - 2.0).abs() < 0.04, "{}", est.sigma);
        assert!(!est.degenerate);
    }

    #[test]
    fn type_of_polynomial_and_zero() {
        let mut c = vec![Complex64::default(); 64];
        c[0] = Complex64::new(1.0, 0.0);
        c[3] = Complex64::new(2.0, 0.0);
        let est = exponential_type_from_coeffs(&c).unwrap();
        assert_eq!(est.sigma, 0.0);
        assert!(est.degenerate);
        assert!(exponential_type_from_coeffs(&vec![Complex64::default(); 40]).unwrap().degenerate);
        assert!(exponential_type_from_coeffs(&c[..20]).is_err());
    }

    #[test]
    fn type_of_envelope_coefficients() {
        let eps = 0.5;
        let c: Vec<Complex64> = (0..64)
            .map(|n| {
                if n == 0 {
                    Complex64::new(1.0, 0.0)
                } else {
                    let nf = n as f64;
                    Complex64::new((nf * (1f64.exp() / ((4.0 + eps) * nf)).ln()).exp(), 0.0)
                }
            })
            .collect();
        let est = exponential_type_from_coeffs(&c).unwrap();
        assert!(est.sigma <= 1.0 / (4.0 + eps) * 1.02);
    }

    #[test]
    fn type_is_scale_covariant() {
        let base = exp_coeffs(1.5, 200);
        let sigma = exponential_type_from_coeffs(&base).unwrap().sigma;
        for rho in [0.5f64, 2.0] {
            let scaled: Vec<Complex64> = base.iter().enumerate().map(|(n, c)| c * rho.powi(n as i32)).collect();
            let s = exponential_type_from_coeffs(&scaled).unwrap().sigma;
            assert!((s - rho * sigma).abs() <= 0.02 * rho * sigma);
        }
    }

    #[test]
    fn indicator_of_exponential() {
        let ladder = default_ladder();
        for sigma in [1.0, 2.0] {
            for phi in [0.0, FRAC_PI_4, FRAC_PI_2, PI] {
                let est = indicator_estimate(|z| (sigma * z).exp(), phi, &ladder).unwrap();
                let expected = sigma * phi.cos();
                assert!((est.value - expected).abs() <= 0.05 * expected.abs().max(1e-2));
            }
        }
    }

    #[test]
    fn indicator_sums() {
        let ladder = default_ladder();
        let exp = indicator_sum_check(|z| z.exp(), 0.3, &ladder).unwrap();
        assert!(exp.sum.abs() < 1e-9 && exp.passed);
        let cos = indicator_sum_check(|z| z.cos(), FRAC_PI_2, &ladder).unwrap();
        assert!((cos.sum - 2.0).abs() < 0.05 && cos.passed);
    }

    #[test]
    fn overflowing_samples_are_dropped() {
        let ladder: Vec<f64> = vec![100.0, 300.0, 600.0, 900.0];
        let est = indicator_estimate(|z| z.exp(), 0.0, &ladder).unwrap();
        assert!(est.truncated);
        assert_eq!(est.radii, vec![100.0, 300.0, 600.0]);
        assert!((est.value - 1.0).abs() < 1e-9);
        assert!(indicator_estimate(|z| z.exp(), 0.0, &[1.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn growth_estimate_carries_ladder() {
        let c = exp_coeffs(1.0, 64);
        let ladder = default_ladder();
        let est = growth_estimate(&c, |z| power_series(&c, z), &[0.0, PI], &ladder).unwrap();
        assert_eq!(est.r_ladder, ladder);
        assert!((est.indicator_samples[0].1 - 1.0).abs() < 0.05);
    }
}
