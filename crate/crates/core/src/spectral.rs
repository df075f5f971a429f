//! The spectral transform `F f(θ) = Σ_n f(n) (e^+(θ, n), e^-(θ, n))`, its
//! inverse under the spectral measure, and the diagonalisation of `H`.
//!
//! The absolutely continuous part is integrated with the midpoint rule on the
//! upper semicircle, `θ_k = e^{iπ(2k+1)/M}`, `k < M/2`, with weight
//! `1/(M |α(θ_k)|²)`. The integrand is conjugation symmetric, so this equals
//! the full-circle rule and is exact for trigonometric polynomials of degree
//! below `M`.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::jost::{jost_values, Side};
use crate::lattice::{apply_operator, BoundaryMode, ComplexSequence, CoefficientProfile, GridWindow};
use crate::scattering::{alpha_raw, bound_state_vector, find_eigenvalues, BoundStates};

pub const DEFAULT_CIRCLE_SAMPLES: usize = 2048;
/// Free sites kept around the perturbation window when a window is chosen
/// automatically.
pub const DEFAULT_PROFILE_PADDING: i64 = 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BoundStateMode {
    #[default]
    Include,
    /// Drop the point masses of the measure (negative control).
    Omit,
}

/// The spectral measure: density `1/(2π|α|²)` per unit angle on the upper
/// semicircle and point masses `γ_j` at `θ_j`.
#[derive(Debug, Clone)]
pub struct SpectralMeasure {
    pub theta_grid: Vec<Complex64>,
    pub ac_weight: Vec<f64>,
    pub point_masses: Vec<(f64, f64)>,
}

/// The two rows of `F f` on the semicircle grid plus the plus-row values at
/// the bound states.
#[derive(Debug, Clone)]
pub struct TransformedPair {
    pub m_samples: usize,
    pub window: GridWindow,
    pub theta_grid: Vec<Complex64>,
    pub plus: Vec<Complex64>,
    pub minus: Vec<Complex64>,
    pub eigen_thetas: Vec<f64>,
    pub eigen: Vec<Complex64>,
}

impl TransformedPair {
    /// Multiplies every component by `e^{-itλ}`.
    pub fn evolve(&self, t: f64) -> Self {
        let phase = |lambda: f64| Complex64::from_polar(1.0, -t * lambda);
        let mut out = self.clone();
        for (k, theta) in self.theta_grid.iter().enumerate() {
            let p = phase(theta.re);
            out.plus[k] *= p;
            out.minus[k] *= p;
        }
        for (j, &theta) in self.eigen_thetas.iter().enumerate() {
            out.eigen[j] *= phase(0.5 * (theta + 1.0 / theta));
        }
        out
    }

    /// Writes `theta_re,theta_im,plus_re,plus_im,minus_re,minus_im`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        wtr.write_record(["theta_re", "theta_im", "plus_re", "plus_im", "minus_re", "minus_im"])?;
        for k in 0..self.theta_grid.len() {
            let (t, p, m) = (self.theta_grid[k], self.plus[k], self.minus[k]);
            wtr.write_record([t.re, t.im, p.re, p.im, m.re, m.im].map(|v| format!("{v:.17e}")))?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// Jost solutions tabulated on a window and a semicircle grid, ready for
/// repeated transforms.
#[derive(Debug, Clone)]
pub struct SpectralBasis {
    profile: CoefficientProfile,
    window: GridWindow,
    m_samples: usize,
    thetas: Vec<Complex64>,
    weights: Vec<f64>,
    e_plus: Vec<Vec<Complex64>>,
    e_minus: Vec<Vec<Complex64>>,
    bound: BoundStates,
    bound_vectors: Vec<Vec<f64>>,
}

impl SpectralBasis {
    pub fn new(profile: &CoefficientProfile, window: GridWindow, m_samples: usize) -> Result<Self> {
        if m_samples < 8 || m_samples % 2 != 0 {
            return Err(Error::Domain(format!("grid size {m_samples} must be even and at least 8")));
        }
        window.require_covers(profile, 1)?;
        let thetas: Vec<Complex64> = (0..m_samples / 2)
            .map(|k| Complex64::from_polar(1.0, PI * (2 * k + 1) as f64 / m_samples as f64))
            .collect();
        let (lo, hi) = (window.n_lo(), window.n_hi());
        let columns: Vec<(f64, Vec<Complex64>, Vec<Complex64>)> = thetas
            .par_iter()
            .map(|&t| {
                let weight = 1.0 / (m_samples as f64 * alpha_raw(profile, t).norm_sqr());
                (
                    weight,
                    jost_values(profile, t, Side::Plus, lo, hi),
                    jost_values(profile, t, Side::Minus, lo, hi),
                )
            })
            .collect();
        let mut weights = Vec::with_capacity(columns.len());
        let mut e_plus = Vec::with_capacity(columns.len());
        let mut e_minus = Vec::with_capacity(columns.len());
        for (w, p, m) in columns {
            weights.push(w);
            e_plus.push(p);
            e_minus.push(m);
        }
        let bound = find_eigenvalues(profile, window)?;
        let bound_vectors = bound
            .thetas
            .iter()
            .map(|&t| bound_state_vector(profile, t, window).values().iter().map(|v| v.re).collect())
            .collect();
        Ok(Self {
            profile: profile.clone(),
            window,
            m_samples,
            thetas,
            weights,
            e_plus,
            e_minus,
            bound,
            bound_vectors,
        })
    }

    /// Basis on a window covering `f` and the profile with default padding.
    pub fn for_sequence(profile: &CoefficientProfile, f: &ComplexSequence, m_samples: usize) -> Result<Self> {
        Self::new(profile, default_window(profile, f)?, m_samples)
    }

    pub fn window(&self) -> GridWindow {
        self.window
    }

    pub fn m_samples(&self) -> usize {
        self.m_samples
    }

    pub fn profile(&self) -> &CoefficientProfile {
        &self.profile
    }

    pub fn bound_states(&self) -> &BoundStates {
        &self.bound
    }

    pub fn measure(&self) -> SpectralMeasure {
        let scale = self.m_samples as f64 / (2.0 * PI);
        SpectralMeasure {
            theta_grid: self.thetas.clone(),
            ac_weight: self.weights.iter().map(|w| w * scale).collect(),
            point_masses: self.bound.thetas.iter().copied().zip(self.bound.gammas.iter().copied()).collect(),
        }
    }

    fn check_support(&self, f: &ComplexSequence) -> Result<()> {
        if f.lo() < self.window.n_lo() || f.hi() > self.window.n_hi() {
            return Err(Error::WindowTooSmall {
                lo: self.window.n_lo(),
                hi: self.window.n_hi(),
                reason: format!("sequence on [{}, {}] is not inside the transform window", f.lo(), f.hi()),
            });
        }
        Ok(())
    }

    pub fn forward(&self, f: &ComplexSequence) -> Result<TransformedPair> {
        self.check_support(f)?;
        let offset = (f.lo() - self.window.n_lo()) as usize;
        let values = f.values();
        let row = |e: &[Complex64]| -> Complex64 {
            values.iter().zip(&e[offset..]).map(|(v, e)| v * e).sum()
        };
        let (plus, minus): (Vec<Complex64>, Vec<Complex64>) = self
            .e_plus
            .par_iter()
            .zip(&self.e_minus)
            .map(|(p, m)| (row(p), row(m)))
            .unzip();
        let eigen = self
            .bound_vectors
            .iter()
            .map(|v| values.iter().zip(&v[offset..]).map(|(f, e)| f * e).sum())
            .collect();
        Ok(TransformedPair {
            m_samples: self.m_samples,
            window: self.window,
            theta_grid: self.thetas.clone(),
            plus,
            minus,
            eigen_thetas: self.bound.thetas.clone(),
            eigen,
        })
    }

    fn check_pair(&self, pair: &TransformedPair) -> Result<()> {
        if pair.m_samples != self.m_samples
            || pair.window != self.window
            || pair.plus.len() != self.thetas.len()
            || pair.minus.len() != self.thetas.len()
            || pair.eigen.len() != self.bound.len()
        {
            return Err(Error::GridMismatch(
                "transform data does not match the basis grid, window or bound states".into(),
            ));
        }
        Ok(())
    }

    pub fn inverse(&self, pair: &TransformedPair, mode: BoundStateMode) -> Result<ComplexSequence> {
        self.check_pair(pair)?;
        let len = self.window.len();
        let mut out = (0..self.thetas.len())
            .into_par_iter()
            .fold(
                || vec![Complex64::default(); len],
                |mut acc, k| {
                    let (fp, fm) = (pair.plus[k] * self.weights[k], pair.minus[k] * self.weights[k]);
                    for n in 0..len {
                        acc[n] += fp * self.e_plus[k][n].conj() + fm * self.e_minus[k][n].conj();
                    }
                    acc
                },
            )
            .reduce(
                || vec![Complex64::default(); len],
                |mut a, b| {
                    a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                    a
                },
            );
        if mode == BoundStateMode::Include {
            for (j, v) in self.bound_vectors.iter().enumerate() {
                let c = pair.eigen[j] * self.bound.gammas[j];
                out.iter_mut().zip(v).for_each(|(x, e)| *x += c * e);
            }
        }
        Ok(ComplexSequence::new(self.window.n_lo(), out))
    }

    /// `‖F f‖²_ρ`.
    pub fn norm_sqr(&self, pair: &TransformedPair, mode: BoundStateMode) -> Result<f64> {
        self.check_pair(pair)?;
        let ac: f64 = (0..self.thetas.len())
            .map(|k| self.weights[k] * (pair.plus[k].norm_sqr() + pair.minus[k].norm_sqr()))
            .sum();
        let point: f64 = match mode {
            BoundStateMode::Include => pair.eigen.iter().zip(&self.bound.gammas).map(|(f, g)| g * f.norm_sqr()).sum(),
            BoundStateMode::Omit => 0.0,
        };
        Ok(ac + point)
    }

    pub fn parseval_residual(&self, f: &ComplexSequence, mode: BoundStateMode) -> Result<f64> {
        let norm = f.norm().powi(2);
        if norm == 0.0 {
            return Err(Error::Precondition("Parseval residual needs ‖f‖ > 0".into()));
        }
        Ok((self.norm_sqr(&self.forward(f)?, mode)? - norm).abs() / norm)
    }

    /// `max |F(Hf) - λ F(f)|` over the grid, both rows and the bound states.
    pub fn diagonalization_residual(&self, f: &ComplexSequence) -> Result<f64> {
        if f.lo() <= self.window.n_lo() || f.hi() >= self.window.n_hi() {
            return Err(Error::Padding("f needs one free site inside the window on each side".into()));
        }
        let padded = ComplexSequence::from_fn(GridWindow::new(f.lo() - 1, f.hi() + 1)?, |n| f.get_or_zero(n));
        let hf = apply_operator(&self.profile, &padded, BoundaryMode::ZeroExtend)?;
        let lhs = self.forward(&hf)?;
        let rhs = self.forward(f)?;
        let mut worst = 0.0f64;
        for (k, theta) in self.thetas.iter().enumerate() {
            worst = worst.max((lhs.plus[k] - theta.re * rhs.plus[k]).norm());
            worst = worst.max((lhs.minus[k] - theta.re * rhs.minus[k]).norm());
        }
        for (j, &theta) in self.bound.thetas.iter().enumerate() {
            let lambda = 0.5 * (theta + 1.0 / theta);
            worst = worst.max((lhs.eigen[j] - lambda * rhs.eigen[j]).norm());
        }
        Ok(worst)
    }

    /// `e^{-itH} f` through the transform.
    pub fn evolve(&self, f: &ComplexSequence, t: f64) -> Result<ComplexSequence> {
        self.inverse(&self.forward(f)?.evolve(t), BoundStateMode::Include)
    }
}

/// Window covering `f`, the origin and the profile with default padding.
pub fn default_window(profile: &CoefficientProfile, f: &ComplexSequence) -> Result<GridWindow> {
    GridWindow::new(
        f.lo().min(profile.window_lo() - DEFAULT_PROFILE_PADDING).min(-1),
        f.hi().max(profile.window_hi() + DEFAULT_PROFILE_PADDING).max(1),
    )
}

/// Upper limit for [`adequate_samples`].
pub const MAX_CIRCLE_SAMPLES: usize = 1 << 16;
/// Fourier tail of the weight, relative to its peak, accepted as roundoff.
const WEIGHT_TAIL_LEVEL: f64 = 1e-15;

/// Circle sums of the transform are exact for `w θ^k`, `|k| < L = window
/// length`, up to the Fourier coefficients of the weight `w = |α|^{-2}` at
/// indices `|j| ≥ M - L`. Those decay at a rate set by the zeros of `α`
/// nearest the circle: bound states inside, resonances outside. Returns the
/// smallest `M = requested · 2^k` whose tail is at roundoff, capped at
/// [`MAX_CIRCLE_SAMPLES`].
pub fn adequate_samples(profile: &CoefficientProfile, window: GridWindow, requested: usize) -> Result<usize> {
    if profile.is_free() {
        return Ok(requested);
    }
    let span = window.len();
    let mut planner = FftPlanner::new();
    let mut m = requested;
    while m < MAX_CIRCLE_SAMPLES {
        if m > span {
            let n = 2 * m;
            let mut w: Vec<Complex64> = (0..n)
                .into_par_iter()
                .map(|k| {
                    let theta = Complex64::from_polar(1.0, PI * (2 * k + 1) as f64 / n as f64);
                    Complex64::new(alpha_raw(profile, theta).norm_sqr().recip(), 0.0)
                })
                .collect();
            let peak = w.iter().map(|z| z.re).fold(0.0, f64::max);
            planner.plan_fft_forward(n).process(&mut w);
            let tail = (m - span..=m)
                .map(|j| w[j].norm().max(w[(n - j) % n].norm()) / n as f64)
                .fold(0.0, f64::max);
            if tail <= WEIGHT_TAIL_LEVEL * peak {
                return Ok(m);
            }
        }
        m *= 2;
    }
    Ok(MAX_CIRCLE_SAMPLES.max(requested))
}

pub fn forward_transform(profile: &CoefficientProfile, f: &ComplexSequence) -> Result<TransformedPair> {
    let window = default_window(profile, f)?;
    SpectralBasis::new(profile, window, adequate_samples(profile, window, DEFAULT_CIRCLE_SAMPLES)?)?.forward(f)
}

pub fn inverse_transform(profile: &CoefficientProfile, pair: &TransformedPair) -> Result<ComplexSequence> {
    SpectralBasis::new(profile, pair.window, pair.m_samples)?.inverse(pair, BoundStateMode::Include)
}

pub fn parseval_residual(profile: &CoefficientProfile, f: &ComplexSequence) -> Result<f64> {
    let window = default_window(profile, f)?;
    SpectralBasis::new(profile, window, adequate_samples(profile, window, DEFAULT_CIRCLE_SAMPLES)?)?
        .parseval_residual(f, BoundStateMode::Include)
}

pub fn diagonalization_residual(profile: &CoefficientProfile, f: &ComplexSequence) -> Result<f64> {
    SpectralBasis::for_sequence(profile, f, DEFAULT_CIRCLE_SAMPLES)?.diagonalization_residual(f)
}
