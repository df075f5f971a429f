//! Lattice primitives: coefficient profiles, index windows, complex sequences,
//! the spectral parameter map and the Jacobi difference expression
//!
//! ```text
//! (τf)(n) = a(n) f(n+1) + a(n-1) f(n-1) + b(n) f(n)
//! ```
//!
//! Profiles are exactly asymptotic outside a finite perturbation window:
//! `a(n) = 1/2`, `b(n) = 0` there.

use std::io::{Read, Write};
use std::ops::Index;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Asymptotic value of the off-diagonal coefficient.
pub const A_FREE: f64 = 0.5;

/// Jacobi coefficients `a(n) > 0`, `b(n)` on a finite perturbation window,
/// together with the decay-class constants `(C, δ)` used by the tail
/// condition `Σ_{n≥N} (|2a(n)-1| + |b(n)|) ≤ C N^{-(1+δ)2N}`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientProfile {
    window_lo: i64,
    a_values: Vec<f64>,
    b_values: Vec<f64>,
    decay_constant: f64,
    decay_exponent: f64,
}

impl CoefficientProfile {
    /// Builds a profile on `[window_lo, window_lo + len - 1]`. The decay
    /// exponent defaults to `δ = 1` and the decay constant to the smallest
    /// admissible value (at least 1).
    pub fn new(window_lo: i64, a_values: Vec<f64>, b_values: Vec<f64>) -> Result<Self> {
        let mut profile = Self::with_decay(window_lo, a_values, b_values, 1.0, 1.0)?;
        let minimal = minimal_decay_constant_ln(&profile, 1.0).exp();
        profile.decay_constant = minimal.max(1.0);
        Ok(profile)
    }

    pub fn with_decay(
        window_lo: i64,
        a_values: Vec<f64>,
        b_values: Vec<f64>,
        decay_constant: f64,
        decay_exponent: f64,
    ) -> Result<Self> {
        if a_values.is_empty() {
            return Err(Error::InvalidProfile("empty perturbation window".into()));
        }
        if a_values.len() != b_values.len() {
            return Err(Error::InvalidProfile(format!(
                "a has {} entries but b has {}",
                a_values.len(),
                b_values.len()
            )));
        }
        for (k, (&a, &b)) in a_values.iter().zip(&b_values).enumerate() {
            let n = window_lo + k as i64;
            if !a.is_finite() || !b.is_finite() {
                return Err(Error::InvalidProfile(format!("non-finite coefficient at n = {n}")));
            }
            if a <= 0.0 {
                return Err(Error::InvalidProfile(format!("a({n}) = {a} is not positive")));
            }
        }
        if !(decay_constant > 0.0) || !(decay_exponent > 0.0) {
            return Err(Error::InvalidProfile(
                "decay constant and exponent must be positive".into(),
            ));
        }
        Ok(canonical(Self {
            window_lo,
            a_values,
            b_values,
            decay_constant,
            decay_exponent,
        }))
    }

    /// The free profile `a ≡ 1/2`, `b ≡ 0`.
    pub fn free() -> Self {
        Self::with_decay(0, vec![A_FREE], vec![0.0], 1.0, 1.0).expect("free profile is valid")
    }

    /// Single-site potential `b(site) = strength`, otherwise free.
    pub fn single_site(site: i64, strength: f64) -> Self {
        Self::new(site, vec![A_FREE], vec![strength]).expect("single-site profile is valid")
    }

    pub fn window_lo(&self) -> i64 {
        self.window_lo
    }

    pub fn window_hi(&self) -> i64 {
        self.window_lo + self.a_values.len() as i64 - 1
    }

    pub fn a_values(&self) -> &[f64] {
        &self.a_values
    }

    pub fn b_values(&self) -> &[f64] {
        &self.b_values
    }

    pub fn decay_constant(&self) -> f64 {
        self.decay_constant
    }

    pub fn decay_exponent(&self) -> f64 {
        self.decay_exponent
    }

    pub fn set_decay(&mut self, constant: f64, exponent: f64) -> Result<()> {
        if !(constant > 0.0) || !(exponent > 0.0) {
            return Err(Error::InvalidProfile(
                "decay constant and exponent must be positive".into(),
            ));
        }
        self.decay_constant = constant;
        self.decay_exponent = exponent;
        Ok(())
    }

    #[inline]
    pub fn a(&self, n: i64) -> f64 {
        let k = n - self.window_lo;
        if k >= 0 && (k as usize) < self.a_values.len() {
            self.a_values[k as usize]
        } else {
            A_FREE
        }
    }

    #[inline]
    pub fn b(&self, n: i64) -> f64 {
        let k = n - self.window_lo;
        if k >= 0 && (k as usize) < self.b_values.len() {
            self.b_values[k as usize]
        } else {
            0.0
        }
    }

    /// True when every stored coefficient equals its asymptotic value.
    pub fn is_free(&self) -> bool {
        self.a_values.iter().all(|&a| a == A_FREE) && self.b_values.iter().all(|&b| b == 0.0)
    }

    /// `A = Π_m 2a(m)`.
    pub fn total_product(&self) -> f64 {
        self.a_values.iter().map(|&a| 2.0 * a).product()
    }

    /// `A_+(n) = Π_{m≥n} 2a(m)`.
    pub fn a_plus(&self, n: i64) -> f64 {
        (n.max(self.window_lo)..=self.window_hi())
            .map(|m| 2.0 * self.a(m))
            .product()
    }

    /// `A_-(n) = Π_{m<n} 2a(m)`.
    pub fn a_minus(&self, n: i64) -> f64 {
        (self.window_lo..n.min(self.window_hi() + 1))
            .map(|m| 2.0 * self.a(m))
            .product()
    }

    pub fn sup_a(&self) -> f64 {
        self.a_values.iter().copied().fold(A_FREE, f64::max)
    }

    pub fn inf_a(&self) -> f64 {
        self.a_values.iter().copied().fold(A_FREE, f64::min)
    }

    pub fn sup_abs_b(&self) -> f64 {
        self.b_values.iter().map(|b| b.abs()).fold(0.0, f64::max)
    }

    /// Returns `(αa, αb + β)` restricted to the window, i.e. the coefficients of
    /// `αH + β`. Note the result is no longer asymptotically free.
    pub fn scaled_coefficients(&self, window: GridWindow, alpha: f64, beta: f64) -> (Vec<f64>, Vec<f64>) {
        let diag = window.indices().map(|n| alpha * self.b(n) + beta).collect();
        let off = (window.n_lo()..window.n_hi()).map(|n| alpha * self.a(n)).collect();
        (diag, off)
    }

    /// Reads a profile from CSV with header `n,a,b`, one row per window
    /// index in increasing order.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers()?.clone();
        let expected = ["n", "a", "b"];
        if headers.len() != 3 || headers.iter().zip(expected).any(|(h, e)| h != e) {
            return Err(Error::Parse(format!(
                "profile header must be `n,a,b`, got `{}`",
                headers.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let mut lo = None;
        let mut a_values = Vec::new();
        let mut b_values = Vec::new();
        for (row, record) in rdr.records().enumerate() {
            let record = record?;
            if record.len() != 3 {
                return Err(Error::Parse(format!("row {}: expected 3 fields", row + 2)));
            }
            let parse = |k: usize| -> Result<&str> { Ok(record.get(k).unwrap_or_default()) };
            let n: i64 = parse(0)?
                .parse()
                .map_err(|e| Error::Parse(format!("row {}: bad index: {e}", row + 2)))?;
            let a: f64 = parse(1)?
                .parse()
                .map_err(|e| Error::Parse(format!("row {}: bad a: {e}", row + 2)))?;
            let b: f64 = parse(2)?
                .parse()
                .map_err(|e| Error::Parse(format!("row {}: bad b: {e}", row + 2)))?;
            let start = *lo.get_or_insert(n);
            if n != start + a_values.len() as i64 {
                return Err(Error::Parse(format!(
                    "row {}: index {n} breaks the contiguous window",
                    row + 2
                )));
            }
            a_values.push(a);
            b_values.push(b);
        }
        let lo = lo.ok_or_else(|| Error::Parse("profile has no rows".into()))?;
        Self::new(lo, a_values, b_values)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        wtr.write_record(["n", "a", "b"])?;
        for (k, (a, b)) in self.a_values.iter().zip(&self.b_values).enumerate() {
            let n = self.window_lo + k as i64;
            wtr.write_record([n.to_string(), a.to_string(), b.to_string()])?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// Truncated lattice range `[n_lo, n_hi]` with `n_lo < 0 < n_hi`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GridWindow {
    n_lo: i64,
    n_hi: i64,
}

impl GridWindow {
    pub fn new(n_lo: i64, n_hi: i64) -> Result<Self> {
        if !(n_lo < 0 && 0 < n_hi) {
            return Err(Error::WindowTooSmall {
                lo: n_lo,
                hi: n_hi,
                reason: "a window must satisfy n_lo < 0 < n_hi".into(),
            });
        }
        Ok(Self { n_lo, n_hi })
    }

    /// `[-half_width, half_width]`.
    pub fn symmetric(half_width: i64) -> Result<Self> {
        Self::new(-half_width, half_width)
    }

    /// The profile window extended by `padding` sites on each side
    /// (and always containing the origin).
    pub fn around(profile: &CoefficientProfile, padding: i64) -> Self {
        let lo = (profile.window_lo() - padding).min(-1);
        let hi = (profile.window_hi() + padding).max(1);
        Self { n_lo: lo, n_hi: hi }
    }

    pub fn n_lo(&self) -> i64 {
        self.n_lo
    }

    pub fn n_hi(&self) -> i64 {
        self.n_hi
    }

    pub fn len(&self) -> usize {
        (self.n_hi - self.n_lo + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, n: i64) -> bool {
        self.n_lo <= n && n <= self.n_hi
    }

    pub fn indices(&self) -> impl Iterator<Item = i64> + Clone {
        self.n_lo..=self.n_hi
    }

    /// Checks the window covers the perturbation window with at least
    /// `padding` free sites on each side.
    pub fn require_covers(&self, profile: &CoefficientProfile, padding: i64) -> Result<()> {
        if self.n_lo > profile.window_lo() - padding || self.n_hi < profile.window_hi() + padding {
            return Err(Error::WindowTooSmall {
                lo: self.n_lo,
                hi: self.n_hi,
                reason: format!(
                    "must contain the perturbation window [{}, {}] with {padding} sites of padding",
                    profile.window_lo(),
                    profile.window_hi()
                ),
            });
        }
        Ok(())
    }
}

/// Complex sequence on a contiguous index range `[lo, lo + len - 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexSequence {
    lo: i64,
    values: Vec<Complex64>,
}

impl ComplexSequence {
    pub fn new(lo: i64, values: Vec<Complex64>) -> Self {
        Self { lo, values }
    }

    pub fn zeros(window: GridWindow) -> Self {
        Self::new(window.n_lo(), vec![Complex64::new(0.0, 0.0); window.len()])
    }

    pub fn from_fn(window: GridWindow, f: impl FnMut(i64) -> Complex64) -> Self {
        Self::new(window.n_lo(), window.indices().map(f).collect())
    }

    /// Kronecker delta at `site`.
    pub fn delta(window: GridWindow, site: i64) -> Self {
        Self::from_fn(window, |n| {
            if n == site {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }

    pub fn lo(&self) -> i64 {
        self.lo
    }

    pub fn hi(&self) -> i64 {
        self.lo + self.values.len() as i64 - 1
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn indices(&self) -> impl Iterator<Item = i64> + Clone {
        self.lo..=self.hi()
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        self.values.iter().enumerate().map(move |(k, &v)| (self.lo + k as i64, v))
    }

    pub fn get(&self, n: i64) -> Option<Complex64> {
        let k = n - self.lo;
        (k >= 0 && (k as usize) < self.values.len()).then(|| self.values[k as usize])
    }

    /// Value at `n`, zero outside the stored range.
    pub fn get_or_zero(&self, n: i64) -> Complex64 {
        self.get(n).unwrap_or_default()
    }

    /// The window this sequence lives on, when it satisfies the window invariant.
    pub fn window(&self) -> Result<GridWindow> {
        GridWindow::new(self.lo, self.hi())
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }

    /// `Σ_n conj(self(n)) other(n)` over the common support.
    pub fn inner(&self, other: &ComplexSequence) -> Complex64 {
        self.iter()
            .filter_map(|(n, v)| other.get(n).map(|w| v.conj() * w))
            .sum()
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        Self::new(self.lo, self.values.iter().map(|v| v * factor).collect())
    }

    /// `‖self - other‖₂`, treating missing entries as zero.
    pub fn distance(&self, other: &ComplexSequence) -> f64 {
        let lo = self.lo.min(other.lo);
        let hi = self.hi().max(other.hi());
        (lo..=hi)
            .map(|n| (self.get_or_zero(n) - other.get_or_zero(n)).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// `max_n |self(n) - other(n)|`, treating missing entries as zero.
    pub fn max_distance(&self, other: &ComplexSequence) -> f64 {
        let lo = self.lo.min(other.lo);
        let hi = self.hi().max(other.hi());
        (lo..=hi)
            .map(|n| (self.get_or_zero(n) - other.get_or_zero(n)).norm())
            .fold(0.0, f64::max)
    }
}

impl Index<i64> for ComplexSequence {
    type Output = Complex64;

    fn index(&self, n: i64) -> &Complex64 {
        let k = n - self.lo;
        assert!(
            k >= 0 && (k as usize) < self.values.len(),
            "index {n} outside [{}, {}]",
            self.lo,
            self.hi()
        );
        &self.values[k as usize]
    }
}

/// A complex sequence `u(t, ·)` with its timestamp.
#[derive(Debug, Clone, PartialEq)]
pub struct WavePacket {
    pub time: f64,
    pub values: ComplexSequence,
}

impl WavePacket {
    pub fn new(time: f64, values: ComplexSequence) -> Self {
        Self { time, values }
    }

    pub fn norm(&self) -> f64 {
        self.values.norm()
    }

    /// Writes the snapshot CSV `t,n,re_u,im_u,abs_u`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        wtr.write_record(["t", "n", "re_u", "im_u", "abs_u"])?;
        self.append_rows(&mut wtr)?;
        wtr.flush()?;
        Ok(())
    }

    pub(crate) fn append_rows<W: Write>(&self, wtr: &mut csv::Writer<W>) -> Result<()> {
        for (n, v) in self.values.iter() {
            wtr.write_record([
                self.time.to_string(),
                n.to_string(),
                v.re.to_string(),
                v.im.to_string(),
                v.norm().to_string(),
            ])?;
        }
        Ok(())
    }

    /// Reads a single-time snapshot CSV `t,n,re_u,im_u,abs_u`.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers()?.clone();
        if headers.iter().collect::<Vec<_>>() != ["t", "n", "re_u", "im_u", "abs_u"] {
            return Err(Error::Parse("snapshot header must be `t,n,re_u,im_u,abs_u`".into()));
        }
        let mut time = None;
        let mut lo = None;
        let mut values = Vec::new();
        for (row, record) in rdr.records().enumerate() {
            let record = record?;
            let field = |k: usize| -> Result<f64> {
                record
                    .get(k)
                    .ok_or_else(|| Error::Parse(format!("row {}: missing field", row + 2)))?
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(format!("row {}: {e}", row + 2)))
            };
            let t = field(0)?;
            let n: i64 = record
                .get(1)
                .unwrap_or_default()
                .parse()
                .map_err(|e| Error::Parse(format!("row {}: bad index: {e}", row + 2)))?;
            if *time.get_or_insert(t) != t {
                return Err(Error::Parse(format!("row {}: snapshot mixes times", row + 2)));
            }
            let start = *lo.get_or_insert(n);
            if n != start + values.len() as i64 {
                return Err(Error::Parse(format!("row {}: non-contiguous index {n}", row + 2)));
            }
            values.push(Complex64::new(field(2)?, field(3)?));
        }
        let (Some(time), Some(lo)) = (time, lo) else {
            return Err(Error::Parse("snapshot has no rows".into()));
        };
        Ok(Self::new(time, ComplexSequence::new(lo, values)))
    }
}

/// A point `θ` of the punctured closed unit disk together with `λ(θ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralPoint {
    theta: Complex64,
    lambda: Complex64,
}

impl SpectralPoint {
    pub fn new(theta: Complex64) -> Result<Self> {
        if theta.norm() > 1.0 + 1e-12 {
            return Err(Error::Domain(format!("|θ| = {} exceeds 1", theta.norm())));
        }
        Ok(Self {
            theta,
            lambda: lambda_of_theta(theta)?,
        })
    }

    pub fn theta(&self) -> Complex64 {
        self.theta
    }

    pub fn lambda(&self) -> Complex64 {
        self.lambda
    }
}

/// `λ(θ) = (θ + 1/θ)/2`.
pub fn lambda_of_theta(theta: Complex64) -> Result<Complex64> {
    if theta == Complex64::new(0.0, 0.0) {
        return Err(Error::Domain("λ(θ) is undefined at θ = 0".into()));
    }
    Ok(0.5 * (theta + theta.inv()))
}

/// Inverse of `λ(θ)` on `|λ| > 1`: the root of `θ² - 2λθ + 1 = 0` inside the
/// unit disk.
pub fn theta_of_lambda(lambda: f64) -> Result<f64> {
    if !(lambda.abs() > 1.0) {
        return Err(Error::Domain(format!(
            "λ = {lambda} lies in [-1, 1]; no bound-state θ"
        )));
    }
    // λ - sign(λ)√(λ²-1), written without cancellation
    Ok(lambda.signum() / (lambda.abs() + (lambda * lambda - 1.0).sqrt()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BoundaryMode {
    /// Return `τf` only where the full stencil lies in the window.
    #[default]
    Interior,
    /// Treat `f` as zero outside its window; the result covers the same window.
    ZeroExtend,
}

/// Applies `τ` to `f`.
pub fn apply_operator(
    profile: &CoefficientProfile,
    f: &ComplexSequence,
    mode: BoundaryMode,
) -> Result<ComplexSequence> {
    if f.len() < 3 {
        return Err(Error::WindowTooSmall {
            lo: f.lo(),
            hi: f.hi(),
            reason: "the stencil needs at least 3 sites".into(),
        });
    }
    let stencil = |n: i64| {
        profile.a(n) * f.get_or_zero(n + 1)
            + profile.a(n - 1) * f.get_or_zero(n - 1)
            + profile.b(n) * f.get_or_zero(n)
    };
    Ok(match mode {
        BoundaryMode::Interior => {
            ComplexSequence::new(f.lo() + 1, (f.lo() + 1..f.hi()).map(stencil).collect())
        }
        BoundaryMode::ZeroExtend => ComplexSequence::new(f.lo(), f.indices().map(stencil).collect()),
    })
}

/// Result of testing the two hypotheses on the coefficients.
#[derive(Debug, Clone)]
pub struct AdmissibilityReport {
    /// `Σ |n| |1-2a(n)|` and `Σ |n| |b(n)|`; finite for every windowed profile.
    pub first_moment_a: f64,
    pub first_moment_b: f64,
    pub condition_i: bool,
    /// `(N, tail(N), C N^{-(1+δ)2N})` for every `N > 0` in the window.
    pub tails: Vec<(i64, f64, f64)>,
    pub condition_ii: bool,
    /// Natural log of the smallest `C` satisfying the tail condition for the
    /// stored `δ` (`-inf` when every tail vanishes).
    pub minimal_constant_ln: f64,
}

impl AdmissibilityReport {
    pub fn admissible(&self) -> bool {
        self.condition_i && self.condition_ii
    }

    pub fn minimal_constant(&self) -> f64 {
        self.minimal_constant_ln.exp()
    }
}

fn tail_sum(profile: &CoefficientProfile, n: i64) -> f64 {
    (n.max(profile.window_lo())..=profile.window_hi())
        .map(|m| (2.0 * profile.a(m) - 1.0).abs() + profile.b(m).abs())
        .sum()
}

fn minimal_decay_constant_ln(profile: &CoefficientProfile, delta: f64) -> f64 {
    (1..=profile.window_hi())
        .filter_map(|n| {
            let tail = tail_sum(profile, n);
            (tail > 0.0).then(|| tail.ln() + 2.0 * (1.0 + delta) * n as f64 * (n as f64).ln())
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Checks the summability condition (i) and the tail condition (ii) for the
/// stored `(C, δ)`.
pub fn admissibility_check(profile: &CoefficientProfile) -> AdmissibilityReport {
    let delta = profile.decay_exponent();
    let ln_c = profile.decay_constant().ln();
    let (mut first_moment_a, mut first_moment_b) = (0.0, 0.0);
    for n in profile.window_lo()..=profile.window_hi() {
        first_moment_a += (n as f64).abs() * (1.0 - 2.0 * profile.a(n)).abs();
        first_moment_b += (n as f64).abs() * profile.b(n).abs();
    }
    let mut condition_ii = true;
    let tails = (1..=profile.window_hi())
        .map(|n| {
            let tail = tail_sum(profile, n);
            let exponent = 2.0 * (1.0 + delta) * n as f64 * (n as f64).ln();
            let bound_ln = ln_c - exponent;
            if tail > 0.0 && tail.ln() > bound_ln + 1e-12 {
                condition_ii = false;
            }
            (n, tail, bound_ln.exp())
        })
        .collect();
    AdmissibilityReport {
        first_moment_a,
        first_moment_b,
        condition_i: first_moment_a.is_finite() && first_moment_b.is_finite(),
        tails,
        condition_ii,
        minimal_constant_ln: minimal_decay_constant_ln(profile, delta),
    }
}

/// `v(t, n) = u(αt, n) e^{-iβt}`: given `u` at time `s = αt`, returns `v` at
/// time `t = s/α`. If `u` solves `i∂_t u = Hu` then `v` solves
/// `i∂_t v = (αH + β)v`.
pub fn affine_transform(u: &WavePacket, alpha: f64, beta: f64) -> Result<WavePacket> {
    if alpha == 0.0 || !alpha.is_finite() {
        return Err(Error::Domain("affine rescaling needs a finite nonzero α".into()));
    }
    let t = u.time / alpha;
    let phase = Complex64::new(0.0, -beta * t).exp();
    Ok(WavePacket::new(t, u.values.scaled(phase)))
}

/// `ã(n) = a(-n-1)`, `b̃(n) = b(-n)`; `ũ(t, n) = u(t, -n)` solves the reflected
/// equation.
pub fn reflect_profile(profile: &CoefficientProfile) -> CoefficientProfile {
    let lo = profile.window_lo();
    let hi = profile.window_hi();
    // b̃ lives on [-hi, -lo], ã on [-hi-1, -lo-1]; store the union [-hi-1, -lo].
    let new_lo = -hi - 1;
    let new_hi = -lo;
    let a_values = (new_lo..=new_hi).map(|n| profile.a(-n - 1)).collect();
    let b_values = (new_lo..=new_hi).map(|n| profile.b(-n)).collect();
    let reflected = CoefficientProfile {
        window_lo: new_lo,
        a_values,
        b_values,
        decay_constant: profile.decay_constant(),
        decay_exponent: profile.decay_exponent(),
    };
    canonical(reflected)
}

/// Drops free sites at either end of the stored window. A fully free profile
/// is stored as the single site `n = 0`.
fn canonical(mut profile: CoefficientProfile) -> CoefficientProfile {
    let is_free = |p: &CoefficientProfile, k: usize| p.a_values[k] == A_FREE && p.b_values[k] == 0.0;
    while profile.a_values.len() > 1 && is_free(&profile, profile.a_values.len() - 1) {
        profile.a_values.pop();
        profile.b_values.pop();
    }
    while profile.a_values.len() > 1 && is_free(&profile, 0) {
        profile.a_values.remove(0);
        profile.b_values.remove(0);
        profile.window_lo += 1;
    }
    if profile.a_values.len() == 1 && is_free(&profile, 0) {
        profile.window_lo = 0;
    }
    profile
}

/// Reflects a sequence, `ũ(n) = u(-n)`.
pub fn reflect_sequence(u: &ComplexSequence) -> ComplexSequence {
    let values = u.values().iter().rev().copied().collect();
    ComplexSequence::new(-u.hi(), values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn lambda_map_examples() {
        assert_eq!(lambda_of_theta(c(1.0, 0.0)).unwrap(), c(1.0, 0.0));
        assert!(lambda_of_theta(c(0.0, 1.0)).unwrap().norm() < 1e-16);
        assert_relative_eq!(lambda_of_theta(c(0.5, 0.0)).unwrap().re, 1.25);
        assert!(matches!(lambda_of_theta(c(0.0, 0.0)), Err(Error::Domain(_))));
    }

    #[test]
    fn unit_circle_maps_into_interval() {
        for k in 0..64 {
            let theta = Complex64::from_polar(1.0, 0.1 * k as f64);
            let p = SpectralPoint::new(theta).unwrap();
            assert!(p.lambda().im.abs() < 1e-15);
            assert!(p.lambda().re.abs() <= 1.0 + 1e-15);
        }
        assert!(SpectralPoint::new(c(1.5, 0.0)).is_err());
    }

    #[test]
    fn theta_of_lambda_examples() {
        assert_relative_eq!(theta_of_lambda(1.25).unwrap(), 0.5, epsilon = 1e-15);
        assert_relative_eq!(theta_of_lambda(-1.25).unwrap(), -0.5, epsilon = 1e-15);
        let golden = theta_of_lambda(1.25f64.sqrt()).unwrap();
        assert_relative_eq!(golden, 0.618_033_988_749_895, epsilon = 1e-12);
        assert!(theta_of_lambda(1.0).is_err());
        assert!(theta_of_lambda(-0.3).is_err());
    }

    #[test]
    fn free_operator_on_plane_wave() {
        let profile = CoefficientProfile::free();
        let window = GridWindow::symmetric(10).unwrap();
        let theta = Complex64::from_polar(0.8, 0.7);
        let f = ComplexSequence::from_fn(window, |n| theta.powi(n as i32));
        let tf = apply_operator(&profile, &f, BoundaryMode::Interior).unwrap();
        let lambda = lambda_of_theta(theta).unwrap();
        assert_eq!(tf.lo(), -9);
        assert_eq!(tf.hi(), 9);
        for (n, v) in tf.iter() {
            assert!((v - lambda * f[n]).norm() < 1e-13 * f[n].norm().max(1.0));
        }
    }

    #[test]
    fn free_operator_on_delta() {
        let profile = CoefficientProfile::free();
        let window = GridWindow::symmetric(4).unwrap();
        let f = ComplexSequence::delta(window, 0);
        let tf = apply_operator(&profile, &f, BoundaryMode::Interior).unwrap();
        for (n, v) in tf.iter() {
            let expected = if n.abs() == 1 { 0.5 } else { 0.0 };
            assert_eq!(v, c(expected, 0.0));
        }
    }

    #[test]
    fn single_site_bound_state_eigenrelation() {
        let profile = CoefficientProfile::single_site(0, 0.5);
        let theta = 1.25f64.sqrt() - 0.5;
        let window = GridWindow::symmetric(30).unwrap();
        let f = ComplexSequence::from_fn(window, |n| c(theta.powi(n.abs() as i32), 0.0));
        let tf = apply_operator(&profile, &f, BoundaryMode::Interior).unwrap();
        for (n, v) in tf.iter() {
            assert!((v - 1.25f64.sqrt() * f[n]).norm() < 1e-14);
        }
    }

    #[test]
    fn tiny_window_is_rejected() {
        let f = ComplexSequence::new(0, vec![c(1.0, 0.0); 2]);
        assert!(apply_operator(&CoefficientProfile::free(), &f, BoundaryMode::Interior).is_err());
    }

    #[test]
    fn free_profile_is_admissible_for_any_constants() {
        for (cst, delta) in [(1e-9, 1e-9), (1.0, 1.0), (1e6, 7.0)] {
            let mut profile = CoefficientProfile::free();
            profile.set_decay(cst, delta).unwrap();
            let report = admissibility_check(&profile);
            assert!(report.admissible());
            assert_eq!(report.minimal_constant(), 0.0);
        }
    }

    #[test]
    fn single_tail_term_needs_large_constant() {
        let b = vec![0.0, 0.0, 0.0, 0.0, 1.0];
        let mut profile = CoefficientProfile::with_decay(1, vec![0.5; 5], b, 1.0, 1.0).unwrap();
        let report = admissibility_check(&profile);
        assert!(!report.condition_ii);
        assert_relative_eq!(report.minimal_constant(), 5f64.powi(20), max_relative = 1e-12);
        profile.set_decay(5f64.powi(20) * (1.0 + 1e-9), 1.0).unwrap();
        assert!(admissibility_check(&profile).condition_ii);
        profile.set_decay(5f64.powi(20) * 0.999, 1.0).unwrap();
        assert!(!admissibility_check(&profile).condition_ii);
    }

    #[test]
    fn superfactorial_envelope_is_admissible_with_moderate_constant() {
        let delta = 1.0;
        let q = 2f64.powf(-2.0 * (1.0 + delta));
        let b: Vec<f64> = (1..=8)
            .map(|n| (n as f64).powf(-2.0 * (1.0 + delta) * n as f64) * (1.0 - q))
            .collect();
        let profile = CoefficientProfile::with_decay(1, vec![0.5; 8], b.clone(), 1.0, delta).unwrap();
        let report = admissibility_check(&profile);
        // direct tail sums: the n = N term dominates, so C stays below 1
        for &(n, tail, _) in &report.tails {
            let direct: f64 = b[(n - 1) as usize..].iter().sum();
            assert_relative_eq!(tail, direct, max_relative = 1e-14);
        }
        assert!(report.admissible());
        assert!(report.minimal_constant() <= 1.0);
    }

    #[test]
    fn affine_examples() {
        let window = GridWindow::symmetric(3).unwrap();
        let u = WavePacket::new(1.0, ComplexSequence::from_fn(window, |n| c(n as f64, 1.0)));
        assert_eq!(affine_transform(&u, 1.0, 0.0).unwrap(), u);
        let v = affine_transform(&u, 1.0, std::f64::consts::PI).unwrap();
        assert_eq!(v.time, 1.0);
        for n in window.indices() {
            assert!((v.values[n] + u.values[n]).norm() < 1e-15);
        }
        assert!(affine_transform(&u, 0.0, 1.0).is_err());
    }

    #[test]
    fn reflection_examples() {
        let free = CoefficientProfile::free();
        let reflected = reflect_profile(&free);
        assert!(reflected.is_free());

        let mut b = vec![0.0; 7];
        b[6] = 1.0;
        let profile = CoefficientProfile::new(-3, vec![0.5; 7], b).unwrap();
        let reflected = reflect_profile(&profile);
        assert_eq!(reflected.b(-3), 1.0);
        assert_eq!(reflected.b(3), 0.0);
        assert_eq!(reflect_profile(&reflected), profile);
        assert_eq!(reflect_profile(&reflect_profile(&free)), free);
    }

    #[test]
    fn reflected_sequence_solves_reflected_equation() {
        let profile = CoefficientProfile::new(-1, vec![0.6, 0.45, 0.55], vec![0.1, -0.2, 0.3]).unwrap();
        let reflected = reflect_profile(&profile);
        let window = GridWindow::symmetric(6).unwrap();
        let f = ComplexSequence::from_fn(window, |n| c((n as f64).sin(), (0.3 * n as f64).cos()));
        let tf = apply_operator(&profile, &f, BoundaryMode::Interior).unwrap();
        let tf_reflected = apply_operator(&reflected, &reflect_sequence(&f), BoundaryMode::Interior).unwrap();
        for n in tf.indices() {
            assert!((tf[n] - tf_reflected[-n]).norm() < 1e-14);
        }
    }

    #[test]
    fn profile_csv_round_trip_and_errors() {
        let profile = CoefficientProfile::new(-1, vec![0.6, 0.5, 0.4], vec![0.0, 0.25, -1.0]).unwrap();
        let mut buf = Vec::new();
        profile.write_csv(&mut buf).unwrap();
        let back = CoefficientProfile::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back.a_values(), profile.a_values());
        assert_eq!(back.b_values(), profile.b_values());
        assert_eq!(back.window_lo(), -1);

        for bad in [
            "n,a,b\n0,0.5\n",
            "n,a,c\n0,0.5,0\n",
            "n,a,b\n0,0.5,0\n2,0.5,0\n",
            "n,a,b\n0,-0.5,0\n",
            "n,a,b\n0,abc,0\n",
            "n,a,b\n",
        ] {
            assert!(CoefficientProfile::read_csv(bad.as_bytes()).is_err(), "{bad:?}");
        }
    }

    #[test]
    fn snapshot_csv_round_trip() {
        let window = GridWindow::symmetric(2).unwrap();
        let u = WavePacket::new(0.5, ComplexSequence::from_fn(window, |n| c(0.1 * n as f64, -0.3)));
        let mut buf = Vec::new();
        u.write_csv(&mut buf).unwrap();
        assert_eq!(WavePacket::read_csv(buf.as_slice()).unwrap(), u);
    }
}
