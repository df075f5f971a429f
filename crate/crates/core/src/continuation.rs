//! Unique continuation from two consecutive sites. For `w = u - v` the
//! equation `i∂_t w = Hw` is solved for the neighbouring site, stepping
//! outwards from `n0, n0+1`, with time derivatives by central differences
//! and an explicitly propagated tolerance.

use std::io::Write;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::evolution::{evolve, EvolutionConfig};
use crate::lattice::{CoefficientProfile, GridWindow, WavePacket};
use crate::spectral::{adequate_samples, SpectralBasis};

/// Fewest samples a trace may have; also the fewest a site needs for a
/// derivative with a third-difference error bar.
pub const MIN_SAMPLES: usize = 5;
const UNIFORM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct SolutionTrace {
    times: Vec<f64>,
    snapshots: Vec<WavePacket>,
}

impl SolutionTrace {
    /// Requires at least five uniformly spaced, strictly increasing times and
    /// snapshots on one window.
    pub fn new(snapshots: Vec<WavePacket>) -> Result<Self> {
        if snapshots.len() < MIN_SAMPLES {
            return Err(Error::InsufficientData(format!(
                "a trace needs at least {MIN_SAMPLES} samples, got {}",
                snapshots.len()
            )));
        }
        let times: Vec<f64> = snapshots.iter().map(|p| p.time).collect();
        let dt = times[1] - times[0];
        if !(dt > 0.0) {
            return Err(Error::Domain("trace times must be strictly increasing".into()));
        }
        for w in times.windows(2) {
            if ((w[1] - w[0]) - dt).abs() > UNIFORM_TOLERANCE * dt.max(w[1].abs()) {
                return Err(Error::Domain("trace times must be uniformly spaced".into()));
            }
        }
        let (lo, len) = (snapshots[0].values.lo(), snapshots[0].values.len());
        if snapshots.iter().any(|p| p.values.lo() != lo || p.values.len() != len) {
            return Err(Error::GridMismatch("trace snapshots must share one window".into()));
        }
        Ok(Self { times, snapshots })
    }

    /// Evolves `u0` to `t0 + k Δt`, `k < samples`, by `cfg.method`.
    pub fn sample(
        profile: &CoefficientProfile,
        u0: &WavePacket,
        samples: usize,
        time_step: f64,
        cfg: &EvolutionConfig,
    ) -> Result<Self> {
        if !(time_step > 0.0) {
            return Err(Error::Domain(format!("sampling step {time_step} must be positive")));
        }
        let mut snapshots = Vec::with_capacity(samples);
        snapshots.push(u0.clone());
        match cfg.method {
            crate::evolution::Method::Spectral => {
                let window = u0.values.window()?;
                let basis = SpectralBasis::new(profile, window, adequate_samples(profile, window, cfg.circle_samples)?)?;
                for k in 1..samples {
                    let t = k as f64 * time_step;
                    crate::evolution::check_padding(u0, t, cfg)?;
                    snapshots.push(crate::evolution::evolve_with_basis(&basis, u0, t, cfg.bound_states)?);
                }
            }
            crate::evolution::Method::Direct => {
                for _ in 1..samples {
                    let next = evolve(profile, snapshots.last().expect("nonempty"), time_step, cfg)?;
                    snapshots.push(next);
                }
            }
        }
        Self::new(snapshots)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn snapshots(&self) -> &[WavePacket] {
        &self.snapshots
    }

    pub fn time_step(&self) -> f64 {
        self.times[1] - self.times[0]
    }

    pub fn window(&self) -> Result<GridWindow> {
        self.snapshots[0].values.window()
    }

    pub fn lo(&self) -> i64 {
        self.snapshots[0].values.lo()
    }

    pub fn hi(&self) -> i64 {
        self.snapshots[0].values.hi()
    }

    /// `u(t_k, n)` over all times.
    pub fn site(&self, n: i64) -> Result<Vec<Complex64>> {
        if n < self.lo() || n > self.hi() {
            return Err(Error::OutOfWindow {
                index: n,
                lo: self.lo(),
                hi: self.hi(),
            });
        }
        Ok(self.snapshots.iter().map(|p| p.values[n]).collect())
    }

    /// `u - v` site by site.
    pub fn difference(&self, other: &SolutionTrace) -> Result<SolutionTrace> {
        if self.times.len() != other.times.len()
            || self.times.iter().zip(&other.times).any(|(a, b)| (a - b).abs() > UNIFORM_TOLERANCE * a.abs().max(1.0))
        {
            return Err(Error::GridMismatch("traces must share one time grid".into()));
        }
        let snapshots = self
            .snapshots
            .iter()
            .zip(&other.snapshots)
            .map(|(u, v)| {
                if u.values.lo() != v.values.lo() || u.values.len() != v.values.len() {
                    return Err(Error::GridMismatch("traces must share one window".into()));
                }
                let values = u.values.values().iter().zip(v.values.values()).map(|(a, b)| a - b).collect();
                Ok(WavePacket::new(u.time, crate::lattice::ComplexSequence::new(u.values.lo(), values)))
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            times: self.times.clone(),
            snapshots,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// Solve for `n - 1` from `n, n+1`.
    Down,
    /// Solve for `n + 2` from `n, n+1`.
    Up,
}

/// Values of one site on the sample indices `start..start + values.len()`.
#[derive(Debug, Clone, PartialEq)]
pub struct SiteTrace {
    pub start: usize,
    pub values: Vec<Complex64>,
}

impl SiteTrace {
    fn end(&self) -> usize {
        self.start + self.values.len()
    }

    fn slice(&self, start: usize, end: usize) -> &[Complex64] {
        &self.values[start - self.start..end - self.start]
    }
}

/// A derived neighbour with its discretisation error bar.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivedSite {
    pub site: i64,
    pub trace: SiteTrace,
    /// `Δt²/6 · max|∂³_t w| / a`, from third central differences.
    pub error_bar: f64,
}

fn derive_from(
    profile: &CoefficientProfile,
    dt: f64,
    n: i64,
    direction: Direction,
    near: &SiteTrace,
    far: &SiteTrace,
) -> Result<DerivedSite> {
    // `near` is differentiated in time, `far` enters algebraically
    if near.values.len() < MIN_SAMPLES {
        return Err(Error::InsufficientData(format!(
            "site trace has {} samples; a derivative with error bar needs {MIN_SAMPLES}",
            near.values.len()
        )));
    }
    let start = (near.start + 1).max(far.start);
    let end = (near.end() - 1).min(far.end());
    if end <= start {
        return Err(Error::InsufficientData("the two site traces do not overlap in time".into()));
    }
    let (site, divisor, coupling, diag) = match direction {
        // i∂_t w(n) = a(n) w(n+1) + a(n-1) w(n-1) + b(n) w(n)
        Direction::Down => (n - 1, profile.a(n - 1), profile.a(n), profile.b(n)),
        // i∂_t w(n+1) = a(n+1) w(n+2) + a(n) w(n) + b(n+1) w(n+1)
        Direction::Up => (n + 2, profile.a(n + 1), profile.a(n), profile.b(n + 1)),
    };
    let near_full = &near.values;
    let far_vals = far.slice(start, end);
    let values = (start..end)
        .zip(far_vals)
        .map(|(k, &f)| {
            let i = k - near.start;
            let derivative = (near_full[i + 1] - near_full[i - 1]) / (2.0 * dt);
            (Complex64::i() * derivative - coupling * f - diag * near_full[i]) / divisor
        })
        .collect();
    let third = (2..near_full.len() - 2)
        .map(|i| {
            (near_full[i + 2] - 2.0 * near_full[i + 1] + 2.0 * near_full[i - 1] - near_full[i - 2]).norm()
                / (2.0 * dt.powi(3))
        })
        .fold(0.0f64, f64::max);
    Ok(DerivedSite {
        site,
        trace: SiteTrace { start, values },
        error_bar: dt * dt / 6.0 * third / divisor,
    })
}

/// Solves the equation for the neighbour of the pair `n, n+1` of `w`:
/// `n - 1` for [`Direction::Down`], `n + 2` for [`Direction::Up`]. Only
/// interior times contribute, so the result is two samples shorter.
pub fn derive_neighbor(
    profile: &CoefficientProfile,
    w: &SolutionTrace,
    n: i64,
    direction: Direction,
) -> Result<DerivedSite> {
    let target = match direction {
        Direction::Down => n - 1,
        Direction::Up => n + 2,
    };
    if target < w.lo() || target > w.hi() || n + 1 > w.hi() || n < w.lo() {
        return Err(Error::OutOfWindow {
            index: target,
            lo: w.lo(),
            hi: w.hi(),
        });
    }
    let full = |m: i64| -> Result<SiteTrace> { Ok(SiteTrace { start: 0, values: w.site(m)? }) };
    let (near, far) = match direction {
        Direction::Down => (full(n)?, full(n + 1)?),
        Direction::Up => (full(n + 1)?, full(n)?),
    };
    derive_from(profile, w.time_step(), n, direction, &near, &far)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SiteStatus {
    Coincide,
    Disagree,
    Inconclusive,
}

impl SiteStatus {
    pub fn label(self) -> &'static str {
        match self {
            SiteStatus::Coincide => "coincide",
            SiteStatus::Disagree => "disagree",
            SiteStatus::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SiteCertificate {
    pub n: i64,
    /// Bound on `|w(t, n)|` implied by the seeds; `∞` once it overflows.
    pub certified_bound: f64,
    /// `max_t |u - v|` at `n` over the times used.
    pub observed: f64,
    /// `max_t` of the derived `|w|`, absent at the seed sites.
    pub derived: Option<f64>,
    pub status: SiteStatus,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ContinuationVerdict {
    /// Traces coincide within the certified tolerance at every site.
    Coincide,
    /// The sites where `|u - v|` exceeded the certified bound.
    Disagree { sites: Vec<i64> },
    /// Certified on `[lo, hi]` only.
    InconclusiveBeyond { lo: i64, hi: i64 },
}

impl ContinuationVerdict {
    pub fn describe(&self) -> String {
        match self {
            ContinuationVerdict::Coincide => "traces coincide within ε(n)".into(),
            ContinuationVerdict::Disagree { sites } => format!("traces disagree at sites {sites:?}"),
            ContinuationVerdict::InconclusiveBeyond { lo, hi } => {
                format!("inconclusive beyond sites {lo} and {hi}")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContinuationReport {
    pub n0: i64,
    pub tolerance: f64,
    /// Per-step amplification `G = 3 max(1, ‖a‖, ‖b‖, 1/Δt) / min a`.
    pub growth_factor: f64,
    /// Sorted by site.
    pub sites: Vec<SiteCertificate>,
    pub verdict: ContinuationVerdict,
}

impl ContinuationReport {
    pub fn site(&self, n: i64) -> Option<&SiteCertificate> {
        self.sites.iter().find(|s| s.n == n)
    }

    /// Writes `n,certified_bound,status`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        wtr.write_record(["n", "certified_bound", "status"])?;
        for s in &self.sites {
            wtr.write_record([s.n.to_string(), format!("{:.17e}", s.certified_bound), s.status.label().to_string()])?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// `3 max(1, ‖a‖_∞, ‖b‖_∞, 1/Δt) / min a`. The factor 3 covers the three
/// terms of one step: the central difference, the coupling and the diagonal.
pub fn growth_factor(profile: &CoefficientProfile, dt: f64) -> f64 {
    3.0 * 1f64.max(profile.sup_a()).max(profile.sup_abs_b()).max(1.0 / dt) / profile.inf_a()
}

fn max_abs(values: &[Complex64]) -> f64 {
    values.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Propagates `w = u - v` from `n0, n0+1` to the whole window.
pub fn continuation_check(
    profile: &CoefficientProfile,
    u: &SolutionTrace,
    v: &SolutionTrace,
    n0: i64,
    tol: f64,
) -> Result<ContinuationReport> {
    if !(tol >= 0.0) || !tol.is_finite() {
        return Err(Error::Domain(format!("tolerance {tol} must be finite and nonnegative")));
    }
    let w = u.difference(v)?;
    if n0 < w.lo() || n0 + 1 > w.hi() {
        return Err(Error::OutOfWindow {
            index: n0,
            lo: w.lo(),
            hi: w.hi() - 1,
        });
    }
    let seeds = [w.site(n0)?, w.site(n0 + 1)?];
    for (k, s) in seeds.iter().enumerate() {
        let gap = max_abs(s);
        if gap > tol {
            return Err(Error::Precondition(format!(
                "max |u - v| = {gap:.3e} at site {} exceeds the tolerance {tol:.3e}",
                n0 + k as i64
            )));
        }
    }
    let dt = w.time_step();
    let growth = growth_factor(profile, dt);

    let mut sites = vec![
        SiteCertificate {
            n: n0,
            certified_bound: tol,
            observed: max_abs(&seeds[0]),
            derived: None,
            status: SiteStatus::Coincide,
        },
        SiteCertificate {
            n: n0 + 1,
            certified_bound: tol,
            observed: max_abs(&seeds[1]),
            derived: None,
            status: SiteStatus::Coincide,
        },
    ];

    for direction in [Direction::Down, Direction::Up] {
        let seed = |k: usize| SiteTrace {
            start: 0,
            values: seeds[k].clone(),
        };
        // (near, far) in the order the next step needs them
        let (mut near, mut far) = match direction {
            Direction::Down => (seed(0), seed(1)),
            Direction::Up => (seed(1), seed(0)),
        };
        let (mut cert_near, mut cert_far) = (tol, tol);
        let mut n = n0;
        let mut stalled = false;
        loop {
            let target = match direction {
                Direction::Down => n - 1,
                Direction::Up => n + 2,
            };
            if target < w.lo() || target > w.hi() {
                break;
            }
            if stalled || near.values.len() < MIN_SAMPLES {
                stalled = true;
                sites.push(SiteCertificate {
                    n: target,
                    certified_bound: f64::INFINITY,
                    observed: max_abs(&w.site(target)?),
                    derived: None,
                    status: SiteStatus::Inconclusive,
                });
                n += if direction == Direction::Down { -1 } else { 1 };
                continue;
            }
            let derived = derive_from(profile, dt, n, direction, &near, &far)?;
            let cert = growth * cert_near.max(cert_far) + derived.error_bar;
            let observed_full = w.site(target)?;
            let observed = max_abs(&observed_full[derived.trace.start..derived.trace.end()]);
            let derived_max = max_abs(&derived.trace.values);
            let status = if !cert.is_finite() {
                SiteStatus::Inconclusive
            } else if observed <= cert && derived_max <= cert {
                SiteStatus::Coincide
            } else {
                SiteStatus::Disagree
            };
            sites.push(SiteCertificate {
                n: target,
                certified_bound: if cert.is_finite() { cert } else { f64::INFINITY },
                observed,
                derived: Some(derived_max),
                status,
            });
            // the new site becomes `near`; the old `near` becomes `far`
            far = std::mem::replace(&mut near, derived.trace);
            cert_far = cert_near;
            cert_near = cert;
            n += if direction == Direction::Down { -1 } else { 1 };
        }
    }
    sites.sort_by_key(|s| s.n);

    let disagree: Vec<i64> = sites.iter().filter(|s| s.status == SiteStatus::Disagree).map(|s| s.n).collect();
    let verdict = if !disagree.is_empty() {
        ContinuationVerdict::Disagree { sites: disagree }
    } else if sites.iter().any(|s| s.status == SiteStatus::Inconclusive) {
        let certified = |s: &&SiteCertificate| s.status == SiteStatus::Coincide;
        let lo = sites.iter().filter(certified).map(|s| s.n).min().unwrap_or(n0);
        let hi = sites.iter().filter(certified).map(|s| s.n).max().unwrap_or(n0 + 1);
        ContinuationVerdict::InconclusiveBeyond { lo, hi }
    } else {
        ContinuationVerdict::Coincide
    };
    Ok(ContinuationReport {
        n0,
        tolerance: tol,
        growth_factor: growth,
        sites,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolution::{free_kernel, Method};
    use crate::fixtures;
    use crate::lattice::ComplexSequence;
    use crate::scattering::{bound_state_vector, find_eigenvalues};

    fn trace_from(window: GridWindow, samples: usize, dt: f64, f: impl Fn(f64, i64) -> Complex64) -> SolutionTrace {
        let snapshots = (0..samples)
            .map(|k| {
                let t = k as f64 * dt;
                WavePacket::new(t, ComplexSequence::from_fn(window, |n| f(t, n)))
            })
            .collect();
        SolutionTrace::new(snapshots).unwrap()
    }

    #[test]
    fn trace_validation() {
        let w = GridWindow::symmetric(3).unwrap();
        let p = |t: f64| WavePacket::new(t, ComplexSequence::zeros(w));
        assert!(SolutionTrace::new((0..4).map(|k| p(k as f64)).collect()).is_err());
        assert!(SolutionTrace::new(vec![p(0.0), p(1.0), p(2.0), p(3.5), p(4.0)]).is_err());
        assert!(SolutionTrace::new(vec![p(0.0), p(0.0), p(0.0), p(0.0), p(0.0)]).is_err());
        let other = WavePacket::new(4.0, ComplexSequence::zeros(GridWindow::symmetric(4).unwrap()));
        assert!(SolutionTrace::new(vec![p(0.0), p(1.0), p(2.0), p(3.0), other]).is_err());
        assert!(SolutionTrace::new((0..5).map(|k| p(k as f64)).collect()).is_ok());
    }

    #[test]
    fn zero_trace_derives_zero() {
        let w = GridWindow::symmetric(10).unwrap();
        let trace = trace_from(w, 9, 0.1, |_, _| Complex64::default());
        let d = derive_neighbor(&fixtures::random_admissible(3), &trace, 0, Direction::Down).unwrap();
        assert!(d.trace.values.iter().all(|z| *z == Complex64::default()));
        assert_eq!(d.trace.values.len(), 7);
        assert_eq!(d.error_bar, 0.0);
    }

    #[test]
    fn bessel_neighbour_is_second_order() {
        let profile = CoefficientProfile::free();
        let w = GridWindow::symmetric(20).unwrap();
        let mut errors = Vec::new();
        for dt in [0.02, 0.01] {
            let trace = trace_from(w, 21, dt, |t, n| free_kernel(n, 0, 0.5 + t));
            let d = derive_neighbor(&profile, &trace, 3, Direction::Down).unwrap();
            let err = d
                .trace
                .values
                .iter()
                .enumerate()
                .map(|(k, z)| (z - free_kernel(2, 0, 0.5 + (k + d.trace.start) as f64 * dt)).norm())
                .fold(0.0, f64::max);
            assert!(err <= 1.5 * d.error_bar + 1e-13, "{err} vs {}", d.error_bar);
            errors.push(err);
        }
        let order = (errors[0] / errors[1]).log2();
        assert!((order - 2.0).abs() < 0.1, "order {order}");
    }

    #[test]
    fn eigenvector_neighbour_up() {
        let profile = fixtures::single_site(0.5);
        let window = GridWindow::symmetric(30).unwrap();
        let theta = find_eigenvalues(&profile, window).unwrap().thetas[0];
        let lambda = 0.5 * (theta + 1.0 / theta);
        let e = bound_state_vector(&profile, theta, window);
        let dt = 0.01;
        let trace = trace_from(window, 11, dt, |t, n| e[n] * Complex64::from_polar(1.0, -lambda * t));
        let d = derive_neighbor(&profile, &trace, -1, Direction::Up).unwrap();
        for (k, z) in d.trace.values.iter().enumerate() {
            let t = (k + d.trace.start) as f64 * dt;
            let exact = e[1] * Complex64::from_polar(1.0, -lambda * t);
            assert!((z - exact).norm() <= 1.5 * d.error_bar + 1e-13);
            assert!((z - exact).norm() > 0.1 * d.error_bar);
        }
    }

    #[test]
    fn zero_difference_is_exact_everywhere() {
        let profile = fixtures::random_admissible(5);
        let window = GridWindow::symmetric(12).unwrap();
        let u = trace_from(window, 41, 0.05, |t, n| Complex64::new(t, n as f64));
        let report = continuation_check(&profile, &u, &u, 0, 0.0).unwrap();
        assert_eq!(report.verdict, ContinuationVerdict::Coincide);
        assert_eq!(report.sites.len(), window.len());
        assert!(report.sites.iter().all(|s| s.certified_bound == 0.0 && s.derived.unwrap_or(0.0) == 0.0));
    }

    #[test]
    fn certified_bound_grows_geometrically() {
        let profile = fixtures::random_admissible(2);
        let window = GridWindow::symmetric(6).unwrap();
        let u = trace_from(window, 31, 0.1, |_, _| Complex64::default());
        let tol = 1e-12;
        let report = continuation_check(&profile, &u, &u, 0, tol).unwrap();
        let g = report.growth_factor;
        for s in &report.sites {
            let steps = if s.n <= 0 { -s.n } else { s.n - 1 };
            let expected = tol * g.powi(steps as i32);
            assert!((s.certified_bound - expected).abs() <= 1e-12 * expected);
        }
    }

    #[test]
    fn static_perturbation_is_flagged() {
        let profile = fixtures::single_site(0.5);
        let window = GridWindow::symmetric(40).unwrap();
        let u0 = WavePacket::new(0.0, fixtures::gaussian_packet(window, 0.0, 1.5, 0.3));
        let cfg = EvolutionConfig::default();
        let u = SolutionTrace::sample(&profile, &u0, 21, 0.02, &cfg).unwrap();
        let n0 = -8;
        let v = SolutionTrace::new(
            u.snapshots()
                .iter()
                .map(|p| {
                    let mut q = p.clone();
                    q.values.values_mut()[(n0 + 5 - window.n_lo()) as usize] += 1e-3;
                    q
                })
                .collect(),
        )
        .unwrap();
        let report = continuation_check(&profile, &u, &v, n0, 0.0).unwrap();
        assert_eq!(report.site(n0 + 5).unwrap().status, SiteStatus::Disagree);
        assert!(matches!(report.verdict, ContinuationVerdict::Disagree { .. }));
    }

    #[test]
    fn spectral_and_direct_traces_coincide() {
        let profile = fixtures::single_site(0.5);
        let window = GridWindow::symmetric(40).unwrap();
        let u0 = WavePacket::new(0.0, ComplexSequence::delta(window, 0));
        let spectral = SolutionTrace::sample(&profile, &u0, 11, 0.05, &EvolutionConfig::default()).unwrap();
        let direct_cfg = EvolutionConfig {
            method: Method::Direct,
            ..Default::default()
        };
        let direct = SolutionTrace::sample(&profile, &u0, 11, 0.05, &direct_cfg).unwrap();
        let diff = spectral.difference(&direct).unwrap();
        let tol = [0, 1].iter().map(|&k| max_abs(&diff.site(k).unwrap())).fold(0.0, f64::max);
        let report = continuation_check(&profile, &spectral, &direct, 0, tol).unwrap();
        assert!(report.sites.iter().all(|s| s.status != SiteStatus::Disagree));
        let mut buf = Vec::new();
        report.write_csv(&mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("n,certified_bound,status\n"));
    }
}
