//! `jacobi`: batch runner over the jacobi-core modules. Every subcommand
//! writes CSV tables plus `summary.txt` into `--out` and exits with 0 on pass,
//! 1 on a scientific failure and 2 on bad input.

mod config;

use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;

use jacobi_core::continuation::{continuation_check, ContinuationVerdict, SolutionTrace};
use jacobi_core::evolution::{evolve, evolve_taylor, EvolutionConfig, Method};
use jacobi_core::jost::{compute_jost, decay_bounds, jost_expansion_extract, verify_k_bounds, Side, DEFAULT_J_MAX};
use jacobi_core::lattice::{ComplexSequence, CoefficientProfile, GridWindow, WavePacket};
use jacobi_core::scattering::{
    find_eigenvalues, rotated_circle_grid, scattering_relation_residual, unitarity_defect_at, ScatteringData,
};
use jacobi_core::selfcheck::{self, SelfCheckOptions, CRITERIA};
use jacobi_core::spectral::{adequate_samples, BoundStateMode, SpectralBasis};
use jacobi_core::uncertainty::{run_uncertainty_experiment, EnvelopeSpec, ExperimentConfig, ExperimentVerdict, InitialData};
use jacobi_core::Error;

use config::{Config, ConfigError};

/// Tolerance on the scattering identities and on Parseval.
const IDENTITY_TOLERANCE: f64 = 1e-8;

#[derive(Parser)]
#[command(name = "jacobi", version, about = "Scattering, spectral and evolution experiments for Jacobi operators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Jost solutions, their Fourier expansion and the coefficient bound.
    Jost(RunArgs),
    /// Scattering coefficients on the circle and their identities.
    Scatter(RunArgs),
    /// Bound states, norming constants and a Parseval check.
    Spectrum(RunArgs),
    /// Evolves a snapshot CSV by time `t`.
    Evolve(RunArgs),
    /// Two-time envelope experiment.
    Uncertainty(RunArgs),
    /// Propagates the difference of two traces from two consecutive sites.
    Continuation(RunArgs),
    /// Runs the built-in acceptance checks and prints one line per check.
    Selfcheck(SelfcheckArgs),
}

#[derive(Args, Default)]
struct RunArgs {
    /// `key = value` file; flags take precedence over its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Coefficient profile CSV with header `n,a,b`.
    #[arg(long)]
    profile: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    m_samples: Option<usize>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    padding: Option<i64>,
    /// Initial snapshot CSV with header `t,n,re_u,im_u,abs_u`.
    #[arg(long)]
    u0: Option<PathBuf>,
    #[arg(long, allow_negative_numbers = true)]
    t: Option<f64>,
    /// `spectral`, `direct` or `taylor`.
    #[arg(long)]
    method: Option<String>,
}

#[derive(Args)]
struct SelfcheckArgs {
    /// Run only these checks (comma separated ids).
    #[arg(long, value_delimiter = ',')]
    only: Vec<u8>,
    #[arg(long, hide = true)]
    inject_fault: bool,
}

enum Failure {
    Input(String),
    Science(String),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Input(e.0)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let msg = e.to_string();
        match e {
            Error::EigenCountMismatch { .. }
            | Error::BoundaryReflection { .. }
            | Error::CrossValidation(_)
            | Error::InsufficientData(_) => Failure::Science(msg),
            _ => Failure::Input(msg),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Input(e.to_string())
    }
}

type Outcome = Result<bool, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Jost(a) => prepare("jost", a).and_then(|c| cmd_jost(&c)),
        Command::Scatter(a) => prepare("scatter", a).and_then(|c| cmd_scatter(&c)),
        Command::Spectrum(a) => prepare("spectrum", a).and_then(|c| cmd_spectrum(&c)),
        Command::Evolve(a) => prepare("evolve", a).and_then(|c| cmd_evolve(&c)),
        Command::Uncertainty(a) => prepare("uncertainty", a).and_then(|c| cmd_uncertainty(&c)),
        Command::Continuation(a) => prepare("continuation", a).and_then(|c| cmd_continuation(&c)),
        Command::Selfcheck(a) => cmd_selfcheck(&a),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Science(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

/// Merges the config file with the flags and rejects unknown keys.
fn prepare(command: &str, args: RunArgs) -> Result<Config, Failure> {
    let mut cfg = match &args.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    let path_str = |p: PathBuf| p.to_string_lossy().into_owned();
    let flags: [(&str, Option<String>); 10] = [
        ("out", args.out.map(path_str)),
        ("profile", args.profile.map(path_str)),
        ("seed", args.seed.map(|v| v.to_string())),
        ("m-samples", args.m_samples.map(|v| v.to_string())),
        ("dt", args.dt.map(|v| v.to_string())),
        ("epsilon", args.epsilon.map(|v| v.to_string())),
        ("padding", args.padding.map(|v| v.to_string())),
        ("u0", args.u0.map(path_str)),
        ("t", args.t.map(|v| v.to_string())),
        ("method", args.method),
    ];
    for (key, value) in flags {
        if let Some(value) = value {
            cfg.set(key, value);
        }
    }
    cfg.validate_keys(command)?;
    Ok(cfg)
}

fn load_profile(cfg: &Config) -> Result<CoefficientProfile, Failure> {
    let path = cfg
        .path("profile")
        .ok_or_else(|| Failure::Input("missing required key `profile`".into()))?;
    let file = File::open(&path).map_err(|e| Failure::Input(format!("cannot open {}: {e}", path.display())))?;
    CoefficientProfile::read_csv(file).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn load_packet(path: &Path) -> Result<WavePacket, Failure> {
    let file = File::open(path).map_err(|e| Failure::Input(format!("cannot open {}: {e}", path.display())))?;
    WavePacket::read_csv(file).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn out_dir(cfg: &Config) -> Result<PathBuf, Failure> {
    let dir = cfg.path("out").unwrap_or_else(|| PathBuf::from("jacobi-out"));
    fs::create_dir_all(&dir).map_err(|e| Failure::Input(format!("cannot create {}: {e}", dir.display())))?;
    Ok(dir)
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>, Failure> {
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

fn nonnegative_padding(cfg: &Config, default: i64) -> Result<i64, Failure> {
    let padding: i64 = cfg.get_or("padding", default)?;
    if padding < 0 {
        return Err(Failure::Input(format!("`padding` must be nonnegative, got {padding}")));
    }
    Ok(padding)
}

fn finish(dir: &Path, summary: &str) -> Result<(), Failure> {
    fs::write(dir.join("summary.txt"), summary)?;
    print!("{summary}");
    Ok(())
}

fn cmd_jost(cfg: &Config) -> Outcome {
    let profile = load_profile(cfg)?;
    let padding = nonnegative_padding(cfg, 4)?;
    let m_samples: usize = cfg.get_or("m-samples", 512)?;
    let j_max: usize = cfg.get_or("j-max", DEFAULT_J_MAX)?;
    let window = GridWindow::around(&profile, padding);
    let dir = out_dir(cfg)?;

    let mut values = csv_writer(create(&dir, "jost_values.csv")?);
    values.write_record(["side", "theta_re", "theta_im", "n", "re", "im", "residual"]).map_err(csv_err)?;
    for side in [Side::Plus, Side::Minus] {
        for theta in rotated_circle_grid(16) {
            let sol = compute_jost(&profile, theta, side, window)?;
            for (n, v) in sol.values.iter() {
                values
                    .write_record([
                        side.label().to_string(),
                        format!("{:.17e}", theta.re),
                        format!("{:.17e}", theta.im),
                        n.to_string(),
                        format!("{:.17e}", v.re),
                        format!("{:.17e}", v.im),
                        format!("{:.3e}", sol.residual),
                    ])
                    .map_err(csv_err)?;
            }
        }
    }
    values.flush()?;

    let mut passed = true;
    let mut summary = String::new();
    let mut table = csv_writer(create(&dir, "kbound.csv")?);
    table
        .write_record(["side", "checked", "max_ratio", "max_ratio_without_offset", "violations", "passed"])
        .map_err(csv_err)?;
    for side in [Side::Plus, Side::Minus] {
        let expansion = jost_expansion_extract(&profile, side, window, m_samples, j_max)?;
        expansion.write_csv(create(&dir, &format!("expansion_{}.csv", side_name(side)))?)?;
        let report = verify_k_bounds(&expansion, &decay_bounds(&profile, side, window, j_max))?;
        table
            .write_record([
                side.label().to_string(),
                report.checked.to_string(),
                format!("{:.6e}", report.max_ratio),
                format!("{:.6e}", report.max_ratio_without_offset),
                report.violations.len().to_string(),
                report.passed.to_string(),
            ])
            .map_err(csv_err)?;
        let _ = writeln!(
            summary,
            "{} side: {} coefficients, max ratio {:.6e}, {} over the bound{}",
            side.label(),
            report.checked,
            report.max_ratio,
            report.violations.len(),
            if expansion.aliasing_warning { " (aliasing warning)" } else { "" }
        );
        passed &= report.passed;
    }
    table.flush()?;
    let _ = writeln!(summary, "coefficient bound: {}", if passed { "holds" } else { "violated" });
    finish(&dir, &summary)?;
    Ok(passed)
}

fn side_name(side: Side) -> &'static str {
    match side {
        Side::Plus => "plus",
        Side::Minus => "minus",
    }
}

fn csv_writer<W: std::io::Write>(w: W) -> csv::Writer<W> {
    csv::Writer::from_writer(w)
}

fn csv_err(e: csv::Error) -> Failure {
    Failure::Input(e.to_string())
}

fn cmd_scatter(cfg: &Config) -> Outcome {
    let profile = load_profile(cfg)?;
    let padding = nonnegative_padding(cfg, 10)?;
    let m_samples: usize = cfg.get_or("m-samples", 512)?;
    let window = GridWindow::around(&profile, padding);
    let dir = out_dir(cfg)?;

    let data = ScatteringData::compute(&profile, m_samples, window)?;
    data.write_csv(create(&dir, "scattering.csv")?)?;
    data.eigen.write_csv(create(&dir, "eigenvalues.csv")?)?;
    let relation = scattering_relation_residual(&profile, &data.theta_grid, window)?;
    let unitarity = data
        .theta_grid
        .iter()
        .map(|&t| unitarity_defect_at(&profile, t).map(f64::abs))
        .collect::<jacobi_core::Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    let passed = relation <= IDENTITY_TOLERANCE && unitarity <= IDENTITY_TOLERANCE;

    let mut summary = String::new();
    let _ = writeln!(summary, "grid points: {m_samples}, window [{}, {}]", window.n_lo(), window.n_hi());
    let _ = writeln!(summary, "scattering relation residual: {relation:.3e}");
    let _ = writeln!(summary, "unitarity defect: {unitarity:.3e}");
    let _ = writeln!(summary, "Wronskian drift: {:.3e}", data.wronskian_drift);
    let _ = writeln!(summary, "bound states: {}", data.eigen.len());
    let _ = writeln!(summary, "identities: {}", if passed { "hold" } else { "violated" });
    finish(&dir, &summary)?;
    Ok(passed)
}

fn cmd_spectrum(cfg: &Config) -> Outcome {
    let profile = load_profile(cfg)?;
    let padding = nonnegative_padding(cfg, 40)?;
    let m_samples: usize = cfg.get_or("m-samples", 2048)?;
    let window = GridWindow::around(&profile, padding);
    let dir = out_dir(cfg)?;

    let eigen = find_eigenvalues(&profile, window)?;
    eigen.write_csv(create(&dir, "eigenvalues.csv")?)?;
    let basis = SpectralBasis::new(&profile, window, adequate_samples(&profile, window, m_samples)?)?;
    let measure = basis.measure();
    let mut w = csv_writer(create(&dir, "measure.csv")?);
    w.write_record(["theta_re", "theta_im", "weight"]).map_err(csv_err)?;
    for (t, weight) in measure.theta_grid.iter().zip(&measure.ac_weight) {
        w.write_record([t.re, t.im, *weight].map(|v| format!("{v:.17e}"))).map_err(csv_err)?;
    }
    w.flush()?;

    let probe = ComplexSequence::delta(window, 0);
    let parseval = basis.parseval_residual(&probe, BoundStateMode::Include)?;
    let passed = parseval <= IDENTITY_TOLERANCE;
    let mut summary = String::new();
    let _ = writeln!(summary, "bound states: {} (winding count {})", eigen.len(), eigen.winding_count);
    for k in 0..eigen.len() {
        let _ = writeln!(
            summary,
            "  theta = {:.12}, lambda = {:.12}, gamma = {:.12}",
            eigen.thetas[k], eigen.lambdas[k], eigen.gammas[k]
        );
    }
    let _ = writeln!(summary, "circle samples: {}", basis.m_samples());
    let _ = writeln!(summary, "Parseval residual for delta_0: {parseval:.3e}");
    finish(&dir, &summary)?;
    Ok(passed)
}

fn evolution_config(cfg: &Config) -> Result<EvolutionConfig, Failure> {
    let defaults = EvolutionConfig::default();
    let method = match cfg.get_or::<String>("method", "spectral".into())?.as_str() {
        "spectral" | "taylor" => Method::Spectral,
        "direct" => Method::Direct,
        other => return Err(Failure::Input(format!("unknown method `{other}`"))),
    };
    let padding = match cfg.get::<i64>("padding")? {
        Some(p) if p < 0 => return Err(Failure::Input(format!("`padding` must be nonnegative, got {p}"))),
        p => p,
    };
    Ok(EvolutionConfig {
        method,
        time_step: cfg.positive("dt", defaults.time_step)?,
        circle_samples: cfg.get_or("m-samples", defaults.circle_samples)?,
        padding,
        ..defaults
    })
}

fn cmd_evolve(cfg: &Config) -> Outcome {
    let profile = load_profile(cfg)?;
    let input = cfg
        .path("u0")
        .ok_or_else(|| Failure::Input("missing required key `u0`".into()))?;
    let u0 = load_packet(&input)?;
    let t: f64 = cfg.require("t")?;
    if !t.is_finite() {
        return Err(Failure::Input(format!("`t` must be finite, got {t}")));
    }
    let evo = evolution_config(cfg)?;
    let taylor = cfg.get::<String>("method")?.as_deref() == Some("taylor");
    let dir = out_dir(cfg)?;
    let target = dir.join("evolved.csv");

    if t == 0.0 {
        fs::copy(&input, &target)?;
        println!("t = 0: input copied unchanged");
        return Ok(true);
    }
    let u1 = if taylor {
        evolve_taylor(&profile, &u0, t)?
    } else {
        evolve(&profile, &u0, t, &evo)?
    };
    u1.write_csv(BufWriter::new(File::create(&target)?))?;
    let drift = (u1.norm() - u0.norm()).abs() / u0.norm().max(f64::MIN_POSITIVE);
    println!("evolved to t = {}; relative norm drift {drift:.3e}", u1.time);
    Ok(true)
}

fn cmd_uncertainty(cfg: &Config) -> Outcome {
    let profile = load_profile(cfg)?;
    let defaults = EnvelopeSpec::default();
    let envelope = EnvelopeSpec::new(
        cfg.positive("epsilon", defaults.epsilon)?,
        cfg.positive("constant", defaults.constant)?,
        cfg.positive("time-gap", defaults.time_gap)?,
    )?;
    let base = ExperimentConfig::default();
    let window = GridWindow::new(
        cfg.get_or("window-lo", base.window.n_lo())?,
        cfg.get_or("window-hi", base.window.n_hi())?,
    )?;
    let initial = match (cfg.path("u0"), cfg.get::<u64>("seed")?) {
        (Some(_), Some(_)) => return Err(Failure::Input("`u0` and `seed` are mutually exclusive".into())),
        (Some(path), None) => InitialData::Given(load_packet(&path)?),
        (None, Some(seed)) => InitialData::Random { seed },
        (None, None) => InitialData::Envelope,
    };
    let experiment = ExperimentConfig {
        envelope,
        window,
        initial,
        evolution: evolution_config(cfg)?,
        ..base
    };
    let dir = out_dir(cfg)?;
    let report = run_uncertainty_experiment(&profile, &experiment, Some(&dir))?;
    print!("{}", report.summary());
    Ok(report.verdict != ExperimentVerdict::SatisfiedAtBothTimes)
}

fn cmd_continuation(cfg: &Config) -> Outcome {
    let profile = load_profile(cfg)?;
    let u0 = match cfg.path("u0") {
        Some(path) => load_packet(&path)?,
        None => {
            let window = GridWindow::symmetric(nonnegative_padding(cfg, 40)?.max(1))?;
            WavePacket::new(0.0, ComplexSequence::delta(window, 0))
        }
    };
    let dt = cfg.positive("dt", 0.01)?;
    let samples: usize = cfg.get_or("samples", 85)?;
    let n0: i64 = cfg.get_or("n0", 0)?;
    let tolerance: Option<f64> = match cfg.get::<String>("tolerance")?.as_deref() {
        None | Some("auto") => None,
        Some(v) => Some(
            v.parse()
                .map_err(|e| Failure::Input(format!("bad value `{v}` for `tolerance`: {e}")))?,
        ),
    };
    let perturb_site: Option<i64> = cfg.get("perturb-site")?;
    let perturb_size: f64 = cfg.get_or("perturb-size", 1e-3)?;
    let window = u0.values.window()?;
    for n in [Some(n0), Some(n0 + 1), perturb_site].into_iter().flatten() {
        if !window.contains(n) {
            return Err(Error::OutOfWindow {
                index: n,
                lo: window.n_lo(),
                hi: window.n_hi(),
            }
            .into());
        }
    }
    let spectral_cfg = EvolutionConfig {
        circle_samples: cfg.get_or("m-samples", EvolutionConfig::default().circle_samples)?,
        ..Default::default()
    };
    let direct_cfg = EvolutionConfig {
        method: Method::Direct,
        ..spectral_cfg
    };
    let dir = out_dir(cfg)?;

    let u = SolutionTrace::sample(&profile, &u0, samples, dt, &spectral_cfg)?;
    let mut v = SolutionTrace::sample(&profile, &u0, samples, dt, &direct_cfg)?;
    if let Some(site) = perturb_site {
        let k = (site - window.n_lo()) as usize;
        let shifted = v
            .snapshots()
            .iter()
            .map(|p| {
                let mut q = p.clone();
                q.values.values_mut()[k] += Complex64::new(perturb_size, 0.0);
                q
            })
            .collect();
        v = SolutionTrace::new(shifted)?;
    }
    let tol = match tolerance {
        Some(tol) => tol,
        None => {
            let diff = u.difference(&v)?;
            [n0, n0 + 1]
                .iter()
                .map(|&n| diff.site(n).map(|s| s.iter().map(|z| z.norm()).fold(0.0, f64::max)))
                .collect::<jacobi_core::Result<Vec<_>>>()?
                .into_iter()
                .fold(0.0, f64::max)
        }
    };
    let report = continuation_check(&profile, &u, &v, n0, tol)?;
    report.write_csv(create(&dir, "continuation.csv")?)?;
    let mut summary = String::new();
    let _ = writeln!(summary, "seed sites {n0}, {}; tolerance {tol:.3e}; growth factor {:.3e}", n0 + 1, report.growth_factor);
    let _ = writeln!(summary, "verdict: {}", report.verdict.describe());
    finish(&dir, &summary)?;
    Ok(!matches!(report.verdict, ContinuationVerdict::Disagree { .. }))
}

fn cmd_selfcheck(args: &SelfcheckArgs) -> Outcome {
    let options = SelfCheckOptions {
        inject_fault: args.inject_fault,
    };
    for id in &args.only {
        if !CRITERIA.iter().any(|c| c.0 == *id) {
            return Err(Failure::Input(format!("unknown check {id}")));
        }
    }
    let mut passed = true;
    for (id, _, _) in CRITERIA.iter().copied() {
        if !args.only.is_empty() && !args.only.contains(&id) {
            continue;
        }
        let result = selfcheck::run_criterion(id, options);
        println!("{}", result.line());
        passed &= result.passed;
    }
    Ok(passed)
}
