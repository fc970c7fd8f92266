//! Command-line front end. Every command prints (or writes) a JSON report
//! `{command, params, results, checks, provenance}` or a CSV table.
//!
//! Exit codes: 0 when every check passes, 1 on a failed check or numerical
//! failure (a diagnostic JSON is still emitted), 2 on invalid flags or config.

pub mod config;
pub mod report;
mod verify;

use std::ffi::OsString;
use std::path::PathBuf;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::geometry::{ProjectivePoint, TestForm};
use crate::kernels::{
    decay_ladder, decay_margin, expansion_residual, normalized_kernel, szego_magnitude, szego_magnitude_basis,
    SectionNorms,
};
use crate::montecarlo::{mc_number_variance, mc_variance};
use crate::specfun::riemann_zeta;
use crate::variance::{
    asymptotic_coefficients, asymptotic_variance, coefficient_integrals, exact_variance, fit_expansion,
    zonal_variance_oracle, Route, RouteParams, VarianceResult,
};

pub use config::{Command, Format, RunConfig, Suite};
pub use report::{Check, CsvRow, Provenance, Report};

#[derive(Debug, Parser)]
#[command(name = "zerovar", version, about = "Variance of linear statistics of random zeros on the Riemann sphere")]
pub struct Cli {
    #[command(subcommand)]
    pub command: CliCommand,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Subcommand)]
pub enum CliCommand {
    /// Compare kernel routes, decay margins and expansion residuals.
    KernelProbe,
    /// Bipotential double-integral variance.
    VarianceExact,
    /// Monte Carlo variance from sampled zero sets.
    VarianceMc,
    /// Monte Carlo number variance in a geodesic disk.
    NumberMc,
    /// Two-term asymptotic coefficients and values.
    Asymptotics,
    /// Fit k·Var ≈ A0 + A1/k to exact variances over the k list.
    Fit,
    /// Run the built-in verification suites.
    Verify {
        #[arg(long, value_enum)]
        suite: Option<Suite>,
    },
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Degrees, comma separated.
    #[arg(long, global = true, value_delimiter = ',')]
    pub k: Option<Vec<u32>>,
    #[arg(long, global = true)]
    pub testform: Option<String>,
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub outer_nodes: Option<usize>,
    #[arg(long, global = true)]
    pub inner_nodes: Option<usize>,
    #[arg(long, global = true)]
    pub cutoff_b: Option<f64>,
    /// Disk radius (geodesic) for number-mc.
    #[arg(long, global = true)]
    pub radius: Option<f64>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// File of `key = value` lines; explicit flags override it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

impl Cli {
    /// Defaults, then the config file, then flags.
    pub fn to_config(&self) -> Result<RunConfig> {
        let (command, suite) = match &self.command {
            CliCommand::KernelProbe => (Command::KernelProbe, None),
            CliCommand::VarianceExact => (Command::VarianceExact, None),
            CliCommand::VarianceMc => (Command::VarianceMc, None),
            CliCommand::NumberMc => (Command::NumberMc, None),
            CliCommand::Asymptotics => (Command::Asymptotics, None),
            CliCommand::Fit => (Command::Fit, None),
            CliCommand::Verify { suite } => (Command::Verify, *suite),
        };
        let mut cfg = RunConfig::defaults(command);
        if command == Command::Fit {
            cfg.k_list = vec![50, 100, 200, 400];
        }
        if let Some(path) = &self.common.config {
            cfg.apply_file(path)?;
        }
        let c = &self.common;
        if let Some(k) = &c.k {
            cfg.k_list = k.clone();
        }
        if let Some(t) = &c.testform {
            cfg.testform = t.clone();
        }
        if let Some(n) = c.samples {
            cfg.n_samples = n;
        }
        if let Some(s) = c.seed {
            cfg.seed = s;
        }
        if let Some(n) = c.outer_nodes {
            cfg.quadrature.outer_nodes = n;
        }
        if let Some(n) = c.inner_nodes {
            cfg.quadrature.inner_radial = n;
        }
        if let Some(b) = c.cutoff_b {
            cfg.quadrature.cutoff_b = b;
        }
        if let Some(r) = c.radius {
            cfg.radius = r;
        }
        if let Some(o) = &c.out {
            cfg.output_path = Some(o.clone());
        }
        if let Some(f) = c.format {
            cfg.format = f;
        }
        if let Some(s) = suite {
            cfg.suite = s;
        }
        cfg.validate()?;
        if command == Command::Fit {
            let mut distinct = cfg.k_list.clone();
            distinct.sort_unstable();
            distinct.dedup();
            if distinct.len() < 2 {
                return Err(Error::Config("fit needs at least 2 distinct k".into()));
            }
        }
        if command == Command::Verify && cfg.format == Format::Csv {
            return Err(Error::Config("verify reports are JSON only".into()));
        }
        Ok(cfg)
    }
}

/// Runs one configured command.
pub fn run(cfg: &RunConfig) -> Result<Report> {
    let start = Instant::now();
    let mut out = Outcome::default();
    match cfg.command {
        Command::KernelProbe => kernel_probe(cfg, &mut out)?,
        Command::VarianceExact => variance_exact(cfg, &mut out)?,
        Command::VarianceMc => variance_mc(cfg, &mut out)?,
        Command::NumberMc => number_mc(cfg, &mut out)?,
        Command::Asymptotics => asymptotics(cfg, &mut out)?,
        Command::Fit => fit(cfg, &mut out)?,
        Command::Verify => verify::run_suite(cfg.suite, &mut out.checks)?,
    }
    Ok(Report {
        command: cfg.command.to_string(),
        params: cfg.clone(),
        results: out.results,
        checks: out.checks,
        provenance: provenance(cfg, start),
        csv_rows: out.csv_rows,
        k_var_table: out.k_var_table,
    })
}

#[derive(Default)]
struct Outcome {
    results: Vec<Value>,
    checks: Vec<Check>,
    csv_rows: Vec<CsvRow>,
    k_var_table: Vec<(u32, f64)>,
}

fn provenance(cfg: &RunConfig, start: Instant) -> Provenance {
    Provenance {
        tool: "zerovar".into(),
        version: crate::VERSION.into(),
        seed: cfg.seed,
        quadrature: cfg.quadrature,
        wall_clock_seconds: start.elapsed().as_secs_f64(),
        timestamp_unix: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
    }
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("result types serialize")
}

/// Deterministic, roughly uniform points on the sphere (golden-angle spiral
/// in the height coordinate `x ∈ (-1, 1)`).
fn spiral_points(n: usize) -> Vec<ProjectivePoint> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|i| {
            let x = 1.0 - (2.0 * i as f64 + 1.0) / n as f64;
            // x = |h1|² - |h0|² on the unit sphere of C²
            let (h0, h1) = (((1.0 - x) / 2.0).sqrt(), ((1.0 + x) / 2.0).sqrt());
            let phase = num_complex::Complex64::from_polar(1.0, golden * i as f64);
            ProjectivePoint::new(phase * h0, num_complex::Complex64::new(h1, 0.0)).expect("unit vector")
        })
        .collect()
}

const PROBE_DISTANCES: [f64; 6] = [0.0, 0.05, 0.2, 0.5, 1.0, 1.4];

fn kernel_probe(cfg: &RunConfig, out: &mut Outcome) -> Result<()> {
    let centres = spiral_points(8);
    for &k in &cfg.k_list {
        let closed = SectionNorms::closed_form(k)?;
        let quad = SectionNorms::by_quadrature(k)?;
        let norm_gap = closed
            .log_norms
            .iter()
            .zip(&quad.log_norms)
            .map(|(a, b)| (a - b).abs() / (1.0 + a.abs()))
            .fold(0.0, f64::max);
        let mut route_gap: f64 = 0.0;
        let mut diag_gap: f64 = 0.0;
        for (i, p) in centres.iter().enumerate() {
            diag_gap = diag_gap.max((normalized_kernel(p, p, k) - 1.0).abs());
            for &d in &PROBE_DISTANCES {
                let q = p.geodesic_offset(d, 0.7 * i as f64);
                let a = szego_magnitude(p, &q, k)?.log_magnitude;
                let b = szego_magnitude_basis(p, &q, &closed)?.log_magnitude;
                route_gap = route_gap.max((a - b).abs() / (1.0 + a.abs()));
            }
        }
        let decay = if k >= 2 { Some(decay_margin(k, 1.0)?) } else { None };
        let residual = if k >= 2 {
            Some(expansion_residual(num_complex::Complex64::new(1.0, 0.0), k)?)
        } else {
            None
        };
        out.results.push(json!({
            "k": k,
            "route_relative_gap": route_gap,
            "norms_relative_gap": norm_gap,
            "diagonal_gap": diag_gap,
            "decay_p1": decay.map(|d| to_value(&d)),
            "expansion_residual_u1": residual,
        }));
        out.checks.push(Check::absolute(format!("kernel routes agree (k={k})"), 0.0, route_gap, 1e-10, "closed form"));
        out.checks.push(Check::absolute(format!("section norms agree (k={k})"), 0.0, norm_gap, 1e-12, "closed form"));
        out.checks.push(Check::absolute(format!("P_k(p,p) = 1 (k={k})"), 0.0, diag_gap, 1e-12, "closed form"));
        out.csv_rows.push(CsvRow {
            k,
            route: "kernel".into(),
            value: route_gap,
            error_estimate: norm_gap,
            seed: None,
        });
    }
    let ladder_ks: Vec<u32> = cfg.k_list.iter().copied().filter(|&k| k >= 2).collect();
    if ladder_ks.len() >= 2 {
        let ladder = decay_ladder(&ladder_ks, 1.0)?;
        out.checks.push(Check::holds("decay ratio bounded in k (p=1)", ladder.pass, "asymptotic theory"));
        out.results.push(json!({ "decay_ladder_p1": to_value(&ladder) }));
    }
    Ok(())
}

/// Relative agreement demanded between the exact route and the zonal series.
const ORACLE_REL_TOL: f64 = 1e-6;

fn variance_exact(cfg: &RunConfig, out: &mut Outcome) -> Result<()> {
    let tf = TestForm::by_name(&cfg.testform)?;
    for &k in &cfg.k_list {
        let r = exact_variance(&tf, k, &cfg.quadrature)?;
        if let Ok(oracle) = zonal_variance_oracle(&tf, k) {
            out.checks.push(Check::relative(
                format!("exact variance vs zonal series (k={k})"),
                oracle,
                r.value,
                ORACLE_REL_TOL,
                "independent oracle",
            ));
        }
        let asym = asymptotic_variance(&tf, k)?;
        out.csv_rows.push(CsvRow::from(&r));
        out.results.push(json!({
            "variance": to_value(&r),
            "k_var": k as f64 * r.value,
            "asymptotic_value": asym.value,
        }));
    }
    Ok(())
}

/// Agreement window for Monte Carlo estimates, in standard errors.
const MC_SIGMAS: f64 = 4.0;

fn variance_mc(cfg: &RunConfig, out: &mut Outcome) -> Result<()> {
    let tf = TestForm::by_name(&cfg.testform)?;
    for &k in &cfg.k_list {
        let est = mc_variance(k, &tf, cfg.n_samples, cfg.seed)?;
        let reference = exact_variance(&tf, k, &cfg.quadrature)?;
        out.checks.push(Check::absolute(
            format!("MC variance vs exact route (k={k})"),
            reference.value,
            est.variance,
            MC_SIGMAS * est.stderr_variance,
            "exact route",
        ));
        let r = VarianceResult {
            value: est.variance,
            route: Route::Mc,
            k,
            testform: tf.name().to_string(),
            error_estimate: est.stderr_variance,
            params: RouteParams::Sampling {
                seed: cfg.seed,
                n_samples: cfg.n_samples,
            },
            flagged_negative: false,
            far_field_bound: None,
        };
        out.csv_rows.push(CsvRow::from(&r));
        out.results.push(json!({
            "variance": to_value(&r),
            "estimate": to_value(&est),
            "exact_value": reference.value,
        }));
    }
    Ok(())
}

/// Band around the leading-order number variance.
const NUMBER_RATIO_TOL: f64 = 0.15;

fn number_mc(cfg: &RunConfig, out: &mut Outcome) -> Result<()> {
    for &k in &cfg.k_list {
        let nv = mc_number_variance(k, cfg.radius, cfg.n_samples, cfg.seed)?;
        out.checks.push(Check::absolute(
            format!("mean zero count (k={k})"),
            nv.theory_mean,
            nv.estimate.mean,
            MC_SIGMAS * nv.estimate.stderr_mean,
            "closed form",
        ));
        out.checks.push(Check::absolute(
            format!("number variance vs leading order (k={k})"),
            1.0,
            nv.ratio,
            NUMBER_RATIO_TOL,
            "asymptotic theory",
        ));
        out.csv_rows.push(CsvRow {
            k,
            route: "mc".into(),
            value: nv.estimate.variance,
            error_estimate: nv.estimate.stderr_variance,
            seed: Some(cfg.seed),
        });
        out.results.push(to_value(&nv));
    }
    Ok(())
}

fn psi1_coefficients() -> Result<(f64, f64)> {
    Ok((4.0 * riemann_zeta(3.0)? / 3.0, -4.0 * riemann_zeta(4.0)?))
}

fn asymptotics(cfg: &RunConfig, out: &mut Outcome) -> Result<()> {
    let tf = TestForm::by_name(&cfg.testform)?;
    let coeffs = asymptotic_coefficients(1, &coefficient_integrals(&tf)?)?;
    if tf.name() == "psi1" {
        let (a0, a1) = psi1_coefficients()?;
        out.checks.push(Check::relative("A0 = 4ζ(3)/3", a0, coeffs.a0, 1e-8, "closed form"));
        out.checks.push(Check::relative("A1 = -4ζ(4)", a1, coeffs.a1, 1e-8, "closed form"));
    }
    out.results.push(json!({ "coefficients": to_value(&coeffs) }));
    for &k in &cfg.k_list {
        let r = asymptotic_variance(&tf, k)?;
        out.csv_rows.push(CsvRow::from(&r));
        out.results.push(json!({ "variance": to_value(&r) }));
    }
    Ok(())
}

/// Tolerances for the fitted coefficients against the predicted ones.
const FIT_A0_TOL: f64 = 0.01;
const FIT_A1_TOL: f64 = 0.15;

fn fit(cfg: &RunConfig, out: &mut Outcome) -> Result<()> {
    let tf = TestForm::by_name(&cfg.testform)?;
    let mut data = Vec::with_capacity(cfg.k_list.len());
    for &k in &cfg.k_list {
        let r = exact_variance(&tf, k, &cfg.quadrature)?;
        data.push((k as f64, r.value));
        out.k_var_table.push((k, k as f64 * r.value));
        out.csv_rows.push(CsvRow::from(&r));
        out.results.push(json!({ "variance": to_value(&r), "k_var": k as f64 * r.value }));
    }
    let fitted = fit_expansion(&data)?;
    let predicted = asymptotic_coefficients(1, &coefficient_integrals(&tf)?)?;
    out.checks.push(Check::relative("fitted A0", predicted.a0, fitted.a0_hat, FIT_A0_TOL, "asymptotic theory"));
    out.checks.push(Check::relative("fitted A1", predicted.a1, fitted.a1_hat, FIT_A1_TOL, "asymptotic theory"));
    out.results.push(json!({ "fit": to_value(&fitted), "predicted": to_value(&predicted) }));
    Ok(())
}

/// Companion file for the `(k, k·Var)` table: `<stem>_kvar.csv` next to `out`.
pub fn k_var_path(out: &std::path::Path) -> PathBuf {
    let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("report");
    out.with_file_name(format!("{stem}_kvar.csv"))
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::Domain { .. } => "domain",
        Error::Numerical { .. } => "numerical",
        Error::Unsupported { .. } => "unsupported",
        Error::Rejection { .. } => "rejection",
        Error::Config(_) => "config",
    }
}

fn emit(cfg: &RunConfig, body: &str) -> std::io::Result<()> {
    match &cfg.output_path {
        Some(path) => std::fs::write(path, body),
        None => {
            use std::io::Write as _;
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(body.as_bytes())?;
            if !body.ends_with('\n') {
                stdout.write_all(b"\n")?;
            }
            stdout.flush()
        }
    }
}

/// Parses `args`, runs, writes output and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let cfg = match cli.to_config() {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    match run(&cfg) {
        Ok(report) => {
            let body = match cfg.format {
                Format::Json => report.to_json(),
                Format::Csv => report.to_csv(),
            };
            let mut written = emit(&cfg, &body);
            if let (Some(path), false) = (&cfg.output_path, report.k_var_table.is_empty()) {
                written = written.and(std::fs::write(k_var_path(path), report.k_var_csv()));
            }
            if let Err(e) = written {
                eprintln!("error: cannot write output: {e}");
                return 1;
            }
            for c in report.checks.iter().filter(|c| !c.pass) {
                eprintln!("FAIL {}: expected {:e}, got {:e}, tol {:e}", c.name, c.expected, c.got, c.tol);
            }
            if report.all_pass() {
                0
            } else {
                1
            }
        }
        Err(Error::Config(msg)) => {
            eprintln!("error: {msg}");
            2
        }
        Err(e) => {
            let diag = json!({
                "command": cfg.command.to_string(),
                "params": to_value(&cfg),
                "error": { "kind": error_kind(&e), "message": e.to_string() },
                "provenance": { "tool": "zerovar", "version": crate::VERSION, "seed": cfg.seed },
            });
            let _ = emit(&cfg, &serde_json::to_string_pretty(&diag).expect("diagnostic serializes"));
            eprintln!("error: {e}");
            1
        }
    }
}
