//! `bolab` command line: one subcommand per experiment plus `report`.
//!
//! Exit codes: 0 on success, 2 for usage or validation errors, 1 for runtime
//! failures (including failed checks under `--strict`).

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use bolab_core::experiments::ExperimentReport;
use bolab_core::harness::{self, Experiment, RunConfig, OUTPUT_DIR_ENV};
use bolab_core::Error;
use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "bolab", version, about = "Seeded Monte Carlo and lattice experiments for the truncated Benjamin-Ono flow")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Draw a Gaussian ensemble and write it as CSV.
    Sample(Params),
    /// Evolve samples under the truncated flow and measure conservation.
    Evolve(Params),
    /// Ensemble means of the energies.
    Energy(Params),
    /// Monte Carlo norms of the modified-energy time derivatives.
    DerivativeMc(Params),
    /// L2(omega) norm of a multilinear form, optionally swept over N or eps.
    Lattice(Params),
    /// Collapse a cancellation set and report the residual coefficient.
    CancelCheck(Params),
    /// Transport functional |I_0 - I_t| / t for one cell or the sweep.
    Transport(Params),
    /// Flow convergence against a high-resolution reference.
    Converge(Params),
    /// Smoothed versus sharp density differences over N.
    DensityDiff(Params),
    /// Measure of a ball before and after the reference flow.
    Monotonicity(Params),
    /// Re-render tables, CSV and SVG from a JSON report.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
struct ReportArgs {
    /// JSON report written by an earlier run.
    path: PathBuf,
    #[arg(long, env = OUTPUT_DIR_ENV)]
    output_dir: Option<PathBuf>,
}

/// Overrides applied on top of `--config` (or the defaults).
#[derive(Debug, Args, Default)]
struct Params {
    /// Flat `key = value` config file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, env = OUTPUT_DIR_ENV)]
    output_dir: Option<String>,
    /// Worker threads; defaults to all cores.
    #[arg(long)]
    threads: Option<usize>,
    /// Exit 1 when any check in the report fails.
    #[arg(long)]
    strict: bool,
    /// Same as `--strict`.
    #[arg(long)]
    check_conservation: bool,
    /// Force exact enumeration.
    #[arg(long, conflicts_with = "mc")]
    exact: bool,
    /// Force Monte Carlo evaluation.
    #[arg(long)]
    mc: bool,
    #[arg(long = "N")]
    n: Option<String>,
    #[arg(long = "N-grid")]
    n_grid: Option<String>,
    #[arg(long)]
    k: Option<String>,
    #[arg(long)]
    eps: Option<String>,
    #[arg(long = "R")]
    r: Option<String>,
    #[arg(long)]
    sigma: Option<String>,
    #[arg(long)]
    sigma_prime: Option<String>,
    #[arg(long)]
    t: Option<String>,
    #[arg(long)]
    dt: Option<String>,
    #[arg(long)]
    max_phase_step: Option<String>,
    #[arg(long)]
    samples: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    rho: Option<String>,
    #[arg(long = "N-ref")]
    n_ref: Option<String>,
    /// Comma separated.
    #[arg(long = "N-list")]
    n_list: Option<String>,
    /// Comma separated.
    #[arg(long)]
    eps_list: Option<String>,
    #[arg(long)]
    form: Option<String>,
    /// Cancellation set: e1-flat, e1-split, g-flat or g-split.
    #[arg(long)]
    set: Option<String>,
    #[arg(long)]
    method: Option<String>,
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    h: Option<String>,
}

impl Params {
    fn overrides(&self) -> Vec<(&'static str, &str)> {
        let pairs: [(&'static str, &Option<String>); 22] = [
            ("N", &self.n),
            ("N_grid", &self.n_grid),
            ("k", &self.k),
            ("eps", &self.eps),
            ("R", &self.r),
            ("sigma", &self.sigma),
            ("sigma_prime", &self.sigma_prime),
            ("t", &self.t),
            ("dt", &self.dt),
            ("max_phase_step", &self.max_phase_step),
            ("samples", &self.samples),
            ("seed", &self.seed),
            ("rho", &self.rho),
            ("N_ref", &self.n_ref),
            ("N_list", &self.n_list),
            ("eps_list", &self.eps_list),
            ("form", &self.form),
            ("set", &self.set),
            ("method", &self.method),
            ("model", &self.model),
            ("h", &self.h),
            ("output_dir", &self.output_dir),
        ];
        pairs.into_iter().filter_map(|(k, v)| v.as_deref().map(|v| (k, v))).collect()
    }

    fn build(&self, experiment: Experiment) -> bolab_core::Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => {
                let cfg = harness::load_config(path)?;
                if cfg.experiment != experiment {
                    return Err(Error::invalid(
                        "experiment",
                        format!("config is for `{}`, not `{}`", cfg.experiment.name(), experiment.name()),
                    ));
                }
                cfg
            }
            None => RunConfig::new(experiment),
        };
        for (k, v) in self.overrides() {
            cfg.set_key(k, v)?;
        }
        if self.exact {
            cfg.set_key("method", "exact")?;
        }
        if self.mc {
            cfg.set_key("method", "mc")?;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn fmt_value(v: f64, se: f64) -> String {
    if se > 0.0 {
        format!("{v:.6e} +- {se:.2e}")
    } else {
        format!("{v:.6e}")
    }
}

fn print_report(out: &mut impl Write, r: &ExperimentReport) -> std::io::Result<()> {
    writeln!(out, "{} ({:.2} s)", r.name, r.wall_clock_s)?;
    for s in &r.scalars {
        writeln!(out, "  {} = {} [{}]", s.name, fmt_value(s.value, s.se), s.method)?;
    }
    for f in &r.fits {
        writeln!(
            out,
            "  fit {}: C = {:.4e}, envelope C = {:.4e}, max residual {:.1}%",
            f.model.name(),
            f.c,
            f.c_env,
            100.0 * f.max_residual
        )?;
    }
    for c in &r.checks {
        writeln!(out, "  [{}] {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail)?;
    }
    Ok(())
}

fn with_pool<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, String> {
    match threads {
        None => Ok(f()),
        Some(0) => Err("invalid parameter `threads`: must be positive".into()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(n).build().map_err(|e| e.to_string())?;
            Ok(pool.install(f))
        }
    }
}

fn exit_for(e: &Error) -> i32 {
    if e.is_validation() {
        2
    } else {
        1
    }
}

/// Run the command line `argv` (including the program name); returns the exit code.
pub fn cli_run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            if !e.use_stderr() {
                let _ = e.print();
                return 0;
            }
            let msg = e.to_string();
            eprintln!("bolab: {}", msg.lines().next().unwrap_or("invalid arguments").trim_start_matches("error: "));
            return 2;
        }
    };
    let (experiment, params) = match cli.command {
        Command::Report(a) => return run_report(&a),
        Command::Sample(p) => (Experiment::Sample, p),
        Command::Evolve(p) => (Experiment::Evolve, p),
        Command::Energy(p) => (Experiment::Energy, p),
        Command::DerivativeMc(p) => (Experiment::DerivativeMc, p),
        Command::Lattice(p) => (Experiment::Lattice, p),
        Command::CancelCheck(p) => (Experiment::CancelCheck, p),
        Command::Transport(p) => (Experiment::Transport, p),
        Command::Converge(p) => (Experiment::Converge, p),
        Command::DensityDiff(p) => (Experiment::DensityDiff, p),
        Command::Monotonicity(p) => (Experiment::Monotonicity, p),
    };
    let cfg = match params.build(experiment) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("bolab: {e}");
            return exit_for(&e);
        }
    };
    let outcome = match with_pool(params.threads, || harness::execute(&cfg)) {
        Ok(Ok(o)) => o,
        Ok(Err(e)) => {
            eprintln!("bolab: {e}");
            return exit_for(&e);
        }
        Err(msg) => {
            eprintln!("bolab: {msg}");
            return 2;
        }
    };
    let mut out = std::io::stdout().lock();
    let _ = print_report(&mut out, &outcome.report);
    for f in &outcome.files {
        let _ = writeln!(out, "  wrote {}", f.display());
    }
    if (params.strict || params.check_conservation) && !outcome.report.passed() {
        eprintln!("bolab: {} check(s) failed", outcome.report.checks.iter().filter(|c| !c.passed).count());
        return 1;
    }
    0
}

fn run_report(a: &ReportArgs) -> i32 {
    let result = harness::read_report(&a.path).and_then(|r| {
        let dir = a.output_dir.clone().unwrap_or_else(|| a.path.parent().map(PathBuf::from).unwrap_or_default());
        let files = harness::emit_tables(&r, &dir)?;
        Ok((r, files))
    });
    match result {
        Ok((r, files)) => {
            let mut out = std::io::stdout().lock();
            let _ = print_report(&mut out, &r);
            for f in &files {
                let _ = writeln!(out, "  wrote {}", f.display());
            }
            0
        }
        Err(e) => {
            eprintln!("bolab: {e}");
            exit_for(&e)
        }
    }
}
