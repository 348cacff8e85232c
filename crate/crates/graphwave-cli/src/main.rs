//! `graphwave` command line: profile | spectrum | sweep | forms | evolve |
//! resolvent | suite. Exit codes: 0 all checks pass, 1 a check failed,
//! 2 usage or configuration error.

use clap::{Args, Parser, Subcommand};
use graphwave_cli::config::{Experiment, ExperimentConfig, Family};
use graphwave_cli::{run, run_suite, write_suite_outputs};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "graphwave",
    about = "Stationary sine-Gordon waves on a Y-junction: profiles, spectra, dynamics",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// Experiment configuration (TOML, or JSON with a .json extension).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override a config entry, e.g. --set lambda=-4 --set tolerances.zero_tol=2e-4.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Wave family when no config file is given.
    #[arg(long)]
    family: Option<String>,
    /// Coupling parameter when no config file is given.
    #[arg(long, allow_hyphen_values = true)]
    lambda: Option<f64>,
    /// Symmetry subspace: full | c1 | c2.
    #[arg(long)]
    subspace: Option<String>,
    /// Report eigenvalues below this threshold.
    #[arg(long)]
    threshold: Option<f64>,
    /// Truncation length per edge.
    #[arg(long = "L", alias = "truncation", value_name = "LENGTH")]
    truncation: Option<f64>,
    /// Grid nodes per edge.
    #[arg(long = "N", alias = "points", value_name = "NODES")]
    points: Option<i64>,
    /// Output directory (also settable via GRAPHWAVE_OUT).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a stationary profile and write it as JSON + sampled CSV.
    Profile(CommonArgs),
    /// Assemble the linearized operator and report its low spectrum.
    Spectrum(CommonArgs),
    /// Track eigenvalue branches over a lambda grid (CSV output).
    Sweep(CommonArgs),
    /// Evaluate the quadratic forms and the vertex boundary term.
    Forms(CommonArgs),
    /// Seed the growing mode and measure its rate dynamically.
    Evolve(CommonArgs),
    /// Verify the free-resolvent identity on random smooth inputs.
    Resolvent(CommonArgs),
    /// Run a named verification suite (currently: paper-tables).
    Suite {
        /// Suite name.
        name: String,
        #[command(flatten)]
        common: CommonArgs,
    },
}

fn build_config(common: &CommonArgs, experiment: Experiment) -> anyhow::Result<ExperimentConfig> {
    let mut cfg = match &common.config {
        Some(path) => ExperimentConfig::from_path(path)?,
        None => {
            let family = match common.family.as_deref() {
                Some("kink") => Family::Kink,
                Some("kink-anti-kink") | Some("antikink") => Family::KinkAntiKink,
                Some(other) => anyhow::bail!("unknown family `{other}`"),
                None => anyhow::bail!("either --config or --family/--lambda is required"),
            };
            let lambda = common
                .lambda
                .ok_or_else(|| anyhow::anyhow!("--lambda is required without a config file"))?;
            ExperimentConfig::new(family, experiment, lambda)
        }
    };
    if cfg.experiment != experiment && common.config.is_some() {
        anyhow::bail!(
            "config file declares experiment {:?} but the subcommand runs {:?}",
            cfg.experiment,
            experiment
        );
    }
    cfg.experiment = experiment;
    if let Some(lambda) = common.lambda {
        cfg.lambda = Some(lambda);
    }
    if let Some(sub) = &common.subspace {
        cfg.apply_set(&format!("subspace={sub}"))?;
    }
    if let Some(th) = common.threshold {
        cfg.apply_set(&format!("tolerances.spectrum_threshold={th}"))?;
    }
    if let Some(l) = common.truncation {
        cfg.truncation_length = l;
    }
    if let Some(n) = common.points {
        cfg.points_per_edge = n;
    }
    for assignment in &common.set {
        cfg.apply_set(assignment)?;
    }
    if let Some(out) = &common.out {
        cfg.output_dir = out.clone();
    }
    if let Ok(dir) = std::env::var("GRAPHWAVE_OUT") {
        if !dir.is_empty() {
            cfg.output_dir = PathBuf::from(dir);
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run_experiment(common: &CommonArgs, experiment: Experiment) -> anyhow::Result<bool> {
    let cfg = build_config(common, experiment)?;
    let manifest = run(&cfg)?;
    for check in &manifest.checks {
        println!(
            "{:<40} {:>14.6e}  {}",
            check.name,
            check.measured,
            if check.passed { "pass" } else { "FAIL" }
        );
    }
    println!(
        "manifest: {}",
        cfg.output_dir.join("manifest.json").display()
    );
    Ok(manifest.passed())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Profile(c) => run_experiment(c, Experiment::Profile),
        Command::Spectrum(c) => run_experiment(c, Experiment::Spectrum),
        Command::Sweep(c) => run_experiment(c, Experiment::BranchSweep),
        Command::Forms(c) => run_experiment(c, Experiment::QuadraticForms),
        Command::Evolve(c) => run_experiment(c, Experiment::Instability),
        Command::Resolvent(c) => run_experiment(c, Experiment::ResolventCheck),
        Command::Suite { name, common } => {
            if name.trim().is_empty() {
                eprintln!("error: suite name must not be empty");
                return ExitCode::from(2);
            }
            let mut l = 40.0;
            let mut n = 4001usize;
            for assignment in &common.set {
                match assignment.split_once('=') {
                    Some(("L", v)) => match v.parse() {
                        Ok(parsed) => l = parsed,
                        Err(e) => {
                            eprintln!("error: bad L override: {e}");
                            return ExitCode::from(2);
                        }
                    },
                    Some(("N", v)) => match v.parse() {
                        Ok(parsed) => n = parsed,
                        Err(e) => {
                            eprintln!("error: bad N override: {e}");
                            return ExitCode::from(2);
                        }
                    },
                    _ => {
                        eprintln!("error: suite overrides accept only --set L=.. and --set N=..");
                        return ExitCode::from(2);
                    }
                }
            }
            if let Some(t) = common.truncation {
                l = t;
            }
            if let Some(p) = common.points {
                n = p.max(16) as usize;
            }
            match run_suite(name, l, n) {
                Ok(report) => {
                    let out = common
                        .out
                        .clone()
                        .or_else(|| std::env::var("GRAPHWAVE_OUT").ok().map(PathBuf::from))
                        .unwrap_or_else(|| PathBuf::from("graphwave-out"));
                    for row in &report.rows {
                        println!(
                            "{:<34} {}",
                            row.criterion,
                            if row.passed() { "pass" } else { "FAIL" }
                        );
                    }
                    if let Err(e) = write_suite_outputs(&report, &out) {
                        eprintln!("error writing suite outputs: {e}");
                        return ExitCode::from(2);
                    }
                    println!("summary: {}", out.join("suite-summary.md").display());
                    return if report.passed() {
                        ExitCode::SUCCESS
                    } else {
                        ExitCode::from(1)
                    };
                }
                Err(graphwave_cli::suite::SuiteError::UnknownSuite(s)) => {
                    eprintln!("error: unknown suite `{s}`");
                    return ExitCode::from(2);
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(2);
                }
            }
        }
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
