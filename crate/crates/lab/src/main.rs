use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use pocs_core::measurement::{AdversaryMode, Corruption, NoiseSpec};
use pocs_core::recovery::{
    epsilon_for, recover_extended, recover_with_epsilon, CombinedConstants, EpsilonMode,
    RecoveryInput,
};
use pocs_lab::checks::{adversary_trials, rip_check, AdversaryRun, RipCheck};
use pocs_lab::config::{Channel, EpsilonChoice, Estimator, ExperimentConfig, OutputFormat};
use pocs_lab::emit::{json_report, write_csv, write_csv_to, write_json};
use pocs_lab::error::{LabError, Result};
use pocs_lab::instance::InstanceFile;
use pocs_lab::runner::run_experiment;
use pocs_lab::selftest::{self, SelftestConfig};
use pocs_lab::summary::summarize;
use serde::Serialize;

#[derive(Parser)]
#[command(
    name = "pocs",
    version,
    about = "Phase-only compressed sensing experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep a noise grid and write one record per (grid value, trial).
    Experiment(ExperimentArgs),
    /// Recover one signal from an instance file.
    Recover(RecoverArgs),
    /// Write a random instance file for `recover`.
    Instance(InstanceArgs),
    /// Estimate the restricted isometry constant of the linearized matrix.
    RipCheck(RipArgs),
    /// Build indistinguishable signal pairs under dense noise.
    Adversary(AdversaryArgs),
    /// Run the randomized property suites.
    Selftest(SelftestArgs),
}

#[derive(Args)]
struct ExperimentArgs {
    /// JSON config; flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    s: Option<usize>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    channel: Option<Channel>,
    /// Comma-separated τ0 values.
    #[arg(long, value_delimiter = ',')]
    tau0_grid: Option<Vec<f64>>,
    /// Comma-separated corruption counts ζ0·m.
    #[arg(long, value_delimiter = ',')]
    zeta0m_grid: Option<Vec<f64>>,
    #[arg(long, value_enum)]
    epsilon_mode: Option<EpsilonChoice>,
    #[arg(long, value_enum)]
    estimator: Option<Estimator>,
    /// Reuse one sensing matrix for every trial.
    #[arg(long)]
    fixed_matrix: bool,
    /// Write zero wall times so output is byte-reproducible.
    #[arg(long)]
    no_timing: bool,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<OutputFormat>,
}

impl ExperimentArgs {
    fn resolve(self) -> Result<ExperimentConfig> {
        let mut c = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        macro_rules! set {
            ($($field:ident => $target:ident),*) => {
                $(if let Some(v) = self.$field { c.$target = v; })*
            };
        }
        set!(n => n, m => m, s => s, trials => trials, seed => base_seed, channel => channel,
             epsilon_mode => epsilon_mode, estimator => estimator, format => format);
        if self.tau0_grid.is_some() {
            c.tau0_grid = self.tau0_grid;
        }
        if self.zeta0m_grid.is_some() {
            c.zeta0m_grid = self.zeta0m_grid;
        }
        if self.out.is_some() {
            c.output_path = self.out;
        }
        c.fixed_matrix |= self.fixed_matrix;
        if self.no_timing {
            c.timing = false;
        }
        c.validate()?;
        Ok(c)
    }
}

#[derive(Args)]
struct RecoverArgs {
    #[arg(long)]
    instance: PathBuf,
    /// Sparsity level used by the radius and the extended weights.
    #[arg(long, default_value_t = 5)]
    s: usize,
    #[arg(long, value_enum, default_value = "standard")]
    estimator: Estimator,
    /// Radius rule when --epsilon is absent; oracle needs the signal in the file.
    #[arg(long, value_enum, default_value = "theorem")]
    epsilon_mode: EpsilonChoice,
    /// Assumed channel, used by the theorem radius.
    #[arg(long, value_enum, default_value = "clean")]
    channel: Channel,
    #[arg(long, default_value_t = 0.0)]
    tau0: f64,
    /// Corruption count ζ0·m.
    #[arg(long, default_value_t = 0.0)]
    zeta0m: f64,
    /// Explicit constraint radius.
    #[arg(long)]
    epsilon: Option<f64>,
    /// Result JSON; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct InstanceArgs {
    #[arg(long, default_value_t = 500)]
    n: usize,
    #[arg(long, default_value_t = 300)]
    m: usize,
    #[arg(long, default_value_t = 5)]
    s: usize,
    #[arg(long, value_enum, default_value = "clean")]
    channel: Channel,
    #[arg(long, default_value_t = 0.0)]
    tau0: f64,
    #[arg(long, default_value_t = 0.0)]
    zeta0m: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Drop the true signal from the file.
    #[arg(long)]
    no_signal: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct RipArgs {
    #[arg(long, default_value_t = 500)]
    n: usize,
    #[arg(long, default_value_t = 300)]
    m: usize,
    #[arg(long, default_value_t = 5)]
    s: usize,
    /// Sparsity of the cone; twice s when absent.
    #[arg(long)]
    t: Option<usize>,
    #[arg(long, default_value_t = 2000)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Enumerate every support instead of sampling.
    #[arg(long)]
    exhaustive: bool,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum ModeArg {
    Pre,
    Post,
}

#[derive(Args)]
struct AdversaryArgs {
    #[arg(long, value_enum, default_value = "pre")]
    mode: ModeArg,
    #[arg(long, default_value_t = 200)]
    n: usize,
    #[arg(long, default_value_t = 400)]
    m: usize,
    #[arg(long, default_value_t = 8)]
    s: usize,
    #[arg(long, default_value_t = 0.1)]
    tau0: f64,
    #[arg(long, default_value_t = 50)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct SelftestArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Reduced sample counts for a fast smoke run.
    #[arg(long)]
    quick: bool,
}

fn print_json<T: Serialize>(value: &T, out: Option<&Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(value).expect("plain data serializes");
    match out {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir).map_err(|e| LabError::io(dir, e))?;
            }
            std::fs::write(path, text + "\n").map_err(|e| LabError::io(path, e))
        }
        None => stdout_result(writeln!(std::io::stdout().lock(), "{text}")),
    }
}

/// A closed downstream pipe (as with `| head`) is not an error.
fn stdout_result(r: std::io::Result<()>) -> Result<()> {
    match r {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(LabError::io("<stdout>", e)),
        _ => Ok(()),
    }
}

fn experiment(args: ExperimentArgs) -> Result<ExitCode> {
    let cfg = args.resolve()?;
    let records = run_experiment(&cfg)?;
    let summary = summarize(&records);
    match (&cfg.output_path, cfg.format) {
        (Some(path), OutputFormat::Csv) => write_csv(&records, path)?,
        (Some(path), OutputFormat::Json) => {
            write_json(&json_report(&records, &summary, &cfg), path)?
        }
        (None, OutputFormat::Csv) => {
            if let Err(e) = write_csv_to(&records, std::io::stdout().lock()) {
                match e.into_kind() {
                    csv::ErrorKind::Io(io) => stdout_result(Err(io))?,
                    other => return Err(LabError::data("<stdout>", format!("{other:?}"))),
                }
            }
        }
        (None, OutputFormat::Json) => print_json(&json_report(&records, &summary, &cfg), None)?,
    }
    let mut err = std::io::stderr().lock();
    for p in &summary.points {
        let _ = writeln!(
            err,
            "grid {:>8} mean {:.4e} median {:.4e} std {:.4e} failures {} not_converged {}",
            p.grid_param, p.mean, p.median, p.std, p.failures, p.not_converged
        );
    }
    if let Some(slope) = summary.loglog_slope {
        let _ = writeln!(err, "log-log slope {slope:.4}");
    }
    let failed: Vec<_> = records.iter().filter(|r| r.failure.is_some()).collect();
    for r in &failed {
        let _ = writeln!(
            err,
            "trial {} at grid {} failed: {}",
            r.trial,
            r.grid_param,
            r.failure.as_deref().unwrap_or_default()
        );
    }
    Ok(if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(3)
    })
}

fn channel_spec(channel: Channel, tau0: f64, zeta0m: f64, m: usize) -> Result<Option<NoiseSpec>> {
    let zeta0 = zeta0m / m as f64;
    let spec = match channel {
        Channel::Clean => None,
        Channel::PostSign => Some(NoiseSpec::PostSignDense { tau0 }),
        Channel::PreSign => Some(NoiseSpec::PreSignDense { tau0 }),
        Channel::Corruption => Some(NoiseSpec::SparseCorruption {
            zeta0,
            mechanism: Corruption::LargestRotateI,
        }),
        Channel::Combined => Some(NoiseSpec::Combined { tau0, zeta0 }),
    };
    if let Some(s) = &spec {
        s.validate(m).map_err(|e| LabError::Config(e.to_string()))?;
    }
    Ok(spec)
}

#[derive(Serialize)]
struct RecoverOutput {
    estimator: Estimator,
    epsilon: f64,
    iterations: usize,
    converged: bool,
    degenerate: bool,
    l2_error: Option<f64>,
    residual_at_truth: Option<f64>,
    x_sharp: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    corruption_estimate: Option<Vec<f64>>,
}

fn recover(args: RecoverArgs) -> Result<ExitCode> {
    let inst = InstanceFile::load(&args.instance)?.into_instance(&args.instance)?;
    let m = inst.phi.rows();
    if args.s == 0 || args.s > inst.phi.cols() {
        return Err(LabError::Config("s must lie in 1..=n".into()));
    }
    let spec = channel_spec(args.channel, args.tau0, args.zeta0m, m)?;
    let input = RecoveryInput {
        phi: &inst.phi,
        observed: &inst.phases,
        truth: inst.signal.as_deref(),
    };
    let opts = pocs_core::solver::SolverOptions::default();
    let result = match args.estimator {
        Estimator::Standard => {
            let epsilon = match args.epsilon {
                Some(e) if e.is_finite() && e >= 0.0 => e,
                Some(_) => return Err(LabError::Config("epsilon must be finite and >= 0".into())),
                None => {
                    let mode = match args.epsilon_mode {
                        EpsilonChoice::Theorem => {
                            EpsilonMode::Theorem(CombinedConstants::default())
                        }
                        EpsilonChoice::Oracle => EpsilonMode::Oracle,
                    };
                    epsilon_for(&input, spec.as_ref(), &mode, args.s)
                        .map_err(LabError::from_params)?
                }
            };
            recover_with_epsilon(&input, epsilon, &opts)?
        }
        Estimator::Extended => recover_extended(&input, args.s, args.zeta0m / m as f64, &opts)?,
    };
    print_json(
        &RecoverOutput {
            estimator: args.estimator,
            epsilon: result.epsilon_used,
            iterations: result.solve.iterations,
            converged: result.solve.converged,
            degenerate: result.degenerate,
            l2_error: result.l2_error,
            residual_at_truth: result.residual_at_truth,
            x_sharp: result.x_sharp,
            corruption_estimate: result.corruption_estimate,
        },
        args.out.as_deref(),
    )?;
    Ok(ExitCode::SUCCESS)
}

fn instance(args: InstanceArgs) -> Result<ExitCode> {
    if args.m == 0 {
        return Err(LabError::Config("m must be positive".into()));
    }
    let spec = channel_spec(args.channel, args.tau0, args.zeta0m, args.m)?;
    let mut file = InstanceFile::generate(args.m, args.n, args.s, spec.as_ref(), args.seed)
        .map_err(LabError::from_params)?;
    if args.no_signal {
        file.signal = None;
    }
    file.save(&args.out)?;
    Ok(ExitCode::SUCCESS)
}

fn rip(args: RipArgs) -> Result<ExitCode> {
    let report = rip_check(&RipCheck {
        n: args.n,
        m: args.m,
        s: args.s,
        t: args.t.unwrap_or(2 * args.s),
        samples: args.samples,
        seed: args.seed,
        exhaustive: args.exhaustive,
    })?;
    print_json(&report, None)?;
    Ok(ExitCode::SUCCESS)
}

fn adversary(args: AdversaryArgs) -> Result<ExitCode> {
    let report = adversary_trials(&AdversaryRun {
        mode: match args.mode {
            ModeArg::Pre => AdversaryMode::PreSign,
            ModeArg::Post => AdversaryMode::PostSign,
        },
        n: args.n,
        m: args.m,
        s: args.s,
        tau0: args.tau0,
        trials: args.trials,
        seed: args.seed,
    })?;
    eprintln!(
        "{} of {} trials feasible, {} meet the indistinguishability conditions",
        report.feasible,
        report.trials.len(),
        report.successes
    );
    print_json(&report, None)?;
    Ok(ExitCode::SUCCESS)
}

fn run_selftest(args: SelftestArgs) -> Result<ExitCode> {
    let mut cfg = SelftestConfig {
        seed: args.seed,
        ..Default::default()
    };
    if args.quick {
        cfg.sign_pairs = 5_000;
        cfg.normalization_pairs = 1_000;
        cfg.linearity_triples = 10;
        cfg.rip_instances = 4;
        cfg.small_measurement_m = 2_000;
        cfg.small_measurement_trials = 5;
        cfg.oracle_instances = 5;
    }
    let outcomes = selftest::run(&cfg);
    let mut out = std::io::stdout().lock();
    for o in &outcomes {
        let line = format!(
            "{} {}: {}",
            if o.passed { "PASS" } else { "FAIL" },
            o.name,
            o.detail
        );
        stdout_result(writeln!(out, "{line}"))?;
    }
    Ok(if outcomes.iter().all(|o| o.passed) {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(3)
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let outcome = match cli.command {
        Command::Experiment(a) => experiment(a),
        Command::Recover(a) => recover(a),
        Command::Instance(a) => instance(a),
        Command::RipCheck(a) => rip(a),
        Command::Adversary(a) => adversary(a),
        Command::Selftest(a) => run_selftest(a),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
