use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use byzrelay::channel::ChannelParams;
use byzrelay::detector::{self, DetectionPolicy, GaussianKernel, MarginalKernel, ProbeGrid, TransitionKernel};
use byzrelay::harness::{self, emit_report, figure_preset, load_config, Experiment, ExperimentConfig};
use byzrelay::{Error, Result};

#[derive(Parser)]
#[command(name = "byzrelay", version, about = "Byzantine relay detection in a Gaussian two-hop network")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct RunFlags {
    /// Experiment config file.
    #[arg(long)]
    config: PathBuf,
    /// Override the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the number of trials per arm.
    #[arg(long)]
    trials: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (0 = all cores).
    #[arg(long, default_value_t = 0)]
    jobs: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum KernelName {
    /// V drawn from the U-marginal, ignoring U.
    Marginal,
    /// V ~ N(U, width²).
    NearIdentity,
    /// V ~ N(U + shift, width²).
    Shift,
}

#[derive(Subcommand)]
enum Command {
    /// Run honest and attack arms and write trials.csv, cdf.csv and config.txt.
    Simulate(RunFlags),
    /// Calibrate a detection threshold from honest trials only.
    Calibrate(RunFlags),
    /// Score an observation CSV (header x,y) against a config.
    Detect {
        #[command(flatten)]
        run: RunFlags,
        /// Observation pairs.
        #[arg(long)]
        observations: PathBuf,
        /// Use this threshold instead of calibrating one.
        #[arg(long)]
        threshold: Option<f64>,
    },
    /// Numerically test whether a kernel reproduces the honest observation law.
    CheckManipulable {
        #[arg(long, value_enum)]
        kernel: KernelName,
        /// Read h1, h2, h3 from this config.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 1.0)]
        h1: f64,
        #[arg(long, default_value_t = 1.0)]
        h2: f64,
        #[arg(long, default_value_t = 1.0)]
        h3: f64,
        #[arg(long, default_value_t = 1e-4)]
        width: f64,
        #[arg(long, default_value_t = 0.5)]
        shift: f64,
        #[arg(long, default_value_t = 1e-3)]
        tol: f64,
        /// Probe points per axis on [-3, 3].
        #[arg(long, default_value_t = 7)]
        points: usize,
    },
    /// Sweep the block lengths of one figure and write a report per block length.
    ReproduceFigure {
        #[arg(value_parser = clap::value_parser!(u8).range(4..=7))]
        figure: u8,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        jobs: usize,
    },
}

fn load(flags: &RunFlags) -> Result<ExperimentConfig> {
    let mut cfg = load_config(&flags.config)?;
    if let Some(seed) = flags.seed {
        cfg.seed = seed;
    }
    if let Some(trials) = flags.trials {
        cfg.trials = trials;
    }
    if flags.out.is_some() {
        cfg.out = flags.out.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn read_observations(path: &Path) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut reader = csv::Reader::from_path(path)?;
    let headers = reader.headers()?.clone();
    if headers.len() != 2 || &headers[0] != "x" || &headers[1] != "y" {
        return Err(Error::Config(format!(
            "{}: expected header 'x,y', found '{}'",
            path.display(),
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for (line, row) in reader.records().enumerate() {
        let row = row?;
        let parse = |field: &str| {
            field.trim().parse::<f64>().map_err(|_| {
                Error::Config(format!("{}: row {}: cannot parse '{field}'", path.display(), line + 1))
            })
        };
        xs.push(parse(&row[0])?);
        ys.push(parse(&row[1])?);
    }
    Ok((xs, ys))
}

fn simulate(flags: &RunFlags) -> Result<()> {
    let cfg = load(flags)?;
    let report = harness::run_experiment(&cfg, flags.jobs)?;
    println!(
        "threshold={} ks={} detection_rate={} separated={}",
        report.policy.threshold,
        report.ks,
        report.detection_rate(),
        report.fully_separated()
    );
    if let Some(dir) = &cfg.out {
        for path in emit_report(&report, dir)? {
            println!("wrote {}", path.display());
        }
    }
    Ok(())
}

fn calibrate(flags: &RunFlags) -> Result<()> {
    let cfg = load(flags)?;
    let policy = harness::run_calibration(&cfg, flags.jobs)?;
    println!("threshold={} quantile={} trials={}", policy.threshold, cfg.quantile, cfg.trials);
    Ok(())
}

fn detect(flags: &RunFlags, observations: &Path, threshold: Option<f64>) -> Result<()> {
    let cfg = load(flags)?;
    let (x, y) = read_observations(observations)?;
    let policy = match threshold {
        Some(t) => DetectionPolicy::fixed(t)?,
        None => harness::run_calibration(&cfg, flags.jobs)?,
    };
    let exp = Experiment::new(cfg)?;
    let outcome = detector::detect(exp.score_observations(&x, &y)?, &policy)?;
    println!(
        "d_n={} threshold={} verdict={}",
        outcome.statistic,
        outcome.threshold,
        outcome.verdict.as_str()
    );
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn check_manipulable(
    kernel: KernelName,
    config: Option<&Path>,
    h: [f64; 3],
    width: f64,
    shift: f64,
    tol: f64,
    points: usize,
) -> Result<()> {
    let params = match config {
        Some(path) => load_config(path)?.params,
        None => ChannelParams::new(h[0], h[1], h[2])?,
    };
    let kernel: Box<dyn TransitionKernel> = match kernel {
        KernelName::Marginal => Box::new(MarginalKernel { params }),
        KernelName::NearIdentity => Box::new(GaussianKernel::new(width, 0.0)?),
        KernelName::Shift => Box::new(GaussianKernel::new(width, shift)?),
    };
    let report = detector::check_manipulable(&params, kernel.as_ref(), &ProbeGrid::uniform(-3.0, 3.0, points), tol)?;
    println!(
        "max_gap={:e} worst_x={} worst_y={} manipulable={}",
        report.max_gap, report.worst_x, report.worst_y, report.manipulable_at_tol
    );
    Ok(())
}

fn reproduce(figure: u8, seed: u64, trials: usize, out: Option<&Path>, jobs: usize) -> Result<()> {
    let preset = figure_preset(figure)?;
    println!("figure,n,trials,threshold,ks,detection_rate,separated");
    for cfg in preset.configs(trials, seed) {
        let report = harness::run_experiment(&cfg, jobs)?;
        println!(
            "{},{},{},{},{},{},{}",
            figure,
            cfg.n,
            trials,
            report.policy.threshold,
            report.ks,
            report.detection_rate(),
            report.fully_separated()
        );
        if let Some(dir) = out {
            emit_report(&report, &dir.join(format!("fig{figure}")).join(format!("n{}", cfg.n)))?;
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate(flags) => simulate(&flags),
        Command::Calibrate(flags) => calibrate(&flags),
        Command::Detect {
            run,
            observations,
            threshold,
        } => detect(&run, &observations, threshold),
        Command::CheckManipulable {
            kernel,
            config,
            h1,
            h2,
            h3,
            width,
            shift,
            tol,
            points,
        } => check_manipulable(kernel, config.as_deref(), [h1, h2, h3], width, shift, tol, points),
        Command::ReproduceFigure {
            figure,
            seed,
            trials,
            out,
            jobs,
        } => reproduce(figure, seed, trials, out.as_deref(), jobs),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
