use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use qcnn_toric::harness::config::{resolve, ConfigOverrides, Mode, OutputFormat, Precision, SweepParam};
use qcnn_toric::harness::threshold::threshold_basis;
use qcnn_toric::harness::{
    emit_results, estimate_threshold, read_results, render, run_field_sweep, run_noise_sweep, run_threshold_sweeps, verify,
    ExperimentConfig, SweepResult,
};

#[derive(Parser)]
#[command(name = "qcnn", version, about = "QCNN phase recognition for the toric code")]
struct Cli {
    /// Log progress to stderr.
    #[arg(short, long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the exact circuit and pooling oracles.
    Verify,
    /// Pauli-noise sweep on the ideal toric-code state.
    NoiseSweep(RunArgs),
    /// Magnetic-field sweep with exact ground states.
    FieldSweep(RunArgs),
    /// Sweep along h_x = h_z with the two-stage initialisation.
    Multicritical(RunArgs),
    /// Estimate the noise threshold from the final layers of successive depths.
    Threshold {
        #[command(flatten)]
        run: RunArgs,
        /// Read previous noise sweeps, one per depth, instead of running them.
        #[arg(long)]
        input: Vec<PathBuf>,
    },
}

#[derive(Args, Default)]
struct RunArgs {
    /// TOML file whose keys mirror the flags; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    depth: Option<usize>,
    /// start:stop:step, or a single value.
    #[arg(long)]
    grid: Option<String>,
    /// Parameter the grid is applied to.
    #[arg(long, value_enum)]
    sweep: Option<SweepParam>,
    #[arg(long)]
    px: Option<f64>,
    #[arg(long)]
    pz: Option<f64>,
    #[arg(long)]
    hx: Option<f64>,
    #[arg(long)]
    hz: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    penalty: Option<f64>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    format: Option<OutputFormat>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Layer Pauli noise (--px/--pz) onto ground-state snapshots.
    #[arg(long)]
    noisy: bool,
    #[arg(long)]
    qubit_cap: Option<usize>,
    #[arg(long)]
    max_qubits: Option<u64>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long, value_enum)]
    precision: Option<Precision>,
    /// Comma-separated depths for the threshold estimate.
    #[arg(long, value_delimiter = ',')]
    depths: Option<Vec<usize>>,
}

impl RunArgs {
    fn resolve(&self, mode: Mode) -> anyhow::Result<ExperimentConfig> {
        let over = ConfigOverrides {
            depth: self.depth,
            grid: self.grid.clone(),
            sweep: self.sweep,
            samples: self.samples,
            px: self.px,
            pz: self.pz,
            hx: self.hx,
            hz: self.hz,
            penalty: self.penalty,
            delta: self.delta,
            seed: self.seed,
            noisy: self.noisy.then_some(true),
            format: self.format,
            out: self.out.clone(),
            qubit_cap: self.qubit_cap,
            max_qubits: self.max_qubits,
            tol: self.tol,
            precision: self.precision,
            depths: self.depths.clone(),
        };
        Ok(resolve(mode, self.config.as_deref(), &over)?)
    }
}

fn write_output(result: &SweepResult, cfg: &ExperimentConfig) -> anyhow::Result<()> {
    match &cfg.out {
        Some(path) => {
            emit_results(result, cfg.format, path)?;
            log::info!("wrote {}", path.display());
        }
        None => print!("{}", render(result, cfg.format)?),
    }
    Ok(())
}

/// `out.csv` becomes `out.d4.csv` for depth 4.
fn depth_path(out: &Path, depth: usize) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let name = match out.extension() {
        Some(ext) => format!("{stem}.d{depth}.{}", ext.to_string_lossy()),
        None => format!("{stem}.d{depth}"),
    };
    out.with_file_name(name)
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    match cli.command {
        Command::Verify => {
            let checks = verify::run_all()?;
            for c in &checks {
                println!("{c}");
            }
            return Ok(checks.iter().all(|c| c.passed));
        }
        Command::NoiseSweep(args) => {
            let cfg = args.resolve(Mode::NoiseSweep)?;
            write_output(&run_noise_sweep(&cfg)?, &cfg)?;
        }
        Command::FieldSweep(args) => {
            let cfg = args.resolve(Mode::FieldSweep)?;
            let result = run_field_sweep(&cfg)?;
            write_output(&result, &cfg)?;
            if !result.metadata.failures.is_empty() {
                bail!("{} sweep points failed", result.metadata.failures.len());
            }
        }
        Command::Multicritical(args) => {
            let cfg = args.resolve(Mode::Multicritical)?;
            let result = run_field_sweep(&cfg)?;
            write_output(&result, &cfg)?;
            if !result.metadata.failures.is_empty() {
                bail!("{} sweep points failed", result.metadata.failures.len());
            }
        }
        Command::Threshold { run, input } => {
            let cfg = run.resolve(Mode::Threshold)?;
            let results = if input.is_empty() {
                let results = run_threshold_sweeps(&cfg)?;
                if let Some(out) = &cfg.out {
                    for r in &results {
                        let path = depth_path(out, r.metadata.config.depth);
                        emit_results(r, cfg.format, &path)?;
                        log::info!("wrote {}", path.display());
                    }
                }
                results
            } else {
                input
                    .iter()
                    .map(|p| read_results(p).with_context(|| format!("reading {}", p.display())))
                    .collect::<anyhow::Result<Vec<_>>>()?
            };
            let basis = threshold_basis(&results[0].metadata.config);
            let est = estimate_threshold(&results, basis)?;
            for c in &est.crossings {
                println!("crossing depths {}-{}: {:.5}", c.lower, c.upper, c.value);
            }
            println!("threshold {:.5} +- {:.5} (grid step {:.5})", est.mean, est.spread, est.resolution);
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.verbose { "info" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("verification failed");
            ExitCode::FAILURE
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
