use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use lipkin_cli::commands::{
    cmd_analyze, cmd_compare, cmd_exact_sweep, cmd_hull, cmd_sim_sweep, AnalyzeArgs, HullArgs,
};
use lipkin_cli::config::{Mode, Overrides, SweepConfig};
use lipkin_cli::CliResult;

/// Exact and simulated LMG sweeps, convex-hull geometry and gradient plots.
///
/// Worker threads default to the core count; set LIPKIN_WORKERS to override.
#[derive(Parser)]
#[command(name = "lipkin", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct SweepFlags {
    /// JSON sweep configuration; flags take precedence over it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Root seed for shot sampling.
    #[arg(long)]
    seed: Option<u64>,
    /// Shots per basis group and repetition.
    #[arg(long)]
    shots: Option<u64>,
    /// exact, ideal or noisy.
    #[arg(long, value_parser = parse_mode)]
    mode: Option<Mode>,
}

fn parse_mode(s: &str) -> Result<Mode, String> {
    Mode::parse(s).ok_or_else(|| format!("unknown mode {s:?}; expected exact, ideal or noisy"))
}

impl SweepFlags {
    fn resolve(&self, default_mode: Option<Mode>) -> CliResult<SweepConfig> {
        let o = Overrides {
            out: self.out.clone(),
            seed: self.seed,
            shots: self.shots,
            mode: self.mode.or(if self.config.is_none() { default_mode } else { None }),
        };
        SweepConfig::resolve(self.config.as_deref(), &o)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Exact ground states over the configured grid.
    ExactSweep(SweepFlags),
    /// Circuit preparation plus sampled tomography at every grid point.
    SimSweep {
        #[command(flatten)]
        flags: SweepFlags,
        /// Re-estimate points from a persisted counts.jsonl instead of simulating.
        #[arg(long)]
        counts: Option<PathBuf>,
    },
    /// Hull mesh, ruled surfaces and planes; a second file is checked for containment.
    Hull {
        #[arg(required = true, num_args = 1..=2)]
        points: Vec<PathBuf>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Particle number for partner grouping; read from manifest.json when absent.
        #[arg(long)]
        n_particles: Option<u32>,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long)]
        angle_tol: Option<f64>,
        /// Ruling segments required before a family is reported.
        #[arg(long, default_value_t = 10)]
        min_lines: usize,
    },
    /// d<Jz>/dlambda along one epsilon, as CSV and SVG.
    Analyze {
        points: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        epsilon: Option<f64>,
        /// Gaussian smoothing width in grid steps.
        #[arg(long)]
        smooth: Option<f64>,
    },
    /// Per-point deltas of a candidate points file against a reference.
    Compare {
        reference: PathBuf,
        candidate: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::ExactSweep(flags) => {
            let cfg = flags.resolve(Some(Mode::Exact))?;
            let rows = cmd_exact_sweep(&cfg)?;
            eprintln!("{} points -> {}", rows.len(), cfg.output.directory.join("points.csv").display());
        }
        Command::SimSweep { flags, counts } => {
            let cfg = flags.resolve(Some(Mode::SimIdeal))?;
            let out = cmd_sim_sweep(&cfg, counts.as_deref())?;
            let failed = out.rows.iter().filter(|r| !r.is_ok()).count();
            eprintln!(
                "{} points ({} failed) -> {}",
                out.rows.len(),
                failed,
                cfg.output.directory.join("points.csv").display()
            );
        }
        Command::Hull {
            points,
            out,
            n_particles,
            eps,
            angle_tol,
            min_lines,
        } => {
            let r = cmd_hull(&HullArgs {
                points,
                out: out.clone(),
                n_particles,
                eps,
                angle_tol,
                min_lines,
            })?;
            eprintln!(
                "{} vertices, {} facets, volume {} -> {}",
                r.vertices,
                r.facets,
                r.volume,
                out.join("report.json").display()
            );
        }
        Command::Analyze {
            points,
            out,
            epsilon,
            smooth,
        } => {
            let a = cmd_analyze(&AnalyzeArgs {
                points,
                out: out.clone(),
                epsilon,
                smoothing_sigma: smooth,
            })?;
            eprintln!(
                "peak d<Jz>/dlambda = {} at lambda = {} -> {}",
                a.peak_gradient,
                a.peak_lambda,
                out.join("gradient.csv").display()
            );
        }
        Command::Compare { reference, candidate, out } => {
            let s = cmd_compare(&reference, &candidate, &out)?;
            eprintln!("{} matched points -> {}", s.matched, out.join("compare.json").display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("lipkin: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
