use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use maler_core::{Execution, LearnerKind};
use maler_harness::certify::certify;
use maler_harness::experiment::{run_experiment, ExperimentConfig, TaskKind, Trace};

#[derive(Parser)]
#[command(
    name = "maler",
    version,
    about = "Universal online convex optimization experiments"
)]
struct Cli {
    /// Run everything on the calling thread.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run learners on a task and write regret.csv, traces and summary.json.
    Run(RunArgs),
    /// Re-check the meta, expert and simultaneous regret bounds on a trace.
    Certify {
        #[arg(long)]
        trace: PathBuf,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, value_enum)]
    task: TaskKind,
    /// Comma separated: maler,metagrad,ogd-convex,ogd-sc,ons.
    #[arg(long, value_delimiter = ',')]
    algos: Option<Vec<LearnerKind>>,
    #[arg(long)]
    rounds: Option<usize>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    batch: Option<usize>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long = "noise-std")]
    noise_std: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// LIBSVM file for classification.
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long)]
    radius: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write regret.svg.
    #[arg(long)]
    svg: bool,
}

impl RunArgs {
    fn config(self) -> Result<ExperimentConfig> {
        let mut c = match self.task {
            TaskKind::Regression => ExperimentConfig::regression(),
            TaskKind::Classification => ExperimentConfig::classification(
                self.data.clone().context("classification needs --data")?,
            ),
        };
        if let Some(a) = self.algos {
            c.algos = a;
        }
        c.rounds = self.rounds.unwrap_or(c.rounds);
        c.dim = self.dim.unwrap_or(c.dim);
        c.batch = self.batch.unwrap_or(c.batch);
        c.lambda = self.lambda.unwrap_or(c.lambda);
        c.noise_std = self.noise_std.unwrap_or(c.noise_std);
        c.radius = self.radius.unwrap_or(c.radius);
        c.seed = self.seed;
        c.data = self.data.or(c.data);
        c.out = self.out;
        c.svg = self.svg;
        Ok(c)
    }
}

fn main() -> ExitCode {
    match real_main() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn real_main() -> Result<bool> {
    let cli = Cli::parse();
    let execution = if cli.sequential {
        Execution::Sequential
    } else {
        Execution::default()
    };
    match cli.command {
        Command::Run(args) => {
            let config = args.config()?;
            let outcome = run_experiment(&config, execution)?;
            println!("algo,final_regret,V_s,V_ell,certificates");
            for a in &outcome.summary.algos {
                println!(
                    "{},{:.6},{:.6},{:.6},{}",
                    a.algo,
                    a.final_regret,
                    a.v_s,
                    a.v_ell,
                    if a.certificates.passed() {
                        "ok"
                    } else {
                        "violated"
                    }
                );
            }
            if let Some(dir) = &config.out {
                println!("wrote {}", dir.display());
            }
            Ok(true)
        }
        Command::Certify { trace } => {
            let t = Trace::read(&trace).with_context(|| format!("reading {}", trace.display()))?;
            let report = certify(&t, execution)?;
            println!("{report}");
            Ok(report.passed())
        }
    }
}
