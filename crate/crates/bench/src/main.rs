use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ojak::oja::ProfileKind;
use ojak_bench::commands::{cmd_run, cmd_sweep, cmd_verify};
use ojak_bench::oracle::derived_values;
use ojak_bench::sweep::SweepAxis;
use ojak_bench::{BenchError, ExperimentConfig, Overrides};

#[derive(Parser)]
#[command(name = "ojak", version, about = "Monte Carlo experiments for Oja's streaming k-PCA")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run independent trials and write trace.csv and summary.json.
    Run(Common),
    /// Run the checkers named in the config and write verify.json.
    Verify(Common),
    /// Repeat `run` over values of one parameter; write sweep.json and sweep.csv.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// T, delta, d, k, noise_scale or beta.
        #[arg(long)]
        axis: SweepAxis,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
    },
    /// Recompute the reference values used by the test suite.
    Oracle,
}

#[derive(Clone, Copy, ValueEnum)]
enum Profile {
    Theoretical,
    Practical,
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    /// Falls back to the config file, then to OJAK_SEED.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    profile: Option<Profile>,
}

impl Common {
    fn load(&self) -> Result<(ExperimentConfig, Overrides), BenchError> {
        let overrides = Overrides {
            seed: self.seed,
            threads: self.threads,
            out_dir: self.out.clone(),
            profile: self.profile.map(|p| match p {
                Profile::Theoretical => ProfileKind::Theoretical,
                Profile::Practical => ProfileKind::Practical,
            }),
            env_seed: None,
        }
        .with_env_seed()?;
        Ok((ExperimentConfig::from_path(&self.config)?, overrides))
    }
}

fn dispatch(cli: Cli) -> Result<bool, BenchError> {
    match cli.command {
        Command::Run(common) => {
            let (config, overrides) = common.load()?;
            let out = cmd_run(config, &overrides)?;
            let s = &out.summary;
            println!(
                "{} trials, T = {}: median final distance {:.4e}, survival {:.3}",
                s.trials, s.horizon, s.final_subspace_dist.median, s.survival_fraction
            );
            println!("wrote {} and {}", out.trace_path.display(), out.summary_path.display());
            Ok(true)
        }
        Command::Verify(common) => {
            let (config, overrides) = common.load()?;
            let report = cmd_verify(config, &overrides)?;
            print!("{}", report.to_json());
            Ok(report.passed)
        }
        Command::Sweep { common, axis, values } => {
            let (config, overrides) = common.load()?;
            let report = cmd_sweep(config, &overrides, axis, &values)?;
            print!("{}", report.to_csv());
            if let Some(slope) = report.slope {
                println!("slope {slope:.4}");
            }
            Ok(true)
        }
        Command::Oracle => {
            for v in derived_values()? {
                println!("{}", v.line());
            }
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("ojak: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
