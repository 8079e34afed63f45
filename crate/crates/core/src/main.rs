use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use heavytail::bounds::evaluate_named;
use heavytail::distributions::ArmDistribution;
use heavytail::error::{Error, Result};
use heavytail::estimators::EstimatorKind;
use heavytail::harness::{
    load_config, run_concentration, run_experiment, run_experiment_with_workers, write_trace,
    DeviationProbe, EstimatorConfig,
};

#[derive(Parser)]
#[command(name = "heavytail", version, about = "Robust UCB bandits for heavy-tailed rewards")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a JSON config and write its trace.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Worker count; overrides HEAVYTAIL_WORKERS.
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Measure tail violation rates of one estimator on one distribution.
    Concentration {
        /// empirical | truncated | median_of_means | catoni
        #[arg(long)]
        estimator: String,
        /// Distribution as JSON, e.g. '{"law":"pareto","shape":2.2,"scale":1.0}'
        #[arg(long)]
        dist: String,
        #[arg(long)]
        n: u64,
        /// Confidence level; exactly one of --delta and --eta.
        #[arg(long)]
        delta: Option<f64>,
        /// Fixed deviation threshold (empirical mean only).
        #[arg(long)]
        eta: Option<f64>,
        #[arg(long)]
        trials: u64,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        epsilon: f64,
        #[arg(long)]
        raw_bound_u: Option<f64>,
        #[arg(long)]
        central_bound_v: Option<f64>,
    },
    /// Evaluate one closed-form bound on JSON parameters.
    Bounds {
        /// prop1_gap | prop1_free | thm_truncated | thm_mom | thm_catoni |
        /// expected_pulls | lower_gap | lower_free
        #[arg(long)]
        which: String,
        #[arg(long)]
        params: String,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Simulate { config, workers } => {
            let config = load_config(&config)?;
            let trace = match workers {
                Some(w) => run_experiment_with_workers(&config, w)?,
                None => run_experiment(&config)?,
            };
            write_trace(&trace, &config.output.path, config.output.format)?;
            let summary = serde_json::json!({
                "checkpoints": trace.checkpoints.len(),
                "repetitions": trace.per_repetition_regret.len(),
                "final_regret_mean": trace.regret_mean.last(),
                "final_regret_stderr": trace.regret_stderr.last(),
                "output": config.output.path,
            });
            println!("{summary}");
            Ok(())
        }
        Command::Concentration {
            estimator,
            dist,
            n,
            delta,
            eta,
            trials,
            seed,
            epsilon,
            raw_bound_u,
            central_bound_v,
        } => {
            let kind = parse_kind(&estimator)?;
            let spec = EstimatorConfig { kind, epsilon, raw_bound_u, central_bound_v }.to_spec()?;
            let dist: ArmDistribution = serde_json::from_str(&dist)?;
            dist.validate()?;
            let probe = match (delta, eta) {
                (Some(delta), None) => DeviationProbe::Confidence { delta },
                (None, Some(eta)) => DeviationProbe::Threshold { eta },
                _ => {
                    return Err(Error::invalid_input(
                        "exactly one of --delta and --eta is required",
                    ))
                }
            };
            let report = run_concentration(&spec, &dist, n, probe, trials, seed)?;
            println!("{}", serde_json::to_string_pretty(&report)?);
            Ok(())
        }
        Command::Bounds { which, params } => {
            let value = evaluate_named(&which, &params)?;
            println!("{}", serde_json::json!({ "which": which, "value": value }));
            Ok(())
        }
    }
}

fn parse_kind(text: &str) -> Result<EstimatorKind> {
    match text {
        "empirical" => Ok(EstimatorKind::Empirical),
        "truncated" => Ok(EstimatorKind::Truncated),
        "median_of_means" => Ok(EstimatorKind::MedianOfMeans),
        "catoni" => Ok(EstimatorKind::Catoni),
        other => Err(Error::invalid_input(format!(
            "unknown estimator {other:?}; expected empirical, truncated, median_of_means, or catoni"
        ))),
    }
}
