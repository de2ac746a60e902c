use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use hdpmix::io::{self, RunConfig};
use hdpmix::oracle::{run_validation, Grid};
use hdpmix::synth;

#[derive(Parser)]
#[command(
    name = "hdpmix",
    about = "Hierarchical Dirichlet process mixtures over grouped counts or vectors",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run Gibbs chains on a dataset and write assignments, trace and summary.
    Fit {
        /// JSON run configuration.
        #[arg(long)]
        config: PathBuf,
    },
    /// Forward-sample a dataset (with ground truth sidecar).
    Generate {
        /// Registered scenario name ("gp-3rates" or "ng-3means").
        #[arg(long, conflicts_with = "config")]
        scenario: Option<String>,
        /// JSON run configuration with `group_sizes` (forward sampling).
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output dataset path; ground truth goes to `<out>.truth.json`.
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the self-verification suite and exit nonzero on any failure.
    Validate {
        #[arg(long, value_enum, default_value_t = GridArg::Quick)]
        grid: GridArg,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum GridArg {
    Quick,
    Full,
}

fn truth_path(out: &Path) -> PathBuf {
    let mut name = out
        .file_name()
        .map(|n| n.to_os_string())
        .unwrap_or_default();
    name.push(".truth.json");
    out.with_file_name(name)
}

fn run(cli: Cli) -> Result<ExitCode, (hdpmix::Error, u8)> {
    // exit code 2 for usage/input problems, 1 for failed validation
    match cli.command {
        Command::Fit { config } => {
            let config = RunConfig::from_file(&config).map_err(|e| (e, 2))?;
            let dirs = io::run_fit(&config).map_err(|e| (e, 2))?;
            for dir in dirs {
                println!("wrote {}", dir.display());
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Generate {
            scenario,
            config,
            out,
        } => {
            match (scenario, config) {
                (Some(name), None) => {
                    let scenario = synth::fixed_scenario(&name).map_err(|e| (e, 2))?;
                    io::write_dataset(&out, &scenario.data).map_err(|e| (e, 2))?;
                    let truth = serde_json::json!({
                        "dishes": scenario.truth,
                        "dish_params": scenario
                            .dish_params
                            .iter()
                            .map(|p| match p {
                                synth::DishParam::Rate(r) => serde_json::json!({"rate": r}),
                                synth::DishParam::MeanPrecision { mean, precision } =>
                                    serde_json::json!({"mean": mean, "precision": precision}),
                            })
                            .collect::<Vec<_>>(),
                    });
                    std::fs::write(
                        truth_path(&out),
                        serde_json::to_string_pretty(&truth).expect("serializable"),
                    )
                    .map_err(|e| (hdpmix::Error::Io(e), 2))?;
                }
                (None, Some(path)) => {
                    let config = RunConfig::from_file(&path).map_err(|e| (e, 2))?;
                    let sizes = config.group_sizes.clone().ok_or_else(|| {
                        (
                            hdpmix::Error::InvalidConfig(
                                "generate --config requires `group_sizes`".into(),
                            ),
                            2,
                        )
                    })?;
                    let hyper = config.hyper().map_err(|e| (e, 2))?;
                    let sample = synth::forward_sample_seeded(&hyper, &sizes, config.seed)
                        .map_err(|e| (e, 2))?;
                    io::write_dataset(&out, &sample.data).map_err(|e| (e, 2))?;
                    io::write_ground_truth(&truth_path(&out), &sample).map_err(|e| (e, 2))?;
                }
                _ => {
                    return Err((
                        hdpmix::Error::InvalidConfig(
                            "generate needs exactly one of --scenario or --config".into(),
                        ),
                        2,
                    ))
                }
            }
            println!("wrote {}", out.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Validate { grid } => {
            let grid = match grid {
                GridArg::Quick => Grid::Quick,
                GridArg::Full => Grid::Full,
            };
            let report = run_validation(grid).map_err(|e| (e, 1))?;
            print!("{report}");
            if report.all_pass() {
                Ok(ExitCode::SUCCESS)
            } else {
                Ok(ExitCode::from(1))
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err((err, code)) => {
            eprintln!("error: {err}");
            ExitCode::from(code)
        }
    }
}
