use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use epra_core::experiment::{run, ExperimentKind, ExperimentSpec, InstanceSource};
use epra_core::net::{EdgeDefaults, DEFAULT_F_MAX};
use epra_core::solver::DEFAULT_MAX_PATHS;
use epra_core::{compile, evaluate, ModelOptions, NetworkInstance, Solution, SolveOptions};

/// Entangled-pair reservation and fidelity-guaranteed routing planner.
#[derive(Parser, Debug)]
#[command(name = "epra", version)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// Candidate paths kept per request
    #[arg(long, global = true, default_value_t = DEFAULT_MAX_PATHS)]
    max_paths: usize,
    /// Enforce on-demand capacity in every joint scenario (at most 3 requests)
    #[arg(long, global = true)]
    joint_scenarios: bool,
    /// Charge node energy and setup per reserved pair
    #[arg(long, global = true)]
    per_pair_node_cost: bool,
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    /// Seconds before the search returns its best plan so far
    #[arg(long, global = true)]
    time_limit: Option<f64>,
    /// Write output here instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve an instance and print the plan as JSON
    Solve { instance: PathBuf },
    /// Pair counts per phase as every request's requirement varies
    SweepFidelity {
        instance: PathBuf,
        #[arg(long)]
        from: f64,
        #[arg(long)]
        to: f64,
        #[arg(long)]
        step: f64,
    },
    /// Cost split as the total number of reserved pairs is pinned
    SweepReservation {
        instance: PathBuf,
        #[arg(long)]
        from: u64,
        #[arg(long)]
        to: u64,
    },
    /// Stochastic vs expected-value vs perfect-information cost on random requests
    CompareModels {
        /// Instance whose links and costs are used; its requests are ignored
        #[arg(required_unless_present = "topology", conflicts_with = "topology")]
        instance: Option<PathBuf>,
        /// Built-in topology: nsfnet, line(k) or grid(a,b)
        #[arg(long)]
        topology: Option<String>,
        /// Base fidelity of every link of a built-in topology
        #[arg(long, default_value_t = EdgeDefaults::default().base_fidelity)]
        base_fidelity: f64,
        /// Comma-separated request counts
        #[arg(long, value_delimiter = ',', required = true)]
        requests: Vec<usize>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 5)]
        samples: usize,
        /// Spacing of the requirement grid
        #[arg(long, default_value_t = 0.01)]
        step: f64,
        #[arg(long, default_value_t = DEFAULT_F_MAX)]
        f_max: f64,
    },
    /// Compare the solver against exhaustive enumeration on a small instance
    OracleCheck { instance: PathBuf },
    /// Re-check a saved plan against an instance
    Evaluate { instance: PathBuf, solution: PathBuf },
    /// Print the deterministic-equivalent program in LP-style text
    DumpModel { instance: PathBuf },
}

impl Global {
    fn options(&self) -> Result<SolveOptions> {
        let time_limit = match self.time_limit {
            Some(s) if s.is_finite() && s > 0.0 => Some(Duration::from_secs_f64(s)),
            Some(s) => bail!("--time-limit must be positive, got {s}"),
            None => None,
        };
        if self.threads == 0 {
            bail!("--threads must be at least 1");
        }
        Ok(SolveOptions {
            model: ModelOptions {
                joint_scenarios: self.joint_scenarios,
                per_pair_node_cost: self.per_pair_node_cost,
            },
            max_paths: self.max_paths,
            threads: self.threads,
            time_limit,
            forced_reservation: None,
        })
    }
}

fn execute(cli: Cli) -> Result<String> {
    let options = cli.global.options()?;
    let spec = |kind, instance: PathBuf| ExperimentSpec {
        kind,
        instance: InstanceSource::File(instance),
        options: options.clone(),
    };
    let spec = match cli.command {
        Command::Solve { instance } => spec(ExperimentKind::Solve, instance),
        Command::SweepFidelity { instance, from, to, step } => spec(ExperimentKind::SweepFidelity { from, to, step }, instance),
        Command::SweepReservation { instance, from, to } => spec(ExperimentKind::SweepReservation { from, to }, instance),
        Command::OracleCheck { instance } => spec(ExperimentKind::OracleCheck, instance),
        Command::CompareModels {
            instance,
            topology,
            base_fidelity,
            requests,
            seed,
            samples,
            step,
            f_max,
        } => {
            let source = match (instance, topology) {
                (Some(path), _) => InstanceSource::File(path),
                (None, Some(name)) => InstanceSource::Topology {
                    name,
                    defaults: EdgeDefaults {
                        base_fidelity,
                        ..EdgeDefaults::default()
                    },
                },
                (None, None) => bail!("compare-models needs an instance or --topology"),
            };
            ExperimentSpec {
                kind: ExperimentKind::CompareModels {
                    requests,
                    seed,
                    samples,
                    step,
                    f_max,
                },
                instance: source,
                options,
            }
        }
        Command::Evaluate { instance, solution } => {
            let inst = NetworkInstance::load(&instance)?;
            let text = fs::read_to_string(&solution).with_context(|| format!("reading {}", solution.display()))?;
            let sol: Solution = serde_json::from_str(&text).with_context(|| format!("parsing {}", solution.display()))?;
            let ev = evaluate(&sol, &inst, options.model)?;
            let mut out = serde_json::to_string_pretty(&ev)?;
            out.push('\n');
            return Ok(out);
        }
        Command::DumpModel { instance } => {
            let inst = NetworkInstance::load(&instance)?;
            return Ok(compile(&inst, options.model)?.dump());
        }
    };
    Ok(run(&spec)?)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out = cli.global.out.clone();
    let text = match execute(cli) {
        Ok(text) => text,
        Err(err) => {
            eprintln!("error: {err:#}");
            return ExitCode::FAILURE;
        }
    };
    match out {
        Some(path) => {
            if let Err(err) = fs::write(&path, text) {
                eprintln!("error: writing {}: {err}", path.display());
                return ExitCode::FAILURE;
            }
        }
        None => print!("{text}"),
    }
    ExitCode::SUCCESS
}
