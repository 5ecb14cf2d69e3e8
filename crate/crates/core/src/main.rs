use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use qite_pde::experiment::{self, RunConfig};
use qite_pde::{BoundaryCondition, Error};

/// Largest Pauli-vs-stencil deviation accepted by `validate-hamiltonian`.
const HAMILTONIAN_TOLERANCE: f64 = 1e-12;

#[derive(Parser)]
#[command(
    name = "qite-pde",
    version,
    about = "Heat-equation runs on an emulated QITE solver"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one configuration and write its CSV and JSON artifacts.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the output directory from the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the configuration once per domain size.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        domains: Vec<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare the Pauli decomposition with the direct stencil matrix.
    ValidateHamiltonian {
        /// Qubits per axis; one value is reused for every axis.
        #[arg(long, value_delimiter = ',', required = true)]
        qubits: Vec<usize>,
        /// Boundary condition per axis; one value is reused for every axis.
        #[arg(long, value_delimiter = ',', required = true)]
        bc: Vec<BoundaryCondition>,
        #[arg(long, default_value_t = 1)]
        dim: usize,
    },
    /// Report the ground state of the configured Hamiltonian.
    GroundState {
        #[arg(long)]
        config: PathBuf,
        /// Also estimate it from a long QITE run.
        #[arg(long)]
        heuristic: bool,
    },
}

fn per_axis<T: Clone>(v: Vec<T>, dim: usize, what: &str) -> Result<Vec<T>, Error> {
    match v.len() {
        1 => Ok(vec![v[0].clone(); dim]),
        n if n == dim => Ok(v),
        n => Err(Error::Usage(format!("{n} {what} values for {dim} axes"))),
    }
}

fn load(config: &PathBuf, out: Option<PathBuf>) -> Result<RunConfig, Error> {
    let mut cfg = RunConfig::load(config)?;
    if let Some(o) = out {
        cfg.outputs = o;
    }
    Ok(cfg)
}

fn print_json<S: serde::Serialize>(v: &S) -> Result<(), Error> {
    println!("{}", serde_json::to_string_pretty(v)?);
    Ok(())
}

fn execute(cli: Cli) -> Result<i32, Error> {
    match cli.command {
        Command::Run { config, out } => {
            let cfg = load(&config, out)?;
            let o = experiment::run_experiment(&cfg)?;
            println!(
                "fidelity {:.12}  mse {:.6e}  log10 ratio {:.6e}  ({} steps, {:.1} s)",
                o.summary.final_fidelity,
                o.summary.final_mse,
                o.summary.final_log10_ratio,
                o.summary.steps_completed,
                o.summary.runtime_seconds
            );
            Ok(0)
        }
        Command::Sweep {
            config,
            domains,
            out,
        } => {
            let cfg = load(&config, out)?;
            let sw = experiment::sweep_domains(&cfg, &domains)?;
            for (d, r) in &sw.runs {
                match r {
                    Ok(o) => println!(
                        "D={d}: fidelity {:.12}  mse {:.6e}",
                        o.summary.final_fidelity, o.summary.final_mse
                    ),
                    Err(e) => println!("D={d}: failed: {e}"),
                }
            }
            Ok(sw.exit_code())
        }
        Command::ValidateHamiltonian { qubits, bc, dim } => {
            if dim == 0 || dim > 2 {
                return Err(Error::Usage(format!("dimension {dim} not supported")));
            }
            let qubits = per_axis(qubits, dim, "qubit")?;
            let bc = per_axis(bc, dim, "boundary")?;
            let report = experiment::validate_hamiltonian(&qubits, &bc)?;
            print_json(&report)?;
            Ok(if report.max_abs_deviation > HAMILTONIAN_TOLERANCE {
                3
            } else {
                0
            })
        }
        Command::GroundState { config, heuristic } => {
            let cfg = load(&config, None)?;
            print_json(&experiment::ground_state_report(&cfg, heuristic)?)?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
