use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand};
use sightsim::harness::{aggregate, read_csv, run_batch, write_csv, HarnessError, Job, Scenario};

#[derive(Parser)]
#[command(name = "sightsim", version, about = "Seeded task simulations and result tables")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file, or every *.json file in a directory.
    Run {
        path: PathBuf,
        /// Runs per scenario, at seeds seed, seed+1, ...
        #[arg(long, default_value_t = 1)]
        seeds: u64,
        /// Write the results CSV here and print the summary table.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Print records as JSON instead of CSV.
        #[arg(long)]
        json: bool,
        /// Simulated timeout in seconds, overriding the scenario.
        #[arg(long)]
        timeout: Option<f64>,
        /// Worker threads.
        #[arg(long)]
        parallel: Option<usize>,
    },
    /// Print the summary table of a results CSV.
    Aggregate {
        results: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Print the generated scene of a scenario as JSON.
    Scene {
        scenario: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn scenario_files(path: &Path) -> Result<Vec<PathBuf>, HarnessError> {
    let io_err = |e: io::Error| HarnessError::Internal(format!("{}: {e}", path.display()));
    if !path.is_dir() {
        return Ok(vec![path.to_path_buf()]);
    }
    let mut files: Vec<PathBuf> = fs::read_dir(path)
        .map_err(io_err)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(HarnessError::schema(path.display().to_string(), "no scenario files"));
    }
    Ok(files)
}

fn write_out(path: &Path, bytes: &[u8]) -> Result<(), HarnessError> {
    fs::write(path, bytes).map_err(|e| HarnessError::Internal(format!("{}: {e}", path.display())))
}

fn to_json<T: serde::Serialize>(v: &T) -> Result<String, HarnessError> {
    serde_json::to_string_pretty(v).map_err(|e| HarnessError::Internal(e.to_string()))
}

fn execute(cli: Cli) -> Result<(), HarnessError> {
    let mut stdout = io::stdout().lock();
    let print = |out: &mut io::StdoutLock, s: &str| {
        out.write_all(s.as_bytes())
            .map_err(|e| HarnessError::Internal(e.to_string()))
    };
    match cli.command {
        Command::Run {
            path,
            seeds,
            out,
            json,
            timeout,
            parallel,
        } => {
            if timeout.is_some_and(|t| !(t.is_finite() && t > 0.0 && t <= 1e5)) {
                return Err(HarnessError::schema("--timeout", "must be in (0, 100000]"));
            }
            if parallel == Some(0) {
                return Err(HarnessError::schema("--parallel", "must be at least 1"));
            }
            let mut jobs = Vec::new();
            for file in scenario_files(&path)? {
                let scenario = Arc::new(Scenario::load(&file)?);
                for i in 0..seeds {
                    jobs.push(Job {
                        scenario: Arc::clone(&scenario),
                        seed: scenario.seed.wrapping_add(i),
                        timeout_s: timeout,
                    });
                }
            }
            log::info!("running {} jobs", jobs.len());
            let records = run_batch(&jobs, parallel)?;
            let mut csv = Vec::new();
            write_csv(&records, &mut csv)?;
            match &out {
                Some(p) => {
                    write_out(p, &csv)?;
                    if json {
                        print(&mut stdout, &(to_json(&records)? + "\n"))?;
                    } else {
                        print(&mut stdout, &aggregate(&records).to_string())?;
                    }
                }
                None if json => print(&mut stdout, &(to_json(&records)? + "\n"))?,
                None => stdout
                    .write_all(&csv)
                    .map_err(|e| HarnessError::Internal(e.to_string()))?,
            }
        }
        Command::Aggregate { results, json } => {
            let file =
                fs::File::open(&results).map_err(|e| HarnessError::Internal(format!("{}: {e}", results.display())))?;
            let records = read_csv(file)?;
            if records.is_empty() {
                return Err(HarnessError::schema(results.display().to_string(), "no records"));
            }
            let table = aggregate(&records);
            let text = if json {
                to_json(&table)? + "\n"
            } else {
                table.to_string()
            };
            print(&mut stdout, &text)?;
        }
        Command::Scene { scenario, seed } => {
            let s = Scenario::load(&scenario)?;
            let scene = s.build_scene(seed.unwrap_or(s.seed))?;
            print(&mut stdout, &(to_json(&scene)? + "\n"))?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::init();
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
