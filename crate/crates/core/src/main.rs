use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use holosparse::bench::{preset, preset_names, results_csv, run_experiment, Experiment, ExperimentConfig, MapConfig};
use holosparse::{validate, Error, Result};

#[derive(Parser)]
#[command(
    name = "holosparse",
    version,
    about = "Wavenumber-domain HMIMO channel estimation benchmarks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment or variance-map config and write CSV.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long, env = "HOLOSPARSE_THREADS")]
        threads: Option<usize>,
        /// Allow full-size (long-running) configs.
        #[arg(long)]
        long: bool,
    },
    /// List presets, or print one as a config file.
    Preset {
        name: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the built-in invariant checks.
    Validate,
    /// Dump one channel realization (header.json, h_a.csv, h.csv).
    ExportChannel {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 0)]
        trial: usize,
        #[arg(long, default_value_t = 0)]
        sweep_index: usize,
    },
}

fn write_or_print(out: Option<&PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(p) => Ok(fs::write(p, text)?),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn is_map_config(text: &str) -> Result<bool> {
    let v: serde_json::Value = serde_json::from_str(text).map_err(|e| Error::config("<document>", e.to_string()))?;
    Ok(v.get("kind").and_then(|k| k.as_str()) == Some("variance-map"))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run {
            config,
            out,
            seed,
            trials,
            threads,
            long,
        } => {
            let text = fs::read_to_string(&config)?;
            if is_map_config(&text)? {
                let mut map = MapConfig::from_json_str(&text)?;
                if let Some(s) = seed {
                    map.master_seed = s;
                }
                return write_or_print(out.as_ref(), &map.run()?);
            }
            let mut cfg = ExperimentConfig::from_json_str(&text)?;
            if let Some(s) = seed {
                cfg.master_seed = s;
            }
            if let Some(t) = trials {
                cfg.trials = t;
            }
            cfg.validate()?;
            if cfg.long_run && !long {
                return Err(Error::config("long_run", "full-size config; pass --long to run it"));
            }
            let output = run_experiment(&cfg, threads)?;
            if !output.failures.is_empty() {
                eprintln!("{} trial(s) failed and were excluded", output.failures.len());
            }
            write_or_print(out.as_ref(), &results_csv(&output.rows))
        }
        Command::Preset { name: None, .. } => {
            for n in preset_names() {
                println!("{n}");
            }
            Ok(())
        }
        Command::Preset { name: Some(name), out } => write_or_print(out.as_ref(), &preset(&name)?.to_json_pretty()),
        Command::Validate => {
            let results = validate::run_all();
            let passed = results.iter().filter(|r| r.passed).count();
            for r in &results {
                println!("[{}] {}: {}", if r.passed { "PASS" } else { "FAIL" }, r.name, r.detail);
            }
            println!("{passed} passed, {} failed", results.len() - passed);
            if passed == results.len() {
                Ok(())
            } else {
                Err(Error::invalid("invariant checks failed"))
            }
        }
        Command::ExportChannel {
            config,
            out,
            seed,
            trial,
            sweep_index,
        } => {
            let text = fs::read_to_string(&config)?;
            let mut cfg = ExperimentConfig::from_json_str(&text)?;
            if let Some(s) = seed {
                cfg.master_seed = s;
            }
            let exp = Experiment::new(cfg)?;
            exp.channel(sweep_index, trial)?.export(&out)?;
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
