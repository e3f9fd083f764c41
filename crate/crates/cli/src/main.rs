use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rayon::prelude::*;

use nilgrowth_cli::artifact::{csv_bytes, write_atomic, write_outcome, write_truncated};
use nilgrowth_cli::plot::plot_table;
use nilgrowth_cli::{load, run_scenario, CliError, Overrides, ScenarioConfig};

#[derive(Parser)]
#[command(name = "nilgrowth", version, about = "Growth of product sets and convolution powers in nilpotent groups")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the scenarios in one or more config files.
    Run {
        #[arg(required = true)]
        configs: Vec<PathBuf>,
        /// Output directory for artifacts.
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Number of scenarios run in parallel.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Cap on enumerated states.
        #[arg(long)]
        cap: Option<usize>,
        /// Seed for every randomized scenario.
        #[arg(long)]
        seed: Option<u64>,
        /// Number of random trials.
        #[arg(long)]
        trials: Option<usize>,
    },
    /// Reshape artifacts into a long-format (series, x, y) CSV.
    Plot {
        #[arg(required = true)]
        artifacts: Vec<PathBuf>,
        /// Output file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run_one(cfg: &ScenarioConfig, ov: &Overrides, out: &std::path::Path) -> Result<String, CliError> {
    match run_scenario(cfg, ov) {
        Ok(o) => {
            let paths = write_outcome(out, cfg, ov, &o)?;
            let shown: Vec<String> = paths.iter().map(|p| p.display().to_string()).collect();
            if o.truncated {
                return Err(CliError::Scenario {
                    scenario: cfg.name.clone(),
                    source: nilgrowth::Error::CapExceeded { cap: ov.cap.or(cfg.cap).unwrap_or(nilgrowth::DEFAULT_STATE_CAP), reached: 0 },
                });
            }
            Ok(format!("{}: wrote {}", cfg.name, shown.join(", ")))
        }
        Err(e) => {
            if matches!(e, nilgrowth::Error::CapExceeded { .. }) {
                write_truncated(out, cfg, ov, &e)?;
            }
            Err(CliError::Scenario { scenario: cfg.name.clone(), source: e })
        }
    }
}

fn run(configs: &[PathBuf], out: PathBuf, jobs: usize, ov: Overrides) -> Result<(), CliError> {
    let mut scenarios = Vec::new();
    for path in configs {
        scenarios.extend(load(path)?);
    }
    let mut names: Vec<&str> = scenarios.iter().map(|s| s.name.as_str()).collect();
    names.sort_unstable();
    if let Some(w) = names.windows(2).find(|w| w[0] == w[1]) {
        return Err(CliError::Config { path: String::new(), msg: format!("duplicate scenario name {:?}", w[0]) });
    }
    std::fs::create_dir_all(&out).map_err(|e| CliError::io(&out, e))?;
    let results: Vec<Result<String, CliError>> = if jobs > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| CliError::Config { path: String::new(), msg: e.to_string() })?;
        pool.install(|| scenarios.par_iter().map(|c| run_one(c, &ov, &out)).collect())
    } else {
        scenarios.iter().map(|c| run_one(c, &ov, &out)).collect()
    };
    let mut first_err = None;
    for r in results {
        match r {
            Ok(line) => println!("{line}"),
            Err(e) => {
                eprintln!("error: {e}");
                first_err.get_or_insert(e);
            }
        }
    }
    first_err.map_or(Ok(()), Err)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { configs, out, jobs, cap, seed, trials } => run(&configs, out, jobs, Overrides { seed, cap, trials }),
        Command::Plot { artifacts, out } => plot_table(&artifacts).and_then(|t| {
            let bytes = csv_bytes(&t)?;
            match out {
                Some(p) => write_atomic(&p, &bytes),
                None => {
                    use std::io::Write;
                    std::io::stdout().write_all(&bytes).map_err(|e| CliError::io(std::path::Path::new("<stdout>"), e))
                }
            }
        }),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            if !matches!(e, CliError::Scenario { .. }) {
                eprintln!("error: {e}");
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
