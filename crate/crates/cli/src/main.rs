use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use spincat::{execute, load_config, scenario_config, RunError, ScenarioConfig};

#[derive(Parser)]
#[command(name = "spincat", version, about = "Collective-spin cat-state experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the scenario described by a config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Override a scenario key, e.g. `--set n_a=40`.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        /// Output directory; defaults to the config file's directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a named scenario with its defaults.
    Scenario {
        name: String,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Run the acceptance checks and print one line per criterion.
    Verify,
}

fn init_threads() {
    let Ok(raw) = std::env::var("SPINCAT_THREADS") else { return };
    match raw.parse::<usize>() {
        Ok(n) if n > 0 => {
            if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                log::warn!("could not size thread pool: {e}");
            }
        }
        _ => log::warn!("ignoring SPINCAT_THREADS={raw:?}"),
    }
}

fn run(cfg: ScenarioConfig, base: PathBuf) -> Result<(), RunError> {
    let (path, outcome) = execute(&cfg, &base)?;
    println!("scenario {} -> {}", cfg.scenario.name(), path.display());
    for line in &outcome.summary {
        println!("  {line}");
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    init_threads();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, overrides, out } => load_config(&config, &overrides).and_then(|cfg| {
            let base = out.unwrap_or_else(|| config.parent().map(PathBuf::from).unwrap_or_default());
            run(cfg, base)
        }),
        Command::Scenario { name, overrides, out } => scenario_config(&name, &overrides).and_then(|cfg| run(cfg, out)),
        Command::Verify => {
            let reports = spincat_core::verify::run_all();
            for r in &reports {
                println!("{r}");
            }
            let failed = reports.iter().filter(|r| !r.passed).count();
            println!("{} of {} criteria passed", reports.len() - failed, reports.len());
            return if failed == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE };
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("spincat: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
