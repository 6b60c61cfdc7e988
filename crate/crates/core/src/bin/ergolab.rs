use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ergolab::experiment::{demo_config, run, threads_from_env, ExperimentConfig, ExperimentReport, DEMOS};
use ergolab::systems::catalog;

#[derive(Parser)]
#[command(name = "ergolab", version, about = "Numerical ergodic theory experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a JSON config.
    Run {
        config: PathBuf,
        /// Exit with status 2 when a ground-truth check fails.
        #[arg(long)]
        check: bool,
        /// Output directory; overrides `output_dir` in the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the built-in systems as JSON.
    ListSystems,
    /// Run a built-in experiment with ground-truth checks.
    Demo {
        #[arg(value_parser = clap::builder::PossibleValuesParser::new(DEMOS))]
        name: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn print_checks(report: &ExperimentReport) {
    for c in &report.checks {
        let tag = if c.pass { "PASS" } else { "FAIL" };
        println!("{tag} {}: expected {}, observed {}", c.quantity, c.expected, c.observed);
    }
    for (task, why) in &report.skipped {
        println!("skipped {task}: {why}");
    }
}

fn execute(cfg: &ExperimentConfig, out: Option<PathBuf>, check: bool) -> Result<ExitCode, ergolab::Error> {
    let report = run(cfg)?;
    let dir = out.or_else(|| cfg.output_dir.clone()).unwrap_or_else(|| PathBuf::from("ergolab-out"));
    report.write_to(&dir)?;
    println!("wrote {}", dir.join("report.json").display());
    print_checks(&report);
    if check && !report.checks_passed {
        return Ok(ExitCode::from(2));
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let threads = match threads_from_env() {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    if let Some(n) = threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    let result = match cli.command {
        Command::Run { config, check, out } => ExperimentConfig::load(&config).and_then(|cfg| execute(&cfg, out, check)),
        Command::ListSystems => serde_json::to_value(catalog())
            .and_then(|v| serde_json::to_string_pretty(&v))
            .map(|s| {
                let _ = writeln!(std::io::stdout(), "{s}");
                ExitCode::SUCCESS
            })
            .map_err(ergolab::Error::from),
        Command::Demo { name, out } => demo_config(&name).and_then(|cfg| {
            let dir = out.unwrap_or_else(|| PathBuf::from(format!("ergolab-demo-{name}")));
            execute(&cfg, Some(dir), true)
        }),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
