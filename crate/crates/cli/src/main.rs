use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use bapkit::ScalarMode;
use bapkit_cli::config::{RunConfig, Suite};
use bapkit_cli::{explain, CliError};
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "bapkit", version, about = "Verify seminorm, basis and approximation constructions at finite truncation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Rational,
    Float,
}

#[derive(Subcommand)]
enum Command {
    /// Run the selected suites and write a certificate.
    Run {
        #[arg(long)]
        config: Option<PathBuf>,
        /// vogt, pelczynski, normability or all; overrides the config selection.
        #[arg(long)]
        suite: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum)]
        mode: Option<Mode>,
    },
    /// Print a table of the checks recorded in a certificate.
    Explain {
        /// Certificate path.
        path: PathBuf,
    },
}

fn run(
    config: Option<PathBuf>,
    suite: Option<String>,
    out: Option<PathBuf>,
    seed: Option<u64>,
    mode: Option<Mode>,
) -> Result<bool, CliError> {
    let mut cfg = match &config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(name) = suite {
        Suite::parse_selection(&name)?;
        cfg.suites = vec![name];
    }
    if let Some(seed) = seed {
        cfg.seed = Some(seed);
    }
    if let Some(mode) = mode {
        cfg.mode = match mode {
            Mode::Rational => ScalarMode::Rational,
            Mode::Float => ScalarMode::Float,
        };
    }
    if out.is_some() {
        cfg.out = out;
    }
    let doc = bapkit_cli::run(cfg)?;
    let json = doc.to_pretty_json();
    match &doc.config.out {
        Some(path) => {
            std::fs::write(path, json + "\n")
                .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?;
            emit(&format!(
                "{}certificate written to {}\n",
                explain::render(&doc),
                path.display()
            ));
        }
        None => emit(&(json + "\n")),
    }
    Ok(doc.passed())
}

/// Writes to stdout, ignoring a closed pipe.
fn emit(text: &str) {
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run {
            config,
            suite,
            out,
            seed,
            mode,
        } => run(config, suite, out, seed, mode),
        Command::Explain { path } => explain::explain(&path).map(|text| {
            emit(&text);
            true
        }),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("bapkit: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
