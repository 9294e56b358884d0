use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use twowell::runner::{self, Format, RunError, RunOptions};

#[derive(Parser)]
#[command(
    name = "twowell",
    version,
    about = "Entanglement sweeps for two-well spinor condensates"
)]
struct Cli {
    /// Output table format, overriding the config.
    #[arg(long, global = true, value_enum)]
    format: Option<FormatArg>,
    /// Worker threads; 0 picks one per core.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the scenario described by a JSON config.
    Run { config: PathBuf },
    /// Check a config without running it.
    Validate { config: PathBuf },
    /// Print a built-in config (fig2, fig3, fig4).
    Preset {
        name: String,
        /// Write to this file instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global() {
        eprintln!("error: cannot start thread pool: {e}");
        return ExitCode::from(1);
    }
    let result = match cli.command {
        Command::Run { config } => run(&config, cli.format),
        Command::Validate { config } => validate(&config),
        Command::Preset { name, out } => preset(&name, out, cli.format),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(config: &Path, format: Option<FormatArg>) -> Result<(), RunError> {
    let options = RunOptions {
        format: format.map(Format::from),
    };
    let summary = runner::run_file(config, &options)?;
    println!("wrote {} rows to {}", summary.rows, summary.table_path.display());
    println!("manifest: {}", summary.manifest_path.display());
    if let Some(dev) = summary.max_deviation {
        println!("max relative deviation: {dev:.3e}");
    }
    Ok(())
}

fn validate(path: &Path) -> Result<(), RunError> {
    let text = fs::read_to_string(path).map_err(|e| RunError::Io(format!("cannot read {}: {e}", path.display())))?;
    let config = runner::parse_config(&text).map_err(|d| RunError::Config(vec![d]))?;
    let diags = runner::validate(&config);
    if !diags.is_empty() {
        return Err(RunError::Config(diags));
    }
    println!("{}: ok", path.display());
    Ok(())
}

fn preset(name: &str, out: Option<PathBuf>, format: Option<FormatArg>) -> Result<(), RunError> {
    let mut config =
        runner::preset(name).map_err(|e| RunError::Config(vec![runner::Diagnostic::new("preset", e.to_string())]))?;
    if let Some(f) = format {
        let f = Format::from(f);
        config.output.path = format!("{name}.{}", f.extension());
        config.output.format = f;
    }
    let text = serde_json::to_string_pretty(&config).expect("config is plain data") + "\n";
    match out {
        Some(path) => fs::write(&path, text).map_err(|e| RunError::Io(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
