use std::path::PathBuf;
use std::process::ExitCode;

use atomlight_cli::spec::Preset;
use atomlight_cli::{parse_spec, run_experiment, RunError, SpecError, OUT_DIR_ENV};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "atomlight", version, about = "Atom-light hybrid interferometer experiments")]
struct Cli {
    /// Directory for data files [default: $ATOMLIGHT_OUT_DIR or ./out]
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment described by a spec file
    Run { spec_file: PathBuf },
    /// Run a named preset, optionally overriding keys
    Preset {
        name: String,
        /// Spec entry `key=value`; may be repeated
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
    },
    /// List the available presets
    ListPresets,
}

fn out_dir(cli: &Cli) -> PathBuf {
    cli.out_dir
        .clone()
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"))
}

fn spec_text(command: &Command) -> Result<String, RunError> {
    match command {
        Command::Run { spec_file } => std::fs::read_to_string(spec_file)
            .map_err(|source| RunError::Io { path: spec_file.clone(), source }),
        Command::Preset { name, set } => {
            let mut text = format!("preset = {name}\n");
            for entry in set {
                if !entry.contains('=') {
                    return Err(SpecError::Syntax { line: 0, message: format!("--set expects key=value, got `{entry}`") }.into());
                }
                text.push_str(entry);
                text.push('\n');
            }
            Ok(text)
        }
        Command::ListPresets => unreachable!("handled before reading a spec"),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Command::ListPresets = cli.command {
        for p in Preset::ALL {
            println!("{:<18} {}", p.name(), p.description());
        }
        return ExitCode::SUCCESS;
    }
    let result = spec_text(&cli.command)
        .and_then(|text| parse_spec(&text).map_err(RunError::from))
        .and_then(|spec| run_experiment(&spec, &out_dir(&cli)));
    match result {
        Ok(written) => {
            println!("wrote {}", written.data.display());
            println!("wrote {}", written.manifest.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

