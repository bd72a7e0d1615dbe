use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use pairdecay::cli::{load_config, run_scenario, Format, Overrides};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

/// Runs one scenario described by a TOML file.
#[derive(Debug, Parser)]
#[command(name = "pairdecay", version)]
struct Args {
    /// Scenario file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; defaults to `out_dir` from the file, else ./out.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the seed in the file.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    /// Also write SVG figures.
    #[arg(long)]
    svg: bool,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let overrides = Overrides {
        out_dir: args.out,
        seed: args.seed,
        format: args.format.map(|f| match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        }),
        emit_svg: args.svg,
    };
    let result = load_config(&args.config, &overrides).and_then(|c| run_scenario(&c));
    match result {
        Ok(report) => {
            for f in &report.files_written {
                println!("{}", f.display());
            }
            ExitCode::from(report.exit_code as u8)
        }
        Err(e) => {
            eprintln!("{}: {e}", e.name());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
