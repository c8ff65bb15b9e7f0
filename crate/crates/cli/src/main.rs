use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use dissipalg_cli::{emit, parse_config, run, Command, ConfigCode, ConfigError, Format, Overrides, RunError};

/// Time-deformed products and their long-time contraction for GKSL models.
#[derive(Parser)]
#[command(name = "dissipalg", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,

    /// Model config (JSON).
    #[arg(long, global = true)]
    model: Option<PathBuf>,

    /// Comma-separated times in units of 1/γ_max.
    #[arg(long, global = true, value_delimiter = ',', allow_negative_numbers = true)]
    times: Option<Vec<f64>>,

    /// pauli, matrix_units or fock_ladder.
    #[arg(long, global = true)]
    basis: Option<String>,

    /// Output format; `report` defaults to markdown, everything else to json.
    #[arg(long, global = true, value_enum)]
    format: Option<FormatArg>,

    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Relative spectral tolerance.
    #[arg(long, global = true)]
    tol_spec: Option<f64>,

    /// Relative coefficient tolerance.
    #[arg(long, global = true)]
    tol_coeff: Option<f64>,
}

#[derive(Subcommand, Clone, Copy)]
enum Cmd {
    /// Λ♯ₜ applied to every basis element.
    Evolve,
    /// Product, commutator and anticommutator structure constants at each time.
    ProductTable,
    /// Long-time limit of the deformed product.
    Contract,
    /// Closed-form checks of a zoo model.
    ZooRun,
    /// Markdown summary of the contraction.
    Report,
}

#[derive(ValueEnum, Clone, Copy)]
enum FormatArg {
    Json,
    Csv,
    Markdown,
}

fn execute(cli: &Cli) -> Result<(), RunError> {
    let command = match cli.command {
        Cmd::Evolve => Command::Evolve,
        Cmd::ProductTable => Command::ProductTable,
        Cmd::Contract => Command::Contract,
        Cmd::ZooRun => Command::ZooRun,
        Cmd::Report => Command::Report,
    };
    let path = cli.model.as_ref().ok_or_else(|| ConfigError {
        code: ConfigCode::MissingField,
        message: "no model config given".into(),
        key: Some("--model".into()),
        line: None,
    })?;
    let text = std::fs::read_to_string(path).map_err(|source| RunError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let spec = parse_config(&text)?;
    let overrides = Overrides {
        times: cli.times.clone(),
        basis: cli.basis.clone(),
        tol_spec: cli.tol_spec,
        tol_coeff: cli.tol_coeff,
    };
    let bundle = run(command, &spec, &overrides)?;
    let format = match (cli.format, command) {
        (Some(FormatArg::Json), _) => Format::Json,
        (Some(FormatArg::Csv), _) => Format::Csv,
        (Some(FormatArg::Markdown), _) | (None, Command::Report) => Format::Markdown,
        (None, _) => Format::Json,
    };
    emit(&bundle, format, cli.out.as_deref())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    // Sequential kernels keep output byte-identical across runs.
    faer::set_global_parallelism(faer::Par::Seq);
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code())
        }
    }
}
