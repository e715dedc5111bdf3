use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use validus_core::cli::{
    cmd_analyze, cmd_classify, cmd_lint, cmd_simplify, cmd_validate, parse_data_arg, CommandOutput, OutputFormat,
    RunConfig, EXIT_INPUT_ERROR,
};
use validus_core::eval::NaPolicy;

/// Validate data against rules, and analyze the rules themselves.
#[derive(Parser)]
#[command(name = "validus", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate rules on data; exit 1 if any entry fails.
    Validate(Options),
    /// Print each rule's validation level.
    Classify(Options),
    /// Flag rules that are tautologies or contradictions.
    Lint(Options),
    /// Find infeasibility, excluded levels, implied bounds and redundancy.
    Analyze(Options),
    /// Rewrite the rule file without changing its solutions.
    Simplify(Options),
}

#[derive(Clone, Copy, ValueEnum)]
enum Policy {
    Propagate,
    Ignore,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct Options {
    #[arg(long, value_name = "FILE")]
    rules: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    schema: Option<PathBuf>,
    /// A table's CSV file; repeat for each table.
    #[arg(long, value_name = "TABLE=FILE", value_parser = parse_data_arg)]
    data: Vec<(String, PathBuf)>,
    #[arg(long, value_enum, default_value = "propagate")]
    na_policy: Policy,
    /// Treat NA entries as failures.
    #[arg(long)]
    strict_na: bool,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Write the report here instead of standard output.
    #[arg(short = 'o', long = "output", value_name = "FILE")]
    output: Option<PathBuf>,
    /// Write messages and the simplification log here instead of standard error.
    #[arg(long, value_name = "FILE")]
    log: Option<PathBuf>,
}

impl From<Options> for RunConfig {
    fn from(o: Options) -> Self {
        RunConfig {
            rules_path: o.rules,
            schema_path: o.schema,
            data_paths: o.data,
            na_policy: match o.na_policy {
                Policy::Propagate => NaPolicy::Propagate,
                Policy::Ignore => NaPolicy::Ignore,
            },
            strict_na: o.strict_na,
            output_format: match o.format {
                Format::Json => OutputFormat::Json,
                Format::Csv => OutputFormat::Csv,
            },
            output_path: o.output,
            log_path: o.log,
        }
    }
}

fn deliver(result: CommandOutput, config: &RunConfig) -> i32 {
    let mut code = result.exit_code;
    if !result.output.is_empty() {
        match &config.output_path {
            Some(path) => {
                if let Err(e) = fs::write(path, &result.output) {
                    eprintln!("error: {}: {e}", path.display());
                    code = EXIT_INPUT_ERROR;
                }
            }
            None => {
                let _ = std::io::stdout().write_all(result.output.as_bytes());
            }
        }
    }
    if !result.messages.is_empty() {
        match &config.log_path {
            Some(path) => {
                if let Err(e) = fs::write(path, &result.messages) {
                    eprintln!("error: {}: {e}", path.display());
                    code = EXIT_INPUT_ERROR;
                }
            }
            None => eprint!("{}", result.messages),
        }
    }
    code
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, options): (fn(&RunConfig) -> CommandOutput, Options) = match cli.command {
        Command::Validate(o) => (cmd_validate, o),
        Command::Classify(o) => (cmd_classify, o),
        Command::Lint(o) => (cmd_lint, o),
        Command::Analyze(o) => (cmd_analyze, o),
        Command::Simplify(o) => (cmd_simplify, o),
    };
    let config = RunConfig::from(options);
    let code = deliver(command(&config), &config);
    ExitCode::from(code as u8)
}
