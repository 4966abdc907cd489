use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use pprog_cli::{cmd_export, cmd_run, eval_mode, parse_tolerance, CliError, Format, RunConfig};

#[derive(Parser)]
#[command(name = "pprog", version, about = "Evaluate P-programs and decide whether their contexts admit one global model")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Analyze a program and print a report.
    ///
    /// Exit status: 0 non-contextual, 2 contextual, 3 inconsistent or
    /// infeasible, 1 on any error.
    Run(RunArgs),
    /// Write one CSV per context, the joint table and the scenario dump.
    Export(ExportArgs),
}

#[derive(Args)]
struct EvalArgs {
    /// Enumerate every outcome exactly (the default).
    #[arg(long, conflicts_with_all = ["samples", "seed"])]
    exact: bool,
    /// Sample each context this many times instead of its declared count.
    #[arg(long)]
    samples: Option<u64>,
    /// Sample with this seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Fixed tolerance for comparing probabilities, as a decimal or n/d.
    #[arg(long)]
    tolerance: Option<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Text,
    Json,
}

#[derive(Args)]
struct RunArgs {
    path: PathBuf,
    #[command(flatten)]
    eval: EvalArgs,
    #[arg(long, value_enum, default_value = "text")]
    format: FormatArg,
    /// Include the full scenario listing in the report.
    #[arg(long)]
    dump_scenario: bool,
    /// Also decide whether the scenario admits any model at all.
    #[arg(long)]
    lp: bool,
}

#[derive(Args)]
struct ExportArgs {
    path: PathBuf,
    #[command(flatten)]
    eval: EvalArgs,
    /// Directory to write into.
    #[arg(long, short, default_value = ".")]
    out: PathBuf,
    /// Also write scenario.txt when the program maps onto a scenario.
    #[arg(long)]
    scenario: bool,
}

fn run(cli: Cli) -> Result<u8, CliError> {
    match cli.command {
        Command::Run(args) => {
            let config = RunConfig {
                mode: eval_mode(args.eval.samples, args.eval.seed),
                tolerance: parse_tolerance(args.eval.tolerance.as_deref())?,
                lp: args.lp,
                dump_scenario: args.dump_scenario,
                format: match args.format {
                    FormatArg::Text => Format::Text,
                    FormatArg::Json => Format::Json,
                },
            };
            let (report, code) = cmd_run(&args.path, &config)?;
            print!("{report}");
            Ok(code)
        }
        Command::Export(args) => {
            let mode = eval_mode(args.eval.samples, args.eval.seed);
            let tolerance = parse_tolerance(args.eval.tolerance.as_deref())?;
            let (written, warning) = cmd_export(&args.path, &args.out, mode, tolerance, args.scenario)?;
            for file in written {
                println!("{}", file.display());
            }
            if let Some(w) = warning {
                eprintln!("note: no joint or scenario written: {w}");
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
