//! `dplan`: discourse salience analysis and constituent-order planning over
//! annotated documents or plain text.

use std::fs;
use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use discourse_planner::engine::plan_orders;
use discourse_planner::ingest::{annotate_demo, read_document, write_document, Strictness};
use discourse_planner::lexicon::load_lexicon;
use discourse_planner::model::Config;
use discourse_planner::report::{
    build_report, render_orders, render_records, render_table, render_trace,
};
use discourse_planner::scorer::score_document;

#[derive(Parser)]
#[command(
    name = "dplan",
    version,
    about = "Score discourse salience and plan constituent orders"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Report center values, centers and transitions per utterance
    Analyze(RunArgs),
    /// Emit the final constituent orders only
    Order(RunArgs),
    /// Emit the full derivation trace
    Trace(RunArgs),
    /// Annotate plain clause-per-line text and emit a document file
    Annotate(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Input file; standard input when omitted
    input: Option<PathBuf>,

    /// Synonym lexicon: one comma-separated synset per line
    #[arg(long)]
    lexicon: Option<PathBuf>,

    /// Referential distance allowed per word of a referring expression
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u32).range(1..))]
    distance_factor: u32,

    /// Measure referential distance with supplied target lengths
    #[arg(long)]
    use_target_lengths: bool,

    /// Output format
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,

    /// Reject unknown document fields instead of warning
    #[arg(long)]
    strict: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Table,
    Records,
}

fn read_input(path: Option<&PathBuf>) -> Result<String> {
    match path {
        Some(path) => {
            fs::read_to_string(path).with_context(|| format!("cannot read '{}'", path.display()))
        }
        None => {
            let mut buffer = String::new();
            std::io::stdin()
                .read_to_string(&mut buffer)
                .context("cannot read standard input")?;
            Ok(buffer)
        }
    }
}

fn run(command: &Command) -> Result<()> {
    let (args, kind) = match command {
        Command::Analyze(a) => (a, "analyze"),
        Command::Order(a) => (a, "order"),
        Command::Trace(a) => (a, "trace"),
        Command::Annotate(a) => (a, "annotate"),
    };
    let raw = read_input(args.input.as_ref())?;
    let lexicon = load_lexicon(args.lexicon.as_deref())?;

    if kind == "annotate" {
        let document = annotate_demo(&raw, &lexicon)?;
        print!("{}", write_document(&document));
        return Ok(());
    }

    let source = args
        .input
        .as_ref()
        .map(|p| p.display().to_string())
        .unwrap_or_else(|| "stdin".to_string());
    let strictness = if args.strict {
        Strictness::Strict
    } else {
        Strictness::Lenient
    };
    let outcome = read_document(raw.as_bytes(), &source, strictness)?;
    for warning in &outcome.warnings {
        eprintln!("warning: {warning}");
    }

    let config = Config {
        distance_factor: args.distance_factor,
        use_target_lengths: args.use_target_lengths,
        lexicon_path: args.lexicon.clone(),
    };
    let scored = score_document(&outcome.document, &lexicon, &config)?;
    let plans = plan_orders(&scored)?;
    let report = build_report(&scored, &plans);

    let rendered = match (kind, args.format) {
        (_, Format::Records) => render_records(&report),
        ("analyze", Format::Table) => render_table(&report),
        ("order", Format::Table) => render_orders(&report),
        ("trace", Format::Table) => render_trace(&report),
        _ => unreachable!("annotate returned above"),
    };
    print!("{rendered}");
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(error) => {
            eprintln!("error: {error:#}");
            ExitCode::from(1)
        }
    }
}
