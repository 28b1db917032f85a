use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use nmbr9_core::oracle::best_score_bruteforce;
use nmbr9_core::regex_model::model::export_model;
use nmbr9_core::rules::{Deck, Instance, Variant, VariantKind, DEFAULT_GRID, DEFAULT_LEVELS};
use nmbr9_core::shapes::{parse_catalog_with_source, ShapeCatalog};
use nmbr9_core::solution::{render_state, SolutionDocument, FORMAT_VERSION};
use nmbr9_core::solver::{play_greedy, sample_deck, solve, LevelOrder, ProofStatus, SearchConfig};

const EXIT_LIMITED: u8 = 2;
const EXIT_USAGE: u8 = 64;
const EXIT_DATA: u8 = 65;
const EXIT_IO: u8 = 74;

/// Exact solver workbench for the Nmbr9 stacking puzzle.
#[derive(Parser)]
#[command(name = "nmbr9", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Maximize the score with branch and bound.
    Solve(SolveArgs),
    /// Enumerate every play of a tiny instance.
    Oracle(OracleArgs),
    /// Write the constraint model of an instance.
    Export(ExportArgs),
    /// Replay a solution document and draw each level.
    Render(RenderArgs),
    /// Sample a deck from a seed, optionally playing it greedily.
    GenDeck(GenDeckArgs),
}

#[derive(Args)]
struct InstanceArgs {
    /// Variant `F-m-c-k` or `K-m-c-k`.
    #[arg(long)]
    variant: String,
    /// Fixed deck for K variants, e.g. `0,3,3,9`.
    #[arg(long)]
    deck: Option<String>,
    #[arg(long, default_value_t = DEFAULT_GRID)]
    grid: usize,
    #[arg(long, default_value_t = DEFAULT_LEVELS)]
    levels: usize,
    /// Shape catalog file replacing the bundled shapes.
    #[arg(long)]
    catalog: Option<PathBuf>,
}

#[derive(Args)]
struct Outputs {
    /// Write the result here instead of stdout.
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Append a run record (one JSON object per line).
    #[arg(long)]
    log: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum LevelOrderArg {
    Descending,
    Ascending,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    #[command(flatten)]
    out: Outputs,
    /// Seconds before the search gives up its proof.
    #[arg(long)]
    time_limit: Option<f64>,
    #[arg(long)]
    node_limit: Option<u64>,
    #[arg(long, default_value_t = 1)]
    threads: usize,
    /// Disable bound pruning.
    #[arg(long)]
    no_bound: bool,
    /// Drop the level-area term from the bound.
    #[arg(long)]
    no_area: bool,
    /// Also try levels above 1 for the first card.
    #[arg(long)]
    no_first_level: bool,
    #[arg(long, value_enum, default_value = "descending")]
    level_order: LevelOrderArg,
}

#[derive(Args)]
struct OracleArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    #[command(flatten)]
    out: Outputs,
    #[arg(long)]
    node_limit: Option<u64>,
    /// Allow decks longer than 4 cards.
    #[arg(long)]
    force: bool,
}

#[derive(Args)]
struct ExportArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    #[command(flatten)]
    out: Outputs,
}

#[derive(Args)]
struct RenderArgs {
    /// Solution document written by `solve` or `gen-deck --play`.
    solution: PathBuf,
    /// Catalog to rebuild the instance with (defaults to the recorded one).
    #[arg(long)]
    catalog: Option<PathBuf>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct GenDeckArgs {
    #[arg(long)]
    variant: String,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_GRID)]
    grid: usize,
    #[arg(long, default_value_t = DEFAULT_LEVELS)]
    levels: usize,
    #[arg(long)]
    catalog: Option<PathBuf>,
    /// Play the deck greedily and emit a solution document.
    #[arg(long)]
    play: bool,
    #[command(flatten)]
    out: Outputs,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Data(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => EXIT_USAGE,
            Failure::Data(_) => EXIT_DATA,
            Failure::Io(_) => EXIT_IO,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Data(m) | Failure::Io(m) => m,
        }
    }
}

fn data<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Data(e.to_string())
}

fn io_error(path: &Path, e: std::io::Error) -> Failure {
    Failure::Io(format!("{}: {e}", path.display()))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Solve(args) => cmd_solve(args),
        Command::Oracle(args) => cmd_oracle(args),
        Command::Export(args) => cmd_export(args),
        Command::Render(args) => cmd_render(args),
        Command::GenDeck(args) => cmd_gen_deck(args),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("nmbr9: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

fn load_catalog(path: Option<&Path>) -> Result<ShapeCatalog, Failure> {
    match path {
        None => Ok(ShapeCatalog::bundled()),
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| io_error(path, e))?;
            parse_catalog_with_source(&text, &path.display().to_string()).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))
        }
    }
}

fn build_instance(args: &InstanceArgs) -> Result<Arc<Instance>, Failure> {
    let variant: Variant = args.variant.parse().map_err(data)?;
    let deck = match &args.deck {
        Some(text) => Some(text.parse::<Deck>().map_err(data)?),
        None => None,
    };
    let catalog = load_catalog(args.catalog.as_deref())?;
    Instance::new(variant, args.grid, args.levels, deck, catalog).map(Arc::new).map_err(data)
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| io_error(path, e)),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct RunRecord<'a> {
    format_version: u32,
    timestamp: u64,
    command: &'a str,
    instance: String,
    config: Value,
    result: Value,
    stats: Value,
    artifacts: Value,
}

fn append_log(path: Option<&Path>, record: &RunRecord<'_>) -> Result<(), Failure> {
    let Some(path) = path else { return Ok(()) };
    let mut line = serde_json::to_string(record).expect("records serialize");
    line.push('\n');
    let mut file = OpenOptions::new().create(true).append(true).open(path).map_err(|e| io_error(path, e))?;
    file.write_all(line.as_bytes()).map_err(|e| io_error(path, e))
}

fn now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

fn artifacts(out: &Outputs) -> Value {
    json!({ "output": out.output.as_ref().map(|p| p.display().to_string()) })
}

fn cmd_solve(args: SolveArgs) -> Result<u8, Failure> {
    let instance = build_instance(&args.instance)?;
    if args.threads == 0 {
        return Err(Failure::Usage("--threads must be at least 1".into()));
    }
    let time_limit = match args.time_limit {
        Some(t) if !(t > 0.0 && t.is_finite()) => return Err(Failure::Usage("--time-limit must be positive".into())),
        Some(t) => Some(Duration::from_secs_f64(t)),
        None => None,
    };
    if args.node_limit == Some(0) {
        return Err(Failure::Usage("--node-limit must be positive".into()));
    }
    let config = SearchConfig {
        node_limit: args.node_limit,
        time_limit,
        threads: args.threads,
        upper_bound: !args.no_bound,
        area_monotonicity: !args.no_area,
        first_card_level_one: !args.no_first_level,
        level_order: match args.level_order {
            LevelOrderArg::Descending => LevelOrder::Descending,
            LevelOrderArg::Ascending => LevelOrder::Ascending,
        },
        ..SearchConfig::default()
    };
    let result = solve(&instance, &config);
    let doc = SolutionDocument::from_result(&instance, &result);
    emit(args.out.output.as_deref(), &doc.to_json())?;
    if args.out.output.is_some() {
        println!(
            "{} score {} ({})",
            instance.describe(),
            result.best_score.map_or("none".to_string(), |s| s.to_string()),
            proof_name(result.proof)
        );
    }
    append_log(
        args.out.log.as_deref(),
        &RunRecord {
            format_version: FORMAT_VERSION,
            timestamp: now(),
            command: "solve",
            instance: instance.describe(),
            config: serde_json::to_value(&config).expect("config serializes"),
            result: json!({ "score": result.best_score, "proof": result.proof }),
            stats: serde_json::to_value(result.stats).expect("stats serialize"),
            artifacts: artifacts(&args.out),
        },
    )?;
    Ok(match result.proof {
        ProofStatus::Optimal => 0,
        ProofStatus::BoundLimited => EXIT_LIMITED,
    })
}

fn proof_name(p: ProofStatus) -> &'static str {
    match p {
        ProofStatus::Optimal => "optimal",
        ProofStatus::BoundLimited => "bound-limited",
    }
}

fn cmd_oracle(args: OracleArgs) -> Result<u8, Failure> {
    let instance = build_instance(&args.instance)?;
    if instance.deck_len() > 4 && !args.force {
        return Err(Failure::Usage(format!(
            "the oracle enumerates every play; {} cards is too many (pass --force to run anyway)",
            instance.deck_len()
        )));
    }
    let report = best_score_bruteforce(&instance, args.node_limit, 0);
    let mut text = serde_json::to_string_pretty(&json!({ "format_version": FORMAT_VERSION, "report": &report })).expect("reports serialize");
    text.push('\n');
    emit(args.out.output.as_deref(), &text)?;
    append_log(
        args.out.log.as_deref(),
        &RunRecord {
            format_version: FORMAT_VERSION,
            timestamp: now(),
            command: "oracle",
            instance: instance.describe(),
            config: json!({ "node_limit": args.node_limit, "force": args.force }),
            result: json!({ "score": report.max_score, "proof": if report.complete { "optimal" } else { "bound-limited" } }),
            stats: json!({ "nodes": report.nodes, "terminals": report.terminals, "decks": report.decks, "optimal_terminals": report.optimal_terminals }),
            artifacts: artifacts(&args.out),
        },
    )?;
    Ok(if report.complete { 0 } else { EXIT_LIMITED })
}

fn cmd_export(args: ExportArgs) -> Result<u8, Failure> {
    let instance = build_instance(&args.instance)?;
    let export = export_model(&instance).map_err(data)?;
    emit(args.out.output.as_deref(), &export.to_text())?;
    append_log(
        args.out.log.as_deref(),
        &RunRecord {
            format_version: FORMAT_VERSION,
            timestamp: now(),
            command: "export",
            instance: instance.describe(),
            config: json!({}),
            result: json!({
                "constraints": export.constraints.len(),
                "regular": export.regular_count(),
                "automata": export.automata.len(),
            }),
            stats: json!({}),
            artifacts: artifacts(&args.out),
        },
    )?;
    Ok(0)
}

fn cmd_render(args: RenderArgs) -> Result<u8, Failure> {
    let text = fs::read_to_string(&args.solution).map_err(|e| io_error(&args.solution, e))?;
    let doc = SolutionDocument::from_json(&text).map_err(data)?;
    let catalog = match (&args.catalog, doc.instance.catalog.as_str()) {
        (Some(path), _) => load_catalog(Some(path))?,
        (None, "bundled") => ShapeCatalog::bundled(),
        (None, recorded) => load_catalog(Some(Path::new(recorded)))?,
    };
    let instance = Arc::new(doc.instance.instance(catalog).map_err(data)?);
    let state = doc.replay(instance).map_err(data)?;
    emit(args.output.as_deref(), &render_state(&state))?;
    Ok(0)
}

fn cmd_gen_deck(args: GenDeckArgs) -> Result<u8, Failure> {
    let variant: Variant = args.variant.parse().map_err(data)?;
    let free = Variant { kind: VariantKind::Free, ..variant };
    let catalog = load_catalog(args.catalog.as_deref())?;
    let pool = Instance::new(free, args.grid, args.levels, None, catalog).map(Arc::new).map_err(data)?;
    let deck = sample_deck(&pool, args.seed);
    let mut result = json!({ "deck": deck.to_string() });
    if args.play {
        let instance = match variant.kind {
            VariantKind::Known => Arc::new(pool.with_deck(deck.clone()).map_err(data)?),
            VariantKind::Free => pool.clone(),
        };
        let doc = match play_greedy(&instance, deck.draws()) {
            Ok(state) => SolutionDocument::from_state(&state),
            Err(dead) => return Err(Failure::Data(format!("greedy play of {deck}: {dead}"))),
        };
        result["score"] = json!(doc.score);
        emit(args.out.output.as_deref(), &doc.to_json())?;
    } else {
        emit(args.out.output.as_deref(), &format!("{deck}\n"))?;
    }
    append_log(
        args.out.log.as_deref(),
        &RunRecord {
            format_version: FORMAT_VERSION,
            timestamp: now(),
            command: "gen-deck",
            instance: format!("{} grid={} levels={}", variant, args.grid, args.levels),
            config: json!({ "seed": args.seed, "play": args.play }),
            result,
            stats: json!({}),
            artifacts: artifacts(&args.out),
        },
    )?;
    Ok(0)
}
