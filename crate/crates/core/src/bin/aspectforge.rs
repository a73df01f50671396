use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use aspectforge::manews::SplitSizes;
use aspectforge::pipeline::{self, ManewsConfig, PipelineConfig};
use aspectforge::{Error, Result};

/// Aspect-based summarization data tools.
#[derive(Parser)]
#[command(name = "aspectforge", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build weakly supervised aspect summaries from a news corpus.
    Weaksup(Box<WeaksupArgs>),
    /// Assemble a synthetic multi-aspect dataset from categorized articles.
    Manews(ManewsArgs),
    /// Score candidate summaries against references with ROUGE.
    Eval(EvalArgs),
    /// Show and validate one training example.
    Inspect(InspectArgs),
}

#[derive(Args)]
struct WeaksupArgs {
    /// TOML configuration; flags override its keys.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    corpus: Option<PathBuf>,
    /// ConceptNet assertions TSV.
    #[arg(long)]
    conceptnet: Option<PathBuf>,
    /// Load a persisted concept index instead of parsing a dump.
    #[arg(long)]
    concept_index: Option<PathBuf>,
    /// Persist the built concept index.
    #[arg(long)]
    save_index: Option<PathBuf>,
    /// Offline Wikipedia extracts (JSONL); the cache in live mode.
    #[arg(long)]
    wiki_store: Option<PathBuf>,
    /// Fetch missing pages from the MediaWiki API.
    #[arg(long)]
    wiki_live: bool,
    #[arg(long)]
    wiki_base_url: Option<String>,
    #[arg(long)]
    annotations: Option<PathBuf>,
    #[arg(long)]
    neighbor_k: Option<usize>,
    #[arg(long)]
    min_edge_weight: Option<f64>,
    /// Comma-separated relation allowlist.
    #[arg(long, value_delimiter = ',')]
    relations: Option<Vec<String>>,
    #[arg(long)]
    language: Option<String>,
    #[arg(long)]
    max_aspects_per_doc: Option<usize>,
    #[arg(long)]
    related_limit: Option<usize>,
    #[arg(long)]
    record_cap: Option<usize>,
    #[arg(long, short)]
    output_dir: Option<PathBuf>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    chunk_size: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Continue from the checkpoint in the output directory.
    #[arg(long)]
    resume: bool,
}

#[derive(Args)]
struct ManewsArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long, short)]
    output_dir: PathBuf,
    /// train,dev,test example counts.
    #[arg(long, default_value = "280000,10000,10000")]
    sizes: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 2)]
    docs_per_example: usize,
    /// Comma-separated category list; the six MA-News aspects by default.
    #[arg(long, value_delimiter = ',')]
    categories: Option<Vec<String>>,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long, required_unless_present = "lead3")]
    candidates: Option<PathBuf>,
    #[arg(long, required_unless_present = "lead3")]
    references: Option<PathBuf>,
    /// Score Lead-3 on a synthetic example file instead.
    #[arg(long, conflicts_with_all = ["candidates", "references"])]
    lead3: Option<PathBuf>,
    /// With --lead3, pick the first three aspect-relevant sentences.
    #[arg(long, requires = "lead3")]
    aspect_aware: bool,
    /// Also write the report here.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct InspectArgs {
    /// Training example file (examples.jsonl).
    examples: PathBuf,
    /// 1-based line number.
    #[arg(long, default_value_t = 1)]
    line: usize,
    /// Source corpus, to check the example against its record.
    #[arg(long)]
    corpus: Option<PathBuf>,
    #[arg(long)]
    wiki_store: Option<PathBuf>,
    #[arg(long, default_value_t = 10)]
    related_limit: usize,
}

fn weaksup_config(a: WeaksupArgs) -> Result<PipelineConfig> {
    let mut c = match &a.config {
        Some(p) => PipelineConfig::load(p)?,
        None => PipelineConfig::default(),
    };
    macro_rules! set {
        ($($field:ident),*) => {$(
            if let Some(v) = a.$field { c.$field = v.into(); }
        )*};
    }
    set!(neighbor_k, min_edge_weight, relations, language, max_aspects_per_doc);
    set!(related_limit, record_cap, workers, chunk_size, seed);
    macro_rules! set_opt {
        ($($field:ident),*) => {$(
            if a.$field.is_some() { c.$field = a.$field; }
        )*};
    }
    set_opt!(corpus, conceptnet, concept_index, save_index, wiki_store, wiki_base_url, annotations, output_dir);
    c.wiki_live |= a.wiki_live;
    Ok(c)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Weaksup(a) => {
            let resume = a.resume;
            let config = weaksup_config(*a)?;
            let report = pipeline::run_weaksup(&config, resume)?;
            eprintln!(
                "{} records, {} examples ({} seed, {} neighbor), {} skipped, {} to retry",
                report.records_processed,
                report.examples_emitted,
                report.aspects.seed_examples,
                report.aspects.neighbor_examples,
                report.records_skipped,
                report.retry.len()
            );
        }
        Command::Manews(a) => {
            let mut config = ManewsConfig::new(a.corpus, a.output_dir, SplitSizes::parse(&a.sizes)?, a.seed);
            config.docs_per_example = a.docs_per_example;
            if let Some(c) = a.categories {
                config.categories = c;
            }
            if config.docs_per_example < 1 {
                return Err(Error::Config("docs_per_example must be at least 1".into()));
            }
            let manifest = pipeline::run_manews(&config)?;
            eprintln!(
                "{}/{}/{} examples from {} records ({} skipped)",
                manifest.sizes.train,
                manifest.sizes.dev,
                manifest.sizes.test,
                manifest.source_records.values().sum::<usize>(),
                manifest.skipped_records
            );
        }
        Command::Eval(a) => {
            let report = match &a.lead3 {
                Some(p) => pipeline::run_lead3_eval(p, a.aspect_aware)?,
                None => pipeline::run_eval(
                    a.candidates.as_deref().expect("required"),
                    a.references.as_deref().expect("required"),
                )?,
            };
            let json = report.to_json();
            if let Some(out) = &a.output {
                std::fs::write(out, format!("{json}\n")).map_err(|e| Error::Data(format!("{}: {e}", out.display())))?;
            }
            println!("{json}");
        }
        Command::Inspect(a) => {
            let inspection = pipeline::inspect_example(
                &a.examples,
                a.line,
                a.corpus.as_deref(),
                a.wiki_store.as_deref(),
                a.related_limit,
            )?;
            println!("{}", serde_json::to_string_pretty(&inspection).expect("inspection serializes"));
            if !inspection.passed() {
                let failed: Vec<&str> = inspection.checks.iter().filter(|c| !c.passed).map(|c| c.name).collect();
                return Err(Error::Data(format!("failed checks: {}", failed.join(", "))));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
