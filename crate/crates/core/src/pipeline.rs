//! Stage orchestration for the `weaksup`, `manews`, `eval` and `inspect`
//! commands.
//!
//! `weaksup` streams the corpus in chunks. Each chunk is processed in
//! parallel, merged back in input order, appended to the output files and
//! followed by a checkpoint recording how many records and bytes are
//! durable. `--resume` truncates the outputs to the last checkpoint and
//! continues from there, which makes a resumed run byte-identical to an
//! uninterrupted one.

use std::collections::{BTreeMap, HashSet};
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::aspect_seed::{extract_entities, merge_annotations, Annotations};
use crate::concept_graph::{ConceptIndex, IndexConfig, ParseReport};
use crate::corpus_io::{load_corpus, segment_sentences, tokenize_words, CorpusFormat, DocumentRecord};
use crate::error::{Error, Result};
use crate::manews::{self, DatasetConfig, SplitSizes, MANEWS_ASPECTS};
use crate::model_input::{parse_input, serialize_input, ModelInput};
use crate::rouge::{self, RougeReport};
use crate::salience::{related_words, LiveClient, LiveConfig, OfflineStore, TfIdfModel, WikiExtract, WikiSource};
use crate::weak_supervision::{
    build_weak_examples_from_seeds, Aspect, RecordStats, WeakExample, WeakExampleLine, WeakSupConfig,
};

pub const EXAMPLES_FILE: &str = "examples.jsonl";
pub const WEAK_FILE: &str = "weak_examples.jsonl";
pub const REPORT_FILE: &str = "report.json";
pub const CHECKPOINT_FILE: &str = "checkpoint.json";

/// `weaksup` configuration. Loaded from a TOML key-value file; every key
/// has a matching CLI flag that overrides it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub corpus: Option<PathBuf>,
    /// ConceptNet assertions TSV.
    pub conceptnet: Option<PathBuf>,
    /// Persisted index, used instead of `conceptnet` when set.
    pub concept_index: Option<PathBuf>,
    /// Write the built index here.
    pub save_index: Option<PathBuf>,
    /// Offline extract store; in live mode, the write-through cache.
    pub wiki_store: Option<PathBuf>,
    pub wiki_live: bool,
    pub wiki_base_url: Option<String>,
    pub wiki_user_agent: Option<String>,
    pub wiki_attempts: u32,
    pub wiki_timeout_secs: u64,
    pub wiki_concurrency: usize,
    /// External entity annotations sidecar.
    pub annotations: Option<PathBuf>,
    pub neighbor_k: usize,
    pub min_edge_weight: f64,
    /// Relation allowlist; empty admits all.
    pub relations: Vec<String>,
    pub language: String,
    pub max_aspects_per_doc: usize,
    pub related_limit: usize,
    /// Only the first `record_cap` corpus records are used.
    pub record_cap: usize,
    pub output_dir: Option<PathBuf>,
    /// Worker threads; 0 uses every core.
    pub workers: usize,
    pub chunk_size: usize,
    pub seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        let live = LiveConfig::default();
        PipelineConfig {
            corpus: None,
            conceptnet: None,
            concept_index: None,
            save_index: None,
            wiki_store: None,
            wiki_live: false,
            wiki_base_url: None,
            wiki_user_agent: None,
            wiki_attempts: live.max_attempts,
            wiki_timeout_secs: live.timeout.as_secs(),
            wiki_concurrency: live.max_in_flight,
            annotations: None,
            neighbor_k: 10,
            min_edge_weight: 1.0,
            relations: Vec::new(),
            language: "en".into(),
            max_aspects_per_doc: 16,
            related_limit: 10,
            record_cap: 100_000,
            output_dir: None,
            workers: 0,
            chunk_size: 1000,
            seed: 0,
        }
    }
}

fn require_file(key: &str, path: &Option<PathBuf>) -> Result<()> {
    if let Some(p) = path {
        if !p.is_file() {
            return Err(Error::Config(format!("{key}: {} does not exist", p.display())));
        }
    }
    Ok(())
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> Result<PipelineConfig> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<PipelineConfig> {
        let path = path.as_ref();
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let cfg = |m: String| Err(Error::Config(m));
        if self.corpus.is_none() {
            return cfg("corpus is required".into());
        }
        if self.conceptnet.is_none() && self.concept_index.is_none() {
            return cfg("conceptnet dump (or concept_index) is required".into());
        }
        if self.output_dir.is_none() {
            return cfg("output_dir is required".into());
        }
        require_file("corpus", &self.corpus)?;
        if self.concept_index.is_some() {
            require_file("concept_index", &self.concept_index)?;
        } else {
            require_file("conceptnet", &self.conceptnet)?;
        }
        require_file("annotations", &self.annotations)?;
        if !self.wiki_live {
            require_file("wiki_store", &self.wiki_store)?;
        }
        for (key, v) in [
            ("neighbor_k", self.neighbor_k),
            ("max_aspects_per_doc", self.max_aspects_per_doc),
            ("related_limit", self.related_limit),
            ("record_cap", self.record_cap),
            ("chunk_size", self.chunk_size),
            ("wiki_concurrency", self.wiki_concurrency),
        ] {
            if v == 0 {
                return cfg(format!("{key} must be at least 1"));
            }
        }
        if self.wiki_attempts == 0 {
            return cfg("wiki_attempts must be at least 1".into());
        }
        if !(self.min_edge_weight.is_finite() && self.min_edge_weight >= 0.0) {
            return cfg(format!("min_edge_weight must be a nonnegative number, got {}", self.min_edge_weight));
        }
        if self.language.trim().is_empty() {
            return cfg("language must be set".into());
        }
        Ok(())
    }

    pub fn index_config(&self) -> IndexConfig {
        IndexConfig {
            relations: self.relations.clone(),
            min_weight: self.min_edge_weight,
            language: self.language.clone(),
        }
    }

    pub fn weak_config(&self) -> WeakSupConfig {
        WeakSupConfig {
            neighbor_k: self.neighbor_k,
            max_aspects_per_doc: self.max_aspects_per_doc,
        }
    }

    pub fn live_config(&self) -> LiveConfig {
        let mut live = LiveConfig {
            max_attempts: self.wiki_attempts,
            timeout: Duration::from_secs(self.wiki_timeout_secs.max(1)),
            max_in_flight: self.wiki_concurrency,
            ..LiveConfig::default()
        };
        if let Some(url) = &self.wiki_base_url {
            live.base_url = url.clone();
        }
        if let Some(ua) = &self.wiki_user_agent {
            live.user_agent = ua.clone();
        }
        live.with_env()
    }

    fn output_dir(&self) -> &Path {
        self.output_dir.as_deref().expect("validated")
    }

    /// Settings that determine output bytes; a checkpoint only resumes a
    /// run with the same fingerprint.
    fn fingerprint(&self) -> String {
        let mut c = self.clone();
        c.workers = 0;
        c.chunk_size = 0;
        c.output_dir = None;
        c.save_index = None;
        c.wiki_concurrency = 0;
        c.wiki_timeout_secs = 0;
        c.wiki_attempts = 0;
        c.wiki_user_agent = None;
        serde_json::to_string(&c).expect("config serializes")
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SkippedRecord {
    pub id: String,
    pub reason: String,
}

/// Run statistics written to `report.json`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub records_processed: u64,
    pub records_skipped: u64,
    pub records_without_examples: u64,
    pub examples_emitted: u64,
    pub aspects: RecordStats,
    /// Examples dropped because their aspect cannot be serialized.
    pub unserializable: u64,
    pub wiki_hits: u64,
    pub wiki_misses: u64,
    pub skipped: Vec<SkippedRecord>,
    /// Records whose live Wikipedia lookups failed; rerun to fill them.
    pub retry: Vec<SkippedRecord>,
    pub concept_graph: ParseReport,
    pub concept_nodes: u64,
    pub tfidf_documents: u64,
    /// Wall time per stage; the only field that varies between runs.
    pub stage_seconds: BTreeMap<String, f64>,
}

impl RunReport {
    fn absorb(&mut self, out: &RecordOutput) {
        match &out.status {
            RecordStatus::Done => {
                self.records_processed += 1;
                if out.lines.is_empty() {
                    self.records_without_examples += 1;
                }
            }
            RecordStatus::Skipped(reason) => {
                self.records_skipped += 1;
                self.skipped.push(SkippedRecord {
                    id: out.id.clone(),
                    reason: reason.clone(),
                });
            }
            RecordStatus::Retry(reason) => {
                self.records_skipped += 1;
                self.retry.push(SkippedRecord {
                    id: out.id.clone(),
                    reason: reason.clone(),
                });
            }
        }
        self.examples_emitted += out.lines.len() as u64;
        self.aspects.absorb(&out.stats);
        self.unserializable += out.unserializable;
        self.wiki_hits += out.wiki_hits;
        self.wiki_misses += out.wiki_misses;
    }
}

/// Line of the training-ready output file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExampleLine {
    pub doc_id: String,
    pub aspect: String,
    pub summary: String,
    pub related_words: Vec<String>,
    pub input: String,
}

#[derive(Debug, Clone, PartialEq)]
enum RecordStatus {
    Done,
    Skipped(String),
    Retry(String),
}

#[derive(Debug)]
struct RecordOutput {
    id: String,
    status: RecordStatus,
    lines: Vec<(ExampleLine, WeakExampleLine)>,
    stats: RecordStats,
    unserializable: u64,
    wiki_hits: u64,
    wiki_misses: u64,
}

/// Shared, immutable per-run state.
pub struct Context {
    pub index: ConceptIndex,
    pub tfidf: TfIdfModel,
    pub wiki: Arc<dyn WikiSource>,
    pub annotations: Annotations,
    pub weak: WeakSupConfig,
    pub related_limit: usize,
}

impl Context {
    /// Runs every stage on one record.
    pub fn process(&self, record: &DocumentRecord) -> Result<(Vec<WeakExample>, RecordStats)> {
        let out = self.process_record(record);
        match out.status {
            RecordStatus::Done => {}
            RecordStatus::Skipped(m) | RecordStatus::Retry(m) => return Err(Error::Data(m)),
        }
        let examples = out
            .lines
            .into_iter()
            .map(|(line, weak)| WeakExample {
                doc_id: line.doc_id,
                aspect: Aspect {
                    term: weak.aspect,
                    origin: weak.aspect_origin,
                    source_seed: weak.source_seed,
                    neighbor_terms: Vec::new(),
                    weight: None,
                },
                summary: line.summary,
                related_words: line.related_words,
                model_input: Some(line.input),
            })
            .collect();
        Ok((examples, out.stats))
    }

    fn process_record(&self, record: &DocumentRecord) -> RecordOutput {
        let mut out = RecordOutput {
            id: record.id.clone(),
            status: RecordStatus::Done,
            lines: Vec::new(),
            stats: RecordStats::default(),
            unserializable: 0,
            wiki_hits: 0,
            wiki_misses: 0,
        };
        let seeds = match self.annotations.get(&record.id) {
            Some(ext) => match merge_annotations(record, ext) {
                Ok(s) => s,
                Err(e) => {
                    out.status = RecordStatus::Skipped(e.to_string());
                    return out;
                }
            },
            None => extract_entities(&record.summary),
        };
        let (examples, stats) = build_weak_examples_from_seeds(record, &seeds, &self.index, &self.weak);
        if examples.is_empty() {
            out.stats = stats;
            return out;
        }
        let ranking = self.tfidf.score_document(&record.document);
        let mut lines = Vec::with_capacity(examples.len());
        let (mut hits, mut misses, mut dropped) = (0, 0, 0);
        for example in &examples {
            let page: Option<Arc<WikiExtract>> = match self.wiki.lookup(&example.aspect.term) {
                Ok(p) => p,
                Err(e) => {
                    out.status = RecordStatus::Retry(e.to_string());
                    return out;
                }
            };
            if page.is_some() {
                hits += 1;
            } else {
                misses += 1;
            }
            let related = related_words(&ranking, page.as_deref(), self.related_limit).into_vec();
            let input = ModelInput::new(example.aspect.term.clone(), related, record.document.clone());
            let Ok(serialized) = serialize_input(&input) else {
                dropped += 1;
                continue;
            };
            lines.push((
                ExampleLine {
                    doc_id: record.id.clone(),
                    aspect: example.aspect.term.clone(),
                    summary: example.summary.clone(),
                    related_words: input.related,
                    input: serialized,
                },
                WeakExampleLine::from(example),
            ));
        }
        out.lines = lines;
        out.stats = stats;
        out.unserializable = dropped;
        out.wiki_hits = hits;
        out.wiki_misses = misses;
        out
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct Checkpoint {
    fingerprint: String,
    records_done: u64,
    examples_bytes: u64,
    weak_bytes: u64,
    report: RunReport,
}

fn write_checkpoint(dir: &Path, cp: &Checkpoint) -> Result<()> {
    let tmp = dir.join(format!("{CHECKPOINT_FILE}.tmp"));
    let path = dir.join(CHECKPOINT_FILE);
    let json = serde_json::to_vec(cp).expect("checkpoint serializes");
    {
        let mut f = File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
        f.write_all(&json).map_err(|e| Error::io(&tmp, e))?;
        f.sync_all().map_err(|e| Error::io(&tmp, e))?;
    }
    fs::rename(&tmp, &path).map_err(|e| Error::io(&path, e))
}

fn read_checkpoint(dir: &Path) -> Result<Option<Checkpoint>> {
    let path = dir.join(CHECKPOINT_FILE);
    match fs::read(&path) {
        Ok(bytes) => serde_json::from_slice(&bytes)
            .map(Some)
            .map_err(|e| Error::Data(format!("{}: {e}", path.display()))),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
        Err(e) => Err(Error::io(path, e)),
    }
}

/// Opens an output file for appending after truncating it to `len` bytes.
fn open_output(path: &Path, len: u64) -> Result<BufWriter<File>> {
    let file = OpenOptions::new()
        .create(true)
        .truncate(false)
        .write(true)
        .open(path)
        .map_err(|e| Error::io(path, e))?;
    let actual = file.metadata().map_err(|e| Error::io(path, e))?.len();
    if actual < len {
        return Err(Error::Data(format!(
            "{} is shorter ({actual} bytes) than its checkpoint ({len} bytes)",
            path.display()
        )));
    }
    file.set_len(len).map_err(|e| Error::io(path, e))?;
    let mut file = file;
    use std::io::Seek;
    file.seek(std::io::SeekFrom::End(0)).map_err(|e| Error::io(path, e))?;
    Ok(BufWriter::new(file))
}

/// Testing hook: stop after this many chunks as if the process died.
#[doc(hidden)]
#[derive(Debug, Clone, Copy, Default)]
pub struct RunControl {
    pub stop_after_chunks: Option<usize>,
}

fn timed<T>(report: &mut RunReport, stage: &'static str, f: impl FnOnce() -> Result<T>) -> Result<T> {
    let start = Instant::now();
    let out = f().map_err(|e| e.in_stage(stage))?;
    let secs = start.elapsed().as_secs_f64();
    log::info!("{stage}: {secs:.2}s");
    *report.stage_seconds.entry(stage.to_string()).or_insert(0.0) += secs;
    Ok(out)
}

/// Builds the shared context: concept index, TF-IDF statistics over the
/// capped corpus, the Wikipedia source and annotations.
pub fn prepare(config: &PipelineConfig, report: &mut RunReport) -> Result<Context> {
    let index = timed(report, "concept_graph", || match &config.concept_index {
        Some(p) => Ok((ConceptIndex::load(p)?, ParseReport::default())),
        None => ConceptIndex::from_dump(config.conceptnet.as_ref().expect("validated"), config.index_config()),
    })?;
    let (index, parse) = index;
    report.concept_graph = parse;
    report.concept_nodes = index.node_count() as u64;
    if let Some(p) = &config.save_index {
        index.save(p).map_err(|e| e.in_stage("concept_graph"))?;
    }

    let annotations = timed(report, "annotations", || match &config.annotations {
        Some(p) => Annotations::load(p),
        None => Ok(Annotations::default()),
    })?;

    let corpus = config.corpus.as_ref().expect("validated");
    let tfidf = timed(report, "tfidf", || {
        let mut model = TfIdfModel::default();
        for record in load_corpus(corpus, CorpusFormat::Jsonl)?.take(config.record_cap) {
            model.add_document(&record?.document);
        }
        if model.doc_count() == 0 {
            return Err(Error::EmptyCorpus);
        }
        Ok(model)
    })?;
    report.tfidf_documents = tfidf.doc_count();

    let wiki: Arc<dyn WikiSource> = timed(report, "wiki", || {
        Ok(if config.wiki_live {
            Arc::new(LiveClient::new(config.live_config(), config.wiki_store.as_deref())?) as Arc<dyn WikiSource>
        } else {
            match &config.wiki_store {
                Some(p) => Arc::new(OfflineStore::load(p)?),
                None => Arc::new(OfflineStore::new()),
            }
        })
    })?;

    Ok(Context {
        index,
        tfidf,
        wiki,
        annotations,
        weak: config.weak_config(),
        related_limit: config.related_limit,
    })
}

fn worker_pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {workers} workers: {e}")))
}

pub fn run_weaksup(config: &PipelineConfig, resume: bool) -> Result<RunReport> {
    run_weaksup_with(config, resume, RunControl::default())
}

#[doc(hidden)]
pub fn run_weaksup_with(config: &PipelineConfig, resume: bool, control: RunControl) -> Result<RunReport> {
    config.validate()?;
    let dir = config.output_dir().to_path_buf();
    let fingerprint = config.fingerprint();

    let checkpoint = if resume && dir.is_dir() { read_checkpoint(&dir)? } else { None };
    if let Some(cp) = &checkpoint {
        if cp.fingerprint != fingerprint {
            return Err(Error::Config(format!(
                "{} was written with a different configuration; rerun without --resume",
                dir.join(CHECKPOINT_FILE).display()
            )));
        }
    }

    let mut report = checkpoint.as_ref().map(|c| c.report.clone()).unwrap_or_default();
    report.stage_seconds.clear();
    let ctx = prepare(config, &mut report)?;

    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    let (mut done, ex_bytes, weak_bytes) = checkpoint
        .as_ref()
        .map(|c| (c.records_done, c.examples_bytes, c.weak_bytes))
        .unwrap_or((0, 0, 0));
    if checkpoint.is_none() {
        let stale = dir.join(CHECKPOINT_FILE);
        if stale.exists() {
            fs::remove_file(&stale).map_err(|e| Error::io(&stale, e))?;
        }
    }
    let ex_path = dir.join(EXAMPLES_FILE);
    let weak_path = dir.join(WEAK_FILE);
    let mut ex_out = open_output(&ex_path, ex_bytes)?;
    let mut weak_out = open_output(&weak_path, weak_bytes)?;
    let (mut ex_len, mut weak_len) = (ex_bytes, weak_bytes);

    let pool = worker_pool(config.workers)?;
    let corpus = config.corpus.as_ref().expect("validated");
    let mut records = load_corpus(corpus, CorpusFormat::Jsonl)
        .map_err(|e| e.in_stage("corpus"))?
        .take(config.record_cap);
    for skipped in 0..done {
        match records.next() {
            Some(Ok(_)) => {}
            Some(Err(e)) => return Err(e.in_stage("corpus")),
            None => {
                return Err(Error::Data(format!(
                    "checkpoint covers {done} records but the corpus ended after {skipped}"
                )))
            }
        }
    }

    let start = Instant::now();
    let mut chunks = 0usize;
    loop {
        let mut chunk = Vec::with_capacity(config.chunk_size);
        for record in records.by_ref().take(config.chunk_size) {
            chunk.push(record.map_err(|e| e.in_stage("corpus"))?);
        }
        if chunk.is_empty() {
            break;
        }
        let outputs: Vec<RecordOutput> = pool.install(|| chunk.par_iter().map(|r| ctx.process_record(r)).collect());
        let mut ex_buf = Vec::new();
        let mut weak_buf = Vec::new();
        for out in &outputs {
            for (line, weak) in &out.lines {
                serde_json::to_writer(&mut ex_buf, line).expect("line serializes");
                ex_buf.push(b'\n');
                serde_json::to_writer(&mut weak_buf, weak).expect("line serializes");
                weak_buf.push(b'\n');
            }
            report.absorb(out);
        }
        let io = |p: &Path| {
            let p = p.to_path_buf();
            move |e| Error::io(p, e).in_stage("write")
        };
        ex_out.write_all(&ex_buf).map_err(io(&ex_path))?;
        weak_out.write_all(&weak_buf).map_err(io(&weak_path))?;
        ex_out.flush().map_err(io(&ex_path))?;
        weak_out.flush().map_err(io(&weak_path))?;
        ex_len += ex_buf.len() as u64;
        weak_len += weak_buf.len() as u64;
        done += chunk.len() as u64;
        write_checkpoint(
            &dir,
            &Checkpoint {
                fingerprint: fingerprint.clone(),
                records_done: done,
                examples_bytes: ex_len,
                weak_bytes: weak_len,
                report: report.clone(),
            },
        )?;
        log::info!("{done} records, {} examples", report.examples_emitted);
        chunks += 1;
        if control.stop_after_chunks == Some(chunks) {
            return Err(Error::Data(format!("stopped after {chunks} chunks")));
        }
    }
    report
        .stage_seconds
        .insert("weaksup".into(), start.elapsed().as_secs_f64());

    let report_path = dir.join(REPORT_FILE);
    let mut json = serde_json::to_string_pretty(&report).expect("report serializes");
    json.push('\n');
    fs::write(&report_path, json).map_err(|e| Error::io(&report_path, e))?;
    let cp = dir.join(CHECKPOINT_FILE);
    fs::remove_file(&cp).map_err(|e| Error::io(&cp, e))?;
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManewsConfig {
    pub corpus: PathBuf,
    pub output_dir: PathBuf,
    pub sizes: SplitSizes,
    pub seed: u64,
    pub docs_per_example: usize,
    pub categories: Vec<String>,
}

impl ManewsConfig {
    pub fn new(corpus: impl Into<PathBuf>, output_dir: impl Into<PathBuf>, sizes: SplitSizes, seed: u64) -> Self {
        ManewsConfig {
            corpus: corpus.into(),
            output_dir: output_dir.into(),
            sizes,
            seed,
            docs_per_example: 2,
            categories: MANEWS_ASPECTS.iter().map(|s| s.to_string()).collect(),
        }
    }
}

pub fn run_manews(config: &ManewsConfig) -> Result<manews::Manifest> {
    if !config.corpus.is_file() {
        return Err(Error::Config(format!("corpus: {} does not exist", config.corpus.display())));
    }
    let corpus: Vec<DocumentRecord> = load_corpus(&config.corpus, CorpusFormat::Jsonl)?
        .collect::<Result<_>>()
        .map_err(|e| e.in_stage("corpus"))?;
    let dataset = manews::make_dataset(
        &corpus,
        &DatasetConfig {
            sizes: config.sizes,
            seed: config.seed,
            docs_per_example: config.docs_per_example,
            categories: config.categories.clone(),
            ..DatasetConfig::default()
        },
    )
    .map_err(|e| e.in_stage("manews"))?;
    manews::write_dataset(&config.output_dir, &dataset)?;
    Ok(dataset.manifest)
}

#[derive(Deserialize)]
struct TextLine {
    id: Option<String>,
    text: Option<String>,
    summary: Option<String>,
}

/// Reads summaries from JSONL. Each line is a JSON string or an object with
/// a `text` (or `summary`) field and an optional `id`.
pub fn read_texts(path: &Path) -> Result<Vec<(Option<String>, String)>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let bad = |message: String| Error::MalformedLine { line: i + 1, message };
        let line = line.map_err(|e| bad(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let value: serde_json::Value = serde_json::from_str(&line).map_err(|e| bad(e.to_string()))?;
        if let serde_json::Value::String(s) = value {
            out.push((None, s));
            continue;
        }
        let parsed: TextLine = serde_json::from_value(value).map_err(|e| bad(e.to_string()))?;
        let text = parsed
            .text
            .or(parsed.summary)
            .ok_or_else(|| bad("expected a \"text\" or \"summary\" field".into()))?;
        out.push((parsed.id, text));
    }
    Ok(out)
}

pub fn run_eval(candidates: &Path, references: &Path) -> Result<RougeReport> {
    for (key, p) in [("candidates", candidates), ("references", references)] {
        if !p.is_file() {
            return Err(Error::Config(format!("{key}: {} does not exist", p.display())));
        }
    }
    let cands = read_texts(candidates)?;
    let refs = read_texts(references)?;
    if cands.len() != refs.len() {
        return Err(Error::Data(format!(
            "{} candidates but {} references",
            cands.len(),
            refs.len()
        )));
    }
    for (i, ((ci, _), (ri, _))) in cands.iter().zip(&refs).enumerate() {
        if let (Some(c), Some(r)) = (ci, ri) {
            if c != r {
                return Err(Error::Data(format!("pair {}: candidate id {c:?} vs reference id {r:?}", i + 1)));
            }
        }
    }
    rouge::evaluate(cands.into_iter().zip(refs).map(|((_, c), (_, r))| (c, r)))
}

#[derive(Deserialize)]
struct SyntheticLine {
    document: String,
    aspect: String,
    summary: String,
}

/// Lead-3 (or aspect-aware Lead-3) against the summaries of an
/// MA-News-style example file.
pub fn run_lead3_eval(examples: &Path, aspect_aware: bool) -> Result<RougeReport> {
    let file = File::open(examples).map_err(|e| Error::Config(format!("{}: {e}", examples.display())))?;
    let mut pairs = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let bad = |message: String| Error::MalformedLine { line: i + 1, message };
        let line = line.map_err(|e| bad(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let ex: SyntheticLine = serde_json::from_str(&line).map_err(|e| bad(e.to_string()))?;
        let candidate = if aspect_aware {
            rouge::aspect_lead3(&ex.document, &Aspect::seed(ex.aspect, Vec::new()))
        } else {
            rouge::lead3(&ex.document)
        };
        pairs.push((candidate, ex.summary));
    }
    rouge::evaluate(pairs)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Inspection {
    pub line: usize,
    pub example: ExampleLine,
    pub checks: Vec<Check>,
}

impl Inspection {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

fn check(name: &'static str, passed: bool, detail: impl Into<String>) -> Check {
    Check {
        name,
        passed,
        detail: detail.into(),
    }
}

/// Validates one training example (1-based `line`) against the model-input
/// format and, when given, its source record and extract store.
pub fn inspect_example(
    examples: &Path,
    line: usize,
    corpus: Option<&Path>,
    wiki_store: Option<&Path>,
    related_limit: usize,
) -> Result<Inspection> {
    let file = File::open(examples).map_err(|e| Error::Config(format!("{}: {e}", examples.display())))?;
    let raw = BufReader::new(file)
        .lines()
        .nth(line.saturating_sub(1))
        .ok_or_else(|| Error::Data(format!("{} has no line {line}", examples.display())))?
        .map_err(|e| Error::io(examples, e))?;
    let example: ExampleLine = serde_json::from_str(&raw).map_err(|e| Error::MalformedLine {
        line,
        message: e.to_string(),
    })?;

    let mut checks = Vec::new();
    checks.push(check("summary nonempty", !example.summary.trim().is_empty(), ""));
    let unique: HashSet<&String> = example.related_words.iter().collect();
    checks.push(check(
        "related words bounded and unique",
        example.related_words.len() <= related_limit && unique.len() == example.related_words.len(),
        format!("{} words, limit {related_limit}", example.related_words.len()),
    ));
    let parsed = parse_input(&example.input);
    let document = match &parsed {
        Ok(p) => {
            checks.push(check(
                "input round trip",
                p.aspect == example.aspect && p.related == example.related_words,
                format!("aspect {:?}, {} related", p.aspect, p.related.len()),
            ));
            let reserialized = serialize_input(p).ok();
            checks.push(check(
                "input template",
                reserialized.as_deref() == Some(example.input.as_str()),
                "",
            ));
            Some(p.document.clone())
        }
        Err(e) => {
            checks.push(check("input round trip", false, e.to_string()));
            None
        }
    };

    if let Some(corpus) = corpus {
        let record = load_corpus(corpus, CorpusFormat::Jsonl)?
            .find(|r| r.as_ref().map(|r| r.id == example.doc_id).unwrap_or(true))
            .transpose()?;
        match record {
            Some(record) => {
                let generic: Vec<String> = segment_sentences(&record.summary).into_iter().map(|s| s.text).collect();
                let picked: Vec<String> = segment_sentences(&example.summary).into_iter().map(|s| s.text).collect();
                let mut it = generic.iter();
                let ordered = picked.iter().all(|p| it.any(|g| g == p));
                checks.push(check(
                    "summary sentences from generic summary, in order",
                    ordered,
                    format!("{} of {} sentences", picked.len(), generic.len()),
                ));
                let doc_words: HashSet<String> = tokenize_words(&record.document).into_iter().collect();
                let missing: Vec<&String> = example.related_words.iter().filter(|w| !doc_words.contains(*w)).collect();
                checks.push(check("related words occur in document", missing.is_empty(), format!("{missing:?}")));
                checks.push(check(
                    "input carries the source document",
                    document.as_deref() == Some(record.document.as_str()),
                    "",
                ));
            }
            None => checks.push(check("source record found", false, example.doc_id.clone())),
        }
    }

    if let Some(store) = wiki_store {
        let store = OfflineStore::load(store)?;
        match store.get(&example.aspect) {
            Some(page) => {
                let missing: Vec<&String> = example.related_words.iter().filter(|w| !page.contains(w)).collect();
                checks.push(check(
                    "related words occur in the aspect page",
                    missing.is_empty(),
                    format!("page {:?}; missing {missing:?}", page.title),
                ));
            }
            None => checks.push(check(
                "no page means no related words",
                example.related_words.is_empty(),
                format!("{} related words", example.related_words.len()),
            )),
        }
    }

    Ok(Inspection { line, example, checks })
}
