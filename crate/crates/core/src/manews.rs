//! MA-News-style synthetic benchmark generation.
//!
//! Documents from different categories are interleaved paragraph by
//! paragraph; the assembled document is paired with each component's
//! category and generic summary.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus_io::{paragraphs, DocumentRecord};
use crate::error::{Error, Result};

/// The six MA-News aspects.
pub const MANEWS_ASPECTS: [&str; 6] = ["sport", "health", "travel", "news", "science technology", "tv showbiz"];

pub const PARAGRAPH_JOINER: &str = "\n\n";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SyntheticExample {
    pub document: String,
    pub aspect: String,
    pub summary: String,
    /// `(source id, paragraph index)` per paragraph of `document`.
    pub provenance: Vec<(String, usize)>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InterleaveScheme {
    #[default]
    RoundRobin,
}

fn category(record: &DocumentRecord) -> Result<&str> {
    record
        .category
        .as_deref()
        .ok_or_else(|| Error::Data(format!("record {:?} has no category", record.id)))
}

/// Interleaves the target with its distractors and emits one example per
/// component, target first.
pub fn assemble(
    target: &DocumentRecord,
    distractors: &[DocumentRecord],
    scheme: InterleaveScheme,
) -> Result<Vec<SyntheticExample>> {
    let mut parts = vec![target];
    parts.extend(distractors);
    assemble_refs(&parts, scheme)
}

fn assemble_refs(parts: &[&DocumentRecord], scheme: InterleaveScheme) -> Result<Vec<SyntheticExample>> {
    let mut cats = HashSet::new();
    let mut split = Vec::with_capacity(parts.len());
    for record in parts {
        let cat = category(record)?;
        if !cats.insert(cat) {
            return Err(Error::Data(format!(
                "records in one assembly must have distinct categories; {cat:?} repeats at {:?}",
                record.id
            )));
        }
        let paras = paragraphs(&record.document);
        if paras.is_empty() {
            return Err(Error::Data(format!("record {:?} has no paragraphs", record.id)));
        }
        split.push(paras);
    }

    let mut pieces: Vec<&str> = Vec::new();
    let mut provenance = Vec::new();
    match scheme {
        InterleaveScheme::RoundRobin => {
            let longest = split.iter().map(Vec::len).max().unwrap_or(0);
            for round in 0..longest {
                for (record, paras) in parts.iter().zip(&split) {
                    if let Some(p) = paras.get(round) {
                        pieces.push(p);
                        provenance.push((record.id.clone(), round));
                    }
                }
            }
        }
    }
    let document = pieces.join(PARAGRAPH_JOINER);
    Ok(parts
        .iter()
        .map(|r| SyntheticExample {
            document: document.clone(),
            aspect: r.category.clone().expect("checked above"),
            summary: r.summary.clone(),
            provenance: provenance.clone(),
        })
        .collect())
}

/// Rebuilds an assembled document from its provenance.
pub fn reconstruct(provenance: &[(String, usize)], sources: &HashMap<&str, &DocumentRecord>) -> Option<String> {
    let mut cache: HashMap<&str, Vec<String>> = HashMap::new();
    let mut out = Vec::with_capacity(provenance.len());
    for (id, idx) in provenance {
        let record = sources.get(id.as_str())?;
        let paras = cache
            .entry(record.id.as_str())
            .or_insert_with(|| paragraphs(&record.document));
        out.push(paras.get(*idx)?.clone());
    }
    Some(out.join(PARAGRAPH_JOINER))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitSizes {
    pub train: usize,
    pub dev: usize,
    pub test: usize,
}

impl SplitSizes {
    pub fn new(train: usize, dev: usize, test: usize) -> Self {
        SplitSizes { train, dev, test }
    }

    /// Parses `train,dev,test`.
    pub fn parse(s: &str) -> Result<SplitSizes> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        let bad = || Error::Config(format!("sizes must be three comma-separated integers, got {s:?}"));
        if parts.len() != 3 {
            return Err(bad());
        }
        let n: Vec<usize> = parts
            .iter()
            .map(|p| p.parse().map_err(|_| bad()))
            .collect::<Result<_>>()?;
        Ok(SplitSizes::new(n[0], n[1], n[2]))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetConfig {
    pub sizes: SplitSizes,
    pub seed: u64,
    /// Component documents per assembled document.
    pub docs_per_example: usize,
    pub categories: Vec<String>,
    pub scheme: InterleaveScheme,
}

impl Default for DatasetConfig {
    fn default() -> Self {
        DatasetConfig {
            sizes: SplitSizes::default(),
            seed: 0,
            docs_per_example: 2,
            categories: MANEWS_ASPECTS.iter().map(|s| s.to_string()).collect(),
            scheme: InterleaveScheme::RoundRobin,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub seed: u64,
    pub sizes: SplitSizes,
    pub docs_per_example: usize,
    pub scheme: InterleaveScheme,
    pub categories: Vec<String>,
    /// Examples per aspect, per split.
    pub category_histogram: BTreeMap<String, BTreeMap<String, usize>>,
    /// Source records consumed per split.
    pub source_records: BTreeMap<String, usize>,
    /// Records ignored for lacking a configured category.
    pub skipped_records: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub train: Vec<SyntheticExample>,
    pub dev: Vec<SyntheticExample>,
    pub test: Vec<SyntheticExample>,
    pub manifest: Manifest,
}

impl Dataset {
    pub fn splits(&self) -> [(&'static str, &[SyntheticExample]); 3] {
        [("train", &self.train), ("dev", &self.dev), ("test", &self.test)]
    }
}

/// Source ids mentioned in a split's provenance.
pub fn split_sources(examples: &[SyntheticExample]) -> HashSet<&str> {
    examples
        .iter()
        .flat_map(|e| e.provenance.iter().map(|(id, _)| id.as_str()))
        .collect()
}

/// Builds train/dev/test splits of exactly the requested sizes.
///
/// Every source record is used in at most one assembly, so splits are
/// source-disjoint. Each assembly draws its components from the categories
/// with the most unused records, ties broken by the seeded generator.
pub fn make_dataset(corpus: &[DocumentRecord], config: &DatasetConfig) -> Result<Dataset> {
    let d = config.docs_per_example;
    if d == 0 {
        return Err(Error::Config("docs_per_example must be at least 1".into()));
    }
    if d > config.categories.len() {
        return Err(Error::Config(format!(
            "docs_per_example {d} exceeds the {} configured categories",
            config.categories.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    let allowed: HashSet<&str> = config.categories.iter().map(String::as_str).collect();
    let mut pools: BTreeMap<&str, Vec<&DocumentRecord>> = config.categories.iter().map(|c| (c.as_str(), Vec::new())).collect();
    let mut skipped = 0;
    for record in corpus {
        match record.category.as_deref() {
            Some(c) if allowed.contains(c) => pools.get_mut(c).expect("allowed").push(record),
            _ => skipped += 1,
        }
    }
    for pool in pools.values_mut() {
        pool.sort_by(|a, b| a.id.cmp(&b.id));
        pool.shuffle(&mut rng);
    }

    let sizes = config.sizes;
    let splits = [("train", sizes.train), ("dev", sizes.dev), ("test", sizes.test)];
    let required: usize = splits.iter().map(|(_, s)| s.div_ceil(d) * d).sum();
    let available: usize = pools.values().map(Vec::len).sum();
    if available < required {
        return Err(Error::Insufficient(format!(
            "sizes {},{},{} with {d} documents per example need {required} categorized records, \
             have {available} (short by {})",
            sizes.train,
            sizes.dev,
            sizes.test,
            required - available
        )));
    }

    let mut out: Vec<Vec<SyntheticExample>> = Vec::new();
    let mut histogram = BTreeMap::new();
    let mut consumed = BTreeMap::new();
    for (name, size) in splits {
        let mut examples = Vec::with_capacity(size);
        let mut used = 0;
        while examples.len() < size {
            let mut cats: Vec<&str> = pools.iter().filter(|(_, p)| !p.is_empty()).map(|(c, _)| *c).collect();
            if cats.len() < d {
                return Err(Error::Insufficient(format!(
                    "{name} split: only {} categories have unused records, each example needs {d}",
                    cats.len()
                )));
            }
            cats.shuffle(&mut rng);
            cats.sort_by_key(|c| std::cmp::Reverse(pools[c].len()));
            let parts: Vec<&DocumentRecord> = cats[..d]
                .iter()
                .map(|c| pools.get_mut(c).expect("present").pop().expect("nonempty"))
                .collect();
            used += parts.len();
            let assembled = assemble_refs(&parts, config.scheme)?;
            let room = size - examples.len();
            examples.extend(assembled.into_iter().take(room));
        }
        let mut hist: BTreeMap<String, usize> = config.categories.iter().map(|c| (c.clone(), 0)).collect();
        for e in &examples {
            *hist.entry(e.aspect.clone()).or_insert(0) += 1;
        }
        histogram.insert(name.to_string(), hist);
        consumed.insert(name.to_string(), used);
        out.push(examples);
    }

    let test = out.pop().expect("three splits");
    let dev = out.pop().expect("three splits");
    let train = out.pop().expect("three splits");
    Ok(Dataset {
        train,
        dev,
        test,
        manifest: Manifest {
            seed: config.seed,
            sizes,
            docs_per_example: d,
            scheme: config.scheme,
            categories: config.categories.clone(),
            category_histogram: histogram,
            source_records: consumed,
            skipped_records: skipped,
        },
    })
}

#[derive(Serialize)]
struct ExampleLine<'a> {
    document: &'a str,
    aspect: &'a str,
    summary: &'a str,
    provenance: &'a [(String, usize)],
}

pub fn write_examples<W: Write>(mut out: W, examples: &[SyntheticExample]) -> std::io::Result<()> {
    for e in examples {
        let line = ExampleLine {
            document: &e.document,
            aspect: &e.aspect,
            summary: &e.summary,
            provenance: &e.provenance,
        };
        serde_json::to_writer(&mut out, &line)?;
        out.write_all(b"\n")?;
    }
    out.flush()
}

/// Writes `train.jsonl`, `dev.jsonl`, `test.jsonl` and `manifest.json`.
pub fn write_dataset(dir: &Path, dataset: &Dataset) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for (name, examples) in dataset.splits() {
        let path = dir.join(format!("{name}.jsonl"));
        let file = File::create(&path).map_err(|e| Error::io(&path, e))?;
        write_examples(BufWriter::new(file), examples).map_err(|e| Error::io(&path, e))?;
    }
    let path = dir.join("manifest.json");
    let mut json = serde_json::to_string_pretty(&dataset.manifest).expect("manifest serializes");
    json.push('\n');
    fs::write(&path, json).map_err(|e| Error::io(&path, e))
}
