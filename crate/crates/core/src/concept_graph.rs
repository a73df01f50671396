//! ConceptNet assertion dump parsing and the weighted neighbor index.
//!
//! Terms are interned; each node keeps one neighbor list sorted by weight
//! descending and term ascending, so a top-k query is a slice of it.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Normalized concept string: lowercase, underscores replaced by spaces,
/// single-spaced, no URI scaffolding.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ConceptTerm(String);

impl ConceptTerm {
    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn into_string(self) -> String {
        self.0
    }
}

impl fmt::Display for ConceptTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl AsRef<str> for ConceptTerm {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConceptEdge {
    pub start: ConceptTerm,
    pub end: ConceptTerm,
    pub relation: String,
    pub weight: f64,
}

fn clean_term(raw: &str) -> Option<ConceptTerm> {
    let text = raw.replace('_', " ").to_lowercase();
    let text = text.split_whitespace().collect::<Vec<_>>().join(" ");
    if text.is_empty() {
        None
    } else {
        Some(ConceptTerm(text))
    }
}

/// Normalizes a concept URI (`/c/en/new_york/n`) or a plain term.
///
/// Returns `None` ("skip") for URIs in another language and for anything
/// that normalizes to the empty string.
pub fn normalize_concept(raw: &str, language: &str) -> Option<ConceptTerm> {
    match raw.strip_prefix("/c/") {
        Some(rest) => {
            let mut parts = rest.split('/');
            let lang = parts.next()?;
            if lang != language {
                return None;
            }
            clean_term(parts.next()?)
        }
        None => clean_term(raw),
    }
}

/// Relation label from `/r/RelatedTo` or a bare `RelatedTo`.
pub fn relation_label(raw: &str) -> &str {
    let raw = raw.strip_prefix("/r/").unwrap_or(raw);
    raw.trim_end_matches('/')
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IndexConfig {
    /// Admitted relation labels; empty admits all relations.
    pub relations: Vec<String>,
    pub min_weight: f64,
    pub language: String,
}

impl Default for IndexConfig {
    fn default() -> Self {
        IndexConfig {
            relations: Vec::new(),
            min_weight: 1.0,
            language: "en".into(),
        }
    }
}

impl IndexConfig {
    fn admits_relation(&self, relation: &str) -> bool {
        self.relations.is_empty() || self.relations.iter().any(|r| relation_label(r) == relation)
    }
}

/// Line counts from one dump parse.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParseReport {
    pub rows: u64,
    /// Rows with fewer than five columns or unusable metadata.
    pub malformed: u64,
    pub filtered_language: u64,
    pub filtered_relation: u64,
    pub filtered_weight: u64,
    pub self_loops: u64,
    pub admitted: u64,
}

#[derive(Deserialize)]
struct EdgeMetadata {
    weight: f64,
}

enum Row {
    Malformed,
    Language,
    Relation,
    Weight,
    SelfLoop,
    Edge(ConceptTerm, ConceptTerm, f64),
}

fn classify(line: &str, config: &IndexConfig) -> Row {
    let mut cols = line.split('\t');
    let (Some(_uri), Some(rel), Some(start), Some(end), Some(meta)) =
        (cols.next(), cols.next(), cols.next(), cols.next(), cols.next())
    else {
        return Row::Malformed;
    };
    let (Some(start), Some(end)) = (
        normalize_concept(start, &config.language),
        normalize_concept(end, &config.language),
    ) else {
        return Row::Language;
    };
    let relation = relation_label(rel);
    if !config.admits_relation(relation) {
        return Row::Relation;
    }
    let weight = match serde_json::from_str::<EdgeMetadata>(meta) {
        Ok(m) if m.weight.is_finite() && m.weight >= 0.0 => m.weight,
        _ => return Row::Malformed,
    };
    if weight < config.min_weight {
        return Row::Weight;
    }
    if start == end {
        return Row::SelfLoop;
    }
    Row::Edge(start, end, weight)
}

/// Immutable adjacency index over admitted edges.
#[derive(Debug, Clone, PartialEq)]
pub struct ConceptIndex {
    config: IndexConfig,
    terms: Vec<ConceptTerm>,
    ids: HashMap<String, u32>,
    adjacency: Vec<Vec<(u32, f64)>>,
    edges: u64,
}

struct Builder {
    terms: Vec<ConceptTerm>,
    ids: HashMap<String, u32>,
    // neighbor id -> max weight, per node
    adjacency: Vec<HashMap<u32, f64>>,
}

impl Builder {
    fn new() -> Self {
        Builder {
            terms: Vec::new(),
            ids: HashMap::new(),
            adjacency: Vec::new(),
        }
    }

    fn intern(&mut self, term: ConceptTerm) -> u32 {
        if let Some(&id) = self.ids.get(term.as_str()) {
            return id;
        }
        let id = self.terms.len() as u32;
        self.ids.insert(term.0.clone(), id);
        self.terms.push(term);
        self.adjacency.push(HashMap::new());
        id
    }

    fn link(&mut self, a: u32, b: u32, weight: f64) {
        let slot = self.adjacency[a as usize].entry(b).or_insert(weight);
        if weight > *slot {
            *slot = weight;
        }
    }

    fn add(&mut self, start: ConceptTerm, end: ConceptTerm, weight: f64) {
        let a = self.intern(start);
        let b = self.intern(end);
        self.link(a, b, weight);
        self.link(b, a, weight);
    }

    fn ingest(&mut self, line: &str, config: &IndexConfig, report: &mut ParseReport) {
        report.rows += 1;
        match classify(line, config) {
            Row::Malformed => report.malformed += 1,
            Row::Language => report.filtered_language += 1,
            Row::Relation => report.filtered_relation += 1,
            Row::Weight => report.filtered_weight += 1,
            Row::SelfLoop => report.self_loops += 1,
            Row::Edge(start, end, weight) => {
                report.admitted += 1;
                self.add(start, end, weight);
            }
        }
    }

    fn finish(self, config: IndexConfig, edges: u64) -> ConceptIndex {
        let terms = self.terms;
        let adjacency = self
            .adjacency
            .into_iter()
            .map(|m| {
                let mut list: Vec<(u32, f64)> = m.into_iter().collect();
                list.sort_by(|x, y| {
                    y.1.total_cmp(&x.1)
                        .then_with(|| terms[x.0 as usize].cmp(&terms[y.0 as usize]))
                });
                list
            })
            .collect();
        ConceptIndex {
            config,
            terms,
            ids: self.ids,
            adjacency,
            edges,
        }
    }
}

impl ConceptIndex {
    /// Builds the index from dump rows; malformed rows are counted, not fatal.
    pub fn build<I, S>(rows: I, config: IndexConfig) -> (ConceptIndex, ParseReport)
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut report = ParseReport::default();
        let mut builder = Builder::new();
        for row in rows {
            let line = row.as_ref().trim_end_matches(['\n', '\r']);
            if line.is_empty() {
                continue;
            }
            builder.ingest(line, &config, &mut report);
        }
        let edges = report.admitted;
        (builder.finish(config, edges), report)
    }

    /// Streams a dump file from disk.
    pub fn from_dump(path: impl AsRef<Path>, config: IndexConfig) -> Result<(ConceptIndex, ParseReport)> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut reader = BufReader::with_capacity(1 << 20, file);
        let mut report = ParseReport::default();
        let mut builder = Builder::new();
        let mut line = String::new();
        loop {
            line.clear();
            match reader.read_line(&mut line) {
                Ok(0) => break,
                Ok(_) => {}
                // Non-UTF-8 rows count as malformed; skip to the next newline.
                Err(e) if e.kind() == std::io::ErrorKind::InvalidData => {
                    let mut junk = Vec::new();
                    reader.read_until(b'\n', &mut junk).map_err(|e| Error::io(path, e))?;
                    report.rows += 1;
                    report.malformed += 1;
                    continue;
                }
                Err(e) => return Err(Error::io(path, e)),
            }
            let row = line.trim_end_matches(['\n', '\r']);
            if row.is_empty() {
                continue;
            }
            builder.ingest(row, &config, &mut report);
        }
        let edges = report.admitted;
        Ok((builder.finish(config, edges), report))
    }

    pub fn empty(config: IndexConfig) -> ConceptIndex {
        Builder::new().finish(config, 0)
    }

    pub fn config(&self) -> &IndexConfig {
        &self.config
    }

    pub fn node_count(&self) -> usize {
        self.terms.len()
    }

    /// Number of admitted dump rows.
    pub fn edge_count(&self) -> u64 {
        self.edges
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Resolves a query to a node: exact normalized match first, then the
    /// trailing-`s` plural variants (`bees` finds `bee`, `bee` finds `bees`).
    fn resolve(&self, term: &str) -> Option<u32> {
        let norm = normalize_concept(term, &self.config.language)?;
        let key = norm.as_str();
        if let Some(&id) = self.ids.get(key) {
            return Some(id);
        }
        if let Some(stem) = key.strip_suffix('s') {
            if let Some(&id) = self.ids.get(stem) {
                return Some(id);
            }
        }
        self.ids.get(&format!("{key}s")).copied()
    }

    pub fn contains(&self, term: &str) -> bool {
        self.resolve(term).is_some()
    }

    /// Top-`k` one-hop neighbors of `term`, weight-descending then
    /// term-ascending. Unknown terms yield an empty list.
    pub fn neighbors(&self, term: &str, k: usize) -> Vec<(ConceptTerm, f64)> {
        let Some(id) = self.resolve(term) else {
            return Vec::new();
        };
        self.adjacency[id as usize]
            .iter()
            .take(k)
            .map(|&(n, w)| (self.terms[n as usize].clone(), w))
            .collect()
    }

    /// Writes the index in its persisted form.
    ///
    /// Format: JSON lines. The first line is a header
    /// `{"format":"aspectforge-concept-index","version":1,"config":{..},"nodes":N,"edges":E}`;
    /// each following line is `{"term":str,"neighbors":[[str,weight],..]}`
    /// with nodes in ascending term order and neighbor lists in query order.
    pub fn write_to<W: Write>(&self, mut out: W) -> Result<()> {
        let header = PersistHeader {
            format: PERSIST_FORMAT.into(),
            version: PERSIST_VERSION,
            config: self.config.clone(),
            nodes: self.terms.len() as u64,
            edges: self.edges,
        };
        let io = |e| Error::Data(format!("writing concept index: {e}"));
        serde_json::to_writer(&mut out, &header).map_err(|e| io(e.into()))?;
        out.write_all(b"\n").map_err(io)?;
        let mut order: Vec<u32> = (0..self.terms.len() as u32).collect();
        order.sort_by(|a, b| self.terms[*a as usize].cmp(&self.terms[*b as usize]));
        for id in order {
            let node = PersistNode {
                term: self.terms[id as usize].as_str(),
                neighbors: self.adjacency[id as usize]
                    .iter()
                    .map(|&(n, w)| (self.terms[n as usize].as_str(), w))
                    .collect(),
            };
            serde_json::to_writer(&mut out, &node).map_err(|e| io(e.into()))?;
            out.write_all(b"\n").map_err(io)?;
        }
        out.flush().map_err(io)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_to(BufWriter::new(file))
    }

    pub fn read_from<R: BufRead>(reader: R) -> Result<ConceptIndex> {
        let mut lines = reader.lines().enumerate();
        let bad = |line: usize, message: String| Error::MalformedLine { line, message };
        let (_, first) = lines
            .next()
            .ok_or_else(|| Error::Data("concept index file is empty".into()))?;
        let first = first.map_err(|e| bad(1, e.to_string()))?;
        let header: PersistHeader = serde_json::from_str(&first).map_err(|e| bad(1, e.to_string()))?;
        if header.format != PERSIST_FORMAT || header.version != PERSIST_VERSION {
            return Err(Error::Data(format!(
                "unsupported concept index format {:?} version {}",
                header.format, header.version
            )));
        }
        let mut nodes: Vec<(ConceptTerm, Vec<(String, f64)>)> = Vec::new();
        for (i, line) in lines {
            let line = line.map_err(|e| bad(i + 1, e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            let node: OwnedNode = serde_json::from_str(&line).map_err(|e| bad(i + 1, e.to_string()))?;
            nodes.push((ConceptTerm(node.term), node.neighbors));
        }
        let mut terms = Vec::with_capacity(nodes.len());
        let mut ids = HashMap::with_capacity(nodes.len());
        for (term, _) in &nodes {
            ids.insert(term.0.clone(), terms.len() as u32);
            terms.push(term.clone());
        }
        let mut adjacency = Vec::with_capacity(nodes.len());
        for (term, neighbors) in nodes {
            let mut list = Vec::with_capacity(neighbors.len());
            for (n, w) in neighbors {
                let id = *ids.get(&n).ok_or_else(|| {
                    Error::Data(format!("concept index: neighbor {n:?} of {term} is not a node"))
                })?;
                list.push((id, w));
            }
            adjacency.push(list);
        }
        if terms.len() as u64 != header.nodes {
            return Err(Error::Data(format!(
                "concept index header promises {} nodes, found {}",
                header.nodes,
                terms.len()
            )));
        }
        Ok(ConceptIndex {
            config: header.config,
            terms,
            ids,
            adjacency,
            edges: header.edges,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<ConceptIndex> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_from(BufReader::new(file))
    }

    /// Every admitted undirected edge once, as `(smaller, larger, weight)`.
    pub fn undirected_edges(&self) -> BTreeSet<(String, String, u64)> {
        let mut out = BTreeSet::new();
        for (a, list) in self.adjacency.iter().enumerate() {
            for &(b, w) in list {
                let (x, y) = (&self.terms[a].0, &self.terms[b as usize].0);
                if x < y {
                    out.insert((x.clone(), y.clone(), w.to_bits()));
                }
            }
        }
        out
    }
}

const PERSIST_FORMAT: &str = "aspectforge-concept-index";
const PERSIST_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct PersistHeader {
    format: String,
    version: u32,
    config: IndexConfig,
    nodes: u64,
    edges: u64,
}

#[derive(Serialize)]
struct PersistNode<'a> {
    term: &'a str,
    neighbors: Vec<(&'a str, f64)>,
}

#[derive(Deserialize)]
struct OwnedNode {
    term: String,
    neighbors: Vec<(String, f64)>,
}
