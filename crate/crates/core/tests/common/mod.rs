//! Seeded synthetic corpora with their ground truth, and brute-force
//! re-implementations of the rules under test.
#![allow(dead_code)]

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use aspectforge::corpus_io::DocumentRecord;
use aspectforge::manews::MANEWS_ASPECTS;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

const FILLER: &[&str] = &[
    "quiet", "bright", "early", "late", "open", "broad", "narrow", "steady", "warm", "cold", "fresh", "local", "rapid",
    "slow", "major", "minor", "public", "private", "final", "initial", "report", "plan", "vote", "budget", "team",
    "player", "season", "doctor", "patient", "clinic", "flight", "hotel", "beach", "signal", "network", "device",
    "studio", "concert", "film", "award", "council", "mayor", "court", "judge", "policy", "price", "market", "worker",
    "factory", "harbor", "bridge", "road", "garden", "school", "teacher", "student", "crowd", "storm", "winter",
    "summer", "morning", "evening", "agreed", "warned", "reached", "opened", "closed", "moved", "joined", "left",
];

const ENTITIES: &[&str] = &[
    "Arvon", "Belmar", "Corvel", "Dunmore", "Elwyn", "Farrow", "Galen", "Harlow", "Ilford", "Jarrow", "Kendal",
    "Lorne", "Marlow", "Norwell", "Orwin", "Penrith", "Quinlan", "Radley", "Selwyn", "Thornby", "Ulverton", "Varden",
    "Wexley", "Yarrow", "Zennor", "Ashby", "Brinton", "Carew", "Denholm", "Exley",
];

const CONCEPTS: &[&str] = &[
    "river", "valley", "harvest", "engine", "treaty", "vaccine", "orchestra", "league", "satellite", "festival",
    "railway", "mountain", "island", "museum", "election", "stadium", "hospital", "airport", "theater", "parliament",
    "reactor", "telescope", "desert", "glacier", "forest", "canal", "castle", "cathedral", "university", "laboratory",
    "highway", "volcano", "lake", "village", "province", "kingdom", "colony", "planet", "comet", "galaxy",
];

pub struct Synthetic {
    pub records: Vec<DocumentRecord>,
    /// Ground-truth summary sentences per record id.
    pub summary_sentences: HashMap<String, Vec<String>>,
    /// Undirected graph edges `(a, b, weight)` with lowercase terms.
    pub edges: Vec<(String, String, f64)>,
    /// Wikipedia-like pages `(title, text)`.
    pub pages: Vec<(String, String)>,
}

fn cap(w: &str) -> String {
    let mut c = w.chars();
    match c.next() {
        Some(f) => f.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}

fn sentence(rng: &mut ChaCha8Rng, entity_p: f64, concept_p: f64) -> String {
    let len = rng.gen_range(4..10);
    let mut words: Vec<String> = (0..len).map(|_| FILLER.choose(rng).unwrap().to_string()).collect();
    words[0] = cap(&words[0]);
    if rng.gen_bool(entity_p) {
        let at = rng.gen_range(2..=words.len());
        words.insert(at, ENTITIES.choose(rng).unwrap().to_string());
    }
    if rng.gen_bool(concept_p) {
        let mut c = CONCEPTS.choose(rng).unwrap().to_string();
        if rng.gen_bool(0.3) {
            c.push('s');
        }
        // never directly after a capitalized word
        let at = words.len();
        words.insert(at, c);
    }
    if rng.gen_bool(0.15) && words.len() > 3 {
        words[1].push(',');
    }
    format!("{}.", words.join(" "))
}

/// `n` records with categories cycling through the MA-News aspects.
pub fn generate(n: usize, seed: u64) -> Synthetic {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut degree: HashMap<&str, usize> = HashMap::new();
    let mut edges = Vec::new();
    for e in ENTITIES {
        let k = rng.gen_range(2..=4);
        let mut picked = HashSet::new();
        while picked.len() < k {
            let c = *CONCEPTS.choose(&mut rng).unwrap();
            if degree.get(c).copied().unwrap_or(0) >= 5 || !picked.insert(c) {
                continue;
            }
            *degree.entry(c).or_insert(0) += 1;
            let w = 1.0 + 0.25 * rng.gen_range(0..9) as f64;
            edges.push((e.to_lowercase(), c.to_string(), w));
        }
    }

    let mut pages = Vec::new();
    for e in ENTITIES {
        pages.push((e.to_string(), page_text(&mut rng, e)));
    }
    for c in CONCEPTS {
        if rng.gen_bool(0.5) {
            pages.push((cap(c), page_text(&mut rng, c)));
        }
    }

    let mut records = Vec::with_capacity(n);
    let mut summary_sentences = HashMap::new();
    for i in 0..n {
        let paragraphs = rng.gen_range(2..=4);
        let doc: Vec<String> = (0..paragraphs)
            .map(|_| {
                let k = rng.gen_range(2..=4);
                (0..k).map(|_| sentence(&mut rng, 0.5, 0.4)).collect::<Vec<_>>().join(" ")
            })
            .collect();
        let k = rng.gen_range(2..=5);
        let summary: Vec<String> = (0..k).map(|_| sentence(&mut rng, 0.7, 0.4)).collect();
        let id = format!("syn-{i:06}");
        summary_sentences.insert(id.clone(), summary.clone());
        records.push(
            DocumentRecord::new(id, doc.join("\n\n"), summary.join(" "))
                .with_category(MANEWS_ASPECTS[i % MANEWS_ASPECTS.len()]),
        );
    }
    Synthetic {
        records,
        summary_sentences,
        edges,
        pages,
    }
}

fn page_text(rng: &mut ChaCha8Rng, subject: &str) -> String {
    let mut words = vec![cap(subject)];
    for _ in 0..40 {
        let w = if rng.gen_bool(0.7) {
            FILLER.choose(rng).unwrap()
        } else {
            CONCEPTS.choose(rng).unwrap()
        };
        words.push(w.to_string());
    }
    format!("{}.", words.join(" "))
}

impl Synthetic {
    pub fn adjacency(&self) -> HashMap<String, HashSet<String>> {
        let mut adj: HashMap<String, HashSet<String>> = HashMap::new();
        for (a, b, _) in &self.edges {
            adj.entry(a.clone()).or_default().insert(b.clone());
            adj.entry(b.clone()).or_default().insert(a.clone());
        }
        adj
    }

    /// Graph neighbors of `term`, resolving one trailing-`s` difference.
    pub fn neighbors_of(&self, adj: &HashMap<String, HashSet<String>>, term: &str) -> HashSet<String> {
        let candidates = [
            term.to_string(),
            term.strip_suffix('s').unwrap_or(term).to_string(),
            format!("{term}s"),
        ];
        candidates
            .iter()
            .find_map(|t| adj.get(t).cloned())
            .unwrap_or_default()
    }

    pub fn page_for(&self, aspect: &str) -> Option<&str> {
        let key = aspect.to_lowercase();
        let stripped = key.strip_suffix('s').unwrap_or(&key).to_string();
        self.pages
            .iter()
            .find(|(t, _)| t.to_lowercase() == key)
            .or_else(|| self.pages.iter().find(|(t, _)| t.to_lowercase() == stripped))
            .map(|(_, text)| text.as_str())
    }

    pub fn write(&self, dir: &Path) -> Files {
        fs::create_dir_all(dir).unwrap();
        let files = Files {
            corpus: dir.join("corpus.jsonl"),
            dump: dir.join("assertions.tsv"),
            wiki: dir.join("wiki.jsonl"),
        };
        let mut f = fs::File::create(&files.corpus).unwrap();
        for r in &self.records {
            serde_json::to_writer(&mut f, r).unwrap();
            f.write_all(b"\n").unwrap();
        }
        let mut f = fs::File::create(&files.dump).unwrap();
        for (a, b, w) in &self.edges {
            writeln!(
                f,
                "/a/[/r/RelatedTo/,/c/en/{a}/,/c/en/{b}/]\t/r/RelatedTo\t/c/en/{a}\t/c/en/{b}\t{{\"dataset\": \"/d/test\", \"weight\": {w}}}"
            )
            .unwrap();
        }
        let mut f = fs::File::create(&files.wiki).unwrap();
        for (title, text) in &self.pages {
            serde_json::to_writer(&mut f, &serde_json::json!({"title": title, "text": text})).unwrap();
            f.write_all(b"\n").unwrap();
        }
        files
    }
}

pub struct Files {
    pub corpus: PathBuf,
    pub dump: PathBuf,
    pub wiki: PathBuf,
}

/// Whitespace split, edge punctuation trimmed, lowercased.
pub fn oracle_tokens(s: &str) -> Vec<String> {
    s.split_whitespace()
        .map(|w| w.trim_matches(|c: char| !c.is_alphanumeric()).to_lowercase())
        .filter(|w| !w.is_empty())
        .collect()
}

fn word_eq(token: &str, term: &str) -> bool {
    token == term || token.strip_suffix('s') == Some(term) || term.strip_suffix('s') == Some(token)
}

/// Does a token sequence mention `term` (one or more words)? Only the last
/// word of a phrase may differ by a trailing `s`.
pub fn oracle_mentions(tokens: &[String], term: &str) -> bool {
    let words: Vec<&str> = term.split(' ').collect();
    let n = words.len();
    if n == 0 || tokens.len() < n {
        return false;
    }
    (0..=tokens.len() - n).any(|i| {
        (0..n).all(|j| {
            if j == n - 1 {
                word_eq(&tokens[i + j], words[j])
            } else {
                tokens[i + j] == words[j]
            }
        })
    })
}

/// The relevant sentences of `sentences` for `terms`, in order.
pub fn oracle_summary(sentences: &[String], terms: &HashSet<String>) -> String {
    sentences
        .iter()
        .filter(|s| {
            let toks = oracle_tokens(s);
            terms.iter().any(|t| oracle_mentions(&toks, t))
        })
        .cloned()
        .collect::<Vec<_>>()
        .join(" ")
}

/// Brute-force ROUGE-N with clipping, written independently of the library.
pub fn oracle_rouge_n(c: &[&str], r: &[&str], n: usize) -> (f64, f64, f64) {
    let grams = |t: &[&str]| -> BTreeMap<Vec<String>, usize> {
        let mut m = BTreeMap::new();
        if t.len() >= n {
            for i in 0..=t.len() - n {
                let g: Vec<String> = t[i..i + n].iter().map(|s| s.to_string()).collect();
                *m.entry(g).or_insert(0) += 1;
            }
        }
        m
    };
    let (gc, gr) = (grams(c), grams(r));
    let (tc, tr): (usize, usize) = (gc.values().sum(), gr.values().sum());
    if tc == 0 || tr == 0 {
        return (0.0, 0.0, 0.0);
    }
    let mut overlap = 0;
    for (g, k) in &gc {
        overlap += (*k).min(*gr.get(g).unwrap_or(&0));
    }
    prf(overlap, tc, tr)
}

fn prf(overlap: usize, tc: usize, tr: usize) -> (f64, f64, f64) {
    let p = overlap as f64 / tc as f64;
    let r = overlap as f64 / tr as f64;
    let f = if overlap == 0 { 0.0 } else { 2.0 * p * r / (p + r) };
    (p, r, f)
}

/// LCS by exhaustive recursion with memoization, then ROUGE-L.
pub fn oracle_rouge_l(c: &[&str], r: &[&str]) -> (f64, f64, f64) {
    if c.is_empty() || r.is_empty() {
        return (0.0, 0.0, 0.0);
    }
    fn lcs(c: &[&str], r: &[&str], i: usize, j: usize, memo: &mut HashMap<(usize, usize), usize>) -> usize {
        if i == c.len() || j == r.len() {
            return 0;
        }
        if let Some(&v) = memo.get(&(i, j)) {
            return v;
        }
        let v = if c[i] == r[j] {
            1 + lcs(c, r, i + 1, j + 1, memo)
        } else {
            lcs(c, r, i + 1, j, memo).max(lcs(c, r, i, j + 1, memo))
        };
        memo.insert((i, j), v);
        v
    }
    let l = lcs(c, r, 0, 0, &mut HashMap::new());
    prf(l, c.len(), r.len())
}

pub fn read_lines(path: &Path) -> Vec<serde_json::Value> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}
