//! Seed aspects: entity mentions in the generic summary.
//!
//! The built-in recognizer is a capitalization heuristic. Users with a real
//! NER model supply its output through the annotation sidecar and
//! [`merge_annotations`] folds it in.

use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus_io::{ends_sentence, DocumentRecord};
use crate::error::{Error, Result};
use crate::salience::is_stopword;

/// A mention with a half-open span in Unicode scalar (char) offsets.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntityMention {
    pub text: String,
    pub start: usize,
    pub end: usize,
}

impl EntityMention {
    pub fn new(text: impl Into<String>, start: usize, end: usize) -> Self {
        EntityMention {
            text: text.into(),
            start,
            end,
        }
    }

    /// Lowercase, whitespace-collapsed text.
    pub fn key(&self) -> String {
        mention_key(&self.text)
    }

    fn overlaps(&self, other: &EntityMention) -> bool {
        self.start < other.end && other.start < self.end
    }
}

pub fn mention_key(text: &str) -> String {
    text.split_whitespace()
        .map(str::to_lowercase)
        .collect::<Vec<_>>()
        .join(" ")
}

/// Slice by char offsets; `None` when out of bounds or inverted.
pub fn char_slice(text: &str, start: usize, end: usize) -> Option<&str> {
    if start > end {
        return None;
    }
    let mut idx = text.char_indices().map(|(b, _)| b).chain(std::iter::once(text.len()));
    let from = idx.nth(start)?;
    let to = if end == start { from } else { idx.nth(end - start - 1)? };
    Some(&text[from..to])
}

struct Chunk<'a> {
    raw: &'a str,
    /// char span of the chunk core (edge punctuation and possessive removed)
    core_start: usize,
    core_end: usize,
    core: &'a str,
    clean_left: bool,
    clean_right: bool,
}

fn chunks(text: &str) -> Vec<Chunk<'_>> {
    let mut out = Vec::new();
    let mut chars = 0usize;
    let mut rest = text;
    while !rest.is_empty() {
        let ws = rest.len() - rest.trim_start().len();
        chars += rest[..ws].chars().count();
        rest = &rest[ws..];
        if rest.is_empty() {
            break;
        }
        let len = rest.find(char::is_whitespace).unwrap_or(rest.len());
        let raw = &rest[..len];
        let lead = raw.len() - raw.trim_start_matches(|c: char| !c.is_alphanumeric()).len();
        let mut core = raw[lead..].trim_end_matches(|c: char| !c.is_alphanumeric());
        for suffix in ["'s", "’s", "'S", "’S"] {
            if let Some(stem) = core.strip_suffix(suffix) {
                core = stem.trim_end_matches(|c: char| !c.is_alphanumeric());
                break;
            }
        }
        let core_start = chars + raw[..lead].chars().count();
        let core_end = core_start + core.chars().count();
        out.push(Chunk {
            raw,
            core_start,
            core_end,
            core,
            clean_left: lead == 0,
            clean_right: lead + core.len() == raw.len(),
        });
        chars += raw.chars().count();
        rest = &rest[len..];
    }
    out
}

fn is_capitalized(word: &str) -> bool {
    word.chars().next().is_some_and(char::is_uppercase)
}

fn is_all_caps(word: &str) -> bool {
    let mut letters = word.chars().filter(|c| c.is_alphabetic()).peekable();
    letters.peek().is_some() && letters.all(char::is_uppercase)
}

/// Heuristic recognizer: maximal runs of capitalized tokens.
///
/// A run breaks at any punctuation between tokens. Capitalized stopwords
/// are dropped at sentence starts, and all-caps stopwords anywhere.
/// Mentions are deduplicated by [`mention_key`], first occurrence wins.
pub fn extract_entities(summary: &str) -> Vec<EntityMention> {
    let chunks = chunks(summary);
    let mut runs: Vec<(usize, usize)> = Vec::new();
    let mut open: Option<(usize, usize)> = None;
    for (i, chunk) in chunks.iter().enumerate() {
        let sentence_initial = i == 0 || ends_sentence(chunks[i - 1].raw, chunk.raw);
        let lower = chunk.core.to_lowercase();
        let eligible = !chunk.core.is_empty()
            && is_capitalized(chunk.core)
            && !(is_stopword(&lower) && (sentence_initial || is_all_caps(chunk.core)));
        if !eligible {
            runs.extend(open.take());
            continue;
        }
        let joins = open.is_some() && chunks[i - 1].clean_right && chunk.clean_left && !sentence_initial;
        match (&mut open, joins) {
            (Some(run), true) => run.1 = i,
            _ => {
                runs.extend(open.take());
                open = Some((i, i));
            }
        }
        if !chunk.clean_right {
            runs.extend(open.take());
        }
    }
    runs.extend(open);

    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (first, last) in runs {
        let (start, end) = (chunks[first].core_start, chunks[last].core_end);
        let text = char_slice(summary, start, end).expect("span from chunking");
        let mention = EntityMention::new(text, start, end);
        if seen.insert(mention.key()) {
            out.push(mention);
        }
    }
    out
}

/// Checks that `mention` reproduces its text from `summary`.
pub fn validate_mention(summary: &str, mention: &EntityMention) -> Result<()> {
    let fail = |message: String| Error::Annotation {
        mention: mention.text.clone(),
        message,
    };
    if mention.text.is_empty() {
        return Err(fail("empty mention text".into()));
    }
    let len = summary.chars().count();
    if mention.start >= mention.end || mention.end > len {
        return Err(fail(format!(
            "span ({}, {}) out of bounds for a {len}-char summary",
            mention.start, mention.end
        )));
    }
    let found = char_slice(summary, mention.start, mention.end).unwrap_or_default();
    if found != mention.text {
        return Err(fail(format!(
            "span ({}, {}) covers {found:?}",
            mention.start, mention.end
        )));
    }
    Ok(())
}

/// Union of built-in and external mentions.
///
/// External mentions win on duplicates and on overlapping spans. The result
/// is deduplicated by normalized text and ordered by start offset.
pub fn merge_annotations(record: &DocumentRecord, external: &[EntityMention]) -> Result<Vec<EntityMention>> {
    for m in external {
        validate_mention(&record.summary, m)?;
    }
    let mut ext: Vec<&EntityMention> = external.iter().collect();
    ext.sort_by_key(|m| (m.start, std::cmp::Reverse(m.end)));

    let mut kept: Vec<EntityMention> = Vec::new();
    let mut keys = HashSet::new();
    for m in ext {
        if kept.iter().any(|k| k.overlaps(m)) || !keys.insert(m.key()) {
            continue;
        }
        kept.push(m.clone());
    }
    for m in extract_entities(&record.summary) {
        if kept.iter().any(|k| k.overlaps(&m)) || !keys.insert(m.key()) {
            continue;
        }
        kept.push(m);
    }
    kept.sort_by_key(|m| m.start);
    Ok(kept)
}

#[derive(Debug, Deserialize)]
struct SidecarLine {
    id: String,
    entities: Vec<EntityMention>,
}

/// External annotations keyed by record id.
#[derive(Debug, Default, Clone)]
pub struct Annotations {
    by_id: HashMap<String, Vec<EntityMention>>,
}

impl Annotations {
    pub fn read_from<R: BufRead>(reader: R) -> Result<Annotations> {
        let mut by_id: HashMap<String, Vec<EntityMention>> = HashMap::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| Error::MalformedLine {
                line: i + 1,
                message: e.to_string(),
            })?;
            if line.trim().is_empty() {
                continue;
            }
            let parsed: SidecarLine = serde_json::from_str(&line).map_err(|e| Error::MalformedLine {
                line: i + 1,
                message: e.to_string(),
            })?;
            by_id.entry(parsed.id).or_default().extend(parsed.entities);
        }
        Ok(Annotations { by_id })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Annotations> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_from(BufReader::new(file))
    }

    pub fn get(&self, id: &str) -> Option<&[EntityMention]> {
        self.by_id.get(id).map(Vec::as_slice)
    }

    pub fn len(&self) -> usize {
        self.by_id.len()
    }

    pub fn is_empty(&self) -> bool {
        self.by_id.is_empty()
    }
}
