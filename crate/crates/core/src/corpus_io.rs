//! Corpus ingestion, sentence and paragraph segmentation, tokenization.
//!
//! Every stage that compares words (mention matching, TF-IDF, ROUGE) goes
//! through [`tokenize`], so there is exactly one normalization policy.

use std::collections::HashSet;
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::ops::Deref;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One corpus item.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocumentRecord {
    pub id: String,
    pub document: String,
    pub summary: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub category: Option<String>,
}

impl DocumentRecord {
    pub fn new(id: impl Into<String>, document: impl Into<String>, summary: impl Into<String>) -> Self {
        DocumentRecord {
            id: id.into(),
            document: document.into(),
            summary: summary.into(),
            category: None,
        }
    }

    pub fn with_category(mut self, category: impl Into<String>) -> Self {
        self.category = Some(category.into());
        self
    }

    /// Checks the per-record invariants (nonempty id, nonempty document).
    pub fn validate(&self) -> std::result::Result<(), String> {
        if self.id.is_empty() {
            return Err("record id is empty".into());
        }
        if self.document.split_whitespace().next().is_none() {
            return Err(format!("record {:?} has an empty document", self.id));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CorpusFormat {
    #[default]
    Jsonl,
}

/// Opens a corpus file and returns a streaming reader over its records.
pub fn load_corpus(path: impl AsRef<Path>, format: CorpusFormat) -> Result<CorpusReader<BufReader<File>>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    match format {
        CorpusFormat::Jsonl => Ok(CorpusReader::new(BufReader::new(file))),
    }
}

/// Streaming JSONL record reader.
///
/// Holds one line buffer plus the set of ids seen so far (needed for
/// duplicate detection, and the only state that grows with the corpus).
/// Blank lines are ignored. After the first error the iterator is fused.
pub struct CorpusReader<R> {
    reader: R,
    buf: String,
    line: usize,
    seen: Option<HashSet<String>>,
    done: bool,
}

impl<R: BufRead> CorpusReader<R> {
    pub fn new(reader: R) -> Self {
        CorpusReader {
            reader,
            buf: String::new(),
            line: 0,
            seen: Some(HashSet::new()),
            done: false,
        }
    }

    /// Skips duplicate-id detection; memory then stays constant in the
    /// number of records.
    pub fn without_duplicate_check(mut self) -> Self {
        self.seen = None;
        self
    }

    /// 1-based number of the last line read.
    pub fn line(&self) -> usize {
        self.line
    }

    fn parse_line(&mut self) -> Result<DocumentRecord> {
        let line = self.line;
        let record: DocumentRecord = serde_json::from_str(self.buf.trim_end_matches(['\n', '\r']))
            .map_err(|e| Error::MalformedLine {
                line,
                message: e.to_string(),
            })?;
        record
            .validate()
            .map_err(|message| Error::MalformedLine { line, message })?;
        if let Some(seen) = &mut self.seen {
            if !seen.insert(record.id.clone()) {
                return Err(Error::DuplicateId { line, id: record.id });
            }
        }
        Ok(record)
    }
}

impl<R: BufRead> Iterator for CorpusReader<R> {
    type Item = Result<DocumentRecord>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        loop {
            self.buf.clear();
            self.line += 1;
            match self.reader.read_line(&mut self.buf) {
                Ok(0) => {
                    self.done = true;
                    return None;
                }
                Ok(_) if self.buf.trim().is_empty() => continue,
                Ok(_) => {
                    let out = self.parse_line();
                    self.done = out.is_err();
                    return Some(out);
                }
                Err(e) => {
                    self.done = true;
                    return Some(Err(Error::MalformedLine {
                        line: self.line,
                        message: e.to_string(),
                    }));
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Sentence {
    pub text: String,
    pub index: usize,
}

/// A normalized word: lowercase, no edge punctuation, no whitespace.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Token(String);

impl Token {
    /// Normalizes one whitespace-free chunk; `None` when nothing survives.
    pub fn normalize(chunk: &str) -> Option<Token> {
        let core = chunk.trim_matches(|c: char| !c.is_alphanumeric());
        if core.is_empty() {
            None
        } else {
            Some(Token(core.to_lowercase()))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn into_string(self) -> String {
        self.0
    }
}

impl Deref for Token {
    type Target = str;

    fn deref(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl PartialEq<str> for Token {
    fn eq(&self, other: &str) -> bool {
        self.0 == other
    }
}

impl PartialEq<&str> for Token {
    fn eq(&self, other: &&str) -> bool {
        self.0 == *other
    }
}

pub fn tokenize(text: &str) -> Vec<Token> {
    text.split_whitespace().filter_map(Token::normalize).collect()
}

/// Tokens as plain strings; convenience for scorers.
pub fn tokenize_words(text: &str) -> Vec<String> {
    text.split_whitespace()
        .filter_map(Token::normalize)
        .map(Token::into_string)
        .collect()
}

const ABBREVIATIONS: &[&str] = &[
    "adm", "capt", "co", "col", "corp", "dr", "e.g", "etc", "gen", "gov", "hon", "i.e", "inc",
    "jr", "lt", "ltd", "mr", "mrs", "ms", "prof", "rep", "rev", "sen", "sgt", "sr", "st", "u.k",
    "u.n", "u.s", "vs",
];

fn is_closer(c: char) -> bool {
    matches!(c, '"' | '\'' | '”' | '’' | ')' | ']' | '»')
}

fn is_opening_quote(c: char) -> bool {
    matches!(c, '"' | '\'' | '“' | '‘' | '«')
}

pub(crate) fn ends_sentence(chunk: &str, next: &str) -> bool {
    let body = chunk.trim_end_matches(is_closer);
    let Some(last) = body.chars().last() else {
        return false;
    };
    if !matches!(last, '.' | '!' | '?') {
        return false;
    }
    match next.chars().next() {
        Some(c) if c.is_uppercase() || is_opening_quote(c) => {}
        _ => return false,
    }
    if last == '.' {
        let word = body
            .trim_start_matches(|c: char| !c.is_alphanumeric())
            .trim_end_matches('.')
            .to_lowercase();
        if ABBREVIATIONS.contains(&word.as_str()) {
            return false;
        }
    }
    true
}

/// Rule-based sentence splitter.
///
/// A boundary is a whitespace gap after a chunk ending in `.`, `!` or `?`
/// (optionally followed by closing quotes or brackets) when the next chunk
/// starts with an uppercase letter or an opening quote. Chunks ending in a
/// known abbreviation do not close a sentence. Sentence text is the
/// whitespace-collapsed span.
pub fn segment_sentences(text: &str) -> Vec<Sentence> {
    let chunks: Vec<&str> = text.split_whitespace().collect();
    let mut out = Vec::new();
    let mut start = 0;
    for i in 0..chunks.len() {
        let last = i + 1 == chunks.len();
        if last || ends_sentence(chunks[i], chunks[i + 1]) {
            out.push(Sentence {
                text: chunks[start..=i].join(" "),
                index: out.len(),
            });
            start = i + 1;
        }
    }
    out
}

/// Splits text into paragraphs separated by blank lines. Paragraphs are
/// trimmed; empty ones are dropped.
pub fn paragraphs(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut current: Vec<&str> = Vec::new();
    for line in text.lines() {
        if line.trim().is_empty() {
            if !current.is_empty() {
                out.push(current.join("\n").trim().to_string());
                current.clear();
            }
        } else {
            current.push(line);
        }
    }
    if !current.is_empty() {
        out.push(current.join("\n").trim().to_string());
    }
    out
}

/// Collapses every whitespace run to one space and trims the ends.
pub fn collapse_whitespace(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}
