//! Weak supervision: aspect expansion through the concept graph and
//! extractive aspect summaries.
//!
//! A sentence is relevant to an aspect when it mentions the aspect term or
//! one of the aspect's own graph neighbors. The aspect summary is every
//! relevant generic-summary sentence, in order, joined by single spaces.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::aspect_seed::{extract_entities, EntityMention};
use crate::concept_graph::ConceptIndex;
use crate::corpus_io::{segment_sentences, tokenize, DocumentRecord, Sentence, Token};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AspectOrigin {
    Seed,
    Neighbor,
}

impl AspectOrigin {
    pub fn as_str(self) -> &'static str {
        match self {
            AspectOrigin::Seed => "seed",
            AspectOrigin::Neighbor => "neighbor",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aspect {
    pub term: String,
    pub origin: AspectOrigin,
    pub source_seed: String,
    /// The aspect's own top-k graph neighbors.
    pub neighbor_terms: Vec<String>,
    /// Edge weight to the source seed; `None` for seeds.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight: Option<f64>,
}

impl Aspect {
    pub fn seed(term: impl Into<String>, neighbor_terms: Vec<String>) -> Self {
        let term = term.into();
        Aspect {
            source_seed: term.clone(),
            term,
            origin: AspectOrigin::Seed,
            neighbor_terms,
            weight: None,
        }
    }

    /// Aspect term plus its neighbor terms: the relevance vocabulary.
    pub fn match_terms(&self) -> impl Iterator<Item = &str> {
        std::iter::once(self.term.as_str()).chain(self.neighbor_terms.iter().map(String::as_str))
    }
}

/// Aspect term normalization: the token sequence of the text, space-joined.
pub fn normalize_aspect(text: &str) -> String {
    tokenize(text)
        .iter()
        .map(Token::as_str)
        .collect::<Vec<_>>()
        .join(" ")
}

fn fold_key(term: &str) -> &str {
    term.strip_suffix('s').filter(|s| !s.is_empty()).unwrap_or(term)
}

/// Seeds first (in mention order, deduplicated), then up to `k` neighbors
/// of each seed ordered by edge weight. A term already present, up to a
/// trailing-`s` plural, is not added again.
pub fn expand_aspects(seeds: &[EntityMention], index: &ConceptIndex, k: usize) -> Vec<Aspect> {
    let neighbor_terms = |term: &str| -> Vec<String> {
        index
            .neighbors(term, k)
            .into_iter()
            .map(|(t, _)| t.into_string())
            .collect()
    };
    let mut taken: HashSet<String> = HashSet::new();
    let mut out = Vec::new();
    for seed in seeds {
        let term = normalize_aspect(&seed.text);
        if term.is_empty() || !taken.insert(fold_key(&term).to_string()) {
            continue;
        }
        out.push(Aspect::seed(term.clone(), neighbor_terms(&term)));
    }

    let mut candidates: Vec<(String, String, f64)> = Vec::new();
    for seed in &out {
        for (n, w) in index.neighbors(&seed.term, k) {
            candidates.push((normalize_aspect(n.as_str()), seed.term.clone(), w));
        }
    }
    // stable: equal weights keep seed order, then neighbor rank
    candidates.sort_by(|a, b| b.2.total_cmp(&a.2));
    for (term, source_seed, weight) in candidates {
        if term.is_empty() || !taken.insert(fold_key(&term).to_string()) {
            continue;
        }
        out.push(Aspect {
            neighbor_terms: neighbor_terms(&term),
            term,
            origin: AspectOrigin::Neighbor,
            source_seed,
            weight: Some(weight),
        });
    }
    out
}

/// Compiled relevance vocabulary.
///
/// Single-word terms match a token equal to the term or differing from it
/// by one trailing `s`. Multiword terms match a contiguous token run, with
/// the same folding on the last word only.
#[derive(Debug, Clone, Default)]
pub struct TermMatcher {
    single: HashSet<String>,
    phrases: Vec<Vec<String>>,
}

impl TermMatcher {
    pub fn new<I, S>(terms: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut m = TermMatcher::default();
        for term in terms {
            let words: Vec<String> = tokenize(term.as_ref()).into_iter().map(Token::into_string).collect();
            match words.len() {
                0 => {}
                1 => m.insert_single(&words[0]),
                _ => m.phrases.push(words),
            }
        }
        m
    }

    pub fn for_aspect(aspect: &Aspect) -> Self {
        Self::new(aspect.match_terms())
    }

    fn insert_single(&mut self, word: &str) {
        self.single.insert(word.to_string());
        self.single.insert(format!("{word}s"));
        if let Some(stem) = word.strip_suffix('s').filter(|s| !s.is_empty()) {
            self.single.insert(stem.to_string());
        }
    }

    pub fn is_empty(&self) -> bool {
        self.single.is_empty() && self.phrases.is_empty()
    }

    pub fn matches(&self, tokens: &[Token]) -> bool {
        if tokens.iter().any(|t| self.single.contains(t.as_str())) {
            return true;
        }
        self.phrases.iter().any(|p| {
            let (last, init) = p.split_last().expect("phrases have 2+ words");
            tokens.windows(p.len()).any(|w| {
                w[..init.len()].iter().zip(init).all(|(t, x)| t.as_str() == x) && fold_eq(w[init.len()].as_str(), last)
            })
        })
    }
}

fn fold_eq(token: &str, word: &str) -> bool {
    token == word || token.strip_suffix('s') == Some(word) || word.strip_suffix('s') == Some(token)
}

/// Does `sentence` mention any of `terms`?
pub fn mentions<S: AsRef<str>>(sentence: &Sentence, terms: &[S]) -> bool {
    TermMatcher::new(terms).matches(&tokenize(&sentence.text))
}

/// Concatenation of the sentences relevant to `aspect`, or `""`.
pub fn synthesize_summary(generic_summary: &[Sentence], aspect: &Aspect) -> String {
    let matcher = TermMatcher::for_aspect(aspect);
    join_relevant(generic_summary.iter().map(|s| (s, tokenize(&s.text))), &matcher)
}

fn join_relevant<'a, I>(sentences: I, matcher: &TermMatcher) -> String
where
    I: IntoIterator<Item = (&'a Sentence, Vec<Token>)>,
{
    sentences
        .into_iter()
        .filter(|(_, tokens)| matcher.matches(tokens))
        .map(|(s, _)| s.text.as_str())
        .collect::<Vec<_>>()
        .join(" ")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeakSupConfig {
    pub neighbor_k: usize,
    pub max_aspects_per_doc: usize,
}

impl Default for WeakSupConfig {
    fn default() -> Self {
        WeakSupConfig {
            neighbor_k: 10,
            max_aspects_per_doc: 16,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeakExample {
    pub doc_id: String,
    pub aspect: Aspect,
    pub summary: String,
    pub related_words: Vec<String>,
    pub model_input: Option<String>,
}

/// Line of the pre-augmentation output file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeakExampleLine {
    pub doc_id: String,
    pub aspect: String,
    pub aspect_origin: AspectOrigin,
    pub source_seed: String,
    pub summary: String,
}

impl From<&WeakExample> for WeakExampleLine {
    fn from(e: &WeakExample) -> Self {
        WeakExampleLine {
            doc_id: e.doc_id.clone(),
            aspect: e.aspect.term.clone(),
            aspect_origin: e.aspect.origin,
            source_seed: e.aspect.source_seed.clone(),
            summary: e.summary.clone(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecordStats {
    pub seed_aspects: u64,
    pub neighbor_aspects: u64,
    pub seed_examples: u64,
    pub neighbor_examples: u64,
    /// Aspects whose synthesized summary was empty.
    pub discarded_empty: u64,
    /// Examples whose summary is the whole generic summary.
    pub full_summary: u64,
    /// Aspects never synthesized because the per-document cap was reached.
    pub capped: u64,
}

impl RecordStats {
    pub fn examples(&self) -> u64 {
        self.seed_examples + self.neighbor_examples
    }

    pub fn absorb(&mut self, other: &RecordStats) {
        self.seed_aspects += other.seed_aspects;
        self.neighbor_aspects += other.neighbor_aspects;
        self.seed_examples += other.seed_examples;
        self.neighbor_examples += other.neighbor_examples;
        self.discarded_empty += other.discarded_empty;
        self.full_summary += other.full_summary;
        self.capped += other.capped;
    }
}

/// Examples of one record from the built-in recognizer's seeds.
pub fn build_weak_examples(
    record: &DocumentRecord,
    index: &ConceptIndex,
    config: &WeakSupConfig,
) -> (Vec<WeakExample>, RecordStats) {
    let seeds = extract_entities(&record.summary);
    build_weak_examples_from_seeds(record, &seeds, index, config)
}

/// Examples of one record from precomputed seed mentions. Aspects are
/// taken in priority order (seeds, then neighbors by weight) until
/// `max_aspects_per_doc` examples exist; aspects with an empty summary are
/// discarded.
pub fn build_weak_examples_from_seeds(
    record: &DocumentRecord,
    seeds: &[EntityMention],
    index: &ConceptIndex,
    config: &WeakSupConfig,
) -> (Vec<WeakExample>, RecordStats) {
    let aspects = expand_aspects(seeds, index, config.neighbor_k.max(1));
    let sentences = segment_sentences(&record.summary);
    let tokens: Vec<Vec<Token>> = sentences.iter().map(|s| tokenize(&s.text)).collect();

    let mut stats = RecordStats::default();
    let mut out = Vec::new();
    for (i, aspect) in aspects.iter().enumerate() {
        match aspect.origin {
            AspectOrigin::Seed => stats.seed_aspects += 1,
            AspectOrigin::Neighbor => stats.neighbor_aspects += 1,
        }
        if out.len() >= config.max_aspects_per_doc {
            stats.capped = (aspects.len() - i) as u64;
            for rest in &aspects[i + 1..] {
                match rest.origin {
                    AspectOrigin::Seed => stats.seed_aspects += 1,
                    AspectOrigin::Neighbor => stats.neighbor_aspects += 1,
                }
            }
            break;
        }
        let matcher = TermMatcher::for_aspect(aspect);
        let hits: Vec<usize> = (0..sentences.len()).filter(|&j| matcher.matches(&tokens[j])).collect();
        if hits.is_empty() {
            stats.discarded_empty += 1;
            continue;
        }
        if hits.len() == sentences.len() {
            stats.full_summary += 1;
        }
        match aspect.origin {
            AspectOrigin::Seed => stats.seed_examples += 1,
            AspectOrigin::Neighbor => stats.neighbor_examples += 1,
        }
        let summary = hits
            .iter()
            .map(|&j| sentences[j].text.as_str())
            .collect::<Vec<_>>()
            .join(" ");
        out.push(WeakExample {
            doc_id: record.id.clone(),
            aspect: aspect.clone(),
            summary,
            related_words: Vec::new(),
            model_input: None,
        });
    }
    (out, stats)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::concept_graph::IndexConfig;

    fn row(start: &str, end: &str, weight: f64) -> String {
        format!("/a/x\t/r/RelatedTo\t/c/en/{start}\t/c/en/{end}\t{{\"weight\":{weight}}}")
    }

    fn index(rows: &[(&str, &str, f64)]) -> ConceptIndex {
        let rows: Vec<String> = rows.iter().map(|(a, b, w)| row(a, b, *w)).collect();
        ConceptIndex::build(rows, IndexConfig::default()).0
    }

    fn sentence(text: &str) -> Sentence {
        Sentence {
            text: text.into(),
            index: 0,
        }
    }

    fn mention(text: &str) -> EntityMention {
        EntityMention::new(text, 0, text.chars().count())
    }

    #[test]
    fn bees_expand_to_insect() {
        let idx = index(&[("bee", "insect", 2.0), ("bee", "honey", 1.5)]);
        let aspects = expand_aspects(&[mention("bees")], &idx, 10);
        let terms: Vec<_> = aspects.iter().map(|a| (a.term.as_str(), a.origin)).collect();
        assert_eq!(
            terms,
            [
                ("bees", AspectOrigin::Seed),
                ("insect", AspectOrigin::Neighbor),
                ("honey", AspectOrigin::Neighbor)
            ]
        );
        assert_eq!(aspects[1].source_seed, "bees");
        assert!(aspects[1].neighbor_terms.contains(&"bee".to_string()));
    }

    #[test]
    fn no_seeds_no_aspects() {
        let idx = index(&[("bee", "insect", 2.0)]);
        assert!(expand_aspects(&[], &idx, 10).is_empty());
    }

    #[test]
    fn shared_neighbor_appears_once() {
        let idx = index(&[("x", "z", 1.0), ("y", "z", 2.0)]);
        let aspects = expand_aspects(&[mention("x"), mention("y")], &idx, 10);
        let z: Vec<_> = aspects.iter().filter(|a| a.term == "z").collect();
        assert_eq!(z.len(), 1);
        assert_eq!(z[0].source_seed, "y");
        assert_eq!(z[0].weight, Some(2.0));
    }

    #[test]
    fn seed_wins_over_neighbor() {
        let idx = index(&[("x", "y", 5.0)]);
        let aspects = expand_aspects(&[mention("x"), mention("y")], &idx, 10);
        assert_eq!(aspects.len(), 2);
        assert!(aspects.iter().all(|a| a.origin == AspectOrigin::Seed));
    }

    #[test]
    fn neighbors_ordered_by_weight_across_seeds() {
        let idx = index(&[("x", "a", 1.0), ("y", "b", 3.0), ("x", "c", 2.0)]);
        let aspects = expand_aspects(&[mention("x"), mention("y")], &idx, 10);
        let terms: Vec<_> = aspects.iter().map(|a| a.term.as_str()).collect();
        assert_eq!(terms, ["x", "y", "b", "c", "a"]);
    }

    #[test]
    fn mention_matching() {
        assert!(mentions(&sentence("Bees pollinate flowers"), &["bee"]));
        assert!(!mentions(&sentence("The sky is blue"), &["insect"]));
        assert!(mentions(&sentence("He visited New York today"), &["new york"]));
        assert!(mentions(&sentence("Both New Yorks"), &["new york"]));
        assert!(!mentions(&sentence("New jersey, York"), &["new york"]));
        assert!(mentions(&sentence("A bee."), &["bees"]));
        assert!(!mentions(&sentence("Beekeepers"), &["bee"]));
        assert!(!mentions::<&str>(&sentence("anything"), &[]));
    }

    #[test]
    fn summary_keeps_relevant_sentences() {
        let generic = segment_sentences("Bees are vanishing. Officials met Monday.");
        let aspect = Aspect {
            term: "insect".into(),
            origin: AspectOrigin::Neighbor,
            source_seed: "bees".into(),
            neighbor_terms: vec!["bee".into()],
            weight: Some(2.0),
        };
        assert_eq!(synthesize_summary(&generic, &aspect), "Bees are vanishing.");
        let all = Aspect::seed("officials", vec!["bee".into()]);
        assert_eq!(synthesize_summary(&generic, &all), "Bees are vanishing. Officials met Monday.");
        let none = Aspect::seed("volcano", vec![]);
        assert_eq!(synthesize_summary(&generic, &none), "");
    }

    #[test]
    fn record_examples_and_cap() {
        let idx = index(&[("paris", "france", 2.0), ("berlin", "germany", 2.0)]);
        let record = DocumentRecord::new(
            "r1",
            "doc",
            "Paris hosted the summit. France was pleased. Berlin sent envoys. Germany agreed.",
        );
        let (examples, stats) = build_weak_examples(&record, &idx, &WeakSupConfig::default());
        let terms: Vec<_> = examples.iter().map(|e| e.aspect.term.as_str()).collect();
        // France/Germany are also capitalized seeds
        assert_eq!(terms, ["paris", "france", "berlin", "germany"]);
        assert_eq!(examples[0].summary, "Paris hosted the summit. France was pleased.");
        assert_eq!(stats.examples(), 4);

        let capped = WeakSupConfig {
            max_aspects_per_doc: 1,
            ..WeakSupConfig::default()
        };
        let (examples, stats) = build_weak_examples(&record, &idx, &capped);
        assert_eq!(examples.len(), 1);
        assert_eq!(examples[0].aspect.term, "paris");
        assert!(stats.capped > 0);
    }

    #[test]
    fn no_entities_no_examples() {
        let idx = index(&[("bee", "insect", 2.0)]);
        let record = DocumentRecord::new("r", "doc", "nothing capitalized here.");
        let (examples, stats) = build_weak_examples(&record, &idx, &WeakSupConfig::default());
        assert!(examples.is_empty());
        assert_eq!(stats, RecordStats::default());
    }
}
