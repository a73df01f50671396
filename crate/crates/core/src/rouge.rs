//! ROUGE-1/2/L and Lead-3 baselines.
//!
//! Token-level scores over [`tokenize`](crate::corpus_io::tokenize) output:
//! lowercase, no stemming, no stopword removal. ROUGE-L is a single LCS over
//! the whole token sequence.

use std::collections::HashMap;
use std::hash::Hash;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus_io::{segment_sentences, tokenize, tokenize_words};
use crate::error::{Error, Result};
use crate::weak_supervision::{Aspect, TermMatcher};

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct RougeScore {
    #[serde(rename = "p")]
    pub precision: f64,
    #[serde(rename = "r")]
    pub recall: f64,
    #[serde(rename = "f")]
    pub f1: f64,
}

impl RougeScore {
    pub fn from_counts(overlap: usize, candidate: usize, reference: usize) -> Self {
        if candidate == 0 || reference == 0 {
            return RougeScore::default();
        }
        let precision = overlap as f64 / candidate as f64;
        let recall = overlap as f64 / reference as f64;
        RougeScore {
            precision,
            recall,
            f1: f1(precision, recall),
        }
    }
}

fn f1(p: f64, r: f64) -> f64 {
    if p + r > 0.0 {
        2.0 * p * r / (p + r)
    } else {
        0.0
    }
}

fn ngram_counts<T: Eq + Hash>(tokens: &[T], n: usize) -> HashMap<&[T], usize> {
    let mut counts = HashMap::new();
    if n == 0 {
        return counts;
    }
    for gram in tokens.windows(n) {
        *counts.entry(gram).or_insert(0) += 1;
    }
    counts
}

/// Clipped n-gram overlap on token sequences.
pub fn rouge_n_tokens<T: Eq + Hash>(candidate: &[T], reference: &[T], n: usize) -> RougeScore {
    let cand = ngram_counts(candidate, n);
    let refs = ngram_counts(reference, n);
    let overlap = cand
        .iter()
        .map(|(g, &c)| c.min(refs.get(g).copied().unwrap_or(0)))
        .sum();
    RougeScore::from_counts(overlap, cand.values().sum(), refs.values().sum())
}

pub fn rouge_n(candidate: &str, reference: &str, n: usize) -> RougeScore {
    rouge_n_tokens(&tokenize_words(candidate), &tokenize_words(reference), n)
}

/// Longest common subsequence length, two-row dynamic program.
pub fn lcs_len<T: Eq>(a: &[T], b: &[T]) -> usize {
    if a.is_empty() || b.is_empty() {
        return 0;
    }
    let mut prev = vec![0usize; b.len() + 1];
    let mut cur = vec![0usize; b.len() + 1];
    for x in a {
        for (j, y) in b.iter().enumerate() {
            cur[j + 1] = if x == y { prev[j] + 1 } else { prev[j + 1].max(cur[j]) };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

pub fn rouge_l_tokens<T: Eq>(candidate: &[T], reference: &[T]) -> RougeScore {
    RougeScore::from_counts(lcs_len(candidate, reference), candidate.len(), reference.len())
}

pub fn rouge_l(candidate: &str, reference: &str) -> RougeScore {
    rouge_l_tokens(&tokenize_words(candidate), &tokenize_words(reference))
}

/// First three sentences, space-joined.
pub fn lead3(document: &str) -> String {
    segment_sentences(document)
        .into_iter()
        .take(3)
        .map(|s| s.text)
        .collect::<Vec<_>>()
        .join(" ")
}

/// First three sentences relevant to `aspect`; Lead-3 when none is.
pub fn aspect_lead3(document: &str, aspect: &Aspect) -> String {
    let matcher = TermMatcher::for_aspect(aspect);
    let picked: Vec<String> = segment_sentences(document)
        .into_iter()
        .filter(|s| matcher.matches(&tokenize(&s.text)))
        .take(3)
        .map(|s| s.text)
        .collect();
    if picked.is_empty() {
        lead3(document)
    } else {
        picked.join(" ")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairScores {
    pub rouge1: RougeScore,
    pub rouge2: RougeScore,
    #[serde(rename = "rougeL")]
    pub rouge_l: RougeScore,
}

pub fn score_pair(candidate: &str, reference: &str) -> PairScores {
    let c = tokenize_words(candidate);
    let r = tokenize_words(reference);
    PairScores {
        rouge1: rouge_n_tokens(&c, &r, 1),
        rouge2: rouge_n_tokens(&c, &r, 2),
        rouge_l: rouge_l_tokens(&c, &r),
    }
}

/// Corpus report: unweighted means of per-pair precision, recall and F1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RougeReport {
    pub rouge1: RougeScore,
    pub rouge2: RougeScore,
    #[serde(rename = "rougeL")]
    pub rouge_l: RougeScore,
    pub pairs: usize,
}

impl RougeReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn mean(scores: &[RougeScore]) -> RougeScore {
    let n = scores.len() as f64;
    let mut sum = RougeScore::default();
    // fixed left-to-right order keeps the result independent of thread count
    for s in scores {
        sum.precision += s.precision;
        sum.recall += s.recall;
        sum.f1 += s.f1;
    }
    RougeScore {
        precision: sum.precision / n,
        recall: sum.recall / n,
        f1: sum.f1 / n,
    }
}

/// Scores every pair (in parallel) and averages in input order.
pub fn evaluate<I, C, R>(pairs: I) -> Result<RougeReport>
where
    I: IntoIterator<Item = (C, R)>,
    C: AsRef<str> + Send + Sync,
    R: AsRef<str> + Send + Sync,
{
    let pairs: Vec<(C, R)> = pairs.into_iter().collect();
    if pairs.is_empty() {
        return Err(Error::NoPairs);
    }
    let scores: Vec<PairScores> = pairs
        .par_iter()
        .map(|(c, r)| score_pair(c.as_ref(), r.as_ref()))
        .collect();
    let pick = |f: fn(&PairScores) -> RougeScore| mean(&scores.iter().map(f).collect::<Vec<_>>());
    Ok(RougeReport {
        rouge1: pick(|s| s.rouge1),
        rouge2: pick(|s| s.rouge2),
        rouge_l: pick(|s| s.rouge_l),
        pairs: scores.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn identical_is_one() {
        for n in [1, 2] {
            let s = rouge_n("the cat sat down", "the cat sat down", n);
            assert_eq!((s.precision, s.recall, s.f1), (1.0, 1.0, 1.0));
        }
        assert_eq!(rouge_l("a b c", "a b c").f1, 1.0);
    }

    #[test]
    fn unigram_spot_check() {
        let s = rouge_n("the cat sat", "the cat", 1);
        assert!(close(s.precision, 2.0 / 3.0));
        assert!(close(s.recall, 1.0));
        assert!(close(s.f1, 0.8));
    }

    #[test]
    fn disjoint_is_zero() {
        assert_eq!(rouge_n("a b", "c d", 1), RougeScore::default());
        assert_eq!(rouge_l("a b", "c d"), RougeScore::default());
    }

    #[test]
    fn empty_side_is_zero() {
        assert_eq!(rouge_n("", "a", 1), RougeScore::default());
        assert_eq!(rouge_n("a", "a", 2), RougeScore::default());
        assert_eq!(rouge_l("a", ""), RougeScore::default());
    }

    #[test]
    fn clipping() {
        let s = rouge_n("the the the", "the cat", 1);
        assert!(close(s.precision, 1.0 / 3.0));
        assert!(close(s.recall, 0.5));
    }

    #[test]
    fn lcs_spot_checks() {
        let s = rouge_l("a b c d", "a c d");
        assert!(close(s.precision, 0.75));
        assert!(close(s.recall, 1.0));
        assert!(close(s.f1, 6.0 / 7.0));
        let r = rouge_l("c b a", "a b c");
        assert!(close(r.precision, 1.0 / 3.0) && close(r.recall, 1.0 / 3.0));
    }

    #[test]
    fn lead3_cases() {
        assert_eq!(lead3("One. Two. Three. Four. Five."), "One. Two. Three.");
        assert_eq!(lead3("One. Two."), "One. Two.");
        assert_eq!(lead3(""), "");
    }

    #[test]
    fn aspect_lead3_cases() {
        let doc = "Rain fell. Bees swarmed. Cars honked. A bee stung him. The bees left. Silence.";
        let aspect = Aspect::seed("bee", vec![]);
        assert_eq!(aspect_lead3(doc, &aspect), "Bees swarmed. A bee stung him. The bees left.");
        let none = Aspect::seed("volcano", vec![]);
        assert_eq!(aspect_lead3(doc, &none), lead3(doc));
        let all = Aspect::seed("x", vec![]);
        assert_eq!(aspect_lead3("X one. X two. X three. X four.", &all), "X one. X two. X three.");
    }

    #[test]
    fn evaluate_means() {
        let r = evaluate([("a b", "a b"), ("c", "d")]).unwrap();
        assert!(close(r.rouge1.f1, 0.5));
        assert_eq!(r.pairs, 2);
        let single = evaluate([("the cat sat", "the cat")]).unwrap();
        assert_eq!(single.rouge1, rouge_n("the cat sat", "the cat", 1));
        assert!(matches!(evaluate(Vec::<(&str, &str)>::new()), Err(Error::NoPairs)));
    }

    #[test]
    fn report_json_shape() {
        let r = evaluate([("a", "a")]).unwrap();
        let v: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(v["rouge1"]["f"], 1.0);
        assert_eq!(v["rougeL"]["p"], 1.0);
        assert_eq!(v["pairs"], 1);
    }
}
