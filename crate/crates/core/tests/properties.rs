mod common;

use std::collections::{BTreeMap, HashMap, HashSet};

use aspectforge::aspect_seed::{char_slice, extract_entities};
use aspectforge::concept_graph::{ConceptIndex, IndexConfig};
use aspectforge::corpus_io::{segment_sentences, tokenize, tokenize_words, DocumentRecord};
use aspectforge::manews::{self, split_sources, DatasetConfig, SplitSizes, MANEWS_ASPECTS};
use aspectforge::model_input::{parse_input, serialize_input, ModelInput, SEPARATOR};
use aspectforge::rouge::{rouge_l, rouge_n};
use aspectforge::salience::{fit_tfidf, related_words, TfIdfModel, WikiExtract};
use aspectforge::weak_supervision::{build_weak_examples, AspectOrigin, WeakSupConfig};
use proptest::prelude::*;

fn text_strategy() -> impl Strategy<Value = String> {
    let word = prop_oneof![
        "[a-z]{1,8}",
        "[A-Z][a-z]{1,7}",
        Just("Dr.".to_string()),
        Just("U.S.".to_string()),
        Just("\"Yes,\"".to_string()),
        Just("end.".to_string()),
        Just("what?!".to_string()),
        Just("--".to_string()),
        Just("’s".to_string()),
        Just("café.".to_string()),
        "[0-9]{1,4}",
    ];
    let sep = prop_oneof![Just(" "), Just("  "), Just("\n"), Just("\n\n"), Just("\t")];
    prop::collection::vec((word, sep), 0..40).prop_map(|v| v.into_iter().map(|(w, s)| format!("{w}{s}")).collect())
}

fn multiset<I: IntoIterator<Item = String>>(it: I) -> BTreeMap<String, usize> {
    let mut m = BTreeMap::new();
    for t in it {
        *m.entry(t).or_insert(0) += 1;
    }
    m
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn sentences_cover_tokens(text in text_strategy()) {
        let sentences = segment_sentences(&text);
        let from_sentences = multiset(sentences.iter().flat_map(|s| tokenize_words(&s.text)));
        prop_assert_eq!(from_sentences, multiset(tokenize_words(&text)));
        for (i, s) in sentences.iter().enumerate() {
            prop_assert_eq!(s.index, i);
        }
        prop_assert_eq!(segment_sentences(&text), sentences);
    }

    #[test]
    fn tokens_are_normalized(text in text_strategy()) {
        for t in tokenize(&text) {
            prop_assert!(!t.is_empty());
            prop_assert!(!t.chars().any(char::is_whitespace));
            prop_assert_eq!(t.to_lowercase(), t.as_str());
        }
    }

    #[test]
    fn entity_spans_reproduce_text(text in text_strategy()) {
        let mentions = extract_entities(&text);
        prop_assert_eq!(&extract_entities(&text), &mentions);
        for m in &mentions {
            prop_assert!(!m.text.is_empty());
            prop_assert_eq!(char_slice(&text, m.start, m.end), Some(m.text.as_str()));
        }
    }
}

fn edges_strategy() -> impl Strategy<Value = Vec<(u8, u8, u8)>> {
    prop::collection::vec((0u8..12, 0u8..12, 0u8..8), 0..60)
}

fn dump(edges: &[(u8, u8, u8)]) -> Vec<String> {
    edges
        .iter()
        .map(|(a, b, w)| {
            format!(
                "/a/x\t/r/RelatedTo\t/c/en/t{a}\t/c/en/t{b}\t{{\"weight\": {}}}",
                1.0 + *w as f64 * 0.5
            )
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn neighbor_index_properties(edges in edges_strategy(), k in 0usize..14) {
        let rows = dump(&edges);
        let (index, report) = ConceptIndex::build(&rows, IndexConfig::default());
        prop_assert_eq!(report.rows as usize, rows.len());
        for (a, b, _) in &edges {
            if a == b {
                continue;
            }
            let (ta, tb) = (format!("t{a}"), format!("t{b}"));
            prop_assert!(index.neighbors(&ta, 100).iter().any(|(t, _)| t.as_str() == tb));
            prop_assert!(index.neighbors(&tb, 100).iter().any(|(t, _)| t.as_str() == ta));
        }
        for n in 0..12 {
            let t = format!("t{n}");
            let small = index.neighbors(&t, k);
            let big = index.neighbors(&t, k + 1);
            prop_assert!(small.len() <= k);
            prop_assert_eq!(&big[..small.len()], &small[..]);
            for w in big.windows(2) {
                let ordered = w[0].1 > w[1].1 || (w[0].1 == w[1].1 && w[0].0 < w[1].0);
                prop_assert!(ordered, "{:?}", w);
            }
        }
        let (again, _) = ConceptIndex::build(&rows, IndexConfig::default());
        let (mut x, mut y) = (Vec::new(), Vec::new());
        index.write_to(&mut x).unwrap();
        again.write_to(&mut y).unwrap();
        prop_assert_eq!(&x, &y);
        let reloaded = ConceptIndex::read_from(&x[..]).unwrap();
        let mut z = Vec::new();
        reloaded.write_to(&mut z).unwrap();
        prop_assert_eq!(x, z);
    }
}

fn corpus_strategy() -> impl Strategy<Value = Vec<String>> {
    prop::collection::vec(
        prop::collection::vec(prop::sample::select(vec!["bee", "honey", "jar", "sun", "moon", "tea", "cup"]), 1..12)
            .prop_map(|w| w.join(" ")),
        1..8,
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn tfidf_is_order_insensitive(docs in corpus_strategy(), seed in any::<u64>()) {
        let records: Vec<DocumentRecord> =
            docs.iter().enumerate().map(|(i, d)| DocumentRecord::new(i.to_string(), d.clone(), "")).collect();
        let mut shuffled = records.clone();
        use rand::{seq::SliceRandom, SeedableRng};
        shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
        let a = fit_tfidf(&records).unwrap();
        let b = fit_tfidf(&shuffled).unwrap();
        prop_assert_eq!(a.sorted_doc_freq(), b.sorted_doc_freq());
        prop_assert_eq!(a.doc_count(), b.doc_count());
        for (_, df) in a.sorted_doc_freq() {
            prop_assert!(df >= 1 && df <= a.doc_count());
        }
        let doc = &docs[0];
        prop_assert_eq!(a.score_document(doc), b.score_document(doc));
    }

    #[test]
    fn ranking_is_total_and_related_words_contract(
        docs in corpus_strategy(),
        page in prop::collection::vec(prop::sample::select(vec!["bee", "honey", "jar", "sun", "tea", "Moon.", "x"]), 0..10),
        limit in 0usize..12,
    ) {
        let mut model = TfIdfModel::default();
        for d in &docs {
            model.add_document(d);
        }
        let doc = &docs[docs.len() - 1];
        let ranking = model.score_document(doc);
        let words: HashSet<&String> = ranking.iter().map(|(w, _)| w).collect();
        prop_assert_eq!(words.len(), ranking.len());
        for w in ranking.windows(2) {
            prop_assert!(w[0].1 >= w[1].1);
        }
        prop_assert_eq!(&model.score_document(doc), &ranking);

        let page_text = page.join(" ");
        let extract = WikiExtract::new("P", page_text.clone());
        let expected_set: HashSet<String> = tokenize_words(&page_text).into_iter().collect();
        prop_assert_eq!(extract.token_set(), &expected_set);
        let doc_words: HashSet<String> = tokenize_words(doc).into_iter().collect();
        let rw = related_words(&ranking, Some(&extract), limit).into_vec();
        let rw_next = related_words(&ranking, Some(&extract), limit + 1).into_vec();
        prop_assert!(rw.len() <= limit);
        prop_assert_eq!(&rw_next[..rw.len()], &rw[..]);
        let unique: HashSet<&String> = rw.iter().collect();
        prop_assert_eq!(unique.len(), rw.len());
        for w in &rw {
            prop_assert!(doc_words.contains(w) && extract.contains(w), "{}", w);
        }
        prop_assert!(related_words(&ranking, None, limit).into_vec().is_empty());
    }
}

fn plain_word() -> impl Strategy<Value = String> {
    "[a-zA-Z0-9.,'!?é-]{1,10}"
}

fn model_input_strategy() -> impl Strategy<Value = ModelInput> {
    (
        prop::collection::vec(plain_word(), 0..3).prop_map(|w| w.join(" ")),
        prop::collection::vec(plain_word(), 0..11),
        "(.|\n){0,80}",
    )
        .prop_map(|(aspect, related, document)| ModelInput::new(aspect, related, document))
        .prop_filter("valid", |m| m.validate().is_ok())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn model_input_round_trip(input in model_input_strategy()) {
        let s = serialize_input(&input).unwrap();
        prop_assert_eq!(parse_input(&s).unwrap(), input.clone());
        let expected = format!("{}:{}{}{}", input.aspect, input.related.join(" "), SEPARATOR, input.document);
        prop_assert_eq!(s, expected);
    }

    #[test]
    fn serialization_is_injective(a in model_input_strategy(), b in model_input_strategy()) {
        if a != b {
            prop_assert_ne!(serialize_input(&a).unwrap(), serialize_input(&b).unwrap());
        }
    }
}

fn token_seq() -> impl Strategy<Value = Vec<&'static str>> {
    prop::collection::vec(prop::sample::select(vec!["a", "b", "c", "d", "e"]), 0..15)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn rouge_bounds_and_identity(c in token_seq(), r in token_seq()) {
        let (cs, rs) = (c.join(" "), r.join(" "));
        for s in [rouge_n(&cs, &rs, 1), rouge_n(&cs, &rs, 2), rouge_l(&cs, &rs)] {
            for v in [s.precision, s.recall, s.f1] {
                prop_assert!((0.0..=1.0).contains(&v));
            }
            let f = if s.precision + s.recall > 0.0 {
                2.0 * s.precision * s.recall / (s.precision + s.recall)
            } else {
                0.0
            };
            prop_assert!((s.f1 - f).abs() < 1e-12);
        }
        if !c.is_empty() {
            prop_assert_eq!(rouge_n(&cs, &cs, 1).f1, 1.0);
            prop_assert_eq!(rouge_l(&cs, &cs).f1, 1.0);
            if c.len() >= 2 {
                prop_assert_eq!(rouge_n(&cs, &cs, 2).f1, 1.0);
            }
        }
    }

    #[test]
    fn appending_reference_tokens_never_lowers_recall(c in token_seq(), r in token_seq(), pick in 0usize..15) {
        prop_assume!(!r.is_empty());
        let extra = r[pick % r.len()];
        let (cs, rs) = (c.join(" "), r.join(" "));
        let longer = format!("{cs} {extra}");
        prop_assert!(rouge_n(&longer, &rs, 1).recall >= rouge_n(&cs, &rs, 1).recall);
        prop_assert!(rouge_l(&longer, &rs).recall >= rouge_l(&cs, &rs).recall);
        prop_assert!(rouge_n(&longer, &rs, 2).recall >= rouge_n(&cs, &rs, 2).recall);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn weak_examples_pass_brute_force_recheck(seed in any::<u64>()) {
        let syn = common::generate(20, seed);
        let (index, _) = ConceptIndex::build(
            syn.edges.iter().map(|(a, b, w)| format!("/a/x\t/r/RelatedTo\t/c/en/{a}\t/c/en/{b}\t{{\"weight\": {w}}}")),
            IndexConfig::default(),
        );
        let adj = syn.adjacency();
        let config = WeakSupConfig { neighbor_k: 10, max_aspects_per_doc: 1000 };
        for record in &syn.records {
            let (examples, stats) = build_weak_examples(record, &index, &config);
            prop_assert_eq!(&build_weak_examples(record, &index, &config).0, &examples);
            prop_assert_eq!(stats.examples() as usize, examples.len());
            let sentences = &syn.summary_sentences[&record.id];
            for ex in &examples {
                let mut terms = syn.neighbors_of(&adj, &ex.aspect.term);
                terms.insert(ex.aspect.term.clone());
                prop_assert_eq!(&ex.summary, &common::oracle_summary(sentences, &terms));
                prop_assert!(!ex.summary.is_empty());
                if ex.aspect.origin == AspectOrigin::Neighbor {
                    prop_assert_ne!(&ex.aspect.source_seed, &ex.aspect.term);
                }
            }
            // every seed with a relevant sentence yields an example
            let emitted: HashSet<&str> = examples.iter().map(|e| e.aspect.term.as_str()).collect();
            for m in extract_entities(&record.summary) {
                let term = m.text.to_lowercase();
                prop_assert!(record.summary.contains(&m.text));
                let mut terms = syn.neighbors_of(&adj, &term);
                terms.insert(term.clone());
                let relevant = !common::oracle_summary(sentences, &terms).is_empty();
                let folded_dup = emitted.iter().any(|e| e.trim_end_matches('s') == term.trim_end_matches('s'));
                prop_assert!(!relevant || folded_dup, "seed {} missing", term);
            }
        }
    }

    #[test]
    fn manews_provenance_and_leakage(seed in any::<u64>()) {
        let syn = common::generate(72, seed % 1000);
        let config = DatasetConfig { sizes: SplitSizes::new(24, 6, 6), seed, ..DatasetConfig::default() };
        let dataset = manews::make_dataset(&syn.records, &config).unwrap();
        let by_id: HashMap<&str, &DocumentRecord> = syn.records.iter().map(|r| (r.id.as_str(), r)).collect();
        let categories: HashSet<&str> = MANEWS_ASPECTS.iter().copied().collect();
        let mut seen: HashMap<&str, &str> = HashMap::new();
        for (name, split) in dataset.splits() {
            let present: HashSet<&str> = split.iter().map(|e| e.aspect.as_str()).collect();
            prop_assert_eq!(present.len(), MANEWS_ASPECTS.len(), "{} lacks a category", name);
            for ex in split {
                prop_assert!(categories.contains(ex.aspect.as_str()));
                let rebuilt = manews::reconstruct(&ex.provenance, &by_id);
                prop_assert_eq!(rebuilt.as_deref(), Some(ex.document.as_str()));
                let cats: HashSet<&str> = ex.provenance.iter().map(|(id, _)| by_id[id.as_str()].category.as_deref().unwrap()).collect();
                prop_assert_eq!(cats.len(), config.docs_per_example);
            }
            for id in split_sources(split) {
                if let Some(prev) = seen.insert(id, name) {
                    prop_assert_eq!(prev, name, "{} leaks", id);
                }
            }
        }
    }
}
