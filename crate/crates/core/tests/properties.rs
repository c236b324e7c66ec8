//! Property tests for module invariants.

mod common;

use std::collections::HashMap;
use std::sync::Arc;

use proptest::prelude::*;

use edl_core::classify::{train_logistic_regression_traced, LabeledExample, LogisticParams};
use edl_core::disambig::{first_pass, Hyperparameters};
use edl_core::entity::EntityId;
use edl_core::eval::ConfusionCounts;
use edl_core::features::{
    compute_feature_vector, cooccurrence_feature, mention_entity_jaccard, squash, DocumentContext, EasyEntity,
    EntityContext, FeatureVector,
};
use edl_core::kb::{Candidate, MentionEntityPriorDict, TopicOntology};
use edl_core::preprocess::{extract_with, tokenize, Mention};
use edl_core::record::InputDocument;
use edl_core::sweep::{sweep_with, Grid};

fn words() -> impl Strategy<Value = Vec<String>> {
    prop::collection::vec(prop::sample::select(vec!["a", "b", "c", "d"]).prop_map(String::from), 0..40)
}

fn ngrams() -> impl Strategy<Value = Vec<Vec<String>>> {
    prop::collection::vec(
        prop::collection::vec(prop::sample::select(vec!["a", "b", "c", "d"]).prop_map(String::from), 1..4),
        0..8,
    )
}

/// Greedy longest match written from the definition: at each position try
/// every dictionary entry and keep the longest one that matches.
fn oracle_extract(words: &[String], dict: &[Vec<String>]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < words.len() {
        let best = dict
            .iter()
            .filter(|g| words[i..].starts_with(g))
            .map(|g| g.len())
            .max();
        match best {
            Some(n) => {
                out.push((i, n));
                i += n;
            }
            None => i += 1,
        }
    }
    out
}

proptest! {
    #[test]
    fn extraction_is_greedy_longest_match(ws in words(), dict in ngrams()) {
        let text = ws.join(" ");
        let tokens = tokenize(&text, 0..text.len(), 0, 0);
        let keys: HashMap<String, Arc<[Candidate]>> = dict
            .iter()
            .map(|g| (g.join(" "), Arc::from(vec![Candidate { entity: EntityId::kb("X"), prior: 1.0 }])))
            .collect();
        let mentions = extract_with(&tokens, &text, 6, |k| keys.get(k).cloned());
        let got: Vec<(usize, usize)> = mentions.iter().map(|m| (m.token_start, m.token_len)).collect();
        prop_assert_eq!(got, oracle_extract(&ws, &dict));
        for pair in mentions.windows(2) {
            prop_assert!(pair[0].token_start + pair[0].token_len <= pair[1].token_start);
            prop_assert!(pair[0].end <= pair[1].start);
        }
        for m in &mentions {
            prop_assert_eq!(&text[m.start..m.end], m.surface.as_str());
        }
    }

    #[test]
    fn priors_sum_to_one_per_surface(counts in prop::collection::vec((0usize..5, 0usize..6, 1u32..20), 1..40)) {
        let mut table: HashMap<(usize, usize), u32> = HashMap::new();
        for (s, e, c) in counts {
            *table.entry((s, e)).or_insert(0) += c;
        }
        let mut totals: HashMap<usize, u32> = HashMap::new();
        for (&(s, _), &c) in &table {
            *totals.entry(s).or_insert(0) += c;
        }
        let entries = table.iter().map(|(&(s, e), &c)| {
            ("en".to_string(), format!("surface{s}"), EntityId::kb(&format!("E{e}")), c as f64 / totals[&s] as f64)
        });
        let dict = MentionEntityPriorDict::from_entries(entries).unwrap();
        for (_, _, cands) in dict.iter() {
            let sum: f64 = cands.iter().map(|c| c.prior).sum();
            prop_assert!((sum - 1.0).abs() <= 1e-9);
            prop_assert!(cands.windows(2).all(|w| w[0].prior >= w[1].prior));
        }
    }

    #[test]
    fn topic_distance_is_a_metric(parents in prop::collection::vec(prop::option::of(0usize..12), 1..12)) {
        // topic i may only point at a topic with a smaller index, so the
        // graph is acyclic
        let mut b = TopicOntology::builder();
        for (i, p) in parents.iter().enumerate() {
            b.topic(&format!("T{i}"));
            if let Some(p) = p.filter(|&p| p < i) {
                b.edge(&format!("T{i}"), &format!("T{p}"));
            }
        }
        let onto = b.build().unwrap();
        let n = parents.len();
        let d = |a: usize, c: usize| onto.topic_distance(&format!("T{a}"), &format!("T{c}")).unwrap();
        for a in 0..n {
            prop_assert_eq!(d(a, a), Some(0));
            for c in 0..n {
                prop_assert_eq!(d(a, c), d(c, a));
                for m in 0..n {
                    if let (Some(x), Some(y)) = (d(a, m), d(m, c)) {
                        let direct = d(a, c);
                        prop_assert!(direct.is_some_and(|z| z <= x + y));
                    }
                }
            }
        }
    }

    #[test]
    fn jaccard_is_symmetric_and_bounded(a in "[a-c ]{0,12}", b in "[a-c ]{0,12}") {
        let x = mention_entity_jaccard(&a, &b);
        prop_assert_eq!(x, mention_entity_jaccard(&b, &a));
        prop_assert!((0.0..=1.0).contains(&x));
        if !a.trim().is_empty() {
            prop_assert_eq!(mention_entity_jaccard(&a, &a.to_uppercase()), 1.0);
        }
    }

    #[test]
    fn cooccurrence_feature_is_monotone(counts in prop::collection::vec(0u64..1000, 0..20), extra in 0u64..1000, w in 1usize..500) {
        let base = cooccurrence_feature(counts.iter().copied(), w);
        let more = cooccurrence_feature(counts.iter().copied().chain([extra]), w);
        prop_assert!((0.0..1.0).contains(&base));
        prop_assert!(more >= base);
        prop_assert!(squash(extra as f64) <= squash(extra as f64 + 1.0));
    }

    #[test]
    fn metrics_match_formulas(tp in 0u64..50, fp in 0u64..50, fn_ in 0u64..50, tn in 0u64..50) {
        let m = ConfusionCounts { tp, fp, fn_, tn }.metrics();
        let (tp, fp, fn_, tn) = (tp as f64, fp as f64, fn_ as f64, tn as f64);
        let p = if tp + fp == 0.0 { 0.0 } else { tp / (tp + fp) };
        let r = if tp + fn_ == 0.0 { 0.0 } else { tp / (tp + fn_) };
        let f = if p + r == 0.0 { 0.0 } else { 2.0 * p * r / (p + r) };
        let total = tp + fp + fn_ + tn;
        let a = if total == 0.0 { 0.0 } else { (tp + tn) / total };
        prop_assert!((m.precision - p).abs() <= 1e-12);
        prop_assert!((m.recall - r).abs() <= 1e-12);
        prop_assert!((m.f1 - f).abs() <= 1e-12);
        prop_assert!((m.accuracy - a).abs() <= 1e-12);
    }

    #[test]
    fn sweep_ignores_point_order(seed in any::<u64>(), l1 in prop::collection::vec(0u32..20, 1..4), l3 in prop::collection::vec(0u32..20, 1..4)) {
        let base = Hyperparameters::default();
        let spec = format!(
            "lambda1={};lambda3={}",
            l1.iter().map(|v| format!("{}", *v as f64 / 20.0)).collect::<Vec<_>>().join(","),
            l3.iter().map(|v| format!("{}", *v as f64 / 20.0)).collect::<Vec<_>>().join(","),
        );
        let grid = Grid::parse(&spec, &base).unwrap();
        // coarse scores force ties so the tie-break rules matter
        let score = |hp: &Hyperparameters| {
            let k = ((hp.lambda1 * 7.0 + hp.lambda3 * 3.0 + (seed % 5) as f64) as u64) % 3;
            Ok(ConfusionCounts { tp: k, fp: 1, fn_: 1, tn: 0 }.metrics())
        };
        let mut points = grid.points();
        let forward = sweep_with(&points, score).unwrap();
        points.reverse();
        let shift = (seed as usize) % points.len();
        points.rotate_left(shift);
        let shuffled = sweep_with(&points, score).unwrap();
        prop_assert_eq!(forward, shuffled);
    }

    #[test]
    fn raising_thresholds_never_adds_easy_mentions(priors in prop::collection::vec(prop::collection::vec(0u32..=20, 1..5), 1..6), a in 0u32..=20, b in 0u32..=20, da in 0u32..=5, db in 0u32..=5) {
        let mentions: Vec<Mention> = priors
            .iter()
            .enumerate()
            .map(|(i, ps)| Mention {
                surface: format!("m{i}"),
                token_start: i,
                token_len: 1,
                start: i,
                end: i + 1,
                candidates: ps
                    .iter()
                    .enumerate()
                    .map(|(k, &p)| Candidate {
                        entity: if k == 0 && p % 3 == 0 { EntityId::Nil } else { EntityId::kb(&format!("E{k}")) },
                        prior: p as f64 / 20.0,
                    })
                    .collect::<Vec<_>>()
                    .into(),
            })
            .collect();
        let low = Hyperparameters { lambda1: a as f64 / 20.0, lambda2: b as f64 / 20.0, ..Default::default() };
        let high = Hyperparameters { lambda1: low.lambda1 + da as f64 / 20.0, lambda2: low.lambda2 + db as f64 / 20.0, ..Default::default() };
        let easy_low = first_pass(&mentions, &low).unwrap().easy;
        let easy_high = first_pass(&mentions, &high).unwrap().easy;
        for e in &easy_high {
            prop_assert!(easy_low.contains(e));
        }
    }
}

fn random_examples(seed: u64) -> Vec<LabeledExample> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    (0..80)
        .map(|_| {
            let v: [f64; 5] = std::array::from_fn(|_| rng.gen::<f64>());
            LabeledExample { features: FeatureVector::from_array(v), label: v[1] + rng.gen_range(-0.3..0.3) > 0.5 }
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn logistic_loss_never_rises(seed in any::<u64>(), lr in 0.01f64..0.5, l2 in 0.0f64..0.01) {
        let data = random_examples(seed);
        let params = LogisticParams { learning_rate: lr, epochs: 100, l2, balance_classes: true };
        let trace = train_logistic_regression_traced(&data, &params).unwrap();
        prop_assert!(trace.losses.windows(2).all(|w| w[1] <= w[0] + 1e-15));
    }

    #[test]
    fn features_in_range_and_cache_transparent(picks in prop::collection::vec(0usize..6, 1..6)) {
        const SENTENCES: [&str; 6] = [
            "Google CEO Eric Schmidt said that the competition between Apple and Google is fierce.",
            "Samsung phones run Android while the iPhone runs iOS.",
            "The orchard grows apple and banana trees for cider.",
            "Isaac Asimov wrote science fiction about a robot and an android.",
            "The Beatles founded Apple as their own record label.",
            "The company said nothing further about the matter.",
        ];
        let text = picks.iter().map(|&i| SENTENCES[i]).collect::<Vec<_>>().join(" ");
        let engine = common::demo_engine();
        let dicts = common::demo_dicts();
        let prepared = engine.prepare(&InputDocument { id: None, text, language: Some("en".into()) }).unwrap();
        let hp = Hyperparameters::default();
        let first = first_pass(&prepared.mentions, &hp).unwrap();
        let easy = first.easy.iter().map(|&(m, c)| EasyEntity {
            entity: prepared.mentions[m].candidates[c].entity.clone(),
            position: prepared.mentions[m].token_start,
        });
        let shared = DocumentContext::new(easy.clone());
        for &m in &first.hard {
            let mention = &prepared.mentions[m];
            for c in 0..mention.candidates.len() {
                let ctx = EntityContext::new(&shared, mention.token_start, c, hp.window);
                let cached = compute_feature_vector(mention, &ctx, &shared, &dicts, hp.window).unwrap();
                let again = compute_feature_vector(mention, &ctx, &shared, &dicts, hp.window).unwrap();
                let fresh_doc = DocumentContext::new(easy.clone());
                let fresh = compute_feature_vector(mention, &ctx, &fresh_doc, &dicts, hp.window).unwrap();
                prop_assert_eq!(cached, again);
                prop_assert_eq!(cached, fresh);
                prop_assert!(cached.in_range());
                if mention.candidates[c].entity.is_sentinel() {
                    let v = cached.to_array();
                    prop_assert!(v[1..].iter().all(|&x| x == 0.0));
                }
            }
        }
    }
}
