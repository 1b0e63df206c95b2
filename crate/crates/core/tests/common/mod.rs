//! Synthetic corpora and independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use revsum::preprocess::CombinedDoc;
use revsum::topics::LdaModel;

/// Word `i` of planted vocabulary `v`, e.g. `v1w07`.
pub fn planted_word(v: usize, i: usize) -> String {
    format!("v{v}w{i:02}")
}

/// `docs_per_topic` documents per planted vocabulary; each document draws
/// `len` tokens uniformly from its own vocabulary of `vocab_size` words.
/// Returns the documents and each document's planted label.
pub fn planted_corpus(
    n_topics: usize,
    docs_per_topic: usize,
    vocab_size: usize,
    len: usize,
    seed: u64,
) -> (Vec<CombinedDoc>, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut docs = Vec::new();
    let mut labels = Vec::new();
    for t in 0..n_topics {
        for d in 0..docs_per_topic {
            let mut bag = BTreeMap::new();
            for _ in 0..len {
                *bag.entry(planted_word(t, rng.gen_range(0..vocab_size))).or_insert(0) += 1;
            }
            docs.push(CombinedDoc {
                noun_key: format!("t{t}d{d:03}"),
                member_ids: Vec::new(),
                bag,
            });
            labels.push(t);
        }
    }
    (docs, labels)
}

/// Planted vocabulary of a word, if it is one.
pub fn word_label(word: &str) -> Option<usize> {
    let rest = word.strip_prefix('v')?;
    let (v, _) = rest.split_once('w')?;
    v.parse().ok()
}

pub fn top_words(model: &LdaModel, topic: usize, n: usize) -> Vec<&str> {
    let mut ids: Vec<usize> = (0..model.vocab.len()).collect();
    ids.sort_by(|&a, &b| model.phi[topic][b].total_cmp(&model.phi[topic][a]).then(a.cmp(&b)));
    ids.into_iter().take(n).map(|i| model.vocab[i].as_str()).collect()
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

/// Best average top-`n` word purity over every topic-to-label matching.
pub fn matched_purity(model: &LdaModel, n_labels: usize, n: usize) -> f64 {
    assert_eq!(model.k, n_labels);
    permutations(n_labels)
        .into_iter()
        .map(|perm| {
            (0..model.k)
                .map(|t| {
                    let top = top_words(model, t, n);
                    top.iter().filter(|w| word_label(w) == Some(perm[t])).count() as f64 / top.len() as f64
                })
                .sum::<f64>()
                / model.k as f64
        })
        .fold(0.0, f64::max)
}

/// Copy of `docs` with every word renamed through a random bijection of
/// the combined vocabulary, breaking co-occurrence structure per label.
pub fn shuffled_vocabulary(docs: &[CombinedDoc], seed: u64) -> Vec<CombinedDoc> {
    let mut vocab: Vec<String> = docs.iter().flat_map(|d| d.bag.keys().cloned()).collect();
    vocab.sort();
    vocab.dedup();
    let mut target = vocab.clone();
    target.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let map: BTreeMap<&str, &str> = vocab.iter().map(String::as_str).zip(target.iter().map(String::as_str)).collect();
    docs.iter()
        .map(|d| CombinedDoc {
            noun_key: d.noun_key.clone(),
            member_ids: Vec::new(),
            bag: d.bag.iter().map(|(w, &c)| (map[w.as_str()].to_string(), c)).collect(),
        })
        .collect()
}

/// ROUGE-N by enumeration: every candidate n-gram occurrence claims the first
/// unclaimed equal reference occurrence. Returns (matches, cand n-grams, ref n-grams).
pub fn greedy_ngram_matches(cand: &[String], reference: &[String], n: usize) -> (usize, usize, usize) {
    let grams = |t: &[String]| -> Vec<Vec<String>> {
        if t.len() < n {
            Vec::new()
        } else {
            (0..=t.len() - n).map(|i| t[i..i + n].to_vec()).collect()
        }
    };
    let c = grams(cand);
    let r = grams(reference);
    let mut used = vec![false; r.len()];
    let mut matches = 0;
    for g in &c {
        if let Some(j) = (0..r.len()).find(|&j| !used[j] && r[j] == *g) {
            used[j] = true;
            matches += 1;
        }
    }
    (matches, c.len(), r.len())
}

/// (precision, recall, f1) from match counts.
pub fn prf(matches: usize, cand: usize, reference: usize) -> (f64, f64, f64) {
    let p = if cand == 0 { 0.0 } else { matches as f64 / cand as f64 };
    let r = if reference == 0 { 0.0 } else { matches as f64 / reference as f64 };
    let f = if p + r == 0.0 { 0.0 } else { 2.0 * p * r / (p + r) };
    (p, r, f)
}

pub fn random_tokens(rng: &mut ChaCha8Rng, alphabet: &[&str], max_len: usize, min_len: usize) -> Vec<String> {
    let len = rng.gen_range(min_len..=max_len);
    (0..len).map(|_| alphabet[rng.gen_range(0..alphabet.len())].to_string()).collect()
}
