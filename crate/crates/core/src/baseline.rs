//! Lead-k and random-k reference points for evaluation.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;

use crate::corpus::Dataset;
use crate::preprocess::split_sentences;
use crate::rng;

/// The first `k` review sentences of each product, in review order.
pub fn lead_k(dataset: &Dataset, k: usize) -> BTreeMap<String, String> {
    dataset
        .trainable()
        .map(|p| {
            let text: String = p
                .reviews
                .iter()
                .flat_map(|r| split_sentences(r))
                .take(k)
                .map(|s| s + "\n")
                .collect();
            (p.product_id.clone(), text)
        })
        .collect()
}

/// `k` review sentences per product drawn without replacement.
pub fn random_k(dataset: &Dataset, k: usize, seed: u64) -> BTreeMap<String, String> {
    dataset
        .trainable()
        .map(|p| {
            let sentences: Vec<String> = p.reviews.iter().flat_map(|r| split_sentences(r)).collect();
            let mut rng = rng::derived(seed, &p.product_id);
            let text: String = sentences
                .choose_multiple(&mut rng, k)
                .map(|s| format!("{s}\n"))
                .collect();
            (p.product_id.clone(), text)
        })
        .collect()
}
