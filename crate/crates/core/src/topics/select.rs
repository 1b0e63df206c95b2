use log::info;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::{perplexity, train_lda_refs, LdaParams, ModelTag};
use crate::error::{Error, Result};
use crate::preprocess::CombinedDoc;
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KCandidate {
    pub k: usize,
    pub train_log_likelihood: f64,
    pub heldout_perplexity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KSelectionReport {
    pub candidates: Vec<KCandidate>,
    pub chosen_k: usize,
    pub n_train_docs: usize,
    pub n_heldout_docs: usize,
}

/// How the document-topic prior scales with K.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum AlphaRule {
    /// alpha = c / K
    PerTopic(f64),
    Fixed(f64),
}

impl AlphaRule {
    pub fn alpha(self, k: usize) -> f64 {
        match self {
            AlphaRule::PerTopic(c) => c / k as f64,
            AlphaRule::Fixed(a) => a,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KSweep {
    pub ks: Vec<usize>,
    pub alpha: AlphaRule,
    pub beta: f64,
    pub iterations: usize,
    pub holdout_fraction: f64,
    pub seed: u64,
    pub min_doc_freq: usize,
}

impl KSweep {
    /// `k_min..=k_max` in steps of `step`, with default priors.
    pub fn range(k_min: usize, k_max: usize, step: usize) -> Self {
        KSweep {
            ks: (k_min..=k_max).step_by(step.max(1)).collect(),
            alpha: AlphaRule::PerTopic(50.0),
            beta: 0.01,
            iterations: 500,
            holdout_fraction: 0.1,
            seed: 0,
            min_doc_freq: 2,
        }
    }

    pub fn params(&self, k: usize) -> LdaParams {
        LdaParams {
            k,
            alpha: self.alpha.alpha(k),
            beta: self.beta,
            iterations: self.iterations,
            seed: self.seed,
            min_doc_freq: self.min_doc_freq,
        }
    }
}

/// Lowest held-out perplexity; ties go to the smaller K.
pub fn choose_k(candidates: &[KCandidate]) -> Option<usize> {
    candidates
        .iter()
        .min_by(|a, b| {
            a.heldout_perplexity
                .total_cmp(&b.heldout_perplexity)
                .then(a.k.cmp(&b.k))
        })
        .map(|c| c.k)
}

/// Seeded train/held-out split. At least one document is held out and one
/// kept whenever there are two or more; a single document serves as both.
pub fn split_holdout(docs: &[CombinedDoc], fraction: f64, seed: u64) -> (Vec<&CombinedDoc>, Vec<&CombinedDoc>) {
    let n = docs.len();
    if n < 2 {
        let all: Vec<&CombinedDoc> = docs.iter().collect();
        return (all.clone(), all);
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng::derived(seed, "holdout"));
    let n_hold = ((n as f64 * fraction).round() as usize).clamp(1, n - 1);
    let (hold, train) = order.split_at(n_hold);
    let mut train: Vec<usize> = train.to_vec();
    let mut hold: Vec<usize> = hold.to_vec();
    train.sort_unstable();
    hold.sort_unstable();
    (
        train.into_iter().map(|i| &docs[i]).collect(),
        hold.into_iter().map(|i| &docs[i]).collect(),
    )
}

/// Trains one model per candidate K on the training split and scores it on
/// the held-out split.
pub fn select_k(docs: &[CombinedDoc], sweep: &KSweep) -> Result<KSelectionReport> {
    if sweep.ks.is_empty() {
        return Err(Error::Config("empty K range".into()));
    }
    let (train, heldout) = split_holdout(docs, sweep.holdout_fraction, sweep.seed);
    let mut candidates = Vec::with_capacity(sweep.ks.len());
    for &k in &sweep.ks {
        let scored = train_lda_refs(&train, &sweep.params(k), ModelTag::Review).and_then(|model| {
            let ppl = perplexity(&model, &heldout)?;
            Ok(KCandidate {
                k,
                train_log_likelihood: model.log_likelihood,
                heldout_perplexity: ppl,
            })
        });
        match scored {
            Ok(c) => {
                info!(
                    "K={k}: train log-likelihood {:.3}, held-out perplexity {:.3}",
                    c.train_log_likelihood, c.heldout_perplexity
                );
                candidates.push(c);
            }
            Err(source) => {
                return Err(Error::SweepAborted {
                    k,
                    partial: candidates,
                    source: Box::new(source),
                })
            }
        }
    }
    let chosen_k = choose_k(&candidates).expect("at least one candidate");
    Ok(KSelectionReport {
        candidates,
        chosen_k,
        n_train_docs: train.len(),
        n_heldout_docs: heldout.len(),
    })
}
