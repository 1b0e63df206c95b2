//! Summary-vs-review style classifier.
//!
//! The larger class is shuffled and cut into `ceil(majority / minority)`
//! near-equal subsets. Each subset is paired with the whole minority class
//! to train one multinomial naive Bayes model, and the summary likelihood of
//! a sentence is the mean of their summary-class posteriors.

use std::collections::HashMap;
use std::path::Path;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::preprocess::{porter_stem, SentenceRecord};
use crate::rng;

pub const STYLE_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StyleClass {
    Summary,
    Review,
}

/// Style features: stems of every token, stopwords included.
pub fn style_features(tokens: &[String]) -> Vec<String> {
    tokens.iter().map(|t| porter_stem(t)).collect()
}

/// Multinomial naive Bayes over the shared vocabulary, add-one smoothed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NaiveBayes {
    pub log_prior_summary: f64,
    pub log_prior_review: f64,
    pub log_lik_summary: Vec<f64>,
    pub log_lik_review: Vec<f64>,
}

impl NaiveBayes {
    fn train(vocab_size: usize, summary: &[&[usize]], review: &[&[usize]]) -> Self {
        let log_lik = |docs: &[&[usize]]| {
            let mut counts = vec![0u64; vocab_size];
            let mut total = 0u64;
            for d in docs {
                for &w in *d {
                    counts[w] += 1;
                    total += 1;
                }
            }
            let denom = (total + vocab_size as u64) as f64;
            counts.iter().map(|&c| ((c + 1) as f64 / denom).ln()).collect::<Vec<f64>>()
        };
        let n = (summary.len() + review.len()) as f64;
        NaiveBayes {
            log_prior_summary: (summary.len() as f64 / n).ln(),
            log_prior_review: (review.len() as f64 / n).ln(),
            log_lik_summary: log_lik(summary),
            log_lik_review: log_lik(review),
        }
    }

    /// P(summary | words); word order does not matter.
    pub fn posterior_summary(&self, words: &[usize]) -> f64 {
        let mut s = self.log_prior_summary;
        let mut r = self.log_prior_review;
        for &w in words {
            s += self.log_lik_summary[w];
            r += self.log_lik_review[w];
        }
        1.0 / (1.0 + (r - s).exp())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StyleScore {
    pub sl: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StyleModel {
    pub format_version: u32,
    /// Sorted, unique; shared by every base model.
    pub vocab: Vec<String>,
    pub base_models: Vec<NaiveBayes>,
    pub n_splits: usize,
    pub seed: u64,
    pub majority: StyleClass,
}

/// Shuffles `0..n_major` and cuts it into `ceil(n_major / n_minor)`
/// contiguous subsets whose sizes differ by at most one.
pub fn partition_majority(n_major: usize, n_minor: usize, seed: u64) -> Vec<Vec<usize>> {
    let n_splits = n_major.div_ceil(n_minor.max(1)).max(1);
    let mut order: Vec<usize> = (0..n_major).collect();
    order.shuffle(&mut rng::derived(seed, "style/majority"));
    (0..n_splits)
        .map(|i| order[i * n_major / n_splits..(i + 1) * n_major / n_splits].to_vec())
        .collect()
}

pub fn train_style_model(summary: &[Vec<String>], review: &[Vec<String>], seed: u64) -> Result<StyleModel> {
    if summary.is_empty() || review.is_empty() {
        return Err(Error::NeedBothClasses);
    }
    let mut vocab: Vec<String> = summary.iter().chain(review).flatten().cloned().collect();
    vocab.sort_unstable();
    vocab.dedup();
    let index: HashMap<&str, usize> = vocab.iter().enumerate().map(|(i, w)| (w.as_str(), i)).collect();
    let encode = |docs: &[Vec<String>]| -> Vec<Vec<usize>> {
        docs.iter()
            .map(|d| d.iter().map(|w| index[w.as_str()]).collect())
            .collect()
    };
    let summary_ids = encode(summary);
    let review_ids = encode(review);

    // ties make reviews the majority
    let (majority, major, minor) = if summary.len() > review.len() {
        (StyleClass::Summary, &summary_ids, &review_ids)
    } else {
        (StyleClass::Review, &review_ids, &summary_ids)
    };
    let minor_refs: Vec<&[usize]> = minor.iter().map(Vec::as_slice).collect();
    let subsets = partition_majority(major.len(), minor.len(), seed);
    let base_models: Vec<NaiveBayes> = subsets
        .par_iter()
        .map(|subset| {
            let major_refs: Vec<&[usize]> = subset.iter().map(|&i| major[i].as_slice()).collect();
            match majority {
                StyleClass::Review => NaiveBayes::train(vocab.len(), &minor_refs, &major_refs),
                StyleClass::Summary => NaiveBayes::train(vocab.len(), &major_refs, &minor_refs),
            }
        })
        .collect();

    Ok(StyleModel {
        format_version: STYLE_FORMAT_VERSION,
        n_splits: base_models.len(),
        vocab,
        base_models,
        seed,
        majority,
    })
}

impl StyleModel {
    fn encode(&self, features: &[String]) -> Vec<usize> {
        features
            .iter()
            .filter_map(|w| self.vocab.binary_search(w).ok())
            .collect()
    }

    /// Mean summary posterior over the base models. Out-of-vocabulary
    /// features are ignored, so an all-unknown input scores the mean prior.
    pub fn score_features(&self, features: &[String]) -> StyleScore {
        let words = self.encode(features);
        let sum: f64 = self.base_models.iter().map(|m| m.posterior_summary(&words)).sum();
        StyleScore {
            sl: (sum / self.base_models.len() as f64).clamp(0.0, 1.0),
        }
    }

    pub fn summary_likelihood(&self, sentence: &SentenceRecord) -> StyleScore {
        self.score_features(&style_features(&sentence.tokens))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string(self).map_err(|e| Error::json(path.display().to_string(), e))?;
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let m: StyleModel = serde_json::from_str(&text).map_err(|e| Error::json(path.display().to_string(), e))?;
        if m.format_version != STYLE_FORMAT_VERSION || m.base_models.len() != m.n_splits || m.n_splits == 0 {
            return Err(Error::InvalidModel(format!("{}: inconsistent style model", path.display())));
        }
        Ok(m)
    }
}
