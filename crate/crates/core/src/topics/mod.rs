//! LDA over combined documents, trained by collapsed Gibbs sampling.
//!
//! A trained [`LdaModel`] keeps only the topic-word matrix and its priors.
//! Document-topic proportions for new text (held-out documents, single
//! sentences) are fitted by a short Gibbs run with the topic-word matrix
//! held fixed, seeded so that the same input always yields the same output.

mod select;

use std::collections::BTreeMap;
use std::path::Path;

use log::warn;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::preprocess::{CombinedDoc, SentenceId, SentenceRecord};
use crate::rng;

pub use select::{choose_k, select_k, split_holdout, AlphaRule, KCandidate, KSelectionReport, KSweep};

pub const MODEL_FORMAT_VERSION: u32 = 1;

/// Gibbs sweeps used to fit topic proportions of a single sentence.
pub const INFER_SWEEPS: usize = 50;
/// Gibbs sweeps used to fit topic proportions of a held-out document.
pub const HELDOUT_SWEEPS: usize = 50;

const ROW_SUM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModelTag {
    #[serde(rename = "LDAreview")]
    Review,
    #[serde(rename = "LDAsummary")]
    Summary,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LdaParams {
    pub k: usize,
    pub alpha: f64,
    pub beta: f64,
    pub iterations: usize,
    pub seed: u64,
    /// Tokens found in fewer combined documents than this are pruned.
    pub min_doc_freq: usize,
}

impl LdaParams {
    pub fn new(k: usize) -> Self {
        LdaParams {
            k,
            alpha: 50.0 / k.max(1) as f64,
            beta: 0.01,
            iterations: 500,
            seed: 0,
            min_doc_freq: 2,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::ContractViolation("K must be at least 1".into()));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite() && self.beta > 0.0 && self.beta.is_finite()) {
            return Err(Error::ContractViolation(format!(
                "priors must be positive and finite (alpha={}, beta={})",
                self.alpha, self.beta
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LdaModel {
    pub format_version: u32,
    pub tag: ModelTag,
    pub k: usize,
    /// Sorted, unique.
    pub vocab: Vec<String>,
    /// K rows of length `vocab.len()`, each a probability distribution.
    pub phi: Vec<Vec<f64>>,
    pub alpha: f64,
    pub beta: f64,
    pub seed: u64,
    pub iterations: usize,
    /// Log-likelihood of the training tokens under the final state.
    pub log_likelihood: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicAssignment {
    pub sentence_id: SentenceId,
    pub probs: Vec<f64>,
    pub top_topic: usize,
    pub top_prob: f64,
    /// Set when the sentence had no in-vocabulary stems; `probs` are then all zero.
    pub discarded: bool,
}

impl TopicAssignment {
    fn from_probs(sentence_id: SentenceId, probs: Vec<f64>) -> Self {
        let (top_topic, top_prob) = argmax(&probs);
        TopicAssignment {
            sentence_id,
            probs,
            top_topic,
            top_prob,
            discarded: false,
        }
    }

    fn discarded(sentence_id: SentenceId, k: usize) -> Self {
        TopicAssignment {
            sentence_id,
            probs: vec![0.0; k],
            top_topic: 0,
            top_prob: 0.0,
            discarded: true,
        }
    }
}

/// First index of the maximum.
fn argmax(xs: &[f64]) -> (usize, f64) {
    xs.iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, x)| if x > best.1 { (i, x) } else { best })
}

impl LdaModel {
    /// Assembles a model from explicit parts, checking every invariant.
    pub fn from_parts(
        tag: ModelTag,
        vocab: Vec<String>,
        phi: Vec<Vec<f64>>,
        alpha: f64,
        beta: f64,
        seed: u64,
    ) -> Result<Self> {
        let model = LdaModel {
            format_version: MODEL_FORMAT_VERSION,
            tag,
            k: phi.len(),
            vocab,
            phi,
            alpha,
            beta,
            seed,
            iterations: 0,
            log_likelihood: f64::NAN,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidModel(m));
        if self.format_version != MODEL_FORMAT_VERSION {
            return bad(format!("unsupported format version {}", self.format_version));
        }
        if self.k == 0 || self.phi.len() != self.k {
            return bad(format!("expected {} phi rows, found {}", self.k, self.phi.len()));
        }
        if self.vocab.windows(2).any(|w| w[0] >= w[1]) {
            return bad("vocabulary must be sorted and unique".into());
        }
        if !(self.alpha > 0.0 && self.beta > 0.0) {
            return bad("priors must be positive".into());
        }
        for (t, row) in self.phi.iter().enumerate() {
            if row.len() != self.vocab.len() {
                return bad(format!("phi row {t} has {} entries, vocabulary {}", row.len(), self.vocab.len()));
            }
            if row.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
                return bad(format!("phi row {t} has a negative or non-finite entry"));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                return bad(format!("phi row {t} sums to {sum}"));
            }
        }
        Ok(())
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab.len()
    }

    pub fn word_id(&self, word: &str) -> Option<usize> {
        self.vocab.binary_search_by(|v| v.as_str().cmp(word)).ok()
    }

    /// Ids of the in-vocabulary words; unknown words are dropped.
    pub fn encode<'a, I>(&self, words: I) -> Vec<usize>
    where
        I: IntoIterator<Item = &'a String>,
    {
        words.into_iter().filter_map(|w| self.word_id(w)).collect()
    }

    fn encode_bag(&self, bag: &BTreeMap<String, usize>) -> Vec<usize> {
        bag.iter()
            .filter_map(|(w, &c)| self.word_id(w).map(|id| (id, c)))
            .flat_map(|(id, c)| std::iter::repeat_n(id, c))
            .collect()
    }

    /// Fits topic proportions for `words` with `phi` held fixed.
    ///
    /// Runs `sweeps` Gibbs sweeps and averages the smoothed proportions over
    /// the second half. Empty `words` yield the uniform prior mean.
    pub fn fit_proportions(&self, words: &[usize], sweeps: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let k = self.k;
        let n = words.len();
        let mut counts = vec![0u32; k];
        let mut z: Vec<usize> = words
            .iter()
            .map(|_| {
                let t = rng.gen_range(0..k);
                counts[t] += 1;
                t
            })
            .collect();
        let mut weights = vec![0.0; k];
        let mut acc = vec![0.0; k];
        let burn_in = sweeps / 2;
        let denom = n as f64 + k as f64 * self.alpha;

        for sweep in 0..sweeps.max(1) {
            for (i, &w) in words.iter().enumerate() {
                counts[z[i]] -= 1;
                for t in 0..k {
                    weights[t] = (f64::from(counts[t]) + self.alpha) * self.phi[t][w];
                }
                if let Some(t) = sample(&weights, rng) {
                    z[i] = t;
                }
                counts[z[i]] += 1;
            }
            if sweep >= burn_in {
                for t in 0..k {
                    acc[t] += (f64::from(counts[t]) + self.alpha) / denom;
                }
            }
        }
        let total: f64 = acc.iter().sum();
        acc.iter().map(|a| a / total).collect()
    }

    /// Topic distribution of one sentence from its in-vocabulary stems.
    pub fn infer_stems(&self, id: SentenceId, stems: &[String]) -> TopicAssignment {
        let words = self.encode(stems);
        if words.is_empty() {
            return TopicAssignment::discarded(id, self.k);
        }
        let mut rng = rng::seeded(self.seed ^ rng::fnv1a(id.to_string().as_bytes()));
        let probs = self.fit_proportions(&words, INFER_SWEEPS, &mut rng);
        TopicAssignment::from_probs(id, probs)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string(self).map_err(|e| Error::json(path.display().to_string(), e))?;
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let model: LdaModel =
            serde_json::from_str(&text).map_err(|e| Error::json(path.display().to_string(), e))?;
        model.validate()?;
        Ok(model)
    }
}

/// Draws an index with probability proportional to `weights`. `None` when
/// every weight is zero.
fn sample(weights: &[f64], rng: &mut ChaCha8Rng) -> Option<usize> {
    let total: f64 = weights.iter().sum();
    // also rejects NaN
    if total.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
        return None;
    }
    let mut u = rng.gen::<f64>() * total;
    for (i, &w) in weights.iter().enumerate() {
        if u < w {
            return Some(i);
        }
        u -= w;
    }
    // rounding left u just past the last bucket
    weights.iter().rposition(|&w| w > 0.0)
}

/// Vocabulary of tokens present in at least `min_doc_freq` documents, sorted.
pub fn build_vocab(docs: &[&CombinedDoc], min_doc_freq: usize) -> Vec<String> {
    let mut df: BTreeMap<&str, usize> = BTreeMap::new();
    for d in docs {
        for w in d.bag.keys() {
            *df.entry(w.as_str()).or_insert(0) += 1;
        }
    }
    df.into_iter()
        .filter(|&(_, n)| n >= min_doc_freq)
        .map(|(w, _)| w.to_string())
        .collect()
}

pub fn train_lda(docs: &[CombinedDoc], params: &LdaParams, tag: ModelTag) -> Result<LdaModel> {
    let refs: Vec<&CombinedDoc> = docs.iter().collect();
    train_lda_refs(&refs, params, tag)
}

/// Collapsed Gibbs LDA. Identical inputs and seed give a bit-identical model.
pub fn train_lda_refs(docs: &[&CombinedDoc], params: &LdaParams, tag: ModelTag) -> Result<LdaModel> {
    params.validate()?;
    let vocab = build_vocab(docs, params.min_doc_freq);
    let index: BTreeMap<&str, usize> = vocab.iter().enumerate().map(|(i, w)| (w.as_str(), i)).collect();
    let corpus: Vec<Vec<usize>> = docs
        .iter()
        .map(|d| {
            d.bag
                .iter()
                .filter_map(|(w, &c)| index.get(w.as_str()).map(|&id| (id, c)))
                .flat_map(|(id, c)| std::iter::repeat_n(id, c))
                .collect::<Vec<usize>>()
        })
        .filter(|d| !d.is_empty())
        .collect();
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let (k, v) = (params.k, vocab.len());
    if k > corpus.len() {
        warn!("K={k} exceeds the {} training documents", corpus.len());
    }
    let (alpha, beta) = (params.alpha, params.beta);
    let v_beta = v as f64 * beta;

    let mut rng = rng::seeded(params.seed);
    let mut doc_topic = vec![vec![0u32; k]; corpus.len()];
    let mut topic_word = vec![0u32; k * v];
    let mut topic_total = vec![0u32; k];
    let mut z: Vec<Vec<usize>> = corpus
        .iter()
        .enumerate()
        .map(|(d, words)| {
            words
                .iter()
                .map(|&w| {
                    let t = rng.gen_range(0..k);
                    doc_topic[d][t] += 1;
                    topic_word[t * v + w] += 1;
                    topic_total[t] += 1;
                    t
                })
                .collect()
        })
        .collect();

    let mut weights = vec![0.0; k];
    for _ in 0..params.iterations {
        for (d, words) in corpus.iter().enumerate() {
            for (i, &w) in words.iter().enumerate() {
                let old = z[d][i];
                doc_topic[d][old] -= 1;
                topic_word[old * v + w] -= 1;
                topic_total[old] -= 1;
                for t in 0..k {
                    weights[t] = (f64::from(doc_topic[d][t]) + alpha)
                        * (f64::from(topic_word[t * v + w]) + beta)
                        / (f64::from(topic_total[t]) + v_beta);
                }
                let new = sample(&weights, &mut rng).unwrap_or(old);
                z[d][i] = new;
                doc_topic[d][new] += 1;
                topic_word[new * v + w] += 1;
                topic_total[new] += 1;
            }
        }
    }

    let phi: Vec<Vec<f64>> = (0..k)
        .map(|t| {
            let denom = f64::from(topic_total[t]) + v_beta;
            let mut row: Vec<f64> = (0..v)
                .map(|w| (f64::from(topic_word[t * v + w]) + beta) / denom)
                .collect();
            let sum: f64 = row.iter().sum();
            row.iter_mut().for_each(|p| *p /= sum);
            row
        })
        .collect();

    let mut log_likelihood = 0.0;
    for (d, words) in corpus.iter().enumerate() {
        let denom = words.len() as f64 + k as f64 * alpha;
        let theta: Vec<f64> = doc_topic[d].iter().map(|&c| (f64::from(c) + alpha) / denom).collect();
        for &w in words {
            let p: f64 = (0..k).map(|t| theta[t] * phi[t][w]).sum();
            log_likelihood += p.ln();
        }
    }

    Ok(LdaModel {
        format_version: MODEL_FORMAT_VERSION,
        tag,
        k,
        vocab,
        phi,
        alpha,
        beta,
        seed: params.seed,
        iterations: params.iterations,
        log_likelihood,
    })
}

/// exp(-(per-word log-likelihood)) of held-out documents, by document
/// completion: each document's topic proportions are fitted on its
/// even-position in-vocabulary tokens and the odd-position tokens are scored.
/// A single-token document is scored under the prior proportions.
pub fn perplexity(model: &LdaModel, docs: &[&CombinedDoc]) -> Result<f64> {
    let mut log_lik = 0.0;
    let mut n_words = 0usize;
    for (i, d) in docs.iter().enumerate() {
        let words = model.encode_bag(&d.bag);
        let (fit, scored): (Vec<usize>, Vec<usize>) = if words.len() < 2 {
            (Vec::new(), words)
        } else {
            let fit = words.iter().step_by(2).copied().collect();
            let scored = words.iter().skip(1).step_by(2).copied().collect();
            (fit, scored)
        };
        if scored.is_empty() {
            continue;
        }
        let mut rng = rng::derived(model.seed, &format!("heldout/{i}"));
        let theta = model.fit_proportions(&fit, HELDOUT_SWEEPS, &mut rng);
        for &w in &scored {
            let p: f64 = (0..model.k).map(|t| theta[t] * model.phi[t][w]).sum();
            log_lik += p.ln();
        }
        n_words += scored.len();
    }
    if n_words == 0 {
        return Err(Error::NoScorableTokens);
    }
    Ok((-log_lik / n_words as f64).exp())
}

pub fn infer_sentence_topics(model: &LdaModel, sentence: &SentenceRecord) -> TopicAssignment {
    model.infer_stems(sentence.id.clone(), &sentence.stems)
}
