//! ROUGE-N and ROUGE-L, and corpus-level reports.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::assets::TextAssets;
use crate::corpus::Dataset;
use crate::error::{Error, Result};
use crate::preprocess::{porter_stem, tokenize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum RougeVariant {
    Rouge1,
    Rouge2,
    RougeL,
}

impl RougeVariant {
    pub fn name(self) -> &'static str {
        match self {
            RougeVariant::Rouge1 => "rouge1",
            RougeVariant::Rouge2 => "rouge2",
            RougeVariant::RougeL => "rougeL",
        }
    }
}

impl FromStr for RougeVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "rouge1" => Ok(RougeVariant::Rouge1),
            "rouge2" => Ok(RougeVariant::Rouge2),
            "rougeL" | "rougel" => Ok(RougeVariant::RougeL),
            other => Err(Error::Config(format!("unknown ROUGE variant `{other}`"))),
        }
    }
}

pub fn parse_variants(list: &str) -> Result<Vec<RougeVariant>> {
    let mut v: Vec<RougeVariant> = list
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(str::parse)
        .collect::<Result<_>>()?;
    v.sort();
    v.dedup();
    if v.is_empty() {
        return Err(Error::Config("no ROUGE variants given".into()));
    }
    Ok(v)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RougeScore {
    pub variant: RougeVariant,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl RougeScore {
    fn from_counts(variant: RougeVariant, overlap: usize, cand: usize, reference: usize) -> Self {
        let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
        let precision = ratio(overlap, cand);
        let recall = ratio(overlap, reference);
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        RougeScore {
            variant,
            precision,
            recall,
            f1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RougeOptions {
    pub stem: bool,
    pub drop_stopwords: bool,
}

impl Default for RougeOptions {
    fn default() -> Self {
        RougeOptions {
            stem: true,
            drop_stopwords: false,
        }
    }
}

pub fn rouge_tokens(text: &str, options: RougeOptions, assets: &TextAssets) -> Vec<String> {
    tokenize(text, &assets.contractions)
        .into_iter()
        .filter(|t| !options.drop_stopwords || !assets.stoplist.contains(t))
        .map(|t| if options.stem { porter_stem(&t) } else { t })
        .collect()
}

fn ngram_counts(tokens: &[String], n: usize) -> HashMap<&[String], usize> {
    let mut counts = HashMap::new();
    if n > 0 && tokens.len() >= n {
        for g in tokens.windows(n) {
            *counts.entry(g).or_insert(0) += 1;
        }
    }
    counts
}

/// Clipped n-gram overlap of pre-tokenized texts.
pub fn rouge_n_tokens(candidate: &[String], reference: &[String], n: usize) -> Result<RougeScore> {
    let variant = match n {
        1 => RougeVariant::Rouge1,
        2 => RougeVariant::Rouge2,
        _ => return Err(Error::ContractViolation(format!("ROUGE-{n} is not supported; use 1 or 2"))),
    };
    if reference.is_empty() {
        return Err(Error::EmptyReference);
    }
    let cand = ngram_counts(candidate, n);
    let refc = ngram_counts(reference, n);
    let overlap: usize = cand
        .iter()
        .map(|(g, &c)| c.min(refc.get(g).copied().unwrap_or(0)))
        .sum();
    Ok(RougeScore::from_counts(
        variant,
        overlap,
        candidate.len().saturating_sub(n - 1),
        reference.len().saturating_sub(n - 1),
    ))
}

pub fn lcs_len(a: &[String], b: &[String]) -> usize {
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

pub fn rouge_l_tokens(candidate: &[String], reference: &[String]) -> Result<RougeScore> {
    if reference.is_empty() {
        return Err(Error::EmptyReference);
    }
    Ok(RougeScore::from_counts(
        RougeVariant::RougeL,
        lcs_len(candidate, reference),
        candidate.len(),
        reference.len(),
    ))
}

pub fn rouge_n(
    candidate: &str,
    reference: &str,
    n: usize,
    options: RougeOptions,
    assets: &TextAssets,
) -> Result<RougeScore> {
    rouge_n_tokens(
        &rouge_tokens(candidate, options, assets),
        &rouge_tokens(reference, options, assets),
        n,
    )
}

pub fn rouge_l(candidate: &str, reference: &str, options: RougeOptions, assets: &TextAssets) -> Result<RougeScore> {
    rouge_l_tokens(
        &rouge_tokens(candidate, options, assets),
        &rouge_tokens(reference, options, assets),
    )
}

pub fn score_variant(cand: &[String], reference: &[String], variant: RougeVariant) -> Result<RougeScore> {
    match variant {
        RougeVariant::Rouge1 => rouge_n_tokens(cand, reference, 1),
        RougeVariant::Rouge2 => rouge_n_tokens(cand, reference, 2),
        RougeVariant::RougeL => rouge_l_tokens(cand, reference),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub options: RougeOptions,
    pub per_product: BTreeMap<String, Vec<RougeScore>>,
    /// Unweighted mean over evaluated products, one entry per variant.
    pub macro_average: Vec<RougeScore>,
    pub n_evaluated: usize,
    /// Products with a candidate but no usable reference.
    pub n_without_reference: usize,
}

impl EvalReport {
    pub fn render_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{:<8} {:>9} {:>9} {:>9}", "variant", "precision", "recall", "f1");
        for s in &self.macro_average {
            let _ = writeln!(
                out,
                "{:<8} {:>9.4} {:>9.4} {:>9.4}",
                s.variant.name(),
                s.precision,
                s.recall,
                s.f1
            );
        }
        let _ = writeln!(
            out,
            "evaluated {} products ({} without reference)",
            self.n_evaluated, self.n_without_reference
        );
        out
    }
}

/// Scores each candidate text (keyed by product id) against the dataset's
/// reference summary.
pub fn evaluate_corpus(
    candidates: &BTreeMap<String, String>,
    dataset: &Dataset,
    variants: &[RougeVariant],
    options: RougeOptions,
    assets: &TextAssets,
) -> Result<EvalReport> {
    let mut per_product = BTreeMap::new();
    let mut n_without_reference = 0;
    for (pid, text) in candidates {
        let reference = dataset
            .get(pid)
            .and_then(|p| p.summary.as_deref())
            .map(|r| rouge_tokens(r, options, assets))
            .filter(|r| !r.is_empty());
        let Some(reference) = reference else {
            n_without_reference += 1;
            continue;
        };
        let cand = rouge_tokens(text, options, assets);
        let scores = variants
            .iter()
            .map(|&v| score_variant(&cand, &reference, v))
            .collect::<Result<Vec<_>>>()?;
        per_product.insert(pid.clone(), scores);
    }
    if per_product.is_empty() {
        return Err(Error::NothingToEvaluate);
    }
    let n = per_product.len() as f64;
    let macro_average = variants
        .iter()
        .enumerate()
        .map(|(i, &variant)| {
            let (mut p, mut r, mut f) = (0.0, 0.0, 0.0);
            for scores in per_product.values() {
                p += scores[i].precision;
                r += scores[i].recall;
                f += scores[i].f1;
            }
            RougeScore {
                variant,
                precision: p / n,
                recall: r / n,
                f1: f / n,
            }
        })
        .collect();
    Ok(EvalReport {
        options,
        n_evaluated: per_product.len(),
        per_product,
        macro_average,
        n_without_reference,
    })
}
