//! Sentence segmentation, normalization, stemming, noun tagging and
//! noun-keyed combined documents.

mod nouns;
mod normalize;
mod porter;
mod segment;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::assets::TextAssets;
use crate::corpus::Dataset;

pub use nouns::{LexiconTagger, NounTagger};
pub use normalize::{normalize_and_filter, tokenize, Normalized};
pub use porter::porter_stem;
pub use segment::split_sentences;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Review,
    Summary,
}

/// Where a sentence came from: product, source, document and sentence ordinal.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SentenceId {
    pub product_id: String,
    pub source: Source,
    pub doc_index: usize,
    pub sent_index: usize,
}

impl fmt::Display for SentenceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let src = match self.source {
            Source::Review => "review",
            Source::Summary => "summary",
        };
        write!(f, "{}/{}/{}/{}", self.product_id, src, self.doc_index, self.sent_index)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentenceRecord {
    pub id: SentenceId,
    pub raw_text: String,
    /// Normalized tokens with stopwords retained.
    pub tokens: Vec<String>,
    /// Stems of the non-stopword tokens.
    pub stems: Vec<String>,
    /// Stems of the tokens tagged as nouns; a subset of `stems`.
    pub nouns: BTreeSet<String>,
    /// Whitespace-separated words in `raw_text`.
    pub word_count: usize,
}

/// All sentences sharing one noun, pooled into a single bag of stems.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CombinedDoc {
    pub noun_key: String,
    pub member_ids: Vec<SentenceId>,
    pub bag: BTreeMap<String, usize>,
}

impl CombinedDoc {
    pub fn total_tokens(&self) -> usize {
        self.bag.values().sum()
    }
}

pub struct Preprocessor {
    assets: TextAssets,
    tagger: Box<dyn NounTagger>,
}

impl Preprocessor {
    pub fn new(assets: TextAssets, tagger: Box<dyn NounTagger>) -> Self {
        Preprocessor { assets, tagger }
    }

    pub fn assets(&self) -> &TextAssets {
        &self.assets
    }

    pub fn normalize(&self, raw: &str) -> Normalized {
        normalize_and_filter(raw, &self.assets.contractions, &self.assets.stoplist)
    }

    pub fn sentence(&self, id: SentenceId, raw: &str) -> SentenceRecord {
        let n = self.normalize(raw);
        let nouns = self.tagger.tag_nouns(&n.kept);
        SentenceRecord {
            id,
            raw_text: raw.to_string(),
            word_count: raw.split_whitespace().count(),
            tokens: n.tokens,
            stems: n.stems,
            nouns,
        }
    }

    pub fn process_text(
        &self,
        product_id: &str,
        source: Source,
        doc_index: usize,
        text: &str,
    ) -> Vec<SentenceRecord> {
        split_sentences(text)
            .iter()
            .enumerate()
            .map(|(sent_index, raw)| {
                let id = SentenceId {
                    product_id: product_id.to_string(),
                    source,
                    doc_index,
                    sent_index,
                };
                self.sentence(id, raw)
            })
            .collect()
    }

    /// Every review and summary sentence of the dataset, in dataset order
    /// (per product: reviews, then the summary).
    pub fn process_dataset(&self, dataset: &Dataset) -> Vec<SentenceRecord> {
        dataset
            .products
            .par_iter()
            .map(|p| {
                let mut out: Vec<SentenceRecord> = p
                    .reviews
                    .iter()
                    .enumerate()
                    .flat_map(|(i, r)| self.process_text(&p.product_id, Source::Review, i, r))
                    .collect();
                if let Some(s) = &p.summary {
                    out.extend(self.process_text(&p.product_id, Source::Summary, 0, s));
                }
                out
            })
            .collect::<Vec<_>>()
            .into_iter()
            .flatten()
            .collect()
    }
}

/// One document per distinct noun stem, ordered by noun. A sentence with m
/// nouns joins m documents; a sentence with none joins nothing.
pub fn build_combined_docs<'a, I>(sentences: I) -> Vec<CombinedDoc>
where
    I: IntoIterator<Item = &'a SentenceRecord>,
{
    let mut docs: BTreeMap<&str, CombinedDoc> = BTreeMap::new();
    for s in sentences {
        for noun in &s.nouns {
            let doc = docs.entry(noun.as_str()).or_insert_with(|| CombinedDoc {
                noun_key: noun.clone(),
                member_ids: Vec::new(),
                bag: BTreeMap::new(),
            });
            doc.member_ids.push(s.id.clone());
            for stem in &s.stems {
                *doc.bag.entry(stem.clone()).or_insert(0) += 1;
            }
        }
    }
    docs.into_values().collect()
}
