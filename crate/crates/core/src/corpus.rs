//! Product records, JSON Lines ingestion and corpus statistics.

use std::collections::HashSet;
use std::io::Write;
use std::path::Path;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProductRecord {
    pub product_id: String,
    #[serde(default)]
    pub reviews: Vec<String>,
    /// Reference summary; products without one are skipped by evaluation.
    #[serde(default)]
    pub summary: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Dataset {
    pub products: Vec<ProductRecord>,
    pub source_tag: String,
}

impl Dataset {
    pub fn new(source_tag: impl Into<String>, products: Vec<ProductRecord>) -> Result<Self> {
        let mut seen = HashSet::new();
        for p in &products {
            if !seen.insert(p.product_id.as_str()) {
                return Err(Error::DuplicateProduct(p.product_id.clone()));
            }
        }
        Ok(Dataset {
            products,
            source_tag: source_tag.into(),
        })
    }

    pub fn get(&self, product_id: &str) -> Option<&ProductRecord> {
        self.products.iter().find(|p| p.product_id == product_id)
    }

    /// Products that carry at least one review. Others are logged and skipped.
    pub fn trainable(&self) -> impl Iterator<Item = &ProductRecord> {
        self.products.iter().filter(|p| {
            if p.reviews.is_empty() {
                warn!("product {} has no reviews; skipped", p.product_id);
                false
            } else {
                true
            }
        })
    }

    /// Keeps only products with more than `min` reviews.
    pub fn with_min_reviews(mut self, min: usize) -> Self {
        self.products.retain(|p| p.reviews.len() > min);
        self
    }
}

/// A rejected input line. Loading continues past these.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LineError {
    pub line: usize,
    pub message: String,
}

#[derive(Debug)]
pub struct LoadOutcome {
    pub dataset: Dataset,
    pub errors: Vec<LineError>,
}

pub fn load_dataset(path: &Path) -> Result<LoadOutcome> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let text = match String::from_utf8(bytes) {
        Ok(t) => t,
        Err(e) => {
            warn!("{}: invalid UTF-8 replaced with U+FFFD", path.display());
            String::from_utf8_lossy(e.as_bytes()).into_owned()
        }
    };
    let tag = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    parse_dataset(&text, tag)
}

pub fn parse_dataset(text: &str, source_tag: impl Into<String>) -> Result<LoadOutcome> {
    let mut products = Vec::new();
    let mut errors = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        match parse_line(line) {
            Ok(p) => products.push(p),
            Err(message) => {
                warn!("line {line_no}: {message}");
                errors.push(LineError {
                    line: line_no,
                    message,
                });
            }
        }
    }
    Ok(LoadOutcome {
        dataset: Dataset::new(source_tag, products)?,
        errors,
    })
}

fn parse_line(line: &str) -> std::result::Result<ProductRecord, String> {
    #[derive(Deserialize)]
    struct Raw {
        product_id: Option<String>,
        #[serde(default)]
        reviews: Option<Vec<String>>,
        #[serde(default)]
        summary: Option<String>,
    }
    let raw: Raw = serde_json::from_str(line).map_err(|e| e.to_string())?;
    let product_id = raw
        .product_id
        .filter(|id| !id.trim().is_empty())
        .ok_or_else(|| "missing or empty product_id".to_string())?;
    Ok(ProductRecord {
        product_id,
        reviews: raw.reviews.unwrap_or_default(),
        summary: raw.summary,
    })
}

pub fn write_dataset(dataset: &Dataset, out: &mut impl Write) -> std::io::Result<()> {
    for p in &dataset.products {
        serde_json::to_writer(&mut *out, p)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CorpusStats {
    pub n_products: usize,
    pub n_summaries: usize,
    pub n_summary_sentences: usize,
    pub n_reviews: usize,
    pub n_review_sentences: usize,
}

/// Counts products, reviews and summaries, and their sentences under `segment`.
pub fn dataset_stats<F>(dataset: &Dataset, segment: F) -> CorpusStats
where
    F: Fn(&str) -> Vec<String>,
{
    let mut stats = CorpusStats {
        n_products: dataset.products.len(),
        ..CorpusStats::default()
    };
    for p in &dataset.products {
        stats.n_reviews += p.reviews.len();
        stats.n_review_sentences += p.reviews.iter().map(|r| segment(r).len()).sum::<usize>();
        if let Some(s) = &p.summary {
            stats.n_summaries += 1;
            stats.n_summary_sentences += segment(s).len();
        }
    }
    stats
}
