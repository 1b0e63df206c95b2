//! Extractive summarization of customer reviews.
//!
//! Reviews are segmented into sentences, sentences sharing a noun are pooled
//! into combined documents, and two topic models are trained on them (one on
//! reviews, one on reference summaries). Each review sentence is then scored
//! by its topic probability, its opinion strength and a summary-style
//! likelihood, and the best sentence of each salient topic is emitted.
//!
//! The crate is organized by pipeline stage:
//!
//! - [`corpus`]: dataset model, JSON Lines ingestion, corpus statistics
//! - [`preprocess`]: segmentation, normalization, stemming, noun tagging,
//!   combined documents
//! - [`topics`]: collapsed Gibbs LDA, perplexity, K selection, inference
//! - [`sentiment`]: lexicon-and-rule sentiment scores
//! - [`style`]: undersampled naive Bayes ensemble for summary likelihood
//! - [`summarize`]: salient topics, opinion scores, sentence selection
//! - [`evalrouge`]: ROUGE-N / ROUGE-L and corpus reports
//! - [`pipeline`]: configuration, artifacts, stage orchestration

pub mod assets;
pub mod baseline;
pub mod corpus;
pub mod error;
pub mod evalrouge;
pub mod pipeline;
pub mod preprocess;
pub mod rng;
pub mod sentiment;
pub mod style;
pub mod summarize;
pub mod topics;

pub use error::{Error, Result};
