//! Configuration, stage functions and on-disk artifacts for a full run.
//!
//! Every stage reads its inputs from the output directory and writes its
//! results back there, so running the stages one by one produces the same
//! files as [`run_pipeline`]. JSON artifacts are wrapped as
//! `{"meta": {config_hash, seed, format_version}, "data": ...}`; a stage whose
//! artifacts already carry the current hash is skipped.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use log::{info, warn};
use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::assets::AssetTexts;
use crate::baseline;
use crate::corpus::{dataset_stats, load_dataset, CorpusStats, Dataset};
use crate::error::{Error, Result};
use crate::evalrouge::{evaluate_corpus, parse_variants, EvalReport, RougeOptions, RougeVariant};
use crate::preprocess::{build_combined_docs, split_sentences, LexiconTagger, Preprocessor, SentenceRecord, Source};
use crate::rng::fnv1a;
use crate::sentiment::score_sentence;
use crate::style::{style_features, train_style_model, StyleModel};
use crate::summarize::{generate_summary, topic_alignment, ProductSummary, SentenceArtifacts, SummaryOptions};
use crate::topics::{infer_sentence_topics, select_k, train_lda, AlphaRule, KSelectionReport, KSweep, LdaModel, ModelTag};

pub const ARTIFACT_FORMAT_VERSION: u32 = 1;

pub const STATS_FILE: &str = "stats.json";
pub const SENTENCES_FILE: &str = "sentences.json";
pub const STYLE_FILE: &str = "style_model.json";
pub const SCORES_FILE: &str = "sentence_scores.json";
pub const SUMMARIES_FILE: &str = "summaries.jsonl";
pub const SUMMARY_TEXT_DIR: &str = "summaries";

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub dataset_path: Option<PathBuf>,
    pub asset_dir: Option<PathBuf>,
    pub output_dir: PathBuf,
    pub k_min: usize,
    pub k_max: usize,
    pub k_step: usize,
    pub k_summary: usize,
    pub alpha: AlphaRule,
    pub beta: f64,
    pub iterations: usize,
    pub holdout_fraction: f64,
    pub min_doc_freq: usize,
    pub seed: u64,
    pub rouge_stem: bool,
    pub rouge_drop_stopwords: bool,
    pub rouge_variants: Vec<RougeVariant>,
    pub summary_topic_weighting: bool,
    pub min_reviews: Option<usize>,
    /// Worker cap. Results do not depend on it, so it is left out of the hash.
    pub jobs: Option<usize>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            dataset_path: None,
            asset_dir: None,
            output_dir: PathBuf::from("out"),
            k_min: 5,
            k_max: 40,
            k_step: 5,
            k_summary: 5,
            alpha: AlphaRule::PerTopic(50.0),
            beta: 0.01,
            iterations: 500,
            holdout_fraction: 0.1,
            min_doc_freq: 2,
            seed: 42,
            rouge_stem: true,
            rouge_drop_stopwords: false,
            rouge_variants: vec![RougeVariant::Rouge1, RougeVariant::Rouge2, RougeVariant::RougeL],
            summary_topic_weighting: false,
            min_reviews: None,
            jobs: None,
        }
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("{key}: cannot parse `{value}`")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(Error::Config(format!("{key}: expected true or false, got `{value}`"))),
    }
}

fn parse_optional<T: std::str::FromStr>(key: &str, value: &str) -> Result<Option<T>> {
    if value.is_empty() || value == "none" {
        Ok(None)
    } else {
        parse_num(key, value).map(Some)
    }
}

/// `c/K` or a fixed number.
fn parse_alpha(value: &str) -> Result<AlphaRule> {
    if let Some(c) = value.strip_suffix("/K").or_else(|| value.strip_suffix("/k")) {
        return parse_num("alpha", c.trim()).map(AlphaRule::PerTopic);
    }
    parse_num("alpha", value).map(AlphaRule::Fixed)
}

fn format_alpha(alpha: AlphaRule) -> String {
    match alpha {
        AlphaRule::PerTopic(c) => format!("{c}/K"),
        AlphaRule::Fixed(a) => a.to_string(),
    }
}

fn format_optional<T: fmt::Display>(v: &Option<T>) -> String {
    v.as_ref().map_or_else(|| "none".to_string(), T::to_string)
}

impl PipelineConfig {
    /// Sets one key. `base` resolves relative paths.
    pub fn set(&mut self, key: &str, value: &str, base: Option<&Path>) -> Result<()> {
        let value = value.trim();
        let path = |v: &str| -> PathBuf {
            let p = PathBuf::from(v);
            match base {
                Some(b) if p.is_relative() => b.join(p),
                _ => p,
            }
        };
        match key {
            "dataset_path" => self.dataset_path = Some(path(value)),
            "asset_dir" => self.asset_dir = (!value.is_empty() && value != "none").then(|| path(value)),
            "output_dir" => self.output_dir = path(value),
            "k_min" => self.k_min = parse_num(key, value)?,
            "k_max" => self.k_max = parse_num(key, value)?,
            "k_step" => self.k_step = parse_num(key, value)?,
            "k_summary" => self.k_summary = parse_num(key, value)?,
            "alpha" => self.alpha = parse_alpha(value)?,
            "beta" => self.beta = parse_num(key, value)?,
            "iterations" => self.iterations = parse_num(key, value)?,
            "holdout_fraction" => self.holdout_fraction = parse_num(key, value)?,
            "min_doc_freq" => self.min_doc_freq = parse_num(key, value)?,
            "seed" => self.seed = parse_num(key, value)?,
            "rouge_stem" => self.rouge_stem = parse_bool(key, value)?,
            "rouge_drop_stopwords" => self.rouge_drop_stopwords = parse_bool(key, value)?,
            "rouge_variants" => {
                self.rouge_variants = parse_variants(value).map_err(|e| Error::Config(e.to_string()))?
            }
            "summary_topic_weighting" => self.summary_topic_weighting = parse_bool(key, value)?,
            "min_reviews" => self.min_reviews = parse_optional(key, value)?,
            "jobs" => self.jobs = parse_optional(key, value)?,
            _ => return Err(Error::Config(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    /// Applies a flat `key = value` file. `#` starts a comment line.
    pub fn apply_text(&mut self, text: &str, base: Option<&Path>) -> Result<()> {
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", i + 1)))?;
            self.set(key.trim(), value, base)
                .map_err(|e| Error::Config(format!("line {}: {e}", i + 1)))?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        self.apply_text(&text, path.parent())
    }

    /// Every setting that influences models and summaries, in a fixed order.
    /// ROUGE settings are left out so that re-scoring keeps the cache; the
    /// evaluation report records them itself.
    pub fn canonical_entries(&self) -> Vec<(&'static str, String)> {
        vec![
            ("k_min", self.k_min.to_string()),
            ("k_max", self.k_max.to_string()),
            ("k_step", self.k_step.to_string()),
            ("k_summary", self.k_summary.to_string()),
            ("alpha", format_alpha(self.alpha)),
            ("beta", self.beta.to_string()),
            ("iterations", self.iterations.to_string()),
            ("holdout_fraction", self.holdout_fraction.to_string()),
            ("min_doc_freq", self.min_doc_freq.to_string()),
            ("seed", self.seed.to_string()),
            ("summary_topic_weighting", self.summary_topic_weighting.to_string()),
            ("min_reviews", format_optional(&self.min_reviews)),
        ]
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.k_summary < 1 {
            return bad("k_summary must be at least 1".into());
        }
        if self.k_min < 1 || self.k_step < 1 || self.k_min > self.k_max {
            return bad(format!(
                "empty K range {}..={} step {}",
                self.k_min, self.k_max, self.k_step
            ));
        }
        let alpha_ok = match self.alpha {
            AlphaRule::PerTopic(c) | AlphaRule::Fixed(c) => c > 0.0 && c.is_finite(),
        };
        if !alpha_ok || !(self.beta > 0.0 && self.beta.is_finite()) {
            return bad("alpha and beta must be positive".into());
        }
        if !(self.holdout_fraction > 0.0 && self.holdout_fraction < 1.0) {
            return bad(format!("holdout_fraction {} outside (0, 1)", self.holdout_fraction));
        }
        if self.rouge_variants.is_empty() {
            return bad("no ROUGE variants".into());
        }
        if self.jobs == Some(0) {
            return bad("jobs must be at least 1".into());
        }
        match &self.dataset_path {
            None => return bad("dataset_path is not set".into()),
            Some(p) if !p.is_file() => return bad(format!("dataset {} not found", p.display())),
            _ => {}
        }
        if let Some(dir) = &self.asset_dir {
            if !dir.is_dir() {
                return bad(format!("asset directory {} not found", dir.display()));
            }
        }
        Ok(())
    }

    pub fn sweep(&self) -> KSweep {
        KSweep {
            ks: (self.k_min..=self.k_max).step_by(self.k_step).collect(),
            alpha: self.alpha,
            beta: self.beta,
            iterations: self.iterations,
            holdout_fraction: self.holdout_fraction,
            seed: self.seed,
            min_doc_freq: self.min_doc_freq,
        }
    }

    pub fn rouge_options(&self) -> RougeOptions {
        RougeOptions {
            stem: self.rouge_stem,
            drop_stopwords: self.rouge_drop_stopwords,
        }
    }
}

/// Hex sha256 over the canonical settings, the dataset bytes and every asset.
/// Paths are not hashed, so moving the inputs keeps the hash.
pub fn config_hash(config: &PipelineConfig, dataset_bytes: &[u8], assets: &AssetTexts) -> String {
    let mut h = Sha256::new();
    for (k, v) in config.canonical_entries() {
        h.update(format!("{k}={v}\n"));
    }
    h.update(format!("dataset {}\n", dataset_bytes.len()));
    h.update(dataset_bytes);
    for (name, text) in assets.iter() {
        h.update(format!("asset {name} {}\n", text.len()));
        h.update(text);
    }
    hex::encode(h.finalize())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArtifactMeta {
    pub config_hash: String,
    pub seed: u64,
    pub format_version: u32,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Artifact<T> {
    pub meta: ArtifactMeta,
    pub data: T,
}

#[derive(Deserialize)]
struct MetaOnly {
    meta: ArtifactMeta,
}

/// One line of `summaries.jsonl`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryLine {
    #[serde(flatten)]
    pub summary: ProductSummary,
    pub config_hash: String,
    pub seed: u64,
}

/// Loaded inputs shared by all stages.
pub struct RunContext {
    pub config: PipelineConfig,
    pub dataset: Dataset,
    pub assets: AssetTexts,
    pub meta: ArtifactMeta,
}

impl RunContext {
    pub fn open(config: PipelineConfig) -> Result<Self> {
        config.validate()?;
        let path = config.dataset_path.clone().expect("validated");
        let bytes = fs::read(&path).map_err(|e| Error::io(&path, e))?;
        let assets = AssetTexts::load(config.asset_dir.as_deref())?;
        let outcome = load_dataset(&path)?;
        for e in &outcome.errors {
            warn!("{}: line {}: {}", path.display(), e.line, e.message);
        }
        let mut dataset = outcome.dataset;
        if let Some(min) = config.min_reviews {
            dataset = dataset.with_min_reviews(min);
        }
        let meta = ArtifactMeta {
            config_hash: config_hash(&config, &bytes, &assets),
            seed: config.seed,
            format_version: ARTIFACT_FORMAT_VERSION,
        };
        fs::create_dir_all(&config.output_dir).map_err(|e| Error::io(&config.output_dir, e))?;
        Ok(RunContext {
            config,
            dataset,
            assets,
            meta,
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.config.output_dir.join(name)
    }

    fn write<T: Serialize>(&self, name: &str, data: &T, pretty: bool) -> Result<()> {
        let path = self.path(name);
        let artifact = Artifact {
            meta: self.meta.clone(),
            data,
        };
        let ctx = path.display().to_string();
        let mut text = if pretty {
            serde_json::to_string_pretty(&artifact)
        } else {
            serde_json::to_string(&artifact)
        }
        .map_err(|e| Error::json(&ctx, e))?;
        text.push('\n');
        fs::write(&path, text).map_err(|e| Error::io(&path, e))
    }

    /// Reads an artifact and checks that it belongs to this configuration.
    fn read<T: DeserializeOwned>(&self, name: &str) -> Result<T> {
        let path = self.path(name);
        let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        let artifact: Artifact<T> =
            serde_json::from_str(&text).map_err(|e| Error::json(path.display().to_string(), e))?;
        if artifact.meta != self.meta {
            return Err(Error::InvalidModel(format!(
                "{} was produced by a different configuration; rerun the earlier stages",
                path.display()
            )));
        }
        Ok(artifact.data)
    }

    fn is_fresh(&self, names: &[&str]) -> bool {
        names.iter().all(|name| {
            fs::read_to_string(self.path(name))
                .ok()
                .and_then(|t| serde_json::from_str::<MetaOnly>(&t).ok())
                .is_some_and(|m| m.meta == self.meta)
        })
    }

    fn sentiment_lexicon(&self) -> Result<crate::sentiment::SentimentLexicon> {
        self.assets.sentiment_lexicon()
    }
}

fn lda_file(tag: ModelTag) -> String {
    match tag {
        ModelTag::Review => "lda_review.json".into(),
        ModelTag::Summary => "lda_summary.json".into(),
    }
}

fn k_selection_file(tag: ModelTag) -> String {
    match tag {
        ModelTag::Review => "k_selection_review.json".into(),
        ModelTag::Summary => "k_selection_summary.json".into(),
    }
}

/// A file name for a product id: safe characters are kept, others replaced,
/// with a hash suffix whenever the id had to be altered.
pub fn summary_file_name(product_id: &str) -> String {
    let safe: String = product_id
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || "-_.".contains(c) { c } else { '_' })
        .collect();
    if safe == product_id && !safe.starts_with('.') {
        format!("{safe}.txt")
    } else {
        format!("{safe}-{:016x}.txt", fnv1a(product_id.as_bytes()))
    }
}

/// Runs `f` on a pool capped at `jobs` workers, or on the global pool.
pub fn with_jobs<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match jobs {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

pub fn stage_stats(ctx: &RunContext) -> Result<CorpusStats> {
    let stats = dataset_stats(&ctx.dataset, split_sentences);
    ctx.write(STATS_FILE, &stats, true)?;
    Ok(stats)
}

pub fn stage_preprocess(ctx: &RunContext) -> Result<Vec<SentenceRecord>> {
    if ctx.is_fresh(&[SENTENCES_FILE]) {
        info!("preprocess: cached");
        return ctx.read(SENTENCES_FILE);
    }
    let text = ctx.assets.text_assets()?;
    let tagger = LexiconTagger::new(ctx.assets.noun_lexicon());
    let pre = Preprocessor::new(text, Box::new(tagger));
    let sentences = pre.process_dataset(&ctx.dataset);
    info!("preprocess: {} sentences", sentences.len());
    ctx.write(SENTENCES_FILE, &sentences, false)?;
    Ok(sentences)
}

#[derive(Debug, Clone)]
pub struct TopicModels {
    pub review: LdaModel,
    pub review_selection: KSelectionReport,
    /// Absent when the summary side has too little text to fit a model.
    pub summary: Option<(LdaModel, KSelectionReport)>,
}

fn fit_topics(ctx: &RunContext, sentences: &[SentenceRecord], source: Source) -> Result<(LdaModel, KSelectionReport)> {
    let tag = match source {
        Source::Review => ModelTag::Review,
        Source::Summary => ModelTag::Summary,
    };
    let docs = build_combined_docs(sentences.iter().filter(|s| s.id.source == source));
    let sweep = ctx.config.sweep();
    let report = select_k(&docs, &sweep)?;
    info!(
        "{}: chose K={} from {} candidates",
        tag_name(tag),
        report.chosen_k,
        report.candidates.len()
    );
    let model = train_lda(&docs, &sweep.params(report.chosen_k), tag)?;
    Ok((model, report))
}

fn tag_name(tag: ModelTag) -> &'static str {
    match tag {
        ModelTag::Review => "LDAreview",
        ModelTag::Summary => "LDAsummary",
    }
}

pub fn stage_train_topics(ctx: &RunContext) -> Result<TopicModels> {
    let review_files = [lda_file(ModelTag::Review), k_selection_file(ModelTag::Review)];
    let summary_files = [lda_file(ModelTag::Summary), k_selection_file(ModelTag::Summary)];
    let all: Vec<&str> = review_files.iter().chain(&summary_files).map(String::as_str).collect();
    if ctx.is_fresh(&all[..2]) && (ctx.is_fresh(&all[2..]) || !ctx.config.summary_topic_weighting) {
        info!("train-topics: cached");
        return load_topics(ctx);
    }
    let sentences: Vec<SentenceRecord> = ctx.read(SENTENCES_FILE)?;
    let (review, review_selection) = fit_topics(ctx, &sentences, Source::Review)?;
    ctx.write(&review_files[0], &review, false)?;
    ctx.write(&review_files[1], &review_selection, true)?;
    let summary = match fit_topics(ctx, &sentences, Source::Summary) {
        Ok(pair) => {
            ctx.write(&summary_files[0], &pair.0, false)?;
            ctx.write(&summary_files[1], &pair.1, true)?;
            Some(pair)
        }
        Err(e) if !ctx.config.summary_topic_weighting => {
            warn!("LDAsummary not trained: {e}");
            for f in &summary_files {
                let _ = fs::remove_file(ctx.path(f));
            }
            None
        }
        Err(e) => return Err(e),
    };
    Ok(TopicModels {
        review,
        review_selection,
        summary,
    })
}

fn load_model(ctx: &RunContext, tag: ModelTag) -> Result<LdaModel> {
    let model: LdaModel = ctx.read(&lda_file(tag))?;
    model.validate()?;
    Ok(model)
}

fn load_topics(ctx: &RunContext) -> Result<TopicModels> {
    let review = load_model(ctx, ModelTag::Review)?;
    let review_selection = ctx.read(&k_selection_file(ModelTag::Review))?;
    let summary = if ctx.is_fresh(&[&lda_file(ModelTag::Summary)]) {
        Some((
            load_model(ctx, ModelTag::Summary)?,
            ctx.read(&k_selection_file(ModelTag::Summary))?,
        ))
    } else {
        None
    };
    Ok(TopicModels {
        review,
        review_selection,
        summary,
    })
}

pub fn stage_train_style(ctx: &RunContext) -> Result<StyleModel> {
    if ctx.is_fresh(&[STYLE_FILE]) {
        info!("train-style: cached");
        return load_style(ctx);
    }
    let sentences: Vec<SentenceRecord> = ctx.read(SENTENCES_FILE)?;
    let features = |source: Source| -> Vec<Vec<String>> {
        sentences
            .iter()
            .filter(|s| s.id.source == source)
            .map(|s| style_features(&s.tokens))
            .collect()
    };
    let model = train_style_model(&features(Source::Summary), &features(Source::Review), ctx.config.seed)?;
    info!("train-style: {} base models", model.n_splits);
    ctx.write(STYLE_FILE, &model, false)?;
    Ok(model)
}

fn load_style(ctx: &RunContext) -> Result<StyleModel> {
    let model: StyleModel = ctx.read(STYLE_FILE)?;
    if model.n_splits == 0 || model.base_models.len() != model.n_splits {
        return Err(Error::InvalidModel("inconsistent style model".into()));
    }
    Ok(model)
}

/// Scores every review sentence and picks one sentence per salient topic for
/// each product with reviews.
pub fn stage_summarize(ctx: &RunContext) -> Result<Vec<ProductSummary>> {
    let sentences: Vec<SentenceRecord> = ctx.read(SENTENCES_FILE)?;
    let topics = load_topics(ctx)?;
    let style = load_style(ctx)?;
    let lexicon = ctx.sentiment_lexicon()?;

    let scored: Vec<SentenceArtifacts> = sentences
        .par_iter()
        .filter(|s| s.id.source == Source::Review)
        .map(|s| SentenceArtifacts {
            id: s.id.clone(),
            raw_text: s.raw_text.clone(),
            assignment: infer_sentence_topics(&topics.review, s),
            sentiment: score_sentence(&s.tokens, &lexicon),
            style: style.summary_likelihood(s),
        })
        .collect();
    ctx.write(SCORES_FILE, &scored, false)?;

    let topic_weights = if ctx.config.summary_topic_weighting {
        let (summary_model, _) = topics
            .summary
            .as_ref()
            .ok_or_else(|| Error::InvalidModel("summary topic weighting needs LDAsummary".into()))?;
        Some(topic_alignment(&topics.review, summary_model))
    } else {
        None
    };
    let options = SummaryOptions {
        k: ctx.config.k_summary,
        topic_weights,
    };

    let mut by_product: BTreeMap<&str, Vec<SentenceArtifacts>> = BTreeMap::new();
    for a in scored {
        let pid = ctx
            .dataset
            .get(&a.id.product_id)
            .map(|p| p.product_id.as_str())
            .ok_or_else(|| Error::InvalidModel(format!("unknown product {}", a.id.product_id)))?;
        by_product.entry(pid).or_default().push(a);
    }
    let products: Vec<&str> = ctx.dataset.trainable().map(|p| p.product_id.as_str()).collect();
    let summaries: Vec<ProductSummary> = products
        .par_iter()
        .map(|pid| {
            let arts = by_product.get(pid).map(Vec::as_slice).unwrap_or(&[]);
            generate_summary(pid, arts, &options)
        })
        .collect::<Result<_>>()?;

    write_summaries(ctx, &summaries)?;
    Ok(summaries)
}

fn write_summaries(ctx: &RunContext, summaries: &[ProductSummary]) -> Result<()> {
    let mut lines = String::new();
    for s in summaries {
        let line = SummaryLine {
            summary: s.clone(),
            config_hash: ctx.meta.config_hash.clone(),
            seed: ctx.meta.seed,
        };
        lines.push_str(&serde_json::to_string(&line).map_err(|e| Error::json(SUMMARIES_FILE, e))?);
        lines.push('\n');
    }
    let path = ctx.path(SUMMARIES_FILE);
    fs::write(&path, lines).map_err(|e| Error::io(&path, e))?;
    let dir = ctx.path(SUMMARY_TEXT_DIR);
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    for s in summaries {
        let path = dir.join(summary_file_name(&s.product_id));
        fs::write(&path, s.render_text()).map_err(|e| Error::io(&path, e))?;
    }
    Ok(())
}

pub fn read_summaries(ctx: &RunContext) -> Result<Vec<ProductSummary>> {
    let path = ctx.path(SUMMARIES_FILE);
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            let line: SummaryLine = serde_json::from_str(l).map_err(|e| Error::json(path.display().to_string(), e))?;
            if line.config_hash != ctx.meta.config_hash {
                return Err(Error::InvalidModel(format!(
                    "{} was produced by a different configuration",
                    path.display()
                )));
            }
            Ok(line.summary)
        })
        .collect()
}

/// Where candidate summaries for evaluation come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CandidateSource {
    Pipeline,
    /// First `k_summary` review sentences.
    Lead,
    /// `k_summary` review sentences drawn with the run seed.
    Random,
}

impl CandidateSource {
    fn report_stem(self) -> &'static str {
        match self {
            CandidateSource::Pipeline => "eval_report",
            CandidateSource::Lead => "eval_report_lead",
            CandidateSource::Random => "eval_report_random",
        }
    }
}

pub fn stage_evaluate(ctx: &RunContext, source: CandidateSource) -> Result<EvalReport> {
    let k = ctx.config.k_summary;
    let candidates: BTreeMap<String, String> = match source {
        CandidateSource::Pipeline => read_summaries(ctx)?
            .into_iter()
            .map(|s| {
                let text = s.render_text();
                (s.product_id, text)
            })
            .collect(),
        CandidateSource::Lead => baseline::lead_k(&ctx.dataset, k),
        CandidateSource::Random => baseline::random_k(&ctx.dataset, k, ctx.config.seed),
    };
    let text_assets = ctx.assets.text_assets()?;
    let report = evaluate_corpus(
        &candidates,
        &ctx.dataset,
        &ctx.config.rouge_variants,
        ctx.config.rouge_options(),
        &text_assets,
    )?;
    let stem = source.report_stem();
    ctx.write(&format!("{stem}.json"), &report, true)?;
    let path = ctx.path(&format!("{stem}.txt"));
    let table = format!("# config_hash {} seed {}\n{}", ctx.meta.config_hash, ctx.meta.seed, report.render_table());
    fs::write(&path, table).map_err(|e| Error::io(&path, e))?;
    Ok(report)
}

#[derive(Debug, Clone)]
pub struct PipelineOutcome {
    pub stats: CorpusStats,
    pub review_k: usize,
    pub summary_k: Option<usize>,
    pub summaries: Vec<ProductSummary>,
    /// `None` when no product has a reference summary.
    pub evaluation: Option<EvalReport>,
    pub config_hash: String,
}

/// Every stage in order. Failures name the stage they came from.
pub fn run_pipeline(config: PipelineConfig) -> Result<PipelineOutcome> {
    let jobs = config.jobs;
    let ctx = RunContext::open(config)?;
    with_jobs(jobs, || run_stages(&ctx))?
}

fn run_stages(ctx: &RunContext) -> Result<PipelineOutcome> {
    let stats = stage_stats(ctx).map_err(Error::in_stage("stats"))?;
    stage_preprocess(ctx).map_err(Error::in_stage("preprocess"))?;
    let topics = stage_train_topics(ctx).map_err(Error::in_stage("train-topics"))?;
    stage_train_style(ctx).map_err(Error::in_stage("train-style"))?;
    let summaries = stage_summarize(ctx).map_err(Error::in_stage("summarize"))?;
    let evaluation = match stage_evaluate(ctx, CandidateSource::Pipeline) {
        Ok(r) => Some(r),
        Err(Error::NothingToEvaluate) => {
            warn!("no product has a reference summary; evaluation skipped");
            None
        }
        Err(e) => return Err(Error::in_stage("evaluate")(e)),
    };
    Ok(PipelineOutcome {
        stats,
        review_k: topics.review.k,
        summary_k: topics.summary.as_ref().map(|(m, _)| m.k),
        summaries,
        evaluation,
        config_hash: ctx.meta.config_hash.clone(),
    })
}
