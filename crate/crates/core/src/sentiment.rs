//! Lexicon-and-rule sentence sentiment.
//!
//! Each lexicon hit contributes its valence, adjusted by two rules: a
//! booster directly before the word pushes the valence further from zero,
//! and a negator among the three preceding tokens flips its sign and
//! damps it. Positive and negative adjusted valences are then summed
//! separately and normalized into `ps` and `ns`.

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::assets::{self, parse_weighted, parse_word_set};
use crate::error::{Error, Result};

/// Bumped whenever a rule is added or a constant changes.
pub const RULESET_VERSION: u32 = 1;

/// Multiplier applied to a valence inside a negation window.
pub const NEGATION_SCALAR: f64 = -0.74;
/// Tokens before a valence word that are searched for a negator.
pub const NEGATION_WINDOW: usize = 3;
/// Increment for booster entries listed without an explicit value.
pub const BOOSTER_INCREMENT: f64 = 0.293;

const VALENCE_BOUND: f64 = 4.0;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SentimentLexicon {
    pub valence: HashMap<String, f64>,
    pub negators: HashSet<String>,
    pub boosters: HashMap<String, f64>,
}

impl SentimentLexicon {
    /// Parses `token<TAB>valence` lines, a one-per-line negator list and
    /// `token[<TAB>increment]` booster lines.
    pub fn parse(lexicon: &str, negators: &str, boosters: &str) -> Result<Self> {
        let valence = parse_weighted(assets::LEXICON, lexicon, None)?;
        if let Some((t, v)) = valence.iter().find(|(_, v)| v.abs() > VALENCE_BOUND) {
            return Err(Error::Asset {
                name: assets::LEXICON.into(),
                line: 0,
                message: format!("valence of `{t}` is {v}, outside [-4, 4]"),
            });
        }
        Ok(SentimentLexicon {
            valence,
            negators: parse_word_set(negators),
            boosters: parse_weighted(assets::BOOSTERS, boosters, Some(BOOSTER_INCREMENT))?,
        })
    }

    /// Same lexicon with every valence negated.
    pub fn mirrored(&self) -> Self {
        SentimentLexicon {
            valence: self.valence.iter().map(|(k, v)| (k.clone(), -v)).collect(),
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    Positive,
    Negative,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SentimentScores {
    pub ps: f64,
    pub ns: f64,
    pub polarity: Polarity,
    /// No lexicon hit; `ps = ns = 0` and the polarity is the tie default.
    pub neutral: bool,
}

/// Positive unless `ns` strictly exceeds `ps`.
pub fn polarity_label(ps: f64, ns: f64) -> Polarity {
    if ps >= ns {
        Polarity::Positive
    } else {
        Polarity::Negative
    }
}

/// Adjusted valence of every lexicon hit, in token order.
pub fn adjusted_valences(tokens: &[String], lexicon: &SentimentLexicon) -> Vec<f64> {
    let mut out = Vec::new();
    for (i, tok) in tokens.iter().enumerate() {
        let Some(&base) = lexicon.valence.get(tok) else {
            continue;
        };
        let mut v = base;
        if i > 0 {
            if let Some(&b) = lexicon.boosters.get(&tokens[i - 1]) {
                v += if v < 0.0 { -b } else { b };
            }
        }
        let window = &tokens[i.saturating_sub(NEGATION_WINDOW)..i];
        if window.iter().any(|t| lexicon.negators.contains(t)) {
            v *= NEGATION_SCALAR;
        }
        out.push(v);
    }
    out
}

/// Scores lowercased tokens that still contain their function words.
pub fn score_sentence(tokens: &[String], lexicon: &SentimentLexicon) -> SentimentScores {
    let mut pos = 0.0;
    let mut neg = 0.0;
    for v in adjusted_valences(tokens, lexicon) {
        if v > 0.0 {
            pos += v;
        } else if v < 0.0 {
            neg -= v;
        }
    }
    let total = pos + neg;
    let (ps, ns) = if total > 0.0 { (pos / total, neg / total) } else { (0.0, 0.0) };
    SentimentScores {
        ps,
        ns,
        polarity: polarity_label(ps, ns),
        neutral: total == 0.0,
    }
}
