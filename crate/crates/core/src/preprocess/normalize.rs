use std::collections::{HashMap, HashSet};

use super::porter::porter_stem;

/// Output of [`normalize_and_filter`].
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Normalized {
    /// Lowercased tokens after contraction/term substitution, stopwords kept.
    pub tokens: Vec<String>,
    /// `tokens` minus stopwords.
    pub kept: Vec<String>,
    /// Porter stems of `kept`, position for position.
    pub stems: Vec<String>,
}

/// Lowercases `raw`, applies the contraction/term map to each
/// whitespace-separated chunk, strips punctuation, then drops stopwords and
/// stems what survives.
///
/// Apostrophes are deleted (`phone's` becomes `phones`); any other
/// non-alphanumeric character splits a word.
pub fn normalize_and_filter(
    raw: &str,
    contractions: &HashMap<String, Vec<String>>,
    stoplist: &HashSet<String>,
) -> Normalized {
    let tokens = tokenize(raw, contractions);
    let kept: Vec<String> = tokens
        .iter()
        .filter(|t| !stoplist.contains(t.as_str()))
        .cloned()
        .collect();
    let stems = kept.iter().map(|t| porter_stem(t)).collect();
    Normalized { tokens, kept, stems }
}

pub fn tokenize(raw: &str, contractions: &HashMap<String, Vec<String>>) -> Vec<String> {
    let lowered = raw.to_lowercase().replace(['\u{2019}', '\u{2018}', '`'], "'");
    let mut out = Vec::new();
    for chunk in lowered.split_whitespace() {
        let chunk = chunk.trim_matches(|c: char| !c.is_alphanumeric());
        if chunk.is_empty() {
            continue;
        }
        match contractions.get(chunk) {
            Some(words) => words.iter().for_each(|w| split_word(w, &mut out)),
            None => split_word(chunk, &mut out),
        }
    }
    out
}

fn split_word(word: &str, out: &mut Vec<String>) {
    let cleaned: String = word.chars().filter(|&c| c != '\'').collect();
    out.extend(
        cleaned
            .split(|c: char| !c.is_alphanumeric())
            .filter(|p| !p.is_empty())
            .map(str::to_string),
    );
}
