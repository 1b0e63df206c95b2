use std::collections::{BTreeSet, HashSet};

use super::porter::porter_stem;

/// Decides which tokens are nouns. Implementations return the Porter stems
/// of the noun tokens.
pub trait NounTagger: Send + Sync {
    fn tag_nouns(&self, tokens: &[String]) -> BTreeSet<String>;
}

const NOUN_SUFFIXES: [&str; 4] = ["tion", "ment", "ness", "ity"];

/// Bundled noun lexicon plus suffix heuristics.
///
/// Lexicon matching is done on stems, so inflected forms (`batteries`)
/// match their lemma (`battery`).
#[derive(Debug, Clone)]
pub struct LexiconTagger {
    noun_stems: HashSet<String>,
}

impl LexiconTagger {
    pub fn new<I, S>(lemmas: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        LexiconTagger {
            noun_stems: lemmas
                .into_iter()
                .map(|l| porter_stem(&l.as_ref().to_lowercase()))
                .collect(),
        }
    }

    fn has_noun_suffix(token: &str) -> bool {
        let singular = token.strip_suffix('s');
        [Some(token), singular].into_iter().flatten().any(|t| {
            NOUN_SUFFIXES
                .iter()
                .any(|suf| t.len() >= suf.len() + 3 && t.ends_with(suf))
        })
    }
}

impl NounTagger for LexiconTagger {
    fn tag_nouns(&self, tokens: &[String]) -> BTreeSet<String> {
        tokens
            .iter()
            .filter_map(|t| {
                let stem = porter_stem(t);
                (self.noun_stems.contains(&stem) || Self::has_noun_suffix(t)).then_some(stem)
            })
            .collect()
    }
}
