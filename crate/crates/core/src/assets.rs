//! Plain-text assets: stoplist, contraction/term map, noun lexicon and the
//! sentiment lists. Defaults are compiled in; a directory with files of the
//! same names overrides them one file at a time.

use std::collections::{HashMap, HashSet};
use std::path::Path;

use crate::error::{Error, Result};
use crate::sentiment::SentimentLexicon;

pub const STOPWORDS: &str = "stopwords.txt";
pub const CONTRACTIONS: &str = "contractions.txt";
pub const NOUNS: &str = "nouns.txt";
pub const LEXICON: &str = "lexicon.txt";
pub const NEGATORS: &str = "negators.txt";
pub const BOOSTERS: &str = "boosters.txt";

const DEFAULTS: [(&str, &str); 6] = [
    (STOPWORDS, include_str!("../assets/stopwords.txt")),
    (CONTRACTIONS, include_str!("../assets/contractions.txt")),
    (NOUNS, include_str!("../assets/nouns.txt")),
    (LEXICON, include_str!("../assets/lexicon.txt")),
    (NEGATORS, include_str!("../assets/negators.txt")),
    (BOOSTERS, include_str!("../assets/boosters.txt")),
];

/// Raw text of every asset, keyed by file name.
#[derive(Debug, Clone)]
pub struct AssetTexts {
    texts: Vec<(&'static str, String)>,
}

impl AssetTexts {
    pub fn builtin() -> Self {
        AssetTexts {
            texts: DEFAULTS.iter().map(|(n, t)| (*n, t.to_string())).collect(),
        }
    }

    /// Reads overrides from `dir`; files missing there fall back to the builtin copy.
    pub fn from_dir(dir: &Path) -> Result<Self> {
        let mut texts = Vec::with_capacity(DEFAULTS.len());
        for (name, default) in DEFAULTS {
            let path = dir.join(name);
            let text = if path.exists() {
                let bytes = std::fs::read(&path).map_err(|e| Error::io(&path, e))?;
                String::from_utf8_lossy(&bytes).into_owned()
            } else {
                default.to_string()
            };
            texts.push((name, text));
        }
        Ok(AssetTexts { texts })
    }

    pub fn load(dir: Option<&Path>) -> Result<Self> {
        match dir {
            Some(d) => Self::from_dir(d),
            None => Ok(Self::builtin()),
        }
    }

    pub fn get(&self, name: &str) -> &str {
        self.texts
            .iter()
            .find(|(n, _)| *n == name)
            .map(|(_, t)| t.as_str())
            .unwrap_or("")
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.texts.iter().map(|(n, t)| (*n, t.as_str()))
    }

    pub fn text_assets(&self) -> Result<TextAssets> {
        Ok(TextAssets {
            stoplist: parse_word_set(self.get(STOPWORDS)),
            contractions: parse_contractions(CONTRACTIONS, self.get(CONTRACTIONS))?,
        })
    }

    pub fn noun_lexicon(&self) -> Vec<String> {
        parse_word_list(self.get(NOUNS))
    }

    pub fn sentiment_lexicon(&self) -> Result<SentimentLexicon> {
        SentimentLexicon::parse(self.get(LEXICON), self.get(NEGATORS), self.get(BOOSTERS))
    }
}

/// Tokenizer resources shared by preprocessing and ROUGE.
#[derive(Debug, Clone, Default)]
pub struct TextAssets {
    pub stoplist: HashSet<String>,
    /// Maps a lowercased surface form to its replacement words.
    pub contractions: HashMap<String, Vec<String>>,
}

impl TextAssets {
    pub fn builtin() -> Self {
        AssetTexts::builtin()
            .text_assets()
            .expect("builtin assets parse")
    }
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| {
            let t = l.trim();
            !t.is_empty() && !t.starts_with('#')
        })
}

pub fn parse_word_list(text: &str) -> Vec<String> {
    content_lines(text)
        .map(|(_, l)| l.trim().to_lowercase())
        .collect()
}

pub fn parse_word_set(text: &str) -> HashSet<String> {
    parse_word_list(text).into_iter().collect()
}

/// `from<TAB>to` per line; `to` may hold several space-separated words.
pub fn parse_contractions(name: &str, text: &str) -> Result<HashMap<String, Vec<String>>> {
    let mut map = HashMap::new();
    for (line, l) in content_lines(text) {
        let (from, to) = l.split_once('\t').ok_or_else(|| Error::Asset {
            name: name.to_string(),
            line,
            message: "expected `from<TAB>to`".into(),
        })?;
        let words: Vec<String> = to.split_whitespace().map(str::to_lowercase).collect();
        map.insert(from.trim().to_lowercase(), words);
    }
    Ok(map)
}

/// `token<TAB>number` per line. When `default` is set, the number may be omitted.
pub fn parse_weighted(name: &str, text: &str, default: Option<f64>) -> Result<HashMap<String, f64>> {
    let mut map = HashMap::new();
    for (line, l) in content_lines(text) {
        let bad = |message: String| Error::Asset {
            name: name.to_string(),
            line,
            message,
        };
        let (token, value) = match (l.split_once('\t'), default) {
            (Some((t, v)), _) => {
                let v: f64 = v
                    .trim()
                    .parse()
                    .map_err(|_| bad(format!("not a number: `{}`", v.trim())))?;
                (t, v)
            }
            (None, Some(d)) => (l, d),
            (None, None) => return Err(bad("expected `token<TAB>value`".into())),
        };
        if !value.is_finite() {
            return Err(bad("value must be finite".into()));
        }
        map.insert(token.trim().to_lowercase(), value);
    }
    Ok(map)
}
