//! Raw text to normalized token streams.
//!
//! The canonical step order is fixed: non-ASCII and URL/HTML removal,
//! contraction expansion, punctuation removal, ordinals to words, numerals to
//! words, whitespace collapse, lowercasing, stopword removal. Tokens are the
//! whitespace-separated pieces of the result.

use std::collections::{HashMap, HashSet};
use std::fs;
use std::path::Path;
use std::sync::LazyLock;

use chrono::NaiveDate;
use regex::{Captures, Regex};

use crate::error::{Error, Result};
use crate::numwords::{cardinal_words, ordinal_words};

const DEFAULT_STOPWORDS: &str = include_str!("../data/stopwords_snowball_en.txt");
const DEFAULT_CONTRACTIONS: &str = include_str!("../data/contractions_en.csv");

static HTML_TAG: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"<[^<>]*>").unwrap());
static HTML_ENTITY: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"&(?:[A-Za-z]+|#[0-9]+|#[xX][0-9A-Fa-f]+);").unwrap());
static URL: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?i)(?:https?://|ftp://|www\.)\S+").unwrap());
static APOSTROPHE_WORD: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"[A-Za-z]*'[A-Za-z]+(?:'[A-Za-z]+)*").unwrap());
static PUNCT: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"[\p{P}\p{S}]").unwrap());
static ORDINAL: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?i)\b([0-9]+)(?:st|nd|rd|th)\b").unwrap());
static NUMERAL: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"\b[0-9]+\b").unwrap());

/// Per-document metadata carried alongside token streams and DTM rows.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DocMeta {
    pub id: String,
    pub date: Option<NaiveDate>,
    pub source: Option<String>,
    pub group: Option<String>,
}

impl DocMeta {
    pub fn new(id: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RawDocument {
    pub meta: DocMeta,
    pub text: String,
}

impl RawDocument {
    pub fn new(id: impl Into<String>, text: impl Into<String>) -> Self {
        Self {
            meta: DocMeta::new(id),
            text: text.into(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TokenizedDocument {
    pub meta: DocMeta,
    pub tokens: Vec<String>,
}

/// One stage of text normalization.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Step {
    StripNonAscii,
    StripUrlsHtml,
    ExpandContractions,
    RemovePunctuation,
    OrdinalsToWords,
    NumeralsToWords,
    CollapseWhitespace,
    Lowercase,
    RemoveStopwords,
}

impl Step {
    pub const CANONICAL: [Step; 9] = [
        Step::StripNonAscii,
        Step::StripUrlsHtml,
        Step::ExpandContractions,
        Step::RemovePunctuation,
        Step::OrdinalsToWords,
        Step::NumeralsToWords,
        Step::CollapseWhitespace,
        Step::Lowercase,
        Step::RemoveStopwords,
    ];
}

#[derive(Debug, Clone)]
pub struct NormalizationConfig {
    pub strip_non_ascii: bool,
    pub strip_urls_html: bool,
    /// Lowercase contraction -> expansion.
    pub contraction_map: HashMap<String, String>,
    pub ordinal_to_word: bool,
    pub numeral_to_word: bool,
    pub lowercase: bool,
    pub stopword_list: HashSet<String>,
    /// A term is pruned when the fraction of documents lacking it reaches this value.
    pub sparsity_threshold: f64,
}

impl Default for NormalizationConfig {
    fn default() -> Self {
        Self {
            strip_non_ascii: true,
            strip_urls_html: true,
            contraction_map: parse_contractions(DEFAULT_CONTRACTIONS, "bundled contractions")
                .expect("bundled contraction table is well formed"),
            ordinal_to_word: true,
            numeral_to_word: true,
            lowercase: true,
            stopword_list: parse_stopwords(DEFAULT_STOPWORDS),
            sparsity_threshold: 0.999,
        }
    }
}

impl NormalizationConfig {
    /// Checks the documented invariants.
    pub fn validate(&self) -> Result<()> {
        if !(self.sparsity_threshold > 0.0 && self.sparsity_threshold <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "sparsity threshold {} outside (0, 1]",
                self.sparsity_threshold
            )));
        }
        if let Some(k) = self.contraction_map.keys().find(|k| k.to_lowercase() != **k) {
            return Err(Error::InvalidArgument(format!(
                "contraction key {k:?} is not lowercase"
            )));
        }
        Ok(())
    }

    pub fn load_stopwords(&mut self, path: &Path) -> Result<()> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        self.stopword_list = parse_stopwords(&text);
        Ok(())
    }

    pub fn load_contractions(&mut self, path: &Path) -> Result<()> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        self.contraction_map = parse_contractions(&text, &path.display().to_string())?;
        Ok(())
    }
}

/// One term per line; blank lines and `#` comments ignored.
pub fn parse_stopwords(text: &str) -> HashSet<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_string)
        .collect()
}

/// Two-column CSV `contraction,expanded` with a header row.
pub fn parse_contractions(text: &str, origin: &str) -> Result<HashMap<String, String>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(text.as_bytes());
    let mut map = HashMap::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        if rec.len() != 2 {
            return Err(Error::parse(
                format!("{origin}:{}", line + 2),
                "expected two columns",
            ));
        }
        map.insert(rec[0].trim().to_lowercase(), rec[1].trim().to_string());
    }
    Ok(map)
}

fn apply_step(step: Step, text: String, cfg: &NormalizationConfig) -> String {
    match step {
        Step::StripNonAscii if cfg.strip_non_ascii => text
            .chars()
            .map(|c| match c {
                '\u{2018}' | '\u{2019}' | '\u{02BC}' => '\'',
                c => c,
            })
            .filter(char::is_ascii)
            .collect(),
        Step::StripUrlsHtml if cfg.strip_urls_html => {
            let t = HTML_TAG.replace_all(&text, " ");
            let t = HTML_ENTITY.replace_all(&t, " ");
            URL.replace_all(&t, " ").into_owned()
        }
        Step::ExpandContractions if !cfg.contraction_map.is_empty() => APOSTROPHE_WORD
            .replace_all(&text, |caps: &Captures| {
                let word = &caps[0];
                match cfg.contraction_map.get(&word.to_lowercase()) {
                    Some(exp) => exp.clone(),
                    None => word.to_string(),
                }
            })
            .into_owned(),
        Step::RemovePunctuation => PUNCT.replace_all(&text, "").into_owned(),
        Step::OrdinalsToWords if cfg.ordinal_to_word => ORDINAL
            .replace_all(&text, |caps: &Captures| {
                format!(" {} ", ordinal_words(&caps[1]).join(" "))
            })
            .into_owned(),
        Step::NumeralsToWords if cfg.numeral_to_word => NUMERAL
            .replace_all(&text, |caps: &Captures| {
                format!(" {} ", cardinal_words(&caps[0]).join(" "))
            })
            .into_owned(),
        Step::CollapseWhitespace => text.split_whitespace().collect::<Vec<_>>().join(" "),
        Step::Lowercase if cfg.lowercase => text.to_lowercase(),
        Step::RemoveStopwords if !cfg.stopword_list.is_empty() => text
            .split_whitespace()
            .filter(|t| !cfg.stopword_list.contains(*t))
            .collect::<Vec<_>>()
            .join(" "),
        _ => text,
    }
}

/// Runs `steps` in the given order. Use [`normalize_text`] for the canonical order.
pub fn normalize_with_steps(text: &str, cfg: &NormalizationConfig, steps: &[Step]) -> Vec<String> {
    let out = steps
        .iter()
        .fold(text.to_string(), |acc, &step| apply_step(step, acc, cfg));
    out.split_whitespace().map(str::to_string).collect()
}

pub fn normalize_text(doc: &RawDocument, cfg: &NormalizationConfig) -> Vec<String> {
    normalize_with_steps(&doc.text, cfg, &Step::CANONICAL)
}

/// Normalizes a batch of documents in parallel, preserving order.
pub fn normalize_corpus(docs: &[RawDocument], cfg: &NormalizationConfig) -> Vec<TokenizedDocument> {
    use rayon::prelude::*;
    docs.par_iter()
        .map(|d| TokenizedDocument {
            meta: d.meta.clone(),
            tokens: normalize_text(d, cfg),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn norm(s: &str) -> Vec<String> {
        normalize_text(&RawDocument::new("d", s), &NormalizationConfig::default())
    }

    #[test]
    fn rule_forced_examples() {
        assert_eq!(norm("Don't STOP!"), ["stop"]);
        assert_eq!(norm("<b>Visit https://x.co now</b>"), ["visit", "now"]);
        assert_eq!(norm("3 cats on 3rd street"), ["three", "cats", "third", "street"]);
    }

    #[test]
    fn numerals_render_as_separate_words() {
        assert_eq!(norm("In 2020"), ["two", "thousand", "twenty"]);
        assert_eq!(norm("the 21st century"), ["twenty", "first", "century"]);
        assert_eq!(norm("1,000 people"), ["one", "thousand", "people"]);
    }

    #[test]
    fn curly_apostrophes_still_expand() {
        assert_eq!(norm("We\u{2019}re here"), Vec::<String>::new());
        assert_eq!(norm("caf\u{e9} society"), ["caf", "society"]);
    }

    #[test]
    fn entities_and_www_links_removed() {
        assert_eq!(norm("fish &amp; chips www.example.com"), ["fish", "chips"]);
    }

    #[test]
    fn empty_text_gives_no_tokens() {
        assert!(norm("").is_empty());
        assert!(norm("the of and").is_empty());
    }

    #[test]
    fn stopwords_before_contractions_changes_output() {
        let cfg = NormalizationConfig::default();
        let swapped = [
            Step::StripNonAscii,
            Step::StripUrlsHtml,
            Step::RemoveStopwords,
            Step::ExpandContractions,
            Step::RemovePunctuation,
            Step::OrdinalsToWords,
            Step::NumeralsToWords,
            Step::CollapseWhitespace,
            Step::Lowercase,
        ];
        let canonical = normalize_with_steps("Don't", &cfg, &Step::CANONICAL);
        let other = normalize_with_steps("Don't", &cfg, &swapped);
        assert!(canonical.is_empty());
        assert_eq!(other, ["do", "not"]);
    }

    #[test]
    fn disabled_flags_are_pass_through() {
        let cfg = NormalizationConfig {
            numeral_to_word: false,
            ordinal_to_word: false,
            lowercase: false,
            stopword_list: HashSet::new(),
            ..NormalizationConfig::default()
        };
        let toks = normalize_text(&RawDocument::new("d", "The 3rd of 4"), &cfg);
        assert_eq!(toks, ["The", "3rd", "of", "4"]);
    }

    #[test]
    fn config_validation() {
        let mut cfg = NormalizationConfig::default();
        assert!(cfg.validate().is_ok());
        cfg.sparsity_threshold = 0.0;
        assert!(cfg.validate().is_err());
        cfg.sparsity_threshold = 1.0;
        cfg.contraction_map.insert("Can't".into(), "can not".into());
        assert!(cfg.validate().is_err());
    }

    proptest! {
        #[test]
        fn normalization_is_idempotent(s in "[ -~\u{e9}\u{2019}]{0,80}") {
            let once = norm(&s);
            let twice = norm(&once.join(" "));
            prop_assert_eq!(once, twice);
        }
    }
}
