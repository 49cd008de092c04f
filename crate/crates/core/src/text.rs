//! Text preprocessing: tokenization, stopword removal and suffix stemming.
//!
//! Tokens are maximal runs of alphanumeric characters, lowercased. Stopwords
//! are dropped before and after stemming so that no emitted token is a
//! stopword. Stemming applies the first matching rule of an ordered
//! suffix-strip list.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

const DEFAULT_STOPWORDS: &str = include_str!("../data/stopwords.txt");
const DEFAULT_STEM_RULES: &str = include_str!("../data/stem_rules.txt");

/// Ordered list of lowercase stemmed terms.
pub type TokenList = Vec<String>;

/// Strip `suffix` when at least `min_stem` characters remain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StemRule {
    pub suffix: String,
    pub min_stem: usize,
}

impl StemRule {
    pub fn new(suffix: impl Into<String>, min_stem: usize) -> Self {
        StemRule {
            suffix: suffix.into(),
            min_stem,
        }
    }

    fn apply<'a>(&self, word: &'a str) -> Option<&'a str> {
        let stem = word.strip_suffix(self.suffix.as_str())?;
        (stem.chars().count() >= self.min_stem).then_some(stem)
    }
}

/// Parse a stopword file: one word per line, `#` starts a comment line.
pub fn parse_stopwords(src: &str) -> BTreeSet<String> {
    src.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_lowercase)
        .collect()
}

/// Parse a stem rule file: `<suffix> <min_stem>` per line.
pub fn parse_stem_rules(src: &str) -> Result<Vec<StemRule>> {
    let mut rules = Vec::new();
    for (i, line) in src.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split_whitespace();
        let suffix = parts.next().unwrap_or_default();
        let min_stem = match parts.next() {
            Some(n) => n
                .parse::<usize>()
                .map_err(|e| Error::parse(format!("stem rules line {}", i + 1), e.to_string()))?,
            None => 1,
        };
        if parts.next().is_some() {
            return Err(Error::parse(
                format!("stem rules line {}", i + 1),
                "expected `<suffix> <min_stem>`",
            ));
        }
        rules.push(StemRule::new(suffix.to_lowercase(), min_stem));
    }
    Ok(rules)
}

/// Stopword set plus stemming rules.
#[derive(Debug, Clone)]
pub struct TextPipeline {
    stopwords: BTreeSet<String>,
    rules: Vec<StemRule>,
}

impl Default for TextPipeline {
    fn default() -> Self {
        TextPipeline {
            stopwords: parse_stopwords(DEFAULT_STOPWORDS),
            rules: parse_stem_rules(DEFAULT_STEM_RULES).expect("shipped stem rules parse"),
        }
    }
}

impl TextPipeline {
    pub fn new(stopwords: BTreeSet<String>, rules: Vec<StemRule>) -> Self {
        TextPipeline { stopwords, rules }
    }

    /// Load from files; `None` selects the shipped default for that part.
    pub fn from_files(stopwords: Option<&Path>, stem_rules: Option<&Path>) -> Result<Self> {
        let defaults = TextPipeline::default();
        let stopwords = match stopwords {
            Some(p) => parse_stopwords(&fs::read_to_string(p)?),
            None => defaults.stopwords,
        };
        let rules = match stem_rules {
            Some(p) => parse_stem_rules(&fs::read_to_string(p)?)?,
            None => defaults.rules,
        };
        Ok(TextPipeline { stopwords, rules })
    }

    pub fn stopwords(&self) -> &BTreeSet<String> {
        &self.stopwords
    }

    pub fn stem<'a>(&self, word: &'a str) -> &'a str {
        self.rules.iter().find_map(|r| r.apply(word)).unwrap_or(word)
    }

    pub fn preprocess(&self, raw: &str) -> TokenList {
        preprocess_text(raw, &self.stopwords, &self.rules)
    }
}

/// Lowercase, split on non-alphanumerics, drop stopwords, strip suffixes.
pub fn preprocess_text(raw: &str, stopwords: &BTreeSet<String>, rules: &[StemRule]) -> TokenList {
    raw.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .filter_map(|t| {
            let lower = t.to_lowercase();
            if stopwords.contains(&lower) {
                return None;
            }
            let stem = rules.iter().find_map(|r| r.apply(&lower)).unwrap_or(&lower);
            (!stem.is_empty() && !stopwords.contains(stem)).then(|| stem.to_string())
        })
        .collect()
}
