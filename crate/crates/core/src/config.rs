//! Flat `key = value` configuration.
//!
//! Blank lines and lines starting with `#` are ignored. Unknown keys are
//! errors. Values not present keep their built-in defaults.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::authority::{AuthorityParams, IterParams, PowerIterationParams};
use crate::campaign::{RankBand, ReinforcementParams, DEFAULT_K, DEFAULT_R, DEFAULT_TH};
use crate::error::{Error, Result};
use crate::graph::ReactionWeights;
use crate::relevance::{DEFAULT_ALPHA, DEFAULT_MIN_PAIR_COUNT, DEFAULT_TOP_N_PER_WORD};
use crate::text::TextPipeline;

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub alpha: f64,
    pub weights: ReactionWeights,
    pub pagerank: PowerIterationParams,
    pub iterative: IterParams,
    pub use_weights: bool,
    pub k: usize,
    pub r: usize,
    pub th: usize,
    pub stopwords: Option<PathBuf>,
    pub stem_rules: Option<PathBuf>,
    pub group_topic: Option<String>,
    pub seed: u64,
    pub min_pair_count: usize,
    pub top_n_per_word: usize,
    pub bands: Vec<RankBand>,
    pub promotion_months: usize,
    /// Worker threads; 0 lets the runtime decide.
    pub workers: usize,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            alpha: DEFAULT_ALPHA,
            weights: ReactionWeights::default(),
            pagerank: PowerIterationParams::default(),
            iterative: IterParams::default(),
            use_weights: true,
            k: DEFAULT_K,
            r: DEFAULT_R,
            th: DEFAULT_TH,
            stopwords: None,
            stem_rules: None,
            group_topic: None,
            seed: 42,
            min_pair_count: DEFAULT_MIN_PAIR_COUNT,
            top_n_per_word: DEFAULT_TOP_N_PER_WORD,
            bands: vec![
                RankBand { first: 1, last: 200 },
                RankBand { first: 201, last: 500 },
                RankBand { first: 501, last: 1000 },
            ],
            promotion_months: 3,
            workers: 0,
        }
    }
}

fn value<T: FromStr>(key: &str, raw: &str) -> Result<T> {
    raw.parse()
        .map_err(|_| Error::Config(format!("invalid value `{raw}` for `{key}`")))
}

impl Config {
    pub fn parse(src: &str) -> Result<Self> {
        let mut cfg = Config::default();
        for (i, line) in src.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, raw) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", i + 1)))?;
            cfg.set(key.trim(), raw.trim())?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let src = std::fs::read_to_string(path)?;
        Config::parse(&src)
    }

    pub fn set(&mut self, key: &str, raw: &str) -> Result<()> {
        match key {
            "alpha" => self.alpha = value(key, raw)?,
            "weight.like_on_comment" => self.weights.like_on_comment = value(key, raw)?,
            "weight.like" => self.weights.like = value(key, raw)?,
            "weight.comment" => self.weights.comment = value(key, raw)?,
            "weight.share" => self.weights.share = value(key, raw)?,
            "damping" => self.pagerank.damping = value(key, raw)?,
            "tol" => self.pagerank.tol = value(key, raw)?,
            "max_iter" => self.pagerank.max_iter = value(key, raw)?,
            "iter_tol" => self.iterative.tol = value(key, raw)?,
            "iter_max_iter" => self.iterative.max_iter = value(key, raw)?,
            "use_weights" => self.use_weights = value(key, raw)?,
            "k" => self.k = value(key, raw)?,
            "r" => self.r = value(key, raw)?,
            "th" => self.th = value(key, raw)?,
            "stopwords" => self.stopwords = Some(PathBuf::from(raw)),
            "stem_rules" => self.stem_rules = Some(PathBuf::from(raw)),
            "group_topic" => self.group_topic = Some(raw.to_string()),
            "seed" => self.seed = value(key, raw)?,
            "min_pair_count" => self.min_pair_count = value(key, raw)?,
            "top_n_per_word" => self.top_n_per_word = value(key, raw)?,
            "bands" => self.bands = RankBand::parse_list(raw)?,
            "promotion_months" => self.promotion_months = value(key, raw)?,
            "workers" => self.workers = value(key, raw)?,
            other => return Err(Error::Config(format!("unknown key `{other}`"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let wrap = |e: Error| Error::Config(e.to_string());
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return Err(Error::Config(format!("alpha must be >= 0, got {}", self.alpha)));
        }
        let w = self.weights;
        ReactionWeights::new(w.like_on_comment, w.like, w.comment, w.share).map_err(wrap)?;
        self.pagerank.validate().map_err(wrap)?;
        self.iterative.validate().map_err(wrap)?;
        ReinforcementParams::new(self.k, self.r, self.th).map_err(wrap)?;
        if self.min_pair_count == 0 {
            return Err(Error::Config("min_pair_count must be >= 1".into()));
        }
        if self.bands.is_empty() {
            return Err(Error::Config("at least one rank band is required".into()));
        }
        Ok(())
    }

    pub fn authority(&self) -> AuthorityParams {
        AuthorityParams {
            pagerank: self.pagerank,
            iterative: self.iterative,
            use_weights: self.use_weights,
        }
    }

    pub fn reinforcement(&self) -> Result<ReinforcementParams> {
        ReinforcementParams::new(self.k, self.r, self.th)
    }

    pub fn text_pipeline(&self) -> Result<TextPipeline> {
        TextPipeline::from_files(self.stopwords.as_deref(), self.stem_rules.as_deref())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let c = Config::parse("").unwrap();
        assert_eq!(c.alpha, 20.0);
        assert_eq!(c.weights, ReactionWeights::default());
        assert_eq!(c.pagerank.damping, 0.85);
        assert_eq!((c.k, c.r, c.th), (20, 3, 50));
    }

    #[test]
    fn overrides() {
        let c = Config::parse("# comment\nalpha = 5\nweight.share=16\nk=10\nbands = 1-5, 6-10\ngroup_topic = java\n")
            .unwrap();
        assert_eq!(c.alpha, 5.0);
        assert_eq!(c.weights.share, 16.0);
        assert_eq!(c.k, 10);
        assert_eq!(c.bands.len(), 2);
        assert_eq!(c.group_topic.as_deref(), Some("java"));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(Config::parse("colour = red"), Err(Error::Config(_))));
        assert!(Config::parse("alpha").is_err());
        assert!(Config::parse("alpha = -1").is_err());
        assert!(Config::parse("k = x").is_err());
        assert!(Config::parse("k = 2\nr = 3").is_err());
        assert!(Config::parse("damping = 1.5").is_err());
        assert!(Config::parse("weight.like = 0").is_err());
    }
}
