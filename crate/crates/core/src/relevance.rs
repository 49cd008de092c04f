//! Word relatedness from document co-occurrence, and topical boost of content.
//!
//! Relatedness of two words is the mutual information of their binary
//! document-presence variables, summed over the full 2x2 presence/absence
//! table with natural logarithms:
//!
//! ```text
//! MI(x, y) = sum over a, b in {0, 1} of p(a, b) * ln(p(a, b) / (p(a) p(b)))
//! ```
//!
//! where `p(1) = df(x) / N` and `p(1, 1) = df(x, y) / N`. Empty cells
//! contribute nothing.
//!
//! Content relevance to a topic sums `similarity(topic word, token)` over
//! every (topic word, token) pair, counting repeated tokens once per
//! occurrence. An exact match scores the table's `self_sim`. The boost is
//! `1 + alpha * ln(1 + relevance)`.

use std::collections::{BTreeSet, HashMap};
use std::io::BufRead;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::ingest::GroupActivityLog;
use crate::text::{TextPipeline, TokenList};

pub const DEFAULT_ALPHA: f64 = 20.0;
pub const DEFAULT_MIN_PAIR_COUNT: usize = 2;
pub const DEFAULT_TOP_N_PER_WORD: usize = 50;

/// Documents used to estimate word relatedness.
#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    documents: Vec<TokenList>,
}

impl Corpus {
    pub fn new(documents: Vec<TokenList>) -> Result<Self> {
        if documents.iter().all(|d| d.is_empty()) {
            return Err(Error::EmptyCorpus);
        }
        Ok(Corpus { documents })
    }

    /// One raw-text document per line.
    pub fn from_reader<R: BufRead>(reader: R, pipeline: &TextPipeline) -> Result<Self> {
        let mut docs = Vec::new();
        for line in reader.lines() {
            docs.push(pipeline.preprocess(&line?));
        }
        Corpus::new(docs)
    }

    /// Post and comment texts of a log, one document each.
    pub fn from_log(log: &GroupActivityLog, pipeline: &TextPipeline) -> Result<Self> {
        Corpus::new(log.contents().iter().map(|c| pipeline.preprocess(&c.text)).collect())
    }

    pub fn documents(&self) -> &[TokenList] {
        &self.documents
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }
}

/// Symmetric word-pair relatedness scores.
#[derive(Debug, Clone, PartialEq)]
pub struct RelatednessTable {
    entries: HashMap<String, HashMap<String, f64>>,
    vocab: BTreeSet<String>,
    self_sim: f64,
}

impl RelatednessTable {
    /// Build from unordered pairs. Self-pairs and non-positive scores are
    /// rejected; each pair may appear once.
    pub fn from_pairs<I>(pairs: I, vocab: BTreeSet<String>) -> Result<Self>
    where
        I: IntoIterator<Item = (String, String, f64)>,
    {
        let mut entries: HashMap<String, HashMap<String, f64>> = HashMap::new();
        let mut max = f64::NEG_INFINITY;
        for (x, y, s) in pairs {
            if x == y {
                return Err(Error::InvalidParameter(format!("self-pair `{x}`")));
            }
            if !(s.is_finite() && s > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "score for ({x}, {y}) must be finite and positive, got {s}"
                )));
            }
            if entries.get(&x).is_some_and(|m| m.contains_key(&y)) {
                return Err(Error::InvalidParameter(format!("duplicate pair ({x}, {y})")));
            }
            max = max.max(s);
            entries.entry(x.clone()).or_default().insert(y.clone(), s);
            entries.entry(y).or_default().insert(x, s);
        }
        let mut vocab = vocab;
        vocab.extend(entries.keys().cloned());
        let self_sim = if entries.is_empty() { 1.0 } else { max };
        Ok(RelatednessTable {
            entries,
            vocab,
            self_sim,
        })
    }

    pub fn empty() -> Self {
        RelatednessTable {
            entries: HashMap::new(),
            vocab: BTreeSet::new(),
            self_sim: 1.0,
        }
    }

    pub fn get(&self, x: &str, y: &str) -> Option<f64> {
        self.entries.get(x)?.get(y).copied()
    }

    /// Score assigned to an exact topic-word match.
    pub fn self_sim(&self) -> f64 {
        self.self_sim
    }

    pub fn vocab(&self) -> &BTreeSet<String> {
        &self.vocab
    }

    pub fn similarity(&self, topic_word: &str, word: &str) -> f64 {
        if topic_word == word {
            self.self_sim
        } else {
            self.get(topic_word, word).unwrap_or(0.0)
        }
    }

    /// Stored pairs with `x < y`, sorted.
    pub fn pairs(&self) -> Vec<(&str, &str, f64)> {
        let mut out: Vec<_> = self
            .entries
            .iter()
            .flat_map(|(x, m)| {
                m.iter()
                    .filter(move |(y, _)| x.as_str() < y.as_str())
                    .map(move |(y, &s)| (x.as_str(), y.as_str(), s))
            })
            .collect();
        out.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        out
    }

    pub fn len(&self) -> usize {
        self.entries.values().map(HashMap::len).sum::<usize>() / 2
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Tab-separated `word\tword\tscore`, one line per pair, sorted.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for (x, y, s) in self.pairs() {
            out.push_str(&format!("{x}\t{y}\t{s}\n"));
        }
        out
    }

    pub fn from_tsv(src: &str) -> Result<Self> {
        let mut pairs = Vec::new();
        for (i, line) in src.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let ctx = || format!("relatedness table line {}", i + 1);
            let fields: Vec<&str> = line.split('\t').collect();
            let [x, y, s] = fields[..] else {
                return Err(Error::parse(ctx(), "expected 3 tab-separated fields"));
            };
            let s: f64 = s
                .parse()
                .map_err(|e: std::num::ParseFloatError| Error::parse(ctx(), e.to_string()))?;
            pairs.push((x.to_string(), y.to_string(), s));
        }
        RelatednessTable::from_pairs(pairs, BTreeSet::new())
    }
}

/// Mutual information of two binary presence variables over `n` documents.
pub fn presence_mutual_information(n: u64, df_x: u64, df_y: u64, df_xy: u64) -> f64 {
    let n_f = n as f64;
    let cells = [
        (df_xy, df_x, df_y),
        (df_x - df_xy, df_x, n - df_y),
        (df_y - df_xy, n - df_x, df_y),
        (n + df_xy - df_x - df_y, n - df_x, n - df_y),
    ];
    cells
        .iter()
        .filter(|(joint, _, _)| *joint > 0)
        .map(|&(joint, mx, my)| {
            let p = joint as f64 / n_f;
            p * (joint as f64 * n_f / (mx as f64 * my as f64)).ln()
        })
        .sum()
}

type PairCounts = HashMap<(u32, u32), u32>;

const COUNT_CHUNK: usize = 256;

/// Build the relatedness table from document-level co-occurrence.
///
/// Pairs co-occurring in fewer than `min_pair_count` documents are not
/// stored. A pair survives the per-word cut only if it is among the
/// `top_n_per_word` best partners (MI descending, word ascending) of both
/// of its words.
pub fn build_relatedness_table(
    corpus: &Corpus,
    min_pair_count: usize,
    top_n_per_word: usize,
) -> Result<RelatednessTable> {
    if corpus.documents.iter().all(|d| d.is_empty()) {
        return Err(Error::EmptyCorpus);
    }
    if min_pair_count == 0 {
        return Err(Error::InvalidParameter("min_pair_count must be >= 1".into()));
    }

    let vocab: BTreeSet<String> = corpus.documents.iter().flatten().cloned().collect();
    let words: Vec<&str> = vocab.iter().map(String::as_str).collect();
    let word_id: HashMap<&str, u32> = words.iter().enumerate().map(|(i, w)| (*w, i as u32)).collect();

    let docs: Vec<Vec<u32>> = corpus
        .documents
        .iter()
        .map(|d| {
            let set: BTreeSet<u32> = d.iter().map(|w| word_id[w.as_str()]).collect();
            set.into_iter().collect()
        })
        .collect();

    let mut df = vec![0u64; words.len()];
    for d in &docs {
        for &w in d {
            df[w as usize] += 1;
        }
    }

    let pair_counts: PairCounts = docs
        .par_chunks(COUNT_CHUNK)
        .map(|chunk| {
            let mut counts = PairCounts::new();
            for d in chunk {
                for (i, &a) in d.iter().enumerate() {
                    for &b in &d[i + 1..] {
                        *counts.entry((a, b)).or_insert(0) += 1;
                    }
                }
            }
            counts
        })
        .reduce(PairCounts::new, |mut a, b| {
            for (k, v) in b {
                *a.entry(k).or_insert(0) += v;
            }
            a
        });

    let n = docs.len() as u64;
    let mut scored: Vec<(u32, u32, f64)> = pair_counts
        .into_iter()
        .filter(|&(_, c)| c as usize >= min_pair_count)
        .filter_map(|((a, b), c)| {
            let mi = presence_mutual_information(n, df[a as usize], df[b as usize], c as u64);
            (mi > 0.0).then_some((a, b, mi))
        })
        .collect();
    scored.sort_by_key(|p| (p.0, p.1));

    let mut partners: Vec<Vec<(u32, f64)>> = vec![Vec::new(); words.len()];
    for &(a, b, mi) in &scored {
        partners[a as usize].push((b, mi));
        partners[b as usize].push((a, mi));
    }
    let mut keep_votes: HashMap<(u32, u32), u8> = HashMap::new();
    for (w, list) in partners.iter_mut().enumerate() {
        list.sort_by(|p, q| q.1.total_cmp(&p.1).then(p.0.cmp(&q.0)));
        for &(other, _) in list.iter().take(top_n_per_word) {
            let w = w as u32;
            *keep_votes.entry((w.min(other), w.max(other))).or_insert(0) += 1;
        }
    }

    let pairs = scored
        .into_iter()
        .filter(|(a, b, _)| keep_votes.get(&(*a, *b)) == Some(&2))
        .map(|(a, b, mi)| (words[a as usize].to_string(), words[b as usize].to_string(), mi));
    RelatednessTable::from_pairs(pairs.collect::<Vec<_>>(), vocab.clone())
}

/// Partners of `seed` by score descending, ties by word ascending.
pub fn related_words(table: &RelatednessTable, seed: &str, limit: usize) -> Vec<(String, f64)> {
    let Some(m) = table.entries.get(seed) else {
        return Vec::new();
    };
    let mut out: Vec<(String, f64)> = m.iter().map(|(w, &s)| (w.clone(), s)).collect();
    out.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    out.truncate(limit);
    out
}

/// Nonempty set of preprocessed topic words.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TopicQuery {
    words: BTreeSet<String>,
}

impl TopicQuery {
    pub fn new<I, S>(words: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let words: BTreeSet<String> = words.into_iter().map(Into::into).collect();
        if words.is_empty() || words.iter().any(String::is_empty) {
            return Err(Error::EmptyTopic);
        }
        Ok(TopicQuery { words })
    }

    /// Run raw topic text through the same pipeline as content.
    pub fn from_text(raw: &str, pipeline: &TextPipeline) -> Result<Self> {
        TopicQuery::new(pipeline.preprocess(raw))
    }

    pub fn words(&self) -> &BTreeSet<String> {
        &self.words
    }

    pub fn label(&self) -> String {
        self.words.iter().cloned().collect::<Vec<_>>().join(" ")
    }
}

/// Sum of similarities over all (topic word, token) pairs.
pub fn content_relevance(tokens: &[String], topic: &TopicQuery, table: &RelatednessTable) -> f64 {
    let mut relevance = 0.0;
    for t in &topic.words {
        for p in tokens {
            relevance += table.similarity(t, p);
        }
    }
    relevance
}

/// `1 + alpha * ln(1 + relevance)`.
pub fn boosted_relevance(relevance: f64, alpha: f64) -> Result<f64> {
    if relevance.is_nan() || relevance < 0.0 {
        return Err(Error::NegativeRelevance(relevance));
    }
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidParameter(format!("alpha must be >= 0, got {alpha}")));
    }
    Ok(1.0 + alpha * relevance.ln_1p())
}

/// Scores raw content text against one topic.
#[derive(Debug, Clone, Copy)]
pub struct TopicScorer<'a> {
    pub topic: &'a TopicQuery,
    pub table: &'a RelatednessTable,
    pub pipeline: &'a TextPipeline,
    pub alpha: f64,
}

impl<'a> TopicScorer<'a> {
    pub fn new(
        topic: &'a TopicQuery,
        table: &'a RelatednessTable,
        pipeline: &'a TextPipeline,
        alpha: f64,
    ) -> Result<Self> {
        boosted_relevance(0.0, alpha)?;
        Ok(TopicScorer {
            topic,
            table,
            pipeline,
            alpha,
        })
    }

    pub fn relevance(&self, text: &str) -> f64 {
        content_relevance(&self.pipeline.preprocess(text), self.topic, self.table)
    }

    pub fn boost(&self, text: &str) -> f64 {
        boosted_relevance(self.relevance(text), self.alpha).expect("relevance is non-negative")
    }

    /// `(relevance, boost)` per content item, aligned with `log.contents()`.
    pub fn score_contents(&self, log: &GroupActivityLog) -> Vec<(f64, f64)> {
        log.contents()
            .par_iter()
            .map(|c| {
                let rel = self.relevance(&c.text);
                (
                    rel,
                    boosted_relevance(rel, self.alpha).expect("relevance is non-negative"),
                )
            })
            .collect()
    }
}
