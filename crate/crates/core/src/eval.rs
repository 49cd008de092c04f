//! Influence baselines and ranking quality metrics.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use crate::authority::{compute_scores, top_k, AuthorityParams, Method, RankedList, ScoreVector};
use crate::error::{Error, Result};
use crate::graph::{build_interaction_graph, InteractionGraph, ReactionWeights};
use crate::ingest::{GroupActivityLog, UserId};
use crate::relevance::{content_relevance, RelatednessTable, TopicQuery, TopicScorer};
use crate::text::TextPipeline;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VoteVariant {
    Votes,
    TopicalVotes,
}

/// Weighted reaction mass received per user.
#[derive(Debug, Clone, PartialEq)]
pub struct VoteVector {
    pub variant: VoteVariant,
    pub votes: BTreeMap<UserId, f64>,
}

impl VoteVector {
    pub fn get(&self, user: &str) -> f64 {
        self.votes.get(user).copied().unwrap_or(0.0)
    }
}

fn tally<F>(log: &GroupActivityLog, weights: &ReactionWeights, variant: VoteVariant, counts: F) -> VoteVector
where
    F: Fn(&str) -> bool,
{
    let mut votes: BTreeMap<UserId, f64> = log.users().iter().map(|u| (u.clone(), 0.0)).collect();
    for r in log.foreign_reactions() {
        if counts(&r.target) {
            *votes.get_mut(log.target_author(r)).expect("author is a user") += weights.get(r.kind);
        }
    }
    VoteVector { variant, votes }
}

/// Sum of reaction weights received on all of a user's content, excluding
/// the user's own reactions.
pub fn votes(log: &GroupActivityLog, weights: &ReactionWeights) -> VoteVector {
    tally(log, weights, VoteVariant::Votes, |_| true)
}

/// As [`votes`], counting only reactions on content with positive topical
/// relevance.
pub fn topical_votes(
    log: &GroupActivityLog,
    topic: &TopicQuery,
    table: &RelatednessTable,
    pipeline: &TextPipeline,
    weights: &ReactionWeights,
) -> VoteVector {
    let relevant: HashMap<&str, bool> = log
        .contents()
        .iter()
        .map(|c| {
            let rel = content_relevance(&pipeline.preprocess(&c.text), topic, table);
            (c.content_id.as_str(), rel > 0.0)
        })
        .collect();
    tally(log, weights, VoteVariant::TopicalVotes, |target| relevant[target])
}

/// Sample Pearson correlation coefficient.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < 2 {
        return Err(Error::InvalidParameter("pearson needs at least 2 points".into()));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::ZeroVariance);
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Fractional ranks (1-based, ties averaged).
pub fn fractional_ranks(x: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut ranks = vec![0.0; x.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && x[idx[j + 1]] == x[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            ranks[k] = avg;
        }
        i = j + 1;
    }
    ranks
}

/// Pearson correlation of fractional ranks.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch(x.len(), y.len()));
    }
    pearson(&fractional_ranks(x), &fractional_ranks(y))
}

/// Graded relevance judgments per user.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RelevanceLabels {
    pub grades: BTreeMap<UserId, u32>,
}

impl RelevanceLabels {
    pub fn grade(&self, user: &str) -> u32 {
        self.grades.get(user).copied().unwrap_or(0)
    }

    /// `user\tgrade` lines.
    pub fn from_tsv(src: &str) -> Result<Self> {
        let mut grades = BTreeMap::new();
        for (i, line) in src.lines().enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let ctx = || format!("labels line {}", i + 1);
            let (u, g) = line
                .split_once('\t')
                .ok_or_else(|| Error::parse(ctx(), "expected `user\\tgrade`"))?;
            let g: u32 = g
                .trim()
                .parse()
                .map_err(|_| Error::parse(ctx(), "grade must be a non-negative integer"))?;
            let u = UserId::new(u).map_err(|e| Error::parse(ctx(), e.to_string()))?;
            if grades.insert(u, g).is_some() {
                return Err(Error::parse(ctx(), "duplicate user"));
            }
        }
        Ok(RelevanceLabels { grades })
    }
}

/// Average precision at `cutoff` with binary relevance (grade > 0),
/// normalized by `min(total relevant, cutoff)`.
pub fn mean_average_precision(ranked: &RankedList, labels: &RelevanceLabels, cutoff: usize) -> Result<f64> {
    if cutoff == 0 {
        return Err(Error::InvalidParameter("cutoff must be >= 1".into()));
    }
    let total_relevant = labels.grades.values().filter(|&&g| g > 0).count();
    if total_relevant == 0 {
        return Err(Error::NoRelevantUsers);
    }
    let positions: Vec<u64> = ranked
        .users()
        .take(cutoff)
        .enumerate()
        .filter(|(_, u)| labels.grade(u.as_str()) > 0)
        .map(|(i, _)| i as u64 + 1)
        .collect();
    let denom = total_relevant.min(cutoff) as u64;
    Ok(exact_average_precision(&positions, denom).unwrap_or_else(|| {
        let sum: f64 = positions
            .iter()
            .enumerate()
            .map(|(j, &p)| (j + 1) as f64 / p as f64)
            .sum();
        sum / denom as f64
    }))
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// `(sum over j of j / positions[j-1]) / denom` as a rational, rounded once
/// at the end. `None` if the intermediate values overflow.
fn exact_average_precision(positions: &[u64], denom: u64) -> Option<f64> {
    let (mut num, mut den) = (0u128, 1u128);
    for (j, &p) in positions.iter().enumerate() {
        let (a, b) = (j as u128 + 1, p as u128);
        let g = gcd(den, b);
        let lcm = den.checked_mul(b / g)?;
        num = num.checked_mul(lcm / den)?.checked_add(a.checked_mul(lcm / b)?)?;
        den = lcm;
        let g = gcd(num, den);
        if g > 1 {
            num /= g;
            den /= g;
        }
    }
    let den = den.checked_mul(denom as u128)?;
    let g = gcd(num, den).max(1);
    let (num, den) = (num / g, den / g);
    // both exactly representable, so the division rounds once
    const EXACT: u128 = 1 << 53;
    (num <= EXACT && den <= EXACT).then(|| num as f64 / den as f64)
}

fn dcg(gains: impl Iterator<Item = u32>) -> f64 {
    gains.enumerate().map(|(i, g)| g as f64 / ((i + 2) as f64).log2()).sum()
}

/// NDCG at `cutoff` with linear gain and `1 / log2(position + 1)` discount.
pub fn ndcg(ranked: &RankedList, labels: &RelevanceLabels, cutoff: usize) -> Result<f64> {
    if cutoff == 0 {
        return Err(Error::InvalidParameter("cutoff must be >= 1".into()));
    }
    let mut ideal: Vec<u32> = labels.grades.values().copied().filter(|&g| g > 0).collect();
    ideal.sort_unstable_by(|a, b| b.cmp(a));
    let idcg = dcg(ideal.into_iter().take(cutoff));
    if idcg == 0.0 {
        return Err(Error::NoRelevantUsers);
    }
    let actual = dcg(ranked.users().take(cutoff).map(|u| labels.grade(u.as_str())));
    Ok((actual / idcg).min(1.0))
}

/// Shared inputs for the correlation analyses.
#[derive(Debug, Clone, Copy)]
pub struct EvalContext<'a> {
    pub log: &'a GroupActivityLog,
    pub table: &'a RelatednessTable,
    pub pipeline: &'a TextPipeline,
    pub weights: &'a ReactionWeights,
    pub alpha: f64,
    pub authority: &'a AuthorityParams,
    /// Correlate rank positions instead of raw values.
    pub rank_based: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationRow {
    pub method: Method,
    pub k: usize,
    /// `None` when the correlation is undefined (zero variance or < 2 users).
    pub votes: Option<f64>,
    pub topical_votes: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationReport {
    pub rows: Vec<CorrelationRow>,
}

fn fmt_cell(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), |x| x.to_string())
}

impl CorrelationReport {
    /// `method\tk\tvotes\ttopical_votes`; undefined cells print `NA`.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("method\tk\tvotes\ttopical_votes\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}",
                r.method,
                r.k,
                fmt_cell(r.votes),
                fmt_cell(r.topical_votes)
            );
        }
        out
    }
}

fn correlate(ctx: &EvalContext<'_>, ranked: &RankedList, baseline: &VoteVector) -> Option<f64> {
    let x: Vec<f64> = ranked.entries.iter().map(|(_, s)| *s).collect();
    let y: Vec<f64> = ranked.users().map(|u| baseline.get(u.as_str())).collect();
    let r = if ctx.rank_based {
        spearman(&x, &y)
    } else {
        pearson(&x, &y)
    };
    match r {
        Ok(v) => Some(v),
        Err(Error::ZeroVariance) | Err(Error::InvalidParameter(_)) => None,
        Err(e) => unreachable!("equal-length series: {e}"),
    }
}

/// Correlation of precomputed method scores with both baselines over each
/// method's own top-k users.
pub fn correlation_table(
    ctx: &EvalContext<'_>,
    scores: &[ScoreVector],
    votes: &VoteVector,
    topical: &VoteVector,
    k_values: &[usize],
) -> CorrelationReport {
    let mut rows = Vec::new();
    for s in scores {
        for &k in k_values {
            let ranked = top_k(s, k);
            rows.push(CorrelationRow {
                method: s.method,
                k,
                votes: correlate(ctx, &ranked, votes),
                topical_votes: correlate(ctx, &ranked, topical),
            });
        }
    }
    CorrelationReport { rows }
}

/// Correlation between each method's top-k scores and the vote baselines.
pub fn correlation_report(
    ctx: &EvalContext<'_>,
    graph: &InteractionGraph,
    topic: &TopicQuery,
    methods: &[Method],
    k_values: &[usize],
) -> Result<CorrelationReport> {
    let v = votes(ctx.log, ctx.weights);
    let tv = topical_votes(ctx.log, topic, ctx.table, ctx.pipeline, ctx.weights);
    let scores = methods
        .iter()
        .map(|&m| compute_scores(m, graph, ctx.log, ctx.authority))
        .collect::<Result<Vec<_>>>()?;
    Ok(correlation_table(ctx, &scores, &v, &tv, k_values))
}

/// Mean similarity between the words of two topics.
pub fn topic_mutual_information(table: &RelatednessTable, a: &TopicQuery, b: &TopicQuery) -> f64 {
    let mut sum = 0.0;
    for x in a.words() {
        for y in b.words() {
            sum += table.similarity(x, y);
        }
    }
    sum / (a.words().len() * b.words().len()) as f64
}

#[derive(Debug, Clone, PartialEq)]
pub struct TopicCorrelation {
    pub topic: TopicQuery,
    pub mi_to_group_topic: f64,
    pub correlation: Option<f64>,
}

/// For every topic: its mean MI to the group topic, and the correlation of
/// `method`'s top-k scores on that topic's graph with that topic's votes.
/// Sorted by MI descending, ties by topic label.
pub fn topic_mi_vs_correlation(
    ctx: &EvalContext<'_>,
    group_topic: &TopicQuery,
    topics: &[TopicQuery],
    method: Method,
    k: usize,
) -> Result<Vec<TopicCorrelation>> {
    let mut out = Vec::with_capacity(topics.len());
    for topic in topics {
        let scorer = TopicScorer::new(topic, ctx.table, ctx.pipeline, ctx.alpha)?;
        let graph = build_interaction_graph(ctx.log, &scorer, ctx.weights);
        let scores = compute_scores(method, &graph, ctx.log, ctx.authority)?;
        let ranked = top_k(&scores, k);
        let tv = topical_votes(ctx.log, topic, ctx.table, ctx.pipeline, ctx.weights);
        out.push(TopicCorrelation {
            topic: topic.clone(),
            mi_to_group_topic: topic_mutual_information(ctx.table, topic, group_topic),
            correlation: correlate(ctx, &ranked, &tv),
        });
    }
    out.sort_by(|a, b| {
        b.mi_to_group_topic
            .total_cmp(&a.mi_to_group_topic)
            .then_with(|| a.topic.label().cmp(&b.topic.label()))
    });
    Ok(out)
}

pub fn topic_correlations_to_tsv(rows: &[TopicCorrelation]) -> String {
    let mut out = String::from("topic\tmi\tcorrelation\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{}\t{}\t{}",
            r.topic.label(),
            r.mi_to_group_topic,
            fmt_cell(r.correlation)
        );
    }
    out
}
