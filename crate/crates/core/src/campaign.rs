//! Influencer selection, reinforced campaign plans, coverage and timing.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt::Write as _;

use chrono::{DateTime, Datelike};

use crate::authority::{compute_scores, top_k, AuthorityParams, Method, RankedList, ScoreVector};
use crate::error::{Error, Result};
use crate::graph::InteractionGraph;
use crate::ingest::{GroupActivityLog, UserId};
use crate::structure::{weakly_connected_components, SubGroup};
use crate::text::TextPipeline;

pub const DEFAULT_K: usize = 20;
pub const DEFAULT_R: usize = 3;
pub const DEFAULT_TH: usize = 50;

/// Run `method` and keep its top `k` users.
pub fn select_influencers(
    graph: &InteractionGraph,
    log: &GroupActivityLog,
    method: Method,
    k: usize,
    params: &AuthorityParams,
) -> Result<RankedList> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be >= 1".into()));
    }
    let scores = compute_scores(method, graph, log, params)?;
    Ok(top_k(&scores, k))
}

/// Budget `k`, reinforcement level `r` and minimum sub-group size `th`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReinforcementParams {
    pub k: usize,
    pub r: usize,
    pub th: usize,
}

impl Default for ReinforcementParams {
    fn default() -> Self {
        ReinforcementParams {
            k: DEFAULT_K,
            r: DEFAULT_R,
            th: DEFAULT_TH,
        }
    }
}

impl ReinforcementParams {
    pub fn new(k: usize, r: usize, th: usize) -> Result<Self> {
        if r == 0 || r > k {
            return Err(Error::InvalidParameter(format!("need k >= r >= 1, got k={k}, r={r}")));
        }
        if th == 0 {
            return Err(Error::InvalidParameter("th must be >= 1".into()));
        }
        Ok(ReinforcementParams { k, r, th })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Assignee {
    pub user: UserId,
    pub score: f64,
    /// Position in the global ranking when within the global top-k.
    pub global_rank: Option<usize>,
}

impl Assignee {
    pub fn below_global_top_k(&self) -> bool {
        self.global_rank.is_none()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SkipReason {
    BelowThreshold,
    BudgetExhausted,
}

impl SkipReason {
    pub fn describe(self) -> &'static str {
        match self {
            SkipReason::BelowThreshold => "below threshold",
            SkipReason::BudgetExhausted => "budget exhausted",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CampaignPlan {
    pub params: ReinforcementParams,
    pub global_topk: RankedList,
    /// Targeted sub-groups in size order with their influencers.
    pub assignments: Vec<(SubGroup, Vec<Assignee>)>,
    pub skipped: Vec<(SubGroup, SkipReason)>,
    /// Fraction of members influenced by the assigned users.
    pub coverage: f64,
    pub recommended_months: Vec<u32>,
}

impl CampaignPlan {
    pub fn assigned_users(&self) -> BTreeSet<UserId> {
        self.assignments
            .iter()
            .flat_map(|(_, a)| a.iter().map(|x| x.user.clone()))
            .collect()
    }

    /// Structured text report: ranking, per-sub-group table, skipped list,
    /// coverage and months.
    pub fn to_report(&self) -> String {
        let mut out = String::new();
        let p = self.params;
        let _ = writeln!(out, "# campaign\tk={}\tr={}\tth={}", p.k, p.r, p.th);
        let _ = writeln!(out, "[global_topk]\nrank\tuser\tscore");
        for (i, (u, s)) in self.global_topk.entries.iter().enumerate() {
            let _ = writeln!(out, "{}\t{u}\t{s}", i + 1);
        }
        let _ = writeln!(out, "[assignments]\nsubgroup\tsize\tuser\tscore\tglobal_rank");
        for (g, assignees) in &self.assignments {
            for a in assignees {
                let rank = a
                    .global_rank
                    .map_or_else(|| "below-global-top-k".to_string(), |r| r.to_string());
                let _ = writeln!(out, "{}\t{}\t{}\t{}\t{rank}", g.label(), g.size(), a.user, a.score);
            }
        }
        let _ = writeln!(out, "[skipped]\nsubgroup\tsize\treason");
        for (g, reason) in &self.skipped {
            let _ = writeln!(out, "{}\t{}\t{}", g.label(), g.size(), reason.describe());
        }
        let _ = writeln!(out, "[coverage]\n{}", self.coverage);
        let months: Vec<String> = self.recommended_months.iter().map(u32::to_string).collect();
        let _ = writeln!(out, "[months]\n{}", months.join("\t"));
        out
    }
}

/// Pick `r` influencers for every weakly connected sub-group of at least
/// `th` members, within a global budget of `k`.
///
/// Inside a sub-group, candidates are ordered by global score (ties by id),
/// so members of the global top-k come first; remaining slots are filled by
/// the sub-group's next best members, flagged as below the global top-k.
/// Sub-groups are served largest first. If the targeted sub-groups need
/// more than `k` influencers the plan is cut where the budget runs out and
/// returned inside [`Error::BudgetInfeasible`].
pub fn reinforced_selection(
    graph: &InteractionGraph,
    scores: &ScoreVector,
    params: &ReinforcementParams,
) -> Result<CampaignPlan> {
    let params = ReinforcementParams::new(params.k, params.r, params.th)?;
    for u in graph.nodes() {
        if scores.get(u.as_str()).is_none() {
            return Err(Error::UnknownUser(u.to_string()));
        }
    }
    let global_topk = top_k(scores, params.k);
    let global_rank: HashMap<&UserId, usize> = global_topk
        .entries
        .iter()
        .enumerate()
        .map(|(i, (u, _))| (u, i + 1))
        .collect();

    let mut assignments = Vec::new();
    let mut skipped = Vec::new();
    let mut remaining = params.k;
    let mut required = 0;
    for group in weakly_connected_components(graph) {
        if group.size() < params.th {
            skipped.push((group, SkipReason::BelowThreshold));
            continue;
        }
        let need = params.r.min(group.size());
        required += need;
        if need > remaining {
            skipped.push((group, SkipReason::BudgetExhausted));
            continue;
        }
        remaining -= need;
        let mut members: Vec<(UserId, f64)> = group
            .members()
            .iter()
            .map(|u| (u.clone(), scores.get(u.as_str()).expect("checked above")))
            .collect();
        members.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        let chosen = members
            .into_iter()
            .take(need)
            .map(|(user, score)| Assignee {
                global_rank: global_rank.get(&user).copied(),
                user,
                score,
            })
            .collect();
        assignments.push((group, chosen));
    }

    let selected: BTreeSet<UserId> = assignments
        .iter()
        .flat_map(|(_, a): &(SubGroup, Vec<Assignee>)| a.iter().map(|x| x.user.clone()))
        .collect();
    let coverage = coverage_estimate(graph, &selected)?;
    let plan = CampaignPlan {
        params,
        global_topk,
        assignments,
        skipped,
        coverage,
        recommended_months: Vec::new(),
    };
    if required > params.k {
        return Err(Error::BudgetInfeasible {
            required,
            budget: params.k,
            partial: Box::new(plan),
        });
    }
    Ok(plan)
}

/// Fraction of members that are selected or reacted to a selected user.
pub fn coverage_estimate(graph: &InteractionGraph, selected: &BTreeSet<UserId>) -> Result<f64> {
    let mut influenced: HashSet<usize> = HashSet::new();
    for u in selected {
        let i = graph
            .index_of(u.as_str())
            .ok_or_else(|| Error::UnknownUser(u.to_string()))?;
        influenced.insert(i);
        influenced.extend(graph.in_edges(i).iter().map(|&(src, _)| src));
    }
    if graph.node_count() == 0 {
        return Ok(0.0);
    }
    Ok(influenced.len() as f64 / graph.node_count() as f64)
}

/// Inclusive 1-based rank range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct RankBand {
    pub first: usize,
    pub last: usize,
}

impl RankBand {
    pub fn new(first: usize, last: usize) -> Result<Self> {
        if first == 0 || last < first {
            return Err(Error::InvalidParameter(format!("bad rank band {first}-{last}")));
        }
        Ok(RankBand { first, last })
    }

    pub fn label(&self) -> String {
        format!("{}-{}", self.first, self.last)
    }

    /// Parse `"1-200,201-500"`.
    pub fn parse_list(src: &str) -> Result<Vec<RankBand>> {
        let bands = src
            .split(',')
            .map(|part| {
                let (a, b) = part
                    .trim()
                    .split_once('-')
                    .ok_or_else(|| Error::InvalidParameter(format!("bad band `{part}`")))?;
                let parse = |s: &str| {
                    s.trim()
                        .parse::<usize>()
                        .map_err(|_| Error::InvalidParameter(format!("bad band `{part}`")))
                };
                RankBand::new(parse(a)?, parse(b)?)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(bands)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileEvent {
    Posts,
    ReactionsReceived,
}

/// Share of a band's events in each calendar month.
#[derive(Debug, Clone, PartialEq)]
pub struct MonthlyProfile {
    pub band: RankBand,
    /// Index 0 is January.
    pub probabilities: [f64; 12],
    pub event_count: usize,
}

impl MonthlyProfile {
    pub fn is_empty(&self) -> bool {
        self.event_count == 0
    }

    pub fn month(&self, month: u32) -> f64 {
        self.probabilities[month as usize - 1]
    }
}

/// Calendar month (1-12, UTC) of a unix timestamp.
pub fn month_of(timestamp: u64) -> u32 {
    DateTime::from_timestamp(timestamp as i64, 0)
        .expect("timestamp within chrono range")
        .month()
}

pub fn monthly_activity_profile(
    log: &GroupActivityLog,
    ranking: &RankedList,
    bands: &[RankBand],
    event: ProfileEvent,
) -> Result<Vec<MonthlyProfile>> {
    let mut sorted = bands.to_vec();
    sorted.sort();
    if sorted.windows(2).any(|w| w[1].first <= w[0].last) {
        return Err(Error::InvalidParameter("rank bands overlap".into()));
    }
    let mut band_of: HashMap<&str, usize> = HashMap::new();
    for (bi, band) in bands.iter().enumerate() {
        for (u, _) in ranking
            .entries
            .iter()
            .skip(band.first - 1)
            .take(band.last + 1 - band.first)
        {
            band_of.insert(u.as_str(), bi);
        }
    }
    let mut counts = vec![[0usize; 12]; bands.len()];
    match event {
        ProfileEvent::Posts => {
            for post in log.posts() {
                if let Some(&b) = band_of.get(post.author.as_str()) {
                    counts[b][month_of(post.timestamp) as usize - 1] += 1;
                }
            }
        }
        ProfileEvent::ReactionsReceived => {
            for r in log.foreign_reactions() {
                if let Some(&b) = band_of.get(log.target_author(r).as_str()) {
                    counts[b][month_of(r.timestamp) as usize - 1] += 1;
                }
            }
        }
    }
    Ok(bands
        .iter()
        .zip(counts)
        .map(|(&band, c)| {
            let total: usize = c.iter().sum();
            let mut probabilities = [0.0; 12];
            if total > 0 {
                for (p, &n) in probabilities.iter_mut().zip(&c) {
                    *p = n as f64 / total as f64;
                }
            } else {
                log::warn!("rank band {} has no events", band.label());
            }
            MonthlyProfile {
                band,
                probabilities,
                event_count: total,
            }
        })
        .collect())
}

/// `band\tmonth\tprobability` lines.
pub fn profiles_to_tsv(profiles: &[MonthlyProfile]) -> String {
    let mut out = String::from("band\tmonth\tprobability\n");
    for p in profiles {
        for (m, prob) in p.probabilities.iter().enumerate() {
            let _ = writeln!(out, "{}\t{}\t{prob}", p.band.label(), m + 1);
        }
    }
    out
}

/// Months by band-averaged probability descending, ties in calendar order.
pub fn best_promotion_window(profiles: &[MonthlyProfile], top_m: usize) -> Result<Vec<u32>> {
    if profiles.is_empty() {
        return Err(Error::InvalidParameter("no profiles".into()));
    }
    let n = profiles.len() as f64;
    let mut months: Vec<(u32, f64)> = (1..=12)
        .map(|m| (m, profiles.iter().map(|p| p.month(m)).sum::<f64>() / n))
        .collect();
    months.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    Ok(months.into_iter().take(top_m).map(|(m, _)| m).collect())
}

/// Most frequent unigrams and adjacent-token bigrams over post texts.
pub fn extract_popular_topics(log: &GroupActivityLog, pipeline: &TextPipeline, top_n: usize) -> Vec<(String, usize)> {
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for post in log.posts() {
        let tokens = pipeline.preprocess(&post.text);
        for t in &tokens {
            *counts.entry(t.clone()).or_insert(0) += 1;
        }
        for w in tokens.windows(2) {
            *counts.entry(format!("{} {}", w[0], w[1])).or_insert(0) += 1;
        }
    }
    let mut out: Vec<(String, usize)> = counts.into_iter().collect();
    out.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    out.truncate(top_n);
    out
}
