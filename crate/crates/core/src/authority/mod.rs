//! Authority measures over the interaction graph and top-k ranking.
//!
//! Every measure returns a [`ScoreVector`] aligned with the graph's node
//! order (ascending user id). Rankings break score ties by user id.

mod centrality;
mod hits;
mod pagerank;
mod zscore;

use std::fmt::{self, Write as _};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::graph::InteractionGraph;
use crate::ingest::{GroupActivityLog, UserId};

pub use centrality::{betweenness, closeness};
pub use hits::{eigenvector_centrality, hits};
pub use pagerank::pagerank;
pub use zscore::zscore;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Method {
    PageRank,
    Hits,
    ZScore,
    Eigenvector,
    Betweenness,
    Closeness,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::PageRank,
        Method::Hits,
        Method::ZScore,
        Method::Eigenvector,
        Method::Betweenness,
        Method::Closeness,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::PageRank => "pagerank",
            Method::Hits => "hits",
            Method::ZScore => "zscore",
            Method::Eigenvector => "eigen",
            Method::Betweenness => "betweenness",
            Method::Closeness => "closeness",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .or(match s {
                "eigenvector" => Some(Method::Eigenvector),
                "z-score" => Some(Method::ZScore),
                _ => None,
            })
            .ok_or_else(|| Error::UnknownMethod(s.to_string()))
    }
}

/// Per-user scores produced by one method.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreVector {
    pub method: Method,
    users: Vec<UserId>,
    scores: Vec<f64>,
}

impl ScoreVector {
    /// `users` must be sorted ascending and unique; scores finite and >= 0
    /// except for z-scores, which may be negative.
    pub fn new(method: Method, users: Vec<UserId>, scores: Vec<f64>) -> Result<Self> {
        if users.len() != scores.len() {
            return Err(Error::LengthMismatch(users.len(), scores.len()));
        }
        if users.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter("score users must be sorted and unique".into()));
        }
        if let Some(s) = scores.iter().find(|s| !s.is_finite()) {
            return Err(Error::InvalidParameter(format!("non-finite score {s}")));
        }
        Ok(ScoreVector { method, users, scores })
    }

    pub(crate) fn for_graph(method: Method, graph: &InteractionGraph, scores: Vec<f64>) -> Self {
        debug_assert!(scores.iter().all(|s| s.is_finite()));
        ScoreVector {
            method,
            users: graph.nodes().to_vec(),
            scores,
        }
    }

    pub fn users(&self) -> &[UserId] {
        &self.users
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn len(&self) -> usize {
        self.users.len()
    }

    pub fn is_empty(&self) -> bool {
        self.users.is_empty()
    }

    pub fn get(&self, user: &str) -> Option<f64> {
        self.users
            .binary_search_by(|u| u.as_str().cmp(user))
            .ok()
            .map(|i| self.scores[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = (&UserId, f64)> {
        self.users.iter().zip(self.scores.iter().copied())
    }
}

/// Users in descending score order, ties by ascending id.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedList {
    pub method: Method,
    pub entries: Vec<(UserId, f64)>,
}

impl RankedList {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn users(&self) -> impl Iterator<Item = &UserId> {
        self.entries.iter().map(|(u, _)| u)
    }

    /// 1-based rank of `user`.
    pub fn rank_of(&self, user: &str) -> Option<usize> {
        self.entries.iter().position(|(u, _)| u.as_str() == user).map(|i| i + 1)
    }

    /// `user\tscore\trank` lines sorted by rank.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for (i, (u, s)) in self.entries.iter().enumerate() {
            let _ = writeln!(out, "{u}\t{s}\t{}", i + 1);
        }
        out
    }

    pub fn from_tsv(method: Method, src: &str) -> Result<Self> {
        let mut entries = Vec::new();
        for (i, line) in src.lines().enumerate() {
            if line.is_empty() {
                continue;
            }
            let ctx = || format!("scores line {}", i + 1);
            let f: Vec<&str> = line.split('\t').collect();
            let [u, s, r] = f[..] else {
                return Err(Error::parse(ctx(), "expected `user\\tscore\\trank`"));
            };
            let score: f64 = s.parse().map_err(|_| Error::parse(ctx(), "bad score"))?;
            let rank: usize = r.parse().map_err(|_| Error::parse(ctx(), "bad rank"))?;
            if rank != entries.len() + 1 {
                return Err(Error::parse(ctx(), format!("expected rank {}", entries.len() + 1)));
            }
            entries.push((UserId::new(u).map_err(|e| Error::parse(ctx(), e.to_string()))?, score));
        }
        Ok(RankedList { method, entries })
    }
}

fn rank_order(a: &(UserId, f64), b: &(UserId, f64)) -> std::cmp::Ordering {
    b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0))
}

/// Top `k` users; all users when `k` exceeds the vector length.
pub fn top_k(scores: &ScoreVector, k: usize) -> RankedList {
    let mut entries: Vec<(UserId, f64)> = scores.iter().map(|(u, s)| (u.clone(), s)).collect();
    if k < entries.len() {
        entries.select_nth_unstable_by(k, rank_order);
        entries.truncate(k);
    }
    entries.sort_by(rank_order);
    RankedList {
        method: scores.method,
        entries,
    }
}

/// Damping, L1 tolerance and iteration cap for PageRank.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerIterationParams {
    pub damping: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for PowerIterationParams {
    fn default() -> Self {
        PowerIterationParams {
            damping: 0.85,
            tol: 1e-10,
            max_iter: 200,
        }
    }
}

impl PowerIterationParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.damping > 0.0 && self.damping < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "damping must be in (0,1), got {}",
                self.damping
            )));
        }
        IterParams {
            tol: self.tol,
            max_iter: self.max_iter,
        }
        .validate()
    }
}

/// Tolerance and iteration cap for HITS and eigenvector centrality.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterParams {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for IterParams {
    fn default() -> Self {
        IterParams {
            tol: 1e-10,
            max_iter: 1000,
        }
    }
}

impl IterParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::InvalidParameter(format!("tol must be > 0, got {}", self.tol)));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidParameter("max_iter must be >= 1".into()));
        }
        Ok(())
    }
}

/// Outcome of an iterative method. Scores are returned even when the
/// iteration cap is hit; [`Convergence::check`] turns that into an error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Convergence {
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
}

impl Convergence {
    pub fn check(&self, method: Method) -> Result<()> {
        if self.converged {
            Ok(())
        } else {
            Err(Error::NonConvergence {
                method: method.name().to_string(),
                iterations: self.iterations,
                residual: self.residual,
            })
        }
    }
}

/// Parameters for every measure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuthorityParams {
    pub pagerank: PowerIterationParams,
    pub iterative: IterParams,
    /// Path lengths are `1 / weight` when set, hop counts otherwise.
    pub use_weights: bool,
}

impl Default for AuthorityParams {
    fn default() -> Self {
        AuthorityParams {
            pagerank: PowerIterationParams::default(),
            iterative: IterParams::default(),
            use_weights: true,
        }
    }
}

/// Run `method`. Z-score reads the log; the rest read the graph.
///
/// Non-convergence of an iterative method is logged and its last iterate
/// is returned.
pub fn compute_scores(
    method: Method,
    graph: &InteractionGraph,
    log: &GroupActivityLog,
    params: &AuthorityParams,
) -> Result<ScoreVector> {
    let report = |v: ScoreVector, c: Convergence| {
        if let Err(e) = c.check(method) {
            log::warn!("{e}");
        }
        v
    };
    Ok(match method {
        Method::PageRank => {
            let (v, c) = pagerank(graph, &params.pagerank)?;
            report(v, c)
        }
        Method::Hits => {
            let (_, auth, c) = hits(graph, &params.iterative)?;
            report(auth, c)
        }
        Method::Eigenvector => {
            let (v, c) = eigenvector_centrality(graph, &params.iterative)?;
            report(v, c)
        }
        Method::Betweenness => betweenness(graph, params.use_weights),
        Method::Closeness => closeness(graph, params.use_weights),
        Method::ZScore => zscore(log),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sv(pairs: &[(&str, f64)]) -> ScoreVector {
        let mut p: Vec<_> = pairs.to_vec();
        p.sort_by(|a, b| a.0.cmp(b.0));
        ScoreVector::new(
            Method::PageRank,
            p.iter().map(|(u, _)| UserId::new(*u).unwrap()).collect(),
            p.iter().map(|(_, s)| *s).collect(),
        )
        .unwrap()
    }

    #[test]
    fn tie_break_by_id() {
        let v = sv(&[("c", 1.0), ("a", 1.0), ("b", 1.0)]);
        let r = top_k(&v, 2);
        let ids: Vec<_> = r.users().map(UserId::as_str).collect();
        assert_eq!(ids, ["a", "b"]);
    }

    #[test]
    fn k_larger_than_n() {
        let v = sv(&[("a", 0.1), ("b", 0.7), ("c", 0.2)]);
        let r = top_k(&v, 10);
        let ids: Vec<_> = r.users().map(UserId::as_str).collect();
        assert_eq!(ids, ["b", "c", "a"]);
        assert_eq!(r.rank_of("a"), Some(3));
    }

    #[test]
    fn method_names_roundtrip() {
        for m in Method::ALL {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
        }
        assert!(matches!("degree".parse::<Method>(), Err(Error::UnknownMethod(_))));
    }

    #[test]
    fn score_tsv() {
        let r = top_k(&sv(&[("a", 0.25), ("b", 0.75)]), 5);
        let text = r.to_tsv();
        assert_eq!(text, "b\t0.75\t1\na\t0.25\t2\n");
        assert_eq!(RankedList::from_tsv(Method::PageRank, &text).unwrap(), r);
        assert!(RankedList::from_tsv(Method::PageRank, "a\t1\t2\n").is_err());
    }

    #[test]
    fn score_vector_validation() {
        let u = |s: &str| UserId::new(s).unwrap();
        assert!(ScoreVector::new(Method::Hits, vec![u("b"), u("a")], vec![1.0, 1.0]).is_err());
        assert!(ScoreVector::new(Method::Hits, vec![u("a")], vec![f64::NAN]).is_err());
        assert!(ScoreVector::new(Method::Hits, vec![u("a")], vec![]).is_err());
    }

    #[test]
    fn params_validation() {
        let mut p = PowerIterationParams::default();
        assert!(p.validate().is_ok());
        p.damping = 1.0;
        assert!(p.validate().is_err());
        assert!(IterParams { tol: 0.0, max_iter: 5 }.validate().is_err());
        assert!(IterParams { tol: 1e-3, max_iter: 0 }.validate().is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn top_k_matches_full_sort(scores in prop::collection::vec(0u8..5, 1..40), k in 1usize..50) {
                let users: Vec<UserId> = (0..scores.len()).map(|i| UserId::new(format!("u{i:02}")).unwrap()).collect();
                let v = ScoreVector::new(Method::PageRank, users.clone(), scores.iter().map(|&s| s as f64).collect()).unwrap();
                let mut naive: Vec<(UserId, f64)> = users.into_iter().zip(scores.iter().map(|&s| s as f64)).collect();
                naive.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
                naive.truncate(k);
                prop_assert_eq!(top_k(&v, k).entries, naive);
            }
        }
    }
}
