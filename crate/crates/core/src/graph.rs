//! Topic-sensitive social interaction graph.
//!
//! A reaction by `a` on content authored by `b` (with `a != b`) adds
//! `weight(kind) * boost(target)` to the directed edge `a -> b`, where the
//! target is the reacted post (like, share, comment) or the reacted comment
//! (like on comment). Parallel reactions accumulate by summation.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::ingest::{GroupActivityLog, ReactionKind, UserId};
use crate::relevance::TopicScorer;

/// Base weight per reaction type.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReactionWeights {
    pub like_on_comment: f64,
    pub like: f64,
    pub comment: f64,
    pub share: f64,
}

impl Default for ReactionWeights {
    fn default() -> Self {
        ReactionWeights {
            like_on_comment: 1.0,
            like: 2.0,
            comment: 4.0,
            share: 8.0,
        }
    }
}

impl ReactionWeights {
    pub fn new(like_on_comment: f64, like: f64, comment: f64, share: f64) -> Result<Self> {
        let w = ReactionWeights {
            like_on_comment,
            like,
            comment,
            share,
        };
        for k in ReactionKind::ALL {
            let v = w.get(k);
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "weight for {} must be positive, got {v}",
                    k.name()
                )));
            }
        }
        Ok(w)
    }

    pub fn get(&self, kind: ReactionKind) -> f64 {
        match kind {
            ReactionKind::LikeOnComment => self.like_on_comment,
            ReactionKind::Like => self.like,
            ReactionKind::CommentReaction => self.comment,
            ReactionKind::Share => self.share,
        }
    }
}

/// Weighted directed simple graph over group members.
///
/// Nodes are indexed in ascending id order. Adjacency lists are sorted by
/// neighbor index.
#[derive(Debug, Clone, PartialEq)]
pub struct InteractionGraph {
    nodes: Vec<UserId>,
    index: HashMap<UserId, usize>,
    out_adj: Vec<Vec<(usize, f64)>>,
    in_adj: Vec<Vec<(usize, f64)>>,
}

impl InteractionGraph {
    /// Build from a node set and weighted edges; duplicate edges are summed.
    pub fn from_edges<N, E>(nodes: N, edges: E) -> Result<Self>
    where
        N: IntoIterator<Item = UserId>,
        E: IntoIterator<Item = (UserId, UserId, f64)>,
    {
        let mut nodes: Vec<UserId> = nodes.into_iter().collect();
        let mut acc: BTreeMap<(UserId, UserId), Vec<f64>> = BTreeMap::new();
        for (s, d, w) in edges {
            if s == d {
                return Err(Error::InvalidParameter(format!("self-loop on `{s}`")));
            }
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "edge {s} -> {d} weight must be positive, got {w}"
                )));
            }
            acc.entry((s, d)).or_default().push(w);
        }
        for (s, d) in acc.keys() {
            nodes.push(s.clone());
            nodes.push(d.clone());
        }
        nodes.sort();
        nodes.dedup();
        let index: HashMap<UserId, usize> = nodes.iter().enumerate().map(|(i, u)| (u.clone(), i)).collect();
        let edges = acc
            .into_iter()
            .map(|((s, d), ws)| (index[&s], index[&d], sum_sorted(ws)))
            .collect::<Vec<_>>();
        Ok(Self::assemble(nodes, index, edges))
    }

    fn assemble<E>(nodes: Vec<UserId>, index: HashMap<UserId, usize>, edges: E) -> Self
    where
        E: IntoIterator<Item = (usize, usize, f64)>,
    {
        let n = nodes.len();
        let mut out_adj = vec![Vec::new(); n];
        let mut in_adj = vec![Vec::new(); n];
        for (s, d, w) in edges {
            out_adj[s].push((d, w));
            in_adj[d].push((s, w));
        }
        for list in out_adj.iter_mut().chain(in_adj.iter_mut()) {
            list.sort_by_key(|&(v, _)| v);
        }
        InteractionGraph {
            nodes,
            index,
            out_adj,
            in_adj,
        }
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.out_adj.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[UserId] {
        &self.nodes
    }

    pub fn node(&self, i: usize) -> &UserId {
        &self.nodes[i]
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn out_edges(&self, u: usize) -> &[(usize, f64)] {
        &self.out_adj[u]
    }

    pub fn in_edges(&self, v: usize) -> &[(usize, f64)] {
        &self.in_adj[v]
    }

    pub fn weight(&self, u: usize, v: usize) -> Option<f64> {
        let list = &self.out_adj[u];
        list.binary_search_by_key(&v, |&(t, _)| t).ok().map(|i| list[i].1)
    }

    /// All edges `(src, dst, weight)` sorted by `(src, dst)`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.out_adj
            .iter()
            .enumerate()
            .flat_map(|(s, list)| list.iter().map(move |&(d, w)| (s, d, w)))
    }

    pub fn total_weight(&self) -> f64 {
        self.edges().map(|(_, _, w)| w).sum()
    }

    /// Same topology with every weight multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !(factor.is_finite() && factor > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "scale factor must be positive, got {factor}"
            )));
        }
        let edges: Vec<_> = self.edges().map(|(s, d, w)| (s, d, w * factor)).collect();
        Ok(Self::assemble(self.nodes.clone(), self.index.clone(), edges))
    }
}

// Summing in sorted order makes the result independent of input order.
fn sum_sorted(mut ws: Vec<f64>) -> f64 {
    ws.sort_by(f64::total_cmp);
    ws.into_iter().sum()
}

/// Build the interaction graph of `log` for the scorer's topic.
///
/// Every log user becomes a node, including members without interactions.
/// Self-reactions are dropped.
pub fn build_interaction_graph(
    log: &GroupActivityLog,
    scorer: &TopicScorer<'_>,
    weights: &ReactionWeights,
) -> InteractionGraph {
    let nodes: Vec<UserId> = log.users().iter().cloned().collect();
    let index: HashMap<UserId, usize> = nodes.iter().enumerate().map(|(i, u)| (u.clone(), i)).collect();
    let content_pos: HashMap<&str, usize> = log
        .contents()
        .iter()
        .enumerate()
        .map(|(i, c)| (c.content_id.as_str(), i))
        .collect();
    let boosts = scorer.score_contents(log);

    let mut contributions: Vec<((usize, usize), f64)> = log
        .reactions()
        .par_iter()
        .filter_map(|r| {
            let ci = content_pos[r.target.as_str()];
            let author = &log.contents()[ci].author;
            if author == &r.reactor {
                return None;
            }
            let w = weights.get(r.kind) * boosts[ci].1;
            Some(((index[&r.reactor], index[author]), w))
        })
        .collect();
    contributions.par_sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));

    let mut edges: Vec<(usize, usize, f64)> = Vec::new();
    for ((s, d), w) in contributions {
        match edges.last_mut() {
            Some((ls, ld, acc)) if (*ls, *ld) == (s, d) => *acc += w,
            _ => edges.push((s, d, w)),
        }
    }
    InteractionGraph::assemble(nodes, index, edges)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DegreeMode {
    In,
    Out,
    Total,
}

impl FromStr for DegreeMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "in" => Ok(DegreeMode::In),
            "out" => Ok(DegreeMode::Out),
            "total" => Ok(DegreeMode::Total),
            other => Err(Error::InvalidParameter(format!("unknown degree mode `{other}`"))),
        }
    }
}

/// Degree histogram with complementary cumulative fractions.
#[derive(Debug, Clone, PartialEq)]
pub struct DegreeHistogram {
    pub mode: DegreeMode,
    /// degree -> number of users
    pub buckets: BTreeMap<usize, usize>,
    /// degree -> fraction of users with degree >= that degree
    pub ccdf: BTreeMap<usize, f64>,
}

impl DegreeHistogram {
    /// `degree\tcount\tccdf` lines.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("degree\tcount\tccdf\n");
        for (d, c) in &self.buckets {
            let _ = writeln!(out, "{d}\t{c}\t{}", self.ccdf[d]);
        }
        out
    }

    /// Least-squares slope of ln(ccdf) against ln(degree) over degrees
    /// `>= min_degree`. `None` with fewer than two points.
    pub fn ccdf_tail_slope(&self, min_degree: usize) -> Option<f64> {
        let pts: Vec<(f64, f64)> = self
            .ccdf
            .range(min_degree.max(1)..)
            .map(|(&d, &c)| ((d as f64).ln(), c.ln()))
            .collect();
        if pts.len() < 2 {
            return None;
        }
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        (sxx > 0.0).then(|| sxy / sxx)
    }
}

/// Histogram of edge-endpoint degrees; weights are ignored.
pub fn degree_distribution(graph: &InteractionGraph, mode: DegreeMode) -> DegreeHistogram {
    let mut buckets: BTreeMap<usize, usize> = BTreeMap::new();
    for u in 0..graph.node_count() {
        let d = match mode {
            DegreeMode::In => graph.in_edges(u).len(),
            DegreeMode::Out => graph.out_edges(u).len(),
            DegreeMode::Total => graph.in_edges(u).len() + graph.out_edges(u).len(),
        };
        *buckets.entry(d).or_insert(0) += 1;
    }
    let n = graph.node_count() as f64;
    let mut ccdf = BTreeMap::new();
    let mut at_least = graph.node_count();
    for (&d, &c) in &buckets {
        ccdf.insert(d, at_least as f64 / n);
        at_least -= c;
    }
    DegreeHistogram { mode, buckets, ccdf }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    EdgeList,
    Dot,
}

impl FromStr for ExportFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "edge-list" | "edgelist" | "tsv" => Ok(ExportFormat::EdgeList),
            "dot" => Ok(ExportFormat::Dot),
            other => Err(Error::UnsupportedFormat(other.to_string())),
        }
    }
}

/// Render the graph deterministically.
///
/// The edge list is:
///
/// ```text
/// nodes<TAB>N
/// <id>            (N lines, ascending)
/// edges<TAB>M
/// <src><TAB><dst><TAB><weight>   (M lines, ascending by src, dst)
/// ```
pub fn export_graph(graph: &InteractionGraph, format: ExportFormat) -> String {
    let mut out = String::new();
    match format {
        ExportFormat::EdgeList => {
            let _ = writeln!(out, "nodes\t{}", graph.node_count());
            for u in graph.nodes() {
                let _ = writeln!(out, "{u}");
            }
            let _ = writeln!(out, "edges\t{}", graph.edge_count());
            for (s, d, w) in graph.edges() {
                let _ = writeln!(out, "{}\t{}\t{w}", graph.node(s), graph.node(d));
            }
        }
        ExportFormat::Dot => {
            out.push_str("digraph interactions {\n");
            for u in graph.nodes() {
                let _ = writeln!(out, "  \"{u}\";");
            }
            for (s, d, w) in graph.edges() {
                let _ = writeln!(out, "  \"{}\" -> \"{}\" [weight={w}];", graph.node(s), graph.node(d));
            }
            out.push_str("}\n");
        }
    }
    out
}

/// Parse the edge-list format written by [`export_graph`].
pub fn parse_edge_list(src: &str) -> Result<InteractionGraph> {
    let mut lines = src.lines().enumerate();
    let ctx = |i: usize| format!("edge list line {}", i + 1);
    let mut header = |name: &str| -> Result<usize> {
        let (i, line) = lines
            .next()
            .ok_or_else(|| Error::parse("edge list", format!("missing `{name}` header")))?;
        let count = line
            .strip_prefix(name)
            .and_then(|r| r.strip_prefix('\t'))
            .ok_or_else(|| Error::parse(ctx(i), format!("expected `{name}\\t<count>`")))?;
        count.parse().map_err(|_| Error::parse(ctx(i), "bad count"))
    };
    let n_nodes = header("nodes")?;
    let mut nodes = Vec::with_capacity(n_nodes);
    for _ in 0..n_nodes {
        let (i, line) = lines
            .next()
            .ok_or_else(|| Error::parse("edge list", "truncated node section"))?;
        nodes.push(UserId::new(line).map_err(|e| Error::parse(ctx(i), e.to_string()))?);
    }
    let (i, line) = lines
        .next()
        .ok_or_else(|| Error::parse("edge list", "missing `edges` header"))?;
    let n_edges: usize = line
        .strip_prefix("edges\t")
        .and_then(|c| c.parse().ok())
        .ok_or_else(|| Error::parse(ctx(i), "expected `edges\\t<count>`"))?;
    let mut edges = Vec::with_capacity(n_edges);
    for (i, line) in lines.by_ref() {
        if line.is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split('\t').collect();
        let [s, d, w] = f[..] else {
            return Err(Error::parse(ctx(i), "expected `src\\tdst\\tweight`"));
        };
        let w: f64 = w.parse().map_err(|_| Error::parse(ctx(i), "bad weight"))?;
        let s = UserId::new(s).map_err(|e| Error::parse(ctx(i), e.to_string()))?;
        let d = UserId::new(d).map_err(|e| Error::parse(ctx(i), e.to_string()))?;
        edges.push((s, d, w));
    }
    if edges.len() != n_edges {
        return Err(Error::parse(
            "edge list",
            format!("header declares {n_edges} edges, found {}", edges.len()),
        ));
    }
    let declared = nodes.len();
    let g = InteractionGraph::from_edges(nodes, edges)?;
    if g.node_count() != declared {
        return Err(Error::parse("edge list", "edge endpoint missing from node section"));
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::parse_activity_log_str;
    use crate::relevance::{RelatednessTable, TopicQuery};
    use crate::text::TextPipeline;
    use std::collections::BTreeSet;

    fn uid(s: &str) -> UserId {
        UserId::new(s).unwrap()
    }

    pub(crate) fn graph(n: &[&str], e: &[(&str, &str, f64)]) -> InteractionGraph {
        InteractionGraph::from_edges(n.iter().map(|s| uid(s)), e.iter().map(|&(a, b, w)| (uid(a), uid(b), w))).unwrap()
    }

    struct Fixture {
        topic: TopicQuery,
        table: RelatednessTable,
        pipeline: TextPipeline,
    }

    impl Fixture {
        fn new() -> Self {
            let table =
                RelatednessTable::from_pairs(vec![("databas".into(), "sql".into(), 0.5)], BTreeSet::new()).unwrap();
            Fixture {
                topic: TopicQuery::new(["databas"]).unwrap(),
                table,
                pipeline: TextPipeline::default(),
            }
        }

        fn scorer(&self, alpha: f64) -> TopicScorer<'_> {
            TopicScorer::new(&self.topic, &self.table, &self.pipeline, alpha).unwrap()
        }
    }

    #[test]
    fn single_like_irrelevant() {
        let log = parse_activity_log_str(
            r#"{"type":"post","id":"p1","author":"u1","text":"java web","timestamp":1}
{"type":"like","user":"u2","target":"p1","timestamp":2}"#,
        )
        .unwrap();
        let f = Fixture::new();
        let g = build_interaction_graph(&log, &f.scorer(20.0), &ReactionWeights::default());
        assert_eq!(g.edge_count(), 1);
        assert_eq!(
            g.weight(g.index_of("u2").unwrap(), g.index_of("u1").unwrap()),
            Some(2.0)
        );
    }

    #[test]
    fn self_reaction_dropped() {
        let log = parse_activity_log_str(
            r#"{"type":"post","id":"p1","author":"u1","text":"x","timestamp":1}
{"type":"like","user":"u1","target":"p1","timestamp":2}
{"type":"user","id":"u5"}"#,
        )
        .unwrap();
        let f = Fixture::new();
        let g = build_interaction_graph(&log, &f.scorer(20.0), &ReactionWeights::default());
        assert_eq!(g.edge_count(), 0);
        assert_eq!(g.node_count(), 2);
    }

    #[test]
    fn comment_and_like_on_comment_boosts() {
        let log = parse_activity_log_str(
            r#"{"type":"post","id":"p1","author":"u1","text":"java web","timestamp":1}
{"type":"comment","id":"c1","author":"u2","parent":"p1","text":"try it","timestamp":2}
{"type":"comment","id":"c2","author":"u2","parent":"p1","text":"sql databases","timestamp":3}
{"type":"like_on_comment","user":"u3","target":"c2","timestamp":4}"#,
        )
        .unwrap();
        let f = Fixture::new();
        let scorer = f.scorer(20.0);
        let g = build_interaction_graph(&log, &scorer, &ReactionWeights::default());
        let ix = |s| g.index_of(s).unwrap();
        // post irrelevant: each comment reaction weighs 4 x 1
        assert_eq!(g.weight(ix("u2"), ix("u1")), Some(8.0));
        // "sql databases" -> [sql, databas]: relevance 0.5 + self_sim(0.5)
        let b_c = 1.0 + 20.0 * (1.0f64 + 1.0).ln();
        assert!((scorer.boost("sql databases") - b_c).abs() < 1e-12);
        assert!((g.weight(ix("u3"), ix("u2")).unwrap() - b_c).abs() < 1e-12);
        assert_eq!(g.edge_count(), 2);
    }

    #[test]
    fn degree_examples() {
        let h = degree_distribution(&graph(&["a"], &[]), DegreeMode::Total);
        assert_eq!(h.buckets, BTreeMap::from([(0, 1)]));
        let cyc = graph(
            &[],
            &[("a", "b", 1.0), ("b", "c", 1.0), ("c", "d", 1.0), ("d", "a", 1.0)],
        );
        let h = degree_distribution(&cyc, DegreeMode::In);
        assert_eq!(h.buckets, BTreeMap::from([(1, 4)]));
        assert_eq!(h.ccdf, BTreeMap::from([(1, 1.0)]));
    }

    #[test]
    fn degree_tsv_and_ccdf() {
        let g = graph(
            &["e"],
            &[("a", "b", 1.0), ("c", "b", 1.0), ("d", "b", 3.0), ("b", "a", 1.0)],
        );
        let h = degree_distribution(&g, DegreeMode::In);
        assert_eq!(h.buckets, BTreeMap::from([(0, 3), (1, 1), (3, 1)]));
        assert_eq!(h.to_tsv(), "degree\tcount\tccdf\n0\t3\t1\n1\t1\t0.4\n3\t1\t0.2\n");
    }

    #[test]
    fn tail_slope_of_exact_power_law() {
        // ccdf(d) = d^-2 exactly on a synthetic histogram
        let mut h = DegreeHistogram {
            mode: DegreeMode::In,
            buckets: BTreeMap::new(),
            ccdf: BTreeMap::new(),
        };
        for d in [10usize, 20, 40, 80] {
            h.ccdf.insert(d, (d as f64).powf(-2.0));
        }
        assert!((h.ccdf_tail_slope(10).unwrap() + 2.0).abs() < 1e-12);
        assert_eq!(h.ccdf_tail_slope(50), None);
    }

    #[test]
    fn export_formats() {
        let empty = InteractionGraph::from_edges(Vec::new(), Vec::new()).unwrap();
        assert_eq!(export_graph(&empty, ExportFormat::EdgeList), "nodes\t0\nedges\t0\n");
        let g = graph(&[], &[("a", "b", 2.5)]);
        let text = export_graph(&g, ExportFormat::EdgeList);
        assert_eq!(text, "nodes\t2\na\nb\nedges\t1\na\tb\t2.5\n");
        assert_eq!(text.lines().filter(|l| l.split('\t').count() == 3).count(), 1);
        assert_eq!(
            export_graph(&g, ExportFormat::Dot),
            "digraph interactions {\n  \"a\";\n  \"b\";\n  \"a\" -> \"b\" [weight=2.5];\n}\n"
        );
        assert!(matches!(
            "graphml".parse::<ExportFormat>(),
            Err(Error::UnsupportedFormat(_))
        ));
    }

    #[test]
    fn edge_list_rejects_bad_input() {
        assert!(parse_edge_list("").is_err());
        assert!(parse_edge_list("nodes\t1\na\nedges\t1\na\tb\t1\n").is_err());
        assert!(parse_edge_list("nodes\t2\na\nb\nedges\t2\na\tb\t1\n").is_err());
        assert!(parse_edge_list("nodes\t2\na\nb\nedges\t1\na\tb\t-1\n").is_err());
        assert!(parse_edge_list("nodes\t1\na\nedges\t1\na\ta\t1\n").is_err());
    }

    #[test]
    fn invalid_weights() {
        assert!(ReactionWeights::new(1.0, 2.0, 0.0, 8.0).is_err());
        assert!(ReactionWeights::new(1.0, 2.0, 4.0, 8.0).is_ok());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn arb_graph() -> impl Strategy<Value = InteractionGraph> {
            (
                1usize..100,
                prop::collection::vec((0usize..100, 0usize..100, 0.01f64..100.0), 0..300),
            )
                .prop_map(|(n, es)| {
                    let nodes: Vec<UserId> = (0..n).map(|i| uid(&format!("n{i:03}"))).collect();
                    let edges = es
                        .into_iter()
                        .filter(|(a, b, _)| a % n != b % n)
                        .map(|(a, b, w)| (nodes[a % n].clone(), nodes[b % n].clone(), w));
                    InteractionGraph::from_edges(nodes.clone(), edges.collect::<Vec<_>>()).unwrap()
                })
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]
            #[test]
            fn edge_list_roundtrip(g in arb_graph()) {
                let text = export_graph(&g, ExportFormat::EdgeList);
                let back = parse_edge_list(&text).unwrap();
                prop_assert_eq!(&back, &g);
            }

            #[test]
            fn histogram_invariants(g in arb_graph()) {
                for mode in [DegreeMode::In, DegreeMode::Out, DegreeMode::Total] {
                    let h = degree_distribution(&g, mode);
                    prop_assert_eq!(h.buckets.values().sum::<usize>(), g.node_count());
                    let c: Vec<f64> = h.ccdf.values().copied().collect();
                    prop_assert!(c.windows(2).all(|w| w[0] >= w[1]));
                }
            }
        }
    }
}
