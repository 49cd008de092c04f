//! Shortest-path measures: Brandes betweenness and harmonic closeness.
//!
//! With `use_weights` an edge of weight `w` has length `1 / w`, so stronger
//! ties are shorter; otherwise every edge has length 1.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, VecDeque};

use rayon::prelude::*;

use super::{Method, ScoreVector};
use crate::graph::InteractionGraph;

/// Sources per work unit. Fixed so that partial sums are merged in the same
/// order whatever the thread count.
const SOURCE_CHUNK: usize = 32;

#[derive(Clone, Copy, PartialEq)]
struct Pending {
    dist: f64,
    node: usize,
}

impl Eq for Pending {}

impl Ord for Pending {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for Pending {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Single-source shortest paths state reused across sources.
struct Sssp {
    dist: Vec<f64>,
    sigma: Vec<f64>,
    preds: Vec<Vec<usize>>,
    /// Nodes in non-decreasing distance order.
    order: Vec<usize>,
}

impl Sssp {
    fn new(n: usize) -> Self {
        Sssp {
            dist: vec![f64::INFINITY; n],
            sigma: vec![0.0; n],
            preds: vec![Vec::new(); n],
            order: Vec::with_capacity(n),
        }
    }

    fn run(&mut self, graph: &InteractionGraph, source: usize, use_weights: bool) {
        self.dist.fill(f64::INFINITY);
        self.sigma.fill(0.0);
        self.preds.iter_mut().for_each(Vec::clear);
        self.order.clear();
        self.dist[source] = 0.0;
        self.sigma[source] = 1.0;
        if use_weights {
            self.dijkstra(graph, source);
        } else {
            self.bfs(graph, source);
        }
    }

    fn bfs(&mut self, graph: &InteractionGraph, source: usize) {
        let mut queue = VecDeque::from([source]);
        while let Some(v) = queue.pop_front() {
            self.order.push(v);
            let next = self.dist[v] + 1.0;
            for &(w, _) in graph.out_edges(v) {
                if self.dist[w].is_infinite() {
                    self.dist[w] = next;
                    queue.push_back(w);
                }
                if self.dist[w] == next {
                    self.sigma[w] += self.sigma[v];
                    self.preds[w].push(v);
                }
            }
        }
    }

    fn dijkstra(&mut self, graph: &InteractionGraph, source: usize) {
        let mut done = vec![false; self.dist.len()];
        let mut heap = BinaryHeap::from([Pending {
            dist: 0.0,
            node: source,
        }]);
        while let Some(Pending { dist, node: v }) = heap.pop() {
            if done[v] || dist > self.dist[v] {
                continue;
            }
            done[v] = true;
            self.order.push(v);
            for &(w, weight) in graph.out_edges(v) {
                let nd = dist + 1.0 / weight;
                if nd < self.dist[w] {
                    self.dist[w] = nd;
                    self.sigma[w] = self.sigma[v];
                    self.preds[w].clear();
                    self.preds[w].push(v);
                    heap.push(Pending { dist: nd, node: w });
                } else if nd == self.dist[w] && !done[w] {
                    self.sigma[w] += self.sigma[v];
                    self.preds[w].push(v);
                }
            }
        }
    }
}

/// Exact betweenness over directed shortest paths (Brandes), as
/// unnormalized sums of pair dependencies.
pub fn betweenness(graph: &InteractionGraph, use_weights: bool) -> ScoreVector {
    let n = graph.node_count();
    let sources: Vec<usize> = (0..n).collect();
    let partials: Vec<Vec<f64>> = sources
        .par_chunks(SOURCE_CHUNK)
        .map(|chunk| {
            let mut acc = vec![0.0; n];
            let mut sssp = Sssp::new(n);
            let mut delta = vec![0.0; n];
            for &s in chunk {
                sssp.run(graph, s, use_weights);
                delta.fill(0.0);
                for &w in sssp.order.iter().rev() {
                    let coeff = (1.0 + delta[w]) / sssp.sigma[w];
                    for &v in &sssp.preds[w] {
                        delta[v] += sssp.sigma[v] * coeff;
                    }
                    if w != s {
                        acc[w] += delta[w];
                    }
                }
            }
            acc
        })
        .collect();
    let mut total = vec![0.0; n];
    for part in partials {
        for (t, p) in total.iter_mut().zip(part) {
            *t += p;
        }
    }
    ScoreVector::for_graph(Method::Betweenness, graph, total)
}

/// Harmonic closeness on outgoing distances: `sum over v != u of
/// 1 / d(u, v)`, unreachable nodes contributing zero.
pub fn closeness(graph: &InteractionGraph, use_weights: bool) -> ScoreVector {
    let n = graph.node_count();
    let scores: Vec<f64> = (0..n)
        .into_par_iter()
        .map_init(
            || Sssp::new(n),
            |sssp, u| {
                sssp.run(graph, u, use_weights);
                sssp.dist
                    .iter()
                    .enumerate()
                    .filter(|&(v, d)| v != u && d.is_finite())
                    .map(|(_, d)| 1.0 / d)
                    .sum()
            },
        )
        .collect();
    ScoreVector::for_graph(Method::Closeness, graph, scores)
}
