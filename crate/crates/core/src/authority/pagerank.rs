use super::{Convergence, Method, PowerIterationParams, ScoreVector};
use crate::error::{Error, Result};
use crate::graph::InteractionGraph;

/// Weighted PageRank by power iteration.
///
/// The walk leaves `u` along `u -> v` with probability
/// `w(u, v) / sum_x w(u, x)`. Nodes without out-edges spread their mass
/// uniformly; teleportation is uniform. Iterates until the L1 change drops
/// below `params.tol` or `params.max_iter` sweeps have run.
pub fn pagerank(graph: &InteractionGraph, params: &PowerIterationParams) -> Result<(ScoreVector, Convergence)> {
    params.validate()?;
    let n = graph.node_count();
    if n == 0 {
        return Err(Error::EmptyGraph);
    }
    let d = params.damping;
    let n_f = n as f64;
    let out_weight: Vec<f64> = (0..n)
        .map(|u| graph.out_edges(u).iter().map(|&(_, w)| w).sum())
        .collect();

    let mut rank = vec![1.0 / n_f; n];
    let mut next = vec![0.0; n];
    let mut conv = Convergence {
        iterations: 0,
        residual: f64::INFINITY,
        converged: false,
    };
    while conv.iterations < params.max_iter {
        let dangling: f64 = (0..n).filter(|&u| out_weight[u] == 0.0).map(|u| rank[u]).sum();
        let base = (1.0 - d) / n_f + d * dangling / n_f;
        for (v, slot) in next.iter_mut().enumerate() {
            let inflow: f64 = graph
                .in_edges(v)
                .iter()
                .map(|&(u, w)| rank[u] * w / out_weight[u])
                .sum();
            *slot = base + d * inflow;
        }
        conv.residual = rank.iter().zip(&next).map(|(a, b)| (a - b).abs()).sum();
        std::mem::swap(&mut rank, &mut next);
        conv.iterations += 1;
        if conv.residual < params.tol {
            conv.converged = true;
            break;
        }
    }
    Ok((ScoreVector::for_graph(Method::PageRank, graph, rank), conv))
}
