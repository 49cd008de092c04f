use super::{Convergence, IterParams, Method, ScoreVector};
use crate::error::{Error, Result};
use crate::graph::InteractionGraph;

fn normalize_l2(v: &mut [f64]) {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
}

fn l1_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

/// Weighted HITS. Returns `(hubs, authorities, convergence)`.
///
/// Each sweep sets `auth(v) = sum over u -> v of w * hub(u)`, then
/// `hub(u) = sum over u -> v of w * auth(v)` from the fresh authorities,
/// L2-normalizing both. Starts from the uniform unit vector; stops when the
/// summed L1 change of both vectors is below `tol`.
pub fn hits(graph: &InteractionGraph, params: &IterParams) -> Result<(ScoreVector, ScoreVector, Convergence)> {
    params.validate()?;
    let n = graph.node_count();
    if n == 0 {
        return Err(Error::EmptyGraph);
    }
    let start = 1.0 / (n as f64).sqrt();
    let mut hub = vec![start; n];
    let mut auth = vec![start; n];
    let mut conv = Convergence {
        iterations: 0,
        residual: f64::INFINITY,
        converged: false,
    };
    while conv.iterations < params.max_iter {
        let mut new_auth: Vec<f64> = (0..n)
            .map(|v| graph.in_edges(v).iter().map(|&(u, w)| w * hub[u]).sum())
            .collect();
        normalize_l2(&mut new_auth);
        let mut new_hub: Vec<f64> = (0..n)
            .map(|u| graph.out_edges(u).iter().map(|&(v, w)| w * new_auth[v]).sum())
            .collect();
        normalize_l2(&mut new_hub);
        conv.residual = l1_distance(&auth, &new_auth) + l1_distance(&hub, &new_hub);
        auth = new_auth;
        hub = new_hub;
        conv.iterations += 1;
        if conv.residual < params.tol {
            conv.converged = true;
            break;
        }
    }
    Ok((
        ScoreVector::for_graph(Method::Hits, graph, hub),
        ScoreVector::for_graph(Method::Hits, graph, auth),
        conv,
    ))
}

/// Dominant eigenvector of the weighted adjacency, scores flowing along
/// edge direction: `x(v)` is proportional to `sum over u -> v of w * x(u)`.
///
/// Iterates with `A^T / max(w) + I`, which has the same eigenvectors as
/// `A^T` and a unique dominant eigenvalue on periodic graphs.
/// L2-normalized each sweep; stops when the L1 change is below `tol`.
pub fn eigenvector_centrality(graph: &InteractionGraph, params: &IterParams) -> Result<(ScoreVector, Convergence)> {
    params.validate()?;
    let n = graph.node_count();
    if n == 0 {
        return Err(Error::EmptyGraph);
    }
    if graph.edge_count() == 0 {
        return Err(Error::ZeroVector);
    }
    // dividing by the largest weight keeps the shift in step with the graph's scale
    let scale = graph.edges().map(|(_, _, w)| w).fold(0.0, f64::max);
    let mut x = vec![1.0 / (n as f64).sqrt(); n];
    let mut conv = Convergence {
        iterations: 0,
        residual: f64::INFINITY,
        converged: false,
    };
    while conv.iterations < params.max_iter {
        let mut next: Vec<f64> = (0..n)
            .map(|v| x[v] + graph.in_edges(v).iter().map(|&(u, w)| w / scale * x[u]).sum::<f64>())
            .collect();
        normalize_l2(&mut next);
        conv.residual = l1_distance(&x, &next);
        x = next;
        conv.iterations += 1;
        if conv.residual < params.tol {
            conv.converged = true;
            break;
        }
    }
    Ok((ScoreVector::for_graph(Method::Eigenvector, graph, x), conv))
}
