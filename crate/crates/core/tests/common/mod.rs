//! Slow, direct reference implementations used to cross-check the library.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use womgraph::graph::{InteractionGraph, ReactionWeights};
use womgraph::ingest::{parse_activity_log_str, GroupActivityLog, ReactionKind, UserId};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uid(i: usize) -> UserId {
    UserId::new(format!("n{i:03}")).unwrap()
}

/// Random digraph on `n` nodes with edge probability `p` and weights drawn
/// from `{1, 2, 4, 8}` so that inverse-weight path lengths add exactly.
pub fn random_graph(rng: &mut ChaCha8Rng, n: usize, p: f64) -> InteractionGraph {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in 0..n {
            if u != v && rng.gen_bool(p) {
                let w = [1.0, 2.0, 4.0, 8.0][rng.gen_range(0..4)];
                edges.push((uid(u), uid(v), w));
            }
        }
    }
    InteractionGraph::from_edges((0..n).map(uid).collect::<Vec<_>>(), edges).unwrap()
}

/// Random digraph with real-valued weights in `[0.1, 10)`.
pub fn random_real_graph(rng: &mut ChaCha8Rng, n: usize, p: f64) -> InteractionGraph {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in 0..n {
            if u != v && rng.gen_bool(p) {
                edges.push((uid(u), uid(v), rng.gen_range(0.1..10.0)));
            }
        }
    }
    InteractionGraph::from_edges((0..n).map(uid).collect::<Vec<_>>(), edges).unwrap()
}

/// Random graph that contains a directed cycle through every node.
pub fn random_strong_graph(rng: &mut ChaCha8Rng, n: usize, p: f64) -> InteractionGraph {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut w: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for i in 0..n {
        w.insert((order[i], order[(i + 1) % n]), rng.gen_range(0.5..4.0));
    }
    for u in 0..n {
        for v in 0..n {
            if u != v && rng.gen_bool(p) {
                w.insert((u, v), rng.gen_range(0.5..4.0));
            }
        }
    }
    let edges: Vec<_> = w.into_iter().map(|((u, v), x)| (uid(u), uid(v), x)).collect();
    InteractionGraph::from_edges((0..n).map(uid).collect::<Vec<_>>(), edges).unwrap()
}

/// Dense weight matrix, `m[u][v]` = weight of `u -> v`.
pub fn dense(g: &InteractionGraph) -> Vec<Vec<f64>> {
    let n = g.node_count();
    let mut m = vec![vec![0.0; n]; n];
    for (u, v, w) in g.edges() {
        m[u][v] = w;
    }
    m
}

pub fn l1(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

pub fn l2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn unit(v: &mut [f64]) {
    let s = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if s > 0.0 {
        v.iter_mut().for_each(|x| *x /= s);
    }
}

// ---------------------------------------------------------------- MI

/// Word-pair MI over the 2x2 presence table, computed cell by cell.
pub fn mi_oracle(docs: &[Vec<String>], min_pair: usize, top_n: usize) -> BTreeMap<(String, String), f64> {
    let sets: Vec<BTreeSet<&str>> = docs.iter().map(|d| d.iter().map(String::as_str).collect()).collect();
    let vocab: BTreeSet<&str> = sets.iter().flatten().copied().collect();
    let vocab: Vec<&str> = vocab.into_iter().collect();
    let n = docs.len() as f64;
    let mut raw: BTreeMap<(String, String), f64> = BTreeMap::new();
    for (i, x) in vocab.iter().enumerate() {
        for y in &vocab[i + 1..] {
            let mut cell = [[0usize; 2]; 2];
            for s in &sets {
                cell[s.contains(x) as usize][s.contains(y) as usize] += 1;
            }
            if cell[1][1] < min_pair {
                continue;
            }
            let px = [
                (cell[0][0] + cell[0][1]) as f64 / n,
                (cell[1][0] + cell[1][1]) as f64 / n,
            ];
            let py = [
                (cell[0][0] + cell[1][0]) as f64 / n,
                (cell[0][1] + cell[1][1]) as f64 / n,
            ];
            let mut mi = 0.0;
            for a in 0..2 {
                for b in 0..2 {
                    let pxy = cell[a][b] as f64 / n;
                    if pxy > 0.0 {
                        mi += pxy * (pxy / (px[a] * py[b])).ln();
                    }
                }
            }
            if mi > 0.0 {
                raw.insert((x.to_string(), y.to_string()), mi);
            }
        }
    }
    // per-word partner lists, best first
    let mut partners: BTreeMap<&str, Vec<(&str, f64)>> = BTreeMap::new();
    for ((x, y), &mi) in &raw {
        partners.entry(x).or_default().push((y, mi));
        partners.entry(y).or_default().push((x, mi));
    }
    let mut top: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
    for (w, list) in partners.iter_mut() {
        list.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(b.0)));
        top.insert(w, list.iter().take(top_n).map(|p| p.0).collect());
    }
    raw.iter()
        .filter(|((x, y), _)| top[x.as_str()].contains(y.as_str()) && top[y.as_str()].contains(x.as_str()))
        .map(|(k, v)| (k.clone(), *v))
        .collect()
}

// ---------------------------------------------------------------- PageRank

/// PageRank on the explicit Google matrix.
pub fn pagerank_oracle(g: &InteractionGraph, d: f64) -> Vec<f64> {
    let n = g.node_count();
    let m = dense(g);
    let mut google = vec![vec![0.0; n]; n]; // google[v][u]: probability u -> v
    for u in 0..n {
        let out: f64 = m[u].iter().sum();
        for v in 0..n {
            let step = if out > 0.0 { m[u][v] / out } else { 1.0 / n as f64 };
            google[v][u] = d * step + (1.0 - d) / n as f64;
        }
    }
    let mut x = vec![1.0 / n as f64; n];
    for _ in 0..5000 {
        let next: Vec<f64> = (0..n).map(|v| (0..n).map(|u| google[v][u] * x[u]).sum()).collect();
        let done = l1(&x, &next) < 1e-15;
        x = next;
        if done {
            break;
        }
    }
    x
}

// ---------------------------------------------------------------- HITS / eigen

/// Authorities as the dominant eigenvector of `A^T A`, hubs as `A auth`.
pub fn hits_oracle(g: &InteractionGraph) -> (Vec<f64>, Vec<f64>) {
    let n = g.node_count();
    let a = dense(g);
    let mut ata = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            ata[i][j] = (0..n).map(|k| a[k][i] * a[k][j]).sum();
        }
    }
    // first authority update from the uniform hub vector
    let mut auth: Vec<f64> = (0..n).map(|v| (0..n).map(|u| a[u][v]).sum()).collect();
    unit(&mut auth);
    for _ in 0..200_000 {
        let mut next: Vec<f64> = (0..n).map(|i| (0..n).map(|j| ata[i][j] * auth[j]).sum()).collect();
        unit(&mut next);
        let done = l1(&auth, &next) < 1e-15;
        auth = next;
        if done {
            break;
        }
    }
    let mut hub: Vec<f64> = (0..n).map(|u| (0..n).map(|v| a[u][v] * auth[v]).sum()).collect();
    unit(&mut hub);
    (hub, auth)
}

/// Dominant eigenvector of `A^T` on a strongly connected graph, by power
/// iteration on `A^T + 2I` with a dense matrix.
pub fn eigen_oracle(g: &InteractionGraph) -> Vec<f64> {
    let n = g.node_count();
    let a = dense(g);
    let mut x = vec![1.0; n];
    unit(&mut x);
    for _ in 0..200_000 {
        let mut next: Vec<f64> = (0..n)
            .map(|v| 2.0 * x[v] + (0..n).map(|u| a[u][v] * x[u]).sum::<f64>())
            .collect();
        unit(&mut next);
        let done = l1(&x, &next) < 1e-15;
        x = next;
        if done {
            break;
        }
    }
    x
}

// ---------------------------------------------------------------- paths

/// All simple paths from `s` to `t` with their lengths.
fn simple_paths(m: &[Vec<f64>], s: usize, t: usize, weighted: bool) -> Vec<(Vec<usize>, f64)> {
    fn walk(
        m: &[Vec<f64>],
        t: usize,
        weighted: bool,
        path: &mut Vec<usize>,
        len: f64,
        out: &mut Vec<(Vec<usize>, f64)>,
    ) {
        let u = *path.last().unwrap();
        if u == t {
            out.push((path.clone(), len));
            return;
        }
        for v in 0..m.len() {
            if m[u][v] > 0.0 && !path.contains(&v) {
                let step = if weighted { 1.0 / m[u][v] } else { 1.0 };
                path.push(v);
                walk(m, t, weighted, path, len + step, out);
                path.pop();
            }
        }
    }
    let mut out = Vec::new();
    walk(m, t, weighted, &mut vec![s], 0.0, &mut out);
    out
}

/// Betweenness by enumerating every simple path between every ordered pair.
pub fn betweenness_oracle(g: &InteractionGraph, weighted: bool) -> Vec<f64> {
    let n = g.node_count();
    let m = dense(g);
    let mut bc = vec![0.0; n];
    for s in 0..n {
        for t in 0..n {
            if s == t {
                continue;
            }
            let paths = simple_paths(&m, s, t, weighted);
            let Some(best) = paths.iter().map(|p| p.1).min_by(f64::total_cmp) else {
                continue;
            };
            let shortest: Vec<&Vec<usize>> = paths.iter().filter(|p| p.1 == best).map(|p| &p.0).collect();
            let total = shortest.len() as f64;
            for p in &shortest {
                for &v in &p[1..p.len() - 1] {
                    bc[v] += 1.0 / total;
                }
            }
        }
    }
    bc
}

/// Harmonic closeness from enumerated shortest path lengths.
pub fn closeness_oracle(g: &InteractionGraph, weighted: bool) -> Vec<f64> {
    let n = g.node_count();
    let m = dense(g);
    (0..n)
        .map(|s| {
            (0..n)
                .filter(|&t| t != s)
                .filter_map(|t| {
                    simple_paths(&m, s, t, weighted)
                        .iter()
                        .map(|p| p.1)
                        .min_by(f64::total_cmp)
                })
                .map(|d| 1.0 / d)
                .sum()
        })
        .collect()
}

// ---------------------------------------------------------------- structure

/// Reflexive-transitive closure by Floyd-Warshall.
pub fn closure(g: &InteractionGraph) -> Vec<Vec<bool>> {
    let n = g.node_count();
    let mut r = vec![vec![false; n]; n];
    for (i, row) in r.iter_mut().enumerate() {
        row[i] = true;
    }
    for (u, v, _) in g.edges() {
        r[u][v] = true;
    }
    for k in 0..n {
        for i in 0..n {
            if r[i][k] {
                for j in 0..n {
                    if r[k][j] {
                        r[i][j] = true;
                    }
                }
            }
        }
    }
    r
}

/// Bow-tie class name per node from the reachability matrix.
pub fn bowtie_oracle(g: &InteractionGraph) -> Vec<&'static str> {
    let n = g.node_count();
    if n == 0 {
        return Vec::new();
    }
    let r = closure(g);
    // SCC of i = nodes mutually reachable with i; pick the largest, smallest id first
    let mut core: Vec<usize> = Vec::new();
    for i in 0..n {
        let scc: Vec<usize> = (0..n).filter(|&j| r[i][j] && r[j][i]).collect();
        if scc.len() > core.len() {
            core = scc;
        }
    }
    let c = core[0];
    let is_core = |i: usize| r[i][c] && r[c][i];
    let is_in = |i: usize| !is_core(i) && r[i][c];
    let is_out = |i: usize| !is_core(i) && r[c][i];
    // undirected reachability for the core's weak component
    let mut und = vec![vec![false; n]; n];
    for i in 0..n {
        for j in 0..n {
            und[i][j] = i == j || g.weight(i, j).is_some() || g.weight(j, i).is_some();
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if und[i][k] && und[k][j] {
                    und[i][j] = true;
                }
            }
        }
    }
    (0..n)
        .map(|i| {
            if is_core(i) {
                "core"
            } else if is_in(i) {
                "in"
            } else if is_out(i) {
                "out"
            } else if !und[c][i] {
                "disconnected"
            } else if (0..n).any(|a| is_in(a) && r[a][i]) && (0..n).any(|b| is_out(b) && r[i][b]) {
                "tubes"
            } else {
                "tendrils"
            }
        })
        .collect()
}

/// Weak components via union-find, as sorted member sets.
pub fn wcc_oracle(g: &InteractionGraph) -> BTreeSet<BTreeSet<usize>> {
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        let mut x = x;
        while p[x] != r {
            let next = p[x];
            p[x] = r;
            x = next;
        }
        r
    }
    let n = g.node_count();
    let mut parent: Vec<usize> = (0..n).collect();
    for (u, v, _) in g.edges() {
        let (a, b) = (find(&mut parent, u), find(&mut parent, v));
        if a != b {
            parent[a] = b;
        }
    }
    let mut groups: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
    for i in 0..n {
        let root = find(&mut parent, i);
        groups.entry(root).or_default().insert(i);
    }
    groups.into_values().collect()
}

// ---------------------------------------------------------------- logs

/// Small random activity log in the line format, with every reaction kind.
pub fn random_log_text(rng: &mut ChaCha8Rng, n_users: usize, n_posts: usize, n_reactions: usize) -> String {
    const WORDS: &[&str] = &[
        "java", "sql", "database", "query", "thread", "web", "css", "cooking", "travel",
    ];
    let mut out = String::new();
    let user = |i: usize| format!("u{i:02}");
    for i in 0..n_users {
        out.push_str(&format!("{{\"type\":\"user\",\"id\":\"{}\"}}\n", user(i)));
    }
    let text = |rng: &mut ChaCha8Rng| -> String {
        (0..4)
            .map(|_| *WORDS.choose(rng).unwrap())
            .collect::<Vec<_>>()
            .join(" ")
    };
    let mut posts = Vec::new();
    let mut comments = Vec::new();
    for p in 0..n_posts {
        let id = format!("p{p}");
        out.push_str(&format!(
            "{{\"type\":\"post\",\"id\":\"{id}\",\"author\":\"{}\",\"text\":\"{}\",\"timestamp\":{}}}\n",
            user(rng.gen_range(0..n_users)),
            text(rng),
            1_600_000_000 + p as u64 * 1000
        ));
        posts.push(id);
    }
    for r in 0..n_reactions {
        let ts = 1_700_000_000 + r as u64;
        let reactor = user(rng.gen_range(0..n_users));
        let post = posts.choose(rng).unwrap().clone();
        match rng.gen_range(0..4) {
            0 => {
                let id = format!("c{r}");
                out.push_str(&format!(
                    "{{\"type\":\"comment\",\"id\":\"{id}\",\"author\":\"{reactor}\",\"parent\":\"{post}\",\"text\":\"{}\",\"timestamp\":{ts}}}\n",
                    text(rng)
                ));
                comments.push(id);
            }
            1 if !comments.is_empty() => {
                let c = comments.choose(rng).unwrap();
                out.push_str(&format!(
                    "{{\"type\":\"like_on_comment\",\"user\":\"{reactor}\",\"target\":\"{c}\",\"timestamp\":{ts}}}\n"
                ));
            }
            2 => out.push_str(&format!(
                "{{\"type\":\"share\",\"user\":\"{reactor}\",\"target\":\"{post}\",\"timestamp\":{ts}}}\n"
            )),
            _ => out.push_str(&format!(
                "{{\"type\":\"like\",\"user\":\"{reactor}\",\"target\":\"{post}\",\"timestamp\":{ts}}}\n"
            )),
        }
    }
    out
}

pub fn random_log(rng: &mut ChaCha8Rng, n_users: usize, n_posts: usize, n_reactions: usize) -> GroupActivityLog {
    parse_activity_log_str(&random_log_text(rng, n_users, n_posts, n_reactions)).unwrap()
}

/// Votes recounted from scratch: every reaction, resolved to its author.
pub fn votes_oracle(log: &GroupActivityLog, w: &ReactionWeights) -> HashMap<String, f64> {
    let author: HashMap<&str, &str> = log
        .contents()
        .iter()
        .map(|c| (c.content_id.as_str(), c.author.as_str()))
        .collect();
    let mut out: HashMap<String, f64> = log.users().iter().map(|u| (u.to_string(), 0.0)).collect();
    for r in log.reactions() {
        let base = match r.kind {
            ReactionKind::LikeOnComment => w.like_on_comment,
            ReactionKind::Like => w.like,
            ReactionKind::CommentReaction => w.comment,
            ReactionKind::Share => w.share,
        };
        let a = author[r.target.as_str()];
        if a != r.reactor.as_str() {
            *out.get_mut(a).unwrap() += base;
        }
    }
    out
}
