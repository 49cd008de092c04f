//! Bow-tie decomposition and weakly connected sub-groups.
//!
//! Bow-tie classes relative to the core (largest strongly connected
//! component, ties broken by smallest member id):
//!
//! - `in`: reaches the core; `out`: reachable from the core.
//! - `tubes`: outside core/in/out, reachable from `in` and reaching `out`.
//! - `tendrils`: every other node weakly connected to the core.
//! - `disconnected`: nodes outside the core's weak component.

use std::collections::{BTreeSet, VecDeque};
use std::fmt::{self, Write as _};

use crate::graph::InteractionGraph;
use crate::ingest::UserId;

/// Strongly connected components (iterative Tarjan). Each component lists
/// node indices in ascending order.
pub fn strongly_connected_components(graph: &InteractionGraph) -> Vec<Vec<usize>> {
    const UNVISITED: usize = usize::MAX;
    let n = graph.node_count();
    let mut index = vec![UNVISITED; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut comps = Vec::new();
    let mut next_index = 0;
    // (node, next out-edge position)
    let mut call: Vec<(usize, usize)> = Vec::new();

    for root in 0..n {
        if index[root] != UNVISITED {
            continue;
        }
        call.push((root, 0));
        index[root] = next_index;
        low[root] = next_index;
        next_index += 1;
        stack.push(root);
        on_stack[root] = true;

        while let Some(&mut (v, ref mut pos)) = call.last_mut() {
            let edges = graph.out_edges(v);
            if let Some(&(w, _)) = edges.get(*pos) {
                *pos += 1;
                if index[w] == UNVISITED {
                    index[w] = next_index;
                    low[w] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
                continue;
            }
            call.pop();
            if let Some(&(parent, _)) = call.last() {
                low[parent] = low[parent].min(low[v]);
            }
            if low[v] == index[v] {
                let mut comp = Vec::new();
                loop {
                    let w = stack.pop().expect("tarjan stack holds the component");
                    on_stack[w] = false;
                    comp.push(w);
                    if w == v {
                        break;
                    }
                }
                comp.sort_unstable();
                comps.push(comp);
            }
        }
    }
    comps
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BowTieClass {
    Core,
    In,
    Out,
    Tendrils,
    Tubes,
    Disconnected,
}

impl BowTieClass {
    pub const ALL: [BowTieClass; 6] = [
        BowTieClass::Core,
        BowTieClass::In,
        BowTieClass::Out,
        BowTieClass::Tendrils,
        BowTieClass::Tubes,
        BowTieClass::Disconnected,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BowTieClass::Core => "core",
            BowTieClass::In => "in",
            BowTieClass::Out => "out",
            BowTieClass::Tendrils => "tendrils",
            BowTieClass::Tubes => "tubes",
            BowTieClass::Disconnected => "disconnected",
        }
    }
}

impl fmt::Display for BowTieClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Six-way partition of the graph's nodes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BowTieDecomposition {
    pub core: BTreeSet<UserId>,
    pub in_set: BTreeSet<UserId>,
    pub out_set: BTreeSet<UserId>,
    pub tendrils: BTreeSet<UserId>,
    pub tubes: BTreeSet<UserId>,
    pub disconnected: BTreeSet<UserId>,
}

impl BowTieDecomposition {
    pub fn class(&self, class: BowTieClass) -> &BTreeSet<UserId> {
        match class {
            BowTieClass::Core => &self.core,
            BowTieClass::In => &self.in_set,
            BowTieClass::Out => &self.out_set,
            BowTieClass::Tendrils => &self.tendrils,
            BowTieClass::Tubes => &self.tubes,
            BowTieClass::Disconnected => &self.disconnected,
        }
    }

    pub fn total(&self) -> usize {
        BowTieClass::ALL.iter().map(|&c| self.class(c).len()).sum()
    }

    pub fn fraction(&self, class: BowTieClass) -> f64 {
        let total = self.total();
        if total == 0 {
            0.0
        } else {
            self.class(class).len() as f64 / total as f64
        }
    }

    pub fn class_of(&self, user: &str) -> Option<BowTieClass> {
        BowTieClass::ALL.into_iter().find(|&c| self.class(c).contains(user))
    }

    /// `class\tcount\tfraction` lines, optionally followed by a
    /// `user\tclass` listing.
    pub fn to_tsv(&self, per_user: bool) -> String {
        let mut out = String::from("class\tcount\tfraction\n");
        for c in BowTieClass::ALL {
            let _ = writeln!(out, "{c}\t{}\t{}", self.class(c).len(), self.fraction(c));
        }
        if per_user {
            let mut rows: Vec<(&UserId, BowTieClass)> = BowTieClass::ALL
                .iter()
                .flat_map(|&c| self.class(c).iter().map(move |u| (u, c)))
                .collect();
            rows.sort();
            out.push_str("user\tclass\n");
            for (u, c) in rows {
                let _ = writeln!(out, "{u}\t{c}");
            }
        }
        out
    }
}

fn reach(graph: &InteractionGraph, seeds: &[usize], forward: bool, allowed: &[bool]) -> Vec<bool> {
    let mut seen = vec![false; graph.node_count()];
    let mut queue: VecDeque<usize> = VecDeque::new();
    for &s in seeds {
        if !seen[s] {
            seen[s] = true;
            queue.push_back(s);
        }
    }
    while let Some(v) = queue.pop_front() {
        let next = if forward { graph.out_edges(v) } else { graph.in_edges(v) };
        for &(w, _) in next {
            if allowed[w] && !seen[w] {
                seen[w] = true;
                queue.push_back(w);
            }
        }
    }
    seen
}

pub fn bowtie_decompose(graph: &InteractionGraph) -> BowTieDecomposition {
    let n = graph.node_count();
    let mut classes = vec![BowTieClass::Disconnected; n];

    let core = strongly_connected_components(graph)
        .into_iter()
        .max_by(|a, b| a.len().cmp(&b.len()).then_with(|| b[0].cmp(&a[0])));

    if let Some(core) = core {
        let all = vec![true; n];
        let downstream = reach(graph, &core, true, &all);
        let upstream = reach(graph, &core, false, &all);
        for v in 0..n {
            classes[v] = match (upstream[v], downstream[v]) {
                (true, true) => BowTieClass::Core,
                (true, false) => BowTieClass::In,
                (false, true) => BowTieClass::Out,
                (false, false) => BowTieClass::Disconnected,
            };
        }
        let rest: Vec<bool> = classes.iter().map(|&c| c == BowTieClass::Disconnected).collect();
        let ins: Vec<usize> = (0..n).filter(|&v| classes[v] == BowTieClass::In).collect();
        let outs: Vec<usize> = (0..n).filter(|&v| classes[v] == BowTieClass::Out).collect();
        let from_in = reach(graph, &ins, true, &rest);
        let to_out = reach(graph, &outs, false, &rest);

        let mut weak = vec![false; n];
        let mut queue: VecDeque<usize> = core.iter().copied().collect();
        for &c in &core {
            weak[c] = true;
        }
        while let Some(v) = queue.pop_front() {
            for &(w, _) in graph.out_edges(v).iter().chain(graph.in_edges(v)) {
                if !weak[w] {
                    weak[w] = true;
                    queue.push_back(w);
                }
            }
        }

        for v in 0..n {
            if !rest[v] || !weak[v] {
                continue;
            }
            classes[v] = if from_in[v] && to_out[v] {
                BowTieClass::Tubes
            } else {
                BowTieClass::Tendrils
            };
        }
    }

    let mut d = BowTieDecomposition {
        core: BTreeSet::new(),
        in_set: BTreeSet::new(),
        out_set: BTreeSet::new(),
        tendrils: BTreeSet::new(),
        tubes: BTreeSet::new(),
        disconnected: BTreeSet::new(),
    };
    for (v, c) in classes.into_iter().enumerate() {
        let set = match c {
            BowTieClass::Core => &mut d.core,
            BowTieClass::In => &mut d.in_set,
            BowTieClass::Out => &mut d.out_set,
            BowTieClass::Tendrils => &mut d.tendrils,
            BowTieClass::Tubes => &mut d.tubes,
            BowTieClass::Disconnected => &mut d.disconnected,
        };
        set.insert(graph.node(v).clone());
    }
    d
}

/// Maximal weakly connected member set.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SubGroup {
    members: BTreeSet<UserId>,
}

impl SubGroup {
    pub fn new(members: BTreeSet<UserId>) -> Option<Self> {
        (!members.is_empty()).then_some(SubGroup { members })
    }

    pub fn members(&self) -> &BTreeSet<UserId> {
        &self.members
    }

    pub fn size(&self) -> usize {
        self.members.len()
    }

    pub fn contains(&self, user: &str) -> bool {
        self.members.contains(user)
    }

    /// Smallest member id; used as a stable label.
    pub fn label(&self) -> &UserId {
        self.members.first().expect("sub-groups are nonempty")
    }
}

/// Weakly connected components by breadth-first search, sorted by size
/// descending then smallest member id.
pub fn weakly_connected_components(graph: &InteractionGraph) -> Vec<SubGroup> {
    let n = graph.node_count();
    let mut seen = vec![false; n];
    let mut comps = Vec::new();
    for root in 0..n {
        if seen[root] {
            continue;
        }
        seen[root] = true;
        let mut members = BTreeSet::new();
        let mut queue = VecDeque::from([root]);
        while let Some(v) = queue.pop_front() {
            members.insert(graph.node(v).clone());
            for &(w, _) in graph.out_edges(v).iter().chain(graph.in_edges(v)) {
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        comps.push(SubGroup { members });
    }
    comps.sort_by(|a, b| b.size().cmp(&a.size()).then_with(|| a.label().cmp(b.label())));
    comps
}
