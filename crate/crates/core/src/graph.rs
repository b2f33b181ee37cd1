//! Contact-graph representation, degree bookkeeping, meeting groups, and the
//! preferential rank-selection primitive shared by all generators.

use std::collections::HashSet;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::SimRng;

/// Dense node index in `[0, N)`. Node order encodes arrival order during
/// growth-style generation and fixed identity otherwise.
pub type NodeId = usize;

/// Which generator produced (or should produce) a graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GenKind {
    /// Unconstrained scale-free growth from a single clique.
    Sfn,
    /// Capacity-constrained growth: new nodes attach only to earlier,
    /// under-capacity nodes.
    Sc,
    /// Selfish capacity constraints: all nodes preexist, directors ignore
    /// their own capacity.
    Ssc,
}

impl GenKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            GenKind::Sfn => "sfn",
            GenKind::Sc => "sc",
            GenKind::Ssc => "ssc",
        }
    }
}

impl std::fmt::Display for GenKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for GenKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sfn" => Ok(GenKind::Sfn),
            "sc" => Ok(GenKind::Sc),
            "ssc" => Ok(GenKind::Ssc),
            other => Err(Error::Parse(format!("unknown generator kind `{other}`"))),
        }
    }
}

/// Network-generation parameters.
///
/// `w` is the number of contacts a node accepts (room/time capacity), `m0`
/// the number of contacts a node directs by choice, `k` the number of
/// initial disjoint cliques.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenParams {
    pub n: usize,
    pub w: usize,
    pub m0: usize,
    pub k: usize,
    pub kind: GenKind,
}

impl GenParams {
    pub fn new(n: usize, w: usize, m0: usize, k: usize, kind: GenKind) -> Self {
        Self { n, w, m0, k, kind }
    }

    /// Size of each initial clique: a clique cannot exceed either the chosen
    /// contacts `m0` or the capacity `w`.
    pub fn clique_size(&self) -> usize {
        match self.kind {
            GenKind::Sfn => self.m0,
            GenKind::Sc | GenKind::Ssc => self.m0.min(self.w),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidParams("n must be at least 1".into()));
        }
        if self.w == 0 {
            return Err(Error::InvalidParams("w must be at least 1".into()));
        }
        if self.k == 0 {
            return Err(Error::InvalidParams("k must be at least 1".into()));
        }
        match self.kind {
            GenKind::Sfn => {
                if self.k != 1 {
                    return Err(Error::InvalidParams("sfn requires k = 1".into()));
                }
                if self.m0 == 0 {
                    return Err(Error::InvalidParams("sfn requires m0 >= 1".into()));
                }
                if self.n < self.m0 {
                    return Err(Error::InvalidParams(format!(
                        "n = {} is smaller than the initial clique m0 = {}",
                        self.n, self.m0
                    )));
                }
            }
            GenKind::Sc | GenKind::Ssc => {
                if self.n < self.k * self.clique_size() {
                    return Err(Error::InvalidParams(format!(
                        "n = {} cannot hold {} cliques of {} nodes",
                        self.n,
                        self.k,
                        self.clique_size()
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Undirected simple contact graph with per-node degree bookkeeping and
/// initial-clique membership. Immutable once a generator returns it.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    params: GenParams,
    edges: Vec<(NodeId, NodeId)>,
    edge_set: HashSet<(NodeId, NodeId)>,
    degree: Vec<usize>,
    clique_of: Vec<Option<usize>>,
}

impl Graph {
    pub fn new(params: GenParams) -> Self {
        let n = params.n;
        Self {
            params,
            edges: Vec::new(),
            edge_set: HashSet::new(),
            degree: vec![0; n],
            clique_of: vec![None; n],
        }
    }

    pub fn params(&self) -> &GenParams {
        &self.params
    }

    pub fn n_nodes(&self) -> usize {
        self.params.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edges in insertion order, endpoints normalized `lo < hi`.
    pub fn edges(&self) -> &[(NodeId, NodeId)] {
        &self.edges
    }

    pub fn degree_of(&self, v: NodeId) -> usize {
        self.degree[v]
    }

    pub fn degrees(&self) -> &[usize] {
        &self.degree
    }

    pub fn max_degree(&self) -> usize {
        self.degree.iter().copied().max().unwrap_or(0)
    }

    pub fn contains_edge(&self, a: NodeId, b: NodeId) -> bool {
        self.edge_set.contains(&normalize(a, b))
    }

    pub fn add_edge(&mut self, a: NodeId, b: NodeId) -> Result<()> {
        if a == b {
            return Err(Error::InvalidEdge(format!("self-loop at node {a}")));
        }
        if a >= self.params.n || b >= self.params.n {
            return Err(Error::InvalidEdge(format!(
                "edge ({a}, {b}) out of range for n = {}",
                self.params.n
            )));
        }
        let e = normalize(a, b);
        if !self.edge_set.insert(e) {
            return Err(Error::InvalidEdge(format!("duplicate edge ({a}, {b})")));
        }
        self.edges.push(e);
        self.degree[a] += 1;
        self.degree[b] += 1;
        Ok(())
    }

    pub fn set_clique(&mut self, v: NodeId, clique: usize) {
        self.clique_of[v] = Some(clique);
    }

    /// Index of the initial clique `v` belongs to, if any.
    pub fn clique_of(&self, v: NodeId) -> Option<usize> {
        self.clique_of[v]
    }

    /// Adjacency lists rebuilt from the edge set. Neighbor lists are sorted.
    pub fn adjacency(&self) -> Vec<Vec<NodeId>> {
        let mut adj = vec![Vec::new(); self.params.n];
        for &(a, b) in &self.edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        adj
    }

    /// Recompute degrees from the edge set. Must equal `degrees()` exactly;
    /// exposed so tests and audits can check the bookkeeping.
    pub fn recount_degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.params.n];
        for &(a, b) in &self.edges {
            deg[a] += 1;
            deg[b] += 1;
        }
        deg
    }
}

fn normalize(a: NodeId, b: NodeId) -> (NodeId, NodeId) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

/// A meeting room: a center node plus its later-arriving neighbors.
/// Activating a group makes all members pairwise contacts for the week.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Group {
    pub center: NodeId,
    /// Sorted; always contains the center. At least 3 members (a 2-member
    /// group duplicates the edge's contact and changes nothing).
    pub members: Vec<NodeId>,
}

impl Group {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// Build meeting groups from a generated graph: for every node `i` the
/// candidate group is `{i} ∪ {j > i : (i, j) ∈ E}`, kept iff it has at least
/// 3 members. Deterministic; emitted in center order.
pub fn build_groups(g: &Graph) -> Vec<Group> {
    let mut later: Vec<Vec<NodeId>> = vec![Vec::new(); g.n_nodes()];
    for &(a, b) in g.edges() {
        // a < b by normalization
        later[a].push(b);
    }
    let mut groups = Vec::new();
    for (center, mut members) in later.into_iter().enumerate() {
        if members.len() < 2 {
            continue;
        }
        members.push(center);
        members.sort_unstable();
        groups.push(Group { center, members });
    }
    groups
}

/// Rank candidates by `u * (deg + 1)` with `u ~ Uniform(0, 1)` drawn fresh
/// per candidate, highest key first. The `+1` smoothing keeps zero-degree
/// nodes selectable. Ties (measure zero, but possible with equal keys of 0)
/// break by node id.
pub fn ranked_candidates(candidates: &[(NodeId, usize)], rng: &mut SimRng) -> Vec<NodeId> {
    let mut keyed: Vec<(f64, NodeId)> = candidates
        .iter()
        .map(|&(id, deg)| {
            let u: f64 = rng.gen();
            (u * (deg as f64 + 1.0), id)
        })
        .collect();
    keyed.sort_unstable_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));
    keyed.into_iter().map(|(_, id)| id).collect()
}

/// Preferential selection: the top `m` rank keys win. Returns
/// `min(m, candidates.len())` distinct nodes; deterministic given the
/// rng state.
pub fn rank_select(candidates: &[(NodeId, usize)], m: usize, rng: &mut SimRng) -> Vec<NodeId> {
    let mut ranked = ranked_candidates(candidates, rng);
    ranked.truncate(m);
    ranked
}
