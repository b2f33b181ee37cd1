//! The three network generators: baseline scale-free growth (SFN), growth
//! under spatiotemporal constraints (SFN-SC), and the selfish variant where
//! every node preexists and directors ignore their own capacity (SFN-SSC).

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::graph::{build_groups, ranked_candidates, GenKind, GenParams, Graph, Group, NodeId};
use crate::rng::{rng_from_seed, SimRng};

/// How the initial-clique count K is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum KRule {
    Fixed(usize),
    /// K = max(1, round(0.1 N / W)), rounding half away from zero.
    Paper,
}

impl KRule {
    pub fn materialize(&self, n: usize, w: usize) -> usize {
        match self {
            KRule::Fixed(k) => *k,
            KRule::Paper => {
                let k = (0.1 * n as f64 / w as f64).round() as usize;
                k.max(1)
            }
        }
    }

    pub fn label(&self) -> String {
        match self {
            KRule::Fixed(k) => format!("k{k}"),
            KRule::Paper => "kpaper".to_string(),
        }
    }
}

/// Generate a graph of the parameters' kind from a dedicated seed.
pub fn generate(params: &GenParams, seed: u64) -> Result<Graph> {
    let mut rng = rng_from_seed(seed);
    match params.kind {
        GenKind::Sfn => gen_sfn(params, &mut rng),
        GenKind::Sc => gen_sfn_sc(params, &mut rng),
        GenKind::Ssc => gen_sfn_ssc(params, &mut rng),
    }
}

/// Meeting groups for a generated graph. The baseline SFN defines no group
/// construction; both constrained generators build groups from the final
/// edge set.
pub fn groups_for(g: &Graph) -> Vec<Group> {
    match g.params().kind {
        GenKind::Sfn => Vec::new(),
        GenKind::Sc | GenKind::Ssc => build_groups(g),
    }
}

/// Baseline scale-free network: one clique of `m0` nodes, then each new node
/// directs `m0` edges preferentially over all existing nodes, uncapped.
pub fn gen_sfn(params: &GenParams, rng: &mut SimRng) -> Result<Graph> {
    params.validate()?;
    let m0 = params.m0;
    let mut g = Graph::new(params.clone());
    build_initial_cliques(&mut g, 1, m0)?;
    for i in m0..params.n {
        let candidates: Vec<(NodeId, usize)> = (0..i).map(|j| (j, g.degree_of(j))).collect();
        direct_edges(&mut g, i, &candidates, m0, usize::MAX, rng)?;
    }
    Ok(g)
}

/// SFN with spatiotemporal constraints: K disjoint cliques of
/// `min(m0, W)` nodes, then each arriving node directs up to `m0` edges to
/// earlier nodes whose degree is still below `W`. A node that finds no
/// eligible target starts isolated.
pub fn gen_sfn_sc(params: &GenParams, rng: &mut SimRng) -> Result<Graph> {
    params.validate()?;
    let c = params.clique_size();
    let mut g = Graph::new(params.clone());
    build_initial_cliques(&mut g, params.k, c)?;
    for i in params.k * c..params.n {
        let candidates: Vec<(NodeId, usize)> = (0..i)
            .filter(|&j| g.degree_of(j) < params.w)
            .map(|j| (j, g.degree_of(j)))
            .collect();
        direct_edges(&mut g, i, &candidates, params.m0, params.w, rng)?;
    }
    Ok(g)
}

/// Selfish variant: all N nodes exist from the start. After the cliques,
/// every remaining node in index order directs up to `m0` edges over all
/// other nodes below capacity, including later-indexed and zero-degree ones.
/// The director's own degree is never checked, so popular nodes can end at
/// `W + m0`.
pub fn gen_sfn_ssc(params: &GenParams, rng: &mut SimRng) -> Result<Graph> {
    params.validate()?;
    let c = params.clique_size();
    let mut g = Graph::new(params.clone());
    build_initial_cliques(&mut g, params.k, c)?;
    for i in params.k * c..params.n {
        let candidates: Vec<(NodeId, usize)> = (0..params.n)
            .filter(|&j| j != i && g.degree_of(j) < params.w && !g.contains_edge(i, j))
            .map(|j| (j, g.degree_of(j)))
            .collect();
        direct_edges(&mut g, i, &candidates, params.m0, params.w, rng)?;
    }
    Ok(g)
}

fn build_initial_cliques(g: &mut Graph, k: usize, size: usize) -> Result<()> {
    for clique in 0..k {
        let base = clique * size;
        for a in 0..size {
            g.set_clique(base + a, clique);
            for b in 0..a {
                g.add_edge(base + b, base + a)?;
            }
        }
    }
    Ok(())
}

/// Walk the preference ranking and connect `from` to up to `m0` targets,
/// re-checking the capacity bound per directed edge rather than per batch so
/// the acceptance cap stays an invariant.
fn direct_edges(
    g: &mut Graph,
    from: NodeId,
    candidates: &[(NodeId, usize)],
    m0: usize,
    cap: usize,
    rng: &mut SimRng,
) -> Result<()> {
    if m0 == 0 || candidates.is_empty() {
        return Ok(());
    }
    let ranked = ranked_candidates(candidates, rng);
    let mut added = 0;
    for j in ranked {
        if added == m0 {
            break;
        }
        if g.degree_of(j) >= cap {
            continue;
        }
        g.add_edge(from, j)?;
        added += 1;
    }
    Ok(())
}
