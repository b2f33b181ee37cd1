//! Weekly infection dynamics on a contact graph: activate a fraction of
//! edges and groups, catch from the strongest contacting infector, infect
//! probabilistically, convert to infector once at infection, fade
//! geometrically.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::graph::{Graph, Group, NodeId};
use crate::rng::{rng_from_seed, SimRng};

/// How a node's catch value translates into an infection probability.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum InfectionRule {
    /// P(infected) = q_inf * catch. Matches the calibration where a fresh
    /// full-strength contact infects with probability 0.5.
    #[default]
    Scaled,
    /// P(infected) = catch: infected whenever catch exceeds a uniform draw.
    /// Kept for sensitivity checks.
    Literal,
}

/// Dynamics parameters. Defaults follow the standard calibration: weekly
/// fading 0.7 (recovery in about four weeks), infection scale 0.5, infector
/// conversion 0.2, 100-week horizon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpidemicParams {
    /// Activation rate: the fraction of edges and groups active each week.
    pub p: f64,
    /// Weekly fading factor applied to infected and infector values.
    pub r: f64,
    /// Infection probability scale (scaled rule only).
    pub q_inf: f64,
    /// Probability that a newly infected node becomes an infector.
    pub q_spread: f64,
    /// Number of simulated weeks after the seeding week 0.
    pub horizon: u32,
    /// Infected level below which a node is reported recovered. Reporting
    /// only; it does not gate the dynamics.
    pub recovered_threshold: f64,
    pub infection_rule: InfectionRule,
}

impl EpidemicParams {
    pub fn with_activation(p: f64) -> Self {
        Self { p, ..Self::default() }
    }

    pub fn validate(&self) -> crate::Result<()> {
        for (name, v) in [
            ("p", self.p),
            ("r", self.r),
            ("q_inf", self.q_inf),
            ("q_spread", self.q_spread),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(crate::Error::InvalidParams(format!(
                    "{name} = {v} out of [0, 1]"
                )));
            }
        }
        if self.horizon == 0 {
            return Err(crate::Error::InvalidParams("horizon must be >= 1".into()));
        }
        Ok(())
    }
}

impl Default for EpidemicParams {
    fn default() -> Self {
        Self {
            p: 1.0,
            r: 0.7,
            q_inf: 0.5,
            q_spread: 0.2,
            horizon: 100,
            recovered_threshold: 0.1,
            infection_rule: InfectionRule::Scaled,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Susceptible,
    Infected,
    Recovered,
}

/// Per-node infection triple plus reporting status.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeState {
    /// Strongest infector value sensed from this week's contacts
    /// (susceptible nodes only).
    pub catch: f64,
    pub infected: f64,
    pub infector: f64,
    pub status: Status,
    pub week_infected: Option<u32>,
}

impl NodeState {
    pub fn susceptible() -> Self {
        Self {
            catch: 0.0,
            infected: 0.0,
            infector: 0.0,
            status: Status::Susceptible,
            week_infected: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrialEventKind {
    Seeded,
    Infected,
    BecameInfector,
    Recovered,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialEvent {
    pub week: u32,
    pub node: NodeId,
    pub kind: TrialEventKind,
}

/// One mid-run graph replacement, kept for output metadata.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphSwap {
    pub week: u32,
    pub edges_before: usize,
    pub edges_after: usize,
}

/// Complete record of one trial: weekly new-case counts (week 0 counts the
/// two seeds), cumulative totals, total infector mass, and the event log.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialResult {
    pub cases: Vec<u32>,
    pub cumulative: Vec<u32>,
    pub infectious_mass: Vec<f64>,
    pub events: Vec<TrialEvent>,
    pub seed_nodes: (NodeId, NodeId),
    pub rng_seed: u64,
    /// Set when no node outside the initial cliques existed and seeding fell
    /// back to arbitrary distinct nodes.
    pub seed_fallback: bool,
    pub swaps: Vec<GraphSwap>,
}

impl TrialResult {
    pub fn cases_f64(&self) -> Vec<f64> {
        self.cases.iter().map(|&c| c as f64).collect()
    }

    pub fn total_infected(&self) -> u32 {
        *self.cumulative.last().unwrap_or(&0)
    }
}

/// Pick the two week-0 infected nodes: one at full capacity (degree exactly
/// W, falling back to a maximum-degree node) and one outside every initial
/// clique. Both are forced infectors so that no trial extinguishes at
/// seeding. Returns the state array, the seed pair, and whether the
/// outside-clique fallback was taken.
pub fn seed_infection(g: &Graph, rng: &mut SimRng) -> (Vec<NodeState>, (NodeId, NodeId), bool) {
    let n = g.n_nodes();
    assert!(n >= 2, "seeding needs at least two nodes");
    let w = g.params().w;

    let at_capacity: Vec<NodeId> = (0..n).filter(|&v| g.degree_of(v) == w).collect();
    let first = if at_capacity.is_empty() {
        let max_deg = g.max_degree();
        let maxed: Vec<NodeId> = (0..n).filter(|&v| g.degree_of(v) == max_deg).collect();
        maxed[rng.gen_range(0..maxed.len())]
    } else {
        at_capacity[rng.gen_range(0..at_capacity.len())]
    };

    let outside: Vec<NodeId> = (0..n)
        .filter(|&v| v != first && g.clique_of(v).is_none())
        .collect();
    let (second, fallback) = if outside.is_empty() {
        let others: Vec<NodeId> = (0..n).filter(|&v| v != first).collect();
        (others[rng.gen_range(0..others.len())], true)
    } else {
        (outside[rng.gen_range(0..outside.len())], false)
    };

    let mut states = vec![NodeState::susceptible(); n];
    for &v in &[first, second] {
        states[v] = NodeState {
            catch: 0.0,
            infected: 1.0,
            infector: 1.0,
            status: Status::Infected,
            week_infected: Some(0),
        };
    }
    (states, (first, second), fallback)
}

/// The edges and groups active in one week.
#[derive(Debug, Clone, PartialEq)]
pub struct WeeklyContacts {
    pub active_edges: Vec<(NodeId, NodeId)>,
    /// Indices into the groups slice the contacts were sampled from.
    pub active_groups: Vec<usize>,
}

impl WeeklyContacts {
    /// Expand to per-node contact sets: nodes sharing an active edge plus all
    /// co-members of any active group. Intended for tests and small graphs;
    /// the weekly step works on the compact form directly.
    pub fn neighbor_sets(&self, n: usize, groups: &[Group]) -> Vec<std::collections::BTreeSet<NodeId>> {
        let mut sets = vec![std::collections::BTreeSet::new(); n];
        for &(a, b) in &self.active_edges {
            sets[a].insert(b);
            sets[b].insert(a);
        }
        for &gi in &self.active_groups {
            let members = &groups[gi].members;
            for &a in members {
                for &b in members {
                    if a != b {
                        sets[a].insert(b);
                    }
                }
            }
        }
        sets
    }
}

/// Round half up; activation counts use this so that `p = 0.2` on tiny
/// graphs may legitimately activate zero edges.
fn round_half_up(x: f64) -> usize {
    (x + 0.5).floor() as usize
}

/// Partial Fisher-Yates draw of `take` distinct indices out of `len`.
/// Consumes no randomness when everything is taken.
fn sample_indices(len: usize, take: usize, rng: &mut SimRng) -> Vec<usize> {
    if take >= len {
        return (0..len).collect();
    }
    let mut pool: Vec<usize> = (0..len).collect();
    for i in 0..take {
        let j = rng.gen_range(i..len);
        pool.swap(i, j);
    }
    pool.truncate(take);
    pool
}

/// Sample this week's active contacts: `round(p |E|)` edges and
/// `round(p #groups)` groups, uniformly without replacement, fresh each week.
pub fn sample_active_contacts(
    g: &Graph,
    groups: &[Group],
    p: f64,
    rng: &mut SimRng,
) -> WeeklyContacts {
    let edge_take = round_half_up(p * g.edge_count() as f64);
    let active_edges = sample_indices(g.edge_count(), edge_take, rng)
        .into_iter()
        .map(|i| g.edges()[i])
        .collect();
    let group_take = round_half_up(p * groups.len() as f64);
    let active_groups = sample_indices(groups.len(), group_take, rng);
    WeeklyContacts {
        active_edges,
        active_groups,
    }
}

/// Advance the population one week. Order within the week:
///
/// 1. every susceptible node catches the maximum infector value among its
///    contacting neighbors (0 if none);
/// 2. susceptible nodes become infected against a uniform draw; at the
///    moment of infection the node's infected value is set to its catch and
///    it becomes an infector (value 1) with probability `q_spread`, decided
///    once;
/// 3. infected and infector values of every non-susceptible node fade by `r`;
/// 4. nodes whose infected value fell below the recovered threshold are
///    reported recovered.
///
/// Reinfection is impossible. Returns the number of new cases.
pub fn step_week(
    states: &mut [NodeState],
    contacts: &WeeklyContacts,
    groups: &[Group],
    params: &EpidemicParams,
    week: u32,
    rng: &mut SimRng,
    events: &mut Vec<TrialEvent>,
) -> u32 {
    let n = states.len();
    let mut sensed = vec![0.0f64; n];
    for &(a, b) in &contacts.active_edges {
        sensed[a] = sensed[a].max(states[b].infector);
        sensed[b] = sensed[b].max(states[a].infector);
    }
    for &gi in &contacts.active_groups {
        let members = &groups[gi].members;
        // max and runner-up infector in the group; a member's exposure is the
        // max over the *other* members
        let mut best = f64::NEG_INFINITY;
        let mut best_at = usize::MAX;
        let mut second = f64::NEG_INFINITY;
        for &m in members {
            let v = states[m].infector;
            if v > best {
                second = best;
                best = v;
                best_at = m;
            } else if v > second {
                second = v;
            }
        }
        for &m in members {
            let exposure = if m == best_at { second } else { best };
            if exposure > sensed[m] {
                sensed[m] = exposure;
            }
        }
    }

    let mut new_cases = 0u32;
    for i in 0..n {
        if states[i].status != Status::Susceptible {
            continue;
        }
        states[i].catch = sensed[i];
        if sensed[i] <= 0.0 {
            continue;
        }
        let threshold = match params.infection_rule {
            InfectionRule::Scaled => params.q_inf * sensed[i],
            InfectionRule::Literal => sensed[i],
        };
        if rng.gen::<f64>() < threshold {
            states[i].infected = sensed[i];
            states[i].status = Status::Infected;
            states[i].week_infected = Some(week);
            events.push(TrialEvent {
                week,
                node: i,
                kind: TrialEventKind::Infected,
            });
            if rng.gen::<f64>() < params.q_spread {
                states[i].infector = 1.0;
                events.push(TrialEvent {
                    week,
                    node: i,
                    kind: TrialEventKind::BecameInfector,
                });
            }
            new_cases += 1;
        }
    }

    for (i, s) in states.iter_mut().enumerate() {
        if s.status == Status::Susceptible {
            continue;
        }
        s.infected *= params.r;
        s.infector *= params.r;
        if s.status == Status::Infected && s.infected < params.recovered_threshold {
            s.status = Status::Recovered;
            events.push(TrialEvent {
                week,
                node: i,
                kind: TrialEventKind::Recovered,
            });
        }
    }

    new_cases
}

/// A running trial: node states, the weekly series so far, and the rng
/// stream. Cloneable so scenarios can fork from a checkpoint.
#[derive(Debug, Clone)]
pub struct SimState {
    pub states: Vec<NodeState>,
    pub week: u32,
    /// Current activation rate; scenarios may change it mid-run.
    pub activation: f64,
    pub cases: Vec<u32>,
    pub cumulative: Vec<u32>,
    pub infectious_mass: Vec<f64>,
    pub events: Vec<TrialEvent>,
    pub seed_nodes: (NodeId, NodeId),
    pub seed_fallback: bool,
    pub swaps: Vec<GraphSwap>,
    pub rng: SimRng,
    rng_seed: u64,
}

impl SimState {
    /// Seed the infection at week 0 and record it; no dynamics run yet.
    pub fn seeded(g: &Graph, params: &EpidemicParams, seed: u64) -> Self {
        let mut rng = rng_from_seed(seed);
        let (states, seed_nodes, seed_fallback) = seed_infection(g, &mut rng);
        if seed_fallback {
            log::warn!(
                "seeding fell back to arbitrary nodes on a {}-node graph with no node outside the initial cliques",
                g.n_nodes()
            );
        }
        let mass = states.iter().map(|s| s.infector).sum();
        let events = vec![
            TrialEvent {
                week: 0,
                node: seed_nodes.0,
                kind: TrialEventKind::Seeded,
            },
            TrialEvent {
                week: 0,
                node: seed_nodes.1,
                kind: TrialEventKind::Seeded,
            },
        ];
        Self {
            states,
            week: 0,
            activation: params.p,
            cases: vec![2],
            cumulative: vec![2],
            infectious_mass: vec![mass],
            events,
            seed_nodes,
            seed_fallback,
            swaps: Vec::new(),
            rng,
            rng_seed: seed,
        }
    }

    pub fn advance_week(&mut self, g: &Graph, groups: &[Group], params: &EpidemicParams) {
        self.week += 1;
        let contacts = sample_active_contacts(g, groups, self.activation, &mut self.rng);
        let new_cases = step_week(
            &mut self.states,
            &contacts,
            groups,
            params,
            self.week,
            &mut self.rng,
            &mut self.events,
        );
        self.cases.push(new_cases);
        self.cumulative
            .push(self.cumulative.last().unwrap() + new_cases);
        self.infectious_mass
            .push(self.states.iter().map(|s| s.infector).sum());
    }

    pub fn finish(self) -> TrialResult {
        TrialResult {
            cases: self.cases,
            cumulative: self.cumulative,
            infectious_mass: self.infectious_mass,
            events: self.events,
            seed_nodes: self.seed_nodes,
            rng_seed: self.rng_seed,
            seed_fallback: self.seed_fallback,
            swaps: self.swaps,
        }
    }
}

/// Run one full trial: seed at week 0, then resample contacts and step for
/// every week up to the horizon. Deterministic given the seed.
pub fn run_trial(g: &Graph, groups: &[Group], params: &EpidemicParams, seed: u64) -> TrialResult {
    let mut sim = SimState::seeded(g, params, seed);
    for _ in 0..params.horizon {
        sim.advance_week(g, groups, params);
    }
    sim.finish()
}
