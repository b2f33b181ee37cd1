//! Scripted mid-run interventions: one-time structural change of the contact
//! graph with node states preserved, and activation-rate changes (restriction
//! release).

use std::borrow::Cow;

use crate::epidemic::{EpidemicParams, GraphSwap, SimState, TrialResult};
use crate::error::{Error, Result};
use crate::graph::{GenParams, Graph, Group};
use crate::netgen::{generate, groups_for};
use crate::rng::{derive_seed, rng_from_seed};

#[derive(Debug, Clone, PartialEq)]
pub enum EventKind {
    /// Replace the contact graph with a freshly generated one. Node identity
    /// is by index, so every node keeps its exact infection state.
    StructuralChange {
        new_params: GenParams,
        graph_seed: u64,
    },
    /// Change the activation rate, effective from this week's sampling.
    SetActivation { p: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioEvent {
    pub week: u32,
    pub kind: EventKind,
}

/// Ordered intervention script. Weeks must be strictly increasing and inside
/// `[1, horizon]`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ScenarioScript {
    pub events: Vec<ScenarioEvent>,
}

impl ScenarioScript {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn validate(&self, horizon: u32) -> Result<()> {
        let mut last = 0;
        for event in &self.events {
            if event.week < 1 || event.week > horizon {
                return Err(Error::InvalidParams(format!(
                    "event week {} outside [1, {horizon}]",
                    event.week
                )));
            }
            if event.week <= last {
                return Err(Error::InvalidParams(format!(
                    "event weeks must be strictly increasing, got {} after {last}",
                    event.week
                )));
            }
            last = event.week;
        }
        Ok(())
    }
}

/// Generate the replacement graph for a structural change. The node count
/// must match; edge-count drift between the old and new graphs is reported
/// by the caller, not corrected.
pub fn apply_structural_change(
    old: &Graph,
    new_params: &GenParams,
    graph_seed: u64,
) -> Result<(Graph, Vec<Group>)> {
    if new_params.n != old.n_nodes() {
        return Err(Error::GraphMismatch(format!(
            "structural change must keep N: old {} vs new {}",
            old.n_nodes(),
            new_params.n
        )));
    }
    let g = generate(new_params, graph_seed)?;
    let groups = groups_for(&g);
    Ok((g, groups))
}

/// Run a trial under a script: before simulating week t, all events
/// scheduled at t are applied. With an empty script this is exactly
/// `run_trial`.
pub fn run_scenario(
    g: &Graph,
    groups: &[Group],
    params: &EpidemicParams,
    script: &ScenarioScript,
    seed: u64,
) -> Result<TrialResult> {
    script.validate(params.horizon)?;
    let mut sim = SimState::seeded(g, params, seed);
    let mut cur_graph: Cow<'_, Graph> = Cow::Borrowed(g);
    let mut cur_groups: Cow<'_, [Group]> = Cow::Borrowed(groups);
    let mut pending = script.events.iter().peekable();
    for week in 1..=params.horizon {
        while pending.peek().is_some_and(|e| e.week == week) {
            let event = pending.next().unwrap();
            match &event.kind {
                EventKind::StructuralChange {
                    new_params,
                    graph_seed,
                } => {
                    let (new_graph, new_groups) =
                        apply_structural_change(&cur_graph, new_params, *graph_seed)?;
                    sim.swaps.push(GraphSwap {
                        week,
                        edges_before: cur_graph.edge_count(),
                        edges_after: new_graph.edge_count(),
                    });
                    cur_graph = Cow::Owned(new_graph);
                    cur_groups = Cow::Owned(new_groups);
                }
                EventKind::SetActivation { p } => {
                    sim.activation = *p;
                }
            }
        }
        sim.advance_week(&cur_graph, &cur_groups, params);
    }
    Ok(sim.finish())
}

/// Run the paired release experiment: a baseline trial at the configured
/// activation and a released variant that shares the baseline trajectory up
/// to `release_week`, then switches to `p_released`.
///
/// The released continuation draws from a fresh sub-stream derived from
/// `(seed, "release")`, so the two continuations are independent while the
/// shared history stays byte-identical.
pub fn run_release_pair(
    g: &Graph,
    groups: &[Group],
    params: &EpidemicParams,
    seed: u64,
    release_week: u32,
    p_released: f64,
) -> Result<(TrialResult, TrialResult)> {
    if release_week < 1 || release_week > params.horizon {
        return Err(Error::InvalidParams(format!(
            "release week {} outside [1, {}]",
            release_week, params.horizon
        )));
    }
    let mut baseline = SimState::seeded(g, params, seed);
    for _ in 1..release_week {
        baseline.advance_week(g, groups, params);
    }
    let mut released = baseline.clone();
    released.rng = rng_from_seed(derive_seed(seed, "release"));
    released.activation = p_released;
    for _ in release_week..=params.horizon {
        baseline.advance_week(g, groups, params);
        released.advance_week(g, groups, params);
    }
    Ok((baseline.finish(), released.finish()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::epidemic::{run_trial, NodeState, Status};
    use crate::graph::GenKind;
    use crate::netgen::generate;

    fn small_graph(seed: u64) -> (Graph, Vec<Group>) {
        let params = GenParams::new(80, 6, 2, 2, GenKind::Ssc);
        let g = generate(&params, seed).unwrap();
        let groups = groups_for(&g);
        (g, groups)
    }

    #[test]
    fn empty_script_matches_run_trial() {
        let (g, groups) = small_graph(1);
        let params = EpidemicParams {
            horizon: 40,
            ..EpidemicParams::default()
        };
        let plain = run_trial(&g, &groups, &params, 77);
        let scripted = run_scenario(&g, &groups, &params, &ScenarioScript::empty(), 77).unwrap();
        assert_eq!(plain, scripted);
    }

    #[test]
    fn noop_structural_change_preserves_dynamics() {
        // regenerating with the original params and seed swaps in an
        // identical graph, so the trajectory must not change
        let gen = GenParams::new(80, 6, 2, 2, GenKind::Ssc);
        let g = generate(&gen, 5).unwrap();
        let groups = groups_for(&g);
        let params = EpidemicParams {
            horizon: 40,
            ..EpidemicParams::default()
        };
        let script = ScenarioScript {
            events: vec![ScenarioEvent {
                week: 10,
                kind: EventKind::StructuralChange {
                    new_params: gen.clone(),
                    graph_seed: 5,
                },
            }],
        };
        let plain = run_trial(&g, &groups, &params, 3);
        let mut swapped = run_scenario(&g, &groups, &params, &script, 3).unwrap();
        assert_eq!(swapped.swaps.len(), 1);
        assert_eq!(swapped.swaps[0].edges_before, swapped.swaps[0].edges_after);
        swapped.swaps.clear();
        assert_eq!(plain, swapped);
    }

    #[test]
    fn structural_change_rejects_node_count_mismatch() {
        let (g, _) = small_graph(2);
        let bad = GenParams::new(81, 6, 2, 1, GenKind::Ssc);
        assert!(matches!(
            apply_structural_change(&g, &bad, 0),
            Err(Error::GraphMismatch(_))
        ));
    }

    #[test]
    fn structural_change_preserves_states_bitwise() {
        let (g, groups) = small_graph(3);
        let params = EpidemicParams::default();
        let mut sim = SimState::seeded(&g, &params, 11);
        for _ in 0..10 {
            sim.advance_week(&g, &groups, &params);
        }
        let snapshot: Vec<NodeState> = sim.states.clone();
        let new_params = GenParams::new(80, 6, 2, 1, GenKind::Ssc);
        let (new_g, _) = apply_structural_change(&g, &new_params, 999).unwrap();
        // the event itself must not touch node state
        assert_eq!(sim.states, snapshot);
        assert_eq!(new_g.n_nodes(), g.n_nodes());
    }

    #[test]
    fn all_susceptible_states_stay_silent_through_a_swap() {
        // with no infection anywhere, a structural change leads to the same
        // flat-zero trajectory as an unseeded run on the new graph
        let (g, groups) = small_graph(4);
        let params = EpidemicParams {
            horizon: 30,
            ..EpidemicParams::default()
        };
        let mut sim = SimState::seeded(&g, &params, 21);
        for s in sim.states.iter_mut() {
            *s = NodeState::susceptible();
        }
        let new_params = GenParams::new(80, 6, 2, 1, GenKind::Ssc);
        let (new_g, new_groups) = apply_structural_change(&g, &new_params, 7).unwrap();
        for _ in 0..10 {
            sim.advance_week(&new_g, &new_groups, &params);
        }
        assert!(sim.cases[1..].iter().all(|&c| c == 0));
        assert!(sim.states.iter().all(|s| s.status == Status::Susceptible));
    }

    #[test]
    fn release_on_extinct_trajectory_stays_flat() {
        // edgeless graph: the epidemic is extinct after seeding, so raising p
        // at week 20 changes nothing
        let g = Graph::new(GenParams::new(10, 4, 0, 1, GenKind::Ssc));
        let params = EpidemicParams {
            p: 0.2,
            horizon: 40,
            ..EpidemicParams::default()
        };
        let script = ScenarioScript {
            events: vec![ScenarioEvent {
                week: 20,
                kind: EventKind::SetActivation { p: 1.0 },
            }],
        };
        let result = run_scenario(&g, &[], &params, &script, 2).unwrap();
        assert!(result.cases[1..].iter().all(|&c| c == 0));
    }

    #[test]
    fn set_activation_is_idempotent_for_equal_p() {
        let (g, groups) = small_graph(6);
        let params = EpidemicParams {
            horizon: 30,
            ..EpidemicParams::default()
        };
        let script = ScenarioScript {
            events: vec![ScenarioEvent {
                week: 12,
                kind: EventKind::SetActivation { p: params.p },
            }],
        };
        let plain = run_trial(&g, &groups, &params, 31);
        let scripted = run_scenario(&g, &groups, &params, &script, 31).unwrap();
        assert_eq!(plain, scripted);
    }

    #[test]
    fn release_pair_shares_history_and_matches_plain_baseline() {
        let (g, groups) = small_graph(7);
        let params = EpidemicParams {
            p: 0.2,
            horizon: 50,
            ..EpidemicParams::default()
        };
        let (baseline, released) = run_release_pair(&g, &groups, &params, 13, 20, 1.0).unwrap();
        let plain = run_trial(&g, &groups, &params, 13);
        assert_eq!(baseline, plain);
        assert_eq!(&baseline.cases[..20], &released.cases[..20]);
        assert_eq!(baseline.cases.len(), 51);
        assert_eq!(released.cases.len(), 51);
    }

    #[test]
    fn script_validation_rejects_bad_weeks() {
        let make = |weeks: &[u32]| ScenarioScript {
            events: weeks
                .iter()
                .map(|&week| ScenarioEvent {
                    week,
                    kind: EventKind::SetActivation { p: 0.5 },
                })
                .collect(),
        };
        assert!(make(&[5, 5]).validate(100).is_err());
        assert!(make(&[9, 5]).validate(100).is_err());
        assert!(make(&[0]).validate(100).is_err());
        assert!(make(&[101]).validate(100).is_err());
        assert!(make(&[5, 20, 99]).validate(100).is_ok());
    }
}
