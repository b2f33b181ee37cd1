//! Sweep execution: run every cell of the grid (in parallel), write the
//! result tree, then derive the analysis tables. Also the `analyze` pass
//! that recomputes the tables from a stored tree.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use rayon::prelude::*;

use clusterwave_core::epidemic::{run_trial, TrialResult};
use clusterwave_core::graph::GenParams;
use clusterwave_core::io::graph_digest;
use clusterwave_core::netgen::{generate, groups_for, KRule};
use clusterwave_core::rng::{derive_seed, digest_hex};
use clusterwave_core::scenario::{run_release_pair, run_scenario, EventKind, ScenarioEvent, ScenarioScript};

use crate::config::{expand_sweep, group_cells, CellCoord, CellPlan, EventSpec, KRuleSpec, SweepConfig};
use crate::outputs::{
    write_analysis, write_json, write_series_csv, AnalysisInput, AnalysisSummary, CellMeta,
    CellStatus, Manifest, SlimTrial, TrialMeta,
};

pub const K_ROUNDING: &str = "half-away-from-zero";

/// Worker pool bounded by CLUSTERWAVE_THREADS (default: one worker per CPU).
pub fn thread_pool() -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(value) = std::env::var("CLUSTERWAVE_THREADS") {
        let threads: usize = value
            .parse()
            .context("CLUSTERWAVE_THREADS must be a positive integer")?;
        if threads == 0 {
            bail!("CLUSTERWAVE_THREADS must be a positive integer");
        }
        builder = builder.num_threads(threads);
    }
    Ok(builder.build()?)
}

fn slim(result: &TrialResult) -> SlimTrial {
    SlimTrial {
        cases: result.cases.clone(),
        cumulative: result.cumulative.clone(),
        infectious_mass: result.infectious_mass.clone(),
    }
}

/// Turn the config's event specs into a concrete script for one cell/trial.
/// Structural-change graph seeds derive from the trial seed and the event
/// week, so the swap is reproducible per run.
fn build_script(cfg: &SweepConfig, coord: &CellCoord, trial_seed: u64) -> ScenarioScript {
    let events = cfg
        .events
        .iter()
        .map(|spec| match spec {
            EventSpec::SetActivation { week, p } => ScenarioEvent {
                week: *week,
                kind: EventKind::SetActivation { p: *p },
            },
            EventSpec::StructuralChange { week, k, k_rule } => {
                let new_k = match (k, k_rule) {
                    (Some(k), _) => *k,
                    (None, _) => KRule::Paper.materialize(coord.n, coord.w),
                };
                ScenarioEvent {
                    week: *week,
                    kind: EventKind::StructuralChange {
                        new_params: GenParams::new(coord.n, coord.w, coord.m0, new_k, coord.kind),
                        graph_seed: derive_seed(trial_seed, &format!("swap{week}")),
                    },
                }
            }
        })
        .collect();
    ScenarioScript { events }
}

struct CellData {
    meta: CellMeta,
    trials: Vec<SlimTrial>,
    released: Option<Vec<SlimTrial>>,
    analysis: AnalysisInput,
}

fn compute_cell(cfg: &SweepConfig, plan: &CellPlan) -> Result<CellData> {
    let coord = &plan.coord;
    let gen = coord.gen_params();
    let params = cfg.epidemic_params(coord.p);
    let mut trials = Vec::with_capacity(plan.trial_seeds.len());
    let mut released: Vec<SlimTrial> = Vec::new();
    let mut trial_meta = Vec::with_capacity(plan.trial_seeds.len());

    for (trial, &seed) in plan.trial_seeds.iter().enumerate() {
        let graph_seed = derive_seed(seed, "graph");
        let graph = generate(&gen, graph_seed)?;
        let groups = groups_for(&graph);
        let (result, released_result) = if let Some(release) = &cfg.release {
            let (baseline, rel) =
                run_release_pair(&graph, &groups, &params, seed, release.week, release.p)?;
            (baseline, Some(rel))
        } else if !cfg.events.is_empty() {
            let script = build_script(cfg, coord, seed);
            (run_scenario(&graph, &groups, &params, &script, seed)?, None)
        } else {
            (run_trial(&graph, &groups, &params, seed), None)
        };
        trial_meta.push(TrialMeta {
            trial,
            seed,
            graph_seed,
            graph_hash: graph_digest(&graph),
            seed_nodes: result.seed_nodes,
            seed_fallback: result.seed_fallback,
            swaps: result.swaps.clone(),
        });
        trials.push(slim(&result));
        if let Some(rel) = released_result {
            released.push(slim(&rel));
        }
    }

    let released = if released.is_empty() { None } else { Some(released) };
    let analysis = AnalysisInput {
        coord: coord.clone(),
        cases: trials.iter().map(|t| t.cases.clone()).collect(),
        released: released
            .as_ref()
            .map(|rs| rs.iter().map(|t| t.cases.clone()).collect()),
        release_week: cfg.release.map(|r| r.week),
    };
    let meta = CellMeta {
        cell: coord.id(),
        kind: coord.kind.to_string(),
        n: coord.n,
        w: coord.w,
        m0: coord.m0,
        p: coord.p,
        k_rule: match coord.k_rule {
            KRule::Fixed(k) => KRuleSpec::Fixed(k),
            KRule::Paper => KRuleSpec::Named("paper".into()),
        },
        k: gen.k,
        k_rounding: K_ROUNDING.into(),
        trials: plan.trial_seeds.len(),
        horizon: cfg.horizon,
        cases_include_seeds: true,
        epidemic: cfg.epidemic.clone(),
        infection_rule_note: format!("P(infected) under the {:?} rule", cfg.epidemic.infection_rule),
        release: cfg.release,
        events: cfg.events.clone(),
        trial_meta,
    };
    Ok(CellData {
        meta,
        trials,
        released,
        analysis,
    })
}

fn write_cell(out_dir: &Path, data: &CellData) -> Result<()> {
    let dir = out_dir.join("cells").join(&data.meta.cell);
    fs::create_dir_all(&dir)?;
    write_series_csv(&dir.join("series.csv"), &data.trials)?;
    if let Some(released) = &data.released {
        write_series_csv(&dir.join("released.csv"), released)?;
    }
    write_json(&dir.join("meta.json"), &data.meta)
}

struct CellOutcome {
    id: String,
    status: String,
    seeds: Vec<u64>,
    graph_hashes: Vec<String>,
    analysis: Option<AnalysisInput>,
}

/// Execute a sweep into `out_dir`. Failed cells are recorded in the manifest
/// and do not stop the others. Returns the manifest that was written.
pub fn run_sweep(cfg: &SweepConfig, out_dir: &Path) -> Result<Manifest> {
    let descriptors = expand_sweep(cfg)?;
    let plans = group_cells(&descriptors);
    fs::create_dir_all(out_dir)?;

    let pool = thread_pool()?;
    let outcomes: Vec<CellOutcome> = pool.install(|| {
        plans
            .par_iter()
            .map(|plan| {
                let id = plan.coord.id();
                match compute_cell(cfg, plan).and_then(|data| {
                    write_cell(out_dir, &data)?;
                    Ok(data)
                }) {
                    Ok(data) => CellOutcome {
                        id,
                        status: "ok".into(),
                        seeds: plan.trial_seeds.clone(),
                        graph_hashes: data
                            .meta
                            .trial_meta
                            .iter()
                            .map(|t| t.graph_hash.clone())
                            .collect(),
                        analysis: Some(data.analysis),
                    },
                    Err(err) => {
                        log::error!("cell {id} failed: {err:#}");
                        CellOutcome {
                            id,
                            status: format!("failed: {err:#}"),
                            seeds: plan.trial_seeds.clone(),
                            graph_hashes: Vec::new(),
                            analysis: None,
                        }
                    }
                }
            })
            .collect()
    });

    let inputs: Vec<AnalysisInput> = outcomes.iter().filter_map(|o| o.analysis.clone()).collect();
    let analysis = write_analysis(out_dir, &inputs, &cfg.summary_stats())?;

    let manifest = Manifest {
        version: env!("CARGO_PKG_VERSION").to_string(),
        config_sha256: digest_hex(cfg.to_toml().as_bytes()),
        cell_count: plans.len(),
        run_count: descriptors.len(),
        analysis,
        cells: outcomes
            .iter()
            .map(|o| CellStatus {
                id: o.id.clone(),
                status: o.status.clone(),
                trials: o.seeds.len(),
                seeds: o.seeds.clone(),
                graph_hashes: o.graph_hashes.clone(),
            })
            .collect(),
    };
    write_json(&out_dir.join("manifest.json"), &manifest)?;
    Ok(manifest)
}

/// Recompute the analysis tables from a stored result tree.
pub fn analyze_tree(tree: &Path) -> Result<AnalysisSummary> {
    let cells_dir = tree.join("cells");
    if !cells_dir.is_dir() {
        bail!("{} has no cells/ directory", tree.display());
    }
    let mut entries: Vec<std::path::PathBuf> = fs::read_dir(&cells_dir)?
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| p.is_dir())
        .collect();
    entries.sort();
    if entries.is_empty() {
        bail!("{} contains no cell directories", cells_dir.display());
    }

    let mut inputs = Vec::new();
    let mut stats = vec![crate::config::SummaryStat::Peak, crate::config::SummaryStat::Timing];
    for dir in &entries {
        let meta: CellMeta = serde_json::from_str(
            &fs::read_to_string(dir.join("meta.json"))
                .with_context(|| format!("reading {}/meta.json", dir.display()))?,
        )?;
        let trials = crate::outputs::read_series_csv(&dir.join("series.csv"))?;
        let released_path = dir.join("released.csv");
        let released = if released_path.exists() {
            Some(crate::outputs::read_series_csv(&released_path)?)
        } else {
            None
        };
        inputs.push(AnalysisInput {
            coord: meta.coord()?,
            cases: trials.iter().map(|t| t.cases.clone()).collect(),
            released: released.map(|rs| rs.iter().map(|t| t.cases.clone()).collect()),
            release_week: meta.release.map(|r| r.week),
        });
    }
    stats.dedup();
    write_analysis(tree, &inputs, &stats)
}
