//! On-disk result tree: per-cell series CSVs with JSON metadata sidecars,
//! derived analysis tables, and the sweep manifest.
//!
//! All CSVs are comma-separated with a header row, `\n` line endings, UTF-8.
//! Nothing in the tree carries a timestamp, so re-running an identical
//! config reproduces every file byte for byte.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use clusterwave_core::analysis::{
    argmax_week, classify_waves, detect_peaks, mean_infection_week, pearson, release_metrics,
    Peak, PeakParams,
};
use clusterwave_core::epidemic::GraphSwap;
use clusterwave_core::netgen::KRule;

use crate::config::{CellCoord, EventSpec, KRuleSpec, ReleaseSpec, SummaryStat};

/// The three weekly series of one trial, as stored in `series.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct SlimTrial {
    pub cases: Vec<u32>,
    pub cumulative: Vec<u32>,
    pub infectious_mass: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrialMeta {
    pub trial: usize,
    pub seed: u64,
    pub graph_seed: u64,
    pub graph_hash: String,
    pub seed_nodes: (usize, usize),
    pub seed_fallback: bool,
    pub swaps: Vec<GraphSwap>,
}

/// Sidecar metadata for one cell (`meta.json`).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CellMeta {
    pub cell: String,
    pub kind: String,
    pub n: usize,
    pub w: usize,
    pub m0: usize,
    pub p: f64,
    pub k_rule: KRuleSpec,
    pub k: usize,
    pub k_rounding: String,
    pub trials: usize,
    pub horizon: u32,
    pub cases_include_seeds: bool,
    pub epidemic: crate::config::EpidemicSection,
    pub infection_rule_note: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub release: Option<ReleaseSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub events: Vec<EventSpec>,
    pub trial_meta: Vec<TrialMeta>,
}

impl CellMeta {
    pub fn coord(&self) -> Result<CellCoord> {
        Ok(CellCoord {
            kind: self.kind.parse().map_err(anyhow::Error::from)?,
            n: self.n,
            w: self.w,
            m0: self.m0,
            p: self.p,
            k_rule: self.k_rule.to_rule()?,
        })
    }
}

pub fn write_series_csv(path: &Path, trials: &[SlimTrial]) -> Result<()> {
    let mut out = String::from("trial,week,new_cases,cumulative,infectious_mass\n");
    for (trial, t) in trials.iter().enumerate() {
        for week in 0..t.cases.len() {
            out.push_str(&format!(
                "{trial},{week},{},{},{:.6}\n",
                t.cases[week], t.cumulative[week], t.infectious_mass[week]
            ));
        }
    }
    fs::write(path, out).with_context(|| format!("writing {}", path.display()))
}

pub fn read_series_csv(path: &Path) -> Result<Vec<SlimTrial>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut trials: Vec<SlimTrial> = Vec::new();
    for (lineno, line) in text.lines().enumerate().skip(1) {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 5 {
            bail!("{}:{}: expected 5 fields", path.display(), lineno + 1);
        }
        let trial: usize = fields[0].parse()?;
        let week: usize = fields[1].parse()?;
        if trial == trials.len() {
            trials.push(SlimTrial {
                cases: Vec::new(),
                cumulative: Vec::new(),
                infectious_mass: Vec::new(),
            });
        }
        let current = trials
            .get_mut(trial)
            .with_context(|| format!("{}:{}: trial {trial} out of order", path.display(), lineno + 1))?;
        if week != current.cases.len() {
            bail!("{}:{}: week {week} out of order", path.display(), lineno + 1);
        }
        current.cases.push(fields[2].parse()?);
        current.cumulative.push(fields[3].parse()?);
        current.infectious_mass.push(fields[4].parse()?);
    }
    if trials.is_empty() {
        bail!("{}: no trial rows", path.display());
    }
    Ok(trials)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

/// Everything the analysis stage needs from one cell.
#[derive(Debug, Clone)]
pub struct AnalysisInput {
    pub coord: CellCoord,
    pub cases: Vec<Vec<u32>>,
    pub released: Option<Vec<Vec<u32>>>,
    pub release_week: Option<u32>,
}

impl AnalysisInput {
    pub fn mean_curve(&self) -> Vec<f64> {
        mean_curve(&self.cases)
    }
}

pub fn mean_curve(trials: &[Vec<u32>]) -> Vec<f64> {
    let len = trials.first().map_or(0, Vec::len);
    let mut mean = vec![0.0; len];
    for t in trials {
        for (acc, &c) in mean.iter_mut().zip(t) {
            *acc += c as f64;
        }
    }
    for v in &mut mean {
        *v /= trials.len() as f64;
    }
    mean
}

fn to_f64(series: &[u32]) -> Vec<f64> {
    series.iter().map(|&c| c as f64).collect()
}

/// What the analysis pass found; recorded in the manifest.
#[derive(Debug, Clone, Serialize)]
pub struct AnalysisSummary {
    pub cells: usize,
    pub release_eligible: Option<usize>,
    pub release_pearson: Option<f64>,
}

/// Write `peaks.csv`, `waves.csv`, the summary tables, and (for release
/// sweeps) `release.csv` plus `release_summary.csv` under `<out>/analysis/`.
///
/// Wave statistics are emitted at both granularities: per averaged curve
/// (series id `<cell>:mean`) and per trial (`<cell>:t<i>`).
pub fn write_analysis(
    out_dir: &Path,
    inputs: &[AnalysisInput],
    stats: &[SummaryStat],
) -> Result<AnalysisSummary> {
    let dir = out_dir.join("analysis");
    fs::create_dir_all(&dir)?;
    let peak_params = PeakParams::default();

    let mut inputs: Vec<&AnalysisInput> = inputs.iter().collect();
    inputs.sort_by_key(|i| i.coord.id());

    let mut peaks_csv = String::from("run,peak_index,week,height\n");
    let mut waves_csv = String::from(
        "run,n_peaks,second_peak_exists,second_higher_than_first,trough_ratio,\
         first_week,first_height,second_week,second_height\n",
    );
    let mut push_series = |run: &str, series: &[f64]| {
        let peaks = detect_peaks(series, &peak_params);
        for (index, peak) in peaks.iter().enumerate() {
            peaks_csv.push_str(&format!("{run},{index},{},{:.4}\n", peak.week, peak.height));
        }
        let report = classify_waves(&peaks, series);
        let (first_week, first_height) = peaks
            .first()
            .map_or((String::new(), String::new()), |p| {
                (p.week.to_string(), format!("{:.4}", p.height))
            });
        let (second_week, second_height) = peaks
            .get(1)
            .map_or((String::new(), String::new()), |p| {
                (p.week.to_string(), format!("{:.4}", p.height))
            });
        let trough = report
            .trough_ratio_before_second
            .map_or(String::new(), |r| format!("{r:.4}"));
        waves_csv.push_str(&format!(
            "{run},{},{},{},{trough},{first_week},{first_height},{second_week},{second_height}\n",
            peaks.len(),
            report.second_peak_exists,
            report.second_higher_than_first,
        ));
        peaks
    };

    for input in &inputs {
        let id = input.coord.id();
        push_series(&format!("{id}:mean"), &input.mean_curve());
        for (i, trial) in input.cases.iter().enumerate() {
            push_series(&format!("{id}:t{i}"), &to_f64(trial));
        }
    }
    fs::write(dir.join("peaks.csv"), peaks_csv)?;
    fs::write(dir.join("waves.csv"), waves_csv)?;

    write_summaries(&dir, &inputs, stats)?;

    let mut release_eligible = None;
    let mut release_pearson = None;
    if inputs.iter().any(|i| i.released.is_some()) {
        let (eligible, corr) = write_release(&dir, &inputs)?;
        release_eligible = Some(eligible);
        release_pearson = corr;
    }

    Ok(AnalysisSummary {
        cells: inputs.len(),
        release_eligible,
        release_pearson,
    })
}

/// Summary tables in the published layout: one file per
/// (statistic, kind, K rule, N, p), rows W descending, columns m0 ascending.
fn write_summaries(dir: &Path, inputs: &[&AnalysisInput], stats: &[SummaryStat]) -> Result<()> {
    let mut blocks: Vec<(clusterwave_core::GenKind, KRule, usize, f64)> = inputs
        .iter()
        .map(|i| (i.coord.kind, i.coord.k_rule, i.coord.n, i.coord.p))
        .collect();
    blocks.sort_by(|a, b| {
        (a.0.as_str(), a.1.label(), a.2)
            .partial_cmp(&(b.0.as_str(), b.1.label(), b.2))
            .unwrap()
            .then(a.3.partial_cmp(&b.3).unwrap())
    });
    blocks.dedup();

    for stat in stats {
        for &(kind, k_rule, n, p) in &blocks {
            let members: Vec<&&AnalysisInput> = inputs
                .iter()
                .filter(|i| {
                    i.coord.kind == kind && i.coord.k_rule == k_rule && i.coord.n == n && i.coord.p == p
                })
                .collect();
            let mut w_values: Vec<usize> = members.iter().map(|i| i.coord.w).collect();
            w_values.sort_unstable_by(|a, b| b.cmp(a));
            w_values.dedup();
            let mut m0_values: Vec<usize> = members.iter().map(|i| i.coord.m0).collect();
            m0_values.sort_unstable();
            m0_values.dedup();

            let mut csv = String::from("W");
            for m0 in &m0_values {
                csv.push_str(&format!(",m0={m0}"));
            }
            csv.push('\n');
            for &w in &w_values {
                csv.push_str(&w.to_string());
                for &m0 in &m0_values {
                    let cell = members
                        .iter()
                        .find(|i| i.coord.w == w && i.coord.m0 == m0);
                    match cell {
                        Some(input) => {
                            csv.push_str(&format!(",{:.4}", cell_stat(input, *stat)))
                        }
                        None => csv.push(','),
                    }
                }
                csv.push('\n');
            }
            let name = format!(
                "summary_{}_{}_{}_n{}_p{}.csv",
                stat.label(),
                kind,
                k_rule.label(),
                n,
                p
            );
            fs::write(dir.join(name), csv)?;
        }
    }
    Ok(())
}

/// Mean over trials of the per-trial statistic.
fn cell_stat(input: &AnalysisInput, stat: SummaryStat) -> f64 {
    let values: Vec<f64> = input
        .cases
        .iter()
        .map(|trial| match stat {
            SummaryStat::Peak => trial.iter().copied().max().unwrap_or(0) as f64,
            SummaryStat::Timing => mean_infection_week(trial),
        })
        .collect();
    values.iter().sum::<f64>() / values.len() as f64
}

/// One eligible release case: the baseline's highest peak fell before the
/// release week.
#[derive(Debug, Clone, Copy)]
pub struct ReleaseCase {
    pub x: f64,
    pub y: f64,
}

pub fn eligible_release_cases(input: &AnalysisInput) -> Vec<(usize, ReleaseCase)> {
    let (Some(released), Some(week)) = (&input.released, input.release_week) else {
        return Vec::new();
    };
    let week = week as usize;
    let mut cases = Vec::new();
    for (trial, (baseline, rel)) in input.cases.iter().zip(released).enumerate() {
        let baseline = to_f64(baseline);
        if argmax_week(&baseline) >= week {
            continue;
        }
        let Ok(metrics) = release_metrics(&baseline, &to_f64(rel), week) else {
            continue;
        };
        cases.push((
            trial,
            ReleaseCase {
                x: metrics.x,
                y: metrics.y,
            },
        ));
    }
    cases
}

fn write_release(dir: &Path, inputs: &[&AnalysisInput]) -> Result<(usize, Option<f64>)> {
    let mut csv = String::from("run,x,y\n");
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for input in inputs {
        for (trial, case) in eligible_release_cases(input) {
            csv.push_str(&format!(
                "{}:t{trial},{:.6},{:.6}\n",
                input.coord.id(),
                case.x,
                case.y
            ));
            xs.push(case.x);
            ys.push(case.y);
        }
    }
    fs::write(dir.join("release.csv"), csv)?;

    let corr = pearson(&xs, &ys).ok();
    let mut summary = String::from("eligible_cases,pearson_xy\n");
    match corr {
        Some(r) => summary.push_str(&format!("{},{r:.6}\n", xs.len())),
        None => summary.push_str(&format!("{},NA\n", xs.len())),
    }
    fs::write(dir.join("release_summary.csv"), summary)?;
    Ok((xs.len(), corr))
}

/// Per-cell entry in the manifest.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CellStatus {
    pub id: String,
    pub status: String,
    pub trials: usize,
    pub seeds: Vec<u64>,
    pub graph_hashes: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub version: String,
    pub config_sha256: String,
    pub cell_count: usize,
    pub run_count: usize,
    pub analysis: AnalysisSummary,
    pub cells: Vec<CellStatus>,
}

/// Spot-check helpers shared by tests.
pub fn peaks_of(series: &[f64]) -> Vec<Peak> {
    detect_peaks(series, &PeakParams::default())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn series_csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("series.csv");
        let trials = vec![
            SlimTrial {
                cases: vec![2, 3, 0],
                cumulative: vec![2, 5, 5],
                infectious_mass: vec![2.0, 1.4, 0.98],
            },
            SlimTrial {
                cases: vec![2, 0, 0],
                cumulative: vec![2, 2, 2],
                infectious_mass: vec![2.0, 1.4, 0.98],
            },
        ];
        write_series_csv(&path, &trials).unwrap();
        let parsed = read_series_csv(&path).unwrap();
        assert_eq!(parsed, trials);
        let text = fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("trial,week,new_cases,cumulative,infectious_mass\n"));
        assert!(!text.contains('\r'));
    }

    #[test]
    fn mean_curve_averages_trials() {
        let mean = mean_curve(&[vec![0, 4, 2], vec![0, 0, 2]]);
        assert_eq!(mean, vec![0.0, 2.0, 2.0]);
    }

    #[test]
    fn eligible_filter_requires_peak_before_release() {
        let coord = CellCoord {
            kind: clusterwave_core::GenKind::Ssc,
            n: 100,
            w: 4,
            m0: 2,
            p: 0.2,
            k_rule: KRule::Paper,
        };
        let mut early = vec![0u32; 101];
        early[10] = 50;
        let mut late = vec![0u32; 101];
        late[30] = 50;
        let released = vec![vec![0u32; 101], vec![0u32; 101]];
        let input = AnalysisInput {
            coord,
            cases: vec![early, late],
            released: Some(released),
            release_week: Some(20),
        };
        let cases = eligible_release_cases(&input);
        assert_eq!(cases.len(), 1);
        assert_eq!(cases[0].0, 0);
    }
}
