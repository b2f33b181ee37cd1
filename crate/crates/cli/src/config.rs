//! Sweep configuration: the TOML schema, grid expansion into run
//! descriptors, and per-run seed derivation.

use std::collections::HashSet;
use std::path::PathBuf;

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};

use clusterwave_core::epidemic::{EpidemicParams, InfectionRule};
use clusterwave_core::graph::{GenKind, GenParams};
use clusterwave_core::netgen::KRule;
use clusterwave_core::rng::derive_seed;

/// Which per-cell statistics go into the summary tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SummaryStat {
    /// Mean over trials of the per-trial peak weekly case count.
    Peak,
    /// Mean over trials of the per-trial average infection week.
    Timing,
}

impl SummaryStat {
    pub fn label(&self) -> &'static str {
        match self {
            SummaryStat::Peak => "peak",
            SummaryStat::Timing => "timing",
        }
    }
}

/// Initial-clique rule as written in a config file: either the literal
/// string "paper" or a fixed integer K.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum KRuleSpec {
    Fixed(usize),
    Named(String),
}

impl KRuleSpec {
    pub fn to_rule(&self) -> anyhow::Result<KRule> {
        match self {
            KRuleSpec::Fixed(k) => Ok(KRule::Fixed(*k)),
            KRuleSpec::Named(name) if name == "paper" => Ok(KRule::Paper),
            KRuleSpec::Named(other) => bail!("unknown k rule `{other}` (use \"paper\" or an integer)"),
        }
    }
}

/// Epidemic knobs shared by every cell of a sweep. The activation rate and
/// horizon come from the grid and the top-level config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EpidemicSection {
    pub r: f64,
    pub q_inf: f64,
    pub q_spread: f64,
    pub recovered_threshold: f64,
    pub infection_rule: InfectionRule,
}

impl Default for EpidemicSection {
    fn default() -> Self {
        let d = EpidemicParams::default();
        Self {
            r: d.r,
            q_inf: d.q_inf,
            q_spread: d.q_spread,
            recovered_threshold: d.recovered_threshold,
            infection_rule: d.infection_rule,
        }
    }
}

/// One scripted intervention, as written in a config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EventSpec {
    /// Change the activation rate from this week's sampling on.
    SetActivation { week: u32, p: f64 },
    /// Swap in a freshly generated graph with the same N, W, m0 and kind but
    /// the given clique count (integer `k` or `k_rule = "paper"`).
    StructuralChange {
        week: u32,
        #[serde(skip_serializing_if = "Option::is_none")]
        k: Option<usize>,
        #[serde(skip_serializing_if = "Option::is_none")]
        k_rule: Option<String>,
    },
}

impl EventSpec {
    pub fn week(&self) -> u32 {
        match self {
            EventSpec::SetActivation { week, .. } => *week,
            EventSpec::StructuralChange { week, .. } => *week,
        }
    }
}

/// The paired release experiment: rerun weeks `week..` from the baseline
/// checkpoint with activation raised to `p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReleaseSpec {
    pub week: u32,
    pub p: f64,
}

fn default_trials() -> usize {
    10
}

fn default_horizon() -> u32 {
    100
}

fn default_base_seed() -> u64 {
    42
}

/// A full sweep description. See the README for the key schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub kinds: Vec<GenKind>,
    pub n_values: Vec<usize>,
    pub w_values: Vec<usize>,
    pub m0_values: Vec<usize>,
    pub p_values: Vec<f64>,
    pub k_rules: Vec<KRuleSpec>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_horizon")]
    pub horizon: u32,
    #[serde(default = "default_base_seed")]
    pub base_seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
    #[serde(default)]
    pub epidemic: EpidemicSection,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub events: Vec<EventSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub release: Option<ReleaseSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub summary_stats: Option<Vec<SummaryStat>>,
}

impl SweepConfig {
    pub fn from_toml(text: &str) -> anyhow::Result<Self> {
        let cfg: SweepConfig = toml::from_str(text).context("parsing sweep config")?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        for (name, empty) in [
            ("kinds", self.kinds.is_empty()),
            ("n_values", self.n_values.is_empty()),
            ("w_values", self.w_values.is_empty()),
            ("m0_values", self.m0_values.is_empty()),
            ("p_values", self.p_values.is_empty()),
            ("k_rules", self.k_rules.is_empty()),
        ] {
            if empty {
                bail!("config error: {name} must not be empty");
            }
        }
        if self.trials == 0 {
            bail!("config error: trials must be at least 1");
        }
        if self.horizon == 0 {
            bail!("config error: horizon must be at least 1");
        }
        for rule in &self.k_rules {
            rule.to_rule()?;
        }
        if !self.events.is_empty() && self.release.is_some() {
            bail!("config error: `events` and `release` cannot be combined in one sweep");
        }
        for w in self.events.windows(2) {
            if w[1].week() <= w[0].week() {
                bail!("config error: event weeks must be strictly increasing");
            }
        }
        for event in &self.events {
            if event.week() < 1 || event.week() > self.horizon {
                bail!("config error: event week {} outside [1, {}]", event.week(), self.horizon);
            }
            if let EventSpec::StructuralChange { k, k_rule, .. } = event {
                match (k, k_rule) {
                    (Some(_), None) => {}
                    (None, Some(rule)) if rule == "paper" => {}
                    (None, Some(other)) => bail!("config error: unknown k_rule `{other}`"),
                    (Some(_), Some(_)) => bail!("config error: give either k or k_rule, not both"),
                    (None, None) => bail!("config error: structural_change needs k or k_rule"),
                }
            }
        }
        if let Some(release) = &self.release {
            if release.week < 1 || release.week > self.horizon {
                bail!(
                    "config error: release week {} outside [1, {}]",
                    release.week,
                    self.horizon
                );
            }
        }
        Ok(())
    }

    /// Epidemic parameters for one cell of the grid.
    pub fn epidemic_params(&self, p: f64) -> EpidemicParams {
        EpidemicParams {
            p,
            r: self.epidemic.r,
            q_inf: self.epidemic.q_inf,
            q_spread: self.epidemic.q_spread,
            horizon: self.horizon,
            recovered_threshold: self.epidemic.recovered_threshold,
            infection_rule: self.epidemic.infection_rule,
        }
    }

    pub fn summary_stats(&self) -> Vec<SummaryStat> {
        self.summary_stats
            .clone()
            .unwrap_or_else(|| vec![SummaryStat::Peak, SummaryStat::Timing])
    }
}

/// One cell of the sweep grid.
#[derive(Debug, Clone, PartialEq)]
pub struct CellCoord {
    pub kind: GenKind,
    pub n: usize,
    pub w: usize,
    pub m0: usize,
    pub p: f64,
    pub k_rule: KRule,
}

impl CellCoord {
    /// Filesystem-safe, human-readable cell id.
    pub fn id(&self) -> String {
        format!(
            "{}-n{}-w{}-m{}-p{}-{}",
            self.kind,
            self.n,
            self.w,
            self.m0,
            self.p,
            self.k_rule.label()
        )
    }

    pub fn gen_params(&self) -> GenParams {
        GenParams::new(
            self.n,
            self.w,
            self.m0,
            self.k_rule.materialize(self.n, self.w),
            self.kind,
        )
    }

    /// Canonical string fed into seed derivation. Uses the exact bits of p
    /// so distinct rates can never collide.
    fn seed_label(&self, trial: usize) -> String {
        format!(
            "{}|{}|{}|{}|{:016x}|{}|{}",
            self.kind,
            self.n,
            self.w,
            self.m0,
            self.p.to_bits(),
            self.k_rule.label(),
            trial
        )
    }
}

/// One run: a cell plus a trial index and its derived seed.
#[derive(Debug, Clone, PartialEq)]
pub struct RunDescriptor {
    pub cell: CellCoord,
    pub trial: usize,
    pub seed: u64,
}

/// Expand a config into the full Cartesian product of its axes, one
/// descriptor per (cell, trial). Every cell is validated and every derived
/// seed checked for collisions up front.
pub fn expand_sweep(cfg: &SweepConfig) -> anyhow::Result<Vec<RunDescriptor>> {
    cfg.validate()?;
    let mut descriptors = Vec::new();
    let mut seen = HashSet::new();
    for &kind in &cfg.kinds {
        for &n in &cfg.n_values {
            for &w in &cfg.w_values {
                for &m0 in &cfg.m0_values {
                    for &p in &cfg.p_values {
                        for rule in &cfg.k_rules {
                            let cell = CellCoord {
                                kind,
                                n,
                                w,
                                m0,
                                p,
                                k_rule: rule.to_rule()?,
                            };
                            cell.gen_params()
                                .validate()
                                .with_context(|| format!("cell {}", cell.id()))?;
                            if !(0.0..=1.0).contains(&p) {
                                bail!("cell {}: activation rate out of [0, 1]", cell.id());
                            }
                            for trial in 0..cfg.trials {
                                let seed = derive_seed(cfg.base_seed, &cell.seed_label(trial));
                                if !seen.insert(seed) {
                                    bail!(
                                        "seed collision at cell {} trial {trial}; \
                                         choose a different base_seed",
                                        cell.id()
                                    );
                                }
                                descriptors.push(RunDescriptor {
                                    cell: cell.clone(),
                                    trial,
                                    seed,
                                });
                            }
                        }
                    }
                }
            }
        }
    }
    if descriptors.is_empty() {
        bail!("config error: the sweep grid is empty");
    }
    Ok(descriptors)
}

/// A cell with its per-trial seeds, as the runner consumes it.
#[derive(Debug, Clone)]
pub struct CellPlan {
    pub coord: CellCoord,
    pub trial_seeds: Vec<u64>,
}

pub fn group_cells(descriptors: &[RunDescriptor]) -> Vec<CellPlan> {
    let mut plans: Vec<CellPlan> = Vec::new();
    for d in descriptors {
        match plans.last_mut() {
            Some(plan) if plan.coord == d.cell => plan.trial_seeds.push(d.seed),
            _ => plans.push(CellPlan {
                coord: d.cell.clone(),
                trial_seeds: vec![d.seed],
            }),
        }
    }
    plans
}

/// Partial cell selector for `simulate --cell W=8,m0=2`.
#[derive(Debug, Clone, Default)]
pub struct CellFilter {
    pub kind: Option<GenKind>,
    pub n: Option<usize>,
    pub w: Option<usize>,
    pub m0: Option<usize>,
    pub p: Option<f64>,
    pub k_rule: Option<KRule>,
}

impl CellFilter {
    pub fn parse(text: &str) -> anyhow::Result<Self> {
        let mut filter = CellFilter::default();
        for part in text.split(',') {
            let (key, value) = part
                .split_once('=')
                .with_context(|| format!("bad cell selector `{part}`, expected key=value"))?;
            let value = value.trim();
            match key.trim().to_ascii_lowercase().as_str() {
                "kind" => filter.kind = Some(value.parse()?),
                "n" => filter.n = Some(value.parse()?),
                "w" => filter.w = Some(value.parse()?),
                "m0" => filter.m0 = Some(value.parse()?),
                "p" => filter.p = Some(value.parse()?),
                "k" => {
                    filter.k_rule = Some(if value == "paper" {
                        KRule::Paper
                    } else {
                        KRule::Fixed(value.parse()?)
                    })
                }
                other => bail!("unknown cell selector key `{other}`"),
            }
        }
        Ok(filter)
    }

    pub fn matches(&self, cell: &CellCoord) -> bool {
        self.kind.is_none_or(|k| k == cell.kind)
            && self.n.is_none_or(|n| n == cell.n)
            && self.w.is_none_or(|w| w == cell.w)
            && self.m0.is_none_or(|m| m == cell.m0)
            && self.p.is_none_or(|p| p == cell.p)
            && self.k_rule.is_none_or(|r| r == cell.k_rule)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal_config() -> SweepConfig {
        SweepConfig {
            kinds: vec![GenKind::Ssc],
            n_values: vec![100],
            w_values: vec![4],
            m0_values: vec![2],
            p_values: vec![1.0],
            k_rules: vec![KRuleSpec::Fixed(1)],
            trials: 1,
            horizon: 10,
            base_seed: 1,
            out_dir: None,
            epidemic: EpidemicSection::default(),
            events: vec![],
            release: None,
            summary_stats: None,
        }
    }

    #[test]
    fn single_cell_single_trial_expands_to_one() {
        let descriptors = expand_sweep(&minimal_config()).unwrap();
        assert_eq!(descriptors.len(), 1);
    }

    #[test]
    fn grid_cell_count_matches_product() {
        let mut cfg = minimal_config();
        cfg.w_values = (1..=20).collect();
        cfg.m0_values = vec![2, 4, 8];
        cfg.k_rules = vec![KRuleSpec::Fixed(1), KRuleSpec::Named("paper".into())];
        cfg.n_values = vec![1000, 10000];
        cfg.kinds = vec![GenKind::Sc, GenKind::Ssc];
        cfg.trials = 1;
        let descriptors = expand_sweep(&cfg).unwrap();
        assert_eq!(descriptors.len(), 20 * 3 * 2 * 2 * 2);
        assert_eq!(descriptors.len(), 480);
    }

    #[test]
    fn release_grid_expands_to_two_hundred() {
        let mut cfg = minimal_config();
        cfg.n_values = vec![1000];
        cfg.w_values = vec![32, 20, 16, 10, 8, 4, 2, 1];
        cfg.m0_values = vec![16, 8, 4, 2, 1];
        cfg.trials = 5;
        cfg.horizon = 100;
        cfg.k_rules = vec![KRuleSpec::Named("paper".into())];
        cfg.p_values = vec![0.2];
        cfg.release = Some(ReleaseSpec { week: 20, p: 1.0 });
        let descriptors = expand_sweep(&cfg).unwrap();
        assert_eq!(descriptors.len(), 8 * 5 * 5);
    }

    #[test]
    fn seeds_are_unique_and_stable() {
        let mut cfg = minimal_config();
        cfg.w_values = vec![1, 2, 4];
        cfg.m0_values = vec![1, 2];
        cfg.trials = 3;
        let a = expand_sweep(&cfg).unwrap();
        let b = expand_sweep(&cfg).unwrap();
        assert_eq!(a, b);
        let seeds: HashSet<u64> = a.iter().map(|d| d.seed).collect();
        assert_eq!(seeds.len(), a.len());
    }

    #[test]
    fn toml_round_trip() {
        let text = r#"
            kinds = ["ssc", "sc"]
            n_values = [1000]
            w_values = [8, 4]
            m0_values = [2]
            p_values = [1.0]
            k_rules = ["paper", 1]
            trials = 2
            horizon = 50
            base_seed = 7

            [epidemic]
            infection_rule = "literal"

            [[events]]
            week = 20
            kind = "set_activation"
            p = 1.0
        "#;
        let cfg = SweepConfig::from_toml(text).unwrap();
        assert_eq!(cfg.kinds, vec![GenKind::Ssc, GenKind::Sc]);
        assert_eq!(cfg.k_rules.len(), 2);
        assert_eq!(cfg.epidemic.infection_rule, InfectionRule::Literal);
        assert_eq!(cfg.events.len(), 1);
        let again = SweepConfig::from_toml(&cfg.to_toml()).unwrap();
        assert_eq!(cfg, again);
    }

    #[test]
    fn inline_event_tables_parse_too() {
        let text = r#"
            kinds = ["ssc"]
            n_values = [100]
            w_values = [4]
            m0_values = [2]
            p_values = [0.2]
            k_rules = [1]
            events = [{week = 20, kind = "set_activation", p = 1.0}]
        "#;
        let cfg = SweepConfig::from_toml(text).unwrap();
        assert_eq!(
            cfg.events,
            vec![EventSpec::SetActivation { week: 20, p: 1.0 }]
        );
    }

    #[test]
    fn rejects_events_combined_with_release() {
        let mut cfg = minimal_config();
        cfg.events = vec![EventSpec::SetActivation { week: 5, p: 0.5 }];
        cfg.release = Some(ReleaseSpec { week: 20, p: 1.0 });
        cfg.horizon = 30;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn rejects_invalid_cells_upfront() {
        let mut cfg = minimal_config();
        cfg.n_values = vec![2];
        cfg.k_rules = vec![KRuleSpec::Fixed(5)];
        cfg.m0_values = vec![4];
        assert!(expand_sweep(&cfg).is_err());
    }

    #[test]
    fn cell_filter_selects() {
        let filter = CellFilter::parse("W=8,m0=2,k=paper").unwrap();
        let cell = CellCoord {
            kind: GenKind::Ssc,
            n: 1000,
            w: 8,
            m0: 2,
            p: 1.0,
            k_rule: KRule::Paper,
        };
        assert!(filter.matches(&cell));
        let other = CellCoord { w: 4, ..cell };
        assert!(!filter.matches(&other));
    }
}
