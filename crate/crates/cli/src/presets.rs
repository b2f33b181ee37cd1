//! Named sweep presets mirroring the main experiments, plus `*_small`
//! desk-scale variants (N = 1000 only) that finish in minutes.

use clusterwave_core::graph::GenKind;

use crate::config::{EventSpec, KRuleSpec, ReleaseSpec, SummaryStat, SweepConfig};

pub const PRESET_NAMES: &[&str] = &[
    "table1",
    "table1_small",
    "table3",
    "table3_small",
    "fig7",
    "fig7_small",
    "grid480",
    "grid480_small",
    "structural_change",
    "structural_change_small",
    "release",
    "release_small",
];

const TABLE_W: [usize; 9] = [32, 20, 16, 10, 8, 6, 4, 2, 1];
const TABLE_M0: [usize; 5] = [1, 2, 4, 8, 16];
const COARSE_W: [usize; 8] = [32, 20, 16, 10, 8, 4, 2, 1];
// 20-value fine grid for the wide sweep; the table grids above keep the
// published 9-value layout
const FINE_W: [usize; 20] = [
    1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 14, 16, 18, 20, 22, 24, 28, 32,
];

fn base(kinds: Vec<GenKind>, n_values: Vec<usize>) -> SweepConfig {
    SweepConfig {
        kinds,
        n_values,
        w_values: TABLE_W.to_vec(),
        m0_values: TABLE_M0.to_vec(),
        p_values: vec![1.0],
        k_rules: vec![KRuleSpec::Fixed(1), KRuleSpec::Named("paper".into())],
        trials: 10,
        horizon: 100,
        base_seed: 42,
        out_dir: None,
        epidemic: Default::default(),
        events: vec![],
        release: None,
        summary_stats: None,
    }
}

pub fn preset(name: &str) -> Option<SweepConfig> {
    let both_kinds = vec![GenKind::Sc, GenKind::Ssc];
    let full_n = vec![1000, 10000];
    let small_n = vec![1000];
    let cfg = match name {
        // peak-height tables over the full W x m0 grid
        "table1" | "table1_small" => {
            let n = if name.ends_with("_small") { small_n } else { full_n };
            let mut cfg = base(both_kinds, n);
            cfg.summary_stats = Some(vec![SummaryStat::Peak]);
            cfg
        }
        // average infection-week tables over the same grid
        "table3" | "table3_small" => {
            let n = if name.ends_with("_small") { small_n } else { full_n };
            let mut cfg = base(both_kinds, n);
            cfg.summary_stats = Some(vec![SummaryStat::Timing]);
            cfg
        }
        // the two-step growth view: mid-range m0, both kinds and K rules
        "fig7" | "fig7_small" => {
            let n = if name.ends_with("_small") { small_n } else { full_n };
            let mut cfg = base(both_kinds, n);
            cfg.m0_values = vec![2, 4, 8];
            cfg.summary_stats = Some(vec![SummaryStat::Peak]);
            cfg
        }
        // the 480-cell wide sweep: 20 W values, 3 m0 values, both K rules,
        // both N, both kinds
        "grid480" | "grid480_small" => {
            let n = if name.ends_with("_small") { small_n } else { full_n };
            let mut cfg = base(both_kinds, n);
            cfg.w_values = FINE_W.to_vec();
            cfg.m0_values = vec![2, 4, 8];
            cfg
        }
        // week-20 swap from multiple initial cliques to a single one
        "structural_change" | "structural_change_small" => {
            let n = if name.ends_with("_small") { small_n } else { full_n };
            let mut cfg = base(vec![GenKind::Ssc], n);
            cfg.w_values = COARSE_W.to_vec();
            cfg.m0_values = vec![16, 8, 4, 2, 1];
            cfg.k_rules = vec![KRuleSpec::Named("paper".into())];
            cfg.events = vec![EventSpec::StructuralChange {
                week: 20,
                k: Some(1),
                k_rule: None,
            }];
            cfg
        }
        // restriction release: p 0.2 -> 1.0 at week 20, five trials
        "release" | "release_small" => {
            let n = if name.ends_with("_small") { small_n } else { vec![10000] };
            let mut cfg = base(vec![GenKind::Ssc], n);
            cfg.w_values = COARSE_W.to_vec();
            cfg.m0_values = vec![16, 8, 4, 2, 1];
            cfg.k_rules = vec![KRuleSpec::Named("paper".into())];
            cfg.p_values = vec![0.2];
            cfg.trials = 5;
            cfg.release = Some(ReleaseSpec { week: 20, p: 1.0 });
            cfg
        }
        _ => return None,
    };
    Some(cfg)
}
