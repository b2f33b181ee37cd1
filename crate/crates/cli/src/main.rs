//! clusterwave: generate constrained scale-free contact networks, simulate
//! weekly virus spread on them, sweep parameter grids, and analyze the
//! resulting case series.

use std::fs;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use clusterwave_cli::config::{expand_sweep, group_cells, CellFilter, SweepConfig};
use clusterwave_cli::presets::{preset, PRESET_NAMES};
use clusterwave_cli::sweep::{analyze_tree, run_sweep};
use clusterwave_core::graph::{GenKind, GenParams};
use clusterwave_core::io::edge_list_string;
use clusterwave_core::netgen::{generate, KRule};

#[derive(Parser)]
#[command(name = "clusterwave", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate one contact network and write it as an edge-list file.
    Generate {
        /// Generator: sfn, sc, or ssc.
        #[arg(long)]
        kind: GenKindArg,
        /// Node count N.
        #[arg(long)]
        n: usize,
        /// Acceptance cap W.
        #[arg(long)]
        w: usize,
        /// Chosen-contact count m0.
        #[arg(long)]
        m0: usize,
        /// Initial clique count K.
        #[arg(long, conflicts_with = "k_rule")]
        k: Option<usize>,
        /// Use the built-in clique-count rule instead of a fixed K.
        #[arg(long, value_parser = ["paper"])]
        k_rule: Option<String>,
        #[arg(long)]
        seed: u64,
        /// Output path for the edge list.
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a single cell of a configured grid (all its trials).
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Cell selector like "W=8,m0=2" when the config spans several cells.
        #[arg(long)]
        cell: Option<String>,
        /// Output directory (overrides the config's out_dir).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a full parameter sweep from a preset or a config file.
    Sweep {
        #[arg(long, conflicts_with = "config")]
        preset: Option<String>,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output directory (overrides the config's out_dir).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Recompute the analysis tables from a stored result tree.
    Analyze {
        /// Result tree produced by `sweep` or `simulate`.
        #[arg(long = "in")]
        tree: PathBuf,
    },
}

#[derive(Clone, Copy)]
struct GenKindArg(GenKind);

impl std::str::FromStr for GenKindArg {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        s.parse().map(GenKindArg).map_err(|e| e.to_string())
    }
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match Cli::parse().command {
        Command::Generate {
            kind,
            n,
            w,
            m0,
            k,
            k_rule,
            seed,
            out,
        } => {
            let rule = match (k, k_rule) {
                (Some(k), None) => KRule::Fixed(k),
                (None, Some(_)) => KRule::Paper,
                (None, None) => KRule::Fixed(1),
                (Some(_), Some(_)) => unreachable!("clap conflicts_with"),
            };
            let params = GenParams::new(n, w, m0, rule.materialize(n, w), kind.0);
            let graph = generate(&params, seed)?;
            fs::write(&out, edge_list_string(&graph, seed))
                .with_context(|| format!("writing {}", out.display()))?;
            println!(
                "wrote {} ({} nodes, {} edges, K = {})",
                out.display(),
                graph.n_nodes(),
                graph.edge_count(),
                params.k
            );
        }
        Command::Simulate { config, cell, out } => {
            let mut cfg = SweepConfig::from_toml(
                &fs::read_to_string(&config)
                    .with_context(|| format!("reading {}", config.display()))?,
            )?;
            if let Some(selector) = cell {
                let filter = CellFilter::parse(&selector)?;
                restrict_to_cell(&mut cfg, &filter)?;
            } else {
                let cells = group_cells(&expand_sweep(&cfg)?).len();
                if cells != 1 {
                    bail!("config spans {cells} cells; pick one with --cell W=..,m0=..");
                }
            }
            let out_dir = resolve_out(out, &cfg, "results/simulate")?;
            let manifest = run_sweep(&cfg, &out_dir)?;
            report(&manifest, &out_dir);
        }
        Command::Sweep {
            preset: preset_name,
            config,
            out,
        } => {
            let cfg = match (preset_name, config) {
                (Some(name), None) => preset(&name).with_context(|| {
                    format!("unknown preset `{name}`; available: {}", PRESET_NAMES.join(", "))
                })?,
                (None, Some(path)) => SweepConfig::from_toml(
                    &fs::read_to_string(&path)
                        .with_context(|| format!("reading {}", path.display()))?,
                )?,
                (None, None) => bail!("give either --preset <name> or --config <file>"),
                (Some(_), Some(_)) => unreachable!("clap conflicts_with"),
            };
            let out_dir = resolve_out(out, &cfg, "results/sweep")?;
            let manifest = run_sweep(&cfg, &out_dir)?;
            report(&manifest, &out_dir);
        }
        Command::Analyze { tree } => {
            let summary = analyze_tree(&tree)?;
            println!(
                "analyzed {} cells into {}/analysis",
                summary.cells,
                tree.display()
            );
            if let Some(eligible) = summary.release_eligible {
                match summary.release_pearson {
                    Some(r) => println!("release: {eligible} eligible cases, corr(X, Y) = {r:.3}"),
                    None => println!("release: {eligible} eligible cases, correlation undefined"),
                }
            }
        }
    }
    Ok(())
}

/// Narrow a config to the single cell matched by the filter.
fn restrict_to_cell(cfg: &mut SweepConfig, filter: &CellFilter) -> Result<()> {
    let cells = group_cells(&expand_sweep(cfg)?);
    let matched: Vec<_> = cells.iter().filter(|c| filter.matches(&c.coord)).collect();
    match matched.len() {
        0 => bail!("no grid cell matches the selector"),
        1 => {
            let coord = &matched[0].coord;
            cfg.kinds = vec![coord.kind];
            cfg.n_values = vec![coord.n];
            cfg.w_values = vec![coord.w];
            cfg.m0_values = vec![coord.m0];
            cfg.p_values = vec![coord.p];
            cfg.k_rules = vec![match coord.k_rule {
                KRule::Fixed(k) => clusterwave_cli::config::KRuleSpec::Fixed(k),
                KRule::Paper => clusterwave_cli::config::KRuleSpec::Named("paper".into()),
            }];
            Ok(())
        }
        n => bail!("selector matches {n} cells; add more keys (kind=, n=, w=, m0=, p=, k=)"),
    }
}

fn resolve_out(flag: Option<PathBuf>, cfg: &SweepConfig, fallback: &str) -> Result<PathBuf> {
    Ok(flag
        .or_else(|| cfg.out_dir.clone())
        .unwrap_or_else(|| PathBuf::from(fallback)))
}

fn report(manifest: &clusterwave_cli::outputs::Manifest, out_dir: &std::path::Path) {
    let failed = manifest.cells.iter().filter(|c| c.status != "ok").count();
    println!(
        "{} cells, {} runs -> {} ({} failed)",
        manifest.cell_count,
        manifest.run_count,
        out_dir.display(),
        failed
    );
    if let Some(eligible) = manifest.analysis.release_eligible {
        match manifest.analysis.release_pearson {
            Some(r) => println!("release: {eligible} eligible cases, corr(X, Y) = {r:.3}"),
            None => println!("release: {eligible} eligible cases, correlation undefined"),
        }
    }
}
