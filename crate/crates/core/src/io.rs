//! Edge-list text format for generated graphs.
//!
//! Layout: a header line `N W m0 K kind seed`, one `u v` line per edge in
//! sorted order, then a trailing `#clique v k` block recording initial-clique
//! membership. Used by the CLI `generate` subcommand and as golden-file
//! fixtures.

use std::str::FromStr;

use crate::error::{Error, Result};
use crate::graph::{GenKind, GenParams, Graph};
use crate::rng::digest_hex;

/// Serialize a graph (with the seed that produced it) to the text format.
pub fn edge_list_string(g: &Graph, seed: u64) -> String {
    let p = g.params();
    let mut out = format!("{} {} {} {} {} {}\n", p.n, p.w, p.m0, p.k, p.kind, seed);
    out.push_str(&body_string(g));
    out
}

fn body_string(g: &Graph) -> String {
    let mut edges: Vec<_> = g.edges().to_vec();
    edges.sort_unstable();
    let mut out = String::new();
    for (a, b) in edges {
        out.push_str(&format!("{a} {b}\n"));
    }
    for v in 0..g.n_nodes() {
        if let Some(k) = g.clique_of(v) {
            out.push_str(&format!("#clique {v} {k}\n"));
        }
    }
    out
}

/// Stable fingerprint of a graph's structure (edges and clique membership;
/// the header is excluded so the hash identifies the graph itself).
pub fn graph_digest(g: &Graph) -> String {
    digest_hex(body_string(g).as_bytes())
}

/// Parse the text format back into a graph and its generation seed.
pub fn parse_edge_list(text: &str) -> Result<(Graph, u64)> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty edge list".into()))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 6 {
        return Err(Error::Parse(format!(
            "header must be `N W m0 K kind seed`, got `{header}`"
        )));
    }
    let n = parse_num::<usize>(fields[0], "N")?;
    let w = parse_num::<usize>(fields[1], "W")?;
    let m0 = parse_num::<usize>(fields[2], "m0")?;
    let k = parse_num::<usize>(fields[3], "K")?;
    let kind = GenKind::from_str(fields[4])?;
    let seed = parse_num::<u64>(fields[5], "seed")?;

    let mut g = Graph::new(GenParams::new(n, w, m0, k, kind));
    for line in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("#clique ") {
            let parts: Vec<&str> = rest.split_whitespace().collect();
            if parts.len() != 2 {
                return Err(Error::Parse(format!("bad clique line `{line}`")));
            }
            let v = parse_num::<usize>(parts[0], "clique node")?;
            let clique = parse_num::<usize>(parts[1], "clique index")?;
            if v >= n {
                return Err(Error::Parse(format!("clique node {v} out of range")));
            }
            g.set_clique(v, clique);
        } else {
            let parts: Vec<&str> = line.split_whitespace().collect();
            if parts.len() != 2 {
                return Err(Error::Parse(format!("bad edge line `{line}`")));
            }
            let a = parse_num::<usize>(parts[0], "edge endpoint")?;
            let b = parse_num::<usize>(parts[1], "edge endpoint")?;
            g.add_edge(a, b)
                .map_err(|e| Error::Parse(format!("edge line `{line}`: {e}")))?;
        }
    }
    validate_cliques(&g)?;
    Ok((g, seed))
}

fn parse_num<T: FromStr>(s: &str, what: &str) -> Result<T> {
    s.parse()
        .map_err(|_| Error::Parse(format!("bad {what}: `{s}`")))
}

/// Every clique must be pairwise connected.
fn validate_cliques(g: &Graph) -> Result<()> {
    let mut members: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for v in 0..g.n_nodes() {
        if let Some(k) = g.clique_of(v) {
            members.entry(k).or_default().push(v);
        }
    }
    for (k, nodes) in members {
        for (i, &a) in nodes.iter().enumerate() {
            for &b in &nodes[i + 1..] {
                if !g.contains_edge(a, b) {
                    return Err(Error::Parse(format!(
                        "clique {k} is not pairwise connected: missing edge ({a}, {b})"
                    )));
                }
            }
        }
    }
    Ok(())
}
