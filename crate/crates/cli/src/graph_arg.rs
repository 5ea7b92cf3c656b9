use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use graphlhv::Graph;

/// A graph named on the command line plus the bytes its digest is taken over.
pub struct LoadedGraph {
    pub graph: Graph,
    pub source: String,
    pub digest_bytes: Vec<u8>,
}

fn dims(s: &str) -> Option<(usize, usize)> {
    let (a, b) = s.split_once('x')?;
    Some((a.parse().ok()?, b.parse().ok()?))
}

fn family(name: &str, arg: &str) -> Result<Option<Graph>> {
    let size = |s: &str| -> Result<usize> {
        s.parse()
            .with_context(|| format!("bad size {s:?} in graph {name:?}"))
    };
    let pair = |s: &str| dims(s).with_context(|| format!("expected RxC in graph {name:?}"));
    let g = match name {
        "ring" => Graph::ring(size(arg)?)?,
        "chain" => Graph::chain(size(arg)?)?,
        "star" => Graph::star(size(arg)?)?,
        "padded-ring" => Graph::padded_ring(size(arg)?)?,
        "grid" => {
            let (r, c) = pair(arg)?;
            Graph::grid(r, c)?
        }
        "bipartite" => {
            let (a, b) = pair(arg)?;
            Graph::complete_bipartite(a, b)?
        }
        _ => return Ok(None),
    };
    Ok(Some(g))
}

/// Accepts `ring:12`, `chain:7`, `grid:2x3`, `star:5`, `padded-ring:14`,
/// `bipartite:2x3`, the compact forms `ring12` or `grid2x3`, or a path to a
/// JSON graph file or an edge list.
pub fn load(spec: &str) -> Result<LoadedGraph> {
    let named = if let Some((name, arg)) = spec.split_once(':') {
        family(name, arg)?
    } else {
        let split = spec
            .find(|c: char| c.is_ascii_digit())
            .unwrap_or(spec.len());
        let (name, arg) = spec.split_at(split);
        if arg.is_empty() || Path::new(spec).exists() {
            None
        } else {
            family(name, arg)?
        }
    };
    if let Some(graph) = named {
        let digest_bytes = graph.to_json().into_bytes();
        return Ok(LoadedGraph {
            graph,
            source: spec.to_string(),
            digest_bytes,
        });
    }

    let path = Path::new(spec);
    if !path.exists() {
        bail!("graph {spec:?} is neither a known family nor an existing file");
    }
    let bytes = fs::read(path).with_context(|| format!("reading {spec}"))?;
    let text = String::from_utf8(bytes.clone()).with_context(|| format!("{spec} is not UTF-8"))?;
    let graph = if path.extension().is_some_and(|e| e == "json") {
        Graph::from_json(&text)
    } else {
        Graph::from_edge_list(&text)
    }
    .with_context(|| format!("parsing {spec}"))?;
    Ok(LoadedGraph {
        graph,
        source: spec.to_string(),
        digest_bytes: bytes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn named_forms() {
        assert_eq!(load("ring:12").unwrap().graph, Graph::ring(12).unwrap());
        assert_eq!(load("grid2x3").unwrap().graph, Graph::grid(2, 3).unwrap());
        assert_eq!(load("chain2").unwrap().graph, Graph::chain(2).unwrap());
        assert_eq!(
            load("padded-ring:14").unwrap().graph,
            Graph::padded_ring(14).unwrap()
        );
        assert_eq!(
            load("bipartite:2x3").unwrap().graph,
            Graph::complete_bipartite(2, 3).unwrap()
        );
        assert!(load("grid:2").is_err());
        assert!(load("hexagon:6").is_err());
        assert!(load("nope").is_err());
    }
}
