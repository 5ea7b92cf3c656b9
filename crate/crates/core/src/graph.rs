//! Simple undirected graphs, the graph families used throughout the crate, and
//! structural queries.
//!
//! Sites are 0-based inside the library. Every external surface (graph files,
//! CLI, JSON reports, `Display` impls) uses 1-based node labels, so node `1`
//! in a file is site `0` here.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest graph accepted by [`Graph::automorphisms`].
pub const AUTOMORPHISM_NODE_LIMIT: usize = 24;
/// Largest automorphism group [`Graph::automorphisms`] will materialize.
pub const AUTOMORPHISM_GROUP_LIMIT: usize = 1 << 20;

/// Row-major label (1-based) to the clockwise labeling of the 2x3 cluster
/// drawn with the top row `1 2 3` and the bottom row `6 5 4`.
///
/// Only the two bottom corners differ between the two conventions.
pub const CLOCKWISE_2X3_FROM_ROW_MAJOR: [usize; 6] = [1, 2, 3, 6, 5, 4];

#[derive(Clone, PartialEq, Eq)]
pub struct Graph {
    adj: Vec<Vec<usize>>,
    edges: BTreeSet<(usize, usize)>,
}

impl Graph {
    /// Builds a graph on sites `0..n` from 0-based edges.
    ///
    /// Rejects self-loops, out-of-range endpoints and repeated pairs in either
    /// orientation.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("graph must have at least one node"));
        }
        let mut g = Graph {
            adj: vec![Vec::new(); n],
            edges: BTreeSet::new(),
        };
        for (u, v) in edges {
            g.insert_edge(u, v)?;
        }
        for nb in &mut g.adj {
            nb.sort_unstable();
        }
        Ok(g)
    }

    fn insert_edge(&mut self, u: usize, v: usize) -> Result<()> {
        let n = self.adj.len();
        if u >= n || v >= n {
            return Err(Error::invalid(format!(
                "edge {{{}, {}}} has an endpoint outside 1..={n}",
                u + 1,
                v + 1
            )));
        }
        if u == v {
            return Err(Error::invalid(format!("self-loop at node {}", u + 1)));
        }
        let key = (u.min(v), u.max(v));
        if !self.edges.insert(key) {
            return Err(Error::invalid(format!(
                "duplicate edge {{{}, {}}}",
                key.0 + 1,
                key.1 + 1
            )));
        }
        self.adj[u].push(v);
        self.adj[v].push(u);
        Ok(())
    }

    /// Cycle `1-2-...-n-1`.
    pub fn ring(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::invalid(format!("ring needs n >= 3, got {n}")));
        }
        Graph::new(n, (0..n).map(|j| (j, (j + 1) % n)))
    }

    /// Path `1-2-...-n` (one-dimensional cluster).
    pub fn chain(n: usize) -> Result<Self> {
        Graph::new(n, (1..n).map(|j| (j - 1, j)))
    }

    /// Node 1 adjacent to every other node.
    pub fn star(n: usize) -> Result<Self> {
        Graph::new(n, (1..n).map(|j| (0, j)))
    }

    /// `K_{a,b}` with nodes `1..=a` on one side.
    pub fn complete_bipartite(a: usize, b: usize) -> Result<Self> {
        if a == 0 || b == 0 {
            return Err(Error::invalid("complete bipartite sides must be non-empty"));
        }
        Graph::new(a + b, (0..a).flat_map(|u| (a..a + b).map(move |v| (u, v))))
    }

    /// Square lattice with row-major numbering: node `r*cols + c + 1`.
    pub fn grid(rows: usize, cols: usize) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::invalid("grid dimensions must be positive"));
        }
        let id = |r: usize, c: usize| r * cols + c;
        let mut edges = Vec::new();
        for r in 0..rows {
            for c in 0..cols {
                if c + 1 < cols {
                    edges.push((id(r, c), id(r, c + 1)));
                }
                if r + 1 < rows {
                    edges.push((id(r, c), id(r + 1, c)));
                }
            }
        }
        Graph::new(rows * cols, edges)
    }

    /// A ring on nodes `1..=n-r` plus `r = (n - 12) mod 24` isolated nodes
    /// `n-r+1..=n`, so that the ring size is `12f` with `f` odd.
    pub fn padded_ring(n: usize) -> Result<Self> {
        if n < 12 {
            return Err(Error::invalid(format!(
                "padded ring needs n >= 12, got {n}"
            )));
        }
        let ring = n - padding(n);
        Graph::new(n, (0..ring).map(|j| (j, (j + 1) % ring)))
    }

    /// Parses a whitespace edge list: the first data line holds the node
    /// count, each following line one 1-based pair `u v`. Blank lines and
    /// `#` comments are ignored.
    pub fn from_edge_list(text: &str) -> Result<Self> {
        let mut n = None;
        let mut g: Option<Graph> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let parse_err = |message: String| Error::Parse {
                line: line_no,
                message,
            };
            let nums = line
                .split_whitespace()
                .map(|t| {
                    t.parse::<usize>()
                        .map_err(|_| parse_err(format!("not a non-negative integer: {t:?}")))
                })
                .collect::<Result<Vec<_>>>()?;
            match (n, nums.as_slice()) {
                (None, [count]) => {
                    n = Some(*count);
                    g = Some(Graph::new(*count, []).map_err(|e| parse_err(e.to_string()))?);
                }
                (None, _) => return Err(parse_err("expected the node count".into())),
                (Some(_), [u, v]) => {
                    if *u == 0 || *v == 0 {
                        return Err(parse_err("nodes are 1-indexed".into()));
                    }
                    let graph = g.as_mut().expect("node count seen");
                    graph
                        .insert_edge(u - 1, v - 1)
                        .map_err(|e| parse_err(e.to_string()))?;
                }
                (Some(_), _) => return Err(parse_err("expected an edge `u v`".into())),
            }
        }
        let mut g = g.ok_or(Error::Parse {
            line: 0,
            message: "empty edge list".into(),
        })?;
        for nb in &mut g.adj {
            nb.sort_unstable();
        }
        Ok(g)
    }

    /// Parses the JSON graph file format `{"n": N, "edges": [[u, v], ...]}`.
    pub fn from_json(text: &str) -> Result<Self> {
        let file: GraphFile = serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            message: e.to_string(),
        })?;
        file.try_into()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&GraphFile::from(self)).expect("graph serializes")
    }

    /// Applies a relabeling given as 1-based `new_label[old_label - 1]`.
    pub fn relabeled(&self, new_label: &[usize]) -> Result<Self> {
        let n = self.n();
        let mut seen = vec![false; n];
        if new_label.len() != n
            || !new_label
                .iter()
                .all(|&l| l >= 1 && l <= n && !std::mem::replace(&mut seen[l - 1], true))
        {
            return Err(Error::invalid("relabeling must be a permutation of 1..=n"));
        }
        Graph::new(
            n,
            self.edges
                .iter()
                .map(|&(u, v)| (new_label[u] - 1, new_label[v] - 1)),
        )
    }

    pub fn n(&self) -> usize {
        self.adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edges as 0-based pairs `(u, v)` with `u < v`, in sorted order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    /// Sorted neighbours of site `j`.
    pub fn neighbors(&self, j: usize) -> &[usize] {
        &self.adj[j]
    }

    pub fn degree(&self, j: usize) -> usize {
        self.adj[j].len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.edges.contains(&(u.min(v), u.max(v)))
    }

    /// True iff the edge set is exactly the path `0-1-...-(n-1)`.
    pub fn is_chain(&self) -> bool {
        self.edges.len() + 1 == self.n() && (1..self.n()).all(|j| self.has_edge(j - 1, j))
    }

    /// BFS distances from `j`; `None` for unreachable sites.
    pub fn distances_from(&self, j: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.n()];
        let mut queue = VecDeque::from([j]);
        dist[j] = Some(0);
        while let Some(u) = queue.pop_front() {
            let du = dist[u].expect("queued sites have a distance");
            for &v in &self.adj[u] {
                if dist[v].is_none() {
                    dist[v] = Some(du + 1);
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    /// All sites within `d` edges of `j`, including `j`, sorted.
    pub fn ball(&self, j: usize, d: usize) -> Vec<usize> {
        self.distances_from(j)
            .into_iter()
            .enumerate()
            .filter_map(|(v, dv)| dv.filter(|&dv| dv <= d).map(|_| v))
            .collect()
    }

    /// Connected component of `j`, sorted.
    pub fn component(&self, j: usize) -> Vec<usize> {
        self.ball(j, usize::MAX)
    }

    /// Largest finite distance between two sites (0 for a single node).
    pub fn diameter(&self) -> usize {
        (0..self.n())
            .flat_map(|j| self.distances_from(j).into_iter().flatten())
            .max()
            .unwrap_or(0)
    }

    /// Every permutation `p` (as `p[site] = image`) preserving edges and colors.
    ///
    /// Exhaustive backtracking: sites are placed in BFS order so each new site
    /// (except component roots) has an already-placed neighbour, and candidates
    /// are pruned on color, degree and adjacency to placed sites.
    pub fn automorphisms(&self, coloring: &NodeColoring) -> Result<Vec<Vec<usize>>> {
        let n = self.n();
        if n > AUTOMORPHISM_NODE_LIMIT {
            return Err(Error::too_big(
                "automorphism search node count",
                n,
                AUTOMORPHISM_NODE_LIMIT,
            ));
        }
        if coloring.len() != n {
            return Err(Error::invalid(format!(
                "coloring has {} entries for {n} nodes",
                coloring.len()
            )));
        }
        let mut order = Vec::with_capacity(n);
        let mut placed = vec![false; n];
        for root in 0..n {
            if !placed[root] {
                for v in self.component(root) {
                    placed[v] = true;
                }
                let dist = self.distances_from(root);
                let mut comp: Vec<usize> = (0..n).filter(|&v| dist[v].is_some()).collect();
                comp.sort_by_key(|&v| (dist[v], v));
                order.extend(comp);
            }
        }
        let mut search = AutSearch {
            g: self,
            colors: coloring,
            order: &order,
            image: vec![usize::MAX; n],
            used: vec![false; n],
            found: Vec::new(),
        };
        search.extend(0)?;
        search.found.sort();
        Ok(search.found)
    }

    /// Orbits of the color-preserving automorphism group, each sorted, listed
    /// by smallest member.
    pub fn orbits(&self, coloring: &NodeColoring) -> Result<Vec<Vec<usize>>> {
        let auts = self.automorphisms(coloring)?;
        let mut orbit_of = vec![usize::MAX; self.n()];
        let mut orbits = Vec::new();
        for j in 0..self.n() {
            if orbit_of[j] != usize::MAX {
                continue;
            }
            let members: BTreeSet<usize> = auts.iter().map(|p| p[j]).collect();
            for &m in &members {
                orbit_of[m] = orbits.len();
            }
            orbits.push(members.into_iter().collect());
        }
        Ok(orbits)
    }
}

struct AutSearch<'a> {
    g: &'a Graph,
    colors: &'a NodeColoring,
    order: &'a [usize],
    image: Vec<usize>,
    used: Vec<bool>,
    found: Vec<Vec<usize>>,
}

impl AutSearch<'_> {
    fn extend(&mut self, depth: usize) -> Result<()> {
        if depth == self.order.len() {
            if self.found.len() >= AUTOMORPHISM_GROUP_LIMIT {
                return Err(Error::too_big(
                    "automorphism group order",
                    self.found.len() + 1,
                    AUTOMORPHISM_GROUP_LIMIT,
                ));
            }
            self.found.push(self.image.clone());
            return Ok(());
        }
        let v = self.order[depth];
        for cand in 0..self.g.n() {
            if self.used[cand]
                || self.colors.color(cand) != self.colors.color(v)
                || self.g.degree(cand) != self.g.degree(v)
            {
                continue;
            }
            let consistent = self.order[..depth]
                .iter()
                .all(|&u| self.g.has_edge(u, v) == self.g.has_edge(self.image[u], cand));
            if !consistent {
                continue;
            }
            self.image[v] = cand;
            self.used[cand] = true;
            self.extend(depth + 1)?;
            self.used[cand] = false;
            self.image[v] = usize::MAX;
        }
        Ok(())
    }
}

/// Number of isolated nodes added by [`Graph::padded_ring`].
pub fn padding(n: usize) -> usize {
    (n - 12) % 24
}

impl fmt::Debug for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Graph(n={}, edges={})", self.n(), self)
    }
}

/// Renders the edge set with 1-based labels, e.g. `{1,2} {2,3}`.
impl fmt::Display for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for &(u, v) in &self.edges {
            if !first {
                f.write_str(" ")?;
            }
            first = false;
            write!(f, "{{{},{}}}", u + 1, v + 1)?;
        }
        Ok(())
    }
}

/// Per-node labels; automorphisms must map each node to one of equal label.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct NodeColoring(Vec<u32>);

impl NodeColoring {
    pub fn uniform(n: usize) -> Self {
        NodeColoring(vec![0; n])
    }

    pub fn new(colors: Vec<u32>) -> Self {
        NodeColoring(colors)
    }

    pub fn color(&self, j: usize) -> u32 {
        self.0[j]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// On-disk graph representation with 1-based nodes.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct GraphFile {
    pub n: usize,
    pub edges: Vec<[usize; 2]>,
}

impl From<&Graph> for GraphFile {
    fn from(g: &Graph) -> Self {
        GraphFile {
            n: g.n(),
            edges: g.edges().map(|(u, v)| [u + 1, v + 1]).collect(),
        }
    }
}

impl TryFrom<GraphFile> for Graph {
    type Error = Error;

    fn try_from(file: GraphFile) -> Result<Self> {
        if let Some(bad) = file.edges.iter().find(|e| e[0] == 0 || e[1] == 0) {
            return Err(Error::invalid(format!(
                "nodes are 1-indexed, found edge [{}, {}]",
                bad[0], bad[1]
            )));
        }
        Graph::new(file.n, file.edges.iter().map(|e| (e[0] - 1, e[1] - 1)))
    }
}
