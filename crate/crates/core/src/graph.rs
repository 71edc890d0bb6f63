//! Simple undirected graphs, DIMACS `.col` parsing, seeded random graphs and
//! an exact backtracking three-coloring oracle.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("invalid graph: {0}")]
    Validation(String),
    #[error("coloring does not assign a color to vertex {0}")]
    PartialColoring(u32),
    #[error("vertex {vertex} has color {color}, expected 1, 2 or 3")]
    InvalidColor { vertex: u32, color: u8 },
    #[error("no edge can be drawn on {0} vertex(es); the reduction needs at least one edge")]
    EmptyEdgeSet(u32),
    #[error("edge probability {0} outside [0, 1]")]
    BadProbability(f64),
}

/// Simple graph on vertices `1..=n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Graph {
    n: u32,
    edges: BTreeSet<(u32, u32)>,
}

impl Graph {
    /// Validates and canonicalizes: endpoints sorted, duplicates collapsed.
    pub fn new(n: u32, edges: impl IntoIterator<Item = (u32, u32)>) -> Result<Graph, GraphError> {
        let mut set = BTreeSet::new();
        for (u, v) in edges {
            if u == v {
                return Err(GraphError::Validation(format!("self-loop at vertex {u}")));
            }
            for w in [u, v] {
                if w == 0 || w > n {
                    return Err(GraphError::Validation(format!("vertex {w} out of range 1..={n}")));
                }
            }
            set.insert((u.min(v), u.max(v)));
        }
        Ok(Graph { n, edges: set })
    }

    pub fn vertex_count(&self) -> u32 {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn vertices(&self) -> impl Iterator<Item = u32> {
        1..=self.n
    }

    /// Edges `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.edges.iter().copied()
    }

    pub fn has_edge(&self, u: u32, v: u32) -> bool {
        self.edges.contains(&(u.min(v), u.max(v)))
    }

    /// Graph with vertex `v` renamed to `perm[v - 1]`. `perm` must be a
    /// permutation of `1..=n`.
    pub fn relabeled(&self, perm: &[u32]) -> Result<Graph, GraphError> {
        let mut sorted = perm.to_vec();
        sorted.sort_unstable();
        if sorted != (1..=self.n).collect::<Vec<_>>() {
            return Err(GraphError::Validation("relabeling is not a permutation".into()));
        }
        let map = |v: u32| perm[(v - 1) as usize];
        Graph::new(self.n, self.edges().map(|(u, v)| (map(u), map(v))))
    }

    /// DIMACS text: `p edge n m` followed by one `e u v` line per edge.
    pub fn to_dimacs(&self, comment: Option<&str>) -> String {
        let mut out = String::new();
        if let Some(c) = comment {
            for line in c.lines() {
                let _ = writeln!(out, "c {line}");
            }
        }
        let _ = writeln!(out, "p edge {} {}", self.n, self.edges.len());
        for (u, v) in self.edges() {
            let _ = writeln!(out, "e {u} {v}");
        }
        out
    }
}

/// Map from vertex to color in `{1, 2, 3}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Coloring(BTreeMap<u32, u8>);

impl Coloring {
    pub fn new() -> Self {
        Self::default()
    }

    /// `colors[i]` is the color of vertex `i + 1`.
    pub fn from_slice(colors: &[u8]) -> Self {
        Coloring((1..).zip(colors.iter().copied()).collect())
    }

    pub fn set(&mut self, vertex: u32, color: u8) {
        self.0.insert(vertex, color);
    }

    pub fn get(&self, vertex: u32) -> Option<u8> {
        self.0.get(&vertex).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, u8)> + '_ {
        self.0.iter().map(|(&v, &c)| (v, c))
    }

    /// Colors of vertices `1..=n`, failing on the first missing or invalid one.
    pub fn dense(&self, n: u32) -> Result<Vec<u8>, GraphError> {
        (1..=n)
            .map(|v| match self.get(v) {
                None => Err(GraphError::PartialColoring(v)),
                Some(c) if !(1..=3).contains(&c) => Err(GraphError::InvalidColor { vertex: v, color: c }),
                Some(c) => Ok(c),
            })
            .collect()
    }
}

/// Parses the DIMACS `.col` subset: `c` comment lines, one `p edge <n> <m>`
/// header (`p col` is accepted too), then `e <u> <v>` lines.
///
/// The header's edge count may match either the number of `e` lines or the
/// number of distinct edges after duplicates collapse.
pub fn parse_graph(text: &[u8]) -> Result<Graph, GraphError> {
    let text = std::str::from_utf8(text).map_err(|_| GraphError::Parse { line: 0, msg: "input is not UTF-8".into() })?;
    let mut header: Option<(u32, usize)> = None;
    let mut edge_lines = Vec::new();
    for (idx, raw) in text.split('\n').enumerate() {
        let line_no = idx + 1;
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        let tokens: Vec<&str> = line.split_whitespace().collect();
        let Some(&kind) = tokens.first() else { continue };
        let parse_err = |msg: &str| GraphError::Parse { line: line_no, msg: msg.to_string() };
        let number = |at: usize, what: &str| -> Result<u64, GraphError> {
            tokens
                .get(at)
                .ok_or_else(|| parse_err(&format!("missing {what}")))?
                .parse::<u64>()
                .map_err(|_| parse_err(&format!("{what} is not a non-negative integer")))
        };
        match kind {
            "c" => continue,
            "p" => {
                if header.is_some() {
                    return Err(parse_err("second problem line"));
                }
                if !matches!(tokens.get(1), Some(&"edge") | Some(&"col")) {
                    return Err(parse_err("expected `p edge <n> <m>`"));
                }
                let n = number(2, "vertex count")?;
                let m = number(3, "edge count")?;
                if tokens.len() > 4 {
                    return Err(parse_err("trailing tokens"));
                }
                let n = u32::try_from(n).map_err(|_| parse_err("vertex count too large"))?;
                header = Some((n, m as usize));
            }
            "e" => {
                if header.is_none() {
                    return Err(parse_err("edge before problem line"));
                }
                let u = number(1, "endpoint")?;
                let v = number(2, "endpoint")?;
                if tokens.len() > 3 {
                    return Err(parse_err("trailing tokens"));
                }
                let to_u32 = |x: u64| u32::try_from(x).map_err(|_| GraphError::Validation(format!("vertex {x} out of range")));
                edge_lines.push((to_u32(u)?, to_u32(v)?));
            }
            other => return Err(parse_err(&format!("unknown line type {other:?}"))),
        }
    }
    let (n, m) = header.ok_or(GraphError::Parse { line: 0, msg: "missing problem line".into() })?;
    let graph = Graph::new(n, edge_lines.iter().copied())?;
    if m != edge_lines.len() && m != graph.edge_count() {
        return Err(GraphError::Validation(format!(
            "header declares {m} edges, found {} edge lines",
            edge_lines.len()
        )));
    }
    Ok(graph)
}

/// True iff every vertex has a color in `{1,2,3}` and no edge is monochromatic.
pub fn is_three_coloring(g: &Graph, phi: &Coloring) -> Result<bool, GraphError> {
    let colors = phi.dense(g.vertex_count())?;
    Ok(g.edges().all(|(u, v)| colors[(u - 1) as usize] != colors[(v - 1) as usize]))
}

/// Depth-first search over vertices in index order, colors tried 1, 2, 3.
/// Vertex 1 only ever gets color 1 (color permutation symmetry).
pub fn three_color_backtracking(g: &Graph) -> Option<Coloring> {
    let n = g.vertex_count() as usize;
    let mut adj = vec![Vec::new(); n];
    for (u, v) in g.edges() {
        adj[(u - 1) as usize].push((v - 1) as usize);
        adj[(v - 1) as usize].push((u - 1) as usize);
    }
    let mut colors = vec![0u8; n];

    fn extend(at: usize, adj: &[Vec<usize>], colors: &mut [u8]) -> bool {
        if at == colors.len() {
            return true;
        }
        let max_color = if at == 0 { 1 } else { 3 };
        for c in 1..=max_color {
            if adj[at].iter().any(|&w| colors[w] == c) {
                continue;
            }
            colors[at] = c;
            if extend(at + 1, adj, colors) {
                return true;
            }
        }
        colors[at] = 0;
        false
    }

    extend(0, &adj, &mut colors).then(|| Coloring::from_slice(&colors))
}

/// Erdős–Rényi `G(n, p)` from a seeded ChaCha8 stream.
///
/// The generator is `ChaCha8Rng::seed_from_u64(seed)`. Pairs `(u, v)`, `u < v`,
/// are visited in lexicographic order; each draws one `u64` and the edge is kept
/// iff `(x >> 11) * 2^-53 < p`. If no edge was kept, one more `u64` picks the
/// pair with index `x mod C(n, 2)` in the same order.
pub fn random_graph(n: u32, p: f64, seed: u64) -> Result<Graph, GraphError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(GraphError::BadProbability(p));
    }
    if n < 2 {
        return Err(GraphError::EmptyEdgeSet(n));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pairs: Vec<(u32, u32)> = (1..=n).flat_map(|u| (u + 1..=n).map(move |v| (u, v))).collect();
    let mut edges: Vec<(u32, u32)> = pairs
        .iter()
        .copied()
        .filter(|_| ((rng.next_u64() >> 11) as f64) * (1.0 / (1u64 << 53) as f64) < p)
        .collect();
    if edges.is_empty() {
        let idx = rng.next_u64() % pairs.len() as u64;
        edges.push(pairs[idx as usize]);
    }
    Graph::new(n, edges)
}
