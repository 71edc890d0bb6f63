//! The three-coloring to CSSP reduction.
//!
//! For a graph with `n` vertices and `m` edges and `t = 1/(4(m+n)^3)`, the
//! instance matrix has rows `V ∪ {1,2,3} ∪ {ε}` and columns `V^1 ∪ V^2 ∪ V^3 ∪ E`:
//!
//! | row \ column | `v^i`                  | `e`                       |
//! |--------------|------------------------|---------------------------|
//! | `u ∈ V`      | 1 if `u = v`, else 0   | `t^2` if `u ∈ e`, else 0  |
//! | color `j`    | `t^3` if `j = i`, else 0 | `t^5`                   |
//! | `ε`          | 0                      | `t`                       |
//!
//! The graph is three-colorable iff some `n` columns leave a squared residual
//! of at most `m t^2 + 4n t^6 + m t^10`.

use std::collections::BTreeSet;
use std::fmt;
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::graph::{is_three_coloring, Coloring, Graph, GraphError};
use crate::linalg::{format_rational, parse_rational, Label, LinalgError, RatMatrix, Rational};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ReductionError {
    #[error("reduction requires m ≥ 1 and n ≥ 1 (got n = {n}, m = {m})")]
    DegenerateGraph { n: u64, m: u64 },
    #[error("coloring is not a proper three-coloring of the graph")]
    NotAColoring,
    #[error("instance file line {line}: {msg}")]
    InstanceFormat { line: usize, msg: String },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// `1 / (4 (m + n)^3)`.
pub fn compute_t(n: u64, m: u64) -> Result<Rational, ReductionError> {
    if n == 0 || m == 0 {
        return Err(ReductionError::DegenerateGraph { n, m });
    }
    let s = BigInt::from(n) + BigInt::from(m);
    Ok(Rational::new(BigInt::one(), BigInt::from(4) * &s * &s * &s))
}

fn pow(t: &Rational, e: i32) -> Rational {
    num_traits::pow(t.clone(), e as usize)
}

/// Squared decision threshold `m t^2 + 4n t^6 + m t^10`.
pub fn threshold_sq(n: u64, m: u64, t: &Rational) -> Rational {
    let (n, m) = (Rational::from_integer(n.into()), Rational::from_integer(m.into()));
    &m * pow(t, 2) + Rational::from_integer(4.into()) * n * pow(t, 6) + m * pow(t, 10)
}

/// Lower bound on the squared residual of any structured selection that is
/// not a proper coloring: `m t^2 + 4n (t^3/(1+n t^6))^2 + (m+2) (t^5/(1+n t^6))^2`.
pub fn lower_bound_sq(n: u64, m: u64, t: &Rational) -> Rational {
    let (nr, mr) = (Rational::from_integer(n.into()), Rational::from_integer(m.into()));
    let denom = Rational::one() + &nr * pow(t, 6);
    let a = pow(t, 3) / &denom;
    let b = pow(t, 5) / &denom;
    &mr * pow(t, 2)
        + Rational::from_integer(4.into()) * nr * &a * &a
        + (mr + Rational::from_integer(2.into())) * &b * &b
}

/// Canonical row order: `v1..vn`, `c1`, `c2`, `c3`, `eps`.
pub fn row_labels(n: u32) -> Vec<Label> {
    (1..=n)
        .map(Label::Vertex)
        .chain((1..=3).map(Label::Color))
        .chain([Label::Epsilon])
        .collect()
}

/// Canonical column order: `V^1`, `V^2`, `V^3` (vertices ascending), then edges.
pub fn col_labels(g: &Graph) -> Vec<Label> {
    (1..=3u8)
        .flat_map(|i| g.vertices().map(move |v| Label::copy(v, i)))
        .chain(g.edges().map(|(u, v)| Label::edge(u, v)))
        .collect()
}

/// Built CSSP instance: matrix, selection size and squared threshold.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReductionInstance {
    pub graph: Graph,
    pub matrix: RatMatrix,
    pub k: usize,
    pub t: Rational,
    pub tau_sq: Rational,
}

impl ReductionInstance {
    pub fn n(&self) -> u32 {
        self.graph.vertex_count()
    }

    pub fn m(&self) -> usize {
        self.graph.edge_count()
    }

    /// Column positions of a selection, in canonical column order.
    pub fn positions(&self, sel: &ColumnSelection) -> Result<Vec<usize>, ReductionError> {
        sel.positions(&self.matrix)
    }
}

pub fn build_instance(g: &Graph) -> Result<ReductionInstance, ReductionError> {
    let (n, m) = (g.vertex_count(), g.edge_count());
    let t = compute_t(n as u64, m as u64)?;
    let rows = row_labels(n);
    let cols = col_labels(g);
    let mut matrix = RatMatrix::zeros(rows, cols)?;
    let (t2, t3, t5) = (pow(&t, 2), pow(&t, 3), pow(&t, 5));
    let nu = n as usize;
    let color_row = |i: u8| nu + (i as usize) - 1;
    let eps_row = nu + 3;

    for i in 1..=3u8 {
        for v in g.vertices() {
            let col = (i as usize - 1) * nu + (v as usize - 1);
            matrix.set(v as usize - 1, col, Rational::one());
            matrix.set(color_row(i), col, t3.clone());
        }
    }
    for (idx, (u, v)) in g.edges().enumerate() {
        let col = 3 * nu + idx;
        matrix.set(u as usize - 1, col, t2.clone());
        matrix.set(v as usize - 1, col, t2.clone());
        for i in 1..=3 {
            matrix.set(color_row(i), col, t5.clone());
        }
        matrix.set(eps_row, col, t.clone());
    }
    let tau_sq = threshold_sq(n as u64, m as u64, &t);
    Ok(ReductionInstance { graph: g.clone(), matrix, k: nu, t, tau_sq })
}

/// Set of column labels, kept sorted in canonical column order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct ColumnSelection(BTreeSet<Label>);

impl ColumnSelection {
    pub fn new(labels: impl IntoIterator<Item = Label>) -> Self {
        ColumnSelection(labels.into_iter().collect())
    }

    /// Labels of the given column positions of `m`.
    pub fn from_positions(m: &RatMatrix, positions: &[usize]) -> Self {
        Self::new(positions.iter().map(|&p| m.col_labels()[p].clone()))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn labels(&self) -> impl Iterator<Item = &Label> {
        self.0.iter()
    }

    pub fn contains(&self, label: &Label) -> bool {
        self.0.contains(label)
    }

    pub fn has_edge_column(&self) -> bool {
        self.0.iter().any(|l| matches!(l, Label::Edge(..)))
    }

    /// Vertices in `1..=n` with none of their three copies selected.
    pub fn uncovered_vertices(&self, n: u32) -> Vec<u32> {
        (1..=n)
            .filter(|&v| !(1..=3).any(|i| self.0.contains(&Label::copy(v, i))))
            .collect()
    }

    /// Column positions in `m`, ascending.
    pub fn positions(&self, m: &RatMatrix) -> Result<Vec<usize>, ReductionError> {
        let mut out = Vec::with_capacity(self.0.len());
        for l in &self.0 {
            let p = m.col_position(l).ok_or_else(|| ReductionError::InstanceFormat {
                line: 0,
                msg: format!("column {l} is not a column of the instance"),
            })?;
            out.push(p);
        }
        out.sort_unstable();
        Ok(out)
    }
}

impl fmt::Display for ColumnSelection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(Label::to_string).collect();
        f.write_str(&parts.join(" "))
    }
}

/// One copy column `v^{ψ(v)}` per vertex and no edge columns.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StructuredSelection {
    psi: Vec<u8>,
}

impl StructuredSelection {
    /// `psi[i]` is the copy chosen for vertex `i + 1`; each must be 1, 2 or 3.
    pub fn new(psi: Vec<u8>) -> Option<Self> {
        psi.iter().all(|c| (1..=3).contains(c)).then_some(StructuredSelection { psi })
    }

    pub fn from_coloring(n: u32, phi: &Coloring) -> Result<Self, ReductionError> {
        Ok(StructuredSelection { psi: phi.dense(n)? })
    }

    pub fn psi(&self) -> &[u8] {
        &self.psi
    }

    pub fn color_of(&self, v: u32) -> u8 {
        self.psi[(v - 1) as usize]
    }

    /// `n_i = |ψ^{-1}(i)|` for `i = 1, 2, 3`.
    pub fn class_sizes(&self) -> [usize; 3] {
        let mut sizes = [0; 3];
        for &c in &self.psi {
            sizes[(c - 1) as usize] += 1;
        }
        sizes
    }

    pub fn to_coloring(&self) -> Coloring {
        Coloring::from_slice(&self.psi)
    }

    pub fn to_selection(&self) -> ColumnSelection {
        ColumnSelection::new((1..).zip(&self.psi).map(|(v, &c)| Label::copy(v, c)))
    }

    pub fn is_coloring_of(&self, g: &Graph) -> bool {
        g.edges().all(|(u, v)| self.color_of(u) != self.color_of(v))
    }

    /// All `3^n` mappings, lexicographic with vertex 1 most significant.
    pub fn enumerate(n: u32) -> impl Iterator<Item = StructuredSelection> {
        let total = 3usize.pow(n);
        (0..total).map(move |mut code| {
            let mut psi = vec![1u8; n as usize];
            for slot in psi.iter_mut().rev() {
                *slot = (code % 3) as u8 + 1;
                code /= 3;
            }
            StructuredSelection { psi }
        })
    }
}

/// The selection `{v^{φ(v)}}` of a (not necessarily proper) coloring.
pub fn coloring_to_selection(g: &Graph, phi: &Coloring) -> Result<ColumnSelection, ReductionError> {
    Ok(StructuredSelection::from_coloring(g.vertex_count(), phi)?.to_selection())
}

/// `ψ` when `sel` holds exactly one copy of each vertex `1..=n` and no edge column.
pub fn selection_to_structured(sel: &ColumnSelection, n: u32) -> Option<StructuredSelection> {
    if sel.len() != n as usize {
        return None;
    }
    let mut psi = vec![0u8; n as usize];
    for l in sel.labels() {
        match *l {
            Label::Copy { copy, vertex } if (1..=n).contains(&vertex) => {
                let slot = &mut psi[(vertex - 1) as usize];
                if *slot != 0 {
                    return None;
                }
                *slot = copy;
            }
            _ => return None,
        }
    }
    StructuredSelection::new(psi)
}

/// Coefficient matrix `A` with `S A` matching `M` up to the threshold, for a
/// proper coloring `φ`. Rows are the selected columns `v^{φ(v)}` in canonical
/// order; columns are those of `M`.
pub fn witness_a(inst: &ReductionInstance, phi: &Coloring) -> Result<RatMatrix, ReductionError> {
    if !is_three_coloring(&inst.graph, phi)? {
        return Err(ReductionError::NotAColoring);
    }
    let sel = coloring_to_selection(&inst.graph, phi)?;
    let rows: Vec<Label> = sel.labels().cloned().collect();
    let mut a = RatMatrix::zeros(rows, inst.matrix.col_labels().to_vec())?;
    let row_of = |v: u32| {
        let l = Label::copy(v, phi.get(v).expect("total coloring"));
        a.row_position(&l).expect("selected label")
    };
    let t2 = pow(&inst.t, 2);
    let mut cells = Vec::new();
    for (j, col) in inst.matrix.col_labels().iter().enumerate() {
        match *col {
            Label::Copy { vertex, .. } => cells.push((row_of(vertex), j, Rational::one())),
            Label::Edge(u, v) => {
                cells.push((row_of(u), j, t2.clone()));
                cells.push((row_of(v), j, t2.clone()));
            }
            _ => {}
        }
    }
    for (i, j, x) in cells {
        a.set(i, j, x);
    }
    Ok(a)
}

/// `I - S S^+` for a structured selection, assembled from its closed form.
///
/// In the row order `ψ^{-1}(1), ψ^{-1}(2), ψ^{-1}(3), 1, 2, 3, ε` the projector is
/// block diagonal per color class `i`, with `u_i = 1/(1 + n_i t^6)`:
/// vertex/vertex entries `u_i t^6`, vertex/color entries `-u_i t^3`, the color
/// diagonal `u_i`, and a lone 1 at `(ε, ε)`. The result is returned in the
/// instance's native row order on both axes.
pub fn closed_form_projector(inst: &ReductionInstance, psi: &StructuredSelection) -> Result<RatMatrix, ReductionError> {
    let n = inst.n();
    if psi.psi().len() != n as usize {
        return Err(ReductionError::Graph(GraphError::PartialColoring(psi.psi().len() as u32 + 1)));
    }
    let t3 = pow(&inst.t, 3);
    let t6 = pow(&inst.t, 6);
    let sizes = psi.class_sizes();
    let u: Vec<Rational> = sizes
        .iter()
        .map(|&ni| (Rational::one() + Rational::from_integer(ni.into()) * &t6).recip())
        .collect();

    // permuted basis: vertices grouped by class, then c1, c2, c3, eps
    let mut perm_labels: Vec<Label> = Vec::with_capacity(n as usize + 4);
    let mut class_of = Vec::with_capacity(n as usize + 4);
    for i in 1..=3u8 {
        for v in (1..=n).filter(|&v| psi.color_of(v) == i) {
            perm_labels.push(Label::Vertex(v));
            class_of.push(Some((i, true)));
        }
    }
    for i in 1..=3u8 {
        perm_labels.push(Label::Color(i));
        class_of.push(Some((i, false)));
    }
    perm_labels.push(Label::Epsilon);
    class_of.push(None);

    let size = perm_labels.len();
    let mut data = vec![Rational::zero(); size * size];
    for a in 0..size {
        for b in 0..size {
            let value = match (class_of[a], class_of[b]) {
                (None, None) => Rational::one(),
                (Some((ia, va)), Some((ib, vb))) if ia == ib => {
                    let ui = &u[(ia - 1) as usize];
                    match (va, vb) {
                        (true, true) => ui * &t6,
                        (true, false) | (false, true) => -(ui * &t3),
                        (false, false) => ui.clone(),
                    }
                }
                _ => continue,
            };
            data[a * size + b] = value;
        }
    }
    let block = RatMatrix::new(perm_labels.clone(), perm_labels, data)?;
    let native = inst.matrix.row_labels().to_vec();
    Ok(block.reindexed(&native, &native).expect("same label set"))
}

/// Canonical text form of an instance.
pub fn write_instance(inst: &ReductionInstance) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "cssp-instance v1");
    let _ = writeln!(out, "n {} m {} k {}", inst.n(), inst.m(), inst.k);
    let _ = writeln!(out, "t {}", format_rational(&inst.t));
    let _ = writeln!(out, "tau_sq {}", format_rational(&inst.tau_sq));
    let m = &inst.matrix;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let x = m.get(i, j);
            if !x.is_zero() {
                let _ = writeln!(out, "{} {} {}", m.row_labels()[i], m.col_labels()[j], format_rational(x));
            }
        }
    }
    out
}

/// Reads the text form back. Entries are taken as written; the column set is
/// all vertex copies plus every edge label that appears in an entry line.
pub fn read_instance(text: &str) -> Result<ReductionInstance, ReductionError> {
    let err = |line: usize, msg: String| ReductionError::InstanceFormat { line, msg };
    let lines: Vec<(usize, &str)> = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty())
        .collect();
    let mut it = lines.into_iter();
    let mut next = |what: &str| it.next().ok_or_else(|| err(0, format!("missing {what} line")));

    let (ln, magic) = next("header")?;
    if magic.trim() != "cssp-instance v1" {
        return Err(err(ln, "expected `cssp-instance v1`".into()));
    }
    let (ln, dims) = next("dimension")?;
    let toks: Vec<&str> = dims.split_whitespace().collect();
    let (n, m, k) = match toks.as_slice() {
        ["n", n, "m", m, "k", k] => {
            let p = |s: &str| s.parse::<u64>().map_err(|_| err(ln, format!("bad integer {s:?}")));
            (p(n)?, p(m)?, p(k)?)
        }
        _ => return Err(err(ln, "expected `n <n> m <m> k <k>`".into())),
    };
    let n32 = u32::try_from(n).map_err(|_| err(ln, "n too large".into()))?;
    let mut scalar = |key: &str| -> Result<Rational, ReductionError> {
        let (ln, line) = next(key)?;
        match line.split_whitespace().collect::<Vec<_>>().as_slice() {
            [kw, value] if *kw == key => Ok(parse_rational(value).map_err(|e| err(ln, e.to_string()))?),
            _ => Err(err(ln, format!("expected `{key} <p/q>`"))),
        }
    };
    let t = scalar("t")?;
    let tau_sq = scalar("tau_sq")?;
    if t != compute_t(n, m)? {
        return Err(err(3, format!("t must equal 1/(4(m+n)^3) for n = {n}, m = {m}")));
    }

    let mut entries = Vec::new();
    let mut edges = Vec::new();
    for (ln, line) in it {
        let toks: Vec<&str> = line.split_whitespace().collect();
        let [r, c, x] = toks.as_slice() else {
            return Err(err(ln, "expected `<row> <col> <p/q>`".into()));
        };
        let r: Label = r.parse().map_err(|e: LinalgError| err(ln, e.to_string()))?;
        let c: Label = c.parse().map_err(|e: LinalgError| err(ln, e.to_string()))?;
        let x = parse_rational(x).map_err(|e| err(ln, e.to_string()))?;
        if let Label::Edge(u, v) = c {
            edges.push((u, v));
        }
        entries.push((ln, r, c, x));
    }
    let graph = Graph::new(n32, edges)?;
    if graph.edge_count() as u64 != m {
        return Err(err(2, format!("header declares m = {m}, entries mention {} edges", graph.edge_count())));
    }
    let cols = col_labels(&graph);
    if k == 0 || k as usize > cols.len() {
        return Err(err(2, format!("k = {k} outside 1..={}", cols.len())));
    }
    let mut matrix = RatMatrix::zeros(row_labels(n32), cols)?;
    for (ln, r, c, x) in entries {
        let (Some(i), Some(j)) = (matrix.row_position(&r), matrix.col_position(&c)) else {
            return Err(err(ln, format!("entry ({r}, {c}) outside the instance")));
        };
        matrix.set(i, j, x);
    }
    Ok(ReductionInstance { graph, matrix, k: k as usize, t, tau_sq })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{matmul, pseudoinverse_full_rank, rat};

    fn k3() -> Graph {
        Graph::new(3, [(1, 2), (2, 3), (1, 3)]).unwrap()
    }

    #[test]
    fn t_examples() {
        assert_eq!(compute_t(3, 3).unwrap(), rat(1, 864));
        assert_eq!(compute_t(1, 1).unwrap(), rat(1, 32));
        assert_eq!(compute_t(4, 6).unwrap(), rat(1, 4000));
        assert_eq!(compute_t(3, 0), Err(ReductionError::DegenerateGraph { n: 3, m: 0 }));
        assert_eq!(compute_t(0, 2), Err(ReductionError::DegenerateGraph { n: 0, m: 2 }));
    }

    #[test]
    fn threshold_examples() {
        let t = rat(1, 864);
        let expected = rat(3, 1) * pow(&t, 2) + rat(12, 1) * pow(&t, 6) + rat(3, 1) * pow(&t, 10);
        assert_eq!(threshold_sq(3, 3, &t), expected);
        let t = rat(1, 108);
        assert_eq!(threshold_sq(2, 1, &t), pow(&t, 2) + rat(8, 1) * pow(&t, 6) + pow(&t, 10));
        assert!(threshold_sq(3, 3, &rat(0, 1)).is_zero());
    }

    #[test]
    fn lower_bound_examples() {
        let t = rat(1, 864);
        let d = Rational::one() + rat(3, 1) * pow(&t, 6);
        let a = pow(&t, 3) / &d;
        let b = pow(&t, 5) / &d;
        let expected = rat(3, 1) * pow(&t, 2) + rat(12, 1) * &a * &a + rat(5, 1) * &b * &b;
        assert_eq!(lower_bound_sq(3, 3, &t), expected);
        assert!(lower_bound_sq(3, 3, &t) > threshold_sq(3, 3, &t));
        assert!(lower_bound_sq(5, 7, &rat(0, 1)).is_zero());
    }

    #[test]
    fn k2_matrix_by_hand() {
        let g = Graph::new(2, [(1, 2)]).unwrap();
        let inst = build_instance(&g).unwrap();
        let t = rat(1, 108);
        assert_eq!(inst.t, t);
        let z = rat(0, 1);
        let one = rat(1, 1);
        let (t2, t3, t5) = (pow(&t, 2), pow(&t, 3), pow(&t, 5));
        #[rustfmt::skip]
        let expected = vec![
            one.clone(), z.clone(), one.clone(), z.clone(), one.clone(), z.clone(), t2.clone(),
            z.clone(), one.clone(), z.clone(), one.clone(), z.clone(), one.clone(), t2.clone(),
            t3.clone(), t3.clone(), z.clone(), z.clone(), z.clone(), z.clone(), t5.clone(),
            z.clone(), z.clone(), t3.clone(), t3.clone(), z.clone(), z.clone(), t5.clone(),
            z.clone(), z.clone(), z.clone(), z.clone(), t3.clone(), t3.clone(), t5.clone(),
            z.clone(), z.clone(), z.clone(), z.clone(), z.clone(), z.clone(), t.clone(),
        ];
        assert_eq!((inst.matrix.nrows(), inst.matrix.ncols()), (6, 7));
        assert_eq!(inst.matrix.entries(), expected.as_slice());
        assert_eq!(inst.k, 2);
    }

    #[test]
    fn path_edge_column() {
        let g = Graph::new(3, [(1, 2), (2, 3)]).unwrap();
        let inst = build_instance(&g).unwrap();
        assert_eq!((inst.matrix.nrows(), inst.matrix.ncols()), (7, 11));
        let t2 = pow(&inst.t, 2);
        let e = Label::edge(1, 2);
        assert_eq!(inst.matrix.at(&Label::Vertex(1), &e), Some(&t2));
        assert_eq!(inst.matrix.at(&Label::Vertex(2), &e), Some(&t2));
        assert!(inst.matrix.at(&Label::Vertex(3), &e).unwrap().is_zero());
    }

    #[test]
    fn degenerate_graph_rejected() {
        let g = Graph::new(3, []).unwrap();
        assert_eq!(build_instance(&g), Err(ReductionError::DegenerateGraph { n: 3, m: 0 }));
    }

    #[test]
    fn selection_mapping_examples() {
        let g = k3();
        let sel = coloring_to_selection(&g, &Coloring::from_slice(&[1, 2, 3])).unwrap();
        assert_eq!(sel.to_string(), "v1^1 v2^2 v3^3");
        let sel = coloring_to_selection(&g, &Coloring::from_slice(&[1, 1, 1])).unwrap();
        assert_eq!(sel.to_string(), "v1^1 v2^1 v3^1");
        let c5 = Graph::new(5, [(1, 2), (2, 3), (3, 4), (4, 5), (1, 5)]).unwrap();
        let sel = coloring_to_selection(&c5, &Coloring::from_slice(&[1, 2, 1, 2, 3])).unwrap();
        assert_eq!(sel.to_string(), "v1^1 v3^1 v2^2 v4^2 v5^3");
        assert!(coloring_to_selection(&g, &Coloring::from_slice(&[1, 2])).is_err());

        let psi = selection_to_structured(&ColumnSelection::new([Label::copy(1, 1), Label::copy(2, 2), Label::copy(3, 3)]), 3);
        assert_eq!(psi.unwrap().psi(), &[1, 2, 3]);
        let with_edge = ColumnSelection::new([Label::copy(1, 1), Label::copy(2, 2), Label::edge(1, 2)]);
        assert_eq!(selection_to_structured(&with_edge, 3), None);
        let uncovered = ColumnSelection::new([Label::copy(1, 1), Label::copy(1, 2), Label::copy(2, 1)]);
        assert_eq!(selection_to_structured(&uncovered, 3), None);
        assert_eq!(uncovered.uncovered_vertices(3), vec![3]);
    }

    #[test]
    fn enumerate_is_lexicographic() {
        let all: Vec<_> = StructuredSelection::enumerate(2).map(|s| s.psi().to_vec()).collect();
        assert_eq!(all.len(), 9);
        assert_eq!(all[0], vec![1, 1]);
        assert_eq!(all[1], vec![1, 2]);
        assert_eq!(all[8], vec![3, 3]);
    }

    #[test]
    fn witness_columns_for_k3() {
        let inst = build_instance(&k3()).unwrap();
        let phi = Coloring::from_slice(&[1, 2, 3]);
        let a = witness_a(&inst, &phi).unwrap();
        assert_eq!((a.nrows(), a.ncols()), (3, 12));
        let one = Rational::one();
        let t2 = pow(&inst.t, 2);
        assert_eq!(a.at(&Label::copy(1, 1), &Label::copy(1, 2)), Some(&one));
        assert!(a.at(&Label::copy(2, 2), &Label::copy(1, 2)).unwrap().is_zero());
        let e12 = Label::edge(1, 2);
        assert_eq!(a.at(&Label::copy(1, 1), &e12), Some(&t2));
        assert_eq!(a.at(&Label::copy(2, 2), &e12), Some(&t2));
        assert!(a.at(&Label::copy(3, 3), &e12).unwrap().is_zero());

        assert_eq!(witness_a(&inst, &Coloring::from_slice(&[1, 1, 2])), Err(ReductionError::NotAColoring));
    }

    #[test]
    fn closed_form_matches_direct_on_k3_rainbow() {
        let inst = build_instance(&k3()).unwrap();
        let psi = StructuredSelection::new(vec![1, 2, 3]).unwrap();
        let closed = closed_form_projector(&inst, &psi).unwrap();
        let s = inst.matrix.select_columns(&inst.positions(&psi.to_selection()).unwrap()).unwrap();
        let p = matmul(&s, &pseudoinverse_full_rank(&s).unwrap()).unwrap();
        let eye = RatMatrix::identity(inst.matrix.row_labels().to_vec()).unwrap();
        assert_eq!(closed.entries(), eye.sub(&p).unwrap().entries());
        let eps = closed.row_position(&Label::Epsilon).unwrap();
        for j in 0..closed.ncols() {
            let expect = if j == eps { Rational::one() } else { Rational::zero() };
            assert_eq!(closed.get(eps, j), &expect);
        }
    }

    #[test]
    fn instance_text_roundtrip() {
        let inst = build_instance(&k3()).unwrap();
        let text = write_instance(&inst);
        assert!(text.starts_with("cssp-instance v1\nn 3 m 3 k 3\nt 1/864\ntau_sq "));
        assert!(text.contains("\nv1 v1^1 1\n"));
        assert!(text.contains("\neps e1_2 1/864\n"));
        assert_eq!(read_instance(&text).unwrap(), inst);
    }

    #[test]
    fn instance_text_errors() {
        let good = write_instance(&build_instance(&k3()).unwrap());
        let cases = [
            good.replace("cssp-instance v1", "cssp-instance v2"),
            good.replace("t 1/864", "t 1/865"),
            good.replace("n 3 m 3 k 3", "n 3 m 4 k 3"),
            good.replace("n 3 m 3 k 3", "n 3 m 3 k 0"),
            good.replace("eps e1_2 1/864", "eps e1_2 1/0"),
            good.replace("eps e1_2 1/864", "eps e1_9 1/864"),
            good.replace("v1 v1^1 1", "v7 v1^1 1"),
            format!("{good}garbage\n"),
            "cssp-instance v1\n".to_string(),
        ];
        for c in cases {
            assert!(read_instance(&c).is_err(), "{c}");
        }
    }
}
