//! Exact checks of the reduction's correctness statements on concrete graphs.
//!
//! Every check produces a [`CheckRecord`] whose verdict is the exact
//! comparison `lhs <rel> rhs` between two canonical rationals. Nothing here
//! uses a tolerance.

use std::fmt;
use std::fmt::Write as _;

use itertools::Itertools;
use num_traits::Zero;
use thiserror::Error;

use crate::graph::{is_three_coloring, three_color_backtracking, Coloring, Graph};
use crate::linalg::{format_rational, int, matmul, projection_residual_sq, pseudoinverse_full_rank, Label, ResidualEvaluator, RatMatrix, Rational};
use crate::reduction::{
    build_instance, closed_form_projector, coloring_to_selection, lower_bound_sq, selection_to_structured, threshold_sq,
    witness_a, ColumnSelection, ReductionError, ReductionInstance, StructuredSelection,
};
use crate::solvers::{binomial, exact_brute_force, exact_structured, SolveError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VerifyError {
    #[error("selection {0} does not satisfy the hypothesis of the check")]
    HypothesisMismatch(String),
    #[error("mapping {0} is a proper three-coloring; the check needs a non-coloring")]
    IsAColoring(String),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Reduction(#[from] ReductionError),
}

impl From<crate::linalg::LinalgError> for VerifyError {
    fn from(e: crate::linalg::LinalgError) -> Self {
        VerifyError::Reduction(e.into())
    }
}

impl From<crate::graph::GraphError> for VerifyError {
    fn from(e: crate::graph::GraphError) -> Self {
        VerifyError::Reduction(e.into())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Eq,
    Le,
    Lt,
    Ge,
    Gt,
}

impl Relation {
    pub fn holds(self, lhs: &Rational, rhs: &Rational) -> bool {
        match self {
            Relation::Eq => lhs == rhs,
            Relation::Le => lhs <= rhs,
            Relation::Lt => lhs < rhs,
            Relation::Ge => lhs >= rhs,
            Relation::Gt => lhs > rhs,
        }
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::Eq => "==",
            Relation::Le => "<=",
            Relation::Lt => "<",
            Relation::Ge => ">=",
            Relation::Gt => ">",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckRecord {
    pub name: String,
    pub graph: String,
    pub witness: String,
    pub lhs: Rational,
    pub rhs: Rational,
    pub relation: Relation,
}

impl CheckRecord {
    fn new(name: &str, graph: &str, witness: impl Into<String>, lhs: Rational, relation: Relation, rhs: Rational) -> Self {
        CheckRecord { name: name.into(), graph: graph.into(), witness: witness.into(), lhs, rhs, relation }
    }

    pub fn passed(&self) -> bool {
        self.relation.holds(&self.lhs, &self.rhs)
    }

    /// `CHECK <name> <graph> PASS|FAIL lhs=<p/q> rhs=<p/q>`
    pub fn summary_line(&self) -> String {
        format!(
            "CHECK {} {} {} lhs={} rhs={}",
            self.name,
            self.graph,
            if self.passed() { "PASS" } else { "FAIL" },
            format_rational(&self.lhs),
            format_rational(&self.rhs)
        )
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct VerificationReport {
    pub records: Vec<CheckRecord>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.records.iter().all(CheckRecord::passed)
    }

    pub fn push(&mut self, r: CheckRecord) {
        self.records.push(r);
    }

    pub fn extend(&mut self, rs: impl IntoIterator<Item = CheckRecord>) {
        self.records.extend(rs);
    }

    /// One summary line per check, an indented detail line, then the verdict.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            let _ = writeln!(out, "{}", r.summary_line());
            let _ = writeln!(out, "  lhs {} rhs; {}", r.relation, r.witness);
        }
        let _ = writeln!(out, "VERDICT {}", if self.passed() { "PASS" } else { "FAIL" });
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerifyMode {
    /// Exhaustive search over all `n`-subsets of columns.
    Full,
    /// Search over the `3^n` one-copy-per-vertex selections.
    Structured,
}

fn describe_coloring(phi: &Coloring) -> String {
    phi.iter().map(|(_, c)| c.to_string()).collect::<Vec<_>>().join("")
}

/// Colorable iff `δ_n(M(G))² ≤ m t^2 + 4n t^6 + m t^10`, with the two sides
/// computed independently: colorability by backtracking, the inequality by an
/// exact solver.
pub fn verify_theorem(g: &Graph, name: &str, mode: VerifyMode, cap: u128) -> Result<VerificationReport, VerifyError> {
    let inst = build_instance(g)?;
    let coloring = three_color_backtracking(g);
    if let Some(phi) = &coloring {
        debug_assert!(is_three_coloring(g, phi).unwrap_or(false));
    }
    let (solver, report) = match mode {
        VerifyMode::Full => ("full", exact_brute_force(&inst.matrix, inst.k, &inst.tau_sq, cap)?),
        VerifyMode::Structured => ("structured", exact_structured(&inst)?),
    };
    let lhs = report.delta_sq.value().clone();
    let (relation, claim) = match &coloring {
        Some(phi) => (Relation::Le, format!("colorable phi={}", describe_coloring(phi))),
        None => (Relation::Gt, "not colorable".to_string()),
    };
    let witness = format!(
        "{claim}; {solver} search over {} subsets; best {}",
        report.subsets_examined, report.best_selection
    );
    let mut out = VerificationReport::default();
    out.push(CheckRecord::new(&format!("theorem_{solver}"), name, witness, lhs, relation, inst.tau_sq.clone()));
    Ok(out)
}

/// A selection with no edge column that misses every copy of some vertex
/// leaves three unit entries in that vertex's row: residual² ≥ 3 (> τ).
pub fn check_uncovered_vertex(inst: &ReductionInstance, sel: &ColumnSelection, graph: &str) -> Result<CheckRecord, VerifyError> {
    let uncovered = sel.uncovered_vertices(inst.n());
    if sel.has_edge_column() || uncovered.is_empty() {
        return Err(VerifyError::HypothesisMismatch(sel.to_string()));
    }
    let residual = projection_residual_sq(&inst.matrix, &inst.positions(sel)?)?;
    Ok(CheckRecord::new(
        "uncovered_vertex",
        graph,
        format!("selection {sel}; uncovered v{}", uncovered[0]),
        residual,
        Relation::Ge,
        int(3),
    ))
}

/// Every `n`-selection containing an edge column has residual² > τ.
/// Reports the minimum over all such selections.
pub fn check_edge_columns(inst: &ReductionInstance, graph: &str, cap: u128) -> Result<CheckRecord, VerifyError> {
    let c = inst.matrix.ncols();
    let first_edge = 3 * inst.n() as usize;
    let needed = binomial(c, inst.k);
    if needed > cap {
        return Err(SolveError::CombinatorialBlowup { needed, cap }.into());
    }
    let mut eval = ResidualEvaluator::new(&inst.matrix);
    let mut best: Option<(Rational, Vec<usize>)> = None;
    let mut count = 0u64;
    for sel in (0..c).combinations(inst.k) {
        if sel.iter().all(|&p| p < first_edge) {
            continue;
        }
        count += 1;
        let r = eval.residual_sq(&sel)?;
        if best.as_ref().is_none_or(|(b, _)| r < *b) {
            best = Some((r, sel));
        }
    }
    let (min, sel) = best.expect("m >= 1 gives an edge-containing selection");
    Ok(CheckRecord::new(
        "edge_columns",
        graph,
        format!("{count} edge-containing selections; minimizer {}", ColumnSelection::from_positions(&inst.matrix, &sel)),
        min,
        Relation::Gt,
        inst.tau_sq.clone(),
    ))
}

/// For a proper coloring `φ`: `|M - S A|² = τ` exactly with the witness `A`,
/// and the optimal residual for the same columns is at most `τ`.
pub fn check_coloring_witness(inst: &ReductionInstance, phi: &Coloring, graph: &str) -> Result<Vec<CheckRecord>, VerifyError> {
    let a = witness_a(inst, phi)?;
    let sel = coloring_to_selection(&inst.graph, phi)?;
    let positions = inst.positions(&sel)?;
    let s = inst.matrix.select_columns(&positions)?;
    let approx = matmul(&s, &a)?;
    let witness_sq = inst.matrix.sub(&approx)?.frobenius_sq();
    let residual = projection_residual_sq(&inst.matrix, &positions)?;
    let w = format!("phi={} selection {sel}", describe_coloring(phi));
    Ok(vec![
        CheckRecord::new("coloring_witness", graph, w.clone(), witness_sq, Relation::Eq, inst.tau_sq.clone()),
        CheckRecord::new("coloring_projection", graph, w, residual, Relation::Le, inst.tau_sq.clone()),
    ])
}

/// For a structured selection that is not a coloring: residual² ≥ the
/// closed lower bound, and the lower bound exceeds τ.
pub fn check_non_coloring_bound(inst: &ReductionInstance, psi: &StructuredSelection, graph: &str) -> Result<Vec<CheckRecord>, VerifyError> {
    let psi_text = psi.psi().iter().map(u8::to_string).collect::<String>();
    if psi.is_coloring_of(&inst.graph) {
        return Err(VerifyError::IsAColoring(psi_text));
    }
    let (n, m) = (inst.n() as u64, inst.m() as u64);
    let bound = lower_bound_sq(n, m, &inst.t);
    let residual = projection_residual_sq(&inst.matrix, &inst.positions(&psi.to_selection())?)?;
    let w = format!("psi={psi_text}");
    Ok(vec![
        CheckRecord::new("non_coloring_bound", graph, w.clone(), residual, Relation::Ge, bound.clone()),
        CheckRecord::new("non_coloring_gap", graph, w, bound, Relation::Gt, inst.tau_sq.clone()),
    ])
}

/// The strict gap `lower_bound_sq(n, m, t) > threshold_sq(n, m, t)` on its own.
pub fn check_gap(n: u64, m: u64, graph: &str) -> Result<CheckRecord, VerifyError> {
    let t = crate::reduction::compute_t(n, m)?;
    Ok(CheckRecord::new(
        "bound_gap",
        graph,
        format!("n={n} m={m} t={}", format_rational(&t)),
        lower_bound_sq(n, m, &t),
        Relation::Gt,
        threshold_sq(n, m, &t),
    ))
}

/// `I - S S^+` computed through the pseudoinverse of the selected columns.
pub fn direct_projector(inst: &ReductionInstance, sel: &ColumnSelection) -> Result<RatMatrix, VerifyError> {
    let s = inst.matrix.select_columns(&inst.positions(sel)?)?;
    let p = matmul(&s, &pseudoinverse_full_rank(&s)?)?;
    let eye = RatMatrix::identity(inst.matrix.row_labels().to_vec())?;
    Ok(eye.sub(&p)?)
}

/// Closed-form projector against the direct computation (entrywise, exact),
/// plus symmetry and idempotence of the direct projector.
pub fn check_projector_formula(inst: &ReductionInstance, psi: &StructuredSelection, graph: &str) -> Result<Vec<CheckRecord>, VerifyError> {
    let closed = closed_form_projector(inst, psi)?;
    let direct = direct_projector(inst, &psi.to_selection())?;
    let mismatch = closed.sub(&direct)?.frobenius_sq();
    let asym = direct.sub(&direct.transpose())?.frobenius_sq();
    let non_idem = matmul(&direct, &direct)?.sub(&direct)?.frobenius_sq();
    let w = format!("psi={}", psi.psi().iter().map(u8::to_string).collect::<String>());
    Ok(vec![
        CheckRecord::new("projector_formula", graph, format!("{w}; |closed - direct|^2"), mismatch, Relation::Eq, Rational::zero()),
        CheckRecord::new(
            "projector_orthogonal",
            graph,
            format!("{w}; |P - P^T|^2 + |P^2 - P|^2"),
            asym + non_idem,
            Relation::Eq,
            Rational::zero(),
        ),
    ])
}

/// Which branch of the case analysis a selection falls into.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SelectionClass {
    ColoringStructured,
    NonColoringStructured,
    EdgeContaining,
    VertexUncovered,
}

pub fn classify(inst: &ReductionInstance, sel: &ColumnSelection) -> SelectionClass {
    if sel.has_edge_column() {
        SelectionClass::EdgeContaining
    } else if let Some(psi) = selection_to_structured(sel, inst.n()) {
        if psi.is_coloring_of(&inst.graph) {
            SelectionClass::ColoringStructured
        } else {
            SelectionClass::NonColoringStructured
        }
    } else {
        SelectionClass::VertexUncovered
    }
}

/// Outcome of [`classify_all_selections`].
#[derive(Debug, Clone, PartialEq)]
pub struct Classification {
    /// Counts in [`SelectionClass`] order.
    pub counts: [u64; 4],
    /// Selections whose class inequality failed.
    pub violations: Vec<(ColumnSelection, SelectionClass, Rational)>,
    pub records: Vec<CheckRecord>,
}

/// Sorts every `n`-selection into exactly one class and checks that class's
/// inequality: colorings reach τ, non-colorings sit above the lower bound,
/// edge-containing selections exceed τ, uncovered-vertex selections reach 3.
pub fn classify_all_selections(inst: &ReductionInstance, graph: &str, cap: u128) -> Result<Classification, VerifyError> {
    let c = inst.matrix.ncols();
    let needed = binomial(c, inst.k);
    if needed > cap {
        return Err(SolveError::CombinatorialBlowup { needed, cap }.into());
    }
    let bound = lower_bound_sq(inst.n() as u64, inst.m() as u64, &inst.t);
    let three = int(3);
    let rule = |class: SelectionClass| -> (Relation, &Rational) {
        match class {
            SelectionClass::ColoringStructured => (Relation::Le, &inst.tau_sq),
            SelectionClass::NonColoringStructured => (Relation::Ge, &bound),
            SelectionClass::EdgeContaining => (Relation::Gt, &inst.tau_sq),
            SelectionClass::VertexUncovered => (Relation::Ge, &three),
        }
    };
    let mut counts = [0u64; 4];
    // per class: the value closest to violating its rule
    let mut extreme: [Option<(Rational, ColumnSelection)>; 4] = Default::default();
    let mut violations = Vec::new();
    let mut eval = ResidualEvaluator::new(&inst.matrix);
    for positions in (0..c).combinations(inst.k) {
        let sel = ColumnSelection::from_positions(&inst.matrix, &positions);
        let class = classify(inst, &sel);
        let idx = class as usize;
        counts[idx] += 1;
        let r = eval.residual_sq(&positions)?;
        let (rel, rhs) = rule(class);
        if !rel.holds(&r, rhs) {
            violations.push((sel.clone(), class, r.clone()));
        }
        let worse = match (&extreme[idx], rel) {
            (None, _) => true,
            (Some((e, _)), Relation::Le) => r > *e,
            (Some((e, _)), _) => r < *e,
        };
        if worse {
            extreme[idx] = Some((r, sel));
        }
    }
    let names = ["class_coloring", "class_non_coloring", "class_edge", "class_uncovered"];
    let classes = [
        SelectionClass::ColoringStructured,
        SelectionClass::NonColoringStructured,
        SelectionClass::EdgeContaining,
        SelectionClass::VertexUncovered,
    ];
    let mut records = Vec::new();
    for (i, class) in classes.into_iter().enumerate() {
        if let Some((value, sel)) = extreme[i].take() {
            let (rel, rhs) = rule(class);
            records.push(CheckRecord::new(
                names[i],
                graph,
                format!("{} selections; extreme {sel}", counts[i]),
                value,
                rel,
                rhs.clone(),
            ));
        }
    }
    Ok(Classification { counts, violations, records })
}

/// A canonical selection for the uncovered-vertex check: the first `n`
/// copy columns (canonical order) that avoid vertex `n`. Needs `n >= 2`.
pub fn uncovered_selection(inst: &ReductionInstance) -> Option<ColumnSelection> {
    let n = inst.n();
    let labels: Vec<Label> = (1..=3u8)
        .flat_map(|i| (1..n).map(move |v| Label::copy(v, i)))
        .take(n as usize)
        .collect();
    (labels.len() == n as usize && n >= 2).then(|| ColumnSelection::new(labels))
}

/// Every lemma check that is feasible under `cap`, aggregated.
///
/// Structured sweeps (`3^n`) are reported as one record per check: the
/// projector mismatch as a sum of squared norms (zero iff every mapping
/// matches), and the non-coloring bound as a minimum over mappings.
pub fn check_lemmas(g: &Graph, graph: &str, cap: u128) -> Result<VerificationReport, VerifyError> {
    let inst = build_instance(g)?;
    let (n, m) = (inst.n(), inst.m() as u64);
    let mut report = VerificationReport::default();
    report.push(check_gap(n as u64, m, graph)?);

    let sweeps = 3u128.pow(n);
    let needed = sweeps.max(binomial(inst.matrix.ncols(), inst.k));
    if needed > cap {
        return Err(SolveError::CombinatorialBlowup { needed, cap }.into());
    }
    let mut mismatch = Rational::zero();
    let mut orth = Rational::zero();
    let mut min_excess: Option<(Rational, Rational, String)> = None;
    let mut non_colorings = 0u64;
    for psi in StructuredSelection::enumerate(n) {
        let recs = check_projector_formula(&inst, &psi, graph)?;
        mismatch += &recs[0].lhs;
        orth += &recs[1].lhs;
        if !psi.is_coloring_of(g) {
            non_colorings += 1;
            let recs = check_non_coloring_bound(&inst, &psi, graph)?;
            let excess = &recs[0].lhs - &recs[0].rhs;
            if min_excess.as_ref().is_none_or(|(e, _, _)| excess < *e) {
                min_excess = Some((excess, recs[0].lhs.clone(), recs[0].witness.clone()));
            }
        }
    }
    report.push(CheckRecord::new(
        "projector_formula",
        graph,
        format!("{sweeps} mappings; sum of |closed - direct|^2"),
        mismatch,
        Relation::Eq,
        Rational::zero(),
    ));
    report.push(CheckRecord::new(
        "projector_orthogonal",
        graph,
        format!("{sweeps} mappings; sum of |P - P^T|^2 + |P^2 - P|^2"),
        orth,
        Relation::Eq,
        Rational::zero(),
    ));
    let bound = lower_bound_sq(n as u64, m, &inst.t);
    if let Some((_, residual, w)) = min_excess {
        report.push(CheckRecord::new(
            "non_coloring_bound",
            graph,
            format!("{non_colorings} non-colorings; tightest {w}"),
            residual,
            Relation::Ge,
            bound.clone(),
        ));
    }
    report.push(CheckRecord::new("non_coloring_gap", graph, "lower bound vs threshold", bound, Relation::Gt, inst.tau_sq.clone()));

    if let Some(phi) = three_color_backtracking(g) {
        report.extend(check_coloring_witness(&inst, &phi, graph)?);
    }
    if let Some(sel) = uncovered_selection(&inst) {
        report.push(check_uncovered_vertex(&inst, &sel, graph)?);
    }
    report.push(check_edge_columns(&inst, graph, cap)?);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;

    #[test]
    fn relations() {
        let (a, b) = (int(1), int(2));
        assert!(Relation::Lt.holds(&a, &b) && Relation::Le.holds(&a, &a) && Relation::Eq.holds(&b, &b));
        assert!(Relation::Gt.holds(&b, &a) && Relation::Ge.holds(&b, &b));
        assert!(!Relation::Gt.holds(&a, &a));
    }

    #[test]
    fn summary_line_format() {
        let r = CheckRecord::new("lemma_x", "k3", "w", crate::linalg::rat(1, 2), Relation::Le, int(1));
        assert_eq!(r.summary_line(), "CHECK lemma_x k3 PASS lhs=1/2 rhs=1");
        let r = CheckRecord::new("lemma_x", "k3", "w", int(2), Relation::Le, int(1));
        assert_eq!(r.summary_line(), "CHECK lemma_x k3 FAIL lhs=2 rhs=1");
    }

    #[test]
    fn uncovered_vertex_hypothesis() {
        let inst = build_instance(&corpus::complete(3)).unwrap();
        let ok = ColumnSelection::new([Label::copy(1, 1), Label::copy(1, 2), Label::copy(2, 1)]);
        let rec = check_uncovered_vertex(&inst, &ok, "k3").unwrap();
        assert!(rec.passed(), "{}", rec.summary_line());
        let covered = ColumnSelection::new([Label::copy(1, 1), Label::copy(2, 1), Label::copy(3, 1)]);
        assert!(matches!(check_uncovered_vertex(&inst, &covered, "k3"), Err(VerifyError::HypothesisMismatch(_))));
        let with_edge = ColumnSelection::new([Label::copy(1, 1), Label::copy(1, 2), Label::edge(1, 2)]);
        assert!(matches!(check_uncovered_vertex(&inst, &with_edge, "k3"), Err(VerifyError::HypothesisMismatch(_))));
    }

    #[test]
    fn coloring_checks_reject_wrong_inputs() {
        let inst = build_instance(&corpus::complete(3)).unwrap();
        let proper = StructuredSelection::new(vec![1, 2, 3]).unwrap();
        assert!(matches!(check_non_coloring_bound(&inst, &proper, "k3"), Err(VerifyError::IsAColoring(_))));
        let bad = Coloring::from_slice(&[1, 1, 2]);
        assert!(matches!(
            check_coloring_witness(&inst, &bad, "k3"),
            Err(VerifyError::Reduction(ReductionError::NotAColoring))
        ));
    }

    #[test]
    fn uncovered_selection_shape() {
        let inst = build_instance(&corpus::complete(3)).unwrap();
        let sel = uncovered_selection(&inst).unwrap();
        assert_eq!(sel.to_string(), "v1^1 v2^1 v1^2");
        assert_eq!(classify(&inst, &sel), SelectionClass::VertexUncovered);
    }

    #[test]
    fn k2_full_sweep() {
        let report = check_lemmas(&corpus::complete(2), "k2", 1_000_000).unwrap();
        assert!(report.passed(), "{}", report.to_text());
        assert!(report.to_text().ends_with("VERDICT PASS\n"));
    }
}
