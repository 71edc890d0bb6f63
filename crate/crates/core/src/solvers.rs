//! CSSP solvers: exhaustive exact search, the structured `3^n` search for
//! reduction instances, and a floating-point greedy baseline.
//!
//! Only the exact solvers feed verification. The greedy solver picks columns
//! in `f64`; its chosen selection is then scored exactly, so its value is an
//! upper bound and a YES is certified while a NO is inconclusive.

use std::fmt;
use std::fmt::Write as _;
use std::str::FromStr;

use itertools::Itertools;
use num_traits::ToPrimitive;
use thiserror::Error;

use crate::linalg::{format_rational, projection_residual_sq, Label, LinalgError, RatMatrix, Rational, ResidualEvaluator};
use crate::reduction::{ColumnSelection, ReductionInstance, StructuredSelection};

/// Default limit on the number of subsets an exhaustive search may visit.
pub const DEFAULT_CAP: u128 = 10_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolveError {
    #[error("enumeration needs {needed} subsets, above the cap of {cap}; raise --cap or use a structured mode")]
    CombinatorialBlowup { needed: u128, cap: u128 },
    #[error("mode {mode} unavailable: {reason}")]
    ModeUnavailable { mode: Mode, reason: String },
    #[error("selection size k = {k} must lie in 1..={cols}")]
    BadSelectionSize { k: usize, cols: usize },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    ExactFull,
    ExactStructured,
    Greedy,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::ExactFull => "exact-full",
            Mode::ExactStructured => "exact-structured",
            Mode::Greedy => "greedy",
        })
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "exact-full" => Ok(Mode::ExactFull),
            "exact-structured" => Ok(Mode::ExactStructured),
            "greedy" => Ok(Mode::Greedy),
            other => Err(format!("unknown mode {other:?}")),
        }
    }
}

/// Objective value of a report.
#[derive(Debug, Clone, PartialEq)]
pub enum DeltaSq {
    /// Exact `δ_k²`.
    Exact(Rational),
    /// Exact residual of one selection or the minimum over a restricted
    /// family; an upper bound on `δ_k²`.
    UpperBound(Rational),
}

impl DeltaSq {
    pub fn value(&self) -> &Rational {
        match self {
            DeltaSq::Exact(x) | DeltaSq::UpperBound(x) => x,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            DeltaSq::Exact(_) => "exact",
            DeltaSq::UpperBound(_) => "upper-bound",
        }
    }
}

impl fmt::Display for DeltaSq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_rational(self.value()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub delta_sq: DeltaSq,
    pub best_selection: ColumnSelection,
    pub subsets_examined: u128,
    pub decision: bool,
    pub mode: Mode,
}

impl SolveReport {
    /// Line-oriented text form.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "decision {}", if self.decision { "YES" } else { "NO" });
        let _ = writeln!(out, "delta_sq {}", self.delta_sq);
        let _ = writeln!(out, "delta_sq_kind {}", self.delta_sq.kind());
        let _ = writeln!(out, "selection {}", self.best_selection);
        let _ = writeln!(out, "subsets {}", self.subsets_examined);
        let _ = writeln!(out, "mode {}", self.mode);
        out
    }
}

/// `C(n, k)`, saturating at `u128::MAX`.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) / (i + 1) stays integral at every step
        let Some(next) = acc.checked_mul((n - i) as u128) else {
            return u128::MAX;
        };
        acc = next / (i as u128 + 1);
    }
    acc
}

fn check_k(m: &RatMatrix, k: usize) -> Result<(), SolveError> {
    if k == 0 || k > m.ncols() {
        return Err(SolveError::BadSelectionSize { k, cols: m.ncols() });
    }
    Ok(())
}

/// Exact `δ_k²` by visiting every `k`-subset of columns in lexicographic order.
/// Ties keep the first minimizer.
pub fn exact_brute_force(m: &RatMatrix, k: usize, tau_sq: &Rational, cap: u128) -> Result<SolveReport, SolveError> {
    check_k(m, k)?;
    let needed = binomial(m.ncols(), k);
    if needed > cap {
        return Err(SolveError::CombinatorialBlowup { needed, cap });
    }
    let mut eval = ResidualEvaluator::new(m);
    let mut best: Option<(Rational, Vec<usize>)> = None;
    let mut examined = 0u128;
    for sel in (0..m.ncols()).combinations(k) {
        let r = eval.residual_sq(&sel)?;
        examined += 1;
        if best.as_ref().is_none_or(|(b, _)| r < *b) {
            best = Some((r, sel));
        }
    }
    let (value, sel) = best.expect("at least one subset");
    Ok(SolveReport {
        decision: &value <= tau_sq,
        delta_sq: DeltaSq::Exact(value),
        best_selection: ColumnSelection::from_positions(m, &sel),
        subsets_examined: examined,
        mode: Mode::ExactFull,
    })
}

/// Column positions of `v^i` for every vertex `1..=n` and copy `i`, if `m`
/// has reduction-shaped labels.
fn copy_positions(m: &RatMatrix) -> Option<(u32, Vec<[usize; 3]>)> {
    let n = m.row_labels().iter().filter(|l| matches!(l, Label::Vertex(_))).count() as u32;
    if n == 0 {
        return None;
    }
    let mut out = Vec::with_capacity(n as usize);
    for v in 1..=n {
        m.row_position(&Label::Vertex(v))?;
        let mut slots = [0; 3];
        for (i, slot) in slots.iter_mut().enumerate() {
            *slot = m.col_position(&Label::copy(v, i as u8 + 1))?;
        }
        out.push(slots);
    }
    Some((n, out))
}

/// Minimum residual over the `3^n` structured selections of a
/// reduction-labeled matrix. The minimum bounds `δ_n²` from above; the
/// decision is exact for reduction instances because no other selection can
/// meet the threshold.
pub fn exact_structured_matrix(m: &RatMatrix, k: usize, tau_sq: &Rational) -> Result<SolveReport, SolveError> {
    let unavailable = |reason: String| SolveError::ModeUnavailable { mode: Mode::ExactStructured, reason };
    let (n, copies) = copy_positions(m).ok_or_else(|| unavailable("matrix does not carry reduction labels".into()))?;
    if k != n as usize {
        return Err(unavailable(format!("k = {k} differs from the vertex count {n}")));
    }
    let mut eval = ResidualEvaluator::new(m);
    let mut best: Option<(Rational, StructuredSelection)> = None;
    let mut examined = 0u128;
    for psi in StructuredSelection::enumerate(n) {
        let sel: Vec<usize> = psi
            .psi()
            .iter()
            .zip(&copies)
            .map(|(&c, slots)| slots[(c - 1) as usize])
            .collect();
        let r = eval.residual_sq(&sel)?;
        examined += 1;
        if best.as_ref().is_none_or(|(b, _)| r < *b) {
            best = Some((r, psi));
        }
    }
    let (value, psi) = best.expect("3^n >= 1");
    Ok(SolveReport {
        decision: &value <= tau_sq,
        delta_sq: DeltaSq::UpperBound(value),
        best_selection: psi.to_selection(),
        subsets_examined: examined,
        mode: Mode::ExactStructured,
    })
}

pub fn exact_structured(inst: &ReductionInstance) -> Result<SolveReport, SolveError> {
    exact_structured_matrix(&inst.matrix, inst.k, &inst.tau_sq)
}

/// Dense `f64` matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct FloatMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl FloatMatrix {
    pub fn from_rational(m: &RatMatrix) -> FloatMatrix {
        FloatMatrix {
            rows: m.nrows(),
            cols: m.ncols(),
            data: m.entries().iter().map(|x| x.to_f64().unwrap_or(f64::NAN)).collect(),
        }
    }

    fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.data[i * self.cols + j]).collect()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Greedy forward selection: repeatedly add the column whose inclusion leaves
/// the smallest residual. Ties go to the lowest column index.
///
/// The residual `R = (I - QQ^T) M` is updated in place with each new unit
/// direction `q`, so adding column `j` leaves `|R|^2 - |q^T R|^2` with
/// `q = R_j / |R_j|`.
pub fn greedy_forward(m: &FloatMatrix, k: usize) -> (Vec<usize>, f64) {
    let (r, c) = (m.rows, m.cols);
    let k = k.min(c);
    let mut cols: Vec<Vec<f64>> = (0..c).map(|j| m.column(j)).collect();
    let mut total: f64 = cols.iter().map(|v| dot(v, v)).sum();
    let mut chosen = Vec::with_capacity(k);
    // directions with norm at or below this are treated as already spanned
    let tiny = f64::EPSILON * m.data.iter().fold(0.0f64, |a, x| a.max(x.abs())).max(f64::MIN_POSITIVE) * r as f64;

    for _ in 0..k {
        let mut best: Option<(usize, f64, Option<Vec<f64>>)> = None;
        for j in (0..c).filter(|j| !chosen.contains(j)) {
            let norm = dot(&cols[j], &cols[j]).sqrt();
            let (after, q) = if norm <= tiny {
                (total, None)
            } else {
                let q: Vec<f64> = cols[j].iter().map(|x| x / norm).collect();
                let removed: f64 = cols.iter().map(|v| dot(&q, v).powi(2)).sum();
                ((total - removed).max(0.0), Some(q))
            };
            if best.as_ref().is_none_or(|(_, b, _)| after < *b) {
                best = Some((j, after, q));
            }
        }
        let (j, after, q) = best.expect("k <= c leaves a candidate");
        if let Some(q) = q {
            for v in cols.iter_mut() {
                let proj = dot(&q, v);
                for (x, qi) in v.iter_mut().zip(&q) {
                    *x -= proj * qi;
                }
            }
            // recompute instead of trusting the running subtraction
            total = cols.iter().map(|v| dot(v, v)).sum();
        } else {
            total = after;
        }
        chosen.push(j);
    }
    chosen.sort_unstable();
    (chosen, total)
}

/// Greedy columns from [`greedy_forward`], scored exactly.
pub fn greedy_report(m: &RatMatrix, k: usize, tau_sq: &Rational) -> Result<SolveReport, SolveError> {
    check_k(m, k)?;
    let (sel, _) = greedy_forward(&FloatMatrix::from_rational(m), k);
    let residual = projection_residual_sq(m, &sel)?;
    Ok(SolveReport {
        decision: &residual <= tau_sq,
        delta_sq: DeltaSq::UpperBound(residual),
        best_selection: ColumnSelection::from_positions(m, &sel),
        subsets_examined: k as u128,
        mode: Mode::Greedy,
    })
}

pub fn solve(m: &RatMatrix, k: usize, tau_sq: &Rational, mode: Mode, cap: u128) -> Result<SolveReport, SolveError> {
    match mode {
        Mode::ExactFull => exact_brute_force(m, k, tau_sq, cap),
        Mode::ExactStructured => exact_structured_matrix(m, k, tau_sq),
        Mode::Greedy => greedy_report(m, k, tau_sq),
    }
}

/// Is `δ_k(M)² ≤ τ`? Exact modes only.
pub fn decide_cssp(m: &RatMatrix, k: usize, tau_sq: &Rational, mode: Mode, cap: u128) -> Result<bool, SolveError> {
    if mode == Mode::Greedy {
        return Err(SolveError::ModeUnavailable { mode, reason: "the decision requires an exact mode".into() });
    }
    Ok(solve(m, k, tau_sq, mode, cap)?.decision)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;
    use crate::linalg::{int, Label};
    use crate::reduction::build_instance;

    fn eye2() -> RatMatrix {
        RatMatrix::from_i64_rows(&[&[1, 0], &[0, 1]]).unwrap()
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(12, 3), 220);
        assert_eq!(binomial(18, 4), 3060);
        assert_eq!(binomial(45, 10), 3_190_187_286);
        assert_eq!(binomial(3, 5), 0);
        assert_eq!(binomial(400, 200), u128::MAX);
    }

    #[test]
    fn brute_force_identity() {
        let r = exact_brute_force(&eye2(), 2, &int(0), DEFAULT_CAP).unwrap();
        assert_eq!(r.delta_sq, DeltaSq::Exact(int(0)));
        assert_eq!(r.best_selection.len(), 2);
        assert!(r.decision);
        let r = exact_brute_force(&eye2(), 1, &int(1), DEFAULT_CAP).unwrap();
        assert_eq!(r.best_selection.to_string(), "x0");
    }

    #[test]
    fn cap_is_enforced() {
        let err = exact_brute_force(&eye2(), 1, &int(1), 1).unwrap_err();
        assert_eq!(err, SolveError::CombinatorialBlowup { needed: 2, cap: 1 });
        assert!(matches!(exact_brute_force(&eye2(), 3, &int(1), 10), Err(SolveError::BadSelectionSize { .. })));
    }

    #[test]
    fn decide_boundary_is_inclusive() {
        assert!(decide_cssp(&eye2(), 1, &int(1), Mode::ExactFull, DEFAULT_CAP).unwrap());
        assert!(!decide_cssp(&eye2(), 1, &crate::linalg::rat(99, 100), Mode::ExactFull, DEFAULT_CAP).unwrap());
    }

    #[test]
    fn structured_mode_needs_reduction_labels() {
        let err = decide_cssp(&eye2(), 1, &int(1), Mode::ExactStructured, DEFAULT_CAP).unwrap_err();
        assert!(matches!(err, SolveError::ModeUnavailable { .. }));
        let inst = build_instance(&Graph::new(2, [(1, 2)]).unwrap()).unwrap();
        let err = exact_structured_matrix(&inst.matrix, 3, &inst.tau_sq).unwrap_err();
        assert!(matches!(err, SolveError::ModeUnavailable { .. }));
        assert!(matches!(
            decide_cssp(&inst.matrix, 2, &inst.tau_sq, Mode::Greedy, DEFAULT_CAP),
            Err(SolveError::ModeUnavailable { .. })
        ));
    }

    #[test]
    fn greedy_identity() {
        let f = FloatMatrix::from_rational(&eye2());
        let (sel, r) = greedy_forward(&f, 1);
        assert_eq!(sel, vec![0]);
        assert!((r - 1.0).abs() < 1e-12);
        let (sel, r) = greedy_forward(&f, 2);
        assert_eq!(sel, vec![0, 1]);
        assert!(r.abs() < 1e-12);
    }

    #[test]
    fn greedy_skips_zero_columns_gracefully() {
        let m = RatMatrix::from_i64_rows(&[&[0, 3, 3], &[0, 4, 4]]).unwrap();
        let (sel, r) = greedy_forward(&FloatMatrix::from_rational(&m), 2);
        assert_eq!(sel, vec![0, 1]);
        assert!(r.abs() < 1e-12);
    }

    #[test]
    fn report_text_shape() {
        let inst = build_instance(&Graph::new(2, [(1, 2)]).unwrap()).unwrap();
        let r = exact_structured(&inst).unwrap();
        let text = r.to_text();
        let keys: Vec<&str> = text.lines().map(|l| l.split(' ').next().unwrap()).collect();
        assert_eq!(keys, ["decision", "delta_sq", "delta_sq_kind", "selection", "subsets", "mode"]);
        assert!(text.contains("decision YES\n"));
        assert!(text.contains("delta_sq_kind upper-bound\n"));
        assert!(text.contains("subsets 9\n"));
        assert!(r.best_selection.labels().all(|l| matches!(l, Label::Copy { .. })));
    }
}
