//! Exact dense linear algebra over arbitrary-precision rationals.
//!
//! Every matrix carries a label per row and per column so that reduction
//! matrices can be addressed by vertex, color and edge names. Plain matrices
//! use [`Label::Index`]. Nothing in this module touches floating point.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

/// Exact rational scalar, always kept in lowest terms with a positive denominator.
pub type Rational = BigRational;

/// Builds `num / den` in canonical form. Panics if `den == 0`.
pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(value: i64) -> Rational {
    Rational::from_integer(BigInt::from(value))
}

/// Formats as `p/q`, or `p` when the denominator is one.
pub fn format_rational(value: &Rational) -> String {
    value.to_string()
}

/// Parses `p/q` or `p` (optional leading `-`). The result is reduced.
pub fn parse_rational(text: &str) -> Result<Rational, LinalgError> {
    let bad = || LinalgError::BadRational(text.to_string());
    let (num, den) = match text.split_once('/') {
        Some((n, d)) => (n, Some(d)),
        None => (text, None),
    };
    let digits = |s: &str, allow_sign: bool| {
        let body = if allow_sign { s.strip_prefix('-').unwrap_or(s) } else { s };
        !body.is_empty() && body.bytes().all(|b| b.is_ascii_digit())
    };
    if !digits(num, true) {
        return Err(bad());
    }
    let num = BigInt::from_str(num).map_err(|_| bad())?;
    let den = match den {
        Some(d) if digits(d, false) => BigInt::from_str(d).map_err(|_| bad())?,
        Some(_) => return Err(bad()),
        None => BigInt::one(),
    };
    if den.is_zero() {
        return Err(bad());
    }
    Ok(Rational::new(num, den))
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LinalgError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("duplicate label {0} on one axis")]
    DuplicateLabel(Label),
    #[error("matrix is singular")]
    SingularMatrix,
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("column position {position} out of range for {cols} columns")]
    InvalidColumn { position: usize, cols: usize },
    #[error("malformed rational {0:?}")]
    BadRational(String),
    #[error("malformed label {0:?}")]
    BadLabel(String),
}

/// Row or column label.
///
/// Row and column labels share one type because transposition moves labels
/// between axes. The derived ordering is the canonical axis order: vertex rows,
/// then color rows 1..3, then epsilon; vertex copies grouped by copy index
/// (all of `V^1`, then `V^2`, then `V^3`), then edges lexicographically.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Label {
    /// Anonymous position for matrices with no domain meaning.
    Index(usize),
    Vertex(u32),
    Color(u8),
    Epsilon,
    Copy { copy: u8, vertex: u32 },
    /// Endpoints are stored sorted; build with [`Label::edge`].
    Edge(u32, u32),
}

impl Label {
    pub fn edge(u: u32, v: u32) -> Label {
        Label::Edge(u.min(v), u.max(v))
    }

    pub fn copy(vertex: u32, copy: u8) -> Label {
        Label::Copy { copy, vertex }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Index(i) => write!(f, "x{i}"),
            Label::Vertex(v) => write!(f, "v{v}"),
            Label::Color(c) => write!(f, "c{c}"),
            Label::Epsilon => write!(f, "eps"),
            Label::Copy { copy, vertex } => write!(f, "v{vertex}^{copy}"),
            Label::Edge(u, v) => write!(f, "e{u}_{v}"),
        }
    }
}

impl FromStr for Label {
    type Err = LinalgError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || LinalgError::BadLabel(s.to_string());
        let num = |t: &str| -> Result<u32, LinalgError> {
            if t.is_empty() || !t.bytes().all(|b| b.is_ascii_digit()) {
                return Err(bad());
            }
            t.parse().map_err(|_| bad())
        };
        if s == "eps" {
            return Ok(Label::Epsilon);
        }
        if let Some(rest) = s.strip_prefix('x') {
            return Ok(Label::Index(num(rest)? as usize));
        }
        if let Some(rest) = s.strip_prefix('c') {
            let c = num(rest)?;
            if !(1..=3).contains(&c) {
                return Err(bad());
            }
            return Ok(Label::Color(c as u8));
        }
        if let Some(rest) = s.strip_prefix('e') {
            let (u, v) = rest.split_once('_').ok_or_else(bad)?;
            let (u, v) = (num(u)?, num(v)?);
            if u >= v {
                return Err(bad());
            }
            return Ok(Label::Edge(u, v));
        }
        if let Some(rest) = s.strip_prefix('v') {
            return match rest.split_once('^') {
                Some((v, c)) => {
                    let c = num(c)?;
                    if !(1..=3).contains(&c) {
                        return Err(bad());
                    }
                    Ok(Label::copy(num(v)?, c as u8))
                }
                None => Ok(Label::Vertex(num(rest)?)),
            };
        }
        Err(bad())
    }
}

/// Dense labeled matrix of rationals, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RatMatrix {
    rows: Vec<Label>,
    cols: Vec<Label>,
    data: Vec<Rational>,
}

fn check_distinct(labels: &[Label]) -> Result<(), LinalgError> {
    let mut seen = HashSet::with_capacity(labels.len());
    for l in labels {
        if !seen.insert(l) {
            return Err(LinalgError::DuplicateLabel(l.clone()));
        }
    }
    Ok(())
}

fn index_labels(n: usize) -> Vec<Label> {
    (0..n).map(Label::Index).collect()
}

impl RatMatrix {
    pub fn new(rows: Vec<Label>, cols: Vec<Label>, data: Vec<Rational>) -> Result<Self, LinalgError> {
        if data.len() != rows.len() * cols.len() {
            return Err(LinalgError::DimensionMismatch(format!(
                "{} entries for a {}x{} grid",
                data.len(),
                rows.len(),
                cols.len()
            )));
        }
        check_distinct(&rows)?;
        check_distinct(&cols)?;
        Ok(RatMatrix { rows, cols, data })
    }

    pub fn zeros(rows: Vec<Label>, cols: Vec<Label>) -> Result<Self, LinalgError> {
        let data = vec![Rational::zero(); rows.len() * cols.len()];
        Self::new(rows, cols, data)
    }

    /// Identity with the same labels on both axes.
    pub fn identity(labels: Vec<Label>) -> Result<Self, LinalgError> {
        let n = labels.len();
        let mut m = Self::zeros(labels.clone(), labels)?;
        for i in 0..n {
            m.data[i * n + i] = Rational::one();
        }
        Ok(m)
    }

    /// Unlabeled matrix from rows; every row must have the same length.
    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Result<Self, LinalgError> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(LinalgError::DimensionMismatch("ragged rows".into()));
        }
        Self::new(index_labels(r), index_labels(c), rows.into_iter().flatten().collect())
    }

    /// Unlabeled matrix with integer entries.
    pub fn from_i64_rows(rows: &[&[i64]]) -> Result<Self, LinalgError> {
        Self::from_rows(rows.iter().map(|r| r.iter().map(|&x| int(x)).collect()).collect())
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn ncols(&self) -> usize {
        self.cols.len()
    }

    pub fn row_labels(&self) -> &[Label] {
        &self.rows
    }

    pub fn col_labels(&self) -> &[Label] {
        &self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Rational {
        &self.data[i * self.cols.len() + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: Rational) {
        let c = self.cols.len();
        self.data[i * c + j] = value;
    }

    pub fn row_position(&self, label: &Label) -> Option<usize> {
        self.rows.iter().position(|l| l == label)
    }

    pub fn col_position(&self, label: &Label) -> Option<usize> {
        self.cols.iter().position(|l| l == label)
    }

    /// Entry addressed by labels.
    pub fn at(&self, row: &Label, col: &Label) -> Option<&Rational> {
        Some(self.get(self.row_position(row)?, self.col_position(col)?))
    }

    pub fn row(&self, i: usize) -> &[Rational] {
        let c = self.cols.len();
        &self.data[i * c..(i + 1) * c]
    }

    pub fn entries(&self) -> &[Rational] {
        &self.data
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn transpose(&self) -> RatMatrix {
        let (r, c) = (self.nrows(), self.ncols());
        let mut data = Vec::with_capacity(r * c);
        for j in 0..c {
            for i in 0..r {
                data.push(self.get(i, j).clone());
            }
        }
        RatMatrix { rows: self.cols.clone(), cols: self.rows.clone(), data }
    }

    /// Submatrix of the given column positions, in the given order.
    ///
    /// Repeated positions would duplicate a label, so they are rejected.
    pub fn select_columns(&self, positions: &[usize]) -> Result<RatMatrix, LinalgError> {
        let c = self.ncols();
        if let Some(&bad) = positions.iter().find(|&&p| p >= c) {
            return Err(LinalgError::InvalidColumn { position: bad, cols: c });
        }
        let cols: Vec<Label> = positions.iter().map(|&p| self.cols[p].clone()).collect();
        check_distinct(&cols)?;
        let mut data = Vec::with_capacity(self.nrows() * positions.len());
        for i in 0..self.nrows() {
            let row = self.row(i);
            data.extend(positions.iter().map(|&p| row[p].clone()));
        }
        Ok(RatMatrix { rows: self.rows.clone(), cols, data })
    }

    /// Entrywise difference; labels taken from `self`.
    pub fn sub(&self, other: &RatMatrix) -> Result<RatMatrix, LinalgError> {
        if self.nrows() != other.nrows() || self.ncols() != other.ncols() {
            return Err(LinalgError::DimensionMismatch(format!(
                "{}x{} minus {}x{}",
                self.nrows(),
                self.ncols(),
                other.nrows(),
                other.ncols()
            )));
        }
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Ok(RatMatrix { rows: self.rows.clone(), cols: self.cols.clone(), data })
    }

    /// Same entries, rows and columns permuted so that labels follow `rows`/`cols`.
    pub fn reindexed(&self, rows: &[Label], cols: &[Label]) -> Option<RatMatrix> {
        let rpos: Option<Vec<usize>> = rows.iter().map(|l| self.row_position(l)).collect();
        let cpos: Option<Vec<usize>> = cols.iter().map(|l| self.col_position(l)).collect();
        let (rpos, cpos) = (rpos?, cpos?);
        if rpos.len() != self.nrows() || cpos.len() != self.ncols() {
            return None;
        }
        let mut data = Vec::with_capacity(self.data.len());
        for &i in &rpos {
            data.extend(cpos.iter().map(|&j| self.get(i, j).clone()));
        }
        Some(RatMatrix { rows: rows.to_vec(), cols: cols.to_vec(), data })
    }

    pub fn frobenius_sq(&self) -> Rational {
        frobenius_sq(self)
    }
}

impl fmt::Display for RatMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.nrows() {
            let row: Vec<String> = self.row(i).iter().map(format_rational).collect();
            writeln!(f, "{:>5} | {}", self.rows[i].to_string(), row.join(" "))?;
        }
        Ok(())
    }
}

/// Sum of squared entries.
pub fn frobenius_sq(m: &RatMatrix) -> Rational {
    m.data
        .iter()
        .filter(|x| !x.is_zero())
        .fold(Rational::zero(), |acc, x| acc + x * x)
}

pub fn matmul(a: &RatMatrix, b: &RatMatrix) -> Result<RatMatrix, LinalgError> {
    if a.ncols() != b.nrows() {
        return Err(LinalgError::DimensionMismatch(format!(
            "{}x{} times {}x{}",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols()
        )));
    }
    let (r, inner, c) = (a.nrows(), a.ncols(), b.ncols());
    let mut data = vec![Rational::zero(); r * c];
    for i in 0..r {
        let out = &mut data[i * c..(i + 1) * c];
        for l in 0..inner {
            let x = a.get(i, l);
            if x.is_zero() {
                continue;
            }
            for (o, y) in out.iter_mut().zip(b.row(l)) {
                if !y.is_zero() {
                    *o += x * y;
                }
            }
        }
    }
    Ok(RatMatrix { rows: a.rows.clone(), cols: b.cols.clone(), data })
}

/// Gauss-Jordan elimination in place on a row-major `rows x width` buffer.
///
/// Pivots are searched only in columns `0..pivot_cols`; the remaining columns
/// are carried along (augmented part). The pivot is the first nonzero entry at
/// or below the current row. Returns the pivot columns.
fn gauss_jordan(data: &mut [Rational], rows: usize, width: usize, pivot_cols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..pivot_cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !data[i * width + col].is_zero()) else {
            continue;
        };
        if p != r {
            for j in 0..width {
                data.swap(p * width + j, r * width + j);
            }
        }
        let inv = data[r * width + col].recip();
        if !inv.is_one() {
            for x in &mut data[r * width + col..(r + 1) * width] {
                if !x.is_zero() {
                    *x *= &inv;
                }
            }
        }
        let pivot_row: Vec<(usize, Rational)> = (col..width)
            .filter(|&j| !data[r * width + j].is_zero())
            .map(|j| (j, data[r * width + j].clone()))
            .collect();
        for i in 0..rows {
            if i == r {
                continue;
            }
            let factor = data[i * width + col].clone();
            if factor.is_zero() {
                continue;
            }
            for (j, pv) in &pivot_row {
                data[i * width + j] -= &factor * pv;
            }
        }
        pivots.push(col);
        r += 1;
    }
    pivots
}

/// Exact inverse by Gauss-Jordan on `[M | I]`.
pub fn invert(m: &RatMatrix) -> Result<RatMatrix, LinalgError> {
    let n = m.nrows();
    if m.ncols() != n {
        return Err(LinalgError::NotSquare { rows: n, cols: m.ncols() });
    }
    let width = 2 * n;
    let mut aug = vec![Rational::zero(); n * width];
    for i in 0..n {
        for j in 0..n {
            aug[i * width + j] = m.get(i, j).clone();
        }
        aug[i * width + n + i] = Rational::one();
    }
    if gauss_jordan(&mut aug, n, width, n).len() < n {
        return Err(LinalgError::SingularMatrix);
    }
    let data = (0..n)
        .flat_map(|i| aug[i * width + n..(i + 1) * width].to_vec())
        .collect();
    Ok(RatMatrix { rows: m.cols.clone(), cols: m.rows.clone(), data })
}

/// Reduced row echelon form and the pivot column positions.
pub fn rref(m: &RatMatrix) -> (RatMatrix, Vec<usize>) {
    let mut out = m.clone();
    let (r, c) = (m.nrows(), m.ncols());
    let pivots = gauss_jordan(&mut out.data, r, c, c);
    (out, pivots)
}

/// `(S^T S)^{-1} S^T` for a full-column-rank `S`.
pub fn pseudoinverse_full_rank(s: &RatMatrix) -> Result<RatMatrix, LinalgError> {
    let st = s.transpose();
    let gram = matmul(&st, s)?;
    matmul(&invert(&gram)?, &st)
}

/// Squared Frobenius norm of `target - P target`, where `P` projects onto the
/// span of the columns of `spanning`.
///
/// `spanning` may be rank deficient: a column basis is taken from its RREF
/// pivots before solving the normal equations `(B^T B) X = B^T target`, so
/// `B X` is the projection and the residual is `|target|^2 - <B^T target, X>`.
pub fn residual_sq_against(target: &RatMatrix, spanning: &RatMatrix) -> Result<Rational, LinalgError> {
    if target.nrows() != spanning.nrows() {
        return Err(LinalgError::DimensionMismatch(format!(
            "target has {} rows, spanning set has {}",
            target.nrows(),
            spanning.nrows()
        )));
    }
    let total = frobenius_sq(target);
    if spanning.ncols() == 0 {
        return Ok(total);
    }
    let (_, pivots) = rref(spanning);
    if pivots.is_empty() {
        return Ok(total);
    }
    let basis = spanning.select_columns(&pivots)?;
    let bt = basis.transpose();
    let gram = matmul(&bt, &basis)?;
    let rhs = matmul(&bt, target)?;

    let k = pivots.len();
    let c = target.ncols();
    let width = k + c;
    let mut aug = vec![Rational::zero(); k * width];
    for i in 0..k {
        aug[i * width..i * width + k].clone_from_slice(gram.row(i));
        aug[i * width + k..(i + 1) * width].clone_from_slice(rhs.row(i));
    }
    if gauss_jordan(&mut aug, k, width, k).len() < k {
        // pivots of an RREF are independent, so the Gram matrix is invertible
        return Err(LinalgError::SingularMatrix);
    }
    let mut projected = Rational::zero();
    for i in 0..k {
        for (b, x) in rhs.row(i).iter().zip(&aug[i * width + k..(i + 1) * width]) {
            if !b.is_zero() && !x.is_zero() {
                projected += b * x;
            }
        }
    }
    Ok(total - projected)
}

/// `|(I - S S^+) M|^2` with `S` the columns of `m` at `selection`.
pub fn projection_residual_sq(m: &RatMatrix, selection: &[usize]) -> Result<Rational, LinalgError> {
    ResidualEvaluator::without_cache(m).residual_sq(selection)
}

/// Evaluates `|(I - S S^+) M|^2` for many selections of one matrix.
///
/// Selected columns are grouped into components that share no nonzero row.
/// Their spans are mutually orthogonal, so the projection splits into one
/// small solve per component on the rows that component touches. Component
/// results are memoized by column set.
pub struct ResidualEvaluator<'a> {
    m: &'a RatMatrix,
    total: Rational,
    col_support: Vec<Vec<usize>>,
    cache: Option<HashMap<Vec<usize>, Rational>>,
}

const CACHE_LIMIT: usize = 1 << 18;

impl<'a> ResidualEvaluator<'a> {
    pub fn new(m: &'a RatMatrix) -> Self {
        let mut out = Self::without_cache(m);
        out.cache = Some(HashMap::new());
        out
    }

    fn without_cache(m: &'a RatMatrix) -> Self {
        let col_support = (0..m.ncols())
            .map(|j| (0..m.nrows()).filter(|&i| !m.get(i, j).is_zero()).collect())
            .collect();
        ResidualEvaluator { m, total: frobenius_sq(m), col_support, cache: None }
    }

    pub fn residual_sq(&mut self, selection: &[usize]) -> Result<Rational, LinalgError> {
        let c = self.m.ncols();
        if let Some(&bad) = selection.iter().find(|&&p| p >= c) {
            return Err(LinalgError::InvalidColumn { position: bad, cols: c });
        }
        let mut positions = selection.to_vec();
        positions.sort_unstable();
        positions.dedup();
        positions.retain(|&j| !self.col_support[j].is_empty());

        let mut residual = self.total.clone();
        for comp in self.components(&positions) {
            let cached = self.cache.as_ref().and_then(|c| c.get(&comp)).cloned();
            let projected = match cached {
                Some(v) => v,
                None => {
                    let v = self.projected_sq(&comp)?;
                    if let Some(cache) = self.cache.as_mut() {
                        if cache.len() >= CACHE_LIMIT {
                            cache.clear();
                        }
                        cache.insert(comp, v.clone());
                    }
                    v
                }
            };
            residual -= projected;
        }
        Ok(residual)
    }

    /// Groups sorted positions into components linked by shared rows.
    fn components(&self, positions: &[usize]) -> Vec<Vec<usize>> {
        let mut parent: Vec<usize> = (0..positions.len()).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        let mut owner: HashMap<usize, usize> = HashMap::new();
        for (a, &j) in positions.iter().enumerate() {
            for &row in &self.col_support[j] {
                match owner.get(&row) {
                    Some(&b) => {
                        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                        parent[ra] = rb;
                    }
                    None => {
                        owner.insert(row, a);
                    }
                }
            }
        }
        let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (a, &j) in positions.iter().enumerate() {
            let r = find(&mut parent, a);
            groups.entry(r).or_default().push(j);
        }
        groups.into_values().collect()
    }

    /// `|P M|^2` for `P` the projector onto the span of columns `comp`,
    /// computed on the rows and columns that interact with them.
    fn projected_sq(&self, comp: &[usize]) -> Result<Rational, LinalgError> {
        let mut rows: Vec<usize> = comp.iter().flat_map(|&j| self.col_support[j].iter().copied()).collect();
        rows.sort_unstable();
        rows.dedup();
        let cols: Vec<usize> = (0..self.m.ncols())
            .filter(|&j| rows.iter().any(|&i| !self.m.get(i, j).is_zero()))
            .collect();
        let restrict = |cs: &[usize]| -> Result<RatMatrix, LinalgError> {
            let data = rows
                .iter()
                .flat_map(|&i| cs.iter().map(move |&j| self.m.get(i, j).clone()))
                .collect();
            RatMatrix::new(index_labels(rows.len()), cs.iter().map(|&j| self.m.col_labels()[j].clone()).collect(), data)
        };
        let target = restrict(&cols)?;
        let spanning = restrict(comp)?;
        Ok(frobenius_sq(&target) - residual_sq_against(&target, &spanning)?)
    }
}

/// Every diagonal entry strictly exceeds, in absolute value, the sum of
/// absolute values of the other entries in its column.
pub fn is_strictly_column_diagonally_dominant(d: &RatMatrix) -> Result<bool, LinalgError> {
    let n = d.nrows();
    if d.ncols() != n {
        return Err(LinalgError::NotSquare { rows: n, cols: d.ncols() });
    }
    Ok((0..n).all(|j| {
        let off: Rational = (0..n).filter(|&i| i != j).map(|i| d.get(i, j).abs()).sum();
        d.get(j, j).abs() > off
    }))
}
