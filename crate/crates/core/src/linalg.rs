//! Dense real matrices and the handful of kernels the rest of the crate needs:
//! numerical rank, an orthonormal null-space basis and row stacking.
//!
//! Everything is row-major `f64` and sized for desk-scale problems (a few hundred
//! rows and columns at most).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{} entries supplied for a {}x{} matrix",
                data.len(),
                rows,
                cols
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("matrix entries"));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    /// Builds a matrix from row slices. An empty list yields a `0 x 0` matrix.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(Error::Dimension(format!(
                    "row {i} has {} entries, expected {cols}",
                    r.len()
                )));
            }
            data.extend_from_slice(r);
        }
        Self::new(rows.len(), cols, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<f64> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.set(c, r, self.get(r, c));
            }
        }
        t
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols, "mul_vec dimension mismatch");
        (0..self.rows).map(|r| dot(self.row(r), x)).collect()
    }

    /// `self^T * w`.
    pub fn tr_mul_vec(&self, w: &[f64]) -> Vec<f64> {
        assert_eq!(w.len(), self.rows, "tr_mul_vec dimension mismatch");
        let mut out = vec![0.0; self.cols];
        for (r, &wr) in w.iter().enumerate() {
            if wr == 0.0 {
                continue;
            }
            for (o, &a) in out.iter_mut().zip(self.row(r)) {
                *o += wr * a;
            }
        }
        out
    }

    pub fn mul(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        if self.cols != other.rows {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out.data[i * other.cols + j] += a * other.get(k, j);
                }
            }
        }
        Ok(out)
    }

    /// Submatrix with the given row and column index lists, in the given order.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Self {
        let mut data = Vec::with_capacity(rows.len() * cols.len());
        for &r in rows {
            for &c in cols {
                data.push(self.get(r, c));
            }
        }
        Self { rows: rows.len(), cols: cols.len(), data }
    }

    pub fn select_rows(&self, rows: &[usize]) -> Self {
        let cols: Vec<usize> = (0..self.cols).collect();
        self.select(rows, &cols)
    }

    pub fn select_cols(&self, cols: &[usize]) -> Self {
        let rows: Vec<usize> = (0..self.rows).collect();
        self.select(&rows, cols)
    }

    /// Permutes rows: row `i` of the result is row `perm[i]` of `self`.
    pub fn permute_rows(&self, perm: &[usize]) -> Self {
        self.select_rows(perm)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn norm1(a: &[f64]) -> f64 {
    a.iter().map(|v| v.abs()).sum()
}

pub fn max_abs(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Thresholds used across the crate.
///
/// * `rank_tol`: relative pivot threshold for numerical rank.
/// * `active_tol`: distance from `+-1` at which a BP inequality counts as active.
/// * `margin_tol`: minimum margin that certifies a strict inequality system.
/// * `sign_tol`: band around zero that the sign functions map to zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TolerancePolicy {
    pub rank_tol: f64,
    pub active_tol: f64,
    pub margin_tol: f64,
    pub sign_tol: f64,
}

impl Default for TolerancePolicy {
    fn default() -> Self {
        Self { rank_tol: 1e-9, active_tol: 1e-7, margin_tol: 1e-8, sign_tol: 1e-8 }
    }
}

impl TolerancePolicy {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("rank_tol", self.rank_tol),
            ("active_tol", self.active_tol),
            ("margin_tol", self.margin_tol),
            ("sign_tol", self.sign_tol),
        ] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::Tolerance(format!("{name} = {v} must lie in (0, 1)")));
            }
        }
        Ok(())
    }
}

/// Outcome of a pivoted row reduction, with the pivot magnitudes needed to judge
/// how close a rank decision was to the threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct RankProfile {
    pub rank: usize,
    pub pivot_cols: Vec<usize>,
    /// Absolute threshold that was applied.
    pub threshold: f64,
    /// Smallest accepted pivot magnitude (`inf` when rank is 0).
    pub smallest_pivot: f64,
    /// Largest candidate pivot that was rejected (0 when none was).
    pub largest_rejected: f64,
}

fn pivot_threshold(m: &DenseMatrix, tol: &TolerancePolicy) -> f64 {
    let scale = m.max_abs();
    tol.rank_tol * if scale > 0.0 { scale } else { 1.0 }
}

/// Row echelon reduction with partial pivoting, returning the reduced working
/// copy together with its profile. When `full` is set the pivot rows are also
/// normalised and eliminated upwards (reduced row echelon form).
fn reduce(m: &DenseMatrix, tol: &TolerancePolicy, full: bool) -> (DenseMatrix, RankProfile) {
    let threshold = pivot_threshold(m, tol);
    let mut a = m.clone();
    let (rows, cols) = (a.rows, a.cols);
    let mut rank = 0;
    let mut pivot_cols = Vec::new();
    let mut smallest = f64::INFINITY;
    let mut largest_rejected: f64 = 0.0;

    for c in 0..cols {
        if rank == rows {
            break;
        }
        let (p, best) = (rank..rows)
            .map(|r| (r, a.get(r, c).abs()))
            .fold((rank, -1.0), |acc, cur| if cur.1 > acc.1 { cur } else { acc });
        if best <= threshold {
            largest_rejected = largest_rejected.max(best);
            for r in rank..rows {
                a.set(r, c, 0.0);
            }
            continue;
        }
        smallest = smallest.min(best);
        if p != rank {
            for j in 0..cols {
                a.data.swap(p * cols + j, rank * cols + j);
            }
        }
        let piv = a.get(rank, c);
        if full {
            for j in c..cols {
                let v = a.get(rank, j) / piv;
                a.set(rank, j, v);
            }
        }
        let prow: Vec<f64> = a.row(rank).to_vec();
        let pval = prow[c];
        let targets: Box<dyn Iterator<Item = usize>> =
            if full { Box::new((0..rows).filter(|&r| r != rank)) } else { Box::new(rank + 1..rows) };
        for r in targets {
            let f = a.get(r, c) / pval;
            if f == 0.0 {
                continue;
            }
            for j in c..cols {
                let v = a.get(r, j) - f * prow[j];
                a.set(r, j, v);
            }
            a.set(r, c, 0.0);
        }
        pivot_cols.push(c);
        rank += 1;
    }

    let profile = RankProfile {
        rank,
        pivot_cols,
        threshold,
        smallest_pivot: smallest,
        largest_rejected,
    };
    (a, profile)
}

pub fn rank_profile(m: &DenseMatrix, tol: &TolerancePolicy) -> RankProfile {
    reduce(m, tol, false).1
}

/// Numerical rank by row reduction with partial pivoting. A pivot counts as zero
/// when its magnitude is at most `rank_tol` times the largest entry of `m`.
pub fn column_rank(m: &DenseMatrix, tol: &TolerancePolicy) -> usize {
    rank_profile(m, tol).rank
}

pub fn has_full_column_rank(m: &DenseMatrix, tol: &TolerancePolicy) -> bool {
    column_rank(m, tol) == m.cols()
}

/// Orthonormal basis of `{x : m x = 0}` as the columns of a `cols x (cols - rank)`
/// matrix.
pub fn null_space_basis(m: &DenseMatrix, tol: &TolerancePolicy) -> DenseMatrix {
    let n = m.cols();
    let (rref, profile) = reduce(m, tol, true);
    let mut is_pivot = vec![false; n];
    for &c in &profile.pivot_cols {
        is_pivot[c] = true;
    }

    let mut raw: Vec<Vec<f64>> = Vec::new();
    for f in (0..n).filter(|&c| !is_pivot[c]) {
        let mut v = vec![0.0; n];
        v[f] = 1.0;
        for (r, &pc) in profile.pivot_cols.iter().enumerate() {
            v[pc] = -rref.get(r, f);
        }
        raw.push(v);
    }

    // Modified Gram-Schmidt, two passes.
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(raw.len());
    for mut v in raw {
        for _ in 0..2 {
            for q in &basis {
                let p = dot(q, &v);
                for (vi, qi) in v.iter_mut().zip(q) {
                    *vi -= p * qi;
                }
            }
        }
        let nv = norm2(&v);
        if nv > 1e-14 {
            v.iter_mut().for_each(|x| *x /= nv);
            basis.push(v);
        }
    }

    let k = basis.len();
    let mut out = DenseMatrix::zeros(n, k);
    for (j, q) in basis.iter().enumerate() {
        for (i, &v) in q.iter().enumerate() {
            out.set(i, j, v);
        }
    }
    out
}

/// Vertical concatenation. `cols` fixes the width so that an empty list (or a list
/// of `0 x cols` blocks) still produces a well-formed `0 x cols` matrix.
pub fn stack_rows(blocks: &[&DenseMatrix], cols: usize) -> Result<DenseMatrix> {
    let mut data = Vec::new();
    let mut rows = 0;
    for (i, b) in blocks.iter().enumerate() {
        if b.cols() != cols {
            return Err(Error::Dimension(format!(
                "block {i} has {} columns, expected {cols}",
                b.cols()
            )));
        }
        data.extend_from_slice(b.data());
        rows += b.rows();
    }
    Ok(DenseMatrix { rows, cols, data })
}

/// Solves the square system `a x = b` by Gaussian elimination with partial
/// pivoting. Returns `None` when a pivot falls below `pivot_tol`.
pub fn solve_square(a: &DenseMatrix, b: &[f64], pivot_tol: f64) -> Option<Vec<f64>> {
    let n = a.rows();
    assert_eq!(a.cols(), n);
    assert_eq!(b.len(), n);
    let mut m = a.data.clone();
    let mut rhs = b.to_vec();
    for c in 0..n {
        let mut p = c;
        let mut best = m[c * n + c].abs();
        for r in c + 1..n {
            let v = m[r * n + c].abs();
            if v > best {
                best = v;
                p = r;
            }
        }
        if best <= pivot_tol {
            return None;
        }
        if p != c {
            for j in 0..n {
                m.swap(p * n + j, c * n + j);
            }
            rhs.swap(p, c);
        }
        let piv = m[c * n + c];
        for r in c + 1..n {
            let f = m[r * n + c] / piv;
            if f == 0.0 {
                continue;
            }
            for j in c..n {
                m[r * n + j] -= f * m[c * n + j];
            }
            rhs[r] -= f * rhs[c];
        }
    }
    let mut x = vec![0.0; n];
    for c in (0..n).rev() {
        let mut s = rhs[c];
        for j in c + 1..n {
            s -= m[c * n + j] * x[j];
        }
        x[c] = s / m[c * n + c];
    }
    Some(x)
}
