//! Exhaustive ground truth at desk scale: sparsest consistent signals, the sets
//! `P(y)` and `Y^k`, LP vertex enumeration, and the active-set augmentation walk.

use std::collections::BTreeSet;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::certify::{membership_margin, membership_p};
use crate::error::{Error, Result};
use crate::linalg::{has_full_column_rank, null_space_basis, rank_profile, solve_square, DenseMatrix, TolerancePolicy};
use crate::lp::{
    max_margin_feasibility, to_standard_form, LpProblem, LpSolution, LpStatus, Relation, Sense, VarDomain,
};
use crate::signmodel::{active_sets, is_consistent, minimal_scaling, ActiveSets, SignMeasurement, SignMode};
use crate::subsets::{binomial, combinations, sign_patterns};

/// Signed support with a representative signal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseWitness {
    pub s_plus: Vec<usize>,
    pub s_minus: Vec<usize>,
    /// Consistent with `y` and scaled onto the decoder's feasible set.
    pub x: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparsestSet {
    /// Minimal `||x||_0`, or `None` when nothing consistent exists within `k_max`.
    pub value: Option<usize>,
    pub witnesses: Vec<SparseWitness>,
}

pub const L0_MAX_COLS: usize = 14;
pub const L0_MAX_K: usize = 3;

/// Sweeps support sizes `1..=k_max`; each support is decided by one margin LP
/// over `x_S` (sign constraints strict on `J+ u J-`, equalities on `J0`,
/// `|x| <= 1`). Stops at the first size with a feasible support.
pub fn l0_min(phi: &DenseMatrix, y: &SignMeasurement, k_max: usize, tol: &TolerancePolicy) -> Result<SparsestSet> {
    y.check_rows(phi)?;
    y.require_nonzero()?;
    let n = phi.cols();
    if n > L0_MAX_COLS && k_max > L0_MAX_K {
        return Err(Error::Budget(format!("l0_min needs n <= {L0_MAX_COLS} or k_max <= {L0_MAX_K}")));
    }
    for s in 1..=k_max.min(n) {
        let mut witnesses = Vec::new();
        for support in combinations(n, s) {
            let mut sys = LpProblem::system(vec![VarDomain::Free; s]);
            let mut strict = Vec::new();
            for v in 0..s {
                sys.add_sparse_row(&[(v, 1.0)], Relation::Le, 1.0);
                sys.add_sparse_row(&[(v, 1.0)], Relation::Ge, -1.0);
            }
            let sub = |i: usize| -> Vec<f64> { support.iter().map(|&j| phi.get(i, j)).collect() };
            for &i in &y.j_plus {
                strict.push(sys.add_row(sub(i), Relation::Ge, 0.0));
            }
            for &i in &y.j_minus {
                strict.push(sys.add_row(sub(i), Relation::Le, 0.0));
            }
            for &i in &y.j_zero {
                sys.add_row(sub(i), Relation::Eq, 0.0);
            }
            let cert = max_margin_feasibility(&sys, &strict, 1.0)?;
            if !cert.holds(tol.margin_tol) {
                continue;
            }
            let mut x = vec![0.0; n];
            for (v, &j) in support.iter().enumerate() {
                x[j] = cert.witness[v];
            }
            let a = minimal_scaling(phi, y, &x, tol)?;
            x.iter_mut().for_each(|v| *v *= a);
            let s_plus = support.iter().copied().filter(|&j| x[j] > tol.sign_tol).collect();
            let s_minus = support.iter().copied().filter(|&j| x[j] < -tol.sign_tol).collect();
            witnesses.push(SparseWitness { s_plus, s_minus, x });
        }
        if !witnesses.is_empty() {
            return Ok(SparsestSet { value: Some(s), witnesses });
        }
    }
    Ok(SparsestSet { value: None, witnesses: Vec::new() })
}

/// All signed supports `(S+, S-)` with `|S| <= k` realized by signals
/// consistent with `y`.
pub fn enumerate_p(
    phi: &DenseMatrix,
    y: &SignMeasurement,
    k: usize,
    tol: &TolerancePolicy,
) -> Result<Vec<(Vec<usize>, Vec<usize>)>> {
    y.check_rows(phi)?;
    y.require_nonzero()?;
    if phi.cols() > L0_MAX_COLS && k > L0_MAX_K {
        return Err(Error::Budget(format!("enumerate_p needs n <= {L0_MAX_COLS} or k <= {L0_MAX_K}")));
    }
    let mut out = Vec::new();
    for (sp, sm) in sign_patterns(phi.cols(), 0, k) {
        if membership_p(phi, y, &sp, &sm, tol)? {
            out.push((sp, sm));
        }
    }
    Ok(out)
}

fn sign_of(v: f64, scale: f64) -> i8 {
    if v.abs() <= 1e-9 * scale {
        0
    } else if v > 0.0 {
        1
    } else {
        -1
    }
}

/// Sign vector of `phi x` for a candidate `x`, kept only if an LP confirms that
/// its signed support realizes it.
fn validated(phi: &DenseMatrix, x: &[f64], tol: &TolerancePolicy) -> Result<Option<Vec<i8>>> {
    let mut y = Vec::with_capacity(phi.rows());
    for i in 0..phi.rows() {
        let row = phi.row(i);
        let scale: f64 = row.iter().zip(x).map(|(a, b)| (a * b).abs()).sum::<f64>().max(1e-300);
        y.push(sign_of(crate::linalg::dot(row, x), scale));
    }
    let s_plus: Vec<usize> = (0..x.len()).filter(|&j| x[j] > 0.0).collect();
    let s_minus: Vec<usize> = (0..x.len()).filter(|&j| x[j] < 0.0).collect();
    let meas = SignMeasurement::new(y)?;
    let ok = membership_margin(phi, &meas, &s_plus, &s_minus)?.holds(tol.margin_tol);
    Ok(ok.then_some(meas.y))
}

/// Exact `Y^k = {sign(phi x) : ||x||_0 <= k}` for `k <= 2`, sorted.
///
/// Two-column supports are handled by sorting the directions of the lines
/// `phi_{i,S} z = 0` by angle and testing every ray and every sector midpoint.
pub fn enumerate_yk(phi: &DenseMatrix, k: usize, tol: &TolerancePolicy) -> Result<Vec<SignMeasurement>> {
    if k > 2 {
        return Err(Error::Budget("exact Y^k enumeration supports k <= 2; use sampling".into()));
    }
    let (m, n) = (phi.rows(), phi.cols());
    let mut ys: BTreeSet<Vec<i8>> = BTreeSet::new();
    ys.insert(vec![0; m]);
    if k >= 1 {
        for j in 0..n {
            for s in [1.0, -1.0] {
                let mut x = vec![0.0; n];
                x[j] = s;
                if let Some(y) = validated(phi, &x, tol)? {
                    ys.insert(y);
                }
            }
        }
    }
    if k >= 2 {
        for pair in combinations(n, 2) {
            let (a, b) = (pair[0], pair[1]);
            let mut angles: Vec<f64> = Vec::new();
            for i in 0..m {
                let (na, nb) = (phi.get(i, a), phi.get(i, b));
                if na == 0.0 && nb == 0.0 {
                    continue;
                }
                let t = (na).atan2(-nb);
                angles.push(t.rem_euclid(std::f64::consts::TAU));
                angles.push((t + std::f64::consts::PI).rem_euclid(std::f64::consts::TAU));
            }
            angles.sort_by(f64::total_cmp);
            angles.dedup_by(|p, q| (*p - *q).abs() <= 1e-12);
            let mut probes = angles.clone();
            if angles.is_empty() {
                probes.push(0.25 * std::f64::consts::PI);
            }
            for w in 0..angles.len() {
                let lo = angles[w];
                let hi = if w + 1 < angles.len() { angles[w + 1] } else { angles[0] + std::f64::consts::TAU };
                probes.push(0.5 * (lo + hi));
            }
            for th in probes {
                let mut x = vec![0.0; n];
                let (c, s) = (th.cos(), th.sin());
                x[a] = if c.abs() < 1e-12 { 0.0 } else { c };
                x[b] = if s.abs() < 1e-12 { 0.0 } else { s };
                if let Some(y) = validated(phi, &x, tol)? {
                    ys.insert(y);
                }
            }
        }
    }
    ys.into_iter().map(SignMeasurement::new).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct YkSample {
    pub ys: Vec<SignMeasurement>,
    /// Always true: sampling cannot prove completeness.
    pub possibly_incomplete: bool,
}

/// `Y^k` by `draws` seeded Gaussian draws per support of size `1..=k`,
/// deduplicated and LP-validated. Includes the zero vector.
pub fn enumerate_yk_sampled(
    phi: &DenseMatrix,
    k: usize,
    draws: usize,
    seed: u64,
    tol: &TolerancePolicy,
) -> Result<YkSample> {
    let (m, n) = (phi.rows(), phi.cols());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ys: BTreeSet<Vec<i8>> = BTreeSet::new();
    ys.insert(vec![0; m]);
    for s in 1..=k.min(n) {
        if binomial(n, s) > 100_000 {
            return Err(Error::Budget(format!("too many supports of size {s}")));
        }
        for support in combinations(n, s) {
            for _ in 0..draws {
                let mut x = vec![0.0; n];
                for &j in &support {
                    x[j] = StandardNormal.sample(&mut rng);
                }
                if let Some(y) = validated(phi, &x, tol)? {
                    ys.insert(y);
                }
            }
        }
    }
    Ok(YkSample { ys: ys.into_iter().map(SignMeasurement::new).collect::<Result<_>>()?, possibly_incomplete: true })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AugmentationStep {
    pub direction: Vec<f64>,
    pub lambda: f64,
    /// Row that became active at the end of the step.
    pub newly_active: Option<usize>,
    /// Support component that reached zero at the end of the step.
    pub dropped: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AugmentationTrace {
    /// The first step is the rescaling `x -> a x` (direction `x`,
    /// `lambda = a - 1`) whenever `a != 1`.
    pub steps: Vec<AugmentationStep>,
    pub final_x: Vec<f64>,
    pub final_active: ActiveSets,
    pub stack_full_rank: bool,
    pub support_shrunk: bool,
}

fn support_of(x: &[f64], tol: &TolerancePolicy) -> Vec<usize> {
    (0..x.len()).filter(|&j| x[j].abs() > tol.sign_tol).collect()
}

/// Nearest event along `x + lambda d`, `lambda > 0`: an inactive row reaching
/// its bound or a support component reaching zero.
fn nearest_event(
    phi: &DenseMatrix,
    x: &[f64],
    d: &[f64],
    sets: &ActiveSets,
    support: &[usize],
) -> Option<(f64, Option<usize>, Option<usize>)> {
    let phix = phi.mul_vec(x);
    let phid = phi.mul_vec(d);
    let mut best: Option<(f64, Option<usize>, Option<usize>)> = None;
    let mut offer = |lam: f64, row: Option<usize>, col: Option<usize>| {
        if lam >= 0.0 && best.is_none_or(|b| lam < b.0) {
            best = Some((lam, row, col));
        }
    };
    for &i in &sets.inactive_plus {
        if phid[i] < -1e-12 {
            offer((phix[i] - 1.0) / -phid[i], Some(i), None);
        }
    }
    for &i in &sets.inactive_minus {
        if phid[i] > 1e-12 {
            offer((-1.0 - phix[i]) / phid[i], Some(i), None);
        }
    }
    for &j in support {
        if d[j].abs() > 1e-12 && d[j].signum() != x[j].signum() {
            offer(-x[j] / d[j], None, Some(j));
        }
    }
    best
}

/// Rescales a consistent `x` onto the decoder's feasible boundary, then moves
/// along null directions of the active stack until it has full column rank.
pub fn active_set_augmentation(
    phi: &DenseMatrix,
    y: &SignMeasurement,
    x: &[f64],
    tol: &TolerancePolicy,
) -> Result<AugmentationTrace> {
    y.require_nonzero()?;
    if !is_consistent(phi, x, y, SignMode::Standard, tol)? {
        let phix = phi.mul_vec(x);
        let signs = crate::signmodel::sign_standard(&phix, tol);
        let row = (0..y.len()).find(|&i| signs[i] != y.y[i]).unwrap_or(0);
        return Err(Error::Inconsistent { row });
    }
    let a = minimal_scaling(phi, y, x, tol)?;
    let mut x: Vec<f64> = x.iter().map(|v| a * v).collect();
    let mut steps = Vec::new();
    if a != 1.0 {
        steps.push(AugmentationStep {
            direction: x.iter().map(|v| v / a).collect(),
            lambda: a - 1.0,
            newly_active: None,
            dropped: None,
        });
    }
    let mut support_shrunk = false;
    let limit = 2 * (phi.rows() + phi.cols()) + 2;
    let mut stack_full_rank = false;
    for _ in 0..limit {
        let sets = active_sets(phi, y, &x, tol)?;
        let support = support_of(&x, tol);
        let mut rows = sets.active_plus(y);
        rows.extend(sets.active_minus(y));
        rows.extend(&y.j_zero);
        let stack = phi.select(&rows, &support);
        if has_full_column_rank(&stack, tol) {
            stack_full_rank = true;
            break;
        }
        let basis = null_space_basis(&stack, tol);
        let mut d = vec![0.0; phi.cols()];
        for (v, &j) in support.iter().enumerate() {
            d[j] = basis.get(v, 0);
        }
        let neg: Vec<f64> = d.iter().map(|v| -v).collect();
        let fwd = nearest_event(phi, &x, &d, &sets, &support);
        let bwd = nearest_event(phi, &x, &neg, &sets, &support);
        let (dir, (lam, row, col)) = match (fwd, bwd) {
            (Some(f), Some(b)) if b.0 < f.0 => (neg, b),
            (Some(f), _) => (d, f),
            (None, Some(b)) => (neg, b),
            (None, None) => return Err(Error::SolverFailure("augmentation direction has no event".into())),
        };
        for j in 0..x.len() {
            x[j] += lam * dir[j];
        }
        if let Some(j) = col {
            x[j] = 0.0;
            support_shrunk = true;
        }
        steps.push(AugmentationStep { direction: dir, lambda: lam, newly_active: row, dropped: col });
    }
    let final_active = active_sets(phi, y, &x, tol)?;
    Ok(AugmentationTrace { steps, final_x: x, final_active, stack_full_rank, support_shrunk })
}

pub const VERTEX_ORACLE_MAX_SUBSETS: u128 = 2_000_000;

const VERTEX_PIVOT_TOL: f64 = 1e-10;

struct VertexSearch<'a> {
    r: usize,
    cols: usize,
    c: &'a [f64],
    feas_tol: f64,
    /// One tableau `r x (cols + 1)` per depth; the last column is `b`.
    levels: Vec<Vec<f64>>,
    used: Vec<bool>,
    basis: Vec<(usize, usize)>,
    best: Option<(Vec<usize>, Vec<f64>, f64)>,
}

impl VertexSearch<'_> {
    fn at(&self, depth: usize, i: usize, j: usize) -> f64 {
        self.levels[depth][i * (self.cols + 1) + j]
    }

    fn leaf(&mut self) {
        let (r, w) = (self.r, self.cols + 1);
        let t = &self.levels[r];
        if self.basis.iter().any(|&(_, i)| t[i * w + self.cols] < -self.feas_tol) {
            return;
        }
        let mut z = vec![0.0; self.cols];
        for &(j, i) in &self.basis {
            z[j] = t[i * w + self.cols].max(0.0);
        }
        let obj: f64 = self.c.iter().zip(&z).map(|(p, q)| p * q).sum();
        if self.best.as_ref().is_none_or(|b| obj < b.2 - 1e-12) {
            let mut cols: Vec<usize> = self.basis.iter().map(|&(j, _)| j).collect();
            cols.sort_unstable();
            self.best = Some((cols, z, obj));
        }
    }

    fn descend(&mut self, start: usize, depth: usize) {
        if depth == self.r {
            self.leaf();
            return;
        }
        let w = self.cols + 1;
        for j in start..=self.cols - (self.r - depth) {
            let Some(piv) = (0..self.r)
                .filter(|&i| !self.used[i])
                .max_by(|&p, &q| self.at(depth, p, j).abs().total_cmp(&self.at(depth, q, j).abs()))
            else {
                return;
            };
            let pv = self.at(depth, piv, j);
            // A tiny pivot means column j depends on the prefix: every basis
            // extending this prefix with j is singular.
            if pv.abs() <= VERTEX_PIVOT_TOL {
                continue;
            }
            let (lo, hi) = self.levels.split_at_mut(depth + 1);
            let (src, dst) = (&lo[depth], &mut hi[0]);
            dst.copy_from_slice(src);
            for k in j + 1..w {
                dst[piv * w + k] /= pv;
            }
            for i in 0..self.r {
                if i == piv {
                    continue;
                }
                let f = dst[i * w + j];
                if f != 0.0 {
                    for k in j + 1..w {
                        dst[i * w + k] -= f * dst[piv * w + k];
                    }
                }
            }
            self.used[piv] = true;
            self.basis.push((j, piv));
            self.descend(j + 1, depth + 1);
            self.basis.pop();
            self.used[piv] = false;
        }
    }
}

/// Minimum of `c'z` over the vertices of `{Az = b, z >= 0}` (rows of `a` assumed
/// independent). Returns the basis and vertex, or `None` when there are none.
///
/// Bases are visited in lexicographic order by a depth-first search that
/// shares Gauss-Jordan elimination between bases with a common prefix.
fn best_vertex(a: &DenseMatrix, b: &[f64], c: &[f64]) -> Option<(Vec<usize>, Vec<f64>, f64)> {
    let (r, cols) = (a.rows(), a.cols());
    if r > cols {
        return None;
    }
    let scale = b.iter().fold(1.0f64, |s, v| s.max(v.abs()));
    let mut t0 = Vec::with_capacity(r * (cols + 1));
    for (i, &bi) in b.iter().enumerate() {
        t0.extend_from_slice(a.row(i));
        t0.push(bi);
    }
    let levels = vec![t0; r + 1];
    let mut s = VertexSearch {
        r,
        cols,
        c,
        feas_tol: 1e-9 * scale,
        levels,
        used: vec![false; r],
        basis: Vec::with_capacity(r),
        best: None,
    };
    s.descend(0, 0);
    s.best
}

/// Independent LP answer by exhaustive basis enumeration of the standard form.
pub fn lp_vertex_oracle(p: &LpProblem) -> Result<LpSolution> {
    p.validate()?;
    let sf = to_standard_form(p);
    let cols = sf.num_cols();
    let tol = TolerancePolicy::default();

    // Keep an independent row subset; detect inconsistent systems.
    let at = sf.a.transpose();
    let prof = rank_profile(&at, &tol);
    let rows = prof.pivot_cols.clone();
    let mut aug_rows = Vec::new();
    for i in 0..sf.a.rows() {
        let mut row = sf.a.row(i).to_vec();
        row.push(sf.b[i]);
        aug_rows.push(row);
    }
    let aug = if aug_rows.is_empty() { DenseMatrix::zeros(0, cols + 1) } else { DenseMatrix::from_rows(&aug_rows)? };
    if rank_profile(&aug.transpose(), &tol).rank > prof.rank {
        return Ok(LpSolution::infeasible());
    }
    let r = rows.len();
    if binomial(cols, r + 1).max(binomial(cols, r)) > VERTEX_ORACLE_MAX_SUBSETS {
        return Err(Error::Budget(format!("vertex enumeration over {cols} columns and {r} rows is too large")));
    }
    let a = sf.a.select_rows(&rows);
    let b: Vec<f64> = rows.iter().map(|&i| sf.b[i]).collect();
    let Some((basis, z, _)) = best_vertex(&a, &b, &sf.c) else {
        return Ok(LpSolution::infeasible());
    };

    // Recession cone {Ad = 0, d >= 0, sum d = 1}: a negative minimum means unbounded.
    let mut rec_rows: Vec<Vec<f64>> = (0..r).map(|i| a.row(i).to_vec()).collect();
    rec_rows.push(vec![1.0; cols]);
    let rec = DenseMatrix::from_rows(&rec_rows)?;
    let rec_keep = rank_profile(&rec.transpose(), &tol).pivot_cols;
    let rec_a = rec.select_rows(&rec_keep);
    let rec_b: Vec<f64> = rec_keep.iter().map(|&i| if i == r { 1.0 } else { 0.0 }).collect();
    if let Some((_, d, obj)) = best_vertex(&rec_a, &rec_b, &sf.c) {
        if obj < -1e-9 {
            return Ok(LpSolution {
                status: LpStatus::Unbounded,
                primal: sf.recover(&z),
                dual: Vec::new(),
                objective_value: match p.sense {
                    Sense::Minimize => f64::NEG_INFINITY,
                    Sense::Maximize => f64::INFINITY,
                },
                basis,
                ray: Some(sf.recover(&d)),
            });
        }
    }

    // Dual from the optimal basis: B' y = c_B on the kept rows.
    let bmat = a.select_cols(&basis).transpose();
    let cb: Vec<f64> = basis.iter().map(|&j| sf.c[j]).collect();
    let yk = if r == 0 { Some(Vec::new()) } else { solve_square(&bmat, &cb, 1e-12) };
    let mut dual = vec![0.0; sf.a.rows()];
    if let Some(yk) = yk {
        for (v, &i) in rows.iter().enumerate() {
            dual[i] = sf.obj_sign * yk[v];
        }
    }
    let primal = sf.recover(&z);
    Ok(LpSolution {
        status: LpStatus::Optimal,
        objective_value: p.objective_at(&primal),
        primal,
        dual,
        basis,
        ray: None,
    })
}
