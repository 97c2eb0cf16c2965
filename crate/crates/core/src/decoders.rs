//! Decoding programs: 1-bit basis pursuit in slack form, and the legacy
//! relaxation `min ||x||_1 s.t. Y phi x >= 0, ||phi x||_1 = m` for comparison.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{norm1, DenseMatrix, TolerancePolicy};
use crate::lp::{self, LpProblem, LpSolution, LpStatus, Relation, Sense, VarDomain};
use crate::signmodel::{sign_standard, SignMeasurement};

/// Column and row offsets of the slack-form decoder LP.
///
/// Variables, in order: `x` (free), `t`, `u`, `v`, `alpha`, `beta` (all
/// nonnegative). Rows, in order: `x + u - t = 0`, `-x + v - t = 0`,
/// `phi_{J+} x - alpha = 1`, `phi_{J-} x + beta = -1`, `phi_{J0} x = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BpLayout {
    pub n: usize,
    pub n_plus: usize,
    pub n_minus: usize,
    pub n_zero: usize,
}

impl BpLayout {
    pub fn x(&self) -> usize {
        0
    }
    pub fn t(&self) -> usize {
        self.n
    }
    pub fn u(&self) -> usize {
        2 * self.n
    }
    pub fn v(&self) -> usize {
        3 * self.n
    }
    pub fn alpha(&self) -> usize {
        4 * self.n
    }
    pub fn beta(&self) -> usize {
        4 * self.n + self.n_plus
    }
    pub fn num_vars(&self) -> usize {
        4 * self.n + self.n_plus + self.n_minus
    }
    pub fn num_rows(&self) -> usize {
        2 * self.n + self.n_plus + self.n_minus + self.n_zero
    }
    /// First row of each dual block `h1..h5`.
    pub fn row_blocks(&self) -> [std::ops::Range<usize>; 5] {
        let n = self.n;
        let a = 2 * n + self.n_plus;
        let b = a + self.n_minus;
        [0..n, n..2 * n, 2 * n..a, a..b, b..b + self.n_zero]
    }
}

pub fn encode_bp_lp(phi: &DenseMatrix, y: &SignMeasurement) -> Result<(LpProblem, BpLayout)> {
    y.check_rows(phi)?;
    y.require_nonzero()?;
    let n = phi.cols();
    let lay = BpLayout { n, n_plus: y.j_plus.len(), n_minus: y.j_minus.len(), n_zero: y.j_zero.len() };
    let nv = lay.num_vars();
    let mut domains = vec![VarDomain::NonNegative; nv];
    domains[..n].iter_mut().for_each(|d| *d = VarDomain::Free);
    let mut objective = vec![0.0; nv];
    objective[lay.t()..lay.t() + n].iter_mut().for_each(|c| *c = 1.0);
    let mut p = LpProblem::new(Sense::Minimize, objective, domains);

    for j in 0..n {
        p.add_sparse_row(&[(j, 1.0), (lay.u() + j, 1.0), (lay.t() + j, -1.0)], Relation::Eq, 0.0);
    }
    for j in 0..n {
        p.add_sparse_row(&[(j, -1.0), (lay.v() + j, 1.0), (lay.t() + j, -1.0)], Relation::Eq, 0.0);
    }
    let phi_row = |i: usize, extra: (usize, f64)| {
        let mut c = vec![0.0; nv];
        c[..n].copy_from_slice(phi.row(i));
        c[extra.0] = extra.1;
        c
    };
    for (k, &i) in y.j_plus.iter().enumerate() {
        p.add_row(phi_row(i, (lay.alpha() + k, -1.0)), Relation::Eq, 1.0);
    }
    for (k, &i) in y.j_minus.iter().enumerate() {
        p.add_row(phi_row(i, (lay.beta() + k, 1.0)), Relation::Eq, -1.0);
    }
    for &i in &y.j_zero {
        let mut c = vec![0.0; nv];
        c[..n].copy_from_slice(phi.row(i));
        p.add_row(c, Relation::Eq, 0.0);
    }
    Ok((p, lay))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BpSolution {
    /// `Infeasible` means no signal is consistent with `y`.
    pub status: LpStatus,
    pub x: Vec<f64>,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub objective: f64,
    /// Row multipliers `h1..h5` concatenated (see [`BpLayout::row_blocks`]).
    pub dual: Vec<f64>,
    pub layout: BpLayout,
    pub lp: LpSolution,
}

impl BpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}

pub fn one_bit_bp(phi: &DenseMatrix, y: &SignMeasurement) -> Result<BpSolution> {
    let (p, lay) = encode_bp_lp(phi, y)?;
    let sol = lp::solve(&p)?;
    match sol.status {
        LpStatus::Optimal => {
            let z = &sol.primal;
            let x = z[..lay.n].to_vec();
            Ok(BpSolution {
                status: LpStatus::Optimal,
                alpha: z[lay.alpha()..lay.beta()].to_vec(),
                beta: z[lay.beta()..lay.num_vars()].to_vec(),
                objective: sol.objective_value,
                dual: sol.dual.clone(),
                x,
                layout: lay,
                lp: sol,
            })
        }
        // The objective is bounded below by 0, so anything else is infeasibility.
        LpStatus::Infeasible => Ok(BpSolution {
            status: LpStatus::Infeasible,
            x: Vec::new(),
            alpha: Vec::new(),
            beta: Vec::new(),
            objective: f64::NAN,
            dual: Vec::new(),
            layout: lay,
            lp: sol,
        }),
        LpStatus::Unbounded => Err(Error::SolverFailure("decoder LP reported unbounded".into())),
    }
}

/// Lifts a decoder-feasible `x` to the full LP point `(x, t, u, v, alpha, beta)`
/// with `t = |x|`.
pub fn lift_bp_point(phi: &DenseMatrix, y: &SignMeasurement, x: &[f64]) -> Result<(Vec<f64>, BpLayout)> {
    let (_, lay) = encode_bp_lp(phi, y)?;
    if x.len() != lay.n {
        return Err(Error::Dimension(format!("x has {} entries, expected {}", x.len(), lay.n)));
    }
    let phix = phi.mul_vec(x);
    let mut z = vec![0.0; lay.num_vars()];
    for (j, &v) in x.iter().enumerate() {
        z[j] = v;
        z[lay.t() + j] = v.abs();
        z[lay.u() + j] = v.abs() - v;
        z[lay.v() + j] = v.abs() + v;
    }
    for (k, &i) in y.j_plus.iter().enumerate() {
        z[lay.alpha() + k] = phix[i] - 1.0;
    }
    for (k, &i) in y.j_minus.iter().enumerate() {
        z[lay.beta() + k] = -1.0 - phix[i];
    }
    Ok((z, lay))
}

/// Searches for a decoder optimum whose `x` differs from the given optimal `x`;
/// returns that `x`. The caller vouches that `x` is optimal.
pub fn alternative_bp_optimum(
    phi: &DenseMatrix,
    y: &SignMeasurement,
    x: &[f64],
    restarts: usize,
    seed: u64,
) -> Result<Option<Vec<f64>>> {
    let (p, lay) = encode_bp_lp(phi, y)?;
    let (z, _) = lift_bp_point(phi, y, x)?;
    let at = LpSolution {
        status: LpStatus::Optimal,
        objective_value: p.objective_at(&z),
        primal: z,
        dual: Vec::new(),
        basis: Vec::new(),
        ray: None,
    };
    let alt = lp::alternative_optimum(&p, &at, restarts, seed)?;
    Ok(alt.map(|z| z[..lay.n].to_vec()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GdResult {
    pub status: LpStatus,
    pub x: Vec<f64>,
    pub objective: f64,
    /// Whether `sign_standard(phi x) = y`.
    pub consistent: bool,
}

/// LP of the relaxation over `(x, t)`: `min sum t` with `|x| <= t`,
/// `Y phi x >= 0` and `sum_i y_i (phi x)_i = m`.
pub fn encode_gd_lp(phi: &DenseMatrix, y: &SignMeasurement) -> Result<LpProblem> {
    y.check_rows(phi)?;
    if y.has_zeros() {
        return Err(Error::Domain("the relaxation needs y without zero entries".into()));
    }
    let (m, n) = (phi.rows(), phi.cols());
    let mut domains = vec![VarDomain::Free; n];
    domains.extend(std::iter::repeat_n(VarDomain::NonNegative, n));
    let mut objective = vec![0.0; 2 * n];
    objective[n..].iter_mut().for_each(|c| *c = 1.0);
    let mut p = LpProblem::new(Sense::Minimize, objective, domains);
    for j in 0..n {
        p.add_sparse_row(&[(j, 1.0), (n + j, -1.0)], Relation::Le, 0.0);
        p.add_sparse_row(&[(j, -1.0), (n + j, -1.0)], Relation::Le, 0.0);
    }
    let mut total = vec![0.0; 2 * n];
    for i in 0..m {
        let s = f64::from(y.y[i]);
        let mut c = vec![0.0; 2 * n];
        for j in 0..n {
            c[j] = s * phi.get(i, j);
            total[j] += c[j];
        }
        p.add_row(c, Relation::Ge, 0.0);
    }
    p.add_row(total, Relation::Eq, m as f64);
    Ok(p)
}

/// Solves `min ||x||_1 s.t. Y phi x >= 0, sum_i y_i (phi x)_i = m`.
pub fn relaxation_gd(phi: &DenseMatrix, y: &SignMeasurement, tol: &TolerancePolicy) -> Result<GdResult> {
    let p = encode_gd_lp(phi, y)?;
    let n = phi.cols();
    let sol = lp::solve(&p)?;
    match sol.status {
        LpStatus::Optimal => {
            let x = sol.primal[..n].to_vec();
            let consistent = sign_standard(&phi.mul_vec(&x), tol) == y.y;
            Ok(GdResult { status: LpStatus::Optimal, objective: norm1(&x), x, consistent })
        }
        LpStatus::Infeasible => {
            Ok(GdResult { status: LpStatus::Infeasible, x: Vec::new(), objective: f64::NAN, consistent: false })
        }
        LpStatus::Unbounded => Err(Error::SolverFailure("relaxation LP reported unbounded".into())),
    }
}
