//! Dense linear programming: problem description, standard-form conversion and a
//! two-phase tableau simplex with dual extraction.
//!
//! Problems are stated in general form (`<=`, `=`, `>=` rows, free or nonnegative
//! variables, minimise or maximise). [`solve`] converts to `min c'z, Az = b, z >= 0`,
//! runs the simplex and maps primal, dual and basis back.
//!
//! Dual sign convention: `dual[i]` is the multiplier of row `i` such that
//! `sum_i dual[i] * rhs[i]` equals the optimal objective in the problem's own sense.
//! For a minimisation this makes `>=` multipliers nonnegative and `<=` multipliers
//! nonpositive.

mod margin;
mod simplex;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dot, DenseMatrix};

pub use margin::{alternative_optimum, max_margin_feasibility, MarginCertificate, DEFAULT_RESTARTS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VarDomain {
    Free,
    NonNegative,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
}

impl Constraint {
    pub fn lhs(&self, x: &[f64]) -> f64 {
        dot(&self.coeffs, x)
    }

    /// Signed violation of the row at `x` (0 when satisfied).
    pub fn violation(&self, x: &[f64]) -> f64 {
        let d = self.lhs(x) - self.rhs;
        match self.relation {
            Relation::Le => d.max(0.0),
            Relation::Ge => (-d).max(0.0),
            Relation::Eq => d.abs(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpProblem {
    pub sense: Sense,
    pub objective: Vec<f64>,
    pub constraints: Vec<Constraint>,
    pub domains: Vec<VarDomain>,
}

impl LpProblem {
    pub fn new(sense: Sense, objective: Vec<f64>, domains: Vec<VarDomain>) -> Self {
        assert_eq!(objective.len(), domains.len(), "objective/domain length mismatch");
        Self { sense, objective, constraints: Vec::new(), domains }
    }

    /// A pure feasibility system (zero objective).
    pub fn system(domains: Vec<VarDomain>) -> Self {
        Self::new(Sense::Minimize, vec![0.0; domains.len()], domains)
    }

    pub fn num_vars(&self) -> usize {
        self.domains.len()
    }

    pub fn num_rows(&self) -> usize {
        self.constraints.len()
    }

    /// Appends a row and returns its index.
    pub fn add_row(&mut self, coeffs: Vec<f64>, relation: Relation, rhs: f64) -> usize {
        assert_eq!(coeffs.len(), self.num_vars(), "row length mismatch");
        self.constraints.push(Constraint { coeffs, relation, rhs });
        self.constraints.len() - 1
    }

    /// Appends a row given as sparse `(variable, coefficient)` pairs.
    pub fn add_sparse_row(&mut self, terms: &[(usize, f64)], relation: Relation, rhs: f64) -> usize {
        let mut coeffs = vec![0.0; self.num_vars()];
        for &(j, a) in terms {
            coeffs[j] += a;
        }
        self.add_row(coeffs, relation, rhs)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.num_vars();
        if self.objective.len() != n {
            return Err(Error::Dimension("objective length differs from variable count".into()));
        }
        for (i, c) in self.constraints.iter().enumerate() {
            if c.coeffs.len() != n {
                return Err(Error::Dimension(format!("row {i} has {} coefficients, expected {n}", c.coeffs.len())));
            }
            if !c.rhs.is_finite() || c.coeffs.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite("constraint data"));
            }
        }
        if self.objective.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("objective"));
        }
        Ok(())
    }

    pub fn objective_at(&self, x: &[f64]) -> f64 {
        dot(&self.objective, x)
    }

    /// Largest row or sign-constraint violation at `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let rows = self.constraints.iter().map(|c| c.violation(x)).fold(0.0, f64::max);
        let doms = self
            .domains
            .iter()
            .zip(x)
            .filter(|(d, _)| **d == VarDomain::NonNegative)
            .map(|(_, &v)| (-v).max(0.0))
            .fold(0.0, f64::max);
        rows.max(doms)
    }

    fn data_scale(&self) -> f64 {
        let mut s: f64 = 1.0;
        for c in &self.constraints {
            s = s.max(c.rhs.abs());
            for v in &c.coeffs {
                s = s.max(v.abs());
            }
        }
        for v in &self.objective {
            s = s.max(v.abs());
        }
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Original-variable values (the last vertex visited when unbounded, empty
    /// when infeasible).
    pub primal: Vec<f64>,
    /// One multiplier per row (empty unless optimal).
    pub dual: Vec<f64>,
    pub objective_value: f64,
    /// Basic standard-form column indices, one per row.
    pub basis: Vec<usize>,
    /// Improving direction in original variables when unbounded.
    pub ray: Option<Vec<f64>>,
}

impl LpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }

    pub(crate) fn infeasible() -> Self {
        Self {
            status: LpStatus::Infeasible,
            primal: Vec::new(),
            dual: Vec::new(),
            objective_value: f64::NAN,
            basis: Vec::new(),
            ray: None,
        }
    }
}

/// How an original variable is represented by standard-form columns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VarMap {
    NonNegative { col: usize },
    Split { pos: usize, neg: usize },
}

/// `min c'z  s.t.  A z = b, z >= 0` together with the map back to the original
/// variables. Free variables occupy two adjacent columns; slack (`<=`, +1) and
/// surplus (`>=`, -1) columns follow all variable columns in row order.
#[derive(Debug, Clone, PartialEq)]
pub struct StandardForm {
    pub c: Vec<f64>,
    pub a: DenseMatrix,
    pub b: Vec<f64>,
    pub var_map: Vec<VarMap>,
    /// Slack/surplus column of each original row, if any.
    pub row_slack: Vec<Option<usize>>,
    /// +1 for minimisation, -1 when the original objective was negated.
    pub obj_sign: f64,
}

impl StandardForm {
    pub fn num_cols(&self) -> usize {
        self.c.len()
    }

    /// Original variable values from a standard-form point.
    pub fn recover(&self, z: &[f64]) -> Vec<f64> {
        self.var_map
            .iter()
            .map(|m| match *m {
                VarMap::NonNegative { col } => z[col],
                VarMap::Split { pos, neg } => z[pos] - z[neg],
            })
            .collect()
    }
}

pub fn to_standard_form(p: &LpProblem) -> StandardForm {
    let obj_sign = match p.sense {
        Sense::Minimize => 1.0,
        Sense::Maximize => -1.0,
    };
    let mut var_map = Vec::with_capacity(p.num_vars());
    let mut c = Vec::new();
    for (j, d) in p.domains.iter().enumerate() {
        let cj = obj_sign * p.objective[j];
        match d {
            VarDomain::NonNegative => {
                var_map.push(VarMap::NonNegative { col: c.len() });
                c.push(cj);
            }
            VarDomain::Free => {
                var_map.push(VarMap::Split { pos: c.len(), neg: c.len() + 1 });
                c.push(cj);
                c.push(-cj);
            }
        }
    }
    let mut row_slack = Vec::with_capacity(p.num_rows());
    for con in &p.constraints {
        if con.relation == Relation::Eq {
            row_slack.push(None);
        } else {
            row_slack.push(Some(c.len()));
            c.push(0.0);
        }
    }

    let m = p.num_rows();
    let ncols = c.len();
    let mut a = DenseMatrix::zeros(m, ncols);
    let mut b = Vec::with_capacity(m);
    for (i, con) in p.constraints.iter().enumerate() {
        for (j, vm) in var_map.iter().enumerate() {
            let v = con.coeffs[j];
            match *vm {
                VarMap::NonNegative { col } => a.set(i, col, v),
                VarMap::Split { pos, neg } => {
                    a.set(i, pos, v);
                    a.set(i, neg, -v);
                }
            }
        }
        if let Some(s) = row_slack[i] {
            a.set(i, s, if con.relation == Relation::Le { 1.0 } else { -1.0 });
        }
        b.push(con.rhs);
    }
    StandardForm { c, a, b, var_map, row_slack, obj_sign }
}

/// Solves `p` with the two-phase simplex.
///
/// Optimal answers are re-verified against the original problem (primal
/// residual, dual feasibility, duality gap); a failed check becomes
/// [`Error::SolverFailure`] rather than a wrong answer.
pub fn solve(p: &LpProblem) -> Result<LpSolution> {
    p.validate()?;
    let std = to_standard_form(p);
    let raw = simplex::solve_standard(&std)?;
    match raw.status {
        LpStatus::Infeasible => Ok(LpSolution::infeasible()),
        LpStatus::Unbounded => {
            let primal = std.recover(&raw.z);
            let ray = raw.ray.as_ref().map(|r| std.recover(r));
            Ok(LpSolution {
                status: LpStatus::Unbounded,
                objective_value: match p.sense {
                    Sense::Minimize => f64::NEG_INFINITY,
                    Sense::Maximize => f64::INFINITY,
                },
                primal,
                dual: Vec::new(),
                basis: raw.basis,
                ray,
            })
        }
        LpStatus::Optimal => {
            let primal = std.recover(&raw.z);
            let dual: Vec<f64> = raw.y.iter().map(|v| std.obj_sign * v).collect();
            let sol = LpSolution {
                status: LpStatus::Optimal,
                objective_value: p.objective_at(&primal),
                primal,
                dual,
                basis: raw.basis,
                ray: None,
            };
            verify_optimal(p, &sol)?;
            Ok(sol)
        }
    }
}

/// Residuals of an optimal primal/dual pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimalityResiduals {
    pub primal: f64,
    pub dual: f64,
    pub gap: f64,
    pub complementarity: f64,
}

pub fn optimality_residuals(p: &LpProblem, sol: &LpSolution) -> OptimalityResiduals {
    let s = match p.sense {
        Sense::Minimize => 1.0,
        Sense::Maximize => -1.0,
    };
    // Work with the minimisation form: objective s*c, multipliers s*dual.
    let y: Vec<f64> = sol.dual.iter().map(|v| s * v).collect();
    let mut dual_res: f64 = 0.0;
    for (i, con) in p.constraints.iter().enumerate() {
        let bad = match con.relation {
            Relation::Ge => (-y[i]).max(0.0),
            Relation::Le => y[i].max(0.0),
            Relation::Eq => 0.0,
        };
        dual_res = dual_res.max(bad);
    }
    for j in 0..p.num_vars() {
        let aty: f64 = p.constraints.iter().zip(&y).map(|(c, yi)| c.coeffs[j] * yi).sum();
        let reduced = s * p.objective[j] - aty;
        let bad = match p.domains[j] {
            VarDomain::Free => reduced.abs(),
            VarDomain::NonNegative => (-reduced).max(0.0),
        };
        dual_res = dual_res.max(bad);
    }
    let dual_obj: f64 = p.constraints.iter().zip(&sol.dual).map(|(c, yi)| c.rhs * yi).sum();
    let complementarity: f64 = p
        .constraints
        .iter()
        .zip(&sol.dual)
        .map(|(c, yi)| (yi * (c.lhs(&sol.primal) - c.rhs)).abs())
        .sum();
    OptimalityResiduals {
        primal: p.max_violation(&sol.primal),
        dual: dual_res,
        gap: (dual_obj - sol.objective_value).abs(),
        complementarity,
    }
}

fn verify_optimal(p: &LpProblem, sol: &LpSolution) -> Result<()> {
    let r = optimality_residuals(p, sol);
    let scale = p.data_scale();
    let xs = sol.primal.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let ys = sol.dual.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let tol = 1e-7 * scale * xs.max(ys);
    if r.primal > tol || r.dual > tol || r.gap > tol * (1 + p.num_rows()) as f64 {
        return Err(Error::SolverFailure(format!(
            "post-solve verification failed: primal {:.3e}, dual {:.3e}, gap {:.3e}",
            r.primal, r.dual, r.gap
        )));
    }
    Ok(())
}
