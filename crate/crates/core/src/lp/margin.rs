//! Strict-inequality systems decided by margin maximisation, and an empirical
//! search for a second optimum.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{solve, LpProblem, LpSolution, LpStatus, Relation, Sense, VarDomain};
use crate::error::{Error, Result};
use crate::linalg::{dot, norm2};

pub const DEFAULT_RESTARTS: usize = 20;

/// Result of `max t` over a system whose strict rows were relaxed by `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginCertificate {
    /// Optimal margin, or `-1` when the system is infeasible even at `t = 0`.
    pub t_star: f64,
    /// Values of the system's variables at the optimum (empty when infeasible).
    pub witness: Vec<f64>,
    pub strict_rows: Vec<usize>,
}

impl MarginCertificate {
    /// The strict system is feasible iff the margin clears `margin_tol`.
    pub fn holds(&self, margin_tol: f64) -> bool {
        self.t_star >= margin_tol
    }

    pub fn is_infeasible(&self) -> bool {
        self.t_star < 0.0
    }
}

/// Maximises `t` subject to the rows of `system`, with every row listed in
/// `strict` tightened by `t` (`lhs >= rhs + t`, `lhs <= rhs - t`) and
/// `0 <= t <= cap`. The system's objective is ignored.
pub fn max_margin_feasibility(system: &LpProblem, strict: &[usize], cap: f64) -> Result<MarginCertificate> {
    if !(cap > 0.0) {
        return Err(Error::Domain(format!("margin cap must be positive, got {cap}")));
    }
    let n = system.num_vars();
    let mut domains = system.domains.clone();
    domains.push(VarDomain::NonNegative);
    let mut objective = vec![0.0; n + 1];
    objective[n] = 1.0;
    let mut p = LpProblem::new(Sense::Maximize, objective, domains);

    let mut is_strict = vec![false; system.num_rows()];
    for &i in strict {
        let Some(row) = system.constraints.get(i) else {
            return Err(Error::Dimension(format!("strict row {i} out of range")));
        };
        if row.relation == Relation::Eq {
            return Err(Error::Domain(format!("strict row {i} is an equality")));
        }
        is_strict[i] = true;
    }
    for (i, row) in system.constraints.iter().enumerate() {
        let mut coeffs = row.coeffs.clone();
        coeffs.push(match (is_strict[i], row.relation) {
            (true, Relation::Ge) => -1.0,
            (true, Relation::Le) => 1.0,
            _ => 0.0,
        });
        p.add_row(coeffs, row.relation, row.rhs);
    }
    p.add_sparse_row(&[(n, 1.0)], Relation::Le, cap);

    let sol = solve(&p)?;
    let mut strict_rows = strict.to_vec();
    strict_rows.sort_unstable();
    strict_rows.dedup();
    match sol.status {
        LpStatus::Optimal => Ok(MarginCertificate {
            t_star: sol.primal[n],
            witness: sol.primal[..n].to_vec(),
            strict_rows,
        }),
        LpStatus::Infeasible => Ok(MarginCertificate { t_star: -1.0, witness: Vec::new(), strict_rows }),
        LpStatus::Unbounded => Err(Error::SolverFailure("margin LP reported unbounded despite cap".into())),
    }
}

/// Looks for an optimal point of `p` other than `sol.primal`.
///
/// Pins the objective to `sol.objective_value` and minimises `restarts` random
/// linear functionals (seeded) over that face. Returns the first feasible point
/// with equal objective at Euclidean distance `> 1e-6` from `sol.primal`.
pub fn alternative_optimum(p: &LpProblem, sol: &LpSolution, restarts: usize, seed: u64) -> Result<Option<Vec<f64>>> {
    if sol.status != LpStatus::Optimal {
        return Err(Error::Domain("alternative_optimum needs an optimal solution".into()));
    }
    let n = p.num_vars();
    let mut face = p.clone();
    face.add_row(p.objective.clone(), Relation::Eq, sol.objective_value);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = sol.objective_value.abs().max(1.0);
    for _ in 0..restarts {
        let c: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let mut q = face.clone();
        q.sense = Sense::Minimize;
        q.objective = c.clone();
        let mut cand = match solve(&q) {
            Ok(s) => s,
            Err(_) => continue,
        };
        if cand.status == LpStatus::Unbounded {
            // The face is unbounded in this direction: any bounded slice of it
            // already contains other optima.
            q.add_row(c.clone(), Relation::Ge, dot(&c, &sol.primal) - 1.0);
            cand = match solve(&q) {
                Ok(s) => s,
                Err(_) => continue,
            };
        }
        if cand.status != LpStatus::Optimal {
            continue;
        }
        let diff: Vec<f64> = cand.primal.iter().zip(&sol.primal).map(|(a, b)| a - b).collect();
        let gap = (p.objective_at(&cand.primal) - sol.objective_value).abs();
        if norm2(&diff) > 1e-6 && gap <= 1e-7 * scale && p.max_violation(&cand.primal) <= 1e-8 * scale {
            return Ok(Some(cand.primal));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interval_midpoint() {
        let mut s = LpProblem::system(vec![VarDomain::Free]);
        s.add_row(vec![1.0], Relation::Ge, 0.0);
        s.add_row(vec![1.0], Relation::Le, 1.0);
        let c = max_margin_feasibility(&s, &[0], 1.0).unwrap();
        // w >= t and w <= 1 with only the first strict: t* = 1 at w = 1.
        assert!((c.t_star - 1.0).abs() < 1e-12);

        let c = max_margin_feasibility(&s, &[0, 1], 1.0).unwrap();
        assert!((c.t_star - 0.5).abs() < 1e-12);
        assert!((c.witness[0] - 0.5).abs() < 1e-12);
        assert!(c.holds(1e-8));
    }

    #[test]
    fn contradictory_system() {
        let mut s = LpProblem::system(vec![VarDomain::Free]);
        s.add_row(vec![1.0], Relation::Eq, 0.0);
        s.add_row(vec![1.0], Relation::Ge, 0.0);
        let c = max_margin_feasibility(&s, &[1], 1.0).unwrap();
        assert!(c.t_star.abs() < 1e-12);
        assert!(!c.holds(1e-8));

        let mut s = LpProblem::system(vec![VarDomain::Free]);
        s.add_row(vec![1.0], Relation::Ge, 1.0);
        s.add_row(vec![1.0], Relation::Le, 0.0);
        let c = max_margin_feasibility(&s, &[0], 1.0).unwrap();
        assert_eq!(c.t_star, -1.0);
        assert!(c.is_infeasible());
    }

    #[test]
    fn strict_equality_rejected() {
        let mut s = LpProblem::system(vec![VarDomain::Free]);
        s.add_row(vec![1.0], Relation::Eq, 0.0);
        assert!(max_margin_feasibility(&s, &[0], 1.0).is_err());
        assert!(max_margin_feasibility(&s, &[], 0.0).is_err());
    }

    #[test]
    fn finds_second_point_on_optimal_edge() {
        let mut p = LpProblem::new(Sense::Minimize, vec![1.0, 1.0], vec![VarDomain::NonNegative; 2]);
        p.add_row(vec![1.0, 1.0], Relation::Ge, 1.0);
        let sol = LpSolution {
            status: LpStatus::Optimal,
            primal: vec![1.0, 0.0],
            dual: vec![1.0],
            objective_value: 1.0,
            basis: vec![0],
            ray: None,
        };
        let alt = alternative_optimum(&p, &sol, DEFAULT_RESTARTS, 3).unwrap().unwrap();
        assert!((alt[0] + alt[1] - 1.0).abs() < 1e-9);
        assert!(alt[1] > 1e-6);
    }

    #[test]
    fn unique_optimum_has_no_alternative() {
        let mut p = LpProblem::new(Sense::Minimize, vec![1.0, 2.0], vec![VarDomain::NonNegative; 2]);
        p.add_row(vec![1.0, 1.0], Relation::Ge, 1.0);
        let sol = solve(&p).unwrap();
        assert_eq!(alternative_optimum(&p, &sol, DEFAULT_RESTARTS, 11).unwrap(), None);
    }
}
