//! Dense two-phase tableau simplex for `min c'z, Az = b, z >= 0`.
//!
//! Phase one adds one artificial column per row. Artificial columns stay in the
//! tableau for the whole solve: their entries are `B^-1`, which yields the dual
//! `y' = c_B' B^-1` without a second factorisation. Artificials left basic at zero
//! after phase one mark redundant rows; they never re-enter.
//!
//! Pricing is Dantzig's rule until more than `2 (m + n)` degenerate pivots have
//! been made, then Bland's rule for the rest of the solve. Ratio-test ties always
//! go to the smallest basic column index.

use super::{LpStatus, StandardForm};
use crate::error::{Error, Result};

const PIVOT_TOL: f64 = 1e-9;
const COST_TOL: f64 = 1e-9;
const FEAS_TOL: f64 = 1e-9;

pub(crate) struct RawSolution {
    pub status: LpStatus,
    pub z: Vec<f64>,
    /// Row multipliers in the original (unflipped) row space.
    pub y: Vec<f64>,
    pub basis: Vec<usize>,
    pub ray: Option<Vec<f64>>,
}

struct Tableau {
    m: usize,
    /// structural columns
    n: usize,
    width: usize,
    t: Vec<f64>,
    rhs: Vec<f64>,
    basis: Vec<usize>,
    reduced: Vec<f64>,
    degenerate_pivots: usize,
    bland: bool,
}

enum PhaseEnd {
    Optimal,
    Unbounded(usize),
}

impl Tableau {
    #[inline]
    fn at(&self, r: usize, c: usize) -> f64 {
        self.t[r * self.width + c]
    }

    fn price(&mut self, cost: &[f64]) {
        for j in 0..self.width {
            let mut d = cost[j];
            for r in 0..self.m {
                let cb = cost[self.basis[r]];
                if cb != 0.0 {
                    d -= cb * self.at(r, j);
                }
            }
            self.reduced[j] = d;
        }
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let w = self.width;
        let piv = self.at(row, col);
        for j in 0..w {
            self.t[row * w + j] /= piv;
        }
        self.rhs[row] /= piv;
        let prow: Vec<f64> = self.t[row * w..(row + 1) * w].to_vec();
        let prhs = self.rhs[row];
        for r in 0..self.m {
            if r == row {
                continue;
            }
            let f = self.t[r * w + col];
            if f == 0.0 {
                continue;
            }
            for j in 0..w {
                self.t[r * w + j] -= f * prow[j];
            }
            self.t[r * w + col] = 0.0;
            self.rhs[r] -= f * prhs;
            if self.rhs[r].abs() < 1e-13 {
                self.rhs[r] = 0.0;
            }
        }
        let f = self.reduced[col];
        if f != 0.0 {
            for j in 0..w {
                self.reduced[j] -= f * prow[j];
            }
            self.reduced[col] = 0.0;
        }
        self.basis[row] = col;
    }

    fn entering(&self, allowed: &[bool]) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for j in 0..self.width {
            if !allowed[j] || self.basis.contains(&j) {
                continue;
            }
            let d = self.reduced[j];
            if d >= -COST_TOL {
                continue;
            }
            if self.bland {
                return Some(j);
            }
            if best.is_none_or(|(_, bd)| d < bd) {
                best = Some((j, d));
            }
        }
        best.map(|(j, _)| j)
    }

    fn leaving(&self, col: usize) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        for r in 0..self.m {
            let a = self.at(r, col);
            if a <= PIVOT_TOL {
                continue;
            }
            let ratio = self.rhs[r].max(0.0) / a;
            best = match best {
                None => Some((r, ratio)),
                Some((br, bratio)) => {
                    let tie = (ratio - bratio).abs() <= 1e-12 * (1.0 + bratio.abs());
                    if ratio < bratio && !tie || tie && self.basis[r] < self.basis[br] {
                        Some((r, ratio))
                    } else {
                        Some((br, bratio))
                    }
                }
            };
        }
        best
    }

    fn run(&mut self, cost: &[f64], allowed: &[bool], max_iter: usize) -> Result<PhaseEnd> {
        self.price(cost);
        let degenerate_limit = 2 * (self.m + self.n);
        for _ in 0..max_iter {
            let Some(q) = self.entering(allowed) else {
                return Ok(PhaseEnd::Optimal);
            };
            let Some((r, ratio)) = self.leaving(q) else {
                return Ok(PhaseEnd::Unbounded(q));
            };
            if ratio <= 1e-12 {
                self.degenerate_pivots += 1;
                if self.degenerate_pivots > degenerate_limit {
                    self.bland = true;
                }
            }
            self.pivot(r, q);
        }
        Err(Error::SolverFailure(format!("no convergence after {max_iter} pivots")))
    }
}

pub(crate) fn solve_standard(sf: &StandardForm) -> Result<RawSolution> {
    let m = sf.a.rows();
    let n = sf.num_cols();
    let width = n + m;

    let mut flip = vec![1.0; m];
    let mut t = vec![0.0; m * width];
    let mut rhs = vec![0.0; m];
    for i in 0..m {
        if sf.b[i] < 0.0 {
            flip[i] = -1.0;
        }
        for j in 0..n {
            t[i * width + j] = flip[i] * sf.a.get(i, j);
        }
        t[i * width + n + i] = 1.0;
        rhs[i] = flip[i] * sf.b[i];
    }
    let mut tab = Tableau {
        m,
        n,
        width,
        t,
        rhs,
        basis: (n..n + m).collect(),
        reduced: vec![0.0; width],
        degenerate_pivots: 0,
        bland: false,
    };
    let max_iter = 5_000 + 200 * (m + n);
    let b_scale = sf.b.iter().fold(1.0f64, |s, v| s.max(v.abs()));

    // Phase one.
    let mut cost1 = vec![0.0; width];
    cost1[n..].iter_mut().for_each(|c| *c = 1.0);
    let allowed1 = vec![true; width];
    tab.run(&cost1, &allowed1, max_iter)?;
    let infeas: f64 = (0..m).filter(|&r| tab.basis[r] >= n).map(|r| tab.rhs[r]).sum();
    if infeas > FEAS_TOL * b_scale * (1 + m) as f64 {
        return Ok(RawSolution {
            status: LpStatus::Infeasible,
            z: Vec::new(),
            y: Vec::new(),
            basis: Vec::new(),
            ray: None,
        });
    }

    // Drive artificials out of the basis where a structural pivot exists.
    for r in 0..m {
        if tab.basis[r] < n {
            continue;
        }
        let mut best: Option<(usize, f64)> = None;
        for j in 0..n {
            let a = tab.at(r, j).abs();
            if a > PIVOT_TOL && best.is_none_or(|(_, b)| a > b) {
                best = Some((j, a));
            }
        }
        if let Some((j, _)) = best {
            if !tab.basis.contains(&j) {
                tab.pivot(r, j);
            }
        }
    }
    for r in 0..m {
        if tab.basis[r] >= n {
            tab.rhs[r] = 0.0;
        }
    }

    // Phase two.
    let mut cost2 = vec![0.0; width];
    cost2[..n].copy_from_slice(&sf.c);
    let mut allowed2 = vec![false; width];
    allowed2[..n].iter_mut().for_each(|a| *a = true);
    tab.degenerate_pivots = 0;
    let end = tab.run(&cost2, &allowed2, max_iter)?;

    let mut z = vec![0.0; n];
    for r in 0..m {
        if tab.basis[r] < n {
            z[tab.basis[r]] = tab.rhs[r].max(0.0);
        }
    }

    match end {
        PhaseEnd::Unbounded(q) => {
            let mut ray = vec![0.0; n];
            ray[q] = 1.0;
            for r in 0..m {
                if tab.basis[r] < n {
                    ray[tab.basis[r]] = -tab.at(r, q);
                }
            }
            Ok(RawSolution { status: LpStatus::Unbounded, z, y: Vec::new(), basis: tab.basis, ray: Some(ray) })
        }
        PhaseEnd::Optimal => {
            let mut y = vec![0.0; m];
            for (i, yi) in y.iter_mut().enumerate() {
                let mut s = 0.0;
                for r in 0..m {
                    s += cost2[tab.basis[r]] * tab.at(r, n + i);
                }
                *yi = flip[i] * s;
            }
            Ok(RawSolution { status: LpStatus::Optimal, z, y, basis: tab.basis, ray: None })
        }
    }
}
