//! The 1-bit measurement model.
//!
//! Indices are zero-based throughout. For a measurement vector `y` the rows split
//! into `J+ = {i : y_i = 1}`, `J- = {i : y_i = -1}` and `J0 = {i : y_i = 0}`; the
//! decoder's inequality rows are `phi_i x >= 1` on `J+` and `phi_i x <= -1` on `J-`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{DenseMatrix, TolerancePolicy};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SignMode {
    /// `sign(0) = 0`.
    Standard,
    /// `sign(0) = 1`.
    Nonstandard,
}

pub fn sign_standard(v: &[f64], tol: &TolerancePolicy) -> Vec<i8> {
    v.iter()
        .map(|&t| {
            if t > tol.sign_tol {
                1
            } else if t < -tol.sign_tol {
                -1
            } else {
                0
            }
        })
        .collect()
}

pub fn sign_nonstandard(v: &[f64], tol: &TolerancePolicy) -> Vec<i8> {
    v.iter().map(|&t| if t > -tol.sign_tol { 1 } else { -1 }).collect()
}

pub fn sign_with(mode: SignMode, v: &[f64], tol: &TolerancePolicy) -> Vec<i8> {
    match mode {
        SignMode::Standard => sign_standard(v, tol),
        SignMode::Nonstandard => sign_nonstandard(v, tol),
    }
}

/// A sign vector with its row partition and the position maps `pi : J+ -> 0..|J+|`
/// and `varrho : J- -> 0..|J-|` (ascending row order).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SignMeasurement {
    pub y: Vec<i8>,
    pub j_plus: Vec<usize>,
    pub j_minus: Vec<usize>,
    pub j_zero: Vec<usize>,
    pub pi: Vec<Option<usize>>,
    pub varrho: Vec<Option<usize>>,
}

impl SignMeasurement {
    pub fn new(y: Vec<i8>) -> Result<Self> {
        let m = y.len();
        let mut j_plus = Vec::new();
        let mut j_minus = Vec::new();
        let mut j_zero = Vec::new();
        let mut pi = vec![None; m];
        let mut varrho = vec![None; m];
        for (i, &v) in y.iter().enumerate() {
            match v {
                1 => {
                    pi[i] = Some(j_plus.len());
                    j_plus.push(i);
                }
                -1 => {
                    varrho[i] = Some(j_minus.len());
                    j_minus.push(i);
                }
                0 => j_zero.push(i),
                other => return Err(Error::Domain(format!("measurement entry {i} is {other}, not in {{-1,0,1}}"))),
            }
        }
        Ok(Self { y, j_plus, j_minus, j_zero, pi, varrho })
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.j_plus.is_empty() && self.j_minus.is_empty()
    }

    pub fn has_zeros(&self) -> bool {
        !self.j_zero.is_empty()
    }

    /// `J+ u J-` in ascending order.
    pub fn nonzero_rows(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.j_plus.iter().chain(&self.j_minus).copied().collect();
        v.sort_unstable();
        v
    }

    pub(crate) fn require_nonzero(&self) -> Result<()> {
        if self.is_zero() {
            Err(Error::ZeroMeasurement)
        } else {
            Ok(())
        }
    }

    pub(crate) fn check_rows(&self, phi: &DenseMatrix) -> Result<()> {
        if phi.rows() != self.len() {
            return Err(Error::Dimension(format!(
                "matrix has {} rows but y has {} entries",
                phi.rows(),
                self.len()
            )));
        }
        Ok(())
    }
}

/// A real signal with its signed support.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalVector {
    pub x: Vec<f64>,
    pub s_plus: Vec<usize>,
    pub s_minus: Vec<usize>,
    pub support: Vec<usize>,
}

impl SignalVector {
    pub fn new(x: Vec<f64>, tol: &TolerancePolicy) -> Self {
        let s_plus: Vec<usize> = (0..x.len()).filter(|&i| x[i] > tol.sign_tol).collect();
        let s_minus: Vec<usize> = (0..x.len()).filter(|&i| x[i] < -tol.sign_tol).collect();
        let support: Vec<usize> = (0..x.len()).filter(|&i| x[i].abs() > tol.sign_tol).collect();
        Self { x, s_plus, s_minus, support }
    }
}

/// Active and inactive decoder inequality rows at a feasible point.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActiveSets {
    pub active: Vec<usize>,
    pub inactive_plus: Vec<usize>,
    pub inactive_minus: Vec<usize>,
}

impl ActiveSets {
    pub fn active_plus(&self, y: &SignMeasurement) -> Vec<usize> {
        self.active.iter().copied().filter(|&i| y.y[i] == 1).collect()
    }

    pub fn active_minus(&self, y: &SignMeasurement) -> Vec<usize> {
        self.active.iter().copied().filter(|&i| y.y[i] == -1).collect()
    }
}

fn check_cols(phi: &DenseMatrix, x: &[f64]) -> Result<()> {
    if phi.cols() != x.len() {
        return Err(Error::Dimension(format!("matrix has {} columns but x has {} entries", phi.cols(), x.len())));
    }
    Ok(())
}

pub fn measure(phi: &DenseMatrix, x: &[f64], mode: SignMode, tol: &TolerancePolicy) -> Result<SignMeasurement> {
    check_cols(phi, x)?;
    SignMeasurement::new(sign_with(mode, &phi.mul_vec(x), tol))
}

pub fn is_consistent(
    phi: &DenseMatrix,
    x: &[f64],
    y: &SignMeasurement,
    mode: SignMode,
    tol: &TolerancePolicy,
) -> Result<bool> {
    y.check_rows(phi)?;
    Ok(measure(phi, x, mode, tol)?.y == y.y)
}

/// Checks the decoder constraints at `x` within `active_tol`, reporting the first
/// violated row.
pub fn check_bp_feasible(phi: &DenseMatrix, y: &SignMeasurement, x: &[f64], tol: &TolerancePolicy) -> Result<()> {
    y.check_rows(phi)?;
    check_cols(phi, x)?;
    let phix = phi.mul_vec(x);
    for (i, &v) in phix.iter().enumerate() {
        let (ok, req) = match y.y[i] {
            1 => (v >= 1.0 - tol.active_tol, ">= 1"),
            -1 => (v <= -1.0 + tol.active_tol, "<= -1"),
            _ => (v.abs() <= tol.active_tol, "= 0"),
        };
        if !ok {
            return Err(Error::InfeasiblePoint { row: i, value: v, required: req.into() });
        }
    }
    Ok(())
}

pub fn active_sets(phi: &DenseMatrix, y: &SignMeasurement, x: &[f64], tol: &TolerancePolicy) -> Result<ActiveSets> {
    check_bp_feasible(phi, y, x, tol)?;
    let phix = phi.mul_vec(x);
    let mut sets = ActiveSets { active: Vec::new(), inactive_plus: Vec::new(), inactive_minus: Vec::new() };
    for &i in &y.nonzero_rows() {
        let target = f64::from(y.y[i]);
        if (phix[i] - target).abs() <= tol.active_tol {
            sets.active.push(i);
        } else if y.y[i] == 1 {
            sets.inactive_plus.push(i);
        } else {
            sets.inactive_minus.push(i);
        }
    }
    Ok(sets)
}

/// Smallest `a > 0` with `a x` feasible for the decoder:
/// `max over J+ u J- of 1 / |(phi x)_i|`.
pub fn minimal_scaling(phi: &DenseMatrix, y: &SignMeasurement, x: &[f64], tol: &TolerancePolicy) -> Result<f64> {
    y.check_rows(phi)?;
    check_cols(phi, x)?;
    y.require_nonzero()?;
    let phix = phi.mul_vec(x);
    let signs = sign_standard(&phix, tol);
    if let Some(row) = (0..y.len()).find(|&i| signs[i] != y.y[i]) {
        return Err(Error::Inconsistent { row });
    }
    Ok(y.nonzero_rows().iter().map(|&i| 1.0 / phix[i].abs()).fold(0.0, f64::max))
}
