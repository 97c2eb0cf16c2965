//! Reproduction of the worked example on the 2x4 matrix
//! `[[2,-1,0,2],[-1,1,1,0]]` with `y = (1,-1)`.

use std::fmt::Write as _;

use anyhow::Result;
use onebit_core::certify::{
    is_violation_witness, relaxation_consistency, uniqueness_certificate, RelaxationMode,
};
use onebit_core::decoders::{alternative_bp_optimum, encode_bp_lp, one_bit_bp};
use onebit_core::linalg::norm1;
use onebit_core::oracle::lp_vertex_oracle;
use onebit_core::signmodel::{check_bp_feasible, sign_standard};
use onebit_core::{DenseMatrix, SignMeasurement, TolerancePolicy};
use serde::{Deserialize, Serialize};

pub fn example_matrix() -> DenseMatrix {
    DenseMatrix::from_rows(&[[2.0, -1.0, 0.0, 2.0], [-1.0, 1.0, 1.0, 0.0]]).expect("static matrix")
}

pub fn example_measurement() -> SignMeasurement {
    SignMeasurement::new(vec![1, -1]).expect("static measurement")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub label: String,
    pub description: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReproReport {
    pub checks: Vec<CheckResult>,
    /// RRSP margin at the decoder output and at `(1,0,0,0)`.
    pub margins: Vec<(String, f64)>,
    pub notes: Vec<String>,
}

impl ReproReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn table(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let tag = if c.passed { "PASS" } else { "FAIL" };
            let _ = writeln!(out, "({}) {tag}  {}", c.label, c.description);
            let _ = writeln!(out, "         {}", c.detail);
        }
        for (name, v) in &self.margins {
            let _ = writeln!(out, "margin {name}: {v:.6e}");
        }
        for n in &self.notes {
            let _ = writeln!(out, "note: {n}");
        }
        out
    }
}

/// Integer copy of `phi`, if every entry is an integer of moderate size.
fn integer_matrix(phi: &DenseMatrix) -> Option<Vec<Vec<i64>>> {
    (0..phi.rows())
        .map(|r| {
            phi.row(r)
                .iter()
                .map(|&v| (v.fract() == 0.0 && v.abs() < 1e9).then_some(v as i64))
                .collect::<Option<Vec<i64>>>()
        })
        .collect()
}

fn int_mul(a: &[Vec<i64>], x: &[i64]) -> Vec<i64> {
    a.iter().map(|row| row.iter().zip(x).map(|(p, q)| p * q).sum()).collect()
}

/// Check (a): `x(alpha) = (alpha, alpha, 0, 0)` satisfies `Y phi x >= 0`, yet its
/// sign differs from `y` under both conventions. Exact integer arithmetic.
fn check_a(phi: &DenseMatrix, y: &SignMeasurement) -> CheckResult {
    let description = "x(a)=(a,a,0,0), a in {1,2}: Y phi x >= 0 but sign(phi x) != y (standard and nonstandard)".to_string();
    let Some(a) = integer_matrix(phi) else {
        return CheckResult { label: "a".into(), description, passed: false, detail: "matrix is not integral".into() };
    };
    if phi.cols() < 2 {
        return CheckResult { label: "a".into(), description, passed: false, detail: "need at least 2 columns".into() };
    }
    let mut passed = true;
    let mut detail = Vec::new();
    for alpha in [1i64, 2] {
        let mut x = vec![0i64; phi.cols()];
        x[0] = alpha;
        x[1] = alpha;
        let px = int_mul(&a, &x);
        let in_set = px.iter().zip(&y.y).all(|(v, &s)| i64::from(s) * v >= 0);
        let std: Vec<i8> = px.iter().map(|v| v.signum() as i8).collect();
        let nonstd: Vec<i8> = px.iter().map(|&v| if v >= 0 { 1 } else { -1 }).collect();
        let ok = in_set && std != y.y && nonstd != y.y;
        passed &= ok;
        detail.push(format!("a={alpha}: phi x={px:?}, sign={std:?}, nonstd sign={nonstd:?}"));
    }
    CheckResult { label: "a".into(), description, passed, detail: detail.join("; ") }
}

/// Check (b): both nonstandard relaxations admit inconsistent points, and the
/// direction `(1,1,0,...)` is an exact witness on row 2.
fn check_b(phi: &DenseMatrix, y: &SignMeasurement, tol: &TolerancePolicy) -> Result<CheckResult> {
    let description = "conditions for nonstd_x and nonstd_phix violated; d=(1,1,0,0) is a witness".to_string();
    let mut passed = true;
    let mut detail = Vec::new();
    for mode in [RelaxationMode::NonstdX, RelaxationMode::NonstdPhiX] {
        let audit = relaxation_consistency(phi, y, mode)?;
        let verified = audit.violations.iter().all(|v| is_violation_witness(phi, y, mode, v.row, &v.d, tol.active_tol));
        passed &= !audit.holds && verified;
        let first = audit.violations.first().map(|v| format!("row {} d={:?}", v.row + 1, v.d)).unwrap_or_default();
        detail.push(format!("{mode:?}: violated={} {first}", !audit.holds));
    }
    let exact = integer_matrix(phi).is_some_and(|a| {
        let mut d = vec![0i64; phi.cols()];
        d.iter_mut().take(2).for_each(|v| *v = 1);
        let pd = int_mul(&a, &d);
        let in_cone = y.j_plus.iter().all(|&i| pd[i] >= 0) && y.j_minus.iter().all(|&i| pd[i] <= 0);
        let vanishes = y.j_minus.iter().any(|&i| pd[i] == 0);
        in_cone && vanishes && pd.iter().any(|&v| v != 0)
    });
    passed &= exact;
    detail.push(format!("d=(1,1,0,0) exact witness: {exact}"));
    Ok(CheckResult { label: "b".into(), description, passed, detail: detail.join("; ") })
}

pub fn run_repro(phi: &DenseMatrix, tol: &TolerancePolicy) -> Result<ReproReport> {
    let y = example_measurement();
    let mut checks = vec![check_a(phi, &y), check_b(phi, &y, tol)?];
    let mut margins = Vec::new();
    let mut notes = Vec::new();

    let bp = one_bit_bp(phi, &y)?;
    let (lp, _) = encode_bp_lp(phi, &y)?;
    let oracle = lp_vertex_oracle(&lp)?;
    let consistent = bp.is_optimal() && sign_standard(&phi.mul_vec(&bp.x), tol) == y.y;
    let c_ok = bp.is_optimal()
        && (bp.objective - 1.0).abs() <= 1e-8
        && oracle.is_optimal()
        && (oracle.objective_value - bp.objective).abs() <= 1e-8
        && consistent;
    checks.push(CheckResult {
        label: "c".into(),
        description: "1-bit BP objective = 1, output consistent, matches vertex enumeration".into(),
        passed: c_ok,
        detail: format!(
            "status={:?} objective={:.12} x={:?} oracle={:.12} consistent={consistent}",
            bp.status, bp.objective, bp.x, oracle.objective_value
        ),
    });
    if bp.is_optimal() {
        let rep = uniqueness_certificate(phi, &y, &bp.x, tol)?;
        margins.push(("at decoder output".into(), rep.margin));
    }

    let x0 = [1.0, 0.0, 0.0, 0.0];
    let d_ok;
    let d_detail;
    if phi.cols() != 4 {
        d_ok = false;
        d_detail = "matrix must have 4 columns".into();
    } else if let Err(e) = check_bp_feasible(phi, &y, &x0, tol) {
        d_ok = false;
        d_detail = format!("(1,0,0,0) is not decoder-feasible: {e}");
    } else {
        let rep = uniqueness_certificate(phi, &y, &x0, tol)?;
        margins.push(("at (1,0,0,0)".into(), rep.margin));
        let alt = alternative_bp_optimum(phi, &y, &x0, onebit_core::lp::DEFAULT_RESTARTS, 0)?;
        let alt_ok = alt.as_ref().is_some_and(|a| {
            check_bp_feasible(phi, &y, a, tol).is_ok()
                && (norm1(a) - norm1(&x0)).abs() <= 1e-7
                && a.iter().zip(&x0).any(|(p, q)| (p - q).abs() > tol.active_tol)
        });
        let expected_alt = [0.0, -1.0, 0.0, 0.0];
        let expected_ok = check_bp_feasible(phi, &y, &expected_alt, tol).is_ok() && (norm1(&expected_alt) - 1.0).abs() <= 1e-12;
        d_ok = !rep.unique && alt_ok && expected_ok && (norm1(&x0) - bp.objective).abs() <= 1e-8;
        d_detail = format!(
            "unique={} (rank {} of {}, rrsp={}); alternative found={:?}; (0,-1,0,0) feasible with objective 1: {expected_ok}",
            rep.unique,
            rep.rank,
            rep.cert_matrix.h.cols(),
            rep.rrsp_holds,
            alt
        );
    }
    checks.push(CheckResult {
        label: "d".into(),
        description: "(1,0,0,0) is optimal but not unique; a second optimum exists, e.g. (0,-1,0,0)".into(),
        passed: d_ok,
        detail: d_detail,
    });

    for (name, m) in &margins {
        let t = tol.margin_tol;
        if *m <= 0.0 {
            notes.push(format!("RRSP margin {name} is {m:e}: RRSP fails for every margin_tol"));
        } else if *m < 10.0 * t && *m * 10.0 > t {
            notes.push(format!("RRSP margin {name} ({m:e}) is within 10x of margin_tol {t:e}; verdict is threshold sensitive"));
        }
    }
    Ok(ReproReport { checks, margins, notes })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_run_passes() {
        let rep = run_repro(&example_matrix(), &TolerancePolicy::default()).unwrap();
        assert!(rep.all_passed(), "{}", rep.table());
    }

    #[test]
    fn wrong_matrix_fails_some_check() {
        let phi = DenseMatrix::from_rows(&[[1.0, 0.0, 0.0, 0.0], [0.0, -1.0, 0.0, 0.0]]).unwrap();
        let rep = run_repro(&phi, &TolerancePolicy::default()).unwrap();
        assert!(!rep.all_passed());
    }
}
