//! Restricted range space property (RRSP) certificates.
//!
//! A decoder point `x` is the unique optimum of the 1-bit basis pursuit iff the
//! stacked matrix `H(x)` (active rows and `J0`, support columns) has full column
//! rank and some `w` in the restricted dual cone makes `eta = phi^T w` equal to
//! `sign(x)` on the support with `|eta| < 1` elsewhere. Every strict inequality
//! is decided by a margin LP against `margin_tol`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{has_full_column_rank, max_abs, rank_profile, DenseMatrix, RankProfile, TolerancePolicy};
use crate::lp::{self, max_margin_feasibility, LpProblem, LpStatus, MarginCertificate, Relation, VarDomain};
use crate::oracle;
use crate::signmodel::{active_sets, minimal_scaling, ActiveSets, SignMeasurement, SignalVector};
use crate::subsets::{power_set, sign_patterns};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RowBlock {
    ActivePlus,
    ActiveMinus,
    Zero,
}

/// `H(x) = [phi_{A n J+, S}; phi_{A n J-, S}; phi_{J0, S}]` with `S = S+ then S-`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertMatrix {
    pub h: DenseMatrix,
    /// Row of `phi` behind each row of `h`, with its block.
    pub rows: Vec<(usize, RowBlock)>,
    pub s_plus: Vec<usize>,
    pub s_minus: Vec<usize>,
}

pub fn assemble_h(phi: &DenseMatrix, y: &SignMeasurement, x: &[f64], tol: &TolerancePolicy) -> Result<CertMatrix> {
    let sets = active_sets(phi, y, x, tol)?;
    Ok(h_from_sets(phi, y, x, &sets, tol))
}

fn h_from_sets(phi: &DenseMatrix, y: &SignMeasurement, x: &[f64], sets: &ActiveSets, tol: &TolerancePolicy) -> CertMatrix {
    let sig = SignalVector::new(x.to_vec(), tol);
    let mut rows: Vec<(usize, RowBlock)> = sets.active_plus(y).into_iter().map(|i| (i, RowBlock::ActivePlus)).collect();
    rows.extend(sets.active_minus(y).into_iter().map(|i| (i, RowBlock::ActiveMinus)));
    rows.extend(y.j_zero.iter().map(|&i| (i, RowBlock::Zero)));
    let cols: Vec<usize> = sig.s_plus.iter().chain(&sig.s_minus).copied().collect();
    let idx: Vec<usize> = rows.iter().map(|r| r.0).collect();
    CertMatrix { h: phi.select(&idx, &cols), rows, s_plus: sig.s_plus, s_minus: sig.s_minus }
}

/// Sign constraints a witness `w` must meet. Rows of `phi` not listed in any of
/// the four sets do not occur (every row is classified).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessSpec {
    pub s_plus: Vec<usize>,
    pub s_minus: Vec<usize>,
    /// `w_i > 0`.
    pub w_pos: Vec<usize>,
    /// `w_i < 0`.
    pub w_neg: Vec<usize>,
    /// `w_i = 0`.
    pub w_zero: Vec<usize>,
    /// Unconstrained.
    pub w_free: Vec<usize>,
}

impl WitnessSpec {
    /// Cone at a feasible point: strict on active rows, zero on inactive rows,
    /// free on `J0`.
    pub fn at_point(y: &SignMeasurement, sets: &ActiveSets, sig: &SignalVector) -> Self {
        let mut w_zero: Vec<usize> = sets.inactive_plus.iter().chain(&sets.inactive_minus).copied().collect();
        w_zero.sort_unstable();
        Self {
            s_plus: sig.s_plus.clone(),
            s_minus: sig.s_minus.clone(),
            w_pos: sets.active_plus(y),
            w_neg: sets.active_minus(y),
            w_zero,
            w_free: y.j_zero.clone(),
        }
    }

    /// Cone `F(T1, T2)`: strict on `J+ \ T1` and `J- \ T2`, zero on `T1 u T2`.
    pub fn for_pair(y: &SignMeasurement, s_plus: &[usize], s_minus: &[usize], pair: &TPair) -> Self {
        let w_pos = y.j_plus.iter().copied().filter(|i| !pair.t1.contains(i)).collect();
        let w_neg = y.j_minus.iter().copied().filter(|i| !pair.t2.contains(i)).collect();
        let mut w_zero: Vec<usize> = pair.t1.iter().chain(&pair.t2).copied().collect();
        w_zero.sort_unstable();
        Self {
            s_plus: s_plus.to_vec(),
            s_minus: s_minus.to_vec(),
            w_pos,
            w_neg,
            w_zero,
            w_free: y.j_zero.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RrspWitness {
    pub eta: Vec<f64>,
    pub w: Vec<f64>,
    pub margin: f64,
    pub spec: WitnessSpec,
}

impl RrspWitness {
    /// Rechecks the witness directly from `phi`, independent of the LP that
    /// produced it.
    pub fn verify(&self, phi: &DenseMatrix) -> bool {
        let (m, n) = (phi.rows(), phi.cols());
        if self.w.len() != m || self.eta.len() != n || !(self.margin > 0.0) {
            return false;
        }
        let slack = 1e-9;
        let phitw = phi.tr_mul_vec(&self.w);
        let diff: Vec<f64> = phitw.iter().zip(&self.eta).map(|(a, b)| a - b).collect();
        if max_abs(&diff) > 1e-8 {
            return false;
        }
        let sp = &self.spec;
        for j in 0..n {
            let e = self.eta[j];
            let ok = if sp.s_plus.contains(&j) {
                (e - 1.0).abs() <= 1e-8
            } else if sp.s_minus.contains(&j) {
                (e + 1.0).abs() <= 1e-8
            } else {
                e.abs() <= 1.0 - self.margin + slack
            };
            if !ok {
                return false;
            }
        }
        sp.w_pos.iter().all(|&i| self.w[i] >= self.margin - slack)
            && sp.w_neg.iter().all(|&i| self.w[i] <= -self.margin + slack)
            && sp.w_zero.iter().all(|&i| self.w[i].abs() <= slack)
    }
}

/// Decides the witness system of `spec` by a margin LP over `w`.
/// Returns the margin certificate and, when it clears `margin_tol`, the witness.
pub fn witness_lp(phi: &DenseMatrix, spec: &WitnessSpec, tol: &TolerancePolicy) -> Result<(MarginCertificate, Option<RrspWitness>)> {
    let (m, n) = (phi.rows(), phi.cols());
    let mut sys = LpProblem::system(vec![VarDomain::Free; m]);
    let mut strict = Vec::new();
    for j in 0..n {
        let col = phi.column(j);
        if spec.s_plus.contains(&j) {
            sys.add_row(col, Relation::Eq, 1.0);
        } else if spec.s_minus.contains(&j) {
            sys.add_row(col, Relation::Eq, -1.0);
        } else {
            strict.push(sys.add_row(col.clone(), Relation::Le, 1.0));
            strict.push(sys.add_row(col, Relation::Ge, -1.0));
        }
    }
    for &i in &spec.w_pos {
        strict.push(sys.add_sparse_row(&[(i, 1.0)], Relation::Ge, 0.0));
    }
    for &i in &spec.w_neg {
        strict.push(sys.add_sparse_row(&[(i, 1.0)], Relation::Le, 0.0));
    }
    for &i in &spec.w_zero {
        sys.add_sparse_row(&[(i, 1.0)], Relation::Eq, 0.0);
    }
    let cert = max_margin_feasibility(&sys, &strict, 1.0)?;
    let witness = if cert.holds(tol.margin_tol) {
        let mut w = cert.witness.clone();
        for &i in &spec.w_zero {
            w[i] = 0.0;
        }
        let mut eta = phi.tr_mul_vec(&w);
        // Pin the support entries the LP met as equalities.
        for &j in &spec.s_plus {
            eta[j] = 1.0;
        }
        for &j in &spec.s_minus {
            eta[j] = -1.0;
        }
        Some(RrspWitness { eta, w, margin: cert.t_star, spec: spec.clone() })
    } else {
        None
    };
    Ok((cert, witness))
}

/// RRSP of `phi^T` at `x`. Returns the verdict, the optimal margin and the
/// witness when it holds.
pub fn rrsp_at(
    phi: &DenseMatrix,
    y: &SignMeasurement,
    x: &[f64],
    tol: &TolerancePolicy,
) -> Result<(bool, f64, Option<RrspWitness>)> {
    let sets = active_sets(phi, y, x, tol)?;
    let sig = SignalVector::new(x.to_vec(), tol);
    if sig.support.is_empty() {
        return Err(Error::Domain("RRSP is defined at a nonzero point".into()));
    }
    let (cert, witness) = witness_lp(phi, &WitnessSpec::at_point(y, &sets, &sig), tol)?;
    Ok((witness.is_some(), cert.t_star, witness))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertReport {
    pub active_sets: ActiveSets,
    pub cert_matrix: CertMatrix,
    pub rank: usize,
    pub h_full_rank: bool,
    /// Smallest accepted and largest rejected pivot of the rank decision,
    /// with the threshold that separated them.
    pub smallest_pivot: f64,
    pub largest_rejected_pivot: f64,
    pub pivot_threshold: f64,
    pub rrsp_holds: bool,
    /// Optimal margin of the RRSP LP (`-1` when infeasible).
    pub margin: f64,
    pub witness: Option<RrspWitness>,
    pub unique: bool,
    pub notes: Vec<String>,
}

impl CertReport {
    /// Whether either decision sits within `factor` times its tolerance of the
    /// threshold, i.e. could plausibly flip under perturbation.
    pub fn near_threshold(&self, tol: &TolerancePolicy, factor: f64) -> bool {
        let margin_close = self.margin >= 0.0 && self.margin < factor * tol.margin_tol;
        let t = self.pivot_threshold;
        let pivot_close = (self.smallest_pivot.is_finite() && self.smallest_pivot <= factor * t)
            || (self.largest_rejected_pivot > 0.0 && self.largest_rejected_pivot * factor >= t);
        margin_close || pivot_close
    }
}

/// Uniqueness test at a feasible point: `unique = rank(H) full AND RRSP holds`.
/// Optimality of `x` is not checked here.
pub fn uniqueness_certificate(
    phi: &DenseMatrix,
    y: &SignMeasurement,
    x: &[f64],
    tol: &TolerancePolicy,
) -> Result<CertReport> {
    y.require_nonzero()?;
    let sets = active_sets(phi, y, x, tol)?;
    let cm = h_from_sets(phi, y, x, &sets, tol);
    let prof: RankProfile = rank_profile(&cm.h, tol);
    let h_full_rank = prof.rank == cm.h.cols();
    let mut notes = Vec::new();
    if sets.active.is_empty() {
        notes.push("no inequality row is active, so x is not a decoder optimum".into());
    }
    let (rrsp_holds, margin, witness) = if cm.s_plus.is_empty() && cm.s_minus.is_empty() {
        notes.push("x has empty support".into());
        (false, -1.0, None)
    } else {
        let sig = SignalVector::new(x.to_vec(), tol);
        let (cert, w) = witness_lp(phi, &WitnessSpec::at_point(y, &sets, &sig), tol)?;
        (w.is_some(), cert.t_star, w)
    };
    if margin >= 0.0 && margin < 10.0 * tol.margin_tol {
        notes.push(format!("RRSP margin {margin:e} is within 10x of margin_tol"));
    }
    Ok(CertReport {
        active_sets: sets,
        rank: prof.rank,
        h_full_rank,
        smallest_pivot: prof.smallest_pivot,
        largest_rejected_pivot: prof.largest_rejected,
        pivot_threshold: prof.threshold,
        cert_matrix: cm,
        rrsp_holds,
        margin,
        witness,
        unique: h_full_rank && rrsp_holds,
        notes,
    })
}

/// Partial check of the weighted-sign characterization: scales `x` onto the
/// decoder's feasible boundary (`Z = a I` with `a` from [`minimal_scaling`]) and
/// certifies uniqueness there. `Some(true)` proves that the decoder recovers
/// `sign(x)`; otherwise the result is inconclusive (`None`), since other weights
/// are not searched.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaledSignCertificate {
    pub scale: f64,
    pub report: CertReport,
    pub sign_recovered: Option<bool>,
}

pub fn scaled_sign_certificate(
    phi: &DenseMatrix,
    y: &SignMeasurement,
    x: &[f64],
    tol: &TolerancePolicy,
) -> Result<ScaledSignCertificate> {
    let scale = minimal_scaling(phi, y, x, tol)?;
    let xs: Vec<f64> = x.iter().map(|v| scale * v).collect();
    let report = uniqueness_certificate(phi, y, &xs, tol)?;
    let sign_recovered = report.unique.then_some(true);
    Ok(ScaledSignCertificate { scale, report, sign_recovered })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RelaxationMode {
    /// `{x : Y phi x >= 0, x != 0}` under the nonstandard sign.
    NonstdX,
    /// `{x : Y phi x >= 0, phi x != 0}` under the nonstandard sign.
    NonstdPhiX,
    /// `{x : Y phi x >= 0, phi_{J0} x = 0, phi x != 0}` under the standard sign.
    Std,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub row: usize,
    pub d: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyAudit {
    pub mode: RelaxationMode,
    pub holds: bool,
    pub violations: Vec<Violation>,
}

fn check_mode(y: &SignMeasurement, mode: RelaxationMode) -> Result<()> {
    match mode {
        RelaxationMode::NonstdX | RelaxationMode::NonstdPhiX => {
            if y.has_zeros() {
                return Err(Error::Domain("nonstandard modes need y in {-1,1}^m".into()));
            }
            if y.j_minus.is_empty() {
                return Err(Error::Domain("nonstandard modes need at least one -1 entry".into()));
            }
        }
        RelaxationMode::Std => y.require_nonzero()?,
    }
    Ok(())
}

fn cone_system(phi: &DenseMatrix, y: &SignMeasurement, row: usize, mode: RelaxationMode) -> LpProblem {
    let mut p = LpProblem::system(vec![VarDomain::Free; phi.cols()]);
    for &i in &y.j_plus {
        p.add_row(phi.row(i).to_vec(), Relation::Ge, 0.0);
    }
    for &i in &y.j_minus {
        p.add_row(phi.row(i).to_vec(), Relation::Le, 0.0);
    }
    p.add_row(phi.row(row).to_vec(), Relation::Eq, 0.0);
    if mode == RelaxationMode::Std {
        for &i in &y.j_zero {
            p.add_row(phi.row(i).to_vec(), Relation::Eq, 0.0);
        }
    }
    p
}

/// Scans the rows whose null space may meet the cone `{phi_{J+} d >= 0,
/// phi_{J-} d <= 0}` at a nonzero `d` (or one with `phi d != 0`), which is
/// exactly when the relaxed set contains sign-inconsistent points.
pub fn relaxation_consistency(
    phi: &DenseMatrix,
    y: &SignMeasurement,
    mode: RelaxationMode,
) -> Result<ConsistencyAudit> {
    y.check_rows(phi)?;
    check_mode(y, mode)?;
    let scanned = match mode {
        RelaxationMode::Std => y.nonzero_rows(),
        _ => y.j_minus.clone(),
    };
    let mut violations = Vec::new();
    for &i in &scanned {
        let base = cone_system(phi, y, i, mode);
        let probes: Vec<Vec<f64>> = match mode {
            RelaxationMode::NonstdX => (0..phi.cols())
                .map(|j| {
                    let mut e = vec![0.0; phi.cols()];
                    e[j] = 1.0;
                    e
                })
                .collect(),
            _ => (0..phi.rows()).map(|r| phi.row(r).to_vec()).collect(),
        };
        'probe: for probe in &probes {
            for s in [1.0, -1.0] {
                let mut p = base.clone();
                p.add_row(probe.iter().map(|v| s * v).collect(), Relation::Ge, 1.0);
                let sol = lp::solve(&p)?;
                if sol.status == LpStatus::Optimal {
                    violations.push(Violation { row: i, d: sol.primal });
                    break 'probe;
                }
            }
        }
    }
    Ok(ConsistencyAudit { mode, holds: violations.is_empty(), violations })
}

/// Checks a claimed violation witness directly: `d` lies in the cone, vanishes
/// on `row`, and is nonzero (resp. has `phi d != 0`) per the mode.
pub fn is_violation_witness(
    phi: &DenseMatrix,
    y: &SignMeasurement,
    mode: RelaxationMode,
    row: usize,
    d: &[f64],
    tol: f64,
) -> bool {
    if d.len() != phi.cols() || row >= phi.rows() {
        return false;
    }
    let pd = phi.mul_vec(d);
    let in_cone = y.j_plus.iter().all(|&i| pd[i] >= -tol)
        && y.j_minus.iter().all(|&i| pd[i] <= tol)
        && (mode != RelaxationMode::Std || y.j_zero.iter().all(|&i| pd[i].abs() <= tol));
    let scanned = match mode {
        RelaxationMode::Std => y.y[row] != 0,
        _ => y.y[row] == -1,
    };
    let nonzero = match mode {
        RelaxationMode::NonstdX => max_abs(d) > tol,
        _ => max_abs(&pd) > tol,
    };
    in_cone && scanned && pd[row].abs() <= tol && nonzero
}

/// Margin LP for `(S+, S-)` in `P(y)`: maximises `t` over
/// `x_{S+} >= t, x_{S-} <= -t, x = 0 off S, phi_{J+} x >= t, phi_{J-} x <= -t,
/// phi_{J0} x = 0, |x| <= 1`.
pub fn membership_margin(
    phi: &DenseMatrix,
    y: &SignMeasurement,
    s_plus: &[usize],
    s_minus: &[usize],
) -> Result<MarginCertificate> {
    y.check_rows(phi)?;
    if s_plus.iter().any(|j| s_minus.contains(j)) {
        return Err(Error::Domain("S+ and S- must be disjoint".into()));
    }
    if let Some(&j) = s_plus.iter().chain(s_minus).find(|&&j| j >= phi.cols()) {
        return Err(Error::Dimension(format!("support index {j} out of range")));
    }
    let cols: Vec<usize> = s_plus.iter().chain(s_minus).copied().collect();
    let k = cols.len();
    let mut sys = LpProblem::system(vec![VarDomain::Free; k]);
    let mut strict = Vec::new();
    for (v, &j) in cols.iter().enumerate() {
        let pos = s_plus.contains(&j);
        strict.push(sys.add_sparse_row(&[(v, 1.0)], if pos { Relation::Ge } else { Relation::Le }, 0.0));
        sys.add_sparse_row(&[(v, 1.0)], Relation::Le, 1.0);
        sys.add_sparse_row(&[(v, 1.0)], Relation::Ge, -1.0);
    }
    let sub = |i: usize| -> Vec<f64> { cols.iter().map(|&j| phi.get(i, j)).collect() };
    for &i in &y.j_plus {
        strict.push(sys.add_row(sub(i), Relation::Ge, 0.0));
    }
    for &i in &y.j_minus {
        strict.push(sys.add_row(sub(i), Relation::Le, 0.0));
    }
    for &i in &y.j_zero {
        sys.add_row(sub(i), Relation::Eq, 0.0);
    }
    max_margin_feasibility(&sys, &strict, 1.0)
}

/// Whether some signal with signed support exactly `(S+, S-)` is consistent
/// with `y` under the standard sign.
pub fn membership_p(
    phi: &DenseMatrix,
    y: &SignMeasurement,
    s_plus: &[usize],
    s_minus: &[usize],
    tol: &TolerancePolicy,
) -> Result<bool> {
    Ok(membership_margin(phi, y, s_plus, s_minus)?.holds(tol.margin_tol))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Variant {
    Necessary,
    Sufficient,
}

/// `T1 ⊆ J+`, `T2 ⊆ J-` with `T1 u T2 != J+ u J-`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TPair {
    pub t1: Vec<usize>,
    pub t2: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum PatternFailure {
    NoFullRankPair,
    /// A full-rank pair whose witness LP failed (the last one tried, for the
    /// necessary variant).
    NoWitness { pair: TPair, margin: f64 },
}

/// Outcome for one signed support against one measurement vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatternCheck {
    pub s_plus: Vec<usize>,
    pub s_minus: Vec<usize>,
    pub y: Vec<i8>,
    pub full_rank_pairs: usize,
    pub witnessed_pairs: usize,
    /// A full-rank pair with its witness, when one was found.
    pub certifying: Option<(TPair, RrspWitness)>,
    pub failure: Option<PatternFailure>,
}

impl PatternCheck {
    pub fn passed(&self, variant: Variant) -> bool {
        match variant {
            Variant::Sufficient => self.failure.is_none(),
            Variant::Necessary => self.certifying.is_some(),
        }
    }
}

/// All pairs `(T1, T2)` in subset-mask order.
pub fn tpairs(y: &SignMeasurement) -> Vec<TPair> {
    let total = y.j_plus.len() + y.j_minus.len();
    let mut out = Vec::new();
    for t1 in power_set(&y.j_plus) {
        for t2 in power_set(&y.j_minus) {
            if t1.len() + t2.len() < total {
                out.push(TPair { t1: t1.clone(), t2 });
            }
        }
    }
    out
}

/// The stacked matrix `[phi_{J+ \ T1, S}; phi_{J- \ T2, S}; phi_{J0, S}]`.
pub fn pair_stack(phi: &DenseMatrix, y: &SignMeasurement, support: &[usize], pair: &TPair) -> DenseMatrix {
    let mut rows: Vec<usize> = y.j_plus.iter().copied().filter(|i| !pair.t1.contains(i)).collect();
    rows.extend(y.j_minus.iter().copied().filter(|i| !pair.t2.contains(i)));
    rows.extend(&y.j_zero);
    phi.select(&rows, support)
}

/// Checks one pattern. Sufficient: some full-rank pair exists and every
/// full-rank pair has a witness (stops at the first pair without one).
/// Necessary: some full-rank pair has a witness (stops at the first).
pub fn check_pattern(
    phi: &DenseMatrix,
    y: &SignMeasurement,
    s_plus: &[usize],
    s_minus: &[usize],
    variant: Variant,
    tol: &TolerancePolicy,
) -> Result<PatternCheck> {
    let mut support: Vec<usize> = s_plus.iter().chain(s_minus).copied().collect();
    support.sort_unstable();
    let mut check = PatternCheck {
        s_plus: s_plus.to_vec(),
        s_minus: s_minus.to_vec(),
        y: y.y.clone(),
        full_rank_pairs: 0,
        witnessed_pairs: 0,
        certifying: None,
        failure: None,
    };
    for pair in tpairs(y) {
        if !has_full_column_rank(&pair_stack(phi, y, &support, &pair), tol) {
            continue;
        }
        check.full_rank_pairs += 1;
        let spec = WitnessSpec::for_pair(y, s_plus, s_minus, &pair);
        let (cert, witness) = witness_lp(phi, &spec, tol)?;
        match witness {
            Some(w) => {
                check.witnessed_pairs += 1;
                if check.certifying.is_none() {
                    check.certifying = Some((pair, w));
                }
                if variant == Variant::Necessary {
                    return Ok(check);
                }
            }
            None => {
                check.failure = Some(PatternFailure::NoWitness { pair, margin: cert.t_star });
                if variant == Variant::Sufficient {
                    return Ok(check);
                }
            }
        }
    }
    if check.full_rank_pairs == 0 {
        check.failure = Some(PatternFailure::NoFullRankPair);
    }
    Ok(check)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RrspEvidence {
    pub variant: Variant,
    pub k: usize,
    pub holds: bool,
    /// Patterns examined, in enumeration order, up to the deciding one.
    pub patterns: Vec<PatternCheck>,
}

pub const WRT_Y_MAX_ROWS: usize = 12;
pub const WRT_Y_MAX_COLS: usize = 10;

/// N-RRSP / S-RRSP of order `k` with respect to `y`, over the patterns of
/// `P(y)` with `1 <= |S| <= k`.
pub fn rrsp_wrt_y(
    phi: &DenseMatrix,
    y: &SignMeasurement,
    k: usize,
    variant: Variant,
    tol: &TolerancePolicy,
) -> Result<RrspEvidence> {
    y.check_rows(phi)?;
    y.require_nonzero()?;
    let nz = y.j_plus.len() + y.j_minus.len();
    if nz > WRT_Y_MAX_ROWS || phi.cols() > WRT_Y_MAX_COLS {
        return Err(Error::Budget(format!(
            "rrsp_wrt_y needs |J+|+|J-| <= {WRT_Y_MAX_ROWS} and n <= {WRT_Y_MAX_COLS}, got {nz} and {}",
            phi.cols()
        )));
    }
    let mut patterns = Vec::new();
    for (sp, sm) in sign_patterns(phi.cols(), 1, k) {
        if !membership_p(phi, y, &sp, &sm, tol)? {
            continue;
        }
        let c = check_pattern(phi, y, &sp, &sm, variant, tol)?;
        let passed = c.passed(variant);
        patterns.push(c);
        match (variant, passed) {
            (Variant::Sufficient, false) => return Ok(RrspEvidence { variant, k, holds: false, patterns }),
            (Variant::Necessary, true) => return Ok(RrspEvidence { variant, k, holds: true, patterns }),
            _ => {}
        }
    }
    Ok(RrspEvidence { variant, k, holds: variant == Variant::Sufficient, patterns })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderKPattern {
    pub s_plus: Vec<usize>,
    pub s_minus: Vec<usize>,
    /// One check per `y` in `Y^k` realizing the pattern (up to the deciding one).
    pub checks: Vec<PatternCheck>,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderKEvidence {
    pub variant: Variant,
    pub k: usize,
    pub holds: bool,
    pub yk_size: usize,
    pub patterns: Vec<OrderKPattern>,
}

pub const ORDER_K_MAX_COLS: usize = 8;
pub const ORDER_K_MAX_ROWS: usize = 8;
pub const ORDER_K_MAX_K: usize = 2;

/// Uniform N-RRSP / S-RRSP of order `k`, with `Y^k` from exact enumeration.
/// Patterns range over `1 <= |S| <= k`; the zero measurement is excluded.
pub fn rrsp_order_k(phi: &DenseMatrix, k: usize, variant: Variant, tol: &TolerancePolicy) -> Result<OrderKEvidence> {
    if phi.cols() > ORDER_K_MAX_COLS || phi.rows() > ORDER_K_MAX_ROWS || k > ORDER_K_MAX_K {
        return Err(Error::Budget(format!(
            "rrsp_order_k needs n <= {ORDER_K_MAX_COLS}, m <= {ORDER_K_MAX_ROWS}, k <= {ORDER_K_MAX_K}"
        )));
    }
    let yk: Vec<SignMeasurement> = oracle::enumerate_yk(phi, k, tol)?.into_iter().filter(|y| !y.is_zero()).collect();
    let mut patterns = Vec::new();
    let mut holds = true;
    for (sp, sm) in sign_patterns(phi.cols(), 1, k) {
        let mut checks = Vec::new();
        let mut passed = variant == Variant::Sufficient;
        for y in &yk {
            if !membership_p(phi, y, &sp, &sm, tol)? {
                continue;
            }
            let c = check_pattern(phi, y, &sp, &sm, variant, tol)?;
            let ok = c.passed(variant);
            checks.push(c);
            if variant == Variant::Sufficient && !ok {
                passed = false;
                break;
            }
            if variant == Variant::Necessary && ok {
                passed = true;
                break;
            }
        }
        patterns.push(OrderKPattern { s_plus: sp, s_minus: sm, checks, passed });
        if !passed {
            holds = false;
            break;
        }
    }
    Ok(OrderKEvidence { variant, k, holds, yk_size: yk.len(), patterns })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> TolerancePolicy {
        TolerancePolicy::default()
    }

    fn example() -> DenseMatrix {
        DenseMatrix::from_rows(&[[2.0, -1.0, 0.0, 2.0], [-1.0, 1.0, 1.0, 0.0]]).unwrap()
    }

    fn ypm() -> SignMeasurement {
        SignMeasurement::new(vec![1, -1]).unwrap()
    }

    #[test]
    fn h_examples() {
        let t = tol();
        let c = assemble_h(&example(), &ypm(), &[1.0, 0.0, 0.0, 0.0], &t).unwrap();
        assert_eq!((c.h.rows(), c.h.cols()), (1, 1));
        assert_eq!(c.h.get(0, 0), -1.0);
        assert_eq!(c.rows, vec![(1, RowBlock::ActiveMinus)]);

        let id = DenseMatrix::identity(2);
        let c = assemble_h(&id, &ypm(), &[1.0, -1.0], &t).unwrap();
        assert_eq!(c.h, id);
        let c = assemble_h(&id, &ypm(), &[2.0, -2.0], &t).unwrap();
        assert_eq!((c.h.rows(), c.h.cols()), (0, 2));
        assert!(assemble_h(&id, &ypm(), &[0.5, -2.0], &t).is_err());
    }

    #[test]
    fn rrsp_examples() {
        let t = tol();
        let id = DenseMatrix::identity(2);
        let (ok, margin, w) = rrsp_at(&id, &ypm(), &[1.0, -1.0], &t).unwrap();
        assert!(ok);
        assert!((margin - 1.0).abs() < 1e-9);
        let w = w.unwrap();
        assert!(w.verify(&id));
        assert!((w.w[0] - 1.0).abs() < 1e-9 && (w.w[1] + 1.0).abs() < 1e-9);

        let (ok, margin, w) = rrsp_at(&example(), &ypm(), &[1.0, 0.0, 0.0, 0.0], &t).unwrap();
        assert!(!ok && margin < t.margin_tol && w.is_none());
        let (ok, _, _) = rrsp_at(&example(), &ypm(), &[0.0, -1.0, 0.0, 0.0], &t).unwrap();
        assert!(!ok);
    }

    #[test]
    fn uniqueness_examples() {
        let t = tol();
        let id = DenseMatrix::identity(2);
        assert!(uniqueness_certificate(&id, &ypm(), &[1.0, -1.0], &t).unwrap().unique);
        let r = uniqueness_certificate(&example(), &ypm(), &[1.0, 0.0, 0.0, 0.0], &t).unwrap();
        assert!(!r.unique && r.h_full_rank && !r.rrsp_holds);
        let r = uniqueness_certificate(&id, &ypm(), &[2.0, -2.0], &t).unwrap();
        assert!(!r.unique && !r.h_full_rank && r.rank == 0);
    }

    #[test]
    fn tampered_witness_rejected() {
        let id = DenseMatrix::identity(2);
        let (_, _, w) = rrsp_at(&id, &ypm(), &[1.0, -1.0], &tol()).unwrap();
        let mut w = w.unwrap();
        w.w[1] = 0.5;
        assert!(!w.verify(&id));
    }

    #[test]
    fn relaxation_examples() {
        let a = relaxation_consistency(&example(), &ypm(), RelaxationMode::NonstdX).unwrap();
        assert!(!a.holds);
        assert_eq!(a.violations[0].row, 1);
        assert!(is_violation_witness(&example(), &ypm(), RelaxationMode::NonstdX, 1, &a.violations[0].d, 1e-9));
        assert!(is_violation_witness(&example(), &ypm(), RelaxationMode::NonstdX, 1, &[1.0, 1.0, 0.0, 0.0], 0.0));
        assert!(!relaxation_consistency(&example(), &ypm(), RelaxationMode::NonstdPhiX).unwrap().holds);

        let one = DenseMatrix::from_rows(&[[1.0]]).unwrap();
        let ym = SignMeasurement::new(vec![-1]).unwrap();
        assert!(relaxation_consistency(&one, &ym, RelaxationMode::NonstdX).unwrap().holds);

        let id = DenseMatrix::identity(2);
        let a = relaxation_consistency(&id, &ypm(), RelaxationMode::Std).unwrap();
        assert!(!a.holds);
        assert_eq!(a.violations[0].row, 0);
        assert!(is_violation_witness(&id, &ypm(), RelaxationMode::Std, 0, &[0.0, -1.0], 0.0));

        let yz = SignMeasurement::new(vec![1, 0]).unwrap();
        assert!(relaxation_consistency(&id, &yz, RelaxationMode::NonstdX).is_err());
        let yp = SignMeasurement::new(vec![1, 1]).unwrap();
        assert!(relaxation_consistency(&id, &yp, RelaxationMode::NonstdPhiX).is_err());
    }

    #[test]
    fn membership_examples() {
        let t = tol();
        assert!(membership_p(&example(), &ypm(), &[0], &[], &t).unwrap());
        let id = DenseMatrix::identity(2);
        assert!(!membership_p(&id, &ypm(), &[0], &[], &t).unwrap());
        assert!(!membership_p(&example(), &ypm(), &[], &[], &t).unwrap());
        assert!(membership_p(&id, &ypm(), &[0], &[1], &t).unwrap());
        assert!(membership_p(&id, &SignMeasurement::new(vec![0, 0]).unwrap(), &[], &[], &t).unwrap());
        assert!(membership_p(&id, &ypm(), &[0], &[0], &t).is_err());
    }

    #[test]
    fn wrt_y_examples() {
        let t = tol();
        let id = DenseMatrix::identity(2);
        let e = rrsp_wrt_y(&id, &ypm(), 2, Variant::Sufficient, &t).unwrap();
        assert!(e.holds);
        assert_eq!(e.patterns.len(), 1);
        let p = &e.patterns[0];
        assert_eq!((p.s_plus.clone(), p.s_minus.clone()), (vec![0], vec![1]));
        assert_eq!(p.full_rank_pairs, 1);
        let (pair, w) = p.certifying.clone().unwrap();
        assert!(pair.t1.is_empty() && pair.t2.is_empty());
        assert!(w.verify(&id));

        let e = rrsp_wrt_y(&id, &ypm(), 1, Variant::Sufficient, &t).unwrap();
        assert!(e.holds && e.patterns.is_empty());

        let e = rrsp_wrt_y(&example(), &ypm(), 1, Variant::Sufficient, &t).unwrap();
        assert!(!e.holds);
        let last = e.patterns.last().unwrap();
        assert_eq!((last.s_plus.clone(), last.s_minus.clone()), (vec![0], vec![]));
        match &last.failure {
            Some(PatternFailure::NoWitness { .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
        // The pair ({0}, {}) keeps only row 1: full-rank stack (-1), no witness.
        let pair = TPair { t1: vec![0], t2: vec![] };
        let stack = pair_stack(&example(), &ypm(), &[0], &pair);
        assert_eq!(stack.data(), &[-1.0]);
        let (cert, w) = witness_lp(&example(), &WitnessSpec::for_pair(&ypm(), &[0], &[], &pair), &t).unwrap();
        assert!(w.is_none() && cert.t_star < t.margin_tol);
        assert!(rrsp_wrt_y(&DenseMatrix::zeros(13, 2), &SignMeasurement::new(vec![1; 13]).unwrap(), 1, Variant::Necessary, &t).is_err());
    }

    #[test]
    fn order_k_examples() {
        let t = tol();
        let id = DenseMatrix::identity(2);
        assert!(rrsp_order_k(&id, 1, Variant::Sufficient, &t).unwrap().holds);
        let ones = DenseMatrix::from_rows(&[[1.0, 1.0]]).unwrap();
        assert!(!rrsp_order_k(&ones, 1, Variant::Sufficient, &t).unwrap().holds);
        assert!(rrsp_order_k(&id, 2, Variant::Necessary, &t).unwrap().holds);
        assert!(rrsp_order_k(&id, 3, Variant::Necessary, &t).is_err());
    }

    #[test]
    fn scaled_sign_examples() {
        let t = tol();
        let id = DenseMatrix::identity(2);
        let c = scaled_sign_certificate(&id, &ypm(), &[3.0, -5.0], &t).unwrap();
        // Only row 0 becomes active at scale 1/3, so H loses a column.
        assert_eq!(c.sign_recovered, None);
        let c = scaled_sign_certificate(&id, &ypm(), &[3.0, -3.0], &t).unwrap();
        assert_eq!(c.sign_recovered, Some(true));
        assert!((c.scale - 1.0 / 3.0).abs() < 1e-15);
    }
}
