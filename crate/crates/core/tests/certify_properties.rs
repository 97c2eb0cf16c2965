mod common;

use onebit_core::certify::{
    is_violation_witness, relaxation_consistency, rrsp_at, rrsp_wrt_y, uniqueness_certificate, RelaxationMode, Variant,
};
use onebit_core::decoders::{alternative_bp_optimum, one_bit_bp};
use onebit_core::linalg::{column_rank, DenseMatrix};
use onebit_core::lp::DEFAULT_RESTARTS;
use onebit_core::oracle::enumerate_p;
use onebit_core::signmodel::{sign_nonstandard, sign_standard, SignMeasurement};
use onebit_core::TolerancePolicy;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

#[test]
fn certificate_agrees_with_alternative_search() {
    let t = TolerancePolicy::default();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut agree, mut total, mut unique_seen, mut nonunique_seen) = (0, 0, 0, 0);
    for trial in 0..120 {
        let m = rng.random_range(2..=6);
        let n = rng.random_range(2..=8);
        let k = rng.random_range(1..=n.min(3));
        let (phi, y, _) = common::bp_instance(&mut rng, m, n, k, trial % 2 == 0);
        let s = one_bit_bp(&phi, &y).unwrap();
        let r = uniqueness_certificate(&phi, &y, &s.x, &t).unwrap();
        let alt = alternative_bp_optimum(&phi, &y, &s.x, DEFAULT_RESTARTS, trial).unwrap();
        total += 1;
        if r.unique {
            unique_seen += 1;
        } else {
            nonunique_seen += 1;
        }
        if r.unique == alt.is_none() {
            agree += 1;
        } else {
            assert!(r.near_threshold(&t, 10.0), "trial {trial}: unexplained disagreement {r:?}");
        }
        if let Some(w) = &r.witness {
            assert!(w.verify(&phi));
        }
    }
    assert!(agree as f64 >= 0.99 * total as f64, "{agree}/{total}");
    assert!(unique_seen > 0 && nonunique_seen > 0);
}

#[test]
fn unique_verdict_survives_duplicated_active_row() {
    let t = TolerancePolicy::default();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut checked = 0;
    while checked < 25 {
        let (phi, y, _) = common::bp_instance(&mut rng, 4, 6, 2, false);
        let s = one_bit_bp(&phi, &y).unwrap();
        let r = uniqueness_certificate(&phi, &y, &s.x, &t).unwrap();
        if !r.unique {
            continue;
        }
        for &i in &r.active_sets.active {
            let mut rows: Vec<Vec<f64>> = (0..phi.rows()).map(|r| phi.row(r).to_vec()).collect();
            rows.push(phi.row(i).to_vec());
            let phi2 = DenseMatrix::from_rows(&rows).unwrap();
            let mut yy = y.y.clone();
            yy.push(y.y[i]);
            let y2 = SignMeasurement::new(yy).unwrap();
            let s2 = one_bit_bp(&phi2, &y2).unwrap();
            assert!(s2.x.iter().zip(&s.x).all(|(a, b)| (a - b).abs() < 1e-7));
            assert!(uniqueness_certificate(&phi2, &y2, &s2.x, &t).unwrap().unique);
        }
        checked += 1;
    }
}

#[test]
fn sufficient_property_implies_full_rank_columns() {
    let t = TolerancePolicy::default();
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut positives = 0;
    for trial in 0..150 {
        let m = rng.random_range(2..=5);
        let n = rng.random_range(2..=5);
        let (phi, y, _) = common::bp_instance(&mut rng, m, n, 1 + trial % 2, trial % 3 == 0);
        let k = 2;
        if !rrsp_wrt_y(&phi, &y, k, Variant::Sufficient, &t).unwrap().holds {
            continue;
        }
        positives += 1;
        for (sp, sm) in enumerate_p(&phi, &y, k, &t).unwrap() {
            let s: Vec<usize> = sp.iter().chain(&sm).copied().collect();
            assert_eq!(column_rank(&phi.select_cols(&s), &t), s.len());
        }
    }
    assert!(positives > 0);
}

#[test]
fn witnesses_recheck_independently() {
    let t = TolerancePolicy::default();
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for _ in 0..60 {
        let (phi, y, _) = common::bp_instance(&mut rng, 4, 5, 2, false);
        let s = one_bit_bp(&phi, &y).unwrap();
        if let (true, _, Some(w)) = rrsp_at(&phi, &y, &s.x, &t).unwrap() {
            assert!(w.verify(&phi));
        }
        for v in [Variant::Sufficient, Variant::Necessary] {
            for p in rrsp_wrt_y(&phi, &y, 2, v, &t).unwrap().patterns {
                if let Some((_, w)) = p.certifying {
                    assert!(w.verify(&phi));
                }
            }
        }
    }
}

#[test]
fn no_negative_rows_makes_relaxation_exact() {
    // With y all ones the nonstandard sign set is {x : phi x >= 0}.
    let t = TolerancePolicy::default();
    let mut rng = ChaCha8Rng::seed_from_u64(29);
    for _ in 0..20 {
        let phi = common::small_int_matrix(&mut rng, 3, 3);
        for _ in 0..500 {
            let x: Vec<f64> = (0..3).map(|_| rng.random_range(-2..=2) as f64).collect();
            let phix = phi.mul_vec(&x);
            let in_sign_set = sign_nonstandard(&phix, &t).iter().all(|&s| s == 1);
            let in_relaxed = phix.iter().all(|&v| v >= 0.0);
            assert_eq!(in_sign_set, in_relaxed);
        }
    }
}

fn in_relaxed_set(phi: &DenseMatrix, y: &SignMeasurement, x: &[f64], mode: RelaxationMode) -> bool {
    let px = phi.mul_vec(x);
    let cone = (0..y.len()).all(|i| f64::from(y.y[i]) * px[i] >= 0.0);
    match mode {
        RelaxationMode::NonstdX => cone && x.iter().any(|v| *v != 0.0),
        RelaxationMode::NonstdPhiX => cone && px.iter().any(|v| *v != 0.0),
        RelaxationMode::Std => cone && y.j_zero.iter().all(|&i| px[i] == 0.0) && px.iter().any(|v| *v != 0.0),
    }
}

#[test]
fn relaxation_verdict_matches_sampling() {
    let t = TolerancePolicy::default();
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let (mut holds_seen, mut violated_seen) = (0, 0);
    for _ in 0..40 {
        let m = rng.random_range(1..=3);
        let n = rng.random_range(1..=3);
        let phi = common::small_int_matrix(&mut rng, m, n);
        let y = SignMeasurement::new((0..m).map(|_| rng.random_range(-1..=1)).collect()).unwrap();
        for mode in [RelaxationMode::NonstdX, RelaxationMode::NonstdPhiX, RelaxationMode::Std] {
            let Ok(audit) = relaxation_consistency(&phi, &y, mode) else { continue };
            if audit.holds {
                holds_seen += 1;
                // Integer points hit the measure-zero faces where violations live.
                for _ in 0..10_000 {
                    let x: Vec<f64> = (0..n)
                        .map(|_| {
                            if rng.random_bool(0.8) {
                                rng.random_range(-3..=3) as f64
                            } else {
                                StandardNormal.sample(&mut rng)
                            }
                        })
                        .collect();
                    if in_relaxed_set(&phi, &y, &x, mode) {
                        let s = match mode {
                            RelaxationMode::Std => sign_standard(&phi.mul_vec(&x), &t),
                            _ => sign_nonstandard(&phi.mul_vec(&x), &t),
                        };
                        assert_eq!(s, y.y, "{phi:?} {y:?} {mode:?} x={x:?}");
                    }
                }
            } else {
                violated_seen += 1;
                for v in &audit.violations {
                    assert!(is_violation_witness(&phi, &y, mode, v.row, &v.d, 1e-9));
                    let s = match mode {
                        RelaxationMode::Std => sign_standard(&phi.mul_vec(&v.d), &t),
                        _ => sign_nonstandard(&phi.mul_vec(&v.d), &t),
                    };
                    assert_ne!(s, y.y);
                }
            }
        }
    }
    assert!(holds_seen > 0 && violated_seen > 0);
}
