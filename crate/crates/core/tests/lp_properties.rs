mod common;

use onebit_core::lp::{optimality_residuals, solve, to_standard_form, LpStatus, Relation, Sense, VarDomain, LpProblem};
use onebit_core::oracle::lp_vertex_oracle;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn simplex_matches_vertex_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut optimal = 0;
    for case in 0..300 {
        let p = common::random_lp(&mut rng);
        let s = solve(&p).unwrap();
        let o = lp_vertex_oracle(&p).unwrap();
        assert_eq!(s.status, o.status, "case {case}: {p:?}");
        if s.status == LpStatus::Optimal {
            optimal += 1;
            assert!((s.objective_value - o.objective_value).abs() <= 1e-7, "case {case}");
        }
    }
    assert!(optimal >= 50, "only {optimal} optimal cases");
}

#[test]
fn duality_and_complementarity() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for _ in 0..300 {
        let p = common::random_lp(&mut rng);
        let s = solve(&p).unwrap();
        if s.status != LpStatus::Optimal {
            continue;
        }
        let r = optimality_residuals(&p, &s);
        assert!(r.primal <= 1e-8, "{r:?}");
        assert!(r.dual <= 1e-7, "{r:?}");
        assert!(r.gap <= 1e-7, "{r:?}");
        assert!(r.complementarity <= 1e-6, "{r:?}");
        // Weak duality in the minimisation sense.
        let dual_obj: f64 = p.constraints.iter().zip(&s.dual).map(|(c, y)| c.rhs * y).sum();
        match p.sense {
            Sense::Minimize => assert!(dual_obj <= s.objective_value + 1e-7),
            Sense::Maximize => assert!(dual_obj >= s.objective_value - 1e-7),
        }
    }
}

#[test]
fn oracle_dual_matches_on_nondegenerate_case() {
    let mut p = LpProblem::new(Sense::Minimize, vec![1.0, 2.0], vec![VarDomain::NonNegative; 2]);
    p.add_row(vec![1.0, 1.0], Relation::Ge, 2.0);
    p.add_row(vec![1.0, -1.0], Relation::Le, 1.0);
    let s = solve(&p).unwrap();
    let o = lp_vertex_oracle(&p).unwrap();
    for (a, b) in s.dual.iter().zip(&o.dual) {
        assert!((a - b).abs() < 1e-9);
    }
}

#[test]
fn solve_is_deterministic() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..50 {
        let p = common::random_lp(&mut rng);
        let a = format!("{:?}", solve(&p).unwrap());
        let b = format!("{:?}", solve(&p).unwrap());
        assert_eq!(a, b);
    }
}

#[test]
fn spec_examples() {
    let mut p = LpProblem::new(Sense::Minimize, vec![1.0], vec![VarDomain::NonNegative]);
    p.add_row(vec![1.0], Relation::Ge, 1.0);
    let s = solve(&p).unwrap();
    assert_eq!(s.status, LpStatus::Optimal);
    assert!((s.primal[0] - 1.0).abs() < 1e-12 && (s.objective_value - 1.0).abs() < 1e-12);

    let mut p = LpProblem::new(Sense::Minimize, vec![0.0], vec![VarDomain::NonNegative]);
    p.add_row(vec![1.0], Relation::Le, -1.0);
    assert_eq!(solve(&p).unwrap().status, LpStatus::Infeasible);

    let mut p = LpProblem::new(Sense::Minimize, vec![1.0], vec![VarDomain::Free]);
    p.add_row(vec![1.0], Relation::Ge, 1.0);
    let sf = to_standard_form(&p);
    assert_eq!(sf.c, vec![1.0, -1.0, 0.0]);
    assert_eq!(sf.a.data(), &[1.0, -1.0, -1.0]);
    assert_eq!(sf.b, vec![1.0]);
}

proptest! {
    #[test]
    fn standard_form_round_trip(seed in any::<u64>(), z in proptest::collection::vec(0.0f64..10.0, 30)) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = common::random_lp(&mut rng);
        let sf = to_standard_form(&p);
        let zs = &z[..sf.num_cols().min(z.len())];
        prop_assume!(zs.len() == sf.num_cols());
        let x = sf.recover(zs);
        // Re-encoding x (with nonnegative parts on each side) recovers it exactly.
        let mut back = vec![0.0; sf.num_cols()];
        for (j, map) in sf.var_map.iter().enumerate() {
            match *map {
                onebit_core::lp::VarMap::NonNegative { col } => back[col] = x[j],
                onebit_core::lp::VarMap::Split { pos, neg } => {
                    back[pos] = x[j].max(0.0);
                    back[neg] = (-x[j]).max(0.0);
                }
            }
        }
        prop_assert_eq!(sf.recover(&back), x);
    }
}
