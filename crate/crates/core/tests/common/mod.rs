#![allow(dead_code)]

use onebit_core::lp::{LpProblem, Relation, Sense, VarDomain};
use onebit_core::signmodel::{measure, SignMode};
use onebit_core::{DenseMatrix, SignMeasurement, TolerancePolicy};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn example() -> DenseMatrix {
    DenseMatrix::from_rows(&[[2.0, -1.0, 0.0, 2.0], [-1.0, 1.0, 1.0, 0.0]]).unwrap()
}

pub fn ypm() -> SignMeasurement {
    SignMeasurement::new(vec![1, -1]).unwrap()
}

pub fn random_lp<R: Rng>(rng: &mut R) -> LpProblem {
    let rows = rng.random_range(1..=6);
    let vars = rng.random_range(1..=6);
    let sense = if rng.random_bool(0.5) { Sense::Minimize } else { Sense::Maximize };
    let domains = (0..vars)
        .map(|_| if rng.random_bool(0.7) { VarDomain::NonNegative } else { VarDomain::Free })
        .collect();
    let objective = (0..vars).map(|_| rng.random_range(-3..=3) as f64).collect();
    let mut p = LpProblem::new(sense, objective, domains);
    for _ in 0..rows {
        let coeffs = (0..vars).map(|_| rng.random_range(-3..=3) as f64).collect();
        let rel = match rng.random_range(0..3) {
            0 => Relation::Le,
            1 => Relation::Eq,
            _ => Relation::Ge,
        };
        p.add_row(coeffs, rel, rng.random_range(-3..=3) as f64);
    }
    p
}

pub fn gaussian_matrix<R: Rng>(rng: &mut R, m: usize, n: usize) -> DenseMatrix {
    let data = (0..m * n).map(|_| StandardNormal.sample(rng)).collect();
    DenseMatrix::new(m, n, data).unwrap()
}

pub fn small_int_matrix<R: Rng>(rng: &mut R, m: usize, n: usize) -> DenseMatrix {
    let data = (0..m * n).map(|_| rng.random_range(-2..=2) as f64).collect();
    DenseMatrix::new(m, n, data).unwrap()
}

/// A `k`-sparse Gaussian signal.
pub fn sparse_signal<R: Rng>(rng: &mut R, n: usize, k: usize) -> Vec<f64> {
    let mut x = vec![0.0; n];
    let mut idx: Vec<usize> = (0..n).collect();
    for i in 0..k.min(n) {
        let j = rng.random_range(i..n);
        idx.swap(i, j);
        x[idx[i]] = StandardNormal.sample(rng);
    }
    x
}

/// Random instance with a nonzero measurement vector.
pub fn bp_instance<R: Rng>(rng: &mut R, m: usize, n: usize, k: usize, integer: bool) -> (DenseMatrix, SignMeasurement, Vec<f64>) {
    let tol = TolerancePolicy::default();
    loop {
        let phi = if integer { small_int_matrix(rng, m, n) } else { gaussian_matrix(rng, m, n) };
        let x = sparse_signal(rng, n, k);
        let y = measure(&phi, &x, SignMode::Standard, &tol).unwrap();
        if !y.is_zero() {
            return (phi, y, x);
        }
    }
}
