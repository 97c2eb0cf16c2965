//! Seeded Monte-Carlo recovery experiments.

use std::collections::BTreeMap;
use std::time::Instant;

use anyhow::{bail, Result};
use clap::ValueEnum;
use onebit_core::certify::uniqueness_certificate;
use onebit_core::decoders::{one_bit_bp, relaxation_gd};
use onebit_core::linalg::norm2;
use onebit_core::lp::LpStatus;
use onebit_core::signmodel::sign_standard;
use onebit_core::{DenseMatrix, SignMeasurement, TolerancePolicy};
use rand::seq::index::sample;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::rng::{matrix_rng, signal_rng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum Ensemble {
    /// i.i.d. standard normal entries.
    Gaussian,
    /// Rows drawn uniformly from the unit sphere.
    UnitSphereRows,
    /// i.i.d. +-1 entries.
    Rademacher,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Decoder {
    Bp,
    Gd,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub m: usize,
    pub n: usize,
    pub k_list: Vec<usize>,
    pub trials: usize,
    pub ensemble: Ensemble,
    pub seed: u64,
    pub tolerances: TolerancePolicy,
    pub decoders: Vec<Decoder>,
    /// Record wall-clock times. Off by default so reports are reproducible.
    pub timing: bool,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.m == 0 || self.n == 0 {
            bail!("m and n must be positive");
        }
        if self.trials == 0 {
            bail!("trials must be at least 1");
        }
        if self.k_list.is_empty() {
            bail!("k_list is empty");
        }
        if let Some(k) = self.k_list.iter().find(|&&k| k == 0 || k > self.n) {
            bail!("sparsity {k} is outside 1..={}", self.n);
        }
        if self.decoders.is_empty() {
            bail!("no decoder selected");
        }
        self.tolerances.validate()?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub seed: u64,
    pub m: usize,
    pub n: usize,
    pub k: usize,
    pub trial_index: usize,
    pub decoder: Decoder,
    /// `Optimal`, `Infeasible`, `Unbounded`, or `Skipped` when the decoder
    /// does not apply to the drawn measurement.
    pub status: String,
    pub objective: Option<f64>,
    pub consistent: bool,
    pub sign_recovered: bool,
    pub support_subset: bool,
    pub unique_certified: bool,
    pub runtime_ms: f64,
}

pub const CSV_HEADER: &str = "seed,m,n,k,trial_index,decoder,status,objective,consistent,sign_recovered,support_subset,unique_certified,runtime_ms";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub k: usize,
    pub decoder: Decoder,
    pub trials: usize,
    pub optimal_rate: f64,
    pub consistent_rate: f64,
    pub sign_recovery_rate: f64,
    pub support_subset_rate: f64,
    pub unique_certified_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub config: ExperimentConfig,
    pub cells: Vec<CellSummary>,
    /// Seconds; `None` unless timing is enabled.
    pub wall_time_s: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub records: Vec<TrialRecord>,
    pub summary: ExperimentSummary,
}

impl ExperimentReport {
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::WriterBuilder::new().has_headers(true).from_writer(Vec::new());
        for r in &self.records {
            w.serialize(r)?;
        }
        Ok(String::from_utf8(w.into_inner()?)?)
    }

    pub fn summary_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.summary)? + "\n")
    }

    pub fn cell(&self, k: usize, decoder: Decoder) -> Option<&CellSummary> {
        self.summary.cells.iter().find(|c| c.k == k && c.decoder == decoder)
    }
}

pub fn draw_matrix<R: Rng>(ensemble: Ensemble, m: usize, n: usize, rng: &mut R) -> DenseMatrix {
    let mut data: Vec<f64> = match ensemble {
        Ensemble::Gaussian | Ensemble::UnitSphereRows => (0..m * n).map(|_| StandardNormal.sample(rng)).collect(),
        Ensemble::Rademacher => (0..m * n).map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 }).collect(),
    };
    if ensemble == Ensemble::UnitSphereRows {
        for row in data.chunks_mut(n) {
            let s = norm2(row);
            row.iter_mut().for_each(|v| *v /= s);
        }
    }
    DenseMatrix::new(m, n, data).expect("finite entries")
}

/// `k`-sparse signal with uniformly random support and standard-normal nonzeros.
pub fn draw_signal<R: Rng>(n: usize, k: usize, rng: &mut R) -> Vec<f64> {
    let mut x = vec![0.0; n];
    for j in sample(rng, n, k) {
        x[j] = StandardNormal.sample(rng);
    }
    x
}

fn status_label(s: LpStatus) -> String {
    format!("{s:?}")
}

fn support(v: &[i8]) -> impl Iterator<Item = usize> + '_ {
    v.iter().enumerate().filter(|(_, &s)| s != 0).map(|(j, _)| j)
}

struct Outcome {
    status: String,
    objective: Option<f64>,
    consistent: bool,
    x: Option<Vec<f64>>,
    unique: bool,
}

fn run_decoder(d: Decoder, phi: &DenseMatrix, y: &SignMeasurement, tol: &TolerancePolicy) -> Outcome {
    let skipped = || Outcome { status: "Skipped".into(), objective: None, consistent: false, x: None, unique: false };
    match d {
        Decoder::Bp => match one_bit_bp(phi, y) {
            Ok(sol) if sol.is_optimal() => {
                let consistent = sign_standard(&phi.mul_vec(&sol.x), tol) == y.y;
                let unique = !y.is_zero()
                    && uniqueness_certificate(phi, y, &sol.x, tol).map(|r| r.unique).unwrap_or(false);
                Outcome {
                    status: status_label(sol.status),
                    objective: Some(sol.objective),
                    consistent,
                    x: Some(sol.x),
                    unique,
                }
            }
            Ok(sol) => Outcome { status: status_label(sol.status), ..skipped() },
            Err(_) => skipped(),
        },
        Decoder::Gd => match relaxation_gd(phi, y, tol) {
            Ok(r) if r.status == LpStatus::Optimal => Outcome {
                status: status_label(r.status),
                objective: Some(r.objective),
                consistent: r.consistent,
                x: Some(r.x),
                unique: false,
            },
            Ok(r) => Outcome { status: status_label(r.status), ..skipped() },
            Err(_) => skipped(),
        },
    }
}

fn run_trial(cfg: &ExperimentConfig, k: usize, trial: usize) -> Vec<TrialRecord> {
    let tol = &cfg.tolerances;
    let phi = draw_matrix(cfg.ensemble, cfg.m, cfg.n, &mut matrix_rng(cfg.seed, trial as u64));
    let x_star = draw_signal(cfg.n, k, &mut signal_rng(cfg.seed, k as u64, trial as u64));
    let y = SignMeasurement::new(sign_standard(&phi.mul_vec(&x_star), tol)).expect("entries in {-1,0,1}");
    let true_sign = sign_standard(&x_star, tol);
    cfg.decoders
        .iter()
        .map(|&d| {
            let start = Instant::now();
            let out = run_decoder(d, &phi, &y, tol);
            let elapsed = start.elapsed().as_secs_f64() * 1e3;
            let (sign_recovered, support_subset) = match &out.x {
                Some(x) => {
                    let s = sign_standard(x, tol);
                    let subset = support(&s).all(|j| true_sign[j] != 0);
                    (s == true_sign, subset)
                }
                None => (false, false),
            };
            TrialRecord {
                seed: cfg.seed,
                m: cfg.m,
                n: cfg.n,
                k,
                trial_index: trial,
                decoder: d,
                status: out.status,
                objective: out.objective,
                consistent: out.consistent,
                sign_recovered,
                support_subset,
                unique_certified: out.unique,
                runtime_ms: if cfg.timing { elapsed } else { 0.0 },
            }
        })
        .collect()
}

fn rate(records: &[&TrialRecord], f: impl Fn(&TrialRecord) -> bool) -> f64 {
    records.iter().filter(|r| f(r)).count() as f64 / records.len() as f64
}

fn summarize(records: &[TrialRecord]) -> Vec<CellSummary> {
    let mut cells: BTreeMap<(usize, Decoder), Vec<&TrialRecord>> = BTreeMap::new();
    for r in records {
        cells.entry((r.k, r.decoder)).or_default().push(r);
    }
    cells
        .into_iter()
        .map(|((k, decoder), rs)| CellSummary {
            k,
            decoder,
            trials: rs.len(),
            optimal_rate: rate(&rs, |r| r.status == "Optimal"),
            consistent_rate: rate(&rs, |r| r.consistent),
            sign_recovery_rate: rate(&rs, |r| r.sign_recovered),
            support_subset_rate: rate(&rs, |r| r.support_subset),
            unique_certified_rate: rate(&rs, |r| r.unique_certified),
        })
        .collect()
}

/// Runs every `(k, trial)` cell in parallel. Records come out ordered by
/// `k_list` position, then trial index, then decoder.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let start = Instant::now();
    let tasks: Vec<(usize, usize)> =
        cfg.k_list.iter().flat_map(|&k| (0..cfg.trials).map(move |t| (k, t))).collect();
    let records: Vec<TrialRecord> =
        tasks.par_iter().map(|&(k, t)| run_trial(cfg, k, t)).collect::<Vec<_>>().into_iter().flatten().collect();
    let cells = summarize(&records);
    let wall_time_s = cfg.timing.then(|| start.elapsed().as_secs_f64());
    Ok(ExperimentReport { records, summary: ExperimentSummary { config: cfg.clone(), cells, wall_time_s } })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> ExperimentConfig {
        ExperimentConfig {
            m: 4,
            n: 8,
            k_list: vec![1, 2],
            trials: 10,
            ensemble: Ensemble::Gaussian,
            seed: 7,
            tolerances: TolerancePolicy::default(),
            decoders: vec![Decoder::Bp, Decoder::Gd],
            timing: false,
        }
    }

    #[test]
    fn validation() {
        assert!(cfg().validate().is_ok());
        for bad in [
            ExperimentConfig { trials: 0, ..cfg() },
            ExperimentConfig { k_list: vec![0], ..cfg() },
            ExperimentConfig { k_list: vec![9], ..cfg() },
            ExperimentConfig { decoders: vec![], ..cfg() },
        ] {
            assert!(run_experiment(&bad).is_err());
        }
    }

    #[test]
    fn row_count_header_and_invariants() {
        let rep = run_experiment(&cfg()).unwrap();
        assert_eq!(rep.records.len(), 10 * 2 * 2);
        let csv = rep.to_csv().unwrap();
        assert_eq!(csv.lines().next().unwrap(), CSV_HEADER);
        for r in &rep.records {
            assert!(!r.sign_recovered || r.support_subset);
            if r.decoder == Decoder::Bp && r.status == "Optimal" {
                assert!(r.consistent);
            }
            if r.decoder == Decoder::Gd {
                assert!(!r.unique_certified);
            }
        }
    }

    #[test]
    fn unit_sphere_rows_are_normalized() {
        let phi = draw_matrix(Ensemble::UnitSphereRows, 3, 5, &mut matrix_rng(1, 0));
        for r in 0..3 {
            assert!((norm2(phi.row(r)) - 1.0).abs() < 1e-12);
        }
    }
}
