//! Seeded Monte Carlo estimation of regularity probabilities, the λ-sweep
//! experiments, and empirical checks of the singularity-probability
//! bounds and the Bx-uniformity property.
//!
//! Randomness comes from ChaCha8 streams: a 64-bit master seed plus a
//! stream index fully determine every sample. Trials are split into
//! fixed-size batches, one stream per batch, so results are bit-identical
//! regardless of how many workers run them. Uniform field elements are
//! drawn by rejection from 64-bit outputs, which removes modulo bias.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::gf::{Field, GfError, MAX_ORDER};
use crate::mat::MatGF;
use crate::ratpoly::{binom, rational_to_f64};
use crate::regularity::{is_contiguous_super_regular, is_super_regular};

/// Identifier of the exact sampling scheme, recorded in every estimate.
pub const RNG_ALGORITHM: &str = "chacha8/stream64/rejection-u64";

/// Trials per RNG stream; the batch size is part of the algorithm
/// contract (changing it changes which stream samples which trial).
pub const TRIALS_PER_STREAM: u64 = 64;

#[derive(Debug, thiserror::Error)]
pub enum McError {
    #[error("field-size target {0} exceeds the supported maximum {MAX_ORDER}")]
    TargetTooLarge(f64),
    #[error("B must have full row rank")]
    RankDeficientB,
    #[error(transparent)]
    Field(#[from] GfError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EstimateKind {
    #[serde(rename = "SR")]
    Sr,
    #[serde(rename = "CSR")]
    Csr,
    #[serde(rename = "MDS")]
    Mds,
}

impl std::fmt::Display for EstimateKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            EstimateKind::Sr => "SR",
            EstimateKind::Csr => "CSR",
            EstimateKind::Mds => "MDS",
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RngMeta {
    pub algorithm: String,
    pub seed: u64,
    pub trials_per_stream: u64,
}

/// Result of one Monte Carlo estimate.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct EstimateRecord {
    pub q: u64,
    pub k: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    pub kind: EstimateKind,
    pub trials: u64,
    pub successes: u64,
    pub p_hat: f64,
    /// Normal-approximation 95% confidence halfwidth.
    pub ci_halfwidth: f64,
    /// Achieved threshold value: #constraints / q.
    pub lambda: f64,
    pub seed: u64,
    pub rng: RngMeta,
}

/// Uniform element code in 0..q, by rejection from 64-bit outputs.
#[inline]
pub fn uniform_code(q: u64, rng: &mut ChaCha8Rng) -> u32 {
    // accept x < q * floor(2^64 / q); 2^64 mod q = ((MAX mod q) + 1) mod q
    let rem = ((u64::MAX % q) + 1) % q;
    let limit = u64::MAX - rem;
    loop {
        let x = rng.next_u64();
        if x <= limit {
            return (x % q) as u32;
        }
    }
}

/// Matrix with iid uniform entries drawn from the stream.
pub fn sample_matrix(
    field: &Arc<Field>,
    rows: usize,
    cols: usize,
    rng: &mut ChaCha8Rng,
) -> MatGF {
    let q = field.q();
    let data: Vec<u32> = (0..rows * cols).map(|_| uniform_code(q, rng)).collect();
    MatGF::from_codes(field.clone(), rows, cols, data)
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// The number of nonsingularity constraints behind each kind's threshold.
fn constraint_count(kind: EstimateKind, k: usize, n: Option<usize>) -> f64 {
    match kind {
        EstimateKind::Sr => {
            rational_to_f64(&num_rational::BigRational::from_integer(
                binom(2 * k as u64, k as u64).into(),
            ))
        }
        EstimateKind::Csr => (k as f64).powi(3) / 3.0,
        EstimateKind::Mds => {
            let n = n.expect("MDS estimates need n") as u64;
            rational_to_f64(&num_rational::BigRational::from_integer(
                binom(n, k as u64).into(),
            ))
        }
    }
}

/// Runs `trials` independent regularity trials and returns the estimate
/// with a 95% confidence halfwidth. `jobs = 0` uses available parallelism;
/// the result does not depend on the worker count.
pub fn estimate(
    kind: EstimateKind,
    q: u64,
    k: usize,
    n: Option<usize>,
    trials: u64,
    seed: u64,
    jobs: usize,
) -> Result<EstimateRecord, McError> {
    if kind == EstimateKind::Mds {
        let n = n.expect("MDS estimates need n");
        assert!(k <= n, "k must not exceed n");
    }
    let field = Arc::new(Field::new(q)?);
    let streams = trials.div_ceil(TRIALS_PER_STREAM);
    let workers = if jobs == 0 {
        std::thread::available_parallelism().map(|v| v.get()).unwrap_or(1)
    } else {
        jobs
    }
    .min(streams.max(1) as usize);

    let next = AtomicUsize::new(0);
    let per_stream = Mutex::new(vec![0u64; streams as usize]);

    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let s = next.fetch_add(1, Ordering::Relaxed) as u64;
                if s >= streams {
                    break;
                }
                let mut rng = stream_rng(seed, s);
                let lo = s * TRIALS_PER_STREAM;
                let hi = ((s + 1) * TRIALS_PER_STREAM).min(trials);
                let mut hits = 0u64;
                for _ in lo..hi {
                    let ok = match kind {
                        EstimateKind::Sr => {
                            is_super_regular(&sample_matrix(&field, k, k, &mut rng))
                        }
                        EstimateKind::Csr => {
                            is_contiguous_super_regular(&sample_matrix(&field, k, k, &mut rng))
                        }
                        EstimateKind::Mds => {
                            // systematic-generator sampling: the code is MDS
                            // iff the non-identity block is super-regular;
                            // with n = k the identity generator is always MDS
                            let nn = n.unwrap();
                            nn == k
                                || is_super_regular(&sample_matrix(&field, k, nn - k, &mut rng))
                        }
                    };
                    if ok {
                        hits += 1;
                    }
                }
                per_stream.lock().unwrap()[s as usize] = hits;
            });
        }
    });

    // summed in stream order
    let successes: u64 = per_stream.into_inner().unwrap().iter().sum();
    let p_hat = successes as f64 / trials as f64;
    let ci_halfwidth = 1.96 * (p_hat * (1.0 - p_hat) / trials as f64).sqrt();
    Ok(EstimateRecord {
        q,
        k,
        n,
        kind,
        trials,
        successes,
        p_hat,
        ci_halfwidth,
        lambda: constraint_count(kind, k, n) / q as f64,
        seed,
        rng: RngMeta {
            algorithm: RNG_ALGORITHM.to_string(),
            seed,
            trials_per_stream: TRIALS_PER_STREAM,
        },
    })
}

/// Smallest prime power q with #constraints / q ≤ λ, i.e. q ≥ target where
/// target = #constraints / λ.
pub fn choose_field_size(kind: EstimateKind, k: usize, lambda: f64) -> Result<u64, McError> {
    assert!(lambda > 0.0, "lambda must be positive");
    let target = constraint_count_for_choice(kind, k) / lambda;
    if target > MAX_ORDER as f64 {
        return Err(McError::TargetTooLarge(target));
    }
    let mut q = (target.ceil() as u64).max(2);
    while !crate::gf::is_prime_power(q) {
        q += 1;
        if q > MAX_ORDER {
            return Err(McError::TargetTooLarge(target));
        }
    }
    Ok(q)
}

/// For field-size selection, MDS sweeps use the n = 2k instance, which
/// shares the super-regular constraint count.
fn constraint_count_for_choice(kind: EstimateKind, k: usize) -> f64 {
    match kind {
        EstimateKind::Sr | EstimateKind::Mds => constraint_count(EstimateKind::Sr, k, None),
        EstimateKind::Csr => constraint_count(EstimateKind::Csr, k, None),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub lambda_requested: f64,
    pub record: EstimateRecord,
}

/// One estimate per requested λ, with the field size chosen per λ. The
/// achieved λ lands in each record.
pub fn lambda_sweep(
    kind: EstimateKind,
    k: usize,
    lambdas: &[f64],
    trials: u64,
    seed: u64,
    jobs: usize,
) -> Result<Vec<SweepRow>, McError> {
    assert!(!lambdas.is_empty(), "need at least one lambda");
    let mut rows = Vec::with_capacity(lambdas.len());
    for &lam in lambdas {
        let q = choose_field_size(kind, k, lam)?;
        let n = (kind == EstimateKind::Mds).then_some(2 * k);
        let record = estimate(kind, q, k, n, trials, seed, jobs)?;
        rows.push(SweepRow {
            lambda_requested: lam,
            record,
        });
    }
    Ok(rows)
}

/// Formats with six significant digits.
pub fn sig6(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    let mag = x.abs().log10().floor() as i32;
    let decimals = (5 - mag).max(0) as usize;
    format!("{x:.decimals$}")
}

/// CSV emission for a sweep: header plus one row per λ.
pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(
        "lambda_requested,lambda_achieved,q,p_hat,ci,exp_neg_lambda\n",
    );
    for row in rows {
        let r = &row.record;
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            sig6(row.lambda_requested),
            sig6(r.lambda),
            r.q,
            sig6(r.p_hat),
            sig6(r.ci_halfwidth),
            sig6((-r.lambda).exp()),
        ));
    }
    out
}

/// Empirical check of the singularity-probability bracket: the chance
/// that m iid uniform vectors in GF(q)^d are dependent lies in
/// [q^{-(d-m)}/q, q^{-(d-m)}/(q-1)], allowing 4σ of binomial noise.
#[derive(Debug, Clone, Serialize)]
pub struct BoundsReport {
    pub q: u64,
    pub d: usize,
    pub m: usize,
    pub trials: u64,
    pub dependent: u64,
    pub observed: f64,
    pub bracket_low: f64,
    pub bracket_high: f64,
    pub pass: bool,
}

pub fn singular_prob_bounds_check(
    q: u64,
    d: usize,
    m: usize,
    trials: u64,
    seed: u64,
) -> Result<BoundsReport, McError> {
    assert!(m <= d, "m must not exceed d");
    let field = Arc::new(Field::new(q)?);
    let mut dependent = 0u64;
    let streams = trials.div_ceil(TRIALS_PER_STREAM);
    for s in 0..streams {
        let mut rng = stream_rng(seed, s);
        let lo = s * TRIALS_PER_STREAM;
        let hi = ((s + 1) * TRIALS_PER_STREAM).min(trials);
        for _ in lo..hi {
            let mat = sample_matrix(&field, m, d, &mut rng);
            if mat.rank() < m {
                dependent += 1;
            }
        }
    }
    let observed = dependent as f64 / trials as f64;
    let base = (q as f64).powi(-((d - m) as i32));
    let low = base / q as f64;
    let high = base / (q as f64 - 1.0);
    let sigma = |p: f64| (p * (1.0 - p) / trials as f64).sqrt();
    let pass = observed >= low - 4.0 * sigma(low) && observed <= high + 4.0 * sigma(high);
    Ok(BoundsReport {
        q,
        d,
        m,
        trials,
        dependent,
        observed,
        bracket_low: low,
        bracket_high: high,
        pass,
    })
}

/// Chi-square tests that the coordinates of Bx are uniform and pairwise
/// independent when x is uniform and B has full row rank.
#[derive(Debug, Clone, Serialize)]
pub struct UniformityReport {
    pub q: u64,
    pub rows: usize,
    pub trials: u64,
    pub marginal_stats: Vec<f64>,
    pub marginal_critical: f64,
    pub pair_stats: Vec<f64>,
    pub pair_critical: f64,
    pub pass: bool,
}

pub fn bx_uniformity_check(
    b: &MatGF,
    trials: u64,
    seed: u64,
) -> Result<UniformityReport, McError> {
    let rows = b.rows();
    let cols = b.cols();
    if b.rank() < rows {
        return Err(McError::RankDeficientB);
    }
    let field = b.field().clone();
    let q = field.q() as usize;

    let mut marginal = vec![vec![0u64; q]; rows];
    let n_pairs = rows * (rows - 1) / 2;
    let mut pairs = vec![vec![0u64; q * q]; n_pairs];

    let mut rng = stream_rng(seed, 0);
    let mut x = vec![0u32; cols];
    let mut y = vec![0u32; rows];
    for _ in 0..trials {
        for xi in x.iter_mut() {
            *xi = uniform_code(q as u64, &mut rng);
        }
        for (r, yr) in y.iter_mut().enumerate() {
            let mut acc = 0u32;
            for (c, &xc) in x.iter().enumerate() {
                acc = field.add_c(acc, field.mul_c(b.code(r, c), xc));
            }
            *yr = acc;
        }
        for (r, &yr) in y.iter().enumerate() {
            marginal[r][yr as usize] += 1;
        }
        let mut pi = 0;
        for i in 0..rows {
            for j in i + 1..rows {
                pairs[pi][y[i] as usize * q + y[j] as usize] += 1;
                pi += 1;
            }
        }
    }

    let chi2 = |counts: &[u64], expected: f64| -> f64 {
        counts
            .iter()
            .map(|&c| {
                let d = c as f64 - expected;
                d * d / expected
            })
            .sum()
    };
    let marginal_stats: Vec<f64> = marginal
        .iter()
        .map(|c| chi2(c, trials as f64 / q as f64))
        .collect();
    let pair_stats: Vec<f64> = pairs
        .iter()
        .map(|c| chi2(c, trials as f64 / (q * q) as f64))
        .collect();

    let marginal_critical = chi2_critical_999((q - 1) as u64);
    let pair_critical = chi2_critical_999((q * q - 1) as u64);
    let pass = marginal_stats.iter().all(|&s| s < marginal_critical)
        && pair_stats.iter().all(|&s| s < pair_critical);
    Ok(UniformityReport {
        q: q as u64,
        rows,
        trials,
        marginal_stats,
        marginal_critical,
        pair_stats,
        pair_critical,
        pass,
    })
}

/// 0.999 quantile of the chi-square distribution: exact table for small
/// degrees of freedom, Wilson-Hilferty beyond.
fn chi2_critical_999(dof: u64) -> f64 {
    const TABLE: [f64; 10] = [
        10.828, 13.816, 16.266, 18.467, 20.515, 22.458, 24.322, 26.124, 27.877, 29.588,
    ];
    if (1..=10).contains(&dof) {
        TABLE[(dof - 1) as usize]
    } else {
        let v = dof as f64;
        let z = 3.090_232_306_167_813; // standard normal 0.999 quantile
        let h = 2.0 / (9.0 * v);
        v * (1.0 - h + z * h.sqrt()).powi(3)
    }
}
