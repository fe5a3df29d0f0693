//! Gradient-variance measurements for the ansatz families.
//!
//! The cost is `<H_enc>` for the complete-graph Hamiltonian with unit
//! couplings and unit fields; the gradient is taken with respect to the
//! second parameter of layer `ceil(L/2)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ansatz::{build, layer_param, AnsatzKind};
use crate::error::{Error, Result};
use crate::hamiltonians::IsingHamiltonian;
use crate::statesim::gradient;

/// Complete graph with `J_ij = 1` and `h_i = 1`, already normalized.
pub fn complete_unit_hamiltonian(n: usize) -> IsingHamiltonian<f64> {
    let mut h = IsingHamiltonian::new(n);
    for i in 0..n {
        for j in i + 1..n {
            h.couplings.insert((i, j), 1.0);
        }
        h.fields.insert(i, 1.0);
    }
    h
}

/// Independent stream for task `index` of a run seeded with `seed`.
pub fn task_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VarianceEstimate {
    pub variance: f64,
    pub std_error: f64,
}

/// Unbiased sample variance and its standard error
/// `sqrt((m4 - (k-3)/(k-1) s^4) / k)`.
pub fn variance_with_error(samples: &[f64]) -> Result<VarianceEstimate> {
    let k = samples.len();
    if k < 2 {
        return Err(Error::Invalid(format!("variance needs >= 2 samples, got {k}")));
    }
    let kf = k as f64;
    let mean = samples.iter().sum::<f64>() / kf;
    let m2 = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>();
    let m4 = samples.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / kf;
    let var = m2 / (kf - 1.0);
    let se2 = if k > 3 {
        (m4 - (kf - 3.0) / (kf - 1.0) * var * var) / kf
    } else {
        2.0 * var * var / (kf - 1.0)
    };
    Ok(VarianceEstimate {
        variance: var,
        std_error: se2.max(0.0).sqrt(),
    })
}

/// Samples of `d<H_enc>/d theta_{ceil(L/2),2}` at parameters drawn
/// uniformly from `[-pi, pi]`. Sample `i` uses `task_rng(seed, i)`, so the
/// result does not depend on the number of worker threads.
pub fn gradient_samples(
    kind: AnsatzKind,
    n: usize,
    layers: usize,
    samples: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    let ham = complete_unit_hamiltonian(n);
    let template = build(kind, &ham, None, layers)?;
    let slot = layer_param(&template, layers.div_ceil(2), 2)?;
    let obs = ham.to_observable(false);
    let pi = std::f64::consts::PI;
    (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = task_rng(seed, i as u64);
            let params: Vec<f64> = (0..template.param_count())
                .map(|_| rng.gen_range(-pi..=pi))
                .collect();
            Ok(gradient(&template, &params, &obs)?[slot])
        })
        .collect()
}

pub fn gradient_variance(
    kind: AnsatzKind,
    n: usize,
    layers: usize,
    samples: usize,
    seed: u64,
) -> Result<VarianceEstimate> {
    variance_with_error(&gradient_samples(kind, n, layers, samples, seed)?)
}

/// One row of the variance table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarianceRow {
    pub kind: AnsatzKind,
    pub n: usize,
    #[serde(rename = "L")]
    pub layers: usize,
    pub samples: usize,
    pub variance: f64,
    pub std_error: f64,
    pub seed: u64,
}

/// Variance for every `n` in `ns`; each `n` gets its own derived seed.
pub fn variance_run(
    kind: AnsatzKind,
    ns: &[usize],
    layers: usize,
    samples: usize,
    seed: u64,
) -> Result<Vec<VarianceRow>> {
    ns.iter()
        .map(|&n| {
            let task_seed = seed ^ ((n as u64) << 32);
            let est = gradient_variance(kind, n, layers, samples, task_seed)?;
            Ok(VarianceRow {
                kind,
                n,
                layers,
                samples,
                variance: est.variance,
                std_error: est.std_error,
                seed: task_seed,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub slope: f64,
    pub intercept: f64,
}

/// Least-squares line through `(n, ln variance)`.
pub fn decay_fit(points: &[(usize, f64)]) -> Result<DecayFit> {
    if points.len() < 3 {
        return Err(Error::Invalid(format!(
            "decay fit needs >= 3 points, got {}",
            points.len()
        )));
    }
    if let Some(p) = points.iter().find(|p| p.1.is_nan() || p.1 <= 0.0) {
        return Err(Error::Invalid(format!(
            "variance at n = {} is {} (must be > 0)",
            p.0, p.1
        )));
    }
    let k = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.0 as f64).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Invalid("decay fit needs distinct qubit counts".into()));
    }
    let slope = sxy / sxx;
    Ok(DecayFit {
        slope,
        intercept: my - slope * mx,
    })
}
