//! Diagonal-covariance Gaussian mixture fitting via expectation-maximisation
//! with k-means++-style seeding of the component means.
//!
//! The per-iteration total log-likelihood is non-decreasing: the M-step
//! maximises the expected complete log-likelihood under the variance floor
//! constraint (the floored update is the constrained argmax for diagonal
//! Gaussians), so the classic EM guarantee carries over.

use rand::Rng;
use rand::RngCore;
use thiserror::Error;

pub const VARIANCE_FLOOR: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum GmmError {
    #[error("need at least {needed} points to fit {needed} components, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("data contains non-finite features")]
    NonFiniteData,
    #[error("data points have inconsistent dimensions")]
    RaggedData,
}

/// Mixture of `k` axis-aligned Gaussians.
#[derive(Debug, Clone, PartialEq)]
pub struct GmmModel {
    pub weights: Vec<f64>,
    pub means: Vec<Vec<f64>>,
    /// Diagonal covariances, floored at [`VARIANCE_FLOOR`].
    pub variances: Vec<Vec<f64>>,
    pub dim: usize,
}

/// Fit outcome: the model plus the total log-likelihood after each EM
/// iteration (index 0 is the likelihood of the seeded model).
#[derive(Debug, Clone)]
pub struct GmmFit {
    pub model: GmmModel,
    pub loglik_trace: Vec<f64>,
}

/// Log-density of `x` under the mixture, stabilised with log-sum-exp.
pub fn gmm_loglik(model: &GmmModel, x: &[f64]) -> f64 {
    debug_assert_eq!(x.len(), model.dim);
    let mut terms = Vec::with_capacity(model.weights.len());
    for k in 0..model.weights.len() {
        terms.push(model.weights[k].ln() + log_normal_diag(x, &model.means[k], &model.variances[k]));
    }
    log_sum_exp(&terms)
}

fn log_normal_diag(x: &[f64], mean: &[f64], variance: &[f64]) -> f64 {
    let mut acc = -(x.len() as f64) * 0.5 * (std::f64::consts::TAU).ln();
    for i in 0..x.len() {
        let d = x[i] - mean[i];
        acc -= 0.5 * variance[i].ln();
        acc -= 0.5 * d * d / variance[i];
    }
    acc
}

fn log_sum_exp(terms: &[f64]) -> f64 {
    let max = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    max + terms.iter().map(|t| (t - max).exp()).sum::<f64>().ln()
}

/// Fits `k` components with `iterations` EM steps.
pub fn gmm_fit(
    data: &[Vec<f64>],
    k: usize,
    iterations: usize,
    rng: &mut dyn RngCore,
) -> Result<GmmFit, GmmError> {
    if data.len() < k || k == 0 {
        return Err(GmmError::TooFewPoints { needed: k.max(1), got: data.len() });
    }
    let dim = data[0].len();
    if data.iter().any(|p| p.len() != dim) {
        return Err(GmmError::RaggedData);
    }
    if data.iter().flatten().any(|v| !v.is_finite()) {
        return Err(GmmError::NonFiniteData);
    }
    let n = data.len();

    // global per-dimension variance, used as the initial spread
    let mut global_mean = vec![0.0; dim];
    for p in data {
        for (m, v) in global_mean.iter_mut().zip(p) {
            *m += v;
        }
    }
    for m in &mut global_mean {
        *m /= n as f64;
    }
    let mut global_var = vec![0.0; dim];
    for p in data {
        for (g, (v, m)) in global_var.iter_mut().zip(p.iter().zip(&global_mean)) {
            *g += (v - m) * (v - m);
        }
    }
    for g in &mut global_var {
        *g = (*g / n as f64).max(VARIANCE_FLOOR);
    }

    let means = kmeans_plus_plus_seeds(data, k, rng);
    let mut model = GmmModel {
        weights: vec![1.0 / k as f64; k],
        means,
        variances: vec![global_var.clone(); k],
        dim,
    };

    let mut loglik_trace = Vec::with_capacity(iterations + 1);
    let mut responsibilities = vec![vec![0.0f64; k]; n];
    loglik_trace.push(e_step(&model, data, &mut responsibilities));
    for _ in 0..iterations {
        m_step(&mut model, data, &responsibilities);
        loglik_trace.push(e_step(&model, data, &mut responsibilities));
    }
    Ok(GmmFit { model, loglik_trace })
}

/// E-step: fills per-point responsibilities, returns the total
/// log-likelihood of the current model.
fn e_step(model: &GmmModel, data: &[Vec<f64>], responsibilities: &mut [Vec<f64>]) -> f64 {
    let k = model.weights.len();
    let mut total = 0.0;
    let mut terms = vec![0.0f64; k];
    for (point, resp) in data.iter().zip(responsibilities.iter_mut()) {
        for c in 0..k {
            terms[c] =
                model.weights[c].ln() + log_normal_diag(point, &model.means[c], &model.variances[c]);
        }
        let norm = log_sum_exp(&terms);
        total += norm;
        for c in 0..k {
            resp[c] = (terms[c] - norm).exp();
        }
    }
    total
}

fn m_step(model: &mut GmmModel, data: &[Vec<f64>], responsibilities: &[Vec<f64>]) {
    let k = model.weights.len();
    let n = data.len();
    let dim = model.dim;
    for c in 0..k {
        let mass: f64 = responsibilities.iter().map(|r| r[c]).sum();
        if mass < 1e-300 {
            // component lost all responsibility: keep its parameters
            model.weights[c] = 1e-300;
            continue;
        }
        let mut mean = vec![0.0; dim];
        for (point, resp) in data.iter().zip(responsibilities) {
            for (m, v) in mean.iter_mut().zip(point) {
                *m += resp[c] * v;
            }
        }
        for m in &mut mean {
            *m /= mass;
        }
        let mut var = vec![0.0; dim];
        for (point, resp) in data.iter().zip(responsibilities) {
            for (g, (v, m)) in var.iter_mut().zip(point.iter().zip(&mean)) {
                *g += resp[c] * (v - m) * (v - m);
            }
        }
        for g in &mut var {
            *g = (*g / mass).max(VARIANCE_FLOOR);
        }
        model.weights[c] = mass / n as f64;
        model.means[c] = mean;
        model.variances[c] = var;
    }
    // responsibilities sum to one per point, so the weights already sum to
    // one; renormalise to absorb rounding and the empty-component floor
    let sum: f64 = model.weights.iter().sum();
    for w in &mut model.weights {
        *w /= sum;
    }
}

/// k-means++ seeding: the first mean is a uniform data point, each further
/// mean is drawn with probability proportional to the squared distance to
/// the nearest already-chosen mean.
fn kmeans_plus_plus_seeds(data: &[Vec<f64>], k: usize, rng: &mut dyn RngCore) -> Vec<Vec<f64>> {
    let n = data.len();
    let mut means: Vec<Vec<f64>> = Vec::with_capacity(k);
    means.push(data[rng.gen_range(0..n)].clone());
    let mut best_d2: Vec<f64> = data.iter().map(|p| squared_distance(p, &means[0])).collect();
    while means.len() < k {
        let total: f64 = best_d2.iter().sum();
        let next = if total <= 0.0 {
            // all points coincide with an existing seed; fall back to uniform
            data[rng.gen_range(0..n)].clone()
        } else {
            let mut target = rng.gen::<f64>() * total;
            let mut chosen = n - 1;
            for (i, d2) in best_d2.iter().enumerate() {
                target -= d2;
                if target <= 0.0 {
                    chosen = i;
                    break;
                }
            }
            data[chosen].clone()
        };
        for (d2, p) in best_d2.iter_mut().zip(data) {
            *d2 = d2.min(squared_distance(p, &next));
        }
        means.push(next);
    }
    means
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}
