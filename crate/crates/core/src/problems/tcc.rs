//! Empirical tangential cone constant.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::NonlinearProblem;
use crate::error::{check_len, Error, Result};
use crate::rng::{stream, Stream};
use crate::simplex::project_onto_simplex;

const MIN_DENOMINATOR: f64 = 1e-14;

/// Uniform point of the Euclidean ball, then projected blockwise onto the simplex for
/// constrained problems.
pub(crate) fn ball_point(p: &NonlinearProblem, center: &[f64], radius: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let d = center.len();
    let dir: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
    let len = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
    let u: f64 = rng.random();
    let scale = if len > 0.0 { radius * u.powf(1.0 / d as f64) / len } else { 0.0 };
    let x: Vec<f64> = center.iter().zip(&dir).map(|(c, v)| c + scale * v).collect();
    match p.simplex_block() {
        Some(block) => x.chunks(block).flat_map(project_onto_simplex).collect(),
        None => x,
    }
}

/// Largest observed ratio `|F_i(x) + ⟨∇F_i(x), y − x⟩ − F_i(y)| / |F_i(x) − F_i(y)|` over
/// `samples` random pairs in the ball of `radius` around `center` and all components `i`.
///
/// Pairs whose denominator falls below `1e-14` are skipped; the same seed reuses the same
/// directions for every radius, so radius sweeps are directly comparable.
pub fn tcc_estimate(p: &NonlinearProblem, center: &[f64], radius: f64, samples: usize, seed: u64) -> Result<f64> {
    check_len(p.d(), center.len())?;
    if samples == 0 {
        return Err(Error::InvalidParameter("samples must be at least 1".into()));
    }
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::InvalidParameter(format!("radius must be positive, got {radius}")));
    }
    let mut rng = stream(seed, Stream::Diagnostics);
    let mut eta: Option<f64> = None;
    for _ in 0..samples {
        let x = ball_point(p, center, radius, &mut rng);
        let y = ball_point(p, center, radius, &mut rng);
        let fx = p.value(&x)?;
        let fy = p.value(&y)?;
        for i in 0..p.n() {
            let den = (fx[i] - fy[i]).abs();
            if den < MIN_DENOMINATOR {
                continue;
            }
            let ratio = p.linearization_error(i, &x, &y)?.abs() / den;
            eta = Some(eta.map_or(ratio, |e| e.max(ratio)));
        }
    }
    eta.ok_or_else(|| Error::Indeterminate("every sampled pair had a vanishing denominator".into()))
}
