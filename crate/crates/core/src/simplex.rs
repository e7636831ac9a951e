//! Numerics on the probability simplex: shifted log-sum-exp, softmax,
//! membership tests and Euclidean projection.

/// Tolerance on `|sum(x) - 1|` below which a vector still counts as lying on the simplex.
pub const SUM_TOL: f64 = 1e-9;
/// Most negative entry still accepted as a (rounded) zero.
pub const NEG_TOL: f64 = -1e-12;

/// `log(sum(exp(z)))` with the maximum shifted out.
pub fn log_sum_exp(z: &[f64]) -> f64 {
    let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    let sum: f64 = z.iter().map(|&v| (v - max).exp()).sum();
    max + sum.ln()
}

/// Writes `softmax(z)` into `out`. Entries are nonnegative and sum to one up to rounding.
pub fn softmax_into(z: &[f64], out: &mut [f64]) {
    debug_assert_eq!(z.len(), out.len());
    let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for (o, &v) in out.iter_mut().zip(z) {
        *o = (v - max).exp();
        sum += *o;
    }
    for o in out.iter_mut() {
        *o /= sum;
    }
}

pub fn softmax(z: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; z.len()];
    softmax_into(z, &mut out);
    out
}

/// Whether `x` lies on the probability simplex within [`SUM_TOL`] / [`NEG_TOL`].
pub fn on_simplex(x: &[f64]) -> bool {
    let sum: f64 = x.iter().sum();
    (sum - 1.0).abs() <= SUM_TOL && x.iter().all(|&v| v >= NEG_TOL)
}

/// Euclidean projection onto the probability simplex (sort-and-threshold).
pub fn project_onto_simplex(v: &[f64]) -> Vec<f64> {
    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (k, &u) in sorted.iter().enumerate() {
        cumsum += u;
        let candidate = (cumsum - 1.0) / (k + 1) as f64;
        if u - candidate > 0.0 {
            theta = candidate;
        }
    }
    v.iter().map(|&u| (u - theta).max(0.0)).collect()
}
