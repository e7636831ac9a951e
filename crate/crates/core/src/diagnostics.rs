//! Convergence-rate bounds, Jacobian condition estimates and descent audits of run traces.

use nalgebra::SVD;

use crate::error::{check_len, Error, Result};
use crate::problems::{ball_point, NonlinearProblem};
use crate::project::StepKind;
use crate::rng::{stream, Stream};
use crate::solver::RunRecord;

/// Which step rule a rate bound is stated for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateVariant {
    Relaxed,
    Exact,
}

impl RateVariant {
    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "relaxed" => Some(RateVariant::Relaxed),
            "exact" => Some(RateVariant::Exact),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            RateVariant::Relaxed => "relaxed",
            RateVariant::Exact => "exact",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateInputs {
    /// Strong convexity modulus of the generator.
    pub sigma: f64,
    /// Smoothness constant `M` of the generator.
    pub smoothness: f64,
    /// Tangential cone constant.
    pub eta: f64,
    /// Number of equations.
    pub n: usize,
    pub kappa: f64,
    pub variant: RateVariant,
}

/// Descent constant `τ`: `σ(½ − η)` for relaxed steps, `σ(½ − ηM/σ)` for exact steps.
pub fn descent_tau(inputs: &RateInputs) -> f64 {
    match inputs.variant {
        RateVariant::Relaxed => inputs.sigma * (0.5 - inputs.eta),
        RateVariant::Exact => inputs.sigma * (0.5 - inputs.eta * inputs.smoothness / inputs.sigma),
    }
}

/// Per-iteration contraction factor `ρ = 1 − 2τ / (n(1+η)²Mκ²)` of the expected Bregman
/// distance to the solution.
pub fn rate_bound(inputs: &RateInputs) -> Result<f64> {
    let RateInputs { sigma, smoothness, eta, n, kappa, variant } = *inputs;
    for (name, v) in [("sigma", sigma), ("M", smoothness), ("kappa", kappa)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
        }
    }
    if !(eta >= 0.0 && eta.is_finite()) {
        return Err(Error::InvalidParameter(format!("eta must be nonnegative, got {eta}")));
    }
    if n == 0 {
        return Err(Error::InvalidParameter("n must be positive".into()));
    }
    match variant {
        RateVariant::Relaxed if eta >= 0.5 => {
            return Err(Error::Precondition(format!("relaxed bound needs eta < 1/2, got {eta}")));
        }
        RateVariant::Exact if eta >= sigma / (2.0 * smoothness) => {
            return Err(Error::Precondition(format!(
                "exact bound needs eta < sigma / (2M) = {}, got {eta}",
                sigma / (2.0 * smoothness)
            )));
        }
        _ => {}
    }
    let tau = descent_tau(inputs);
    let rho = 1.0 - 2.0 * tau / (n as f64 * (1.0 + eta).powi(2) * smoothness * kappa * kappa);
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::DegenerateRate(rho));
    }
    Ok(rho)
}

/// Smallest singular value below this fraction of the largest counts as rank deficient.
const RANK_TOL: f64 = 1e-12;

/// `‖J‖_F / σ_min(J)` of the Jacobian at `x`.
pub fn jacobian_condition(p: &NonlinearProblem, x: &[f64]) -> Result<f64> {
    condition_at(p, x, 0)
}

fn condition_at(p: &NonlinearProblem, x: &[f64], sample: usize) -> Result<f64> {
    if p.n() < p.d() {
        return Err(Error::RankDeficient { sample, ratio: 0.0 });
    }
    let jac = p.jacobian(x)?;
    let fro = jac.norm();
    let sv = SVD::new(jac, false, false).singular_values;
    let smax = sv.max();
    let smin = sv.min();
    if !(smax > 0.0) || smin <= RANK_TOL * smax {
        return Err(Error::RankDeficient { sample, ratio: if smax > 0.0 { smin / smax } else { 0.0 } });
    }
    Ok(fro / smin)
}

/// Largest `‖F'(x)‖_F / σ_min(F'(x))` over `samples` points of the ball of `radius` around
/// `center` (projected onto the simplex blocks for constrained problems).
pub fn kappa_estimate(p: &NonlinearProblem, center: &[f64], radius: f64, samples: usize, seed: u64) -> Result<f64> {
    check_len(p.d(), center.len())?;
    if samples == 0 {
        return Err(Error::InvalidParameter("samples must be at least 1".into()));
    }
    if !(radius >= 0.0 && radius.is_finite()) {
        return Err(Error::InvalidParameter(format!("radius must be nonnegative, got {radius}")));
    }
    let mut rng = stream(seed, Stream::Diagnostics);
    let mut kappa: f64 = 0.0;
    for s in 0..samples {
        let x = ball_point(p, center, radius, &mut rng);
        kappa = kappa.max(condition_at(p, &x, s)?);
    }
    Ok(kappa)
}

fn audit_series(record: &RunRecord) -> Result<Vec<f64>> {
    if record.trace_every != 1 {
        return Err(Error::AuditUnavailable(format!("trace recorded every {} iterations", record.trace_every)));
    }
    let mut out = Vec::with_capacity(record.rows.len());
    for (pos, row) in record.rows.iter().enumerate() {
        if row.k != pos {
            return Err(Error::AuditUnavailable(format!("trace row {pos} holds iteration {}", row.k)));
        }
        match row.bregman_dist {
            Some(d) => out.push(d),
            None => return Err(Error::AuditUnavailable(format!("no Bregman distance at iteration {pos}"))),
        }
    }
    Ok(out)
}

/// Iterations `k` at which the Bregman distance to the known solution grew by more than
/// `1e-10·(1 + D_{k−1})`. An empty list certifies monotone descent.
pub fn descent_audit(record: &RunRecord) -> Result<Vec<usize>> {
    let d = audit_series(record)?;
    Ok((1..d.len()).filter(|&k| d[k] - d[k - 1] > 1e-10 * (1.0 + d[k - 1])).collect())
}

/// Iterations violating `D_k ≤ D_{k−1} − τ F_i² / ‖∇F_i‖_*²` (up to the same slack as
/// [`descent_audit`]). Meant as an informational check with an estimated `τ`.
pub fn strong_descent_audit(record: &RunRecord, tau: f64) -> Result<Vec<usize>> {
    let d = audit_series(record)?;
    let mut out = Vec::new();
    for k in 1..d.len() {
        let row = &record.rows[k];
        let decrease = match (row.step_kind, row.f_value, row.grad_dual_norm) {
            (Some(StepKind::Skipped), _, _) => 0.0,
            (_, Some(f), Some(g)) if g > 0.0 => tau * f * f / (g * g),
            _ => return Err(Error::AuditUnavailable(format!("step data missing at iteration {k}"))),
        };
        if d[k] - (d[k - 1] - decrease) > 1e-10 * (1.0 + d[k - 1]) {
            out.push(k);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dgf::DistanceGenerator;
    use crate::problems::{gen_linear_simplex, gen_lsd, gen_quadratic, EntryDistribution, Matrix, ProblemData};
    use crate::solver::{solve, Method, SolverConfig, TerminalStatus, TraceRow};

    fn inputs(sigma: f64, m: f64, eta: f64, n: usize, kappa: f64, variant: RateVariant) -> RateInputs {
        RateInputs { sigma, smoothness: m, eta, n, kappa, variant }
    }

    #[test]
    fn rate_examples() {
        let rho = rate_bound(&inputs(1.0, 1.0, 0.0, 10, 10f64.sqrt(), RateVariant::Relaxed)).unwrap();
        assert!((rho - 0.99).abs() < 1e-15);
        let exact = rate_bound(&inputs(1.0, 1.0, 0.0, 10, 10f64.sqrt(), RateVariant::Exact)).unwrap();
        assert_eq!(rho, exact);
        let rho = rate_bound(&inputs(1.0, 1.0, 0.4, 1, 1.0, RateVariant::Relaxed)).unwrap();
        assert!((rho - (1.0 - 0.2 / 1.96)).abs() < 1e-15);
        assert!((rho - 0.897959).abs() < 1e-6);
    }

    #[test]
    fn rate_preconditions() {
        assert!(matches!(rate_bound(&inputs(1.0, 1.0, 0.5, 3, 2.0, RateVariant::Relaxed)), Err(Error::Precondition(_))));
        assert!(matches!(rate_bound(&inputs(1.0, 2.0, 0.25, 3, 2.0, RateVariant::Exact)), Err(Error::Precondition(_))));
        assert!(rate_bound(&inputs(1.0, 2.0, 0.2, 3, 2.0, RateVariant::Exact)).is_ok());
        // n = κ = 1, η = 0 gives ρ = 0
        assert!(matches!(rate_bound(&inputs(1.0, 1.0, 0.0, 1, 1.0, RateVariant::Relaxed)), Err(Error::DegenerateRate(_))));
        assert!(matches!(rate_bound(&inputs(0.0, 1.0, 0.0, 3, 2.0, RateVariant::Relaxed)), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn rate_monotonicity() {
        let base = inputs(1.0, 1.0, 0.1, 10, 3.0, RateVariant::Relaxed);
        let rho = rate_bound(&base).unwrap();
        assert!(rate_bound(&RateInputs { n: 20, ..base }).unwrap() > rho);
        assert!(rate_bound(&RateInputs { kappa: 4.0, ..base }).unwrap() > rho);
        assert!(rate_bound(&RateInputs { sigma: 1.5, ..base }).unwrap() < rho);
    }

    #[test]
    fn kappa_examples() {
        let eye = Matrix::from_rows(&[vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]]).unwrap();
        let p = NonlinearProblem::new(ProblemData::Linear { a: eye, b: vec![0.0; 3] }, None).unwrap();
        assert!((kappa_estimate(&p, &[0.3; 3], 1.0, 5, 0).unwrap() - 3f64.sqrt()).abs() < 1e-12);

        let p = gen_linear_simplex(12, 5, EntryDistribution::StdNormal, 1).unwrap();
        let ProblemData::Linear { a, .. } = p.data() else { unreachable!() };
        let m = nalgebra::DMatrix::from_row_slice(12, 5, a.as_slice());
        let direct = m.norm() / SVD::new(m, false, false).singular_values.min();
        let k1 = kappa_estimate(&p, &[0.2; 5], 0.1, 3, 0).unwrap();
        let k2 = kappa_estimate(&p, &[0.2; 5], 0.5, 3, 9).unwrap();
        assert!((k1 - direct).abs() <= 1e-10 * direct && (k2 - direct).abs() <= 1e-10 * direct);

        let q = gen_quadratic(8, 4, 2, 3).unwrap();
        assert!(kappa_estimate(&q, q.known_solution().unwrap(), 0.5, 10, 1).unwrap() >= 1.0);
    }

    #[test]
    fn rank_deficiency_is_reported() {
        let under = gen_linear_simplex(3, 5, EntryDistribution::StdNormal, 1).unwrap();
        assert!(matches!(kappa_estimate(&under, &[0.2; 5], 0.1, 2, 0), Err(Error::RankDeficient { .. })));
        let flat = NonlinearProblem::new(
            ProblemData::Linear { a: Matrix::from_rows(&[vec![1.0, 1.0], vec![2.0, 2.0]]).unwrap(), b: vec![0.0; 2] },
            None,
        )
        .unwrap();
        assert!(matches!(kappa_estimate(&flat, &[0.5; 2], 0.1, 2, 0), Err(Error::RankDeficient { sample: 0, .. })));
    }

    fn record(dists: &[f64]) -> RunRecord {
        RunRecord {
            rows: dists
                .iter()
                .enumerate()
                .map(|(k, &d)| TraceRow {
                    k,
                    index: None,
                    residual_norm: 1.0,
                    error_norm: None,
                    bregman_dist: Some(d),
                    step_kind: None,
                    stepsize: None,
                    beta: None,
                    hyperplane_gap: None,
                    f_value: None,
                    grad_dual_norm: None,
                })
                .collect(),
            status: TerminalStatus::MaxIters,
            iterations: dists.len() - 1,
            initial_residual_norm: 1.0,
            final_residual_norm: 1.0,
            trace_every: 1,
            wall_clock_secs: 0.0,
        }
    }

    #[test]
    fn audit_detector_sanity() {
        assert!(descent_audit(&record(&[2.0; 6])).unwrap().is_empty());
        assert!(descent_audit(&record(&[5.0, 4.0, 3.0, 2.0])).unwrap().is_empty());
        assert_eq!(descent_audit(&record(&[5.0, 4.0, 4.5, 2.0, 1.0])).unwrap(), vec![2]);
        let mut sparse = record(&[3.0, 2.0]);
        sparse.trace_every = 2;
        assert!(matches!(descent_audit(&sparse), Err(Error::AuditUnavailable(_))));
        let mut missing = record(&[3.0, 2.0]);
        missing.rows[1].bregman_dist = None;
        assert!(matches!(descent_audit(&missing), Err(Error::AuditUnavailable(_))));
    }

    #[test]
    fn greedy_trace_on_consistent_simplex_system_descends() {
        let p = gen_linear_simplex(40, 25, EntryDistribution::StdNormal, 2).unwrap();
        let g = DistanceGenerator::simplex_entropy(25).unwrap();
        for method in [Method::Grnbk, Method::RGrnbk] {
            let mut cfg = SolverConfig::for_method(method, 2);
            cfg.max_iters = 2000;
            let (_, rec) = solve(&p, &g, &[0.0; 25], &cfg).unwrap();
            assert!(descent_audit(&rec).unwrap().is_empty(), "{method:?}");
            // η = 0, σ = 1: τ = ½ for both rules (M plays no role in the relaxed case)
            let tau = descent_tau(&inputs(1.0, 1.0, 0.0, p.n(), 1.0, RateVariant::Relaxed));
            assert!(strong_descent_audit(&rec, tau).unwrap().is_empty(), "{method:?}");
        }
    }

    #[test]
    fn lsd_jacobian_condition_is_finite_at_solution() {
        let p = gen_lsd(3, 3, 4).unwrap();
        // n = 6 < d = 9: LSD Jacobians cannot have full column rank
        assert!(matches!(jacobian_condition(&p, p.known_solution().unwrap()), Err(Error::RankDeficient { .. })));
    }
}
