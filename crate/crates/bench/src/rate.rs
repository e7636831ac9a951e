//! Rate report: κ and η estimated around the known solution, plugged into the contraction bound.

use std::fmt::Write as _;

use nbk_core::diagnostics::{descent_tau, kappa_estimate, rate_bound, RateInputs, RateVariant};
use nbk_core::problems::tcc_estimate;
use nbk_core::{DistanceGenerator, Error, NonlinearProblem};
use serde::Serialize;

use crate::BenchError;

#[derive(Debug, Clone)]
pub struct RateOptions {
    pub variant: RateVariant,
    /// Used instead of the estimate when set.
    pub eta: Option<f64>,
    /// Overrides the generator's smoothness constant; required when the generator has none.
    pub smoothness: Option<f64>,
    pub radius: f64,
    pub samples: usize,
    pub seed: u64,
}

impl Default for RateOptions {
    fn default() -> Self {
        RateOptions { variant: RateVariant::Relaxed, eta: None, smoothness: None, radius: 0.5, samples: 200, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateReport {
    pub n: usize,
    pub d: usize,
    pub variant: &'static str,
    pub radius: f64,
    pub samples: usize,
    /// Strong convexity modulus of the generator.
    pub sigma: f64,
    pub smoothness: f64,
    /// TCC estimate; absent when η was given.
    pub eta_hat: Option<f64>,
    pub eta: f64,
    pub kappa: f64,
    pub tau: f64,
    /// Contraction factor, absent when degenerate.
    pub rho: Option<f64>,
    /// Value of the formula when it falls outside (0, 1).
    pub degenerate_rho: Option<f64>,
}

pub fn rate_report(p: &NonlinearProblem, generator: &DistanceGenerator, opts: &RateOptions) -> Result<RateReport, BenchError> {
    let center = p
        .known_solution()
        .ok_or_else(|| BenchError::Usage("rate needs a problem with a known solution".into()))?
        .to_vec();
    let smoothness = opts.smoothness.or(generator.smoothness()).ok_or_else(|| {
        BenchError::Usage("this generator has no smoothness constant; pass --smoothness".into())
    })?;
    let eta_hat = match opts.eta {
        Some(_) => None,
        None => Some(tcc_estimate(p, &center, opts.radius, opts.samples, opts.seed)?),
    };
    let eta = opts.eta.or(eta_hat).unwrap_or_default();
    let kappa = kappa_estimate(p, &center, opts.radius, opts.samples, opts.seed)?;
    let inputs = RateInputs { sigma: generator.sigma(), smoothness, eta, n: p.n(), kappa, variant: opts.variant };
    let (rho, degenerate_rho) = match rate_bound(&inputs) {
        Ok(rho) => (Some(rho), None),
        Err(Error::DegenerateRate(rho)) => (None, Some(rho)),
        Err(e) => return Err(e.into()),
    };
    Ok(RateReport {
        n: p.n(),
        d: p.d(),
        variant: opts.variant.as_str(),
        radius: opts.radius,
        samples: opts.samples,
        sigma: inputs.sigma,
        smoothness,
        eta_hat,
        eta,
        kappa,
        tau: descent_tau(&inputs),
        rho,
        degenerate_rho,
    })
}

impl RateReport {
    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "n          {}", self.n);
        let _ = writeln!(s, "d          {}", self.d);
        let _ = writeln!(s, "variant    {}", self.variant);
        let _ = writeln!(s, "sigma      {:.6e}", self.sigma);
        let _ = writeln!(s, "M          {:.6e}", self.smoothness);
        match self.eta_hat {
            Some(e) => {
                let _ = writeln!(s, "eta        {:.6e} (estimated, radius {}, {} samples)", e, self.radius, self.samples);
            }
            None => {
                let _ = writeln!(s, "eta        {:.6e} (given)", self.eta);
            }
        }
        let _ = writeln!(s, "kappa      {:.6e}", self.kappa);
        let _ = writeln!(s, "tau        {:.6e}", self.tau);
        match (self.rho, self.degenerate_rho) {
            (Some(rho), _) => {
                let _ = writeln!(s, "rho        {rho:.16e}");
            }
            (None, Some(rho)) => {
                let _ = writeln!(s, "rho        DEGENERATE ({rho:.6e} is outside (0, 1))");
            }
            (None, None) => {}
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nbk_core::problems::{gen_linear_gaussian, gen_quadratic};

    #[test]
    fn linear_problem_reports_zero_eta() {
        let p = gen_linear_gaussian(30, 8, 1).unwrap();
        let g = DistanceGenerator::quadratic();
        let r = rate_report(&p, &g, &RateOptions::default()).unwrap();
        assert!(r.eta_hat.unwrap() <= 1e-12);
        let expect = rate_bound(&RateInputs {
            sigma: 1.0,
            smoothness: 1.0,
            eta: r.eta,
            n: 30,
            kappa: r.kappa,
            variant: RateVariant::Relaxed,
        })
        .unwrap();
        assert_eq!(r.rho, Some(expect));
        assert!(r.render().contains(&format!("{expect:.16e}")));
    }

    #[test]
    fn smoothness_is_required_without_a_generator_constant() {
        let p = gen_quadratic(12, 4, 2, 0).unwrap();
        let g = DistanceGenerator::l1_quadratic(1.0).unwrap();
        assert!(matches!(rate_report(&p, &g, &RateOptions::default()), Err(BenchError::Usage(_))));
    }

    #[test]
    fn given_eta_is_used() {
        let p = gen_linear_gaussian(30, 8, 2).unwrap();
        let g = DistanceGenerator::quadratic();
        let r = rate_report(&p, &g, &RateOptions { eta: Some(0.1), ..Default::default() }).unwrap();
        assert_eq!((r.eta_hat, r.eta), (None, 0.1));
        assert!((r.tau - 0.4).abs() < 1e-15);
    }
}
