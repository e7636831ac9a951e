//! Bregman projections onto hyperplanes `H(α, β) = {x : ⟨α, x⟩ = β}`.
//!
//! The projection of a state `(x, x*)` is `x₊ = ∇φ*(x* − tα)` where `t` minimizes the
//! one-dimensional dual objective `ψ(t) = φ*(x* − tα) + βt`. Its derivative
//! `ψ'(t) = β − ⟨α, ∇φ*(x* − tα)⟩` is continuous and nondecreasing, so every
//! exact solver here is a root finder for `ψ'`:
//!
//! * quadratic geometry: closed form,
//! * `λ‖·‖₁ + ½‖·‖₂²`: `ψ'` is piecewise linear; sort its breakpoints and solve the
//!   linear piece containing the sign change,
//! * entropy and block geometries: Newton's method on `ψ'` safeguarded by bisection
//!   on a doubling bracket.
//!
//! When the hyperplane misses the relative interior of the domain, or the dual solve
//! fails, [`project`] falls back to the relaxed stepsize `t = σF / ‖α‖_*²`.

use crate::dgf::{dot, soft_threshold, DistanceGenerator, Geometry, PrimalDualState};
use crate::error::{check_len, Error, Result};

/// Hyperplane `{x : ⟨normal, x⟩ = offset}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Hyperplane {
    pub normal: Vec<f64>,
    pub offset: f64,
}

impl Hyperplane {
    /// Rejects identically zero normals.
    pub fn new(normal: Vec<f64>, offset: f64) -> Result<Self> {
        if normal.iter().all(|&a| a == 0.0) {
            return Err(Error::ZeroNormal);
        }
        Ok(Hyperplane { normal, offset })
    }

    /// `⟨normal, x⟩ − offset`.
    pub fn gap(&self, x: &[f64]) -> f64 {
        dot(&self.normal, x) - self.offset
    }

    fn max_abs_normal(&self) -> f64 {
        self.normal.iter().fold(0.0, |m, a| m.max(a.abs()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StepKind {
    Exact,
    Relaxed,
    Skipped,
}

impl StepKind {
    pub fn as_str(self) -> &'static str {
        match self {
            StepKind::Exact => "Exact",
            StepKind::Relaxed => "Relaxed",
            StepKind::Skipped => "Skipped",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub t: f64,
    pub kind: StepKind,
    pub next: PrimalDualState,
}

/// Search interval `[lo, hi]` with `ψ'(lo) ≤ 0 ≤ ψ'(hi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracket {
    pub lo: f64,
    pub hi: f64,
}

/// Iteration cap of the safeguarded Newton solve.
pub const MAX_NEWTON_ITERS: usize = 200;

/// Tolerance on `|ψ'(t)|` targeted by the Newton solve.
pub fn dual_gradient_tol(beta: f64) -> f64 {
    1e-12 * (1.0 + beta.abs())
}

/// Tolerance on `|⟨α, x₊⟩ − β|` an exact step must meet.
pub fn exact_landing_tol(beta: f64) -> f64 {
    1e-8 * (1.0 + beta.abs())
}

/// `(ψ'(t), ψ''(t))` for the dual objective of `state` and `h`.
pub fn dual_derivatives(
    generator: &DistanceGenerator,
    state: &PrimalDualState,
    h: &Hyperplane,
    t: f64,
) -> (f64, f64) {
    let z: Vec<f64> = state.x_star.iter().zip(&h.normal).map(|(z, a)| z - t * a).collect();
    let mut scratch = vec![0.0; z.len()];
    let (first, second) = generator.directional(&z, &h.normal, &mut scratch);
    (h.offset - first, second)
}

/// Doubling expansion from `t = 0` until `ψ'` changes sign.
///
/// Fails with [`Error::NoRoot`] once `|t|` exceeds `1e8·(1 + ‖x*‖∞) / max|α|`.
pub fn dual_bracket(generator: &DistanceGenerator, state: &PrimalDualState, h: &Hyperplane) -> Result<Bracket> {
    check_len(state.dim(), h.normal.len())?;
    let amax = h.max_abs_normal();
    if amax == 0.0 {
        return Err(Error::ZeroNormal);
    }
    let zmax = state.x_star.iter().fold(0.0, |m: f64, z| m.max(z.abs()));
    let limit = 1e8 * (1.0 + zmax) / amax;
    let step = 1.0 / amax;
    let slope = |t: f64| dual_derivatives(generator, state, h, t).0;

    let g0 = slope(0.0);
    if g0 == 0.0 {
        return Ok(Bracket { lo: -step, hi: step });
    }
    // ψ' is nondecreasing: a negative slope puts the root to the right of 0.
    let dir = if g0 < 0.0 { 1.0 } else { -1.0 };
    let mut inner = 0.0;
    let mut reach = step;
    loop {
        let t = dir * reach;
        let g = slope(t);
        if g * dir >= 0.0 {
            let (lo, hi) = if dir > 0.0 { (inner, t) } else { (t, inner) };
            return Ok(Bracket { lo, hi });
        }
        inner = t;
        reach *= 2.0;
        if reach > limit {
            return Err(Error::NoRoot(format!(
                "no sign change of the dual gradient within |t| <= {limit:e}"
            )));
        }
    }
}

/// Closed-form dual step for `φ = ½‖·‖₂²`: `t = (⟨α, x*⟩ − β) / ‖α‖₂²`.
pub fn exact_step_quadratic(state: &PrimalDualState, h: &Hyperplane) -> Result<f64> {
    check_len(state.dim(), h.normal.len())?;
    let nn = dot(&h.normal, &h.normal);
    if nn == 0.0 {
        return Err(Error::ZeroNormal);
    }
    Ok((dot(&h.normal, &state.x_star) - h.offset) / nn)
}

/// Exact dual step for `φ = λ‖·‖₁ + ½‖·‖₂²` by breakpoint sorting.
///
/// `g(t) = β − Σ α_j S_λ(x*_j − tα_j)` is continuous, nondecreasing and linear between the
/// breakpoints `(x*_j ± λ)/α_j`. Among all roots the one of smallest `|t|` is returned.
/// Both tails of `g` have slope `‖α‖₂² > 0`, so a root always exists for a nonzero normal.
pub fn exact_step_l1quad(state: &PrimalDualState, h: &Hyperplane, lambda: f64) -> Result<f64> {
    check_len(state.dim(), h.normal.len())?;
    let z = &state.x_star;
    let alpha = &h.normal;
    let beta = h.offset;

    let mut breaks: Vec<f64> = Vec::with_capacity(2 * z.len());
    for (&zj, &aj) in z.iter().zip(alpha) {
        if aj != 0.0 {
            breaks.push((zj - lambda) / aj);
            breaks.push((zj + lambda) / aj);
        }
    }
    if breaks.is_empty() {
        return Err(Error::ZeroNormal);
    }
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();

    let g = |t: f64| -> f64 {
        beta - z
            .iter()
            .zip(alpha)
            .map(|(&zj, &aj)| aj * soft_threshold(zj - t * aj, lambda))
            .sum::<f64>()
    };
    // Root of the linear piece of g on (lo, hi), clamped to the piece.
    let solve_piece = |lo: f64, hi: f64| -> Result<f64> {
        let probe = match (lo.is_finite(), hi.is_finite()) {
            (true, true) => 0.5 * (lo + hi),
            (false, true) => hi - 1.0,
            (true, false) => lo + 1.0,
            (false, false) => unreachable!("breakpoint list is nonempty"),
        };
        let mut offset = 0.0;
        let mut slope = 0.0;
        for (&zj, &aj) in z.iter().zip(alpha) {
            if aj == 0.0 {
                continue;
            }
            let w = zj - probe * aj;
            if w > lambda {
                offset += aj * (zj - lambda);
                slope += aj * aj;
            } else if w < -lambda {
                offset += aj * (zj + lambda);
                slope += aj * aj;
            }
        }
        if slope == 0.0 {
            return Err(Error::NoRoot("flat piece without sign change".into()));
        }
        Ok(((offset - beta) / slope).clamp(lo, hi))
    };
    let piece = |k: usize| -> (f64, f64) {
        if k == 0 {
            (f64::NEG_INFINITY, breaks[0])
        } else if k == breaks.len() {
            (breaks[k - 1], f64::INFINITY)
        } else {
            (breaks[k - 1], breaks[k])
        }
    };

    let first_nonneg = breaks.partition_point(|&b| g(b) < 0.0);
    let (lo, hi) = piece(first_nonneg);
    let left_root = solve_piece(lo, hi)?;
    let first_pos = breaks.partition_point(|&b| g(b) <= 0.0);
    let (lo, hi) = piece(first_pos);
    let right_root = solve_piece(lo, hi)?.max(left_root);

    Ok(if left_root <= 0.0 && 0.0 <= right_root {
        0.0
    } else if left_root > 0.0 {
        left_root
    } else {
        right_root
    })
}

/// Exact dual step for entropy and block geometries by safeguarded Newton iteration.
///
/// Newton steps that leave the current bracket, or meet `ψ'' < 1e-300`, are replaced by
/// bisection. Stops once `|ψ'(t)| ≤ 1e-12·(1 + |β|)`; if rounding prevents that within
/// [`MAX_NEWTON_ITERS`] iterations, the best iterate is returned provided it lands on the
/// hyperplane within [`exact_landing_tol`], and [`Error::NoRoot`] otherwise.
pub fn exact_step_entropy(generator: &DistanceGenerator, state: &PrimalDualState, h: &Hyperplane) -> Result<f64> {
    let Bracket { mut lo, mut hi } = dual_bracket(generator, state, h)?;
    let tol = dual_gradient_tol(h.offset);
    let mut t = if lo <= 0.0 && 0.0 <= hi { 0.0 } else { 0.5 * (lo + hi) };
    let mut best = (t, f64::INFINITY);
    for _ in 0..MAX_NEWTON_ITERS {
        let (g, curv) = dual_derivatives(generator, state, h, t);
        if g.abs() < best.1 {
            best = (t, g.abs());
        }
        if g.abs() <= tol {
            // one polishing Newton step; kept only if it improves the residual
            let polished = t - g / curv;
            if curv >= 1e-300 && polished > lo && polished < hi {
                let (g2, _) = dual_derivatives(generator, state, h, polished);
                if g2.abs() < g.abs() {
                    return Ok(polished);
                }
            }
            return Ok(t);
        }
        if g < 0.0 {
            lo = t;
        } else {
            hi = t;
        }
        if hi - lo <= 4.0 * f64::EPSILON * lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE) {
            break;
        }
        let newton = t - g / curv;
        t = if curv >= 1e-300 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
    }
    if best.1 <= exact_landing_tol(h.offset) {
        Ok(best.0)
    } else {
        Err(Error::NoRoot(format!("dual gradient stalled at {:e}", best.1)))
    }
}

/// Exact dual step for any geometry.
pub fn exact_step(generator: &DistanceGenerator, state: &PrimalDualState, h: &Hyperplane) -> Result<f64> {
    match generator.geometry() {
        Geometry::Quadratic => exact_step_quadratic(state, h),
        Geometry::L1Quadratic { lambda } => exact_step_l1quad(state, h, *lambda),
        Geometry::SimplexEntropy { .. } | Geometry::SeparableBlocks(_) => exact_step_entropy(generator, state, h),
    }
}

/// Relaxed stepsize `σ·F / ‖∇F‖_*²`.
pub fn relaxed_step(f_val: f64, grad: &[f64], sigma: f64, generator: &DistanceGenerator) -> Result<f64> {
    if !(sigma > 0.0) {
        return Err(Error::Contract(format!("sigma must be positive, got {sigma}")));
    }
    let norm = generator.dual_norm(grad)?;
    if norm == 0.0 {
        return Err(Error::ZeroGradient);
    }
    Ok(sigma * f_val / (norm * norm))
}

/// Closure of the range of `⟨α, x⟩` over the relative interior of the domain.
fn pairing_range(generator: &DistanceGenerator, alpha: &[f64]) -> (f64, f64) {
    match generator.geometry() {
        Geometry::Quadratic | Geometry::L1Quadratic { .. } => {
            if alpha.iter().all(|&a| a == 0.0) {
                (0.0, 0.0)
            } else {
                (f64::NEG_INFINITY, f64::INFINITY)
            }
        }
        Geometry::SimplexEntropy { .. } => alpha
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &a| (lo.min(a), hi.max(a))),
        Geometry::SeparableBlocks(_) => generator
            .block_ranges(alpha.len())
            .into_iter()
            .fold((0.0, 0.0), |(lo, hi), (r, g)| {
                let (blo, bhi) = pairing_range(g, &alpha[r]);
                (lo + blo, hi + bhi)
            }),
    }
}

/// Whether `H(α, β)` meets the relative interior of `dom φ`.
///
/// Full-domain geometries always qualify. On simplices this is `min α < β < max α`
/// (sums of block minima and maxima for block geometries), or a constant pairing
/// equal to `β`.
pub fn feasibility_check(generator: &DistanceGenerator, h: &Hyperplane) -> bool {
    if generator.dim().is_some_and(|d| d != h.normal.len()) {
        return false;
    }
    let (lo, hi) = pairing_range(generator, &h.normal);
    let beta = h.offset;
    if lo < beta && beta < hi {
        return true;
    }
    let tol = dual_gradient_tol(beta);
    hi - lo <= tol && (beta - lo).abs() <= tol
}

fn step_dual(generator: &DistanceGenerator, state: &PrimalDualState, alpha: &[f64], t: f64) -> Result<PrimalDualState> {
    let x_star: Vec<f64> = state.x_star.iter().zip(alpha).map(|(z, a)| z - t * a).collect();
    PrimalDualState::from_dual(generator, x_star)
}

/// Relaxed update `x₊* = x* − tα` with `t = σF / ‖α‖_*²`.
pub fn relaxed_update(
    generator: &DistanceGenerator,
    state: &PrimalDualState,
    grad: &[f64],
    f_val: f64,
    sigma: f64,
) -> Result<StepOutcome> {
    check_len(state.dim(), grad.len())?;
    let t = relaxed_step(f_val, grad, sigma, generator)?;
    Ok(StepOutcome { t, kind: StepKind::Relaxed, next: step_dual(generator, state, grad, t)? })
}

/// One step of the exact-with-fallback rule: Bregman projection onto `h` when `h` meets
/// the domain and the dual solve succeeds, the relaxed step otherwise.
pub fn project(
    generator: &DistanceGenerator,
    state: &PrimalDualState,
    h: &Hyperplane,
    f_val: f64,
    sigma: f64,
) -> Result<StepOutcome> {
    check_len(state.dim(), h.normal.len())?;
    if h.normal.iter().all(|&a| a == 0.0) {
        return Err(Error::ZeroNormal);
    }
    if feasibility_check(generator, h) {
        match exact_step(generator, state, h) {
            Ok(t) => {
                let next = step_dual(generator, state, &h.normal, t)?;
                return Ok(StepOutcome { t, kind: StepKind::Exact, next });
            }
            Err(Error::NoRoot(_)) => {}
            Err(e) => return Err(e),
        }
    }
    relaxed_update(generator, state, &h.normal, f_val, sigma)
}
