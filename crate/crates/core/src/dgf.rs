//! Distance-generating functions, their conjugates, mirror maps and Bregman distances.
//!
//! Four geometries are supported:
//!
//! | geometry | `φ(x)` | mirror `∇φ*(x*)` | strong convexity |
//! |---|---|---|---|
//! | [`Geometry::Quadratic`] | `½‖x‖₂²` | `x*` | σ = 1 in ℓ2, 1-smooth |
//! | [`Geometry::L1Quadratic`] | `λ‖x‖₁ + ½‖x‖₂²` | soft-threshold `S_λ(x*)` | σ = 1 in ℓ2 |
//! | [`Geometry::SimplexEntropy`] | `Σ xᵢ log xᵢ` on the simplex, `+∞` off it | softmax | σ = 1 in ℓ1 |
//! | [`Geometry::SeparableBlocks`] | sum of block functions | block-wise mirrors | see [`DistanceGenerator::separable`] |
//!
//! The dual point `x*` is always the source of truth: primal points are produced
//! by the mirror map and never inverted back.

use std::fmt;
use std::ops::Range;

use crate::error::{check_len, Error, Result};
use crate::simplex::{log_sum_exp, on_simplex, softmax_into};

/// Value in `ℝ ∪ {+∞}`. Ordered so that every finite value is below `PosInfinity`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub enum ExtendedReal {
    Finite(f64),
    PosInfinity,
}

impl ExtendedReal {
    pub fn is_finite(self) -> bool {
        matches!(self, ExtendedReal::Finite(_))
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            ExtendedReal::Finite(v) => Some(v),
            ExtendedReal::PosInfinity => None,
        }
    }
}

impl std::ops::Add for ExtendedReal {
    type Output = ExtendedReal;

    fn add(self, rhs: ExtendedReal) -> ExtendedReal {
        match (self, rhs) {
            (ExtendedReal::Finite(a), ExtendedReal::Finite(b)) => ExtendedReal::Finite(a + b),
            _ => ExtendedReal::PosInfinity,
        }
    }
}

impl fmt::Display for ExtendedReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtendedReal::Finite(v) => write!(f, "{v}"),
            ExtendedReal::PosInfinity => f.write_str("+inf"),
        }
    }
}

/// Norm in which the generator is strongly convex.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrimalNorm {
    L1,
    L2,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Geometry {
    Quadratic,
    L1Quadratic { lambda: f64 },
    SimplexEntropy { dim: usize },
    SeparableBlocks(Vec<Block>),
}

/// One block of a separable generator, acting on `dim` consecutive coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    pub generator: DistanceGenerator,
    pub dim: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DistanceGenerator {
    geometry: Geometry,
    sigma: f64,
    smoothness: Option<f64>,
    primal_norm: PrimalNorm,
}

/// Soft-threshold `sign(z)·max(|z| − λ, 0)`.
#[inline]
pub fn soft_threshold(z: f64, lambda: f64) -> f64 {
    if z > lambda {
        z - lambda
    } else if z < -lambda {
        z + lambda
    } else {
        0.0
    }
}

impl DistanceGenerator {
    pub fn quadratic() -> Self {
        DistanceGenerator {
            geometry: Geometry::Quadratic,
            sigma: 1.0,
            smoothness: Some(1.0),
            primal_norm: PrimalNorm::L2,
        }
    }

    pub fn l1_quadratic(lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidParameter(format!("lambda must be positive, got {lambda}")));
        }
        Ok(DistanceGenerator {
            geometry: Geometry::L1Quadratic { lambda },
            sigma: 1.0,
            smoothness: None,
            primal_norm: PrimalNorm::L2,
        })
    }

    pub fn simplex_entropy(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("simplex dimension must be positive".into()));
        }
        Ok(DistanceGenerator {
            geometry: Geometry::SimplexEntropy { dim },
            sigma: 1.0,
            smoothness: None,
            primal_norm: PrimalNorm::L1,
        })
    }

    /// Block-separable generator `φ(x) = Σ_b φ_b(x_b)`.
    ///
    /// All blocks must share one primal norm. For ℓ2 blocks the combined norm is the
    /// Euclidean norm and `σ = min σ_b`. For ℓ1 blocks the combined norm is the sum of
    /// block ℓ1 norms (dual: largest block ℓ∞ norm), for which only `σ = min σ_b / #blocks`
    /// is guaranteed.
    pub fn separable(blocks: Vec<(DistanceGenerator, usize)>) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::InvalidParameter("separable generator needs at least one block".into()));
        }
        let primal_norm = blocks[0].0.primal_norm;
        let mut out = Vec::with_capacity(blocks.len());
        for (generator, dim) in blocks {
            if dim == 0 {
                return Err(Error::InvalidParameter("block dimension must be positive".into()));
            }
            match &generator.geometry {
                Geometry::SeparableBlocks(_) => {
                    return Err(Error::InvalidParameter("nested separable generators are not supported".into()))
                }
                Geometry::SimplexEntropy { dim: own } if *own != dim => {
                    return Err(Error::DimensionMismatch { expected: *own, got: dim })
                }
                _ => {}
            }
            if generator.primal_norm != primal_norm {
                return Err(Error::InvalidParameter("blocks must share one primal norm".into()));
            }
            out.push(Block { generator, dim });
        }
        let min_sigma = out.iter().map(|b| b.generator.sigma).fold(f64::INFINITY, f64::min);
        let sigma = match primal_norm {
            PrimalNorm::L2 => min_sigma,
            PrimalNorm::L1 => min_sigma / out.len() as f64,
        };
        let smoothness = out
            .iter()
            .map(|b| b.generator.smoothness)
            .try_fold(0.0f64, |acc, m| m.map(|m| acc.max(m)));
        Ok(DistanceGenerator {
            geometry: Geometry::SeparableBlocks(out),
            sigma,
            smoothness,
            primal_norm,
        })
    }

    /// `count` copies of the entropy on `Δ^{dim−1}`: the geometry of left stochastic matrices.
    pub fn entropy_blocks(dim: usize, count: usize) -> Result<Self> {
        let block = DistanceGenerator::simplex_entropy(dim)?;
        DistanceGenerator::separable(vec![(block, dim); count])
    }

    pub fn geometry(&self) -> &Geometry {
        &self.geometry
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn smoothness(&self) -> Option<f64> {
        self.smoothness
    }

    pub fn primal_norm(&self) -> PrimalNorm {
        self.primal_norm
    }

    /// Fixed ambient dimension, or `None` for generators defined on every `ℝ^d`.
    pub fn dim(&self) -> Option<usize> {
        match &self.geometry {
            Geometry::Quadratic | Geometry::L1Quadratic { .. } => None,
            Geometry::SimplexEntropy { dim } => Some(*dim),
            Geometry::SeparableBlocks(blocks) => Some(blocks.iter().map(|b| b.dim).sum()),
        }
    }

    /// Whether `dom φ = ℝ^d` (no implicit constraint).
    pub fn has_full_domain(&self) -> bool {
        match &self.geometry {
            Geometry::Quadratic | Geometry::L1Quadratic { .. } => true,
            Geometry::SimplexEntropy { .. } => false,
            Geometry::SeparableBlocks(blocks) => blocks.iter().all(|b| b.generator.has_full_domain()),
        }
    }

    /// Whether every block is an entropy on a simplex.
    pub fn is_entropic(&self) -> bool {
        match &self.geometry {
            Geometry::SimplexEntropy { .. } => true,
            Geometry::SeparableBlocks(blocks) => blocks.iter().all(|b| b.generator.is_entropic()),
            _ => false,
        }
    }

    fn check_dim(&self, len: usize) -> Result<()> {
        match self.dim() {
            Some(d) => check_len(d, len),
            None => Ok(()),
        }
    }

    /// Coordinate ranges and generators of the blocks; a single block for non-separable geometries.
    pub fn block_ranges(&self, len: usize) -> Vec<(Range<usize>, &DistanceGenerator)> {
        match &self.geometry {
            Geometry::SeparableBlocks(blocks) => {
                let mut start = 0;
                blocks
                    .iter()
                    .map(|b| {
                        let r = start..start + b.dim;
                        start += b.dim;
                        (r, &b.generator)
                    })
                    .collect()
            }
            _ => vec![(0..len, self)],
        }
    }

    /// `φ(x)`, with `+∞` outside the domain.
    pub fn value(&self, x: &[f64]) -> Result<ExtendedReal> {
        self.check_dim(x.len())?;
        Ok(self.value_unchecked(x))
    }

    fn value_unchecked(&self, x: &[f64]) -> ExtendedReal {
        match &self.geometry {
            Geometry::Quadratic => ExtendedReal::Finite(0.5 * dot(x, x)),
            Geometry::L1Quadratic { lambda } => {
                let l1: f64 = x.iter().map(|v| v.abs()).sum();
                ExtendedReal::Finite(lambda * l1 + 0.5 * dot(x, x))
            }
            Geometry::SimplexEntropy { .. } => {
                if !on_simplex(x) {
                    return ExtendedReal::PosInfinity;
                }
                ExtendedReal::Finite(x.iter().map(|&v| xlogx(v)).sum())
            }
            Geometry::SeparableBlocks(_) => self
                .block_ranges(x.len())
                .into_iter()
                .fold(ExtendedReal::Finite(0.0), |acc, (r, g)| acc + g.value_unchecked(&x[r])),
        }
    }

    /// Convex conjugate `φ*(x*)`; finite everywhere.
    pub fn conjugate(&self, x_star: &[f64]) -> Result<f64> {
        self.check_dim(x_star.len())?;
        Ok(self.conjugate_unchecked(x_star))
    }

    fn conjugate_unchecked(&self, z: &[f64]) -> f64 {
        match &self.geometry {
            Geometry::Quadratic => 0.5 * dot(z, z),
            Geometry::L1Quadratic { lambda } => z
                .iter()
                .map(|&v| {
                    let s = soft_threshold(v, *lambda);
                    0.5 * s * s
                })
                .sum(),
            Geometry::SimplexEntropy { .. } => log_sum_exp(z),
            Geometry::SeparableBlocks(_) => self
                .block_ranges(z.len())
                .into_iter()
                .map(|(r, g)| g.conjugate_unchecked(&z[r]))
                .sum(),
        }
    }

    /// Mirror map `∇φ*(x*)`.
    pub fn mirror(&self, x_star: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; x_star.len()];
        self.mirror_into(x_star, &mut out)?;
        Ok(out)
    }

    pub fn mirror_into(&self, x_star: &[f64], out: &mut [f64]) -> Result<()> {
        self.check_dim(x_star.len())?;
        check_len(x_star.len(), out.len())?;
        self.mirror_unchecked(x_star, out);
        Ok(())
    }

    fn mirror_unchecked(&self, z: &[f64], out: &mut [f64]) {
        match &self.geometry {
            Geometry::Quadratic => out.copy_from_slice(z),
            Geometry::L1Quadratic { lambda } => {
                for (o, &v) in out.iter_mut().zip(z) {
                    *o = soft_threshold(v, *lambda);
                }
            }
            Geometry::SimplexEntropy { .. } => softmax_into(z, out),
            Geometry::SeparableBlocks(_) => {
                for (r, g) in self.block_ranges(z.len()) {
                    g.mirror_unchecked(&z[r.clone()], &mut out[r]);
                }
            }
        }
    }

    /// Bregman distance `D_φ^{x*}(x, y) = φ*(x*) − ⟨x*, y⟩ + φ(y)` from a primal-dual state to `y`.
    ///
    /// Each geometry evaluates the conjugate form in a rearranged, cancellation-free way;
    /// the result is `+∞` when `y ∉ dom φ`.
    pub fn bregman_distance(&self, from: &PrimalDualState, to: &[f64]) -> Result<ExtendedReal> {
        self.check_dim(to.len())?;
        check_len(from.x_star.len(), to.len())?;
        Ok(self.bregman_unchecked(&from.x_star, to))
    }

    pub(crate) fn bregman_unchecked(&self, z: &[f64], y: &[f64]) -> ExtendedReal {
        match &self.geometry {
            Geometry::Quadratic => {
                ExtendedReal::Finite(0.5 * z.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>())
            }
            Geometry::L1Quadratic { lambda } => {
                // ½S² − zy + λ|y| + ½y² = ½(y − S)² + (λ|y| − (z − S)y), both terms ≥ 0.
                let d = z
                    .iter()
                    .zip(y)
                    .map(|(&zj, &yj)| {
                        let s = soft_threshold(zj, *lambda);
                        0.5 * (yj - s) * (yj - s) + (lambda * yj.abs() - (zj - s) * yj)
                    })
                    .sum();
                ExtendedReal::Finite(d)
            }
            Geometry::SimplexEntropy { .. } => {
                if !on_simplex(y) {
                    return ExtendedReal::PosInfinity;
                }
                let lse = log_sum_exp(z);
                let mut d = 0.0;
                let mut mass = 0.0;
                for (&zi, &yi) in z.iter().zip(y) {
                    d += yi * (lse - zi) + xlogx(yi);
                    mass += yi;
                }
                ExtendedReal::Finite(d + lse * (1.0 - mass))
            }
            Geometry::SeparableBlocks(_) => self
                .block_ranges(z.len())
                .into_iter()
                .fold(ExtendedReal::Finite(0.0), |acc, (r, g)| {
                    acc + g.bregman_unchecked(&z[r.clone()], &y[r])
                }),
        }
    }

    /// Dual norm paired with the primal norm: ℓ2 for ℓ2, ℓ∞ for (block) ℓ1.
    pub fn dual_norm(&self, v: &[f64]) -> Result<f64> {
        self.check_dim(v.len())?;
        Ok(match self.primal_norm {
            PrimalNorm::L2 => dot(v, v).sqrt(),
            PrimalNorm::L1 => v.iter().fold(0.0, |m, x| m.max(x.abs())),
        })
    }

    /// Primal norm of `v` (sum of block norms for separable ℓ1 geometries).
    pub fn primal_norm_of(&self, v: &[f64]) -> f64 {
        match self.primal_norm {
            PrimalNorm::L2 => dot(v, v).sqrt(),
            PrimalNorm::L1 => v.iter().map(|x| x.abs()).sum(),
        }
    }

    /// First and second derivative data of `t ↦ φ*(z − tα)` at `t = 0`, up to sign:
    /// returns `(⟨α, ∇φ*(z)⟩, ⟨α, ∇²φ*(z) α⟩)`. `scratch` must have the length of `z`.
    pub(crate) fn directional(&self, z: &[f64], alpha: &[f64], scratch: &mut [f64]) -> (f64, f64) {
        match &self.geometry {
            Geometry::Quadratic => (dot(alpha, z), dot(alpha, alpha)),
            Geometry::L1Quadratic { lambda } => {
                let mut first = 0.0;
                let mut second = 0.0;
                for (&zj, &aj) in z.iter().zip(alpha) {
                    let s = soft_threshold(zj, *lambda);
                    first += aj * s;
                    if s != 0.0 {
                        second += aj * aj;
                    }
                }
                (first, second)
            }
            Geometry::SimplexEntropy { .. } => {
                softmax_into(z, scratch);
                let mean = dot(alpha, scratch);
                let var = scratch
                    .iter()
                    .zip(alpha)
                    .map(|(&p, &a)| p * (a - mean) * (a - mean))
                    .sum();
                (mean, var)
            }
            Geometry::SeparableBlocks(_) => {
                let mut first = 0.0;
                let mut second = 0.0;
                for (r, g) in self.block_ranges(z.len()) {
                    if alpha[r.clone()].iter().all(|&a| a == 0.0) {
                        continue;
                    }
                    let (f, s) = g.directional(&z[r.clone()], &alpha[r.clone()], &mut scratch[r]);
                    first += f;
                    second += s;
                }
                (first, second)
            }
        }
    }
}

/// Paired primal and dual iterate with `x = ∇φ*(x*)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PrimalDualState {
    pub(crate) x: Vec<f64>,
    pub(crate) x_star: Vec<f64>,
}

/// Componentwise tolerance of the `x = ∇φ*(x*)` coherence check.
pub const COHERENCE_TOL: f64 = 1e-12;

impl PrimalDualState {
    /// Builds the state from a dual point; the primal point is its mirror image.
    pub fn from_dual(generator: &DistanceGenerator, x_star: Vec<f64>) -> Result<Self> {
        let x = generator.mirror(&x_star)?;
        Ok(PrimalDualState { x, x_star })
    }

    /// Builds the state from both points, rejecting pairs that violate `x = ∇φ*(x*)`.
    pub fn new(generator: &DistanceGenerator, x: Vec<f64>, x_star: Vec<f64>) -> Result<Self> {
        let mirrored = generator.mirror(&x_star)?;
        check_len(mirrored.len(), x.len())?;
        if let Some(j) = (0..x.len()).find(|&j| (x[j] - mirrored[j]).abs() > COHERENCE_TOL) {
            return Err(Error::Contract(format!(
                "primal point is not the mirror of the dual point at coordinate {j}"
            )));
        }
        Ok(PrimalDualState { x, x_star })
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn x_star(&self) -> &[f64] {
        &self.x_star
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    pub fn into_parts(self) -> (Vec<f64>, Vec<f64>) {
        (self.x, self.x_star)
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
fn xlogx(v: f64) -> f64 {
    if v > 0.0 {
        v * v.ln()
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn all_geometries() -> Vec<DistanceGenerator> {
        vec![
            DistanceGenerator::quadratic(),
            DistanceGenerator::l1_quadratic(0.7).unwrap(),
            DistanceGenerator::simplex_entropy(5).unwrap(),
            DistanceGenerator::entropy_blocks(3, 2).unwrap(),
            DistanceGenerator::separable(vec![
                (DistanceGenerator::quadratic(), 2),
                (DistanceGenerator::l1_quadratic(0.5).unwrap(), 3),
            ])
            .unwrap(),
        ]
    }

    fn random_dual(rng: &mut ChaCha8Rng, d: usize, scale: f64) -> Vec<f64> {
        (0..d).map(|_| scale * rng.sample::<f64, _>(StandardNormal)).collect()
    }

    #[test]
    fn value_examples() {
        let q = DistanceGenerator::quadratic();
        assert_eq!(q.value(&[3.0, 4.0]).unwrap(), ExtendedReal::Finite(12.5));
        let e = DistanceGenerator::simplex_entropy(2).unwrap();
        assert_abs_diff_eq!(e.value(&[0.5, 0.5]).unwrap().finite().unwrap(), -(2f64.ln()), epsilon = 1e-15);
        assert_eq!(e.value(&[0.3, 0.8]).unwrap(), ExtendedReal::PosInfinity);
        assert_eq!(e.value(&[1.0, 0.0]).unwrap(), ExtendedReal::Finite(0.0));
        assert!(matches!(e.value(&[1.0]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn conjugate_examples() {
        assert_eq!(DistanceGenerator::quadratic().conjugate(&[3.0, 4.0]).unwrap(), 12.5);
        let l1 = DistanceGenerator::l1_quadratic(1.0).unwrap();
        assert_eq!(l1.conjugate(&[2.0]).unwrap(), 0.5);
        let e = DistanceGenerator::simplex_entropy(2).unwrap();
        assert_abs_diff_eq!(e.conjugate(&[0.0, 0.0]).unwrap(), 2f64.ln(), epsilon = 1e-15);
    }

    #[test]
    fn mirror_examples() {
        let l1 = DistanceGenerator::l1_quadratic(1.0).unwrap();
        assert_eq!(l1.mirror(&[2.0, -0.5, 1.0]).unwrap(), vec![1.0, 0.0, 0.0]);
        let e = DistanceGenerator::simplex_entropy(4).unwrap();
        assert_eq!(e.mirror(&[0.0; 4]).unwrap(), vec![0.25; 4]);
        assert_eq!(DistanceGenerator::quadratic().mirror(&[1.0, -2.0]).unwrap(), vec![1.0, -2.0]);
    }

    #[test]
    fn bregman_examples() {
        let q = DistanceGenerator::quadratic();
        let s = PrimalDualState::from_dual(&q, vec![1.0, 0.0]).unwrap();
        assert_eq!(q.bregman_distance(&s, &[0.0, 0.0]).unwrap(), ExtendedReal::Finite(0.5));

        let e = DistanceGenerator::simplex_entropy(2).unwrap();
        let s = PrimalDualState::from_dual(&e, vec![0.0, 0.0]).unwrap();
        let d = e.bregman_distance(&s, &[1.0, 0.0]).unwrap().finite().unwrap();
        assert_abs_diff_eq!(d, 2f64.ln(), epsilon = 1e-14);
        assert_eq!(e.bregman_distance(&s, &[0.9, 0.9]).unwrap(), ExtendedReal::PosInfinity);

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for g in all_geometries() {
            let d = g.dim().unwrap_or(4);
            let s = PrimalDualState::from_dual(&g, random_dual(&mut rng, d, 2.0)).unwrap();
            let self_dist = g.bregman_distance(&s, s.x()).unwrap().finite().unwrap();
            assert!(self_dist.abs() <= 1e-12, "{g:?}: {self_dist}");
        }
    }

    #[test]
    fn dual_norm_examples() {
        let q = DistanceGenerator::quadratic();
        assert_eq!(q.dual_norm(&[3.0, 4.0]).unwrap(), 5.0);
        let e = DistanceGenerator::simplex_entropy(2).unwrap();
        assert_eq!(e.dual_norm(&[3.0, -4.0]).unwrap(), 4.0);
        assert_eq!(e.dual_norm(&[0.0, 0.0]).unwrap(), 0.0);
        let blocks = DistanceGenerator::entropy_blocks(2, 2).unwrap();
        assert_eq!(blocks.dual_norm(&[1.0, -2.0, 0.5, 1.5]).unwrap(), 2.0);
    }

    #[test]
    fn generator_invariants() {
        let q = DistanceGenerator::quadratic();
        assert_eq!((q.sigma(), q.smoothness(), q.primal_norm()), (1.0, Some(1.0), PrimalNorm::L2));
        let l1 = DistanceGenerator::l1_quadratic(2.0).unwrap();
        assert_eq!((l1.sigma(), l1.smoothness(), l1.primal_norm()), (1.0, None, PrimalNorm::L2));
        let e = DistanceGenerator::simplex_entropy(3).unwrap();
        assert_eq!((e.sigma(), e.smoothness(), e.primal_norm()), (1.0, None, PrimalNorm::L1));
        assert!(DistanceGenerator::l1_quadratic(0.0).is_err());
        assert!(DistanceGenerator::simplex_entropy(0).is_err());
        let mixed = DistanceGenerator::separable(vec![
            (DistanceGenerator::quadratic(), 1),
            (DistanceGenerator::simplex_entropy(2).unwrap(), 2),
        ]);
        assert!(mixed.is_err());
        assert_eq!(DistanceGenerator::entropy_blocks(4, 3).unwrap().dim(), Some(12));
    }

    #[test]
    fn fenchel_equality_strong_convexity_and_monotonicity() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for g in all_geometries() {
            let d = g.dim().unwrap_or(6);
            for _ in 0..1000 {
                let xs = random_dual(&mut rng, d, 3.0);
                let ys = random_dual(&mut rng, d, 3.0);
                let x = g.mirror(&xs).unwrap();
                let y = g.mirror(&ys).unwrap();
                let phi = g.value(&x).unwrap().finite().unwrap();
                let gap = phi + g.conjugate(&xs).unwrap() - dot(&xs, &x);
                assert!(gap.abs() <= 1e-10, "{g:?}: fenchel gap {gap}");

                let state = PrimalDualState::from_dual(&g, xs.clone()).unwrap();
                let dist = g.bregman_distance(&state, &y).unwrap().finite().unwrap();
                let diff: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a - b).collect();
                let norm = g.primal_norm_of(&diff);
                assert!(dist >= 0.5 * g.sigma() * norm * norm - 1e-10, "{g:?}: strong convexity");

                let dual_diff: Vec<f64> = xs.iter().zip(&ys).map(|(a, b)| a - b).collect();
                assert!(dot(&dual_diff, &diff) >= g.sigma() * norm * norm - 1e-10, "{g:?}: monotonicity");
            }
        }
    }

    #[test]
    fn entropy_mirror_is_strictly_positive_after_shift() {
        let e = DistanceGenerator::simplex_entropy(6).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let mut z: Vec<f64> = (0..6).map(|_| rng.random_range(-700.0..0.0)).collect();
            z[0] = 0.0;
            let p = e.mirror(&z).unwrap();
            assert!(p.iter().all(|&v| v > 0.0));
            assert!((p.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn state_rejects_incoherent_pairs() {
        let e = DistanceGenerator::simplex_entropy(2).unwrap();
        assert!(PrimalDualState::new(&e, vec![0.5, 0.5], vec![0.0, 0.0]).is_ok());
        assert!(matches!(
            PrimalDualState::new(&e, vec![0.6, 0.4], vec![0.0, 0.0]),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn extended_reals_order_infinity_last() {
        assert!(ExtendedReal::Finite(1e300) < ExtendedReal::PosInfinity);
        assert_eq!(ExtendedReal::Finite(1.0) + ExtendedReal::PosInfinity, ExtendedReal::PosInfinity);
    }
}
