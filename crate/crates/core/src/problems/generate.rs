//! Seeded synthetic instances. All draws come from the `Problem` stream of the seed,
//! in a fixed order, so that `(parameters, seed)` determines the instance bit for bit.

use rand::seq::index;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};

use super::{lsd_pairs, GeneratorInfo, GeneratorParams, Matrix, NonlinearProblem, ProblemData};
use crate::dgf::dot;
use crate::error::{Error, Result};
use crate::rng::{stream, Stream};

/// Entry law of the linear simplex system matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EntryDistribution {
    /// `N(0, 1)`
    StdNormal,
    /// `U[0, 1]`
    Unif01,
    /// `U[0.9, 1]`
    Unif09_1,
}

impl EntryDistribution {
    pub fn as_str(self) -> &'static str {
        match self {
            EntryDistribution::StdNormal => "std_normal",
            EntryDistribution::Unif01 => "unif_0_1",
            EntryDistribution::Unif09_1 => "unif_0.9_1",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "std_normal" | "normal" | "gaussian" => Some(EntryDistribution::StdNormal),
            "unif_0_1" | "uniform" | "u01" => Some(EntryDistribution::Unif01),
            "unif_0.9_1" | "u09" | "unif_09_1" => Some(EntryDistribution::Unif09_1),
            _ => None,
        }
    }

    fn draw(self, rng: &mut ChaCha8Rng) -> f64 {
        match self {
            EntryDistribution::StdNormal => rng.sample(StandardNormal),
            EntryDistribution::Unif01 => rng.random::<f64>(),
            EntryDistribution::Unif09_1 => 0.9 + 0.1 * rng.random::<f64>(),
        }
    }
}

fn positive(name: &str, v: usize) -> Result<()> {
    if v == 0 {
        return Err(Error::InvalidParameter(format!("{name} must be positive")));
    }
    Ok(())
}

fn normal_vec(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    (0..len).map(|_| rng.sample(StandardNormal)).collect()
}

/// Uniform point of the simplex: normalized exponential variates.
fn simplex_uniform(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    let mut v: Vec<f64> = (0..len).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let sum: f64 = v.iter().sum();
    v.iter_mut().for_each(|x| *x /= sum);
    v
}

/// Sparse quadratic system with `n` equations in `d` unknowns and an `s`-sparse solution.
pub fn gen_quadratic(n: usize, d: usize, s: usize, seed: u64) -> Result<NonlinearProblem> {
    positive("n", n)?;
    positive("d", d)?;
    positive("s", s)?;
    if s > d {
        return Err(Error::InvalidParameter(format!("sparsity s = {s} exceeds d = {d}")));
    }
    let mut rng = stream(seed, Stream::Problem);
    let mut support = index::sample(&mut rng, d, s).into_vec();
    support.sort_unstable();
    let mut x_hat = vec![0.0; d];
    for &j in &support {
        x_hat[j] = rng.sample(StandardNormal);
    }
    let mut a = Vec::with_capacity(n);
    let mut b = Vec::with_capacity(n);
    let mut c = Vec::with_capacity(n);
    for _ in 0..n {
        let ai = Matrix::from_row_major(d, d, normal_vec(&mut rng, d * d))?;
        let bi = normal_vec(&mut rng, d);
        c.push(-(0.5 * ai.quadratic_form(&x_hat) + dot(&bi, &x_hat)));
        a.push(ai);
        b.push(bi);
    }
    Ok(NonlinearProblem::new(ProblemData::Quadratic { a, b, c }, Some(x_hat))?
        .with_generator(GeneratorInfo { seed, params: GeneratorParams::Quadratic { n, d, s } }))
}

/// Linear system `Ax = b` whose solution is uniform on the simplex.
pub fn gen_linear_simplex(n: usize, d: usize, dist: EntryDistribution, seed: u64) -> Result<NonlinearProblem> {
    positive("n", n)?;
    positive("d", d)?;
    let mut rng = stream(seed, Stream::Problem);
    let data: Vec<f64> = (0..n * d).map(|_| dist.draw(&mut rng)).collect();
    let a = Matrix::from_row_major(n, d, data)?;
    let x_hat = simplex_uniform(&mut rng, d);
    let b = a.mul_vec(&x_hat);
    Ok(NonlinearProblem::new(ProblemData::Linear { a, b }, Some(x_hat))?
        .with_generator(GeneratorInfo { seed, params: GeneratorParams::LinearSimplex { n, d, dist } }))
}

/// Unconstrained Gaussian linear system `Ax = b` with a Gaussian solution.
pub fn gen_linear_gaussian(n: usize, d: usize, seed: u64) -> Result<NonlinearProblem> {
    positive("n", n)?;
    positive("d", d)?;
    let mut rng = stream(seed, Stream::Problem);
    let a = Matrix::from_row_major(n, d, normal_vec(&mut rng, n * d))?;
    let x_hat = normal_vec(&mut rng, d);
    let b = a.mul_vec(&x_hat);
    Ok(NonlinearProblem::new(ProblemData::Linear { a, b }, Some(x_hat))?
        .with_generator(GeneratorInfo { seed, params: GeneratorParams::LinearGaussian { n, d } }))
}

/// Left stochastic decomposition `XᵀX = A` with an `r × m` left stochastic solution.
pub fn gen_lsd(r: usize, m: usize, seed: u64) -> Result<NonlinearProblem> {
    positive("r", r)?;
    positive("m", m)?;
    let mut rng = stream(seed, Stream::Problem);
    let mut x_hat = Vec::with_capacity(r * m);
    for _ in 0..m {
        x_hat.extend(simplex_uniform(&mut rng, r));
    }
    let mut data = vec![0.0; m * m];
    for i in 0..m {
        for j in i..m {
            let v = dot(&x_hat[i * r..(i + 1) * r], &x_hat[j * r..(j + 1) * r]);
            data[i * m + j] = v;
            data[j * m + i] = v;
        }
    }
    let a = Matrix::from_row_major(m, m, data)?;
    Ok(NonlinearProblem::new(ProblemData::Lsd { r, m, a, pairs: lsd_pairs(m) }, Some(x_hat))?
        .with_generator(GeneratorInfo { seed, params: GeneratorParams::Lsd { r, m } }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simplex::on_simplex;

    fn norm(v: &[f64]) -> f64 {
        dot(v, v).sqrt()
    }

    #[test]
    fn quadratic_solution_is_consistent() {
        for seed in 0..5 {
            let p = gen_quadratic(12, 6, 2, seed).unwrap();
            let x = p.known_solution().unwrap();
            assert_eq!(x.iter().filter(|v| **v != 0.0).count(), 2);
            assert!(norm(&p.residual(x).unwrap()) <= 1e-10 * (1.0 + p.data_scale()));
        }
        let dense = gen_quadratic(4, 5, 5, 1).unwrap();
        assert!(dense.known_solution().unwrap().iter().all(|v| *v != 0.0));
        assert!(matches!(gen_quadratic(4, 3, 4, 0), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn generators_are_deterministic() {
        assert_eq!(gen_quadratic(5, 4, 2, 11).unwrap(), gen_quadratic(5, 4, 2, 11).unwrap());
        assert_eq!(
            gen_linear_simplex(5, 4, EntryDistribution::Unif01, 11).unwrap(),
            gen_linear_simplex(5, 4, EntryDistribution::Unif01, 11).unwrap()
        );
        assert_eq!(gen_lsd(3, 4, 11).unwrap(), gen_lsd(3, 4, 11).unwrap());
        assert_ne!(gen_lsd(3, 4, 11).unwrap(), gen_lsd(3, 4, 12).unwrap());
    }

    #[test]
    fn linear_simplex_solution() {
        for dist in [EntryDistribution::StdNormal, EntryDistribution::Unif01, EntryDistribution::Unif09_1] {
            let p = gen_linear_simplex(30, 20, dist, 3).unwrap();
            let x = p.known_solution().unwrap();
            assert!(x.iter().all(|v| *v >= 0.0));
            assert!((x.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
            let ProblemData::Linear { a, .. } = p.data() else { unreachable!() };
            let fro = norm(a.as_slice());
            assert!(p.residual(x).unwrap().iter().all(|r| r.abs() <= 1e-12 * fro));
            if dist == EntryDistribution::Unif09_1 {
                assert!(a.as_slice().iter().all(|v| (0.9..=1.0).contains(v)));
            }
        }
    }

    #[test]
    fn lsd_instance() {
        let p = gen_lsd(4, 6, 9).unwrap();
        assert_eq!(p.n(), 21);
        let ProblemData::Lsd { a, .. } = p.data() else { unreachable!() };
        for i in 0..6 {
            for j in 0..6 {
                assert_eq!(a.get(i, j), a.get(j, i));
                assert!((0.0..=1.0).contains(&a.get(i, j)));
            }
        }
        let x = p.known_solution().unwrap();
        assert!(x.chunks(4).all(on_simplex));
        assert!(p.residual(x).unwrap().iter().all(|r| r.abs() <= 1e-12));
    }

    #[test]
    fn distribution_names_round_trip() {
        for dist in [EntryDistribution::StdNormal, EntryDistribution::Unif01, EntryDistribution::Unif09_1] {
            assert_eq!(EntryDistribution::parse(dist.as_str()), Some(dist));
        }
    }
}
