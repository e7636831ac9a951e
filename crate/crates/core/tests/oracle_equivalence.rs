//! Exact dual steps against golden-section search and grid projections.

use nbk_core::dgf::{DistanceGenerator, ExtendedReal, PrimalDualState};
use nbk_core::oracles::{dual_slope, golden_section_dual, grid_projection};
use nbk_core::project::{dual_bracket, exact_step, Hyperplane};
use nbk_core::simplex::softmax;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Instance {
    generator: DistanceGenerator,
    state: PrimalDualState,
    plane: Hyperplane,
    /// A point of the hyperplane inside the domain.
    witness: Vec<f64>,
}

fn generators(d: usize) -> Vec<DistanceGenerator> {
    let mut out = vec![
        DistanceGenerator::quadratic(),
        DistanceGenerator::l1_quadratic(0.7).unwrap(),
        DistanceGenerator::simplex_entropy(d).unwrap(),
    ];
    // blocks of size one pin their coordinate, leaving the dual step undetermined
    if d % 2 == 0 && d >= 4 {
        out.push(DistanceGenerator::entropy_blocks(d / 2, 2).unwrap());
    } else {
        out.push(DistanceGenerator::separable(vec![(DistanceGenerator::simplex_entropy(d).unwrap(), d)]).unwrap());
    }
    out
}

fn domain_point(g: &DistanceGenerator, d: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let w: Vec<f64> = (0..d).map(|_| rng.random_range(-2.0..2.0)).collect();
    if g.has_full_domain() {
        return w;
    }
    g.block_ranges(d).into_iter().flat_map(|(r, _)| softmax(&w[r])).collect()
}

fn instance(g: &DistanceGenerator, d: usize, rng: &mut ChaCha8Rng) -> Instance {
    let z: Vec<f64> = (0..d).map(|_| rng.random_range(-3.0..3.0)).collect();
    let alpha: Vec<f64> = loop {
        let a: Vec<f64> = (0..d).map(|_| rng.random_range(-2.0..2.0)).collect();
        if a.iter().any(|v| v.abs() > 0.1) {
            break a;
        }
    };
    let witness = domain_point(g, d, rng);
    let beta = alpha.iter().zip(&witness).map(|(a, y)| a * y).sum();
    Instance {
        generator: g.clone(),
        state: PrimalDualState::from_dual(g, z).unwrap(),
        plane: Hyperplane::new(alpha, beta).unwrap(),
        witness,
    }
}

fn finite(v: ExtendedReal) -> f64 {
    v.finite().expect("distance must be finite")
}

#[test]
fn exact_steps_match_golden_section() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for d in 2..=6 {
        for g in generators(d) {
            for _ in 0..50 {
                let inst = instance(&g, d, &mut rng);
                let t = exact_step(&inst.generator, &inst.state, &inst.plane).unwrap();
                let bracket = dual_bracket(&inst.generator, &inst.state, &inst.plane).unwrap();
                let t_ref = golden_section_dual(&inst.generator, &inst.state, &inst.plane, bracket).unwrap();
                assert!((t - t_ref).abs() <= 1e-6, "{:?} d={d}: {t} vs {t_ref}", g.geometry());
                let slope = dual_slope(&inst.generator, &inst.state, &inst.plane, t).unwrap();
                assert!(slope.abs() <= 1e-8 * (1.0 + inst.plane.offset.abs()));
            }
        }
    }
}

#[test]
fn exact_projection_beats_every_grid_point() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for d in 2..=3 {
        for g in generators(d) {
            for _ in 0..20 {
                let inst = instance(&g, d, &mut rng);
                let t = exact_step(&inst.generator, &inst.state, &inst.plane).unwrap();
                let z: Vec<f64> = inst.state.x_star().iter().zip(&inst.plane.normal).map(|(z, a)| z - t * a).collect();
                let x_plus = g.mirror(&z).unwrap();
                let grid = grid_projection(&inst.generator, &inst.state, &inst.plane, 201).unwrap();
                let d_exact = finite(g.bregman_distance(&inst.state, &x_plus).unwrap());
                let d_grid = finite(g.bregman_distance(&inst.state, &grid).unwrap());
                assert!(d_exact <= d_grid + 1e-8, "{:?}: {d_exact} > {d_grid}", g.geometry());
            }
        }
    }
}

#[test]
fn projection_satisfies_three_point_identity() {
    // y on the hyperplane: D(x, y) = D(x, x₊) + D(x₊, y)
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for d in 2..=6 {
        for g in generators(d) {
            for _ in 0..20 {
                let inst = instance(&g, d, &mut rng);
                let t = exact_step(&inst.generator, &inst.state, &inst.plane).unwrap();
                let z: Vec<f64> = inst.state.x_star().iter().zip(&inst.plane.normal).map(|(z, a)| z - t * a).collect();
                let next = PrimalDualState::from_dual(&g, z).unwrap();
                let before = finite(g.bregman_distance(&inst.state, &inst.witness).unwrap());
                let hop = finite(g.bregman_distance(&inst.state, next.x()).unwrap());
                let after = finite(g.bregman_distance(&next, &inst.witness).unwrap());
                assert!(after <= before + 1e-10 * (1.0 + before));
                assert!((before - hop - after).abs() <= 1e-7 * (1.0 + before), "{:?}", g.geometry());
            }
        }
    }
}
