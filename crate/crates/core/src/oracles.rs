//! Brute-force reference solvers for validating exact dual steps and Bregman projections.
//!
//! Only compiled for tests or with the `oracles` feature. Nothing here calls into the
//! exact solvers of [`crate::project`]; the oracles only use `φ`, `φ*` and `∇φ*`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::dgf::{soft_threshold, DistanceGenerator, ExtendedReal, Geometry, PrimalDualState};
use crate::error::{check_len, Error, Result};
use crate::project::Hyperplane;
pub use crate::project::Bracket;
use crate::simplex::{log_sum_exp, softmax};

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Final bracket width of [`golden_section_dual`].
pub const GOLDEN_WIDTH: f64 = 1e-9;

/// `ψ'(t) = β − ⟨α, ∇φ*(x* − tα)⟩` evaluated through the mirror map.
pub fn dual_slope(generator: &DistanceGenerator, state: &PrimalDualState, h: &Hyperplane, t: f64) -> Result<f64> {
    let z: Vec<f64> = state.x_star().iter().zip(&h.normal).map(|(z, a)| z - t * a).collect();
    let x = generator.mirror(&z)?;
    Ok(h.offset - x.iter().zip(&h.normal).map(|(x, a)| x * a).sum::<f64>())
}

/// `φ*(z − cα) − φ*(z − dα)`, rearranged per geometry so that the difference keeps
/// relative accuracy when `c` and `d` are close.
fn conjugate_difference(generator: &DistanceGenerator, z: &[f64], alpha: &[f64], c: f64, d: f64) -> f64 {
    match generator.geometry() {
        Geometry::Quadratic => z
            .iter()
            .zip(alpha)
            .map(|(&zj, &aj)| 0.5 * (d - c) * aj * (2.0 * zj - (c + d) * aj))
            .sum(),
        Geometry::L1Quadratic { lambda } => z
            .iter()
            .zip(alpha)
            .map(|(&zj, &aj)| {
                let sc = soft_threshold(zj - c * aj, *lambda);
                let sd = soft_threshold(zj - d * aj, *lambda);
                0.5 * (sc - sd) * (sc + sd)
            })
            .sum(),
        Geometry::SimplexEntropy { .. } => {
            let zd: Vec<f64> = z.iter().zip(alpha).map(|(z, a)| z - d * a).collect();
            let spread = alpha.iter().fold(0.0, |m: f64, a| m.max(a.abs())) * (d - c).abs();
            if spread > 50.0 {
                let zc: Vec<f64> = z.iter().zip(alpha).map(|(z, a)| z - c * a).collect();
                return log_sum_exp(&zc) - log_sum_exp(&zd);
            }
            // z − cα = (z − dα) + (d − c)α
            let p = softmax(&zd);
            let s: f64 = p.iter().zip(alpha).map(|(p, a)| p * ((d - c) * a).exp_m1()).sum();
            s.ln_1p()
        }
        Geometry::SeparableBlocks(_) => generator
            .block_ranges(z.len())
            .into_iter()
            .map(|(r, g)| conjugate_difference(g, &z[r.clone()], &alpha[r], c, d))
            .sum(),
    }
}

/// Minimizes `ψ(t) = φ*(x* − tα) + βt` over `bracket` by golden-section search down to a
/// width of [`GOLDEN_WIDTH`].
pub fn golden_section_dual(
    generator: &DistanceGenerator,
    state: &PrimalDualState,
    h: &Hyperplane,
    bracket: Bracket,
) -> Result<f64> {
    check_len(state.dim(), h.normal.len())?;
    let Bracket { mut lo, mut hi } = bracket;
    if !(lo < hi) {
        return Err(Error::Contract(format!("invalid bracket [{lo}, {hi}]")));
    }
    if dual_slope(generator, state, h, lo)? > 0.0 || dual_slope(generator, state, h, hi)? < 0.0 {
        return Err(Error::Contract(format!("bracket [{lo}, {hi}] does not enclose a minimizer")));
    }
    let z = state.x_star();
    let alpha = &h.normal;
    // ψ(c) − ψ(d)
    let diff = |c: f64, d: f64| conjugate_difference(generator, z, alpha, c, d) + h.offset * (c - d);

    let mut c = hi - INV_PHI * (hi - lo);
    let mut d = lo + INV_PHI * (hi - lo);
    while hi - lo > GOLDEN_WIDTH {
        if diff(c, d) < 0.0 {
            hi = d;
            d = c;
            c = hi - INV_PHI * (hi - lo);
        } else {
            lo = c;
            c = d;
            d = lo + INV_PHI * (hi - lo);
        }
        if hi - lo <= 2.0 * f64::EPSILON * lo.abs().max(hi.abs()) {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Constraint rows describing the affine hull of `H ∩ dom φ`: the hyperplane plus one
/// unit-sum row per simplex block.
fn affine_constraints(generator: &DistanceGenerator, h: &Hyperplane) -> (DMatrix<f64>, DVector<f64>) {
    let d = h.normal.len();
    let mut rows = vec![h.normal.clone()];
    let mut rhs = vec![h.offset];
    for (r, g) in generator.block_ranges(d) {
        if matches!(g.geometry(), Geometry::SimplexEntropy { .. }) {
            let mut row = vec![0.0; d];
            row[r].iter_mut().for_each(|v| *v = 1.0);
            rows.push(row);
            rhs.push(1.0);
        }
    }
    let b = DMatrix::from_fn(rows.len(), d, |i, j| rows[i][j]);
    (b, DVector::from_vec(rhs))
}

/// Minimizes `D_φ^{x*}(x, ·)` over a grid on `H ∩ dom φ` for `d ∈ {2, 3}`.
///
/// The grid spans the null space of the affine constraints with `resolution` points per
/// free direction. Simplex-only domains use a window of half-width 1 around the
/// minimum-norm point of the affine hull (which covers the whole simplex slice); other
/// domains use a window of width 10 centred on the orthogonal projection of `x`.
pub fn grid_projection(
    generator: &DistanceGenerator,
    state: &PrimalDualState,
    h: &Hyperplane,
    resolution: usize,
) -> Result<Vec<f64>> {
    let d = state.dim();
    check_len(d, h.normal.len())?;
    if !(2..=3).contains(&d) {
        return Err(Error::Contract(format!("grid projection needs d in {{2, 3}}, got {d}")));
    }
    if resolution < 2 {
        return Err(Error::Contract("grid resolution must be at least 2".into()));
    }
    let (b, c) = affine_constraints(generator, h);
    let p = b
        .clone()
        .svd(true, true)
        .solve(&c, 1e-12)
        .map_err(|e| Error::Contract(e.to_string()))?;
    if (&b * &p - &c).norm() > 1e-9 * (1.0 + c.norm()) {
        return Err(Error::EmptySet);
    }

    let gram = b.transpose() * &b;
    let eig = SymmetricEigen::new(gram);
    let top = eig.eigenvalues.iter().fold(0.0, |m: f64, v| m.max(v.abs()));
    let null: Vec<DVector<f64>> = (0..d)
        .filter(|&k| eig.eigenvalues[k].abs() <= 1e-12 * top)
        .map(|k| eig.eigenvectors.column(k).into_owned())
        .collect();

    let x = DVector::from_column_slice(state.x());
    let (center, half_width) = if generator.is_entropic() {
        (p.clone(), 1.0)
    } else {
        let mut center = p.clone();
        for n in &null {
            center += n * n.dot(&(&x - &p));
        }
        (center, 5.0)
    };

    let coords: Vec<f64> = (0..resolution)
        .map(|i| -half_width + 2.0 * half_width * i as f64 / (resolution - 1) as f64)
        .collect();
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut consider = |y: DVector<f64>| {
        let y = y.as_slice().to_vec();
        if let Ok(ExtendedReal::Finite(dist)) = generator.bregman_distance(state, &y) {
            if best.as_ref().is_none_or(|(b, _)| dist < *b) {
                best = Some((dist, y));
            }
        }
    };
    match null.len() {
        0 => consider(center.clone()),
        1 => {
            for &s in &coords {
                consider(&center + &null[0] * s);
            }
        }
        2 => {
            for &s in &coords {
                for &u in &coords {
                    consider(&center + &null[0] * s + &null[1] * u);
                }
            }
        }
        k => return Err(Error::Contract(format!("unexpected null-space dimension {k}"))),
    }
    best.map(|(_, y)| y).ok_or(Error::EmptySet)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::project::{dual_bracket, exact_step_quadratic};

    fn plane(a: &[f64], b: f64) -> Hyperplane {
        Hyperplane::new(a.to_vec(), b).unwrap()
    }

    #[test]
    fn golden_matches_quadratic_closed_form() {
        let q = DistanceGenerator::quadratic();
        let s = PrimalDualState::from_dual(&q, vec![0.4, -1.2, 3.0]).unwrap();
        let h = plane(&[1.0, 2.0, -1.0], 0.3);
        let t = golden_section_dual(&q, &s, &h, Bracket { lo: -10.0, hi: 10.0 }).unwrap();
        assert!((t - exact_step_quadratic(&s, &h).unwrap()).abs() <= 1e-8);
    }

    #[test]
    fn golden_entropy_analytic_root() {
        let e = DistanceGenerator::simplex_entropy(2).unwrap();
        let s = PrimalDualState::from_dual(&e, vec![0.0, 0.0]).unwrap();
        let t = golden_section_dual(&e, &s, &plane(&[1.0, 0.0], 0.8), Bracket { lo: -10.0, hi: 10.0 }).unwrap();
        assert!((t + 4f64.ln()).abs() <= 1e-8, "{t}");
    }

    #[test]
    fn golden_centered_fixed_point() {
        let e = DistanceGenerator::simplex_entropy(2).unwrap();
        let s = PrimalDualState::from_dual(&e, vec![0.0, 0.0]).unwrap();
        let t = golden_section_dual(&e, &s, &plane(&[1.0, 0.0], 0.5), Bracket { lo: -3.0, hi: 3.0 }).unwrap();
        assert!(t.abs() <= 1e-9);
    }

    #[test]
    fn golden_rejects_bad_brackets() {
        let q = DistanceGenerator::quadratic();
        let s = PrimalDualState::from_dual(&q, vec![0.0, 0.0]).unwrap();
        let h = plane(&[1.0, 0.0], 1.0);
        assert!(golden_section_dual(&q, &s, &h, Bracket { lo: 1.0, hi: 1.0 }).is_err());
        // root at t = −1 lies outside [0, 5]
        assert!(golden_section_dual(&q, &s, &h, Bracket { lo: 0.0, hi: 5.0 }).is_err());
    }

    #[test]
    fn golden_is_stable_under_bracket_widening() {
        let e = DistanceGenerator::entropy_blocks(3, 2).unwrap();
        let s = PrimalDualState::from_dual(&e, vec![0.3, -1.0, 2.0, 0.0, 0.5, -0.2]).unwrap();
        let h = plane(&[0.2, 0.9, 0.1, 0.5, 0.0, 0.7], 0.9);
        let b = dual_bracket(&e, &s, &h).unwrap();
        let t1 = golden_section_dual(&e, &s, &h, b).unwrap();
        let mid = 0.5 * (b.lo + b.hi);
        let wide = Bracket { lo: mid - (b.hi - b.lo), hi: mid + (b.hi - b.lo) };
        let t2 = golden_section_dual(&e, &s, &h, wide).unwrap();
        assert!((t1 - t2).abs() <= 1e-8, "{t1} vs {t2}");
    }

    #[test]
    fn grid_quadratic_line_through_origin() {
        let q = DistanceGenerator::quadratic();
        let s = PrimalDualState::from_dual(&q, vec![2.0, 0.0]).unwrap();
        let h = plane(&[1.0, -1.0], 0.0);
        let y = grid_projection(&q, &s, &h, 1001).unwrap();
        let spacing = 10.0 / 1000.0;
        assert!((y[0] - 1.0).abs() <= spacing && (y[1] - 1.0).abs() <= spacing, "{y:?}");
    }

    #[test]
    fn grid_entropy_point_lies_on_simplex_and_plane() {
        let e = DistanceGenerator::simplex_entropy(2).unwrap();
        let s = PrimalDualState::from_dual(&e, vec![0.3, -0.1]).unwrap();
        let h = plane(&[1.0, 0.0], 0.8);
        let y = grid_projection(&e, &s, &h, 101).unwrap();
        assert!((y[0] - 0.8).abs() <= 1e-12 && (y[1] - 0.2).abs() <= 1e-12);

        let e3 = DistanceGenerator::simplex_entropy(3).unwrap();
        let s = PrimalDualState::from_dual(&e3, vec![0.3, -0.1, 0.0]).unwrap();
        let h = plane(&[1.0, 0.0, 2.0], 0.9);
        let y = grid_projection(&e3, &s, &h, 401).unwrap();
        assert!((y.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        assert!(h.gap(&y).abs() <= 1e-12);
    }

    #[test]
    fn grid_refinement_shrinks_gap() {
        let e3 = DistanceGenerator::simplex_entropy(3).unwrap();
        let s = PrimalDualState::from_dual(&e3, vec![0.3, -0.1, 0.0]).unwrap();
        let h = plane(&[1.0, 0.0, 2.0], 0.9);
        let fine = grid_projection(&e3, &s, &h, 20001).unwrap();
        let d_ref = e3.bregman_distance(&s, &fine).unwrap().finite().unwrap();
        let gap = |res| {
            let y = grid_projection(&e3, &s, &h, res).unwrap();
            e3.bregman_distance(&s, &y).unwrap().finite().unwrap() - d_ref
        };
        let coarse = gap(21);
        let finer = gap(41);
        assert!(finer <= coarse + 1e-15, "{coarse} -> {finer}");
    }

    #[test]
    fn grid_reports_empty_intersection() {
        let e = DistanceGenerator::simplex_entropy(2).unwrap();
        let s = PrimalDualState::from_dual(&e, vec![0.0, 0.0]).unwrap();
        assert!(matches!(grid_projection(&e, &s, &plane(&[1.0, 0.0], 2.0), 11), Err(Error::EmptySet)));
    }
}
