//! `T` on `H_k ⊗ H_k` by integrating against the zonal kernel:
//! `Tf(x', y') = ∬ Z⁽ᵏ⁾(x̄' x y', y) f(x, y) dx dy`, evaluated with the
//! product quadrature rule.

use crate::error::{Error, Result};
use crate::harmonics::harmonic_basis;
use crate::poly::FloatPoly;
use crate::product::{analyze, synthesize, BiPoly, SpectralCoeffs};
use crate::quadrature::{rule_for_degree, QuadratureRule};
use crate::quaternion::Quat;
use crate::scalar::Scalar;

/// Output points `(x', y')`.
pub type PointPair = (Quat, Quat);

/// Quadrature degree needed for `f` supported on block `(k, k)`.
fn required_degree(f: &BiPoly, k: usize) -> u32 {
    f.x_degree().max(f.y_degree()) + k as u32
}

/// Block-supported evaluation with the default rule.
pub fn xi_zonal_kernel(f: &BiPoly, k: usize, points: &[PointPair]) -> Result<Vec<f64>> {
    let rule = rule_for_degree(required_degree(f, k));
    xi_zonal_kernel_with_rule(f, k, points, &rule)
}

/// As [`xi_zonal_kernel`] with an explicit rule, which must integrate the
/// integrand exactly.
pub fn xi_zonal_kernel_with_rule(f: &BiPoly, k: usize, points: &[PointPair], rule: &QuadratureRule) -> Result<Vec<f64>> {
    let n = (f.x_degree().max(f.y_degree()) as usize).max(k);
    let coeffs = analyze(f, n)?;
    for (&(a, b), m) in coeffs.blocks() {
        if (a, b) != (k, k) && !m.is_zero() {
            return Err(Error::NotBlockSupported(format!("input has a component in block ({a},{b}), expected ({k},{k})")));
        }
    }
    let need = required_degree(f, k);
    if rule.exact_degree < need {
        return Err(Error::QuadratureOrderTooLow { have: rule.exact_degree, need });
    }
    Ok(kernel_quadrature(f, k, points, rule))
}

fn kernel_quadrature(f: &BiPoly, k: usize, points: &[PointPair], rule: &QuadratureRule) -> Vec<f64> {
    let basis = harmonic_basis(k as u32);
    let ys: Vec<FloatPoly> = basis.elements().iter().map(|p| p.to_float()).collect();
    let gram: Vec<f64> = basis.gram_diag().iter().map(Scalar::to_f64).collect();
    let fp = f.poly().to_float();
    let nodes = &rule.nodes;
    let eval_all = |q: &Quat| -> Vec<f64> {
        let a = q.to_array();
        ys.iter().map(|y| y.eval(&a)).collect()
    };
    // H[i][α] = ∫ f(x_i, y) Y_α(y) dy / ‖Y_α‖²
    let y_values: Vec<Vec<f64>> = nodes.iter().map(eval_all).collect();
    let table: Vec<Vec<f64>> = nodes
        .iter()
        .map(|x| {
            let mut h = vec![0.0; ys.len()];
            for ((y, w), yv) in nodes.iter().zip(&rule.weights).zip(&y_values) {
                let fv = w * fp.eval(&[x.w, x.x, x.y, x.z, y.w, y.x, y.y, y.z]);
                for (hi, v) in h.iter_mut().zip(yv) {
                    *hi += fv * v;
                }
            }
            h.iter_mut().zip(&gram).for_each(|(hi, g)| *hi /= g);
            h
        })
        .collect();
    // Tf(x', y') = Σ_i w_i Σ_α Y_α(x̄' x_i y') H[i][α]
    points
        .iter()
        .map(|(xp, yp)| {
            let left = xp.conj();
            nodes
                .iter()
                .zip(&rule.weights)
                .zip(&table)
                .map(|((x, w), h)| {
                    let arg = left.mul(x).mul(yp);
                    w * eval_all(&arg).iter().zip(h).map(|(a, b)| a * b).sum::<f64>()
                })
                .sum()
        })
        .collect()
}

/// `Tf` at the given points for any bipolynomial: each diagonal block is
/// integrated against its zonal kernel and off-diagonal blocks contribute
/// nothing.
pub fn xi_zonal_kernel_general(f: &BiPoly, points: &[PointPair]) -> Result<Vec<f64>> {
    let n = f.x_degree().max(f.y_degree()) as usize;
    let coeffs = analyze(f, n)?;
    let mut out = vec![0.0; points.len()];
    for k in 0..=n {
        let block = coeffs.block(k, k)?;
        if block.is_zero() {
            continue;
        }
        let mut single = SpectralCoeffs::zeros(n);
        single.set_block(k, k, block.clone())?;
        let fk = synthesize(&single);
        let rule = rule_for_degree(2 * k as u32);
        for (o, v) in out.iter_mut().zip(kernel_quadrature(&fk, k, points, &rule)) {
            *o += v;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::MultiPoly;
    use crate::product::{random_spectral, Support};
    use crate::quaternion::haar_sample;

    use super::super::symbolic::xi_symbolic;

    fn points(seed: u64, n: usize) -> Vec<PointPair> {
        haar_sample(seed, 2 * n).chunks(2).map(|c| (c[0], c[1])).collect()
    }

    #[test]
    fn constants_are_fixed() {
        let one = BiPoly::new(MultiPoly::one(8)).unwrap();
        for v in xi_zonal_kernel(&one, 0, &points(1, 5)).unwrap() {
            assert!((v - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn inner_product_form_at_identity() {
        let mut p = MultiPoly::zero(8);
        for a in 0..4 {
            p = &p + &(&MultiPoly::var(8, a) * &MultiPoly::var(8, a + 4));
        }
        let f = BiPoly::new(p).unwrap();
        let e = Quat::identity();
        let v = xi_zonal_kernel(&f, 1, &[(e, e)]).unwrap();
        assert!((v[0] - 1.0).abs() < 1e-13);
    }

    #[test]
    fn random_degree_two_block_matches_symbolic() {
        let mut c = random_spectral(2, Support::Diagonal, 3);
        for k in 0..2 {
            c.set_block(k, k, crate::matrix::Matrix::zeros(crate::product::block_dim(k), crate::product::block_dim(k)))
                .unwrap();
        }
        let f = synthesize(&c);
        let tf = xi_symbolic(&f).unwrap();
        let pts = points(4, 20);
        let values = xi_zonal_kernel(&f, 2, &pts).unwrap();
        for ((x, y), v) in pts.iter().zip(values) {
            assert!((tf.eval(x, y) - v).abs() < 1e-8);
        }
    }

    #[test]
    fn rejects_inputs_outside_the_block() {
        let f = BiPoly::new(MultiPoly::var(8, 0)).unwrap();
        assert!(matches!(xi_zonal_kernel(&f, 0, &points(2, 1)), Err(Error::NotBlockSupported(_))));
    }

    #[test]
    fn rejects_a_coarse_rule() {
        let f = BiPoly::tensor(&harmonic_basis(2).elements()[0], &harmonic_basis(2).elements()[3]);
        let rule = crate::quadrature::product_rule(1);
        assert!(matches!(
            xi_zonal_kernel_with_rule(&f, 2, &points(2, 1), &rule),
            Err(Error::QuadratureOrderTooLow { .. })
        ));
    }

    #[test]
    fn general_inputs_match_symbolic() {
        for seed in 0..4 {
            let f = crate::product::random_bipoly(3, 6, seed);
            let tf = xi_symbolic(&f).unwrap();
            let pts = points(seed + 10, 5);
            for ((x, y), v) in pts.iter().zip(xi_zonal_kernel_general(&f, &pts).unwrap()) {
                assert!((tf.eval(x, y) - v).abs() < 1e-8, "seed {seed}");
            }
        }
    }
}
