//! Numerical verdicts: invariances of the kernel of `T²`, contraction and
//! smoothing bounds, and agreement of the three realizations of `T`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::Result;
use crate::harmonics::zonal;
use crate::product::{analyze, random_bipoly, random_spectral, sobolev_weight, SpectralCoeffs, Support};
use crate::quadrature::rule_for_degree;
use crate::quaternion::{haar_draw, Quat};
use crate::scalar::{Rational, Scalar};

use super::float_rep::float_transform;
use super::reflection::{block_gram, orthonormal_form, reflection};
use super::spectral::{xi_spectral, xi_spectral_with, TransformTable};
use super::symbolic::xi_symbolic;
use super::zonal_kernel::xi_zonal_kernel_general;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exact,
    Float,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Exact => "exact",
            Mode::Float => "float",
        }
    }
}

pub const KERNEL_TOLERANCE: f64 = 1e-6;
pub const REALIZATION_TOLERANCE: f64 = 1e-8;

/// `K(x'', y''; x, y) = ∬ Z(x' y'', x'' y') Z(x y', x' y) dx' dy'`, the
/// kernel of `T²` on `H_k ⊗ H_k`, by product quadrature in `(x', y')`.
pub fn t_squared_kernel(k: usize, x2: &Quat, y2: &Quat, x: &Quat, y: &Quat) -> f64 {
    let z = zonal(k as u32);
    let rule = rule_for_degree(2 * k as u32);
    let mut acc = 0.0;
    for (xp, wx) in rule.nodes.iter().zip(&rule.weights) {
        let left_x = xp.mul(y2);
        for (yp, wy) in rule.nodes.iter().zip(&rule.weights) {
            acc += wx * wy * z.eval(&left_x, &x2.mul(yp)) * z.eval(&x.mul(yp), &xp.mul(y));
        }
    }
    acc
}

#[derive(Clone, Debug, Serialize)]
pub struct KernelInvarianceReport {
    pub degree: usize,
    pub samples: usize,
    /// `max |K(x'',y'';x,y) − K(x''g,y'';xg,y)|`
    pub right_defect: f64,
    /// `max |K(x'',y'';x,y) − K(gx'',y'';gx,y)|`
    pub left_defect: f64,
    /// `max |K − K(x'',y''g;x,yg)|`, reported only.
    pub y_right_defect: f64,
    /// `max |K − K(x'',gy'';x,gy)|`, reported only.
    pub y_left_defect: f64,
    /// `max |K(x'',y'';x,y) − λ_k² Z(x,x'') Z(y,y'')|`, reported only.
    pub closed_form_defect: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// Checks `K(x'',y'';x,y) = K(x''g,y'';xg,y) = K(gx'',y'';gx,y)` at random
/// configurations.
pub fn kernel_invariance_check(k: usize, samples: usize, seed: u64) -> KernelInvarianceReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let z = zonal(k as u32);
    let lambda2 = 1.0 / ((k + 1) * (k + 1)) as f64;
    let mut r = KernelInvarianceReport {
        degree: k,
        samples,
        right_defect: 0.0,
        left_defect: 0.0,
        y_right_defect: 0.0,
        y_left_defect: 0.0,
        closed_form_defect: 0.0,
        tolerance: KERNEL_TOLERANCE,
        passed: false,
    };
    for _ in 0..samples {
        let [x2, y2, x, y, g]: [Quat; 5] = std::array::from_fn(|_| haar_draw(&mut rng));
        let base = t_squared_kernel(k, &x2, &y2, &x, &y);
        let kern = |a: Quat, b: Quat, c: Quat, d: Quat| t_squared_kernel(k, &a, &b, &c, &d);
        r.right_defect = r.right_defect.max((base - kern(x2.mul(&g), y2, x.mul(&g), y)).abs());
        r.left_defect = r.left_defect.max((base - kern(g.mul(&x2), y2, g.mul(&x), y)).abs());
        r.y_right_defect = r.y_right_defect.max((base - kern(x2, y2.mul(&g), x, y.mul(&g))).abs());
        r.y_left_defect = r.y_left_defect.max((base - kern(x2, g.mul(&y2), x, g.mul(&y))).abs());
        let closed = lambda2 * z.eval(&x, &x2) * z.eval(&y, &y2);
        r.closed_form_defect = r.closed_form_defect.max((base - closed).abs());
    }
    r.passed = r.right_defect <= KERNEL_TOLERANCE && r.left_defect <= KERNEL_TOLERANCE;
    r
}

#[derive(Clone, Debug, Serialize)]
pub struct DegreeNorm {
    pub degree: usize,
    pub weight: u64,
    /// `‖R_k‖` on `H_k ⊗ H_k` with the L2 norm.
    pub reflection_norm: f64,
    /// `√(w_kk^{s+1} / w_kk^s) ‖R_k‖ / (k+1)`.
    pub block_norm: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ContractionReport {
    pub truncation: usize,
    pub sobolev_order: f64,
    pub mode: Mode,
    pub trials: usize,
    pub contraction_holds: bool,
    /// Largest `‖Tc‖² / ‖c‖²` seen.
    pub worst_ratio: f64,
    pub per_degree: Vec<DegreeNorm>,
    pub operator_norm_estimate: f64,
    /// `max_{k ≤ N} √(1 + 2k(k+2)) / (k+1)`.
    pub analytic_bound: f64,
    pub passed: bool,
}

fn reflection_norm(k: usize, mode: Mode) -> Result<f64> {
    let t = match mode {
        Mode::Exact => reflection(k)?.matrix_t.to_f64(),
        Mode::Float => float_transform(k).as_ref().clone(),
    };
    let gram = block_gram::<f64>(k, k);
    let r = orthonormal_form(&t, &gram).scale(&((k + 1) as f64));
    Ok(r.spectral_norm(50))
}

fn ratio<S: Scalar>(c: &SpectralCoeffs<S>, tc: &SpectralCoeffs<S>) -> (bool, f64) {
    let (a, b) = (tc.sobolev_norm_sqr(0), c.sobolev_norm_sqr(0));
    let holds = if S::EXACT { a <= b } else { a.to_f64() <= b.to_f64() * (1.0 + 1e-12) };
    let r = if b.is_zero() { 0.0 } else { a.to_f64() / b.to_f64() };
    (holds, r)
}

/// `‖Tc‖ ≤ ‖c‖` on random data and the truncated `Hˢ → Hˢ⁺¹` norm of `T`.
pub fn contraction_and_smoothing_check(n: usize, s: f64, trials: usize, seed: u64, mode: Mode) -> Result<ContractionReport> {
    let mut holds = true;
    let mut worst: f64 = 0.0;
    match mode {
        Mode::Exact => {
            let table = TransformTable::exact(n)?;
            for t in 0..trials {
                let c = random_spectral(n, Support::All, seed.wrapping_add(t as u64));
                let (h, r) = ratio(&c, &xi_spectral_with(&c, &table)?);
                holds &= h;
                worst = worst.max(r);
            }
        }
        Mode::Float => {
            let table = TransformTable::float(n);
            for t in 0..trials {
                let c = random_spectral(n, Support::All, seed.wrapping_add(t as u64)).to_f64();
                let (h, r) = ratio(&c, &xi_spectral_with(&c, &table)?);
                holds &= h;
                worst = worst.max(r);
            }
        }
    }
    let mut per_degree = Vec::new();
    for k in 0..=n {
        let weight = sobolev_weight(k, k);
        let w = weight as f64;
        let reflection_norm = reflection_norm(k, mode)?;
        let block_norm = (w.powf(s + 1.0) / w.powf(s)).sqrt() * reflection_norm / (k + 1) as f64;
        per_degree.push(DegreeNorm { degree: k, weight, reflection_norm, block_norm });
    }
    let operator_norm_estimate = per_degree.iter().map(|d| d.block_norm).fold(0.0, f64::max);
    let analytic_bound = (0..=n)
        .map(|k| (1.0 + 2.0 * (k * (k + 2)) as f64).sqrt() / (k + 1) as f64)
        .fold(0.0, f64::max);
    let passed = holds && operator_norm_estimate <= std::f64::consts::SQRT_2 * (1.0 + 1e-9);
    Ok(ContractionReport {
        truncation: n,
        sobolev_order: s,
        mode,
        trials,
        contraction_holds: holds,
        worst_ratio: worst,
        per_degree,
        operator_norm_estimate,
        analytic_bound,
        passed,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct RealizationReport {
    pub inputs: usize,
    pub max_bidegree: u32,
    pub points_per_input: usize,
    pub symbolic_equals_spectral: bool,
    pub kernel_max_error: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// Symbolic vs spectral (exact) and symbolic vs zonal kernel (float) on
/// random bipolynomials.
pub fn realization_agreement(inputs: usize, max_bidegree: u32, points: usize, seed: u64) -> Result<RealizationReport> {
    let mut exact_ok = true;
    let mut err: f64 = 0.0;
    let n = max_bidegree as usize;
    for t in 0..inputs {
        let s = seed.wrapping_add(t as u64);
        let f = random_bipoly(max_bidegree, 6, s);
        let tf = xi_symbolic(&f)?;
        exact_ok &= xi_spectral(&analyze(&f, n)?)? == analyze(&tf, n)?;
        let mut rng = ChaCha8Rng::seed_from_u64(s ^ 0x9e37_79b9);
        let pts: Vec<(Quat, Quat)> = (0..points).map(|_| (haar_draw(&mut rng), haar_draw(&mut rng))).collect();
        for ((x, y), v) in pts.iter().zip(xi_zonal_kernel_general(&f, &pts)?) {
            err = err.max((tf.eval(x, y) - v).abs());
        }
    }
    Ok(RealizationReport {
        inputs,
        max_bidegree,
        points_per_input: points,
        symbolic_equals_spectral: exact_ok,
        kernel_max_error: err,
        tolerance: REALIZATION_TOLERANCE,
        passed: exact_ok && err <= REALIZATION_TOLERANCE,
    })
}

/// Exact `‖c‖²` with the Gram-weighted inner product, as a rational.
pub fn l2_norm_sqr(c: &SpectralCoeffs<Rational>) -> Rational {
    c.sobolev_norm_sqr(0)
}
