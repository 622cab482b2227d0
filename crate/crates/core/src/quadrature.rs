//! Floating-point integration on S3 ≅ SU(2).
//!
//! [`product_rule`] is a deterministic rule in hyperspherical coordinates
//! whose exactness degree is certified by sweeping monomials against the
//! exact moments; [`mc_integrate`] is the seeded Monte Carlo oracle.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, OnceLock, RwLock};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::poly::{monomials4, sphere_moment};
use crate::quaternion::{haar_draw, Quat, Quaternion};
use crate::scalar::rational_to_f64;

/// Tolerance used when certifying the exactness degree.
pub const CERTIFY_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Debug, Serialize)]
pub struct QuadratureRule {
    pub order: usize,
    pub nodes: Vec<Quat>,
    pub weights: Vec<f64>,
    /// Largest `D` such that every monomial of degree `≤ D` is integrated to
    /// its exact moment within [`CERTIFY_TOLERANCE`].
    pub exact_degree: u32,
}

impl QuadratureRule {
    pub fn integrate(&self, f: impl Fn(&Quat) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(q, w)| w * f(q)).sum()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Gauss–Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            if n == 1 {
                p0 = 1.0;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = x;
        nodes[n - 1 - i] = -x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// Gauss–Chebyshev (second kind) rule for `∫_{-1}^{1} √(1-t²) h(t) dt`.
fn gauss_chebyshev_second(n: usize) -> (Vec<f64>, Vec<f64>) {
    (1..=n)
        .map(|i| {
            let a = i as f64 * PI / (n as f64 + 1.0);
            (a.cos(), PI / (n as f64 + 1.0) * a.sin().powi(2))
        })
        .unzip()
}

fn build_rule(order: usize) -> QuadratureRule {
    let (ts, wts) = gauss_chebyshev_second(order);
    let (us, wus) = gauss_legendre(order);
    let n_phi = 2 * order;
    let total = 2.0 * PI * PI;
    let mut nodes = Vec::with_capacity(order * order * n_phi);
    let mut weights = Vec::with_capacity(nodes.capacity());
    for (t, wt) in ts.iter().zip(&wts) {
        let s = (1.0 - t * t).max(0.0).sqrt();
        for (u, wu) in us.iter().zip(&wus) {
            let su = (1.0 - u * u).max(0.0).sqrt();
            for j in 0..n_phi {
                let phi = 2.0 * PI * j as f64 / n_phi as f64;
                nodes.push(Quaternion::new(*t, s * u, s * su * phi.cos(), s * su * phi.sin()));
                weights.push(wt * wu * (2.0 * PI / n_phi as f64) / total);
            }
        }
    }
    let mut rule = QuadratureRule { order, nodes, weights, exact_degree: 0 };
    rule.exact_degree = certify(&rule, 2 * order as u32);
    rule
}

/// Largest `D ≤ max_degree` such that all monomials of degree `≤ D` pass.
pub fn certify(rule: &QuadratureRule, max_degree: u32) -> u32 {
    let mut certified = None;
    for d in 0..=max_degree {
        let all_pass = monomials4(d).iter().all(|&e| {
            let approx = rule.integrate(|q| {
                q.w.powi(e[0] as i32) * q.x.powi(e[1] as i32) * q.y.powi(e[2] as i32) * q.z.powi(e[3] as i32)
            });
            (approx - rational_to_f64(&sphere_moment(e))).abs() <= CERTIFY_TOLERANCE
        });
        if !all_pass {
            break;
        }
        certified = Some(d);
    }
    certified.unwrap_or(0)
}

fn rule_cache() -> &'static RwLock<HashMap<usize, Arc<QuadratureRule>>> {
    static CACHE: OnceLock<RwLock<HashMap<usize, Arc<QuadratureRule>>>> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

/// Product rule with `order` Gauss–Chebyshev nodes in ψ, `order`
/// Gauss–Legendre nodes in cos θ and `2·order` trapezoid nodes in φ.
///
/// # Panics
/// If `order == 0`.
pub fn product_rule(order: usize) -> Arc<QuadratureRule> {
    assert!(order >= 1, "quadrature order must be at least 1");
    if let Some(r) = rule_cache().read().unwrap().get(&order) {
        return r.clone();
    }
    let built = Arc::new(build_rule(order));
    rule_cache().write().unwrap().entry(order).or_insert(built).clone()
}

/// Smallest product rule exact through `degree`.
pub fn rule_for_degree(degree: u32) -> Arc<QuadratureRule> {
    let mut order = (degree as usize) / 2 + 1;
    loop {
        let rule = product_rule(order);
        if rule.exact_degree >= degree {
            return rule;
        }
        order += 1;
    }
}

/// Haar Monte Carlo mean of `f` with its sample standard error.
///
/// # Panics
/// If `n < 2`.
pub fn mc_integrate(f: impl Fn(&Quat) -> f64, n: usize, seed: u64) -> (f64, f64) {
    assert!(n >= 2, "need at least two samples");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut mean, mut m2) = (0.0, 0.0);
    for i in 0..n {
        let v = f(&haar_draw(&mut rng));
        let delta = v - mean;
        mean += delta / (i + 1) as f64;
        m2 += delta * (v - mean);
    }
    let var = m2 / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// Monte Carlo estimates `(mean, stderr)` of all monomials of degree
/// `≤ max_degree`, from one stream of `n` Haar samples.
pub fn mc_monomial_moments(max_degree: u32, n: usize, seed: u64) -> Vec<([u8; 4], f64, f64)> {
    let monos: Vec<[u8; 4]> = (0..=max_degree).flat_map(monomials4).collect();
    let mut sums = vec![0.0f64; monos.len()];
    let mut sq = vec![0.0f64; monos.len()];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let deg = max_degree as usize;
    let mut pow = vec![[0.0f64; 4]; deg + 1];
    for _ in 0..n {
        let q = haar_draw(&mut rng).to_array();
        pow[0] = [1.0; 4];
        for d in 1..=deg {
            for c in 0..4 {
                pow[d][c] = pow[d - 1][c] * q[c];
            }
        }
        for ((e, s), s2) in monos.iter().zip(sums.iter_mut()).zip(sq.iter_mut()) {
            let v = pow[e[0] as usize][0] * pow[e[1] as usize][1] * pow[e[2] as usize][2] * pow[e[3] as usize][3];
            *s += v;
            *s2 += v * v;
        }
    }
    let nf = n as f64;
    monos
        .into_iter()
        .zip(sums.into_iter().zip(sq))
        .map(|(e, (s, s2))| {
            let mean = s / nf;
            let var = ((s2 / nf - mean * mean) * nf / (nf - 1.0)).max(0.0);
            (e, mean, (var / nf).sqrt())
        })
        .collect()
}
