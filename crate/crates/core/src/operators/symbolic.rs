//! `Tf(x, y) = ∫ f(xg, gy) dg` computed exactly.
//!
//! Each monomial `x^a y^b` of `f` becomes `u^a v^b` with `u = xg`, `v = gy`;
//! both factors are expanded as polynomials bilinear in `(x, g)` and
//! `(g, y)`, grouped by their `g` exponents, and the `g` block is integrated
//! out with the exact sphere moments. Monomial transforms are memoized.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use num_bigint::BigInt;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::harmonics::harmonic_basis;
use crate::poly::{moment_denominator, Block, Exponents, MultiPoly, DEFAULT_DEGREE_CAP};
use crate::product::BiPoly;
use crate::scalar::Rational;

/// Component `r` of the Hamilton product `p q` is `Σ sign · p_s · q_t` over
/// the four `(sign, s, t)` listed in row `r`.
pub const HAMILTON: [[(i8, usize, usize); 4]; 4] = [
    [(1, 0, 0), (-1, 1, 1), (-1, 2, 2), (-1, 3, 3)],
    [(1, 0, 1), (1, 1, 0), (1, 2, 3), (-1, 3, 2)],
    [(1, 0, 2), (-1, 1, 3), (1, 2, 0), (1, 3, 1)],
    [(1, 0, 3), (1, 1, 2), (-1, 2, 1), (1, 3, 0)],
];

type Bilinear = HashMap<([u8; 4], [u8; 4]), i128>;

/// `Π_r (p q)_r^{a_r}` as a map `(exps of p, exps of q) -> integer coefficient`.
fn product_power(a: [u8; 4]) -> Bilinear {
    let mut acc: Bilinear = HashMap::from([(([0; 4], [0; 4]), 1)]);
    for (r, &times) in a.iter().enumerate() {
        for _ in 0..times {
            let mut next: Bilinear = HashMap::with_capacity(acc.len() * 4);
            for ((pe, qe), c) in &acc {
                for &(sign, s, t) in &HAMILTON[r] {
                    let mut pe2 = *pe;
                    let mut qe2 = *qe;
                    pe2[s] += 1;
                    qe2[t] += 1;
                    *next.entry((pe2, qe2)).or_insert(0) += sign as i128 * c;
                }
            }
            next.retain(|_, c| *c != 0);
            acc = next;
        }
    }
    acc
}

fn double_factorial_product_i128(e: [u8; 4]) -> i128 {
    let mut acc: i128 = 1;
    for &a in &e {
        let mut k = a as i128 - 1;
        while k > 1 {
            acc *= k;
            k -= 2;
        }
    }
    acc
}

/// `T(x^a y^b)` as an 8-variable polynomial (not reduced).
fn monomial_transform_uncached(a: [u8; 4], b: [u8; 4]) -> MultiPoly {
    let deg_a: u32 = a.iter().map(|&d| d as u32).sum();
    let deg_b: u32 = b.iter().map(|&d| d as u32).sum();
    if (deg_a + deg_b) % 2 == 1 {
        return MultiPoly::zero(8);
    }
    // u^a = Σ_α g^α P_α(x),  v^b = Σ_β g^β Q_β(y)
    let mut by_g_left: HashMap<[u8; 4], Vec<([u8; 4], i128)>> = HashMap::new();
    for ((xe, ge), c) in product_power(a) {
        by_g_left.entry(ge).or_default().push((xe, c));
    }
    let mut by_g_right: HashMap<[u8; 4], Vec<([u8; 4], i128)>> = HashMap::new();
    for ((ge, ye), c) in product_power(b) {
        by_g_right.entry(ge).or_default().push((ye, c));
    }
    // Moments of total degree 2m share the denominator 2^m (m+1)!.
    let m = (deg_a + deg_b) / 2;
    let mut acc: HashMap<([u8; 4], [u8; 4]), i128> = HashMap::new();
    for (alpha, ps) in &by_g_left {
        for (beta, qs) in &by_g_right {
            let e = [alpha[0] + beta[0], alpha[1] + beta[1], alpha[2] + beta[2], alpha[3] + beta[3]];
            if e.iter().any(|d| d % 2 == 1) {
                continue;
            }
            let weight = double_factorial_product_i128(e);
            for (xe, p) in ps {
                let wp = weight * p;
                for (ye, q) in qs {
                    *acc.entry((*xe, *ye)).or_insert(0) += wp * q;
                }
            }
        }
    }
    let den = moment_denominator(m);
    let mut out = MultiPoly::zero(8);
    for ((xe, ye), c) in acc {
        if c == 0 {
            continue;
        }
        let e: Exponents = xe.iter().chain(ye.iter()).copied().collect();
        out.add_term(e, Rational::new(BigInt::from(c), den.clone()));
    }
    out
}

type TransformCache = RwLock<HashMap<([u8; 4], [u8; 4]), Arc<MultiPoly>>>;

fn transform_cache() -> &'static TransformCache {
    static CACHE: OnceLock<TransformCache> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

/// Memoized `T(x^a y^b)`.
pub fn monomial_transform(a: [u8; 4], b: [u8; 4]) -> Arc<MultiPoly> {
    if let Some(p) = transform_cache().read().unwrap().get(&(a, b)) {
        return p.clone();
    }
    let built = Arc::new(monomial_transform_uncached(a, b));
    transform_cache().write().unwrap().entry((a, b)).or_insert(built).clone()
}

/// Total degree of the 12-variable integrand `f(xg, gy)`.
fn expansion_degree(f: &BiPoly) -> u32 {
    f.poly()
        .terms()
        .map(|(e, _)| 2 * e.iter().map(|&d| d as u32).sum::<u32>())
        .max()
        .unwrap_or(0)
}

/// Exact `Tf`, reduced modulo `|x|² = |y|² = 1`, with the default degree cap.
pub fn xi_symbolic(f: &BiPoly) -> Result<BiPoly> {
    xi_symbolic_with_cap(f, DEFAULT_DEGREE_CAP)
}

pub fn xi_symbolic_with_cap(f: &BiPoly, cap: u32) -> Result<BiPoly> {
    let degree = expansion_degree(f);
    if degree > cap {
        return Err(Error::DegreeCapExceeded { degree, cap });
    }
    let mut out = MultiPoly::zero(8);
    for (e, c) in f.poly().terms() {
        let t = monomial_transform([e[0], e[1], e[2], e[3]], [e[4], e[5], e[6], e[7]]);
        out.add_scaled(&t, c);
    }
    BiPoly::new(out)?.reduce()
}

/// The substitution `x ↦ xg`, `y ↦ gy` as images in 12 variables.
pub fn translation_images() -> Vec<Option<MultiPoly>> {
    let mut images = Vec::with_capacity(8);
    for (left, right) in [(Block::X, Block::G), (Block::G, Block::Y)] {
        for row in &HAMILTON {
            let mut p = MultiPoly::zero(12);
            for &(sign, s, t) in row {
                let mut e = Exponents::from_elem(0, 12);
                e[left.start + s] += 1;
                e[right.start + t] += 1;
                p.add_term(e, Rational::from_integer(BigInt::from(sign)));
            }
            images.push(Some(p));
        }
    }
    images
}

/// `Tf` by literal expansion: substitute into the 12-variable polynomial
/// `f(xg, gy)`, integrate the `g` block, reduce. Slow; used as a reference.
pub fn xi_symbolic_expanded(f: &BiPoly, cap: u32) -> Result<BiPoly> {
    let degree = expansion_degree(f);
    if degree > cap {
        return Err(Error::DegreeCapExceeded { degree, cap });
    }
    let expanded = f.poly().substitute_linear(&translation_images(), 12)?;
    let integrated = expanded.sphere_integral(Block::G)?;
    BiPoly::new(integrated.truncate_vars(8)?)?.reduce()
}

/// `T(Y_i ⊗ Y_j) = 0` for every basis pair of the block `(k, l)`.
pub fn annihilates_block(k: usize, l: usize) -> Result<bool> {
    let (bk, bl) = (harmonic_basis(k as u32), harmonic_basis(l as u32));
    let pairs: Vec<(usize, usize)> =
        (0..bk.dimension()).flat_map(|i| (0..bl.dimension()).map(move |j| (i, j))).collect();
    let results: Vec<bool> = pairs
        .into_par_iter()
        .map(|(i, j)| {
            let f = BiPoly::tensor(&bk.elements()[i], &bl.elements()[j]);
            xi_symbolic(&f).map(|t| t.poly().is_zero())
        })
        .collect::<Result<_>>()?;
    Ok(results.into_iter().all(|z| z))
}
