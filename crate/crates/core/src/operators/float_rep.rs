//! Float realization of `T` through the translation representations.
//!
//! With `Y_i(xg) = Σ_p A_{pi}(g) Y_p(x)` and `Y_j(gy) = Σ_q B_{qj}(g) Y_q(y)`,
//! the block of `T` from `H_k ⊗ H_l` to itself is `∫ A_k(g) ⊗ B_l(g) dg`,
//! integrated with a product rule exact in degree `k + l`.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::harmonics::harmonic_basis;
use crate::matrix::Matrix;
use crate::poly::monomials4;
use crate::product::block_dim;
use crate::quadrature::rule_for_degree;
use crate::quaternion::Quat;
use crate::scalar::Scalar;

use super::symbolic::HAMILTON;

/// Which side a group element translates on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    /// `x ↦ x g`
    Right,
    /// `y ↦ g y`
    Left,
}

/// The action of S3 on `H_k` by translation, in basis coordinates.
#[derive(Clone, Debug)]
pub struct TranslationRep {
    degree: usize,
    /// `monomials[d]`: degree-`d` monomials; `raise[d][m][s]` indexes `m + e_s`.
    monomials: Vec<Vec<[u8; 4]>>,
    raise: Vec<Vec<[usize; 4]>>,
    /// `dual[p][a] = ⟨v^a, Y_p⟩ / ‖Y_p‖²` over degree-`k` monomials.
    dual: Matrix<f64>,
    /// `coeffs[i][b]`: coefficient of `v^b` in `Y_i`.
    coeffs: Matrix<f64>,
}

impl TranslationRep {
    pub fn new(k: usize) -> Self {
        let basis = harmonic_basis(k as u32);
        let monomials: Vec<Vec<[u8; 4]>> = (0..=k as u32).map(monomials4).collect();
        let index: Vec<HashMap<[u8; 4], usize>> = monomials
            .iter()
            .map(|ms| ms.iter().enumerate().map(|(i, m)| (*m, i)).collect())
            .collect();
        let raise = (0..k)
            .map(|d| {
                monomials[d]
                    .iter()
                    .map(|m| {
                        let mut out = [0; 4];
                        for (s, o) in out.iter_mut().enumerate() {
                            let mut up = *m;
                            up[s] += 1;
                            *o = index[d + 1][&up];
                        }
                        out
                    })
                    .collect()
            })
            .collect();
        let top = &monomials[k];
        let d = basis.dimension();
        let duals: Vec<_> = top.iter().map(|a| basis.dual_coefficients(*a)).collect();
        let dual = Matrix::from_fn(d, top.len(), |p, a| duals[a][p].to_f64());
        debug_assert_eq!(basis.monomials(), top.as_slice());
        let coeffs = Matrix::from_fn(d, top.len(), |i, b| basis.coefficients()[i][b].to_f64());
        Self { degree: k, monomials, raise, dual, coeffs }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn dimension(&self) -> usize {
        self.dual.rows()
    }

    /// `S[a][b]`: coefficient of `v^a` in `Π_r L_r(v)^{b_r}` for degree-`k`
    /// monomials `a`, `b`, where `L_r` are the coordinates of the translated
    /// point as linear forms in `v`.
    fn substitution(&self, forms: &[[f64; 4]; 4]) -> Matrix<f64> {
        let k = self.degree;
        let n = self.monomials[k].len();
        let mut out = Matrix::zeros(n, n);
        for (col, b) in self.monomials[k].iter().enumerate() {
            let mut poly = vec![1.0];
            let mut d = 0;
            for (r, &times) in b.iter().enumerate() {
                for _ in 0..times {
                    let mut next = vec![0.0; self.monomials[d + 1].len()];
                    for (m, c) in poly.iter().enumerate() {
                        if *c == 0.0 {
                            continue;
                        }
                        for s in 0..4 {
                            next[self.raise[d][m][s]] += c * forms[r][s];
                        }
                    }
                    poly = next;
                    d += 1;
                }
            }
            for (row, c) in poly.into_iter().enumerate() {
                out.set(row, col, c);
            }
        }
        out
    }

    /// The representation matrix for translation by `g` on the given side.
    pub fn matrix(&self, g: &Quat, side: Side) -> Matrix<f64> {
        let ga = g.to_array();
        let mut forms = [[0.0; 4]; 4];
        for (r, row) in HAMILTON.iter().enumerate() {
            for &(sign, s, t) in row {
                match side {
                    Side::Right => forms[r][s] += sign as f64 * ga[t],
                    Side::Left => forms[r][t] += sign as f64 * ga[s],
                }
            }
        }
        let sub = self.substitution(&forms);
        let images = sub.matmul(&self.coeffs.transpose()).expect("shape");
        self.dual.matmul(&images).expect("shape")
    }
}

fn rep_cache() -> &'static RwLock<HashMap<usize, Arc<TranslationRep>>> {
    static CACHE: OnceLock<RwLock<HashMap<usize, Arc<TranslationRep>>>> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

pub fn translation_rep(k: usize) -> Arc<TranslationRep> {
    if let Some(r) = rep_cache().read().unwrap().get(&k) {
        return r.clone();
    }
    let built = Arc::new(TranslationRep::new(k));
    rep_cache().write().unwrap().entry(k).or_insert(built).clone()
}

type NodePair = (Matrix<f64>, Matrix<f64>);

/// Representation matrices at every node of a rule exact in degree `k + l`.
fn node_matrices(k: usize, l: usize) -> (Vec<f64>, Vec<NodePair>) {
    let rule = rule_for_degree((k + l) as u32);
    let (rk, rl) = (translation_rep(k), translation_rep(l));
    let mats = rule.nodes.iter().map(|g| (rk.matrix(g, Side::Right), rl.matrix(g, Side::Left))).collect();
    (rule.weights.clone(), mats)
}

/// `∫ A_k(g) C B_l(g)ᵀ dg`: the float image of a block `(k, l)` coefficient
/// matrix `C` under `T`.
pub fn float_block_apply(k: usize, l: usize, c: &Matrix<f64>) -> Matrix<f64> {
    let (weights, mats) = node_matrices(k, l);
    let mut out = Matrix::zeros(block_dim(k), block_dim(l));
    for (w, (a, b)) in weights.iter().zip(&mats) {
        let term = a.matmul(c).expect("shape").matmul(&b.transpose()).expect("shape");
        for (o, t) in out.data_mut().iter_mut().zip(term.data()) {
            *o += w * t;
        }
    }
    out
}

/// The full float matrix `∫ A_k ⊗ B_l dg` of `T` on block `(k, l)`, with
/// rows and columns flattened as `i·(l+1)² + j`.
pub fn float_block_matrix(k: usize, l: usize) -> Matrix<f64> {
    let (dk, dl) = (block_dim(k), block_dim(l));
    let n = dk * dl;
    let (weights, mats) = node_matrices(k, l);
    let mut out = Matrix::zeros(n, n);
    let data = out.data_mut();
    for (w, (a, b)) in weights.iter().zip(&mats) {
        let bw: Vec<f64> = b.data().iter().map(|v| v * w).collect();
        for p in 0..dk {
            for i in 0..dk {
                let api = *a.get(p, i);
                if api == 0.0 {
                    continue;
                }
                for q in 0..dl {
                    let row = (p * dl + q) * n + i * dl;
                    let brow = &bw[q * dl..(q + 1) * dl];
                    for (o, bv) in data[row..row + dl].iter_mut().zip(brow) {
                        *o += api * bv;
                    }
                }
            }
        }
    }
    out
}

/// `tr ∫ A_k ⊗ B_k dg = ∫ tr A_k(g) tr B_k(g) dg`.
pub fn float_block_trace(k: usize) -> f64 {
    let (weights, mats) = node_matrices(k, k);
    weights.iter().zip(&mats).map(|(w, (a, b))| w * a.trace() * b.trace()).sum()
}

fn float_cache() -> &'static RwLock<HashMap<usize, Arc<Matrix<f64>>>> {
    static CACHE: OnceLock<RwLock<HashMap<usize, Arc<Matrix<f64>>>>> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

/// Memoized float matrix of `T` on `H_k ⊗ H_k`.
pub fn float_transform(k: usize) -> Arc<Matrix<f64>> {
    if let Some(m) = float_cache().read().unwrap().get(&k) {
        return m.clone();
    }
    let built = Arc::new(float_block_matrix(k, k));
    float_cache().write().unwrap().entry(k).or_insert(built).clone()
}

/// Float shadow of the block report: `T² = λ² Id` on probe vectors,
/// Gram symmetry of `T`, and eigenvalue counts from the trace.
#[derive(Clone, Debug, Serialize)]
pub struct FloatReflectionReport {
    pub degree: usize,
    pub lambda: f64,
    /// `max |(k+1)² T² v − v|_∞ / |v|_∞` over probe vectors.
    pub t_squared_defect: f64,
    /// `max |g_r T_rc − g_c T_cr| / max |g_r T_rc|`.
    pub self_adjoint_defect: f64,
    pub trace: f64,
    /// Counts of `+λ` and `-λ` from `n₊ + n₋ = dim` and `λ (n₊ − n₋) = tr T`.
    pub eigen_multiplicities: (usize, usize),
    pub tolerance: f64,
    pub passed: bool,
}

pub fn float_reflection_check(k: usize, probes: usize, seed: u64, tolerance: f64) -> FloatReflectionReport {
    let t = float_transform(k);
    let n = t.rows();
    let scale = ((k + 1) * (k + 1)) as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t_squared_defect: f64 = 0.0;
    for _ in 0..probes {
        let v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let tv = t.matvec(&v).expect("shape");
        let ttv = t.matvec(&tv).expect("shape");
        let vmax = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let err = ttv.iter().zip(&v).fold(0.0f64, |m, (a, b)| m.max((scale * a - b).abs()));
        t_squared_defect = t_squared_defect.max(err / vmax);
    }
    let gram = super::reflection::block_gram::<f64>(k, k);
    let mut asym: f64 = 0.0;
    let mut size: f64 = 0.0;
    for r in 0..n {
        for c in 0..n {
            let a = gram[r] * t.get(r, c);
            size = size.max(a.abs());
            if c > r {
                asym = asym.max((a - gram[c] * t.get(c, r)).abs());
            }
        }
    }
    let self_adjoint_defect = if size == 0.0 { 0.0 } else { asym / size };
    let trace = float_block_trace(k);
    let lambda = 1.0 / (k + 1) as f64;
    let diff = (trace / lambda).round() as i64;
    let plus = ((n as i64 + diff) / 2) as usize;
    FloatReflectionReport {
        degree: k,
        lambda,
        t_squared_defect,
        self_adjoint_defect,
        trace,
        eigen_multiplicities: (plus, n - plus),
        tolerance,
        passed: t_squared_defect <= tolerance && self_adjoint_defect <= tolerance,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quaternion::haar_sample;

    fn max_diff(a: &Matrix<f64>, b: &Matrix<f64>) -> f64 {
        a.sub(b).unwrap().max_abs()
    }

    #[test]
    fn representations_are_homomorphisms() {
        let qs = haar_sample(5, 2);
        for k in 0..=3 {
            let rep = translation_rep(k);
            let (g, h) = (&qs[0], &qs[1]);
            // Y(x g h) = Σ A(h) applied after A(g): A(gh) = A(g) A(h)
            let right = rep.matrix(g, Side::Right).matmul(&rep.matrix(h, Side::Right)).unwrap();
            assert!(max_diff(&right, &rep.matrix(&g.mul(h), Side::Right)) < 1e-12, "k={k}");
            let left = rep.matrix(h, Side::Left).matmul(&rep.matrix(g, Side::Left)).unwrap();
            assert!(max_diff(&left, &rep.matrix(&g.mul(h), Side::Left)) < 1e-12, "k={k}");
            let e = rep.matrix(&Quat::identity(), Side::Right);
            assert!(e.identity_defect() < 1e-14);
        }
    }

    #[test]
    fn representation_reproduces_translated_harmonics() {
        let qs = haar_sample(8, 3);
        let (g, x) = (&qs[0], &qs[1]);
        let k = 2;
        let basis = harmonic_basis(k as u32);
        let a = translation_rep(k).matrix(g, Side::Right);
        for i in 0..basis.dimension() {
            let lhs = basis.elements()[i].eval(&x.mul(g).to_array());
            let rhs: f64 = (0..basis.dimension()).map(|p| a.get(p, i) * basis.elements()[p].eval(&x.to_array())).sum();
            assert!((lhs - rhs).abs() < 1e-12);
        }
    }

    #[test]
    fn off_diagonal_blocks_vanish_in_float() {
        for (k, l) in [(0, 1), (1, 2), (2, 1), (0, 2), (1, 3)] {
            let m = float_block_matrix(k, l);
            assert!(m.max_abs() < 1e-12, "({k},{l}) {}", m.max_abs());
        }
    }

    #[test]
    fn float_reflections_match_exact_multiplicities() {
        for k in 0..=3 {
            let f = float_reflection_check(k, 3, 1, 1e-9);
            assert!(f.passed, "{f:?}");
            let exact = super::super::reflection::reflection(k).unwrap();
            assert_eq!(f.eigen_multiplicities, exact.eigen_multiplicities);
        }
    }

    #[test]
    fn apply_matches_full_matrix() {
        let k = 2;
        let d = block_dim(k);
        let c = Matrix::from_fn(d, d, |i, j| ((i * 7 + j * 3) % 5) as f64 - 2.0);
        let full = float_transform(k).matvec(c.data()).unwrap();
        let applied = float_block_apply(k, k, &c);
        for (a, b) in full.iter().zip(applied.data()) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
