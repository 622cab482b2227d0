//! The block `H_k ⊗ H_k` matrix of `T`, the eigenvalue `λ_k = 1/(k+1)` and
//! the reflection `R_k = (k+1) T`.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use nalgebra::{DMatrix, SymmetricEigen};
use num_traits::Zero;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::harmonics::harmonic_basis;
use crate::matrix::Matrix;
use crate::product::{analyze, block_dim, BiPoly};
use crate::scalar::{int, rat, Rational, RationalJson, Scalar};

use super::symbolic::xi_symbolic;

/// Blocks above this degree are handled by the float realization only.
pub const EXACT_REFLECTION_CAP: usize = 3;

/// Gram weights `‖Y_i‖² ‖Y_j‖²` of the flattened block `(k, l)`.
pub fn block_gram<S: Scalar>(k: usize, l: usize) -> Vec<S> {
    let gk = harmonic_basis(k as u32);
    let gl = harmonic_basis(l as u32);
    let mut out = Vec::with_capacity(block_dim(k) * block_dim(l));
    for a in gk.gram_diag() {
        for b in gl.gram_diag() {
            out.push(S::from_rational(&(a * b)));
        }
    }
    out
}

/// `G M = Mᵀ G` for the diagonal Gram matrix `G`.
pub fn is_gram_self_adjoint(m: &Matrix<Rational>, gram: &[Rational]) -> bool {
    (0..m.rows()).all(|r| (r..m.cols()).all(|c| &gram[r] * m.get(r, c) == &gram[c] * m.get(c, r)))
}

/// `D M D⁻¹` with `D = diag(√gram)`: the matrix in an orthonormal basis.
pub fn orthonormal_form(m: &Matrix<f64>, gram: &[f64]) -> Matrix<f64> {
    let s: Vec<f64> = gram.iter().map(|g| g.sqrt()).collect();
    Matrix::from_fn(m.rows(), m.cols(), |r, c| s[r] * m.get(r, c) / s[c])
}

/// Counts of eigenvalues near `+λ` and `-λ` of a Gram-self-adjoint matrix.
pub fn eigen_multiplicities(m: &Matrix<f64>, gram: &[f64], lambda: f64) -> (usize, usize) {
    let o = orthonormal_form(m, gram);
    let n = o.rows();
    let sym = DMatrix::from_fn(n, n, |r, c| 0.5 * (o.get(r, c) + o.get(c, r)));
    let eig = SymmetricEigen::new(sym);
    let tol = 1e-8 * lambda.max(1.0);
    let plus = eig.eigenvalues.iter().filter(|v| (*v - lambda).abs() < tol).count();
    let minus = eig.eigenvalues.iter().filter(|v| (*v + lambda).abs() < tol).count();
    (plus, minus)
}

#[derive(Clone, Debug, Serialize)]
pub struct ReflectionVerdicts {
    pub t_squared: bool,
    pub involution: bool,
    pub self_adjoint: bool,
}

impl ReflectionVerdicts {
    pub fn all(&self) -> bool {
        self.t_squared && self.involution && self.self_adjoint
    }
}

/// `T` restricted to `H_k ⊗ H_k` in the basis `Y_i ⊗ Y_j` (flattened as
/// `i·(k+1)² + j`), with its reflection and verdicts.
#[derive(Clone, Debug)]
pub struct BlockOperatorReport {
    pub degree: usize,
    pub matrix_t: Matrix<Rational>,
    pub lambda: Rational,
    pub matrix_r: Matrix<Rational>,
    pub verdicts: ReflectionVerdicts,
    /// Eigenvalue counts of `T` at `+λ` and `-λ`.
    pub eigen_multiplicities: (usize, usize),
}

impl BlockOperatorReport {
    /// Verdicts for a given block matrix of `T`.
    pub fn from_matrix(k: usize, matrix_t: Matrix<Rational>) -> Result<Self> {
        let d = block_dim(k) * block_dim(k);
        if matrix_t.rows() != d || matrix_t.cols() != d {
            return Err(Error::Shape(format!("block {k} needs a {d}x{d} matrix")));
        }
        let lambda = rat(1, k as i64 + 1);
        let matrix_r = matrix_t.scale(&int(k as i64 + 1));
        let r2 = matrix_r.matmul(&matrix_r)?;
        let involution = r2.is_identity();
        // T² = λ² Id  ⟺  R² = Id, but check it on T directly
        let t2 = matrix_t.matmul(&matrix_t)?;
        let l2 = &lambda * &lambda;
        let t_squared = (0..d).all(|r| {
            (0..d).all(|c| if r == c { t2.get(r, c) == &l2 } else { t2.get(r, c).is_zero() })
        });
        let gram = block_gram::<Rational>(k, k);
        let self_adjoint = is_gram_self_adjoint(&matrix_r, &gram);
        let gram_f: Vec<f64> = gram.iter().map(Scalar::to_f64).collect();
        let eigen_multiplicities = eigen_multiplicities(&matrix_t.to_f64(), &gram_f, lambda.to_f64());
        Ok(Self {
            degree: k,
            matrix_t,
            lambda,
            matrix_r,
            verdicts: ReflectionVerdicts { t_squared, involution, self_adjoint },
            eigen_multiplicities,
        })
    }

    pub fn to_json(&self) -> Value {
        json!({
            "degree": self.degree,
            "lambda": RationalJson(self.lambda.clone()),
            "matrix_T": self.matrix_t.to_json(),
            "matrix_R": self.matrix_r.to_json(),
            "verdicts": self.verdicts,
            "eigen_multiplicities": {
                "plus_lambda": self.eigen_multiplicities.0,
                "minus_lambda": self.eigen_multiplicities.1,
            },
        })
    }
}

/// Column `(i, j)` of `T` on `H_k ⊗ H_k`: coordinates of `T(Y_i ⊗ Y_j)`.
///
/// Fails with [`Error::NotBlockSupported`] if the image leaks outside the
/// block `(k, k)`.
fn column(k: usize, i: usize, j: usize) -> Result<Vec<Rational>> {
    let basis = harmonic_basis(k as u32);
    let f = BiPoly::tensor(&basis.elements()[i], &basis.elements()[j]);
    let image = xi_symbolic(&f)?;
    let coeffs = analyze(&image, k)?;
    for (&(a, b), m) in coeffs.blocks() {
        if (a, b) != (k, k) && !m.is_zero() {
            return Err(Error::NotBlockSupported(format!(
                "T(Y_{i} ⊗ Y_{j}) on block ({k},{k}) has a component in block ({a},{b})"
            )));
        }
    }
    Ok(coeffs.block(k, k)?.data().to_vec())
}

/// Exact `T` on `H_k ⊗ H_k`, column by column through [`xi_symbolic`].
pub fn block_matrix_symbolic(k: usize) -> Result<Matrix<Rational>> {
    let dk = block_dim(k);
    let columns: Vec<Vec<Rational>> = (0..dk * dk)
        .into_par_iter()
        .map(|c| column(k, c / dk, c % dk))
        .collect::<Result<_>>()?;
    Ok(Matrix::from_fn(dk * dk, dk * dk, |r, c| columns[c][r].clone()))
}

/// Computes and verifies the block report; any failed verdict is an error.
pub fn extract_reflection(k: usize) -> Result<BlockOperatorReport> {
    let report = BlockOperatorReport::from_matrix(k, block_matrix_symbolic(k)?)?;
    if !report.verdicts.all() {
        return Err(Error::VerificationFailed(format!(
            "reflection on block ({k},{k}): {:?}",
            report.verdicts
        )));
    }
    Ok(report)
}

fn reflection_cache() -> &'static RwLock<HashMap<usize, Arc<BlockOperatorReport>>> {
    static CACHE: OnceLock<RwLock<HashMap<usize, Arc<BlockOperatorReport>>>> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

/// Memoized [`extract_reflection`].
pub fn reflection(k: usize) -> Result<Arc<BlockOperatorReport>> {
    if let Some(r) = reflection_cache().read().unwrap().get(&k) {
        return Ok(r.clone());
    }
    let built = Arc::new(extract_reflection(k)?);
    Ok(reflection_cache().write().unwrap().entry(k).or_insert(built).clone())
}

/// A cached report, if it has been computed.
pub fn cached_reflection(k: usize) -> Option<Arc<BlockOperatorReport>> {
    reflection_cache().read().unwrap().get(&k).cloned()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;

    #[test]
    fn degree_zero_is_the_identity() {
        let r = reflection(0).unwrap();
        assert_eq!(r.matrix_t, Matrix::identity(1));
        assert_eq!(r.lambda, Rational::one());
        assert!(r.matrix_r.is_identity());
        assert_eq!(r.eigen_multiplicities, (1, 0));
    }

    #[test]
    fn degree_one_squares_to_a_quarter() {
        let r = reflection(1).unwrap();
        assert_eq!((r.matrix_t.rows(), r.matrix_t.cols()), (16, 16));
        assert_eq!(r.lambda, rat(1, 2));
        assert!(r.verdicts.all());
        let (p, m) = r.eigen_multiplicities;
        assert_eq!(p + m, 16);
    }

    #[test]
    fn degree_two_is_a_self_adjoint_involution() {
        let r = reflection(2).unwrap();
        assert_eq!(r.matrix_t.rows(), 81);
        assert!(r.matrix_r.matmul(&r.matrix_r).unwrap().is_identity());
        assert!(is_gram_self_adjoint(&r.matrix_r, &block_gram(2, 2)));
        let (p, m) = r.eigen_multiplicities;
        assert_eq!(p + m, 81);
    }

    #[test]
    fn a_perturbed_matrix_fails_the_verdicts() {
        let mut t = reflection(1).unwrap().matrix_t.clone();
        *t.get_mut(0, 1) += rat(1, 7);
        let report = BlockOperatorReport::from_matrix(1, t).unwrap();
        assert!(!report.verdicts.involution);
        assert!(!report.verdicts.t_squared);
    }

    #[test]
    fn report_json_has_exact_matrices() {
        let v = reflection(0).unwrap().to_json();
        assert_eq!(v["lambda"], json!([1, 1]));
        assert_eq!(v["matrix_T"], json!([[[1, 1]]]));
    }
}
