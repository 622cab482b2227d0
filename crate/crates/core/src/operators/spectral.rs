//! `T` as a block multiplier: zero on `H_k ⊗ H_l` for `k ≠ l`, the matrix
//! `(k+1)⁻¹ R_k` on `H_k ⊗ H_k`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::product::{block_dim, SpectralCoeffs};
use crate::scalar::{Rational, Scalar};

use super::float_rep::float_transform;
use super::reflection::{cached_reflection, reflection, EXACT_REFLECTION_CAP};

/// Diagonal-block matrices of `T` for `k = 0..=N`.
#[derive(Clone, Debug)]
pub struct TransformTable<S> {
    blocks: Vec<Arc<Matrix<S>>>,
}

impl<S: Scalar> TransformTable<S> {
    pub fn from_blocks(blocks: Vec<Matrix<S>>) -> Result<Self> {
        for (k, m) in blocks.iter().enumerate() {
            let d = block_dim(k) * block_dim(k);
            if m.rows() != d || m.cols() != d {
                return Err(Error::Shape(format!("transform for block ({k},{k}) must be {d}x{d}")));
            }
        }
        Ok(Self { blocks: blocks.into_iter().map(Arc::new).collect() })
    }

    /// Highest degree covered, or `None` for an empty table.
    pub fn truncation(&self) -> Option<usize> {
        self.blocks.len().checked_sub(1)
    }

    pub fn block(&self, k: usize) -> Result<&Matrix<S>> {
        self.blocks.get(k).map(|m| m.as_ref()).ok_or(Error::MissingTransform(k))
    }

    /// `T` applied to a single `(k, k)` coefficient block.
    pub fn apply_block(&self, k: usize, c: &Matrix<S>) -> Result<Matrix<S>> {
        let v = self.block(k)?.matvec(c.data())?;
        let d = block_dim(k);
        Ok(Matrix::from_fn(d, d, |i, j| v[i * d + j].clone()))
    }
}

impl TransformTable<Rational> {
    /// Exact tables from the reflection cache, computing missing entries up
    /// to the exact cap.
    pub fn exact(n: usize) -> Result<Self> {
        let blocks = (0..=n)
            .map(|k| match cached_reflection(k) {
                Some(r) => Ok(Arc::new(r.matrix_t.clone())),
                None if k <= EXACT_REFLECTION_CAP => Ok(Arc::new(reflection(k)?.matrix_t.clone())),
                None => Err(Error::MissingTransform(k)),
            })
            .collect::<Result<_>>()?;
        Ok(Self { blocks })
    }

    /// Exact tables for any `k`, ignoring the cap.
    pub fn exact_uncapped(n: usize) -> Result<Self> {
        let blocks = (0..=n).map(|k| Ok(Arc::new(reflection(k)?.matrix_t.clone()))).collect::<Result<_>>()?;
        Ok(Self { blocks })
    }
}

impl TransformTable<f64> {
    pub fn float(n: usize) -> Self {
        Self { blocks: (0..=n).map(float_transform).collect() }
    }
}

/// `T c` for spectral data `c` using the given table.
pub fn xi_spectral_with<S: Scalar>(c: &SpectralCoeffs<S>, table: &TransformTable<S>) -> Result<SpectralCoeffs<S>> {
    c.try_map_blocks(|k, l, m| {
        if k != l || m.is_zero() {
            return Ok(Matrix::zeros(m.rows(), m.cols()));
        }
        table.apply_block(k, m)
    })
}

/// `T c` with exact tables up to the truncation of `c`.
pub fn xi_spectral(c: &SpectralCoeffs<Rational>) -> Result<SpectralCoeffs<Rational>> {
    xi_spectral_with(c, &TransformTable::exact(c.truncation())?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::product::{analyze, random_bipoly, random_spectral, Support};
    use crate::scalar::rat;

    use super::super::symbolic::xi_symbolic;

    #[test]
    fn off_diagonal_input_is_killed() {
        let mut c = SpectralCoeffs::zeros(2);
        c.set_block(1, 2, Matrix::from_fn(4, 9, |i, j| rat(i as i64 - j as i64, 3))).unwrap();
        assert!(xi_spectral(&c).unwrap().is_zero());
    }

    #[test]
    fn constant_block_is_unchanged() {
        let mut c = SpectralCoeffs::zeros(1);
        c.set_block(0, 0, Matrix::from_rows(vec![vec![rat(5, 2)]]).unwrap()).unwrap();
        assert_eq!(xi_spectral(&c).unwrap(), c);
    }

    #[test]
    fn spectral_matches_symbolic_on_random_inputs() {
        for seed in 0..6 {
            let f = random_bipoly(2, 5, seed);
            let lhs = xi_spectral(&analyze(&f, 2).unwrap()).unwrap();
            let rhs = analyze(&xi_symbolic(&f).unwrap(), 2).unwrap();
            assert_eq!(lhs, rhs, "seed {seed}");
        }
    }

    #[test]
    fn float_table_shadows_exact_table() {
        let c = random_spectral(2, Support::All, 4);
        let exact = xi_spectral(&c).unwrap().to_f64();
        let float = xi_spectral_with(&c.to_f64(), &TransformTable::float(2)).unwrap();
        assert!(exact.max_abs_diff(&float).unwrap() < 1e-12);
    }

    #[test]
    fn missing_blocks_are_reported() {
        let table = TransformTable::<f64>::from_blocks(vec![Matrix::identity(1)]).unwrap();
        let c = SpectralCoeffs::<f64>::zeros(1).map_blocks(|_, _, m| m.map(|_| 1.0));
        assert!(matches!(xi_spectral_with(&c, &table), Err(Error::MissingTransform(1))));
    }
}
