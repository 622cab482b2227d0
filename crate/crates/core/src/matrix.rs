//! Small dense row-major matrices over either numeric backend.

use rayon::prelude::*;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::scalar::{JsonScalar, Rational, Scalar};

#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<S> {
    rows: usize,
    cols: usize,
    data: Vec<S>,
}

impl<S: Scalar> Matrix<S> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![S::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = S::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<S>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Shape("ragged rows".into()));
        }
        Ok(Self { rows: r, cols: c, data: rows.into_iter().flatten().collect() })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> S) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &S {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: S) {
        self.data[i * self.cols + j] = v;
    }

    pub fn get_mut(&mut self, i: usize, j: usize) -> &mut S {
        &mut self.data[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[S] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn data(&self) -> &[S] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [S] {
        &mut self.data
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(num_traits::Zero::is_zero)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(Scalar::magnitude).fold(0.0, f64::max)
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    pub fn scale(&self, c: &S) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|v| v.clone() * c.clone()).collect() }
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> Matrix<T> {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(f).collect() }
    }

    pub fn add(&self, rhs: &Self) -> Result<Self> {
        self.same_shape(rhs)?;
        let data = self.data.iter().zip(&rhs.data).map(|(a, b)| a.clone() + b.clone()).collect();
        Ok(Self { rows: self.rows, cols: self.cols, data })
    }

    pub fn sub(&self, rhs: &Self) -> Result<Self> {
        self.same_shape(rhs)?;
        let data = self.data.iter().zip(&rhs.data).map(|(a, b)| a.clone() - b.clone()).collect();
        Ok(Self { rows: self.rows, cols: self.cols, data })
    }

    fn same_shape(&self, rhs: &Self) -> Result<()> {
        if (self.rows, self.cols) != (rhs.rows, rhs.cols) {
            return Err(Error::Shape(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        Ok(())
    }

    /// Matrix product; rows are computed in parallel and zero entries skipped.
    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::Shape(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let n = rhs.cols;
        let data: Vec<S> = (0..self.rows)
            .into_par_iter()
            .flat_map_iter(|i| {
                let mut row = vec![S::zero(); n];
                for (k, a) in self.row(i).iter().enumerate() {
                    if a.is_zero() {
                        continue;
                    }
                    for (out, b) in row.iter_mut().zip(rhs.row(k)) {
                        out.add_product(a, b);
                    }
                }
                row
            })
            .collect();
        Ok(Self { rows: self.rows, cols: n, data })
    }

    pub fn matvec(&self, v: &[S]) -> Result<Vec<S>> {
        if v.len() != self.cols {
            return Err(Error::Shape(format!("vector of length {} for {} columns", v.len(), self.cols)));
        }
        Ok((0..self.rows)
            .map(|i| {
                let mut acc = S::zero();
                for (a, b) in self.row(i).iter().zip(v) {
                    acc.add_product(a, b);
                }
                acc
            })
            .collect())
    }

    pub fn to_f64(&self) -> Matrix<f64> {
        self.map(|v| v.to_f64())
    }

    pub fn trace(&self) -> S {
        let mut acc = S::zero();
        for i in 0..self.rows.min(self.cols) {
            acc = acc + self.get(i, i).clone();
        }
        acc
    }
}

impl<S: JsonScalar> Matrix<S> {
    pub fn to_json(&self) -> Value {
        Value::Array(
            (0..self.rows)
                .map(|i| Value::Array(self.row(i).iter().map(JsonScalar::to_json).collect()))
                .collect(),
        )
    }

    pub fn from_json(value: &Value) -> Result<Self> {
        let rows = value.as_array().ok_or_else(|| Error::Parse("matrix must be an array of rows".into()))?;
        let mut parsed = Vec::with_capacity(rows.len());
        for row in rows {
            let row = row.as_array().ok_or_else(|| Error::Parse("matrix row must be an array".into()))?;
            let mut out = Vec::with_capacity(row.len());
            for v in row {
                out.push(S::from_json(v).map_err(Error::Parse)?);
            }
            parsed.push(out);
        }
        Self::from_rows(parsed)
    }
}

impl Matrix<Rational> {
    pub fn is_identity(&self) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|i| {
                self.row(i)
                    .iter()
                    .enumerate()
                    .all(|(j, v)| if i == j { *v == Rational::from_i64(1) } else { num_traits::Zero::is_zero(v) })
            })
    }
}

impl Matrix<f64> {
    /// Largest entrywise deviation from the identity.
    pub fn identity_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.rows {
            for j in 0..self.cols {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((self.get(i, j) - target).abs());
            }
        }
        worst
    }

    /// Spectral norm by power iteration on `A^T A`.
    pub fn spectral_norm(&self, iterations: usize) -> f64 {
        if self.rows == 0 || self.cols == 0 {
            return 0.0;
        }
        let at = self.transpose();
        let mut v: Vec<f64> = (0..self.cols).map(|i| 1.0 + (i as f64 * 0.618).fract()).collect();
        let mut sigma = 0.0;
        for _ in 0..iterations {
            let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if n == 0.0 {
                return 0.0;
            }
            v.iter_mut().for_each(|x| *x /= n);
            let av = self.matvec(&v).expect("shape");
            let w = at.matvec(&av).expect("shape");
            sigma = av.iter().map(|x| x * x).sum::<f64>().sqrt();
            v = w;
        }
        sigma
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    #[test]
    fn exact_product_and_identity() {
        let a = Matrix::from_rows(vec![vec![rat(0, 1), rat(1, 1)], vec![rat(1, 1), rat(0, 1)]]).unwrap();
        assert!(a.matmul(&a).unwrap().is_identity());
        let b = Matrix::from_rows(vec![vec![rat(1, 2), rat(1, 3)]]).unwrap();
        assert!(b.matmul(&b).is_err());
        assert_eq!(b.transpose().rows(), 2);
    }

    #[test]
    fn spectral_norm_of_reflection_is_one() {
        let c = (0.3f64).cos();
        let s = (0.3f64).sin();
        let r = Matrix::from_rows(vec![vec![c, s], vec![s, -c]]).unwrap();
        assert!((r.spectral_norm(20) - 1.0).abs() < 1e-12);
        let d = Matrix::from_rows(vec![vec![3.0, 0.0], vec![0.0, -0.5]]).unwrap();
        assert!((d.spectral_norm(50) - 3.0).abs() < 1e-9);
    }
}
