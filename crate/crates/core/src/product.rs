//! Spectral data on S3 × S3: bipolynomials, the blocks H_k ⊗ H_l,
//! analysis/synthesis, the projections E_{k,l} and truncated Sobolev norms.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::harmonics::{harmonic_basis, reduce_to_sphere, HarmonicBasis};
use crate::matrix::Matrix;
use crate::poly::{Block, Exponents, MultiPoly};
use crate::quaternion::Quat;
use crate::scalar::{rat, JsonScalar, Rational, Scalar};

/// A polynomial in the 8 variables `(x, y)` of R^4 × R^4.
#[derive(Clone, Debug, PartialEq)]
pub struct BiPoly(MultiPoly);

impl BiPoly {
    pub fn new(p: MultiPoly) -> Result<Self> {
        if p.nvars() != 8 {
            return Err(Error::InconsistentVariables(format!(
                "a function on S3 x S3 needs 8 variables, got {}",
                p.nvars()
            )));
        }
        Ok(Self(p))
    }

    pub fn zero() -> Self {
        Self(MultiPoly::zero(8))
    }

    /// `u(x) v(y)` for polynomials `u`, `v` on R^4.
    pub fn tensor(u: &MultiPoly, v: &MultiPoly) -> Self {
        let mut out = MultiPoly::zero(8);
        for (a, ca) in u.terms() {
            for (b, cb) in v.terms() {
                let e: Exponents = a.iter().chain(b.iter()).copied().collect();
                out.add_product_term(e, ca, cb);
            }
        }
        Self(out)
    }

    pub fn poly(&self) -> &MultiPoly {
        &self.0
    }

    pub fn into_poly(self) -> MultiPoly {
        self.0
    }

    pub fn x_degree(&self) -> u32 {
        self.0.block_degree(Block::X)
    }

    pub fn y_degree(&self) -> u32 {
        self.0.block_degree(Block::Y)
    }

    /// Canonical representative modulo `|x|² = |y|² = 1`.
    pub fn reduce(&self) -> Result<Self> {
        let p = reduce_to_sphere(&self.0, Block::X)?;
        Ok(Self(reduce_to_sphere(&p, Block::Y)?))
    }

    pub fn eval(&self, x: &Quat, y: &Quat) -> f64 {
        self.0.eval(&[x.w, x.x, x.y, x.z, y.w, y.x, y.y, y.z])
    }

    /// `∫∫ f h dx dy` over S3 × S3.
    pub fn inner(&self, other: &BiPoly) -> Result<Rational> {
        let prod = &self.0 * &other.0;
        let p = prod.sphere_integral(Block::X)?.sphere_integral(Block::Y)?;
        Ok(p.as_constant().expect("both blocks integrated"))
    }
}

pub fn block_dim(k: usize) -> usize {
    (k + 1) * (k + 1)
}

/// Sobolev weight `1 + k(k+2) + l(l+2)` of the block H_k ⊗ H_l.
pub fn sobolev_weight(k: usize, l: usize) -> u64 {
    1 + (k * (k + 2) + l * (l + 2)) as u64
}

/// Truncated double series `Σ a_{kl,ij} Y_i ⊗ Y_j` over blocks `k, l ≤ N`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralCoeffs<S> {
    truncation: usize,
    blocks: BTreeMap<(usize, usize), Matrix<S>>,
}

impl SpectralCoeffs<Rational> {
    /// The same data in another numeric backend.
    pub fn to_scalar<T: Scalar>(&self) -> SpectralCoeffs<T> {
        SpectralCoeffs {
            truncation: self.truncation,
            blocks: self.blocks.iter().map(|(key, m)| (*key, m.map(T::from_rational))).collect(),
        }
    }
}

/// Gram weights `‖Y_i‖²` of each basis, as scalars of the given backend.
pub fn gram_weights<S: Scalar>(n: usize) -> Vec<Vec<S>> {
    (0..=n)
        .map(|k| harmonic_basis(k as u32).gram_diag().iter().map(S::from_rational).collect())
        .collect()
}

impl<S: Scalar> SpectralCoeffs<S> {
    pub fn zeros(n: usize) -> Self {
        let mut blocks = BTreeMap::new();
        for k in 0..=n {
            for l in 0..=n {
                blocks.insert((k, l), Matrix::zeros(block_dim(k), block_dim(l)));
            }
        }
        Self { truncation: n, blocks }
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    fn check_range(&self, k: usize, l: usize) -> Result<()> {
        if k > self.truncation || l > self.truncation {
            return Err(Error::BlockOutOfRange { k, l, n: self.truncation });
        }
        Ok(())
    }

    pub fn block(&self, k: usize, l: usize) -> Result<&Matrix<S>> {
        self.check_range(k, l)?;
        Ok(&self.blocks[&(k, l)])
    }

    pub fn block_mut(&mut self, k: usize, l: usize) -> Result<&mut Matrix<S>> {
        self.check_range(k, l)?;
        Ok(self.blocks.get_mut(&(k, l)).expect("all blocks present"))
    }

    pub fn set_block(&mut self, k: usize, l: usize, m: Matrix<S>) -> Result<()> {
        self.check_range(k, l)?;
        if (m.rows(), m.cols()) != (block_dim(k), block_dim(l)) {
            return Err(Error::Shape(format!(
                "block ({k}, {l}) must be {}x{}, got {}x{}",
                block_dim(k),
                block_dim(l),
                m.rows(),
                m.cols()
            )));
        }
        self.blocks.insert((k, l), m);
        Ok(())
    }

    pub fn blocks(&self) -> impl Iterator<Item = (&(usize, usize), &Matrix<S>)> {
        self.blocks.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.blocks.values().all(Matrix::is_zero)
    }

    /// Blocks `(k, l)` holding a nonzero coefficient.
    pub fn support(&self) -> Vec<(usize, usize)> {
        self.blocks.iter().filter(|(_, m)| !m.is_zero()).map(|(kl, _)| *kl).collect()
    }

    pub fn map_blocks(&self, mut f: impl FnMut(usize, usize, &Matrix<S>) -> Matrix<S>) -> Self {
        Self {
            truncation: self.truncation,
            blocks: self.blocks.iter().map(|(&(k, l), m)| ((k, l), f(k, l, m))).collect(),
        }
    }

    pub fn try_map_blocks(&self, mut f: impl FnMut(usize, usize, &Matrix<S>) -> Result<Matrix<S>>) -> Result<Self> {
        let mut blocks = BTreeMap::new();
        for (&(k, l), m) in &self.blocks {
            blocks.insert((k, l), f(k, l, m)?);
        }
        Ok(Self { truncation: self.truncation, blocks })
    }

    fn zip_with(&self, other: &Self, f: impl Fn(&Matrix<S>, &Matrix<S>) -> Result<Matrix<S>>) -> Result<Self> {
        if self.truncation != other.truncation {
            return Err(Error::Shape(format!(
                "truncations differ: {} vs {}",
                self.truncation, other.truncation
            )));
        }
        let mut blocks = BTreeMap::new();
        for (kl, m) in &self.blocks {
            blocks.insert(*kl, f(m, &other.blocks[kl])?);
        }
        Ok(Self { truncation: self.truncation, blocks })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, Matrix::add)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, Matrix::sub)
    }

    pub fn scale(&self, c: &S) -> Self {
        self.map_blocks(|_, _, m| m.scale(c))
    }

    /// `E_{k,l}`: keeps block `(k, l)` and zeroes the rest.
    pub fn project(&self, k: usize, l: usize) -> Result<Self> {
        self.check_range(k, l)?;
        Ok(self.map_blocks(|a, b, m| if (a, b) == (k, l) { m.clone() } else { Matrix::zeros(m.rows(), m.cols()) }))
    }

    /// Gram-weighted pairing `Σ a_{ij} b_{ij} ‖Y_i‖² ‖Y_j‖²`, i.e. the
    /// L2(S3 × S3) inner product of the synthesized functions.
    pub fn inner(&self, other: &Self) -> Result<S> {
        self.weighted_inner(other, 0)
    }

    /// Pairing with the extra Sobolev weight `w_{kl}^s` per block.
    pub fn weighted_inner(&self, other: &Self, s: u32) -> Result<S> {
        if self.truncation != other.truncation {
            return Err(Error::Shape("truncations differ".into()));
        }
        let grams = gram_weights::<S>(self.truncation);
        let mut total = S::zero();
        for (&(k, l), a) in &self.blocks {
            let b = &other.blocks[&(k, l)];
            let mut block_sum = S::zero();
            for i in 0..a.rows() {
                let mut row = S::zero();
                for ((x, y), g) in a.row(i).iter().zip(b.row(i)).zip(&grams[l]) {
                    row.add_product(&(x.clone() * y.clone()), g);
                }
                block_sum.add_product(&row, &grams[k][i]);
            }
            let w = S::from_i64(sobolev_weight(k, l) as i64);
            let mut ws = S::one();
            for _ in 0..s {
                ws = ws * w.clone();
            }
            total.add_product(&block_sum, &ws);
        }
        Ok(total)
    }

    /// `‖c‖²_{H^s}` for integer `s`, exact in the rational backend.
    pub fn sobolev_norm_sqr(&self, s: u32) -> S {
        self.weighted_inner(self, s).expect("same truncation")
    }

    /// `(Σ w_{kl}^s ‖a_{kl}‖²)^{1/2}` with `w_{kl} = 1 + k(k+2) + l(l+2)`.
    pub fn sobolev_norm(&self, s: f64) -> f64 {
        let grams = gram_weights::<f64>(self.truncation);
        let mut total = 0.0;
        for (&(k, l), a) in &self.blocks {
            let mut block_sum = 0.0;
            for i in 0..a.rows() {
                for j in 0..a.cols() {
                    let v = a.get(i, j).to_f64();
                    block_sum += v * v * grams[k][i] * grams[l][j];
                }
            }
            total += (sobolev_weight(k, l) as f64).powf(s) * block_sum;
        }
        total.sqrt()
    }

    pub fn to_f64(&self) -> SpectralCoeffs<f64> {
        SpectralCoeffs {
            truncation: self.truncation,
            blocks: self.blocks.iter().map(|(kl, m)| (*kl, m.to_f64())).collect(),
        }
    }

    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        Ok(self.sub(other)?.blocks.values().map(Matrix::max_abs).fold(0.0, f64::max))
    }

    /// Re-embeds into truncation `n` (dropping blocks beyond it).
    pub fn with_truncation(&self, n: usize) -> Self {
        let mut out = Self::zeros(n);
        for (&(k, l), m) in &self.blocks {
            if k <= n && l <= n {
                out.blocks.insert((k, l), m.clone());
            }
        }
        out
    }
}

impl<S: JsonScalar> SpectralCoeffs<S> {
    /// `{ "N": n, "blocks": { "k,l": [[...]] } }`; zero blocks are omitted.
    pub fn to_json(&self) -> Value {
        let mut blocks = Map::new();
        for ((k, l), m) in &self.blocks {
            if !m.is_zero() {
                blocks.insert(format!("{k},{l}"), m.to_json());
            }
        }
        json!({ "N": self.truncation, "blocks": blocks })
    }

    /// Missing blocks are read as zero.
    pub fn from_json(value: &Value) -> Result<Self> {
        let n = value
            .get("N")
            .and_then(Value::as_u64)
            .ok_or_else(|| Error::Parse("spectral data needs an integer field `N`".into()))? as usize;
        let mut out = Self::zeros(n);
        if let Some(blocks) = value.get("blocks") {
            let blocks = blocks.as_object().ok_or_else(|| Error::Parse("`blocks` must be an object".into()))?;
            for (key, m) in blocks {
                let (k, l) = key
                    .split_once(',')
                    .and_then(|(a, b)| Some((a.trim().parse().ok()?, b.trim().parse().ok()?)))
                    .ok_or_else(|| Error::Parse(format!("bad block key `{key}`")))?;
                out.set_block(k, l, Matrix::from_json(m)?)?;
            }
        }
        Ok(out)
    }
}

fn bases(n: usize) -> Vec<Arc<HarmonicBasis>> {
    (0..=n).map(|k| harmonic_basis(k as u32)).collect()
}

/// `a_{kl,ij} = ⟨f, Y_i ⊗ Y_j⟩ / (‖Y_i‖² ‖Y_j‖²)` for all blocks `k, l ≤ N`.
///
/// Fails when `f` has degree above `N` in either block: the expansion would
/// then not reproduce `f` on S3 × S3.
pub fn analyze(f: &BiPoly, n: usize) -> Result<SpectralCoeffs<Rational>> {
    let needed = f.x_degree().max(f.y_degree()) as usize;
    if needed > n {
        return Err(Error::TruncationTooSmall { given: n, needed });
    }
    let bases = bases(n);
    let mut groups: BTreeMap<[u8; 4], Vec<([u8; 4], &Rational)>> = BTreeMap::new();
    for (e, c) in f.poly().terms() {
        groups.entry([e[0], e[1], e[2], e[3]]).or_default().push(([e[4], e[5], e[6], e[7]], c));
    }
    let mut out = SpectralCoeffs::<Rational>::zeros(n);
    for (a, ys) in groups {
        // contract the y side first: v_l = Σ_b c_{ab} dual_l(b)
        let contracted: Vec<Vec<Rational>> = bases
            .iter()
            .map(|b| {
                let mut v = vec![Rational::zero(); b.dimension()];
                for (ye, c) in &ys {
                    let d = b.dual_coefficients(*ye);
                    for (vi, di) in v.iter_mut().zip(d.iter()) {
                        vi.add_product(c, di);
                    }
                }
                v
            })
            .collect();
        for (k, bk) in bases.iter().enumerate() {
            let da = bk.dual_coefficients(a);
            if da.iter().all(Zero::is_zero) {
                continue;
            }
            for (l, vl) in contracted.iter().enumerate() {
                if vl.iter().all(Zero::is_zero) {
                    continue;
                }
                let block = out.block_mut(k, l)?;
                for (i, di) in da.iter().enumerate() {
                    if di.is_zero() {
                        continue;
                    }
                    for (j, vj) in vl.iter().enumerate() {
                        block.get_mut(i, j).add_product(di, vj);
                    }
                }
            }
        }
    }
    Ok(out)
}

/// `Σ a_{kl,ij} Y_i(x) Y_j(y)`.
pub fn synthesize(c: &SpectralCoeffs<Rational>) -> BiPoly {
    let bases = bases(c.truncation());
    let mut out = MultiPoly::zero(8);
    for (&(k, l), m) in c.blocks() {
        if m.is_zero() {
            continue;
        }
        for (i, yi) in bases[k].elements().iter().enumerate() {
            let mut right = MultiPoly::zero(4);
            for (j, yj) in bases[l].elements().iter().enumerate() {
                right.add_scaled(yj, m.get(i, j));
            }
            if right.is_zero() {
                continue;
            }
            out.add_scaled(BiPoly::tensor(yi, &right).poly(), &Rational::one());
        }
    }
    BiPoly(out)
}

/// Which blocks a random sample may populate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Support {
    All,
    Diagonal,
    OffDiagonal,
}

impl Support {
    pub fn admits(self, k: usize, l: usize) -> bool {
        match self {
            Support::All => true,
            Support::Diagonal => k == l,
            Support::OffDiagonal => k != l,
        }
    }
}

/// Seeded spectral data with small rational entries (about half zero).
pub fn random_spectral(n: usize, support: Support, seed: u64) -> SpectralCoeffs<Rational> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = SpectralCoeffs::zeros(n);
    for k in 0..=n {
        for l in 0..=n {
            if !support.admits(k, l) {
                continue;
            }
            let m = Matrix::from_fn(block_dim(k), block_dim(l), |_, _| {
                if rng.random_bool(0.5) {
                    rat(rng.random_range(-6..=6), rng.random_range(1..=5))
                } else {
                    Rational::zero()
                }
            });
            out.set_block(k, l, m).expect("shape");
        }
    }
    out
}

/// Seeded bipolynomial with `terms` monomials of degree at most
/// `max_bidegree` in each block and small rational coefficients.
pub fn random_bipoly(max_bidegree: u32, terms: usize, seed: u64) -> BiPoly {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = MultiPoly::zero(8);
    let draw_block = |rng: &mut ChaCha8Rng| -> [u8; 4] {
        let d = rng.random_range(0..=max_bidegree);
        let mut e = [0u8; 4];
        for _ in 0..d {
            e[rng.random_range(0..4)] += 1;
        }
        e
    };
    for _ in 0..terms {
        let a = draw_block(&mut rng);
        let b = draw_block(&mut rng);
        let e: Exponents = a.iter().chain(b.iter()).copied().collect();
        out.add_term(e, rat(rng.random_range(-5..=5), rng.random_range(1..=4)));
    }
    BiPoly(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harmonics::project_ek;
    use crate::scalar::int;

    fn v(i: usize) -> MultiPoly {
        MultiPoly::var(8, i)
    }

    fn bi(p: MultiPoly) -> BiPoly {
        BiPoly::new(p).unwrap()
    }

    #[test]
    fn analyze_constant() {
        let c = analyze(&bi(MultiPoly::one(8)), 2).unwrap();
        assert_eq!(c.support(), vec![(0, 0)]);
        assert_eq!(*c.block(0, 0).unwrap().get(0, 0), int(1));
    }

    #[test]
    fn analyze_basis_product() {
        // x1 y2 is Y_0 ⊗ Y_1 in the degree-1 basis (x1, x2, x3, x4)
        let c = analyze(&bi(&v(0) * &v(5)), 1).unwrap();
        assert_eq!(c.support(), vec![(1, 1)]);
        let block = c.block(1, 1).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let expected = if (i, j) == (0, 1) { int(1) } else { int(0) };
                assert_eq!(*block.get(i, j), expected);
            }
        }
    }

    #[test]
    fn analyze_matches_single_sphere_projections() {
        let f = bi(&v(0).pow(2) * &v(4));
        let c = analyze(&f, 2).unwrap();
        assert_eq!(c.support(), vec![(0, 1), (2, 1)]);
        let x1sq = MultiPoly::var(4, 0).pow(2);
        for k in [0usize, 2] {
            let proj = project_ek(&x1sq, k as u32).unwrap();
            let coords = harmonic_basis(k as u32).analyze(&proj);
            let block = c.block(k, 1).unwrap();
            for (i, ci) in coords.iter().enumerate() {
                assert_eq!(block.get(i, 0), ci);
                assert!(block.get(i, 1).is_zero());
            }
        }
    }

    #[test]
    fn truncation_too_small_is_reported() {
        let f = bi(v(0).pow(3));
        assert!(matches!(analyze(&f, 2), Err(Error::TruncationTooSmall { given: 2, needed: 3 })));
    }

    #[test]
    fn synthesis_inverts_analysis() {
        assert!(synthesize(&SpectralCoeffs::zeros(2)).poly().is_zero());
        let f = bi(&v(0) * &v(4));
        assert_eq!(synthesize(&analyze(&f, 1).unwrap()), f);
        for seed in 0..6 {
            let f = random_bipoly(3, 6, seed);
            let c = analyze(&f, 3).unwrap();
            assert_eq!(synthesize(&c), f.reduce().unwrap(), "seed {seed}");
        }
    }

    #[test]
    fn projections_partition_and_are_idempotent() {
        let c = random_spectral(2, Support::All, 4);
        let mut sum = SpectralCoeffs::zeros(2);
        for k in 0..=2 {
            for l in 0..=2 {
                let p = c.project(k, l).unwrap();
                assert_eq!(p.project(k, l).unwrap(), p);
                sum = sum.add(&p).unwrap();
            }
        }
        assert_eq!(sum, c);
        assert!(c.project(3, 0).is_err());
    }

    #[test]
    fn sobolev_norm_examples() {
        let c = analyze(&bi(&v(0) * &v(4)), 1).unwrap();
        assert!((c.sobolev_norm(0.0) - 0.25).abs() < 1e-15);
        assert_eq!(c.sobolev_norm_sqr(0), rat(1, 16));
        let one = analyze(&bi(MultiPoly::one(8)), 3).unwrap();
        for s in [0.0, 0.5, 1.0, 2.0, 3.5] {
            assert!((one.sobolev_norm(s) - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn json_round_trip() {
        let c = random_spectral(2, Support::OffDiagonal, 9);
        let back = SpectralCoeffs::<Rational>::from_json(&c.to_json()).unwrap();
        assert_eq!(back, c);
        let f = c.to_f64();
        let back = SpectralCoeffs::<f64>::from_json(&f.to_json()).unwrap();
        assert_eq!(back, f);
        assert!(SpectralCoeffs::<Rational>::from_json(&json!({"N": 1, "blocks": {"0,1": [[1]]}})).is_err());
    }
}
