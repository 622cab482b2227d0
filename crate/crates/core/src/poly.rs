//! Exact multivariate polynomials over the rationals.
//!
//! Variables are grouped in blocks of four, one block per copy of R^4: `x`
//! (variables 0..4), `y` (4..8) and `g` (8..12). A polynomial on a single
//! sphere uses only the `x` block.

use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::{OnceLock, RwLock};

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::scalar::{rational_to_f64, Rational, RationalJson};

pub type Exponents = SmallVec<[u8; 12]>;

/// Default bound on the total degree of any intermediate polynomial.
pub const DEFAULT_DEGREE_CAP: u32 = 24;

/// A named group of four consecutive variables forming one copy of R^4.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Block {
    pub name: &'static str,
    pub start: usize,
}

impl Block {
    pub const X: Block = Block { name: "x", start: 0 };
    pub const Y: Block = Block { name: "y", start: 4 };
    pub const G: Block = Block { name: "g", start: 8 };

    pub fn by_name(name: &str) -> Result<Block> {
        match name {
            "x" => Ok(Block::X),
            "y" => Ok(Block::Y),
            "g" => Ok(Block::G),
            other => Err(Error::UnknownBlock { name: other.to_string(), nvars: 0 }),
        }
    }

    pub fn vars(self) -> std::ops::Range<usize> {
        self.start..self.start + 4
    }

    fn check(self, nvars: usize) -> Result<()> {
        if self.start + 4 > nvars {
            return Err(Error::UnknownBlock { name: self.name.to_string(), nvars });
        }
        Ok(())
    }

    fn exps(self, e: &[u8]) -> [u8; 4] {
        [e[self.start], e[self.start + 1], e[self.start + 2], e[self.start + 3]]
    }
}

#[derive(Clone, PartialEq, Eq)]
pub struct MultiPoly {
    nvars: usize,
    terms: BTreeMap<Exponents, Rational>,
}

impl MultiPoly {
    pub fn zero(nvars: usize) -> Self {
        Self { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: Rational) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(Exponents::from_elem(0, nvars), c);
        p
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, Rational::one())
    }

    /// The coordinate function `v_index`.
    pub fn var(nvars: usize, index: usize) -> Self {
        let mut e = Exponents::from_elem(0, nvars);
        e[index] = 1;
        Self::monomial(e, Rational::one())
    }

    pub fn monomial(exps: Exponents, coef: Rational) -> Self {
        let mut p = Self::zero(exps.len());
        p.add_term(exps, coef);
        p
    }

    pub fn from_terms<I: IntoIterator<Item = (Exponents, Rational)>>(nvars: usize, terms: I) -> Result<Self> {
        let mut p = Self::zero(nvars);
        for (e, c) in terms {
            if e.len() != nvars {
                return Err(Error::InconsistentVariables(format!(
                    "exponent vector of length {} in a polynomial of {nvars} variables",
                    e.len()
                )));
            }
            p.add_term(e, c);
        }
        Ok(p)
    }

    /// `|v|^2` over one block.
    pub fn norm_sqr(nvars: usize, block: Block) -> Self {
        let mut p = Self::zero(nvars);
        for v in block.vars() {
            let mut e = Exponents::from_elem(0, nvars);
            e[v] = 2;
            p.add_term(e, Rational::one());
        }
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponents, &Rational)> {
        self.terms.iter()
    }

    pub fn coeff(&self, exps: &[u8]) -> Rational {
        self.terms.get(exps).cloned().unwrap_or_else(Rational::zero)
    }

    /// Constant term, or `None` when the polynomial is not constant.
    pub fn as_constant(&self) -> Option<Rational> {
        match self.terms.len() {
            0 => Some(Rational::zero()),
            1 => {
                let (e, c) = self.terms.iter().next()?;
                e.iter().all(|&d| d == 0).then(|| c.clone())
            }
            _ => None,
        }
    }

    pub fn add_term(&mut self, exps: Exponents, coef: Rational) {
        if coef.is_zero() {
            return;
        }
        match self.terms.entry(exps) {
            Entry::Vacant(v) => {
                v.insert(coef);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += coef;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    /// `self += a * b * monomial(exps)`.
    pub fn add_product_term(&mut self, exps: Exponents, a: &Rational, b: &Rational) {
        if a.is_zero() || b.is_zero() {
            return;
        }
        match self.terms.entry(exps) {
            Entry::Vacant(v) => {
                v.insert(a * b);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += a * b;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    /// `self += c * other`.
    pub fn add_scaled(&mut self, other: &MultiPoly, c: &Rational) {
        debug_assert_eq!(self.nvars, other.nvars);
        if c.is_zero() {
            return;
        }
        for (e, v) in &other.terms {
            self.add_product_term(e.clone(), v, c);
        }
    }

    pub fn scale(&self, c: &Rational) -> MultiPoly {
        if c.is_zero() {
            return Self::zero(self.nvars);
        }
        MultiPoly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(e, v)| (e.clone(), v * c)).collect(),
        }
    }

    pub fn pow(&self, n: u32) -> MultiPoly {
        let mut acc = Self::one(self.nvars);
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(|e| degree(e)).max().unwrap_or(0)
    }

    pub fn block_degree(&self, block: Block) -> u32 {
        self.terms
            .keys()
            .map(|e| block.exps(e).iter().map(|&d| d as u32).sum())
            .max()
            .unwrap_or(0)
    }

    pub fn check_degree_cap(&self, cap: u32) -> Result<()> {
        let degree = self.total_degree();
        if degree > cap {
            return Err(Error::DegreeCapExceeded { degree, cap });
        }
        Ok(())
    }

    /// Product that refuses to build a result beyond `cap` total degree.
    pub fn mul_capped(&self, rhs: &MultiPoly, cap: u32) -> Result<MultiPoly> {
        if !self.is_zero() && !rhs.is_zero() {
            let degree = self.total_degree() + rhs.total_degree();
            if degree > cap {
                return Err(Error::DegreeCapExceeded { degree, cap });
            }
        }
        Ok(self * rhs)
    }

    /// Sum of the terms of total degree exactly `k`.
    pub fn homogeneous_component(&self, k: u32) -> MultiPoly {
        MultiPoly {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .filter(|(e, _)| degree(e) == k)
                .map(|(e, c)| (e.clone(), c.clone()))
                .collect(),
        }
    }

    /// Sum of the terms whose degree in `block` is exactly `k`.
    pub fn block_component(&self, block: Block, k: u32) -> MultiPoly {
        MultiPoly {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .filter(|(e, _)| block_deg(block, e) == k)
                .map(|(e, c)| (e.clone(), c.clone()))
                .collect(),
        }
    }

    /// Degree of homogeneity, or an error naming two distinct degrees.
    pub fn homogeneous_degree(&self) -> Result<u32> {
        let mut degrees = self.terms.keys().map(|e| degree(e));
        let Some(first) = degrees.next() else { return Ok(0) };
        let (mut low, mut high) = (first, first);
        for d in degrees {
            low = low.min(d);
            high = high.max(d);
        }
        if low != high {
            return Err(Error::NotHomogeneous { low, high });
        }
        Ok(first)
    }

    pub fn derivative(&self, var: usize) -> MultiPoly {
        let mut out = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            let d = e[var];
            if d == 0 {
                continue;
            }
            let mut e2 = e.clone();
            e2[var] -= 1;
            out.add_term(e2, c * Rational::from_integer(BigInt::from(d)));
        }
        out
    }

    /// Sum of pure second derivatives over the four variables of `block`.
    pub fn euclidean_laplacian(&self, block: Block) -> Result<MultiPoly> {
        block.check(self.nvars)?;
        let mut out = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            for v in block.vars() {
                let d = e[v];
                if d < 2 {
                    continue;
                }
                let mut e2 = e.clone();
                e2[v] -= 2;
                out.add_term(e2, c * Rational::from_integer(BigInt::from(d as u32 * (d as u32 - 1))));
            }
        }
        Ok(out)
    }

    /// Euler operator `sum v_i d/dv_i` over `block`.
    pub fn euler(&self, block: Block) -> Result<MultiPoly> {
        block.check(self.nvars)?;
        let mut out = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            let d = block_deg(block, e);
            out.add_term(e.clone(), c * Rational::from_integer(BigInt::from(d)));
        }
        Ok(out)
    }

    /// Composes `self` with a substitution.
    ///
    /// `images[i]` is the polynomial replacing variable `i` (in `out_nvars`
    /// variables); `None` keeps variable `i` as variable `i` of the output.
    pub fn substitute_linear(&self, images: &[Option<MultiPoly>], out_nvars: usize) -> Result<MultiPoly> {
        if images.len() != self.nvars {
            return Err(Error::InconsistentVariables(format!(
                "{} images for a polynomial in {} variables",
                images.len(),
                self.nvars
            )));
        }
        let mut resolved = Vec::with_capacity(self.nvars);
        for (i, img) in images.iter().enumerate() {
            match img {
                Some(p) if p.nvars != out_nvars => {
                    return Err(Error::InconsistentVariables(format!(
                        "image of variable {i} has {} variables, expected {out_nvars}",
                        p.nvars
                    )))
                }
                Some(p) if p.total_degree() > 2 => {
                    return Err(Error::InconsistentVariables(format!(
                        "image of variable {i} is not a linear form in its blocks"
                    )))
                }
                Some(p) => resolved.push(p.clone()),
                None if i < out_nvars => resolved.push(Self::var(out_nvars, i)),
                None => {
                    return Err(Error::InconsistentVariables(format!(
                        "variable {i} has no image and no slot among {out_nvars} output variables"
                    )))
                }
            }
        }
        let mut powers: Vec<Vec<MultiPoly>> = resolved.iter().map(|p| vec![Self::one(out_nvars), p.clone()]).collect();
        let mut out = Self::zero(out_nvars);
        for (e, c) in &self.terms {
            let mut term = Self::constant(out_nvars, c.clone());
            for (i, &d) in e.iter().enumerate() {
                if d == 0 {
                    continue;
                }
                while powers[i].len() <= d as usize {
                    let next = powers[i].last().unwrap() * &resolved[i];
                    powers[i].push(next);
                }
                term = &term * &powers[i][d as usize];
            }
            out.add_scaled(&term, &Rational::one());
        }
        Ok(out)
    }

    /// Integrates out `block` against the normalized uniform measure on S3.
    ///
    /// The result keeps `nvars` variables; the exponents of `block` are zero.
    pub fn sphere_integral(&self, block: Block) -> Result<MultiPoly> {
        block.check(self.nvars)?;
        let mut out = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            let be = block.exps(e);
            if be.iter().any(|d| d % 2 == 1) {
                continue;
            }
            let mut e2 = e.clone();
            for v in block.vars() {
                e2[v] = 0;
            }
            out.add_product_term(e2, c, &sphere_moment(be));
        }
        Ok(out)
    }

    /// L2(S3) inner product of two polynomials in the `x` block.
    pub fn sphere_inner(&self, other: &MultiPoly) -> Rational {
        let mut acc = Rational::zero();
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                let e = [a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]];
                if e.iter().any(|d| d % 2 == 1) {
                    continue;
                }
                acc += ca * cb * sphere_moment(e);
            }
        }
        acc
    }

    pub fn eval(&self, point: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| {
                let mut m = rational_to_f64(c);
                for (x, &d) in point.iter().zip(e.iter()) {
                    if d > 0 {
                        m *= x.powi(d as i32);
                    }
                }
                m
            })
            .sum()
    }

    pub fn eval_exact(&self, point: &[Rational]) -> Rational {
        let mut acc = Rational::zero();
        for (e, c) in &self.terms {
            let mut m = c.clone();
            for (x, &d) in point.iter().zip(e.iter()) {
                for _ in 0..d {
                    m *= x;
                }
            }
            acc += m;
        }
        acc
    }

    /// Relabels variables: variable `i` becomes `i + offset` in `out_nvars` variables.
    pub fn embed(&self, out_nvars: usize, offset: usize) -> Result<MultiPoly> {
        if self.nvars + offset > out_nvars {
            return Err(Error::InconsistentVariables(format!(
                "cannot place {} variables at offset {offset} among {out_nvars}",
                self.nvars
            )));
        }
        let terms = self.terms.iter().map(|(e, c)| {
            let mut e2 = Exponents::from_elem(0, out_nvars);
            e2[offset..offset + self.nvars].copy_from_slice(e);
            (e2, c.clone())
        });
        Ok(MultiPoly { nvars: out_nvars, terms: terms.collect() })
    }

    /// Drops trailing variables, which must not occur in any term.
    pub fn truncate_vars(&self, keep: usize) -> Result<MultiPoly> {
        if keep > self.nvars {
            return Err(Error::InconsistentVariables(format!("cannot keep {keep} of {} variables", self.nvars)));
        }
        let mut out = Self::zero(keep);
        for (e, c) in &self.terms {
            if e[keep..].iter().any(|&d| d > 0) {
                return Err(Error::InconsistentVariables(format!("variable {keep} or later still occurs")));
            }
            out.terms.insert(e[..keep].iter().copied().collect(), c.clone());
        }
        Ok(out)
    }

    /// Splits by the exponents outside `block`: each entry maps the outer
    /// exponent vector (block entries zero) to a 4-variable polynomial.
    pub fn block_slices(&self, block: Block) -> Result<BTreeMap<Exponents, MultiPoly>> {
        block.check(self.nvars)?;
        let mut out: BTreeMap<Exponents, MultiPoly> = BTreeMap::new();
        for (e, c) in &self.terms {
            let mut outer = e.clone();
            for v in block.vars() {
                outer[v] = 0;
            }
            let inner: Exponents = block.exps(e).iter().copied().collect();
            out.entry(outer).or_insert_with(|| Self::zero(4)).add_term(inner, c.clone());
        }
        Ok(out)
    }

    /// Inverse of [`block_slices`](Self::block_slices).
    pub fn from_block_slices(nvars: usize, block: Block, slices: &BTreeMap<Exponents, MultiPoly>) -> Result<MultiPoly> {
        block.check(nvars)?;
        let mut out = Self::zero(nvars);
        for (outer, inner) in slices {
            for (e, c) in &inner.terms {
                let mut full = outer.clone();
                full[block.start..block.start + 4].copy_from_slice(e);
                out.add_term(full, c.clone());
            }
        }
        Ok(out)
    }

    /// Float evaluator with precomputed coefficients.
    pub fn to_float(&self) -> FloatPoly {
        FloatPoly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(e, c)| (e.clone(), rational_to_f64(c))).collect(),
        }
    }
}

fn degree(e: &[u8]) -> u32 {
    e.iter().map(|&d| d as u32).sum()
}

fn block_deg(block: Block, e: &[u8]) -> u32 {
    e[block.vars()].iter().map(|&d| d as u32).sum()
}

impl fmt::Debug for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MultiPoly[{}]({})", self.nvars, self)
    }
}

fn var_name(nvars: usize, i: usize) -> String {
    if nvars <= 12 && nvars.is_multiple_of(4) {
        let block = ["x", "y", "g"][i / 4];
        format!("{block}{}", i % 4 + 1)
    } else {
        format!("v{}", i + 1)
    }
}

impl fmt::Display for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (n, (e, c)) in self.terms.iter().rev().enumerate() {
            if n > 0 {
                write!(f, " + ")?;
            }
            let vars: Vec<String> = e
                .iter()
                .enumerate()
                .filter(|(_, &d)| d > 0)
                .map(|(i, &d)| if d == 1 { var_name(self.nvars, i) } else { format!("{}^{d}", var_name(self.nvars, i)) })
                .collect();
            if vars.is_empty() {
                write!(f, "{c}")?;
            } else if c.is_one() {
                write!(f, "{}", vars.join("*"))?;
            } else {
                write!(f, "({c})*{}", vars.join("*"))?;
            }
        }
        Ok(())
    }
}

impl Add for &MultiPoly {
    type Output = MultiPoly;
    fn add(self, rhs: &MultiPoly) -> MultiPoly {
        let mut out = self.clone();
        out.add_scaled(rhs, &Rational::one());
        out
    }
}

impl Sub for &MultiPoly {
    type Output = MultiPoly;
    fn sub(self, rhs: &MultiPoly) -> MultiPoly {
        let mut out = self.clone();
        out.add_scaled(rhs, &-Rational::one());
        out
    }
}

impl Neg for &MultiPoly {
    type Output = MultiPoly;
    fn neg(self) -> MultiPoly {
        self.scale(&-Rational::one())
    }
}

impl Mul for &MultiPoly {
    type Output = MultiPoly;
    fn mul(self, rhs: &MultiPoly) -> MultiPoly {
        assert_eq!(self.nvars, rhs.nvars, "multiplying polynomials over different variable sets");
        let mut out = MultiPoly::zero(self.nvars);
        for (a, ca) in &self.terms {
            for (b, cb) in &rhs.terms {
                let e: Exponents = a.iter().zip(b.iter()).map(|(x, y)| x + y).collect();
                out.add_product_term(e, ca, cb);
            }
        }
        out
    }
}

/// `prod (a_i - 1)!!`, the numerator of the monomial moment on S3.
pub fn double_factorial_product(e: [u8; 4]) -> BigInt {
    let mut acc = BigInt::one();
    for &a in &e {
        let mut k = a as i64 - 1;
        while k > 1 {
            acc *= k;
            k -= 2;
        }
    }
    acc
}

/// `2^m (m+1)!`, the common denominator of all moments of total degree `2m`.
pub fn moment_denominator(m: u32) -> BigInt {
    let mut acc = BigInt::one() << m as usize;
    for i in 2..=(m as u64 + 1) {
        acc *= i;
    }
    acc
}

fn moment_cache() -> &'static RwLock<HashMap<[u8; 4], Rational>> {
    static CACHE: OnceLock<RwLock<HashMap<[u8; 4], Rational>>> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

/// `∫_{S3} v^e dσ` for the normalized uniform measure.
///
/// Zero if any exponent is odd, else `prod (e_i - 1)!! / (2^m (m+1)!)`
/// with `2m = |e|`.
pub fn sphere_moment(e: [u8; 4]) -> Rational {
    if e.iter().any(|d| d % 2 == 1) {
        return Rational::zero();
    }
    if let Some(v) = moment_cache().read().unwrap().get(&e) {
        return v.clone();
    }
    let m = e.iter().map(|&d| d as u32).sum::<u32>() / 2;
    let value = Rational::new(double_factorial_product(e), moment_denominator(m));
    moment_cache().write().unwrap().insert(e, value.clone());
    value
}

/// Monomials of degree `k` in four variables, in graded-lexicographic order
/// (`x1^k` first).
pub fn monomials4(k: u32) -> Vec<[u8; 4]> {
    let mut out = Vec::new();
    let k = k as u8;
    for a in (0..=k).rev() {
        for b in (0..=k - a).rev() {
            for c in (0..=k - a - b).rev() {
                out.push([a, b, c, k - a - b - c]);
            }
        }
    }
    out
}

pub fn exps4(e: [u8; 4]) -> Exponents {
    e.iter().copied().collect()
}

/// Polynomial with float coefficients, for fast repeated evaluation.
#[derive(Clone, Debug)]
pub struct FloatPoly {
    nvars: usize,
    terms: Vec<(Exponents, f64)>,
}

impl FloatPoly {
    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn eval(&self, point: &[f64]) -> f64 {
        let mut acc = 0.0;
        for (e, c) in &self.terms {
            let mut m = *c;
            for (x, &d) in point.iter().zip(e.iter()) {
                match d {
                    0 => {}
                    1 => m *= x,
                    2 => m *= x * x,
                    _ => m *= x.powi(d as i32),
                }
            }
            acc += m;
        }
        acc
    }
}

#[derive(Serialize, Deserialize)]
struct TermJson {
    exp: Vec<u32>,
    coef: RationalJson,
}

#[derive(Serialize, Deserialize)]
struct PolyJson {
    nvars: usize,
    terms: Vec<TermJson>,
}

impl Serialize for MultiPoly {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let doc = PolyJson {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .rev()
                .map(|(e, c)| TermJson { exp: e.iter().map(|&d| d as u32).collect(), coef: RationalJson(c.clone()) })
                .collect(),
        };
        doc.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for MultiPoly {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let doc = PolyJson::deserialize(deserializer)?;
        let mut terms = Vec::with_capacity(doc.terms.len());
        for t in doc.terms {
            if t.exp.iter().any(|&d| d > u8::MAX as u32) {
                return Err(serde::de::Error::custom("exponent too large"));
            }
            terms.push((t.exp.iter().map(|&d| d as u8).collect::<Exponents>(), t.coef.0));
        }
        MultiPoly::from_terms(doc.nvars, terms).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, rat};

    fn x(i: usize) -> MultiPoly {
        MultiPoly::var(4, i)
    }

    #[test]
    fn laplacian_examples() {
        let r2 = MultiPoly::norm_sqr(4, Block::X);
        assert_eq!(r2.euclidean_laplacian(Block::X).unwrap(), MultiPoly::constant(4, int(8)));
        assert!((&x(0) * &x(1)).euclidean_laplacian(Block::X).unwrap().is_zero());
        let x1_4 = x(0).pow(4);
        assert_eq!(x1_4.euclidean_laplacian(Block::X).unwrap(), x(0).pow(2).scale(&int(12)));
        assert!(matches!(r2.euclidean_laplacian(Block::Y), Err(Error::UnknownBlock { .. })));
    }

    #[test]
    fn homogeneous_components() {
        let p = &(&MultiPoly::one(4) + &x(0)) + &x(0).pow(2);
        assert_eq!(p.homogeneous_component(1), x(0));
        let q = x(0).pow(2);
        assert_eq!(q.homogeneous_component(2), q);
        assert!(p.homogeneous_degree().is_err());
        assert_eq!(q.homogeneous_degree().unwrap(), 2);
    }

    #[test]
    fn moment_values() {
        assert_eq!(sphere_moment([0, 0, 0, 0]), int(1));
        assert_eq!(sphere_moment([2, 0, 0, 0]), rat(1, 4));
        assert_eq!(sphere_moment([4, 0, 0, 0]), rat(1, 8));
        assert_eq!(sphere_moment([2, 2, 0, 0]), rat(1, 24));
        assert_eq!(sphere_moment([1, 1, 0, 0]), int(0));
    }

    #[test]
    fn integral_of_norm_times_q_equals_integral_of_q() {
        let r2 = MultiPoly::norm_sqr(4, Block::X);
        let q = &(&x(0).pow(2) * &x(1).pow(2)) + &x(2).pow(4).scale(&rat(3, 5));
        let lhs = (&r2 * &q).sphere_integral(Block::X).unwrap();
        assert_eq!(lhs, q.sphere_integral(Block::X).unwrap());
    }

    #[test]
    fn sphere_integral_keeps_other_blocks() {
        // (x1^2 + y1) integrated over x -> 1/4 + y1
        let p = &MultiPoly::var(8, 0).pow(2) + &MultiPoly::var(8, 4);
        let r = p.sphere_integral(Block::X).unwrap();
        assert_eq!(r, &MultiPoly::constant(8, rat(1, 4)) + &MultiPoly::var(8, 4));
    }

    #[test]
    fn identity_substitution() {
        let p = &(&x(0) * &x(3)) + &x(2).pow(3).scale(&rat(-2, 7));
        let images: Vec<Option<MultiPoly>> = vec![None; 4];
        assert_eq!(p.substitute_linear(&images, 4).unwrap(), p);
        let bad = vec![Some(MultiPoly::var(5, 0)), None, None, None];
        assert!(matches!(p.substitute_linear(&bad, 4), Err(Error::InconsistentVariables(_))));
    }

    #[test]
    fn monomial_order_is_graded_lex() {
        let m = monomials4(2);
        assert_eq!(m.len(), 10);
        assert_eq!(m[0], [2, 0, 0, 0]);
        assert_eq!(m[1], [1, 1, 0, 0]);
        assert_eq!(*m.last().unwrap(), [0, 0, 0, 2]);
        assert_eq!(monomials4(8).len(), 165);
    }

    #[test]
    fn degree_cap_guard() {
        let p = x(0).pow(13);
        assert!(p.mul_capped(&p, DEFAULT_DEGREE_CAP).is_err());
        assert!(p.check_degree_cap(12).is_err());
        assert!(x(0).pow(12).mul_capped(&x(1).pow(12), DEFAULT_DEGREE_CAP).is_ok());
    }

    #[test]
    fn json_round_trip() {
        let p = &x(0).pow(2).scale(&rat(3, 4)) - &MultiPoly::one(4);
        let text = serde_json::to_string(&p).unwrap();
        assert_eq!(text, r#"{"nvars":4,"terms":[{"exp":[2,0,0,0],"coef":[3,4]},{"exp":[0,0,0,0],"coef":[-1,1]}]}"#);
        let back: MultiPoly = serde_json::from_str(&text).unwrap();
        assert_eq!(back, p);
    }
}
