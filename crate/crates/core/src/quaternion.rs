//! Quaternions as points of S3 and elements of SU(2).
//!
//! Components are stored as `(w, x, y, z)` in the basis `1, i, j, k` and the
//! product is the left-to-right Hamilton product. The same type is used with
//! an exact rational backend and an `f64` backend.

use std::ops::Mul;

use num_bigint::BigInt;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{JsonScalar, Rational, Scalar};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quaternion<T> {
    pub w: T,
    pub x: T,
    pub y: T,
    pub z: T,
}

pub type Quat = Quaternion<f64>;
pub type ExactQuat = Quaternion<Rational>;

impl<T: Scalar> Quaternion<T> {
    pub fn new(w: T, x: T, y: T, z: T) -> Self {
        Self { w, x, y, z }
    }

    pub fn identity() -> Self {
        Self::new(T::one(), T::zero(), T::zero(), T::zero())
    }

    pub fn i() -> Self {
        Self::new(T::zero(), T::one(), T::zero(), T::zero())
    }

    pub fn j() -> Self {
        Self::new(T::zero(), T::zero(), T::one(), T::zero())
    }

    pub fn k() -> Self {
        Self::new(T::zero(), T::zero(), T::zero(), T::one())
    }

    pub fn from_array(c: [T; 4]) -> Self {
        let [w, x, y, z] = c;
        Self { w, x, y, z }
    }

    pub fn to_array(&self) -> [T; 4] {
        [self.w.clone(), self.x.clone(), self.y.clone(), self.z.clone()]
    }

    /// Hamilton product `self * rhs`.
    pub fn mul(&self, rhs: &Self) -> Self {
        let (a1, b1, c1, d1) = (&self.w, &self.x, &self.y, &self.z);
        let (a2, b2, c2, d2) = (&rhs.w, &rhs.x, &rhs.y, &rhs.z);
        let p = |a: &T, b: &T| a.clone() * b.clone();
        Self {
            w: p(a1, a2) - p(b1, b2) - p(c1, c2) - p(d1, d2),
            x: p(a1, b2) + p(b1, a2) + p(c1, d2) - p(d1, c2),
            y: p(a1, c2) - p(b1, d2) + p(c1, a2) + p(d1, b2),
            z: p(a1, d2) + p(b1, c2) - p(c1, b2) + p(d1, a2),
        }
    }

    /// `(w, -x, -y, -z)`; the group inverse on S3.
    pub fn conj(&self) -> Self {
        Self {
            w: self.w.clone(),
            x: -self.x.clone(),
            y: -self.y.clone(),
            z: -self.z.clone(),
        }
    }

    /// Euclidean inner product on R^4.
    pub fn dot(&self, rhs: &Self) -> T {
        self.w.clone() * rhs.w.clone()
            + self.x.clone() * rhs.x.clone()
            + self.y.clone() * rhs.y.clone()
            + self.z.clone() * rhs.z.clone()
    }

    pub fn norm_sqr(&self) -> T {
        self.dot(self)
    }

    pub fn to_f64(&self) -> Quat {
        Quaternion::new(self.w.to_f64(), self.x.to_f64(), self.y.to_f64(), self.z.to_f64())
    }
}

impl<T: Scalar> Mul for &Quaternion<T> {
    type Output = Quaternion<T>;
    fn mul(self, rhs: Self) -> Quaternion<T> {
        Quaternion::mul(self, rhs)
    }
}

impl Quat {
    pub fn is_unit(&self) -> bool {
        (self.norm_sqr() - 1.0).abs() < 1e-12
    }

    pub fn normalized(&self) -> Self {
        let n = self.norm_sqr().sqrt();
        Quaternion::new(self.w / n, self.x / n, self.y / n, self.z / n)
    }
}

impl ExactQuat {
    pub fn is_unit(&self) -> bool {
        self.norm_sqr() == Rational::from_i64(1)
    }

    /// The exact unit quaternion obtained by inverse stereographic projection
    /// of the rational point `t` of R^3.
    pub fn unit_from_stereographic(t: [Rational; 3]) -> Self {
        let one = Rational::from_i64(1);
        let two = Rational::from_i64(2);
        let s = t.iter().fold(Rational::from_i64(0), |acc, v| acc + v * v);
        let den = &one + &s;
        let [a, b, c] = t;
        Quaternion::new(
            (&one - &s) / &den,
            &two * a / &den,
            &two * b / &den,
            &two * c / &den,
        )
    }
}

/// Seeded exact unit quaternions with small-height stereographic coordinates.
pub fn random_exact_units(seed: u64, n: usize) -> Vec<ExactQuat> {
    use rand::Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let mut coord = || {
                let num: i64 = rng.random_range(-9..=9);
                let den: i64 = rng.random_range(1..=7);
                Rational::new(BigInt::from(num), BigInt::from(den))
            };
            ExactQuat::unit_from_stereographic([coord(), coord(), coord()])
        })
        .collect()
}

/// `n` i.i.d. Haar-distributed unit quaternions (normalized 4D Gaussians).
pub fn haar_sample(seed: u64, n: usize) -> Vec<Quat> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        out.push(haar_draw(&mut rng));
    }
    out
}

pub(crate) fn haar_draw<R: rand::Rng>(rng: &mut R) -> Quat {
    loop {
        let g: [f64; 4] = std::array::from_fn(|_| StandardNormal.sample(rng));
        let q = Quaternion::from_array(g);
        if q.norm_sqr() > 1e-300 {
            return q.normalized();
        }
    }
}

/// JSON form: `[w, x, y, z]` with numbers (float) or `[num, den]` pairs (exact).
impl<T: JsonScalar> Serialize for Quaternion<T> {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let arr: Vec<serde_json::Value> = self.to_array().iter().map(|c| c.to_json()).collect();
        arr.serialize(serializer)
    }
}

impl<'de, T: JsonScalar> Deserialize<'de> for Quaternion<T> {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let value = serde_json::Value::deserialize(deserializer)?;
        quaternion_from_json(&value).map_err(serde::de::Error::custom)
    }
}

pub fn quaternion_from_json<T: JsonScalar>(value: &serde_json::Value) -> Result<Quaternion<T>> {
    let arr = value
        .as_array()
        .filter(|a| a.len() == 4)
        .ok_or_else(|| Error::Parse("quaternion must be an array of 4 components".into()))?;
    let mut comps = Vec::with_capacity(4);
    for c in arr {
        comps.push(T::from_json(c).map_err(Error::Parse)?);
    }
    let [w, x, y, z]: [T; 4] = comps.try_into().expect("four components");
    Ok(Quaternion::new(w, x, y, z))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    #[test]
    fn hamilton_relations() {
        let (i, j, k) = (ExactQuat::i(), ExactQuat::j(), ExactQuat::k());
        let minus_one = Quaternion::new(rat(-1, 1), rat(0, 1), rat(0, 1), rat(0, 1));
        assert_eq!(i.mul(&j), k);
        assert_eq!(j.mul(&k), i);
        assert_eq!(k.mul(&i), j);
        assert_eq!(i.mul(&i), minus_one);
        assert_eq!(j.mul(&i), k.conj());
        let q = random_exact_units(3, 1).pop().unwrap();
        assert_eq!(ExactQuat::identity().mul(&q), q);
        assert_eq!(q.mul(&ExactQuat::identity()), q);
    }

    #[test]
    fn conjugation_inverts_units() {
        let e = ExactQuat::identity();
        assert_eq!(e.conj(), e);
        assert_eq!(ExactQuat::i().conj().mul(&ExactQuat::i()), e);
        for q in random_exact_units(11, 100) {
            assert!(q.is_unit());
            assert_eq!(q.conj().mul(&q), e);
            assert_eq!(q.mul(&q.conj()), e);
        }
    }

    #[test]
    fn exact_associativity() {
        let qs = random_exact_units(5, 300);
        for t in qs.chunks(3) {
            let (a, b, c) = (&t[0], &t[1], &t[2]);
            assert_eq!(a.mul(b).mul(c), a.mul(&b.mul(c)));
            assert!(a.mul(b).is_unit());
        }
    }

    #[test]
    fn dot_is_real_part_of_conjugate_product() {
        assert_eq!(ExactQuat::i().dot(&ExactQuat::j()), rat(0, 1));
        let qs = random_exact_units(8, 200);
        for pair in qs.chunks(2) {
            let (a, b) = (&pair[0], &pair[1]);
            assert_eq!(a.dot(a), rat(1, 1));
            assert_eq!(a.dot(b), a.conj().mul(b).w);
        }
    }

    #[test]
    fn round_metric_is_bi_invariant() {
        let qs = random_exact_units(21, 150);
        for t in qs.chunks(3) {
            let (a, b, g) = (&t[0], &t[1], &t[2]);
            let d = a.dot(b);
            assert_eq!(g.mul(a).dot(&g.mul(b)), d);
            assert_eq!(a.mul(g).dot(&b.mul(g)), d);
        }
    }

    #[test]
    fn haar_samples_are_unit_and_deterministic() {
        let a = haar_sample(7, 1000);
        let b = haar_sample(7, 1000);
        assert_eq!(a, b);
        assert!(a.iter().all(|q| (q.norm_sqr() - 1.0).abs() < 1e-12));
        assert_ne!(haar_sample(8, 1)[0], a[0]);
    }

    #[test]
    fn json_forms() {
        let q = Quaternion::new(rat(1, 2), rat(-1, 2), rat(1, 2), rat(1, 2));
        let v = serde_json::to_value(&q).unwrap();
        assert_eq!(v, serde_json::json!([[1, 2], [-1, 2], [1, 2], [1, 2]]));
        let back: ExactQuat = serde_json::from_value(v).unwrap();
        assert_eq!(back, q);
        let f: Quat = serde_json::from_value(serde_json::json!([0.0, 1.0, 0.0, 0.0])).unwrap();
        assert_eq!(f, Quat::i());
    }
}
