//! Spherical harmonics on S3: harmonic decomposition of polynomials, exact
//! orthogonal bases of H_k, the Laplace–Beltrami eigenvalue, zonal kernels
//! and the projections E_k.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, OnceLock, RwLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::poly::{exps4, monomials4, sphere_moment, Block, Exponents, FloatPoly, MultiPoly};
use crate::quaternion::{haar_sample, Quat};
use crate::scalar::{int, Rational, RationalJson};

fn require_four_vars(p: &MultiPoly) -> Result<()> {
    if p.nvars() != 4 {
        return Err(Error::InconsistentVariables(format!(
            "expected a polynomial on R^4, got {} variables",
            p.nvars()
        )));
    }
    Ok(())
}

/// Splits a homogeneous degree-`k` polynomial `p` as `h + |x|^2 q` with `h`
/// harmonic, using `h = sum_j a_j |x|^{2j} Δ^j p` where
/// `a_{j+1} = -a_j / (4 (j+1) (k-j))`.
fn split_harmonic(p: &MultiPoly, k: u32) -> (MultiPoly, MultiPoly) {
    let n = p.nvars();
    let r2 = MultiPoly::norm_sqr(n, Block::X);
    let mut h = p.clone();
    let mut q = MultiPoly::zero(n);
    let mut lap = p.clone();
    let mut coef = Rational::one();
    let mut r_pow = MultiPoly::one(n); // |x|^{2j-2}
    for j in 0..k / 2 {
        lap = lap.euclidean_laplacian(Block::X).expect("x block");
        if lap.is_zero() {
            break;
        }
        coef = -coef / int(4 * (j as i64 + 1) * (k as i64 - j as i64));
        let term = &r_pow * &lap;
        q.add_scaled(&term, &-coef.clone());
        r_pow = &r_pow * &r2;
        h.add_scaled(&(&term * &r2), &coef);
    }
    (h, q)
}

/// `(p_0, ..., p_{⌊k/2⌋})` with `p_j ∈ H_{k-2j}` and `p = Σ |x|^{2j} p_j`.
pub fn harmonic_decompose(p: &MultiPoly) -> Result<Vec<MultiPoly>> {
    require_four_vars(p)?;
    let k = p.homogeneous_degree()?;
    let mut parts = Vec::with_capacity(k as usize / 2 + 1);
    let mut rest = p.clone();
    let mut degree = k;
    loop {
        let (h, q) = split_harmonic(&rest, degree);
        parts.push(h);
        if degree < 2 {
            break;
        }
        rest = q;
        degree -= 2;
    }
    Ok(parts)
}

/// Canonical representative of `p|_{S3}` in `block`: the sum of harmonic
/// homogeneous pieces (setting `|x|^2 = 1` in the harmonic decomposition).
pub fn reduce_to_sphere(p: &MultiPoly, block: Block) -> Result<MultiPoly> {
    let slices = p.block_slices(block)?;
    let mut reduced = BTreeMap::new();
    for (outer, inner) in slices {
        let mut acc = MultiPoly::zero(4);
        for d in 0..=inner.total_degree() {
            let component = inner.homogeneous_component(d);
            if component.is_zero() {
                continue;
            }
            for part in harmonic_decompose(&component)? {
                acc.add_scaled(&part, &Rational::one());
            }
        }
        if !acc.is_zero() {
            reduced.insert(outer, acc);
        }
    }
    MultiPoly::from_block_slices(p.nvars(), block, &reduced)
}

/// Orthogonal (not normalized) basis of H_k with its Gram diagonal.
pub struct HarmonicBasis {
    degree: u32,
    monomials: Vec<[u8; 4]>,
    /// Coefficients of each element over `monomials`.
    coeffs: Vec<Vec<Rational>>,
    elements: Vec<MultiPoly>,
    gram_diag: Vec<Rational>,
    dual: RwLock<HashMap<[u8; 4], Arc<Vec<Rational>>>>,
}

impl std::fmt::Debug for HarmonicBasis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("HarmonicBasis")
            .field("degree", &self.degree)
            .field("dimension", &self.elements.len())
            .finish()
    }
}

fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    let mut acc = Rational::zero();
    for (x, y) in a.iter().zip(b) {
        if !x.is_zero() && !y.is_zero() {
            acc += x * y;
        }
    }
    acc
}

/// Rescales a nonzero vector to coprime integer entries with a positive
/// first nonzero entry.
fn make_primitive(v: &mut [Rational]) {
    let mut lcm = BigInt::one();
    for x in v.iter().filter(|x| !x.is_zero()) {
        lcm = lcm.lcm(x.denom());
    }
    let mut factor = Rational::from_integer(lcm);
    let mut g = BigInt::zero();
    for x in v.iter().filter(|x| !x.is_zero()) {
        g = g.gcd(&(x * &factor).to_integer());
    }
    factor /= Rational::from_integer(g);
    if v.iter().find(|x| !x.is_zero()).is_some_and(|x| x.is_negative()) {
        factor = -factor;
    }
    for x in v.iter_mut() {
        *x *= &factor;
    }
}

impl HarmonicBasis {
    fn build(k: u32) -> Self {
        let monomials = monomials4(k);
        let index: HashMap<[u8; 4], usize> = monomials.iter().enumerate().map(|(i, &m)| (m, i)).collect();
        let n = monomials.len();
        // Gram matrix of the monomials in L2(S3); only entries within a parity class are nonzero.
        let gram_rows: Vec<Vec<(usize, Rational)>> = monomials
            .iter()
            .map(|a| {
                monomials
                    .iter()
                    .enumerate()
                    .filter_map(|(j, b)| {
                        let e = [a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]];
                        let m = sphere_moment(e);
                        (!m.is_zero()).then_some((j, m))
                    })
                    .collect()
            })
            .collect();
        let apply_gram = |v: &[Rational]| -> Vec<Rational> {
            gram_rows
                .iter()
                .map(|row| {
                    let mut acc = Rational::zero();
                    for (j, m) in row {
                        if !v[*j].is_zero() {
                            acc += &v[*j] * m;
                        }
                    }
                    acc
                })
                .collect()
        };

        let mut coeffs: Vec<Vec<Rational>> = Vec::new();
        let mut gram_images: Vec<Vec<Rational>> = Vec::new();
        let mut gram_diag: Vec<Rational> = Vec::new();
        for &m in &monomials {
            let (h, _) = split_harmonic(&MultiPoly::monomial(exps4(m), Rational::one()), k);
            let mut v = vec![Rational::zero(); n];
            for (e, c) in h.terms() {
                v[index[&[e[0], e[1], e[2], e[3]]]] = c.clone();
            }
            for ((e, ge), norm) in coeffs.iter().zip(&gram_images).zip(&gram_diag) {
                let c = dot(&v, ge);
                if c.is_zero() {
                    continue;
                }
                let c = c / norm;
                for (vi, ei) in v.iter_mut().zip(e) {
                    if !ei.is_zero() {
                        *vi -= &c * ei;
                    }
                }
            }
            if v.iter().all(Zero::is_zero) {
                continue;
            }
            make_primitive(&mut v);
            let ge = apply_gram(&v);
            gram_diag.push(dot(&v, &ge));
            gram_images.push(ge);
            coeffs.push(v);
        }
        let elements = coeffs
            .iter()
            .map(|v| {
                MultiPoly::from_terms(4, monomials.iter().zip(v).map(|(m, c)| (exps4(*m), c.clone())))
                    .expect("four variables")
            })
            .collect();
        Self { degree: k, monomials, coeffs, elements, gram_diag, dual: RwLock::new(HashMap::new()) }
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn dimension(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[MultiPoly] {
        &self.elements
    }

    pub fn gram_diag(&self) -> &[Rational] {
        &self.gram_diag
    }

    /// Degree-`k` monomials indexing [`coefficients`](Self::coefficients).
    pub fn monomials(&self) -> &[[u8; 4]] {
        &self.monomials
    }

    pub fn coefficients(&self) -> &[Vec<Rational>] {
        &self.coeffs
    }

    /// `(⟨v^a, Y_i⟩ / ‖Y_i‖²)_i`: the coefficients of `v^a|_{S3}` projected
    /// onto H_k in this basis.
    pub fn dual_coefficients(&self, a: [u8; 4]) -> Arc<Vec<Rational>> {
        if let Some(v) = self.dual.read().unwrap().get(&a) {
            return v.clone();
        }
        let total: u32 = a.iter().map(|&d| d as u32).sum();
        let value: Vec<Rational> = if total < self.degree || (total - self.degree) % 2 == 1 {
            vec![Rational::zero(); self.dimension()]
        } else {
            self.coeffs
                .iter()
                .zip(&self.gram_diag)
                .map(|(c, g)| {
                    let mut acc = Rational::zero();
                    for (m, ci) in self.monomials.iter().zip(c) {
                        if ci.is_zero() {
                            continue;
                        }
                        let e = [a[0] + m[0], a[1] + m[1], a[2] + m[2], a[3] + m[3]];
                        let mo = sphere_moment(e);
                        if !mo.is_zero() {
                            acc += ci * mo;
                        }
                    }
                    acc / g
                })
                .collect()
        };
        let value = Arc::new(value);
        self.dual.write().unwrap().insert(a, value.clone());
        value
    }

    /// Coordinates of (the H_k component of) a 4-variable polynomial.
    pub fn analyze(&self, p: &MultiPoly) -> Vec<Rational> {
        let mut out = vec![Rational::zero(); self.dimension()];
        for (e, c) in p.terms() {
            let d = self.dual_coefficients([e[0], e[1], e[2], e[3]]);
            for (o, di) in out.iter_mut().zip(d.iter()) {
                if !di.is_zero() {
                    *o += c * di;
                }
            }
        }
        out
    }

    pub fn synthesize(&self, coords: &[Rational]) -> MultiPoly {
        let mut out = MultiPoly::zero(4);
        for (y, c) in self.elements.iter().zip(coords) {
            out.add_scaled(y, c);
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        #[derive(Serialize)]
        struct Doc<'a> {
            degree: u32,
            dimension: usize,
            elements: &'a [MultiPoly],
            gram_diag: Vec<RationalJson>,
        }
        serde_json::to_value(Doc {
            degree: self.degree,
            dimension: self.dimension(),
            elements: &self.elements,
            gram_diag: self.gram_diag.iter().cloned().map(RationalJson).collect(),
        })
        .expect("serializable")
    }
}

fn basis_cache() -> &'static RwLock<HashMap<u32, Arc<HarmonicBasis>>> {
    static CACHE: OnceLock<RwLock<HashMap<u32, Arc<HarmonicBasis>>>> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

/// The memoized basis of H_k obtained by exact Gram–Schmidt over the
/// harmonic parts of the degree-`k` monomials in graded-lex order.
pub fn harmonic_basis(k: u32) -> Arc<HarmonicBasis> {
    if let Some(b) = basis_cache().read().unwrap().get(&k) {
        return b.clone();
    }
    let built = Arc::new(HarmonicBasis::build(k));
    basis_cache().write().unwrap().entry(k).or_insert(built).clone()
}

#[derive(Clone, Debug, Serialize)]
pub struct LaplaceBeltramiReport {
    pub degree: u32,
    pub expected: i64,
    /// `λ` with `Δ_{S3} p = λ p` from the exact radial identity, if `Δ_{S3} p`
    /// is proportional to `p`.
    pub exact_eigenvalue: Option<RationalJson>,
    pub exact_ok: bool,
    pub fd_step: f64,
    pub fd_tolerance: f64,
    pub fd_max_relative_error: f64,
    pub fd_ok: bool,
}

pub const FD_STEP: f64 = 1e-4;
pub const FD_TOLERANCE: f64 = 1e-6;

/// Checks `Δ_{S3} p = -k(k+2) p` for a harmonic homogeneous `p` of degree `k`.
///
/// Exact route: on the unit sphere `Δ_{R4} = E(E+2) + Δ_{S3}` with `E` the
/// Euler operator, so `Δ_{S3} p = Δ p - E(E+2) p`. Float route: second
/// central differences of the degree-0 extension `p(x/|x|)`.
pub fn laplace_beltrami_check(p: &MultiPoly, seed: u64) -> Result<LaplaceBeltramiReport> {
    require_four_vars(p)?;
    let k = p.homogeneous_degree()?;
    if !p.euclidean_laplacian(Block::X)?.is_zero() {
        return Err(Error::NotHarmonic);
    }
    if p.is_zero() {
        return Err(Error::VerificationFailed("the zero polynomial has no eigenvalue".into()));
    }
    let expected = -(k as i64) * (k as i64 + 2);

    let lap = p.euclidean_laplacian(Block::X)?;
    let e1 = p.euler(Block::X)?;
    let e_e2 = &e1.euler(Block::X)? + &e1.scale(&int(2));
    let spherical = &lap - &e_e2;
    let (lead_e, lead_c) = p.terms().next().expect("nonzero");
    let lambda = spherical.coeff(lead_e) / lead_c;
    let exact_eigenvalue = (spherical == p.scale(&lambda)).then_some(lambda);
    let exact_ok = exact_eigenvalue.as_ref() == Some(&int(expected));

    let fp = p.to_float();
    let f = |x: [f64; 4]| {
        let n = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        fp.eval(&[x[0] / n, x[1] / n, x[2] / n, x[3] / n])
    };
    let h = FD_STEP;
    let mut worst_err: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for q in haar_sample(seed, 16) {
        let x = q.to_array();
        let center = f(x);
        let mut lap_fd = 0.0;
        for i in 0..4 {
            let mut plus = x;
            let mut minus = x;
            plus[i] += h;
            minus[i] -= h;
            lap_fd += (f(plus) - 2.0 * center + f(minus)) / (h * h);
        }
        worst_err = worst_err.max((lap_fd - expected as f64 * center).abs());
        scale = scale.max(center.abs());
    }
    let rel = worst_err / ((expected.abs().max(1) as f64) * scale.max(f64::MIN_POSITIVE));
    Ok(LaplaceBeltramiReport {
        degree: k,
        expected,
        exact_eigenvalue: exact_eigenvalue.map(RationalJson),
        exact_ok,
        fd_step: h,
        fd_tolerance: FD_TOLERANCE,
        fd_max_relative_error: rel,
        fd_ok: rel <= FD_TOLERANCE,
    })
}

/// The reproducing kernel of E_k as a polynomial in `(x, y)`.
#[derive(Debug)]
pub struct ZonalKernel {
    degree: u32,
    poly: MultiPoly,
    float: FloatPoly,
}

impl ZonalKernel {
    fn build(k: u32) -> Self {
        let basis = harmonic_basis(k);
        let mut poly = MultiPoly::zero(8);
        for (y, g) in basis.elements().iter().zip(basis.gram_diag()) {
            let inv = Rational::one() / g;
            for (a, ca) in y.terms() {
                let ca = ca * &inv;
                for (b, cb) in y.terms() {
                    let e: Exponents = a.iter().chain(b.iter()).copied().collect();
                    poly.add_product_term(e, &ca, cb);
                }
            }
        }
        let float = poly.to_float();
        Self { degree: k, poly, float }
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    /// `Z(x, y)` in 8 variables (`x` block then `y` block).
    pub fn poly(&self) -> &MultiPoly {
        &self.poly
    }

    pub fn eval(&self, x: &Quat, y: &Quat) -> f64 {
        self.float.eval(&[x.w, x.x, x.y, x.z, y.w, y.x, y.y, y.z])
    }

    /// `Z(x, x)` as a 4-variable polynomial.
    pub fn diagonal(&self) -> MultiPoly {
        let mut out = MultiPoly::zero(4);
        for (e, c) in self.poly.terms() {
            out.add_term((0..4).map(|i| e[i] + e[i + 4]).collect(), c.clone());
        }
        out
    }

    /// `Z(e, e)` with `e = (1, 0, 0, 0)`.
    pub fn at_identity(&self) -> Rational {
        let one = Rational::one();
        let zero = Rational::zero();
        self.poly.eval_exact(&[
            one.clone(), zero.clone(), zero.clone(), zero.clone(), one, zero.clone(), zero.clone(), zero,
        ])
    }

    /// `∫ Z(x, y) q(y) dy` as a polynomial in `x`.
    pub fn reproduce(&self, q: &MultiPoly) -> Result<MultiPoly> {
        require_four_vars(q)?;
        // Z = Σ_b y^b D_b(x)
        let mut out = MultiPoly::zero(4);
        for (outer, d_b) in self.poly.block_slices(Block::X)? {
            let b = [outer[4], outer[5], outer[6], outer[7]];
            let mut weight = Rational::zero();
            for (c_e, c) in q.terms() {
                let m = sphere_moment([b[0] + c_e[0], b[1] + c_e[1], b[2] + c_e[2], b[3] + c_e[3]]);
                if !m.is_zero() {
                    weight += c * m;
                }
            }
            out.add_scaled(&d_b, &weight);
        }
        Ok(out)
    }

    /// `∫ Z(x, y)^2 dx` as a polynomial in `y` (4 variables).
    pub fn squared_integral(&self) -> Result<MultiPoly> {
        // Z = Σ_a x^a C_a(y)
        let slices: Vec<([u8; 4], MultiPoly)> = self
            .poly
            .block_slices(Block::Y)?
            .into_iter()
            .map(|(outer, c)| ([outer[0], outer[1], outer[2], outer[3]], c))
            .collect();
        let mut out = MultiPoly::zero(4);
        for (i, (a, ca)) in slices.iter().enumerate() {
            for (b, cb) in &slices[i..] {
                let m = sphere_moment([a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]]);
                if m.is_zero() {
                    continue;
                }
                let weight = if a == b { m } else { m * int(2) };
                out.add_scaled(&(ca * cb), &weight);
            }
        }
        Ok(out)
    }
}

fn zonal_cache() -> &'static RwLock<HashMap<u32, Arc<ZonalKernel>>> {
    static CACHE: OnceLock<RwLock<HashMap<u32, Arc<ZonalKernel>>>> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

/// `Z^{(k)}(x, y) = Σ_i Y_i(x) Y_i(y) / ‖Y_i‖²`, memoized.
pub fn zonal(k: u32) -> Arc<ZonalKernel> {
    if let Some(z) = zonal_cache().read().unwrap().get(&k) {
        return z.clone();
    }
    let built = Arc::new(ZonalKernel::build(k));
    zonal_cache().write().unwrap().entry(k).or_insert(built).clone()
}

#[derive(Clone, Debug, Serialize)]
pub struct ZonalIdentityReport {
    pub degree: u32,
    pub expected: RationalJson,
    /// `∫ |Z_y(x)|² dx`, if it reduces to a constant on the sphere.
    pub squared_integral: Option<RationalJson>,
    pub diagonal_is_constant: bool,
    pub diagonal_integral: RationalJson,
    pub value_at_identity: RationalJson,
    pub passed: bool,
}

/// Computes the three zonal identities `∫|Z_y(x)|² dx`, `∫ Z_x(x) dx` and
/// `Z_e(e)` exactly and compares each with `(k+1)²`.
pub fn zonal_identity_suite(k: u32) -> Result<ZonalIdentityReport> {
    let z = zonal(k);
    let expected = int((k as i64 + 1) * (k as i64 + 1));
    let squared = reduce_to_sphere(&z.squared_integral()?, Block::X)?.as_constant();
    let diagonal = z.diagonal();
    let diagonal_is_constant = reduce_to_sphere(&diagonal, Block::X)?.as_constant().as_ref() == Some(&expected);
    let diagonal_integral = diagonal.sphere_integral(Block::X)?.as_constant().expect("integral is constant");
    let at_identity = z.at_identity();
    let passed = squared.as_ref() == Some(&expected)
        && diagonal_is_constant
        && diagonal_integral == expected
        && at_identity == expected;
    Ok(ZonalIdentityReport {
        degree: k,
        expected: RationalJson(expected),
        squared_integral: squared.map(RationalJson),
        diagonal_is_constant,
        diagonal_integral: RationalJson(diagonal_integral),
        value_at_identity: RationalJson(at_identity),
        passed,
    })
}

/// The H_k component of `f|_{S3}`, computed by integrating against `Z^{(k)}`.
pub fn project_ek(f: &MultiPoly, k: u32) -> Result<MultiPoly> {
    zonal(k).reproduce(f)
}

/// Squared L2(S3) norm of a 4-variable polynomial.
pub fn sphere_norm_sqr(p: &MultiPoly) -> Rational {
    p.sphere_inner(p)
}
