//! The operator `□ = Δ_x − Δ_y` as a block multiplier, its inverse on the
//! off-diagonal blocks, and the four inclusions `ker T = im □`,
//! `ker □ = im T` at a finite truncation.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::product::{block_dim, random_spectral, SpectralCoeffs, Support};
use crate::scalar::{Rational, Scalar};

use super::float_rep::float_block_apply;
use super::reflection::reflection;
use super::spectral::{xi_spectral_with, TransformTable};
use super::symbolic::annihilates_block;

/// Float tolerance for the float shadow of the exact identities.
pub const FLOAT_TOLERANCE: f64 = 1e-9;

/// Eigenvalue of `□` on `H_k ⊗ H_l`: `l(l+2) − k(k+2)`.
pub fn box_multiplier(k: usize, l: usize) -> i64 {
    (l * (l + 2)) as i64 - (k * (k + 2)) as i64
}

pub fn box_apply<S: Scalar>(c: &SpectralCoeffs<S>) -> SpectralCoeffs<S> {
    c.map_blocks(|k, l, m| m.scale(&S::from_i64(box_multiplier(k, l))))
}

fn negligible<S: Scalar>(m: &Matrix<S>) -> bool {
    if S::EXACT {
        m.is_zero()
    } else {
        m.max_abs() <= 1e-12
    }
}

/// The solution `u` of `□u = c` with zero diagonal blocks.
///
/// `c` must lie in `ker T`, i.e. have vanishing diagonal blocks.
pub fn solve_box<S: Scalar>(c: &SpectralCoeffs<S>) -> Result<SpectralCoeffs<S>> {
    for k in 0..=c.truncation() {
        if !negligible(c.block(k, k)?) {
            return Err(Error::NotInKernel { k });
        }
    }
    Ok(c.map_blocks(|k, l, m| {
        if k == l {
            Matrix::zeros(m.rows(), m.cols())
        } else {
            m.scale(&(S::one() / S::from_i64(box_multiplier(k, l))))
        }
    }))
}

fn agrees<S: Scalar>(a: &SpectralCoeffs<S>, b: &SpectralCoeffs<S>) -> Result<bool> {
    if S::EXACT {
        Ok(a == b)
    } else {
        Ok(a.max_abs_diff(b)? <= FLOAT_TOLERANCE)
    }
}

fn diagonal_vanishes<S: Scalar>(c: &SpectralCoeffs<S>) -> bool {
    (0..=c.truncation()).all(|k| c.block(k, k).map(negligible).unwrap_or(false))
}

fn off_diagonal_vanishes<S: Scalar>(c: &SpectralCoeffs<S>) -> bool {
    c.blocks().all(|(&(k, l), m)| k == l || negligible(m))
}

#[derive(Clone, Debug, Serialize)]
pub struct Inclusion {
    pub passed: bool,
    pub dimension: usize,
    pub witness: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExactnessReport {
    pub truncation: usize,
    pub mode: String,
    pub total_dimension: usize,
    pub ker_t: Inclusion,
    pub im_t: Inclusion,
    pub ker_box: Inclusion,
    pub im_box: Inclusion,
    /// `□T = 0` and `T□ = 0` on a random input.
    pub compositions_vanish: bool,
    pub passed: bool,
}

struct Dims {
    diagonal: usize,
    off_diagonal: usize,
}

fn dims(n: usize) -> Dims {
    let diagonal: usize = (0..=n).map(|k| block_dim(k) * block_dim(k)).sum();
    let total: usize = (0..=n).map(block_dim).sum::<usize>().pow(2);
    Dims { diagonal, off_diagonal: total - diagonal }
}

/// Shared part of both modes. `off_diagonal_killed(k, l)` certifies
/// `T E_{k,l} = 0`; `injective(k)` certifies `(k+1)² T² = Id` on `(k, k)`.
fn exactness_with<S: Scalar>(
    n: usize,
    mode: &str,
    table: &TransformTable<S>,
    seed: u64,
    off_diagonal_killed: impl Fn(usize, usize) -> Result<bool>,
    injective: impl Fn(usize) -> Result<bool>,
) -> Result<ExactnessReport> {
    let lift = |c: SpectralCoeffs<Rational>| c.to_scalar::<S>();
    let d = dims(n);

    // ker T: every off-diagonal block is killed and T is injective on the diagonal
    let mut killed = true;
    for k in 0..=n {
        for l in 0..=n {
            if k != l && !off_diagonal_killed(k, l)? {
                killed = false;
            }
        }
    }
    let mut inj = true;
    for k in 0..=n {
        inj &= injective(k)?;
    }
    let ker_t = Inclusion {
        passed: killed && inj,
        dimension: d.off_diagonal,
        witness: format!("T E_(k,l) = 0 for k != l: {killed}; (k+1)^2 T^2 = Id on each (k,k): {inj}"),
    };

    // im T: a preimage of a random diagonal b is (k+1)² T b
    let b = lift(random_spectral(n, Support::Diagonal, seed));
    let pre = xi_spectral_with(&b, table)?.map_blocks(|k, _, m| m.scale(&S::from_i64(((k + 1) * (k + 1)) as i64)));
    let hit = agrees(&xi_spectral_with(&pre, table)?, &b)?;
    let full = lift(random_spectral(n, Support::All, seed ^ 0x5eed));
    let image_diagonal = off_diagonal_vanishes(&xi_spectral_with(&full, table)?);
    let im_t = Inclusion {
        passed: hit && image_diagonal,
        dimension: d.diagonal,
        witness: format!("T((k+1)^2 T b) = b for random diagonal b: {hit}; T c is diagonal: {image_diagonal}"),
    };

    // ker □: □ vanishes on the diagonal and has nonzero multipliers elsewhere
    let diag_killed = box_apply(&b).blocks().all(|(_, m)| negligible(m));
    let nonzero = (0..=n).all(|k| (0..=n).all(|l| k == l || box_multiplier(k, l) != 0));
    let ker_box = Inclusion {
        passed: diag_killed && nonzero,
        dimension: d.diagonal,
        witness: format!("box kills diagonal blocks: {diag_killed}; l(l+2) - k(k+2) != 0 for k != l: {nonzero}"),
    };

    // im □: random off-diagonal c is hit by solve_box, and □ c has no diagonal part
    let c = lift(random_spectral(n, Support::OffDiagonal, seed ^ 0xb0c5));
    let u = solve_box(&c)?;
    let round_trip = agrees(&box_apply(&u), &c)?;
    let box_off = diagonal_vanishes(&box_apply(&full));
    let im_box = Inclusion {
        passed: round_trip && box_off,
        dimension: d.off_diagonal,
        witness: format!("box(solve_box(c)) = c for random off-diagonal c: {round_trip}; box c has no diagonal part: {box_off}"),
    };

    let box_t = box_apply(&xi_spectral_with(&full, table)?);
    let t_box = xi_spectral_with(&box_apply(&full), table)?;
    let compositions_vanish = box_t.blocks().chain(t_box.blocks()).all(|(_, m)| negligible(m));

    let passed = ker_t.passed && im_t.passed && ker_box.passed && im_box.passed && compositions_vanish;
    Ok(ExactnessReport {
        truncation: n,
        mode: mode.to_string(),
        total_dimension: d.diagonal + d.off_diagonal,
        ker_t,
        im_t,
        ker_box,
        im_box,
        compositions_vanish,
        passed,
    })
}

/// The four inclusions at truncation `N` in exact arithmetic.
pub fn exactness_report(n: usize, seed: u64) -> Result<ExactnessReport> {
    let table = TransformTable::exact(n)?;
    exactness_with(n, "exact", &table, seed, annihilates_block, |k| {
        let r = reflection(k)?;
        Ok(r.verdicts.t_squared)
    })
}

/// The same inclusions with float transforms, within [`FLOAT_TOLERANCE`].
pub fn exactness_report_float(n: usize, seed: u64) -> Result<ExactnessReport> {
    let table = TransformTable::float(n);
    let probe = |k: usize, l: usize, s: u64| {
        random_spectral(n.max(k).max(l), Support::All, s).block(k, l).map(|m| m.to_f64())
    };
    let killed = |k: usize, l: usize| -> Result<bool> {
        let c = probe(k, l, seed ^ ((k * 31 + l) as u64))?;
        Ok(float_block_apply(k, l, &c).max_abs() <= FLOAT_TOLERANCE)
    };
    let injective = |k: usize| -> Result<bool> {
        let b = probe(k, k, seed ^ (k as u64 * 977))?;
        let scale = ((k + 1) * (k + 1)) as f64;
        let tb = table.apply_block(k, &b)?;
        let ttb = table.apply_block(k, &tb)?.scale(&scale);
        Ok(ttb.sub(&b)?.max_abs() <= FLOAT_TOLERANCE * b.max_abs().max(1.0))
    };
    exactness_with(n, "float", &table, seed, killed, injective)
}
