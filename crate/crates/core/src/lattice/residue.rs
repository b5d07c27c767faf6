//! Coset targets in `Z^m`, decided in a finite residue group.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive};

use super::matrix::{IntMatrix, IntVector};
use super::normal_form::{smith_normal_form, LatticeBasis};
use crate::error::{Error, Result};
use crate::finite::{spectrum_exact, ElemSet, FiniteEndo};
use crate::spectrum::Spectrum;

/// Default cap on the size of the residue group `(Z/e)^m`.
pub const DEFAULT_RESIDUE_CAP: usize = 1 << 20;

/// Exponent of `Z^m / L` for a full-rank `L`: the largest invariant factor.
pub fn lattice_exponent(lattice: &LatticeBasis) -> Option<BigInt> {
    if !lattice.is_full_rank() {
        return None;
    }
    let rows = lattice.rows().iter().map(|r| r.0.clone()).collect();
    let snf = smith_normal_form(&IntMatrix::new(rows).ok()?);
    snf.invariant_factors().into_iter().map(|d| d.abs()).max()
}

fn encode(v: &IntVector, e: &BigInt, e_usize: usize) -> usize {
    v.0.iter().rev().fold(0, |acc, x| {
        acc * e_usize + x.mod_floor(e).to_usize().expect("residue below the exponent")
    })
}

fn decode(mut i: usize, e: usize, m: usize) -> IntVector {
    let mut out = Vec::with_capacity(m);
    for _ in 0..m {
        out.push(BigInt::from(i % e));
        i /= e;
    }
    IntVector(out)
}

/// Spectrum of `⋃ (r + L)` under `Q` for a full-rank lattice `L`.
///
/// With `e` the exponent of `Z^m/L`, the subgroup `eZ^m` lies in `L` and is
/// mapped into itself by `Q`, so orders can be read off in `(Z/e)^m`.
pub fn coset_target_spectrum(q: &IntMatrix, lattice: &LatticeBasis, reps: &[IntVector], cap: usize) -> Result<Spectrum> {
    let m = q.dim();
    if lattice.ambient_dim() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            found: lattice.ambient_dim(),
        });
    }
    if let Some(r) = reps.iter().find(|r| r.dim() != m) {
        return Err(Error::DimensionMismatch { expected: m, found: r.dim() });
    }
    let e = lattice_exponent(lattice)
        .ok_or_else(|| Error::Unsupported("coset targets need a full-rank lattice".into()))?;
    let too_big = || Error::CapExceeded {
        what: "residue group",
        cap,
    };
    let e_usize = e.to_usize().ok_or_else(too_big)?;
    let order = u32::try_from(m)
        .ok()
        .and_then(|m| e_usize.checked_pow(m))
        .filter(|&n| n <= cap)
        .ok_or_else(too_big)?;
    let mut map = Vec::with_capacity(order);
    let mut target = ElemSet::empty(order);
    for i in 0..order {
        let v = decode(i, e_usize, m);
        map.push(encode(&v.mul_matrix(q), &e, e_usize));
        if reps.iter().any(|r| lattice.contains(&v.sub(r))) {
            target.insert(i);
        }
    }
    Ok(spectrum_exact(&FiniteEndo::from_map_unchecked(map), &target))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::hermite_normal_form;

    fn lattice(rows: &[&[i64]]) -> LatticeBasis {
        let v: Vec<IntVector> = rows.iter().map(|r| IntVector::from_i64s(r)).collect();
        hermite_normal_form(&v, rows[0].len()).unwrap()
    }

    #[test]
    fn exponents() {
        assert_eq!(lattice_exponent(&lattice(&[&[2, 0], &[0, 6]])), Some(BigInt::from(6)));
        assert_eq!(lattice_exponent(&lattice(&[&[4, 2], &[0, 2]])), Some(BigInt::from(4)));
        assert_eq!(lattice_exponent(&lattice(&[&[1, 0]])), None);
    }

    #[test]
    fn doubling_into_one_mod_three() {
        let q = IntMatrix::from_i64s(&[&[2]]);
        let l = lattice(&[&[3]]);
        let s = coset_target_spectrum(&q, &l, &[IntVector::from_i64s(&[1])], 100).unwrap();
        assert_eq!(s, Spectrum::Prefix(1));
        let s = coset_target_spectrum(&q, &l, &[IntVector::from_i64s(&[0])], 100).unwrap();
        assert_eq!(s, Spectrum::Prefix(0));
    }

    #[test]
    fn nilpotent_into_a_coset() {
        let q = IntMatrix::from_i64s(&[&[0, 1], &[0, 0]]);
        let l = lattice(&[&[2, 0], &[0, 2]]);
        let s = coset_target_spectrum(&q, &l, &[IntVector::from_i64s(&[0, 0])], 100).unwrap();
        assert_eq!(s, Spectrum::Prefix(2));
    }

    #[test]
    fn caps_and_rank() {
        let q = IntMatrix::from_i64s(&[&[1, 0], &[0, 1]]);
        let l = lattice(&[&[1000, 0], &[0, 1000]]);
        let err = coset_target_spectrum(&q, &l, &[IntVector::from_i64s(&[0, 0])], 1000).unwrap_err();
        assert!(err.is_budget());
        let thin = lattice(&[&[1, 0]]);
        assert!(coset_target_spectrum(&q, &thin, &[], 1000).is_err());
    }
}
