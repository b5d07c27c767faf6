use std::collections::HashSet;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;

use super::matrix::{IntMatrix, IntVector};
use super::normal_form::{AffineLattice, LatticeBasis};
use super::ops::{image_lattice, solve_affine_preimage, solve_preimage};
use crate::error::{Error, Result};
use crate::spectrum::{Backend, PreimageBackend, SubsetSpec, Target};

/// Longest orbit walked modulo the index when certifying that a coset
/// target is never reached.
const RESIDUE_WALK_CAP: usize = 1 << 20;

/// `Z^m` with endomorphisms given as integer matrices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LatticeBackend {
    dim: usize,
}

impl LatticeBackend {
    pub fn new(dim: usize) -> Self {
        LatticeBackend { dim }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn check_dim(&self, found: usize) -> Result<()> {
        if found != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found,
            });
        }
        Ok(())
    }

    /// Validates a target's dimensions.
    pub fn check_target(&self, target: &Target<Self>) -> Result<()> {
        match target {
            SubsetSpec::FiniteSet(xs) => xs.iter().try_for_each(|x| self.check_dim(x.dim())),
            SubsetSpec::Recognizable { subgroup, coset_reps } => {
                self.check_dim(subgroup.ambient_dim())?;
                coset_reps.iter().try_for_each(|x| self.check_dim(x.dim()))
            }
        }
    }
}

/// `x mod d`, entrywise into `[0, d)`.
fn residue(x: &IntVector, d: &BigInt) -> IntVector {
    IntVector(x.0.iter().map(|e| e.mod_floor(d)).collect())
}

impl Backend for LatticeBackend {
    type Elem = IntVector;
    type Endo = IntMatrix;
    type Subgroup = LatticeBasis;

    fn apply(&self, phi: &IntMatrix, x: &IntVector) -> IntVector {
        x.mul_matrix(phi)
    }

    fn check_element(&self, x: &IntVector) -> Result<()> {
        self.check_dim(x.dim())
    }

    fn check_endo(&self, phi: &IntMatrix) -> Result<()> {
        self.check_dim(phi.dim())
    }

    fn contains(&self, target: &Target<Self>, x: &IntVector) -> Result<bool> {
        self.check_target(target)?;
        self.check_dim(x.dim())?;
        Ok(match target {
            SubsetSpec::FiniteSet(xs) => xs.contains(x),
            SubsetSpec::Recognizable { subgroup, coset_reps } => {
                coset_reps.iter().any(|r| subgroup.contains(&x.sub(r)))
            }
        })
    }

    /// Finite targets: either every target left `Im(Q^{searched+1})`, or the
    /// orbit already closed into a cycle. Cosets of a full-rank lattice of
    /// index `d`: membership only depends on `x mod d`, so the orbit of the
    /// residue is walked until it cycles.
    fn certify_unreachable(
        &self,
        phi: &IntMatrix,
        g: &IntVector,
        target: &Target<Self>,
        searched: u64,
    ) -> Result<bool> {
        self.check_target(target)?;
        match target {
            SubsetSpec::FiniteSet(xs) => {
                let image = image_lattice(phi, searched + 1);
                if xs.iter().all(|y| !image.contains(y)) {
                    return Ok(true);
                }
                let mut seen = HashSet::new();
                let mut x = g.clone();
                for _ in 0..=searched {
                    if !seen.insert(x.clone()) {
                        return Ok(true);
                    }
                    x = x.mul_matrix(phi);
                }
                Ok(false)
            }
            SubsetSpec::Recognizable { subgroup, .. } => {
                let Some(d) = subgroup.index() else {
                    return Ok(false);
                };
                let mut seen = HashSet::new();
                let mut x = residue(g, &d);
                while seen.len() < RESIDUE_WALK_CAP {
                    if !seen.insert(x.clone()) {
                        return Ok(true);
                    }
                    if self.contains(target, &x)? {
                        return Ok(false);
                    }
                    x = residue(&x.mul_matrix(phi), &d);
                }
                Ok(false)
            }
        }
    }
}

/// A preorder in `Z^m`: points of some `include` coset lying in no
/// `exclude` coset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticePreorder {
    include: Vec<AffineLattice>,
    exclude: Vec<AffineLattice>,
}

fn push_unique(out: &mut Vec<AffineLattice>, c: AffineLattice) {
    if !out.contains(&c) {
        out.push(c);
    }
}

impl LatticePreorder {
    /// Drops excluded cosets covered by another excluded coset and included
    /// cosets that are excluded outright.
    fn new(include: Vec<AffineLattice>, exclude: Vec<AffineLattice>) -> Self {
        let mut ex: Vec<AffineLattice> = Vec::new();
        for c in exclude {
            if ex.iter().any(|e| c.is_subset_of(e)) {
                continue;
            }
            ex.retain(|e| !e.is_subset_of(&c));
            ex.push(c);
        }
        let include = include
            .into_iter()
            .filter(|c| !ex.iter().any(|e| c.is_subset_of(e)))
            .collect();
        LatticePreorder { include, exclude: ex }
    }

    pub fn include(&self) -> &[AffineLattice] {
        &self.include
    }

    pub fn exclude(&self) -> &[AffineLattice] {
        &self.exclude
    }

    pub fn contains(&self, x: &IntVector) -> bool {
        self.include.iter().any(|c| c.contains(x)) && !self.exclude.iter().any(|c| c.contains(x))
    }

    /// True when emptiness is evident from the representation alone.
    pub fn is_evidently_empty(&self) -> bool {
        self.include.is_empty()
    }
}

impl fmt::Display for LatticePreorder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |cs: &[AffineLattice]| {
            if cs.is_empty() {
                "{}".to_string()
            } else {
                cs.iter().map(|c| format!("({c})")).collect::<Vec<_>>().join(" | ")
            }
        };
        write!(f, "{}", join(&self.include))?;
        if !self.exclude.is_empty() {
            write!(f, " minus {}", join(&self.exclude))?;
        }
        Ok(())
    }
}

impl PreimageBackend for LatticeBackend {
    type Union = Vec<AffineLattice>;
    type Preorder = LatticePreorder;

    fn preimage_power(&self, phi: &IntMatrix, target: &Target<Self>, n: u64) -> Result<Vec<AffineLattice>> {
        self.check_endo(phi)?;
        self.check_target(target)?;
        let mut out = Vec::new();
        match target {
            SubsetSpec::FiniteSet(xs) => {
                for y in xs {
                    if let Some(c) = solve_preimage(phi, n, y)? {
                        push_unique(&mut out, c);
                    }
                }
            }
            SubsetSpec::Recognizable { subgroup, coset_reps } => {
                for r in coset_reps {
                    let coset = AffineLattice::new(r.clone(), subgroup.clone())?;
                    if let Some(c) = solve_affine_preimage(phi, n, &coset)? {
                        push_unique(&mut out, c);
                    }
                }
            }
        }
        Ok(out)
    }

    fn preorder_from(&self, hit: Vec<AffineLattice>, earlier: &[Vec<AffineLattice>]) -> Result<LatticePreorder> {
        Ok(LatticePreorder::new(hit, earlier.iter().flatten().cloned().collect()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::{phi_order, phi_preorder, HorizonPolicy, OrderValue};

    fn v(xs: &[i64]) -> IntVector {
        IntVector::from_i64s(xs)
    }

    fn coset(offset: i64, modulus: i64) -> Target<LatticeBackend> {
        SubsetSpec::Recognizable {
            subgroup: LatticeBasis::from_rows(vec![v(&[modulus]).0], 1),
            coset_reps: vec![v(&[offset])],
        }
    }

    #[test]
    fn order_examples() {
        let b = LatticeBackend::new(1);
        let dbl = IntMatrix::from_i64s(&[&[2]]);
        let k = SubsetSpec::finite([v(&[8])]);
        let p = HorizonPolicy::default();
        assert_eq!(phi_order(&b, &v(&[1]), &k, &dbl, p).unwrap(), OrderValue::Finite(3));
        assert_eq!(phi_order(&b, &v(&[8]), &k, &dbl, p).unwrap(), OrderValue::Finite(0));
        assert_eq!(phi_order(&b, &v(&[3]), &coset(1, 3), &dbl, p).unwrap(), OrderValue::Infinite);
        assert_eq!(phi_order(&b, &v(&[3]), &k, &dbl, p).unwrap(), OrderValue::Infinite);
    }

    #[test]
    fn order_without_certificate_is_unknown() {
        // (1,0) drifts under a shear and never cycles; the target stays in
        // every image.
        let b = LatticeBackend::new(2);
        let shear = IntMatrix::from_i64s(&[&[1, 0], &[1, 1]]);
        let k = SubsetSpec::finite([v(&[-1, 0])]);
        let got = phi_order(&b, &v(&[0, 1]), &k, &shear, HorizonPolicy::new(16)).unwrap();
        assert_eq!(got, OrderValue::UnknownBeyond(16));
    }

    #[test]
    fn preorder_of_nilpotent() {
        let b = LatticeBackend::new(2);
        let nil = IntMatrix::from_i64s(&[&[0, 1], &[0, 0]]);
        let k = SubsetSpec::finite([v(&[0, 0])]);
        let p = phi_preorder(&b, 2, &k, &nil).unwrap();
        assert_eq!(p.include(), &[AffineLattice::new(v(&[0, 0]), LatticeBasis::full(2)).unwrap()]);
        assert_eq!(p.exclude().len(), 1);
        for a in -3..=3 {
            for c in -3..=3 {
                assert_eq!(p.contains(&v(&[a, c])), a != 0, "({a},{c})");
            }
        }
    }

    #[test]
    fn preorder_of_coset() {
        let b = LatticeBackend::new(1);
        let dbl = IntMatrix::from_i64s(&[&[2]]);
        let p = phi_preorder(&b, 1, &coset(1, 3), &dbl).unwrap();
        assert_eq!(p.include(), &[AffineLattice::new(v(&[2]), LatticeBasis::from_rows(vec![v(&[3]).0], 1)).unwrap()]);
        assert!(p.contains(&v(&[5])) && !p.contains(&v(&[1])));
        let p0 = phi_preorder(&b, 0, &SubsetSpec::finite([v(&[8])]), &dbl).unwrap();
        assert!(p0.contains(&v(&[8])) && !p0.contains(&v(&[4])));
    }

    #[test]
    fn dimension_errors() {
        let b = LatticeBackend::new(2);
        let k = SubsetSpec::finite([v(&[1])]);
        let id = IntMatrix::identity(2);
        assert!(phi_order(&b, &v(&[1, 0]), &k, &id, HorizonPolicy::default()).is_err());
        assert!(phi_order(&b, &v(&[1]), &SubsetSpec::finite([v(&[1, 0])]), &id, HorizonPolicy::default()).is_err());
    }
}
