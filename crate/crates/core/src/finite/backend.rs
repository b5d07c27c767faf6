use super::endo::FiniteEndo;
use super::group::FiniteGroupTable;
use super::set::ElemSet;
use crate::error::{Error, Result};
use crate::spectrum::{
    assemble_spectrum, phi_preorder, Backend, Emptiness, PreimageBackend, SetImageBackend, Spectrum, SubsetSpec, Target,
};

/// A finite group seen through the generic driver traits.
#[derive(Debug, Clone, Copy)]
pub struct FiniteBackend<'a> {
    group: &'a FiniteGroupTable,
}

impl<'a> FiniteBackend<'a> {
    pub fn new(group: &'a FiniteGroupTable) -> Self {
        FiniteBackend { group }
    }

    pub fn group(&self) -> &FiniteGroupTable {
        self.group
    }

    fn check_set(&self, s: &ElemSet) -> Result<()> {
        if s.universe() != self.group.order() {
            return Err(Error::DimensionMismatch {
                expected: self.group.order(),
                found: s.universe(),
            });
        }
        Ok(())
    }

    /// Spectrum assembled from the generic preorder driver. Preorders are
    /// disjoint, so at most `|G|` of them are nonempty.
    pub fn driver_spectrum(&self, phi: &FiniteEndo, target: &Target<Self>) -> Result<Spectrum> {
        let probe = |n| {
            Ok(if phi_preorder(self, n, target, phi)?.is_empty() {
                Emptiness::Empty
            } else {
                Emptiness::Nonempty
            })
        };
        assemble_spectrum(probe, self.group.order() as u64, false)
    }

    pub fn check_target(&self, target: &Target<Self>) -> Result<()> {
        match target {
            SubsetSpec::FiniteSet(xs) => xs.iter().try_for_each(|&x| self.group.check_index(x)),
            SubsetSpec::Recognizable { subgroup, coset_reps } => {
                self.check_set(subgroup)?;
                if !subgroup.contains(0) || subgroup.iter().any(|a| subgroup.iter().any(|b| !subgroup.contains(self.group.mul(a, self.group.inv(b))))) {
                    return Err(Error::InvalidTarget("coset target needs a subgroup".into()));
                }
                coset_reps.iter().try_for_each(|&x| self.group.check_index(x))
            }
        }
    }
}

impl Backend for FiniteBackend<'_> {
    type Elem = usize;
    type Endo = FiniteEndo;
    type Subgroup = ElemSet;

    fn apply(&self, phi: &FiniteEndo, x: &usize) -> usize {
        phi.apply(*x)
    }

    fn check_element(&self, x: &usize) -> Result<()> {
        self.group.check_index(*x)
    }

    fn check_endo(&self, phi: &FiniteEndo) -> Result<()> {
        if phi.order() != self.group.order() {
            return Err(Error::DimensionMismatch {
                expected: self.group.order(),
                found: phi.order(),
            });
        }
        Ok(())
    }

    fn contains(&self, target: &Target<Self>, x: &usize) -> Result<bool> {
        self.check_element(x)?;
        Ok(match target {
            SubsetSpec::FiniteSet(xs) => xs.contains(x),
            SubsetSpec::Recognizable { subgroup, coset_reps } => coset_reps
                .iter()
                .any(|&r| subgroup.contains(self.group.mul(self.group.inv(r), *x))),
        })
    }

    /// An orbit in a group of order `n` repeats within `n` steps, so `n`
    /// negative tests rule out every later hit.
    fn certify_unreachable(&self, phi: &FiniteEndo, g: &usize, target: &Target<Self>, searched: u64) -> Result<bool> {
        let n = self.group.order() as u64;
        let mut x = phi.apply_pow(*g, searched);
        for _ in searched..n {
            if self.contains(target, &x)? {
                return Ok(false);
            }
            x = phi.apply(x);
        }
        Ok(true)
    }
}

impl PreimageBackend for FiniteBackend<'_> {
    type Union = ElemSet;
    type Preorder = ElemSet;

    fn preimage_power(&self, phi: &FiniteEndo, target: &Target<Self>, n: u64) -> Result<ElemSet> {
        let k = self.materialize(target)?;
        let power = phi.power(n);
        Ok(power.preimage(&k))
    }

    fn preorder_from(&self, hit: ElemSet, earlier: &[ElemSet]) -> Result<ElemSet> {
        Ok(earlier.iter().fold(hit, |acc, e| acc.difference(e)))
    }
}

impl SetImageBackend for FiniteBackend<'_> {
    type Set = ElemSet;

    fn materialize(&self, target: &Target<Self>) -> Result<ElemSet> {
        self.check_target(target)?;
        let n = self.group.order();
        Ok(match target {
            SubsetSpec::FiniteSet(xs) => ElemSet::from_indices(n, xs.iter().copied())?,
            SubsetSpec::Recognizable { subgroup, coset_reps } => ElemSet::from_indices(
                n,
                coset_reps.iter().flat_map(|&r| subgroup.iter().map(move |h| self.group.mul(r, h))),
            )?,
        })
    }

    fn image(&self, phi: &FiniteEndo, set: &ElemSet) -> ElemSet {
        phi.image(set)
    }

    fn union(&self, a: &ElemSet, b: &ElemSet) -> ElemSet {
        a.union(b)
    }

    fn is_subset(&self, a: &ElemSet, b: &ElemSet) -> bool {
        a.is_subset(b)
    }

    fn is_empty_set(&self, a: &ElemSet) -> bool {
        a.is_empty()
    }

    fn is_bijective(&self, phi: &FiniteEndo) -> bool {
        phi.is_bijective()
    }

    fn is_finite(&self) -> bool {
        true
    }
}
