//! Orders, preorders and spectra for recognizable targets: finite unions
//! of cosets `Hw` of a finite-index subgroup `H`.
//!
//! Every query projects into a quotient `G/N` with `N ⊆ H` and runs the
//! exact finite enumeration there under the induced map `θ`.

use std::fmt;

use super::quotient::{coset_action_hom, PermTuple, QuotientData};
use super::todd_coxeter::{todd_coxeter, CosetTable};
use super::word::{Presentation, Word};
use crate::error::{Error, Result};
use crate::finite::{per_exact, phi_order_exact, preorder_exact, spectrum_exact, ElemSet, FiniteEndo};
use crate::spectrum::{OrderValue, Spectrum};

/// A union of right cosets `Hw` of a finite-index subgroup `H`.
#[derive(Debug, Clone)]
pub struct CosetTarget {
    table: CosetTable,
    rho: PermTuple,
    cosets: Vec<usize>,
}

impl CosetTarget {
    /// Enumerates `H = ⟨subgroup_gens⟩` and picks the cosets of `reps`,
    /// which must lie in pairwise distinct cosets.
    pub fn new(pres: &Presentation, subgroup_gens: &[Word], reps: &[Word], coset_cap: usize) -> Result<Self> {
        let table = todd_coxeter(pres, subgroup_gens, coset_cap)?;
        Self::from_table(pres, table, reps)
    }

    pub fn from_table(pres: &Presentation, table: CosetTable, reps: &[Word]) -> Result<Self> {
        let rho = coset_action_hom(pres, &table)?;
        let mut cosets = Vec::with_capacity(reps.len());
        for w in reps {
            pres.check_word(w)?;
            let c = table.coset_of(w);
            if cosets.contains(&c) {
                return Err(Error::InvalidTarget(format!(
                    "representative {} repeats coset {c}",
                    pres.show(w)
                )));
            }
            cosets.push(c);
        }
        Ok(CosetTarget { table, rho, cosets })
    }

    pub fn table(&self) -> &CosetTable {
        &self.table
    }

    /// Action of the generators on the cosets of `H`.
    pub fn action(&self) -> &PermTuple {
        &self.rho
    }

    /// Indices of the chosen cosets in the table.
    pub fn cosets(&self) -> &[usize] {
        &self.cosets
    }

    pub fn contains_word(&self, w: &Word) -> bool {
        self.cosets.contains(&self.table.coset_of(w))
    }
}

/// An `N`-coset, named by its quotient element and a representative word.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NCoset {
    pub element: usize,
    pub word: Word,
}

/// The quotient elements lying over the target. Fails unless `N ⊆ H`.
pub fn target_elements(qd: &QuotientData, k: &CosetTarget) -> Result<ElemSet> {
    if k.rho.len() != qd.num_generators() {
        return Err(Error::DimensionMismatch {
            expected: qd.num_generators(),
            found: k.rho.len(),
        });
    }
    if !qd.factors(&k.rho) {
        return Err(Error::InvalidTarget(
            "the quotient is too coarse: its kernel is not inside the target subgroup".into(),
        ));
    }
    let labels = qd.labels();
    Ok(ElemSet::filter(qd.order(), |x| k.contains_word(&labels[x])))
}

/// Relative order of `g`; always `Finite` or `Infinite`.
pub fn recognizable_order(qd: &QuotientData, g: &Word, k: &CosetTarget) -> Result<OrderValue> {
    qd.check_word(g)?;
    let set = target_elements(qd, k)?;
    Ok(phi_order_exact(qd.theta(), qd.eval_word(g), &set))
}

pub fn recognizable_spectrum(qd: &QuotientData, k: &CosetTarget) -> Result<Spectrum> {
    let set = target_elements(qd, k)?;
    Ok(spectrum_exact(qd.theta(), &set))
}

/// The `n`-th preorder as a union of `N`-cosets.
pub fn recognizable_preorder(qd: &QuotientData, n: u64, k: &CosetTarget) -> Result<Vec<NCoset>> {
    let set = target_elements(qd, k)?;
    let labels = qd.labels();
    Ok(preorder_exact(qd.theta(), n, &set)
        .iter()
        .map(|x| NCoset {
            element: x,
            word: labels[x].clone(),
        })
        .collect())
}

/// What the quotient says about the stable image meeting a coset.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CosetClass {
    /// The coset is not `θ`-periodic, so the stable image misses it.
    CertifiedEmpty,
    /// The coset is `θ`-periodic with this period; the stable image may or
    /// may not meet it.
    PeriodicCandidate(u64),
}

impl fmt::Display for CosetClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CosetClass::CertifiedEmpty => write!(f, "certified empty"),
            CosetClass::PeriodicCandidate(p) => write!(f, "periodic candidate (period {p})"),
        }
    }
}

/// Classifies every element of a finite group under `theta`.
pub fn classify_cosets(theta: &FiniteEndo) -> Vec<CosetClass> {
    let per = per_exact(theta);
    (0..theta.order())
        .map(|x| {
            if !per.contains(x) {
                return CosetClass::CertifiedEmpty;
            }
            let mut y = theta.apply(x);
            let mut p = 1;
            while y != x {
                y = theta.apply(y);
                p += 1;
            }
            CosetClass::PeriodicCandidate(p)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CosetClassification {
    pub coset: NCoset,
    pub class: CosetClass,
}

/// Classifies each coset of the quotient. The image of the stable image
/// under the projection lies in the `θ`-periodic points, so every other
/// coset is certified to miss it.
pub fn stable_image_coset_analysis(qd: &QuotientData) -> Vec<CosetClassification> {
    let labels = qd.labels();
    classify_cosets(qd.theta())
        .into_iter()
        .zip(labels)
        .enumerate()
        .map(|(element, (class, word))| CosetClassification {
            coset: NCoset { element, word },
            class,
        })
        .collect()
}
