//! Finite quotients `G/N` on which an endomorphism of a finitely presented
//! group descends.
//!
//! A homomorphism into a permutation group is stored as a tuple holding one
//! permutation per generator. Permutations act on the right, so the word
//! `a*b` sends a point `x` to `(x·a)·b`.

use std::collections::VecDeque;

use itertools::Itertools;

use super::todd_coxeter::{todd_coxeter, CosetTable};
use super::word::{Presentation, Word, WordEndo};
use crate::error::{Error, Result};
use crate::finite::{
    check_permutations, compose_perms, endo_from_generator_images, permutation_closure, FiniteEndo, FiniteGroupTable,
    DEFAULT_CLOSURE_CAP,
};

/// One permutation per generator.
pub type PermTuple = Vec<Vec<usize>>;

/// Resource limits for quotient construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuotientCaps {
    /// Largest quotient order accepted.
    pub quotient: usize,
    /// Longest run of distinct tuples followed before giving up.
    pub sequence: usize,
    /// Largest symmetric-group degree accepted in strict mode.
    pub strict_degree: usize,
    /// Largest number of generator tuples strict mode may test.
    pub strict_tuples: usize,
}

impl Default for QuotientCaps {
    fn default() -> Self {
        QuotientCaps {
            quotient: DEFAULT_CLOSURE_CAP,
            sequence: 10_000,
            strict_degree: 4,
            strict_tuples: 100_000,
        }
    }
}

/// How the normal subgroup `N` was obtained.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CoreKind {
    /// `N = ⋂ₜ Ker(φᵗρ)` for a single starting homomorphism `ρ`.
    PhiInvariant,
    /// `N` is the kernel of every homomorphism into `S_s`.
    FullyInvariant { degree: usize },
    /// `N` is a user-supplied normal subgroup; `ρ` is its regular action.
    Normal,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Provenance {
    pub kind: CoreKind,
    /// The homomorphisms whose kernels were intersected.
    pub homomorphisms: Vec<PermTuple>,
}

/// A finite quotient `G/N` together with the induced endomorphism `θ`.
#[derive(Debug, Clone)]
pub struct QuotientData {
    num_gens: usize,
    quotient: FiniteGroupTable,
    projection: Vec<usize>,
    theta: FiniteEndo,
    provenance: Provenance,
}

fn identity_perm(degree: usize) -> Vec<usize> {
    (0..degree).collect()
}

fn invert_perm(p: &[usize]) -> Vec<usize> {
    let mut q = vec![0; p.len()];
    for (x, &y) in p.iter().enumerate() {
        q[y] = x;
    }
    q
}

/// Image of `w` under the homomorphism given by `tuple`.
pub fn eval_perm_word(tuple: &[Vec<usize>], degree: usize, w: &Word) -> Vec<usize> {
    let inverses: Vec<Vec<usize>> = tuple.iter().map(|p| invert_perm(p)).collect();
    w.letters().iter().fold(identity_perm(degree), |acc, l| {
        let p = if l.inverse { &inverses[l.gen] } else { &tuple[l.gen] };
        compose_perms(&acc, p)
    })
}

fn relator_violation(pres: &Presentation, tuple: &[Vec<usize>], degree: usize) -> Option<usize> {
    let id = identity_perm(degree);
    pres.relators().iter().position(|r| eval_perm_word(tuple, degree, r) != id)
}

fn check_tuple(pres: &Presentation, tuple: &[Vec<usize>]) -> Result<usize> {
    if tuple.len() != pres.num_generators() {
        return Err(Error::DimensionMismatch {
            expected: pres.num_generators(),
            found: tuple.len(),
        });
    }
    check_permutations(tuple)
}

/// The action of the generators on the cosets of a complete table, checked
/// against every relator.
pub fn coset_action_hom(pres: &Presentation, table: &CosetTable) -> Result<PermTuple> {
    if table.num_generators() != pres.num_generators() {
        return Err(Error::DimensionMismatch {
            expected: pres.num_generators(),
            found: table.num_generators(),
        });
    }
    let rho: PermTuple = (0..pres.num_generators()).map(|g| table.generator_permutation(g)).collect();
    if let Some(k) = relator_violation(pres, &rho, table.index()) {
        return Err(Error::RelatorViolation {
            relator: k,
            detail: "coset action does not kill the relator".into(),
        });
    }
    Ok(rho)
}

/// The tuple `a ↦ ρ(aφ)`.
fn next_tuple(phi: &WordEndo, tuple: &[Vec<usize>], degree: usize) -> PermTuple {
    phi.images().iter().map(|w| eval_perm_word(tuple, degree, w)).collect()
}

fn check_endo(pres: &Presentation, phi: &WordEndo) -> Result<()> {
    if phi.images().len() != pres.num_generators() {
        return Err(Error::DimensionMismatch {
            expected: pres.num_generators(),
            found: phi.images().len(),
        });
    }
    phi.images().iter().try_for_each(|w| pres.check_word(w))
}

/// Builds the image of the diagonal homomorphism into the product of the
/// given homomorphisms, then the induced endomorphism.
fn assemble(
    pres: &Presentation,
    phi: &WordEndo,
    homs: Vec<PermTuple>,
    degree: usize,
    kind: CoreKind,
    cap: usize,
) -> Result<QuotientData> {
    let n = pres.num_generators();
    let diagonal: PermTuple = (0..n)
        .map(|g| {
            homs.iter()
                .enumerate()
                .flat_map(|(i, t)| t[g].iter().map(move |&x| x + i * degree))
                .collect()
        })
        .collect();
    let total = degree * homs.len();
    let (quotient, elements) = if n == 0 {
        permutation_closure(&[identity_perm(total)], cap)?
    } else {
        permutation_closure(&diagonal, cap)?
    };
    let projection: Vec<usize> = diagonal
        .iter()
        .map(|p| elements.iter().position(|e| e == p).expect("generator lies in its closure"))
        .collect();
    let mut qd = QuotientData {
        num_gens: n,
        quotient,
        projection,
        theta: FiniteEndo::identity(1),
        provenance: Provenance {
            kind,
            homomorphisms: homs,
        },
    };
    let images: Vec<usize> = phi.images().iter().map(|w| qd.eval_word(w)).collect();
    qd.theta = endo_from_generator_images(&qd.quotient, &qd.projection, &images).map_err(|e| match e {
        Error::NotHomomorphism(d) => Error::NotHomomorphism(format!("endomorphism does not descend to the quotient: {d}")),
        other => other,
    })?;
    if !qd.square_commutes(phi) {
        return Err(Error::NotHomomorphism("induced map does not commute with the projection".into()));
    }
    Ok(qd)
}

/// The quotient by `N = ⋂ₜ Ker(φᵗρ)`. The tuples `φᵗρ` are followed until
/// one repeats; `N` is then the kernel of the diagonal homomorphism into
/// the product of the distinct ones, and `φ(N) ⊆ N` holds by construction.
pub fn phi_invariant_core(pres: &Presentation, phi: &WordEndo, rho: &[Vec<usize>], cap: usize) -> Result<QuotientData> {
    check_endo(pres, phi)?;
    let degree = check_tuple(pres, rho)?;
    if let Some(k) = relator_violation(pres, rho, degree) {
        return Err(Error::RelatorViolation {
            relator: k,
            detail: "starting homomorphism does not kill the relator".into(),
        });
    }
    let mut homs: Vec<PermTuple> = vec![rho.to_vec()];
    loop {
        let next = next_tuple(phi, homs.last().expect("nonempty"), degree);
        if homs.contains(&next) {
            break;
        }
        if let Some(k) = relator_violation(pres, &next, degree) {
            return Err(Error::NotHomomorphism(format!(
                "relator {} is not sent to a consequence of the relators (detected after {} steps)",
                k,
                homs.len()
            )));
        }
        if homs.len() >= cap {
            return Err(Error::CapExceeded {
                what: "endomorphism tuple sequence",
                cap,
            });
        }
        homs.push(next);
    }
    assemble(pres, phi, homs, degree, CoreKind::PhiInvariant, cap)
}

/// The conjugate of each permutation by `sigma`.
fn conjugate(tuple: &[Vec<usize>], sigma: &[usize], sigma_inv: &[usize]) -> PermTuple {
    tuple
        .iter()
        .map(|p| compose_perms(&compose_perms(sigma_inv, p), sigma))
        .collect()
}

/// The quotient by the intersection of the kernels of all homomorphisms
/// into `S_s`. This `N` is fully invariant, so every endomorphism descends.
/// Conjugate homomorphisms have equal kernels and are kept once.
pub fn fully_invariant_core_strict(
    pres: &Presentation,
    phi: &WordEndo,
    degree: usize,
    caps: QuotientCaps,
) -> Result<QuotientData> {
    check_endo(pres, phi)?;
    if degree == 0 || degree > caps.strict_degree {
        return Err(Error::BudgetExceeded(format!(
            "degree {degree} is outside 1..={}",
            caps.strict_degree
        )));
    }
    let perms: Vec<Vec<usize>> = (0..degree).permutations(degree).collect();
    let n = pres.num_generators();
    let count = u32::try_from(n)
        .ok()
        .and_then(|e| perms.len().checked_pow(e))
        .filter(|&c| c <= caps.strict_tuples);
    if count.is_none() {
        return Err(Error::BudgetExceeded(format!(
            "{}^{n} generator tuples exceed the budget of {}",
            perms.len(),
            caps.strict_tuples
        )));
    }
    let inverses: Vec<Vec<usize>> = perms.iter().map(|p| invert_perm(p)).collect();
    let mut homs: Vec<PermTuple> = Vec::new();
    for tuple in (0..n).map(|_| perms.iter().cloned()).multi_cartesian_product() {
        if relator_violation(pres, &tuple, degree).is_some() {
            continue;
        }
        let canonical = perms
            .iter()
            .zip(&inverses)
            .map(|(s, si)| conjugate(&tuple, s, si))
            .min()
            .expect("at least one permutation");
        if canonical == tuple {
            homs.push(tuple);
        }
    }
    if n == 0 {
        homs.push(Vec::new());
    }
    assemble(pres, phi, homs, degree, CoreKind::FullyInvariant { degree }, caps.quotient)
}

/// The quotient by a normal subgroup `F` generated (as a subgroup) by
/// `subgroup_gens`. Fails if `F` is not normal or `φ(F) ⊄ F`.
pub fn normal_subgroup_quotient(
    pres: &Presentation,
    phi: &WordEndo,
    subgroup_gens: &[Word],
    coset_cap: usize,
    cap: usize,
) -> Result<QuotientData> {
    check_endo(pres, phi)?;
    let table = todd_coxeter(pres, subgroup_gens, coset_cap)?;
    let rho = coset_action_hom(pres, &table)?;
    let qd = assemble(pres, phi, vec![rho], table.index(), CoreKind::Normal, cap.max(table.index()));
    match qd {
        Ok(qd) if qd.order() == table.index() => Ok(qd),
        Ok(qd) => Err(Error::InvalidTarget(format!(
            "subgroup of index {} is not normal (its core has index {})",
            table.index(),
            qd.order()
        ))),
        Err(Error::NotHomomorphism(_)) => Err(Error::InvalidTarget(
            "subgroup is not mapped into itself by the endomorphism".into(),
        )),
        Err(e) => Err(e),
    }
}

impl QuotientData {
    pub fn quotient(&self) -> &FiniteGroupTable {
        &self.quotient
    }

    pub fn order(&self) -> usize {
        self.quotient.order()
    }

    /// Quotient element of each generator.
    pub fn projection(&self) -> &[usize] {
        &self.projection
    }

    pub fn theta(&self) -> &FiniteEndo {
        &self.theta
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn num_generators(&self) -> usize {
        self.num_gens
    }

    /// Image of a word in the quotient.
    pub fn eval_word(&self, w: &Word) -> usize {
        w.letters().iter().fold(self.quotient.identity(), |x, l| {
            let p = self.projection[l.gen];
            let p = if l.inverse { self.quotient.inv(p) } else { p };
            self.quotient.mul(x, p)
        })
    }

    pub fn check_word(&self, w: &Word) -> Result<()> {
        match w.max_generator() {
            Some(g) if g >= self.num_gens => Err(Error::InvalidWord(format!(
                "generator {g} is out of range for {} generators",
                self.num_gens
            ))),
            _ => Ok(()),
        }
    }

    /// Whether `θ(π(a)) = π(aφ)` for every generator `a`.
    pub fn square_commutes(&self, phi: &WordEndo) -> bool {
        phi.images().len() == self.num_gens
            && (0..self.num_gens).all(|a| self.theta.apply(self.projection[a]) == self.eval_word(&phi.images()[a]))
    }

    /// Whether the homomorphism given by `tuple` factors through the
    /// projection, i.e. `N` lies in its kernel.
    pub fn factors(&self, tuple: &[Vec<usize>]) -> bool {
        let Ok(degree) = check_permutations(tuple) else {
            return false;
        };
        if tuple.len() != self.num_gens {
            return false;
        }
        let n = self.order();
        let mut map: Vec<Option<Vec<usize>>> = vec![None; n];
        map[0] = Some(identity_perm(degree));
        let mut queue = VecDeque::from([0usize]);
        while let Some(x) = queue.pop_front() {
            for (a, p) in tuple.iter().enumerate() {
                let y = self.quotient.mul(x, self.projection[a]);
                let image = compose_perms(map[x].as_ref().expect("visited"), p);
                match &map[y] {
                    Some(existing) if *existing != image => return false,
                    Some(_) => {}
                    None => {
                        map[y] = Some(image);
                        queue.push_back(y);
                    }
                }
            }
        }
        true
    }

    /// Whether `φ(N) ⊆ N` is visible in the provenance: for each recorded
    /// homomorphism `ρ`, the next one `a ↦ ρ(aφ)` also factors.
    pub fn check_phi_invariance(&self, phi: &WordEndo) -> bool {
        self.provenance.homomorphisms.iter().all(|t| {
            let degree = t.first().map_or(0, Vec::len);
            self.factors(&next_tuple(phi, t, degree))
        })
    }

    /// Whether this quotient maps onto `coarser`, i.e. its `N` lies inside
    /// the `N` of `coarser`.
    pub fn projects_onto(&self, coarser: &QuotientData) -> bool {
        coarser.provenance.homomorphisms.iter().all(|t| self.factors(t))
    }

    /// A shortest positive word for each quotient element, in breadth-first
    /// order over the generators.
    pub fn labels(&self) -> Vec<Word> {
        let n = self.order();
        let mut words: Vec<Option<Word>> = vec![None; n];
        words[0] = Some(Word::empty());
        let mut queue = VecDeque::from([0usize]);
        while let Some(x) = queue.pop_front() {
            for a in 0..self.num_gens {
                let y = self.quotient.mul(x, self.projection[a]);
                if words[y].is_none() {
                    words[y] = Some(words[x].as_ref().expect("visited").concat(&Word::generator(a)));
                    queue.push_back(y);
                }
            }
        }
        words.into_iter().map(|w| w.expect("generators span the quotient")).collect()
    }
}
