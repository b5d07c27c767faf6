//! Executable invariants for one endomorphism of one finite group.

use std::fmt;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::backend::FiniteBackend;
use super::endo::{hom_violation, FiniteEndo};
use super::exact::{
    kernel_cover_check, kernel_stabilization_check, order_table, per_exact, preorder_exact, spectrum_exact,
    stable_image_exact, tails_ending_in,
};
use super::group::FiniteGroupTable;
use super::set::ElemSet;
use crate::spectrum::{
    auto_spectrum_by_cover, phi_order, tail_lambda, HorizonPolicy, OrderValue, Spectrum, SubsetSpec, Tail,
};

/// Largest exponent fed to the kernel lemma checks.
const KERNEL_CHECK_DEPTH: u64 = 4;

/// Random targets drawn per run, on top of all singletons.
const SAMPLED_TARGETS: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub witness: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuiteReport {
    pub checks: Vec<CheckOutcome>,
}

impl SuiteReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckOutcome> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            let status = if c.passed { "pass" } else { "FAIL" };
            write!(f, "{status} {}", c.name)?;
            if let Some(w) = &c.witness {
                write!(f, " ({w})")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

struct Recorder(Vec<CheckOutcome>);

impl Recorder {
    fn record(&mut self, name: &'static str, witness: Option<String>) {
        self.0.push(CheckOutcome {
            name,
            passed: witness.is_none(),
            witness,
        });
    }
}

/// Targets used by the spectrum checks: all singletons plus a fixed-seed
/// sample of subsets with two to four elements.
fn targets(order: usize, seed: u64) -> Vec<ElemSet> {
    let mut out: Vec<ElemSet> = (0..order)
        .map(|x| ElemSet::from_indices(order, [x]).expect("in range"))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in 0..SAMPLED_TARGETS {
        let size = (2 + i % 3).min(order);
        let pick = sample(&mut rng, order, size);
        out.push(ElemSet::from_indices(order, pick.iter()).expect("in range"));
    }
    out
}

/// Runs every invariant and reports a witness for each failure. A broken
/// group table or endomorphism short-circuits the checks that rely on it.
pub fn finite_backend_invariant_suite(group: &FiniteGroupTable, phi: &FiniteEndo) -> SuiteReport {
    finite_backend_invariant_suite_seeded(group, phi, 0)
}

pub fn finite_backend_invariant_suite_seeded(group: &FiniteGroupTable, phi: &FiniteEndo, seed: u64) -> SuiteReport {
    let mut r = Recorder(Vec::new());
    let n = group.order();

    r.record("group axioms", group.verify().err().map(|v| v.to_string()));
    if !r.0[0].passed {
        return SuiteReport { checks: r.0 };
    }
    let hom = if phi.order() != n {
        Some(format!("map has length {} for a group of order {n}", phi.order()))
    } else if phi.apply(0) != 0 {
        Some("identity is not fixed".into())
    } else {
        hom_violation(group, phi.map()).map(|(a, b)| format!("({a}*{b})φ != {a}φ*{b}φ"))
    };
    r.record("homomorphism", hom);
    if !r.0[1].passed {
        return SuiteReport { checks: r.0 };
    }

    let stable = stable_image_exact(phi);
    let per = per_exact(phi);
    r.record(
        "stable image within periodic points",
        stable.difference(&per).iter().next().map(|x| format!("element {x}")),
    );
    r.record(
        "endomorphism permutes the stable image",
        (phi.image(&stable) != stable).then(|| format!("image of {stable} is {}", phi.image(&stable))),
    );

    let stabilization = (0..=n as u64).find(|&k| !kernel_stabilization_check(phi, k));
    r.record("injectivity equals kernel stabilization", stabilization.map(|k| format!("k = {k}")));

    let mut cover = None;
    'outer: for i in 0..=KERNEL_CHECK_DEPTH {
        for j in 0..=i {
            if !kernel_cover_check(group, phi, i, j) {
                cover = Some(format!("i = {i}, j = {j}"));
                break 'outer;
            }
        }
    }
    r.record("kernel coset cover equivalence", cover);

    let backend = FiniteBackend::new(group);
    let ks = targets(n, seed);
    let singles: Vec<Spectrum> = (0..n)
        .map(|y| spectrum_exact(phi, &ElemSet::from_indices(n, [y]).expect("in range")))
        .collect();

    let mut containment = None;
    let mut shift = None;
    let mut partition = None;
    let mut agreement = None;
    let mut tails = None;
    let bijective = phi.is_bijective();
    for k in &ks {
        let sp = spectrum_exact(phi, k);
        let max_single = k.iter().filter_map(|y| singles[y].verified_max()).max();
        if sp.verified_max() > max_single && containment.is_none() {
            containment = Some(format!("K = {k}: {sp} exceeds singleton spectra"));
        }

        let orders = order_table(phi, k);
        for g in 0..n {
            if let OrderValue::Finite(m) = orders[g] {
                if m >= 1 && orders[phi.apply(g)] != OrderValue::Finite(m - 1) && shift.is_none() {
                    shift = Some(format!("K = {k}, g = {g}"));
                }
            }
        }

        let max = sp.verified_max().unwrap_or(0);
        let mut union = ElemSet::empty(n);
        for m in 0..=max + 1 {
            let p = preorder_exact(phi, m, k);
            if !p.is_disjoint(&union) && partition.is_none() {
                partition = Some(format!("K = {k}: preorder {m} overlaps an earlier one"));
            }
            union = union.union(&p);
        }
        let infinite = ElemSet::filter(n, |x| orders[x] == OrderValue::Infinite);
        if union.union(&infinite) != ElemSet::full(n) && partition.is_none() {
            partition = Some(format!("K = {k}: preorders miss an element"));
        }

        let target = SubsetSpec::FiniteSet(k.to_vec());
        let policy = HorizonPolicy::new(n as u64);
        match backend.driver_spectrum(phi, &target) {
            Ok(generic) if generic == sp => {}
            other => {
                if agreement.is_none() {
                    agreement = Some(format!("K = {k}: exact {sp}, driver {other:?}"));
                }
            }
        }
        for g in 0..n {
            let generic = phi_order(&backend, &g, &target, phi, policy);
            if generic.as_ref() != Ok(&orders[g]) && agreement.is_none() {
                agreement = Some(format!("K = {k}, g = {g}: exact {}, driver {generic:?}", orders[g]));
            }
        }

        if bijective && !k.is_empty() {
            if let Spectrum::Prefix(m) = sp {
                let mut best = 0;
                for entries in tails_ending_in(phi, k, m as usize + 2) {
                    let lambda = Tail::new(&backend, phi, entries)
                        .and_then(|t| tail_lambda(&backend, &t, &target))
                        .unwrap_or(0);
                    best = best.max(lambda);
                }
                let cover = auto_spectrum_by_cover(&backend, &target, phi, n as u64);
                if (best != m + 1 || cover.as_ref() != Ok(&sp)) && tails.is_none() {
                    tails = Some(format!("K = {k}: {sp}, max tail lambda {best}, cover {cover:?}"));
                }
            }
        }
    }
    r.record("spectrum within union of singleton spectra", containment);
    r.record("order drops by one along the orbit", shift);
    r.record("preorders partition the finite-order elements", partition);
    r.record("generic drivers agree with exact enumeration", agreement);
    r.record("tail lambda matches the spectrum", tails);

    SuiteReport { checks: r.0 }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finite::endo::endo_from_generator_images;

    #[test]
    fn doubling_mod_12_passes() {
        let g = FiniteGroupTable::cyclic(12);
        let phi = endo_from_generator_images(&g, &[1], &[2]).unwrap();
        let report = finite_backend_invariant_suite(&g, &phi);
        assert!(report.all_passed(), "{report}");
    }

    #[test]
    fn inner_automorphism_of_s3_passes() {
        let g = FiniteGroupTable::symmetric(3).unwrap();
        let c = 1;
        let map: Vec<usize> = (0..6).map(|x| g.mul(g.mul(g.inv(c), x), c)).collect();
        let phi = FiniteEndo::new(&g, map).unwrap();
        let report = finite_backend_invariant_suite(&g, &phi);
        assert!(report.all_passed(), "{report}");
        assert_eq!(stable_image_exact(&phi), ElemSet::full(6));
    }

    #[test]
    fn trivial_group_passes() {
        let g = FiniteGroupTable::trivial();
        let report = finite_backend_invariant_suite(&g, &FiniteEndo::identity(1));
        assert!(report.all_passed(), "{report}");
    }

    #[test]
    fn corrupted_table_fails_with_witness() {
        let mut t = FiniteGroupTable::cyclic(5).table();
        t[2][2] = 1;
        let g = FiniteGroupTable::from_table_unchecked(t).unwrap();
        let report = finite_backend_invariant_suite(&g, &FiniteEndo::identity(5));
        assert!(!report.all_passed());
        let failure = report.failures().next().unwrap();
        assert_eq!(failure.name, "group axioms");
        assert!(failure.witness.is_some());
    }

    #[test]
    fn non_homomorphism_fails() {
        let g = FiniteGroupTable::cyclic(4);
        let bad = FiniteEndo::new_unchecked(&g, vec![0, 1, 1, 3]).unwrap();
        let report = finite_backend_invariant_suite(&g, &bad);
        assert_eq!(report.failures().next().unwrap().name, "homomorphism");
    }
}
