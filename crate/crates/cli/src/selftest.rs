//! Built-in consistency checks: the finite-group invariant suite over small
//! groups, plus agreement between independent backends on shared inputs.

use std::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use phi_spectrum::finite::{
    all_endomorphisms, finite_backend_invariant_suite_seeded, small_groups_up_to_12, spectrum_exact, ElemSet,
    FiniteEndo, FiniteGroupTable,
};
use phi_spectrum::fp::{
    phi_invariant_core, recognizable_order, recognizable_spectrum, CosetTarget, Presentation, Word, WordEndo,
};
use phi_spectrum::lattice::{coset_target_spectrum, hermite_normal_form, IntMatrix, IntVector, LatticeBackend};
use phi_spectrum::spectrum::{phi_order, HorizonPolicy};
use phi_spectrum::SubsetSpec;

/// Endomorphisms sampled per small group.
const ENDOS_PER_GROUP: usize = 3;

/// Random instances per cross-backend family.
const CROSS_INSTANCES: usize = 12;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SelftestOptions {
    pub seed: u64,
    /// Adds a group with a broken multiplication table, which must fail.
    pub inject_corrupt_table: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SelfCheck {
    pub name: String,
    pub passed: bool,
    pub detail: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SelftestReport {
    pub checks: Vec<SelfCheck>,
}

impl SelftestReport {
    pub fn passed(&self) -> usize {
        self.checks.iter().filter(|c| c.passed).count()
    }

    pub fn failed(&self) -> usize {
        self.checks.len() - self.passed()
    }

    pub fn all_passed(&self) -> bool {
        self.failed() == 0
    }
}

impl fmt::Display for SelftestReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            match (&c.detail, c.passed) {
                (_, true) => writeln!(f, "pass {}", c.name)?,
                (Some(d), false) => writeln!(f, "FAIL {}: {d}", c.name)?,
                (None, false) => writeln!(f, "FAIL {}", c.name)?,
            }
        }
        writeln!(f, "{} passed, {} failed", self.passed(), self.failed())
    }
}

fn check(name: String, failure: Option<String>) -> SelfCheck {
    SelfCheck {
        name,
        passed: failure.is_none(),
        detail: failure,
    }
}

fn finite_suite(rng: &mut ChaCha8Rng, seed: u64, inject: bool) -> Vec<SelfCheck> {
    let mut groups = small_groups_up_to_12();
    if inject {
        let mut t = FiniteGroupTable::cyclic(5).table();
        t[2][2] = 1;
        let broken = FiniteGroupTable::from_table_unchecked(t).expect("square table");
        groups.push(("corrupted Z5".into(), broken));
    }
    let mut out = Vec::new();
    for (name, g) in &groups {
        let endos = if g.verify().is_ok() {
            let all = all_endomorphisms(g);
            all.choose_multiple(rng, ENDOS_PER_GROUP).cloned().collect()
        } else {
            vec![FiniteEndo::identity(g.order())]
        };
        for (i, phi) in endos.iter().enumerate() {
            let report = finite_backend_invariant_suite_seeded(g, phi, seed);
            let failure = report
                .failures()
                .next()
                .map(|c| format!("{} ({})", c.name, c.witness.as_deref().unwrap_or("no witness")));
            out.push(check(format!("invariant suite {name} endomorphism {i} {:?}", phi.map()), failure));
        }
    }
    out
}

/// `Z` through coset enumeration against `Z` as a rank-one lattice.
fn integers_two_ways(rng: &mut ChaCha8Rng) -> Vec<SelfCheck> {
    let pres = Presentation::parse(&["a"], &[]).expect("valid presentation");
    let a = |k: i64| Word::generator(0).pow(k);
    let mut out = Vec::new();
    for _ in 0..CROSS_INSTANCES {
        let c: i64 = rng.gen_range(-4..=4);
        let m: i64 = rng.gen_range(2..=9);
        let r: i64 = rng.gen_range(0..m);
        let name = format!("Z with a -> a^{c}, target {m}Z + {r}: quotient vs lattice");
        let result = (|| -> phi_spectrum::Result<Option<String>> {
            let k = CosetTarget::new(&pres, &[a(m)], &[a(r)], 1000)?;
            let phi = WordEndo::new(&pres, vec![a(c)])?;
            let qd = phi_invariant_core(&pres, &phi, k.action(), 1000)?;
            let q = IntMatrix::from_i64s(&[&[c]]);
            let l = hermite_normal_form(&[IntVector::from_i64s(&[m])], 1)?;
            let reps = [IntVector::from_i64s(&[r])];
            let via_fp = recognizable_spectrum(&qd, &k)?;
            let via_lattice = coset_target_spectrum(&q, &l, &reps, 1000)?;
            if via_fp != via_lattice {
                return Ok(Some(format!("spectrum {via_fp} vs {via_lattice}")));
            }
            let backend = LatticeBackend::new(1);
            let target = SubsetSpec::Recognizable {
                subgroup: l,
                coset_reps: reps.to_vec(),
            };
            for g in -m..=m {
                let x = recognizable_order(&qd, &a(g), &k)?;
                let y = phi_order(&backend, &IntVector::from_i64s(&[g]), &target, &q, HorizonPolicy::default())?;
                if x != y {
                    return Ok(Some(format!("order of {g}: {x} vs {y}")));
                }
            }
            Ok(None)
        })();
        out.push(check(name, result.unwrap_or_else(|e| Some(e.to_string()))));
    }
    out
}

/// `⟨a | a^n⟩` through coset enumeration against the cyclic group table.
fn cyclic_two_ways(rng: &mut ChaCha8Rng) -> Vec<SelfCheck> {
    let mut out = Vec::new();
    for _ in 0..CROSS_INSTANCES {
        let n: usize = rng.gen_range(2..=12);
        let c: usize = rng.gen_range(0..n);
        let divisors: Vec<usize> = (1..=n).filter(|d| n % d == 0).collect();
        let d = *divisors.choose(rng).expect("n has divisors");
        let r: usize = rng.gen_range(0..d);
        let name = format!("Z{n} with x -> {c}x, target {d}Z{n} + {r}: quotient vs table");
        let result = (|| -> phi_spectrum::Result<Option<String>> {
            let rel = format!("a^{n}");
            let pres = Presentation::parse(&["a"], &[&rel])?;
            let a = |k: usize| Word::generator(0).pow(k as i64);
            let k = CosetTarget::new(&pres, &[a(d)], &[a(r)], 1000)?;
            let phi = WordEndo::new(&pres, vec![a(c)])?;
            let qd = phi_invariant_core(&pres, &phi, k.action(), 1000)?;
            let via_fp = recognizable_spectrum(&qd, &k)?;
            let g = FiniteGroupTable::cyclic(n);
            let map: Vec<usize> = (0..n).map(|x| x * c % n).collect();
            let endo = FiniteEndo::new(&g, map)?;
            let set = ElemSet::filter(n, |x| x % d == r);
            let via_table = spectrum_exact(&endo, &set);
            Ok((via_fp != via_table).then(|| format!("{via_fp} vs {via_table}")))
        })();
        out.push(check(name, result.unwrap_or_else(|e| Some(e.to_string()))));
    }
    out
}

/// Runs every check. The same options always give the same report.
pub fn selftest(options: SelftestOptions) -> SelftestReport {
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let mut checks = finite_suite(&mut rng, options.seed, options.inject_corrupt_table);
    checks.extend(integers_two_ways(&mut rng));
    checks.extend(cyclic_two_ways(&mut rng));
    SelftestReport { checks }
}
