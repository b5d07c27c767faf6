//! Evaluates the queries of a problem file.

use std::cell::OnceCell;
use std::time::{Duration, Instant};

use serde_json::{json, Value};

use phi_spectrum::finite::{
    endo_from_generator_images, per_exact, phi_order_exact, preorder_exact, spectrum_exact,
    stable_image_exact, ElemSet, FiniteBackend, FiniteEndo, FiniteGroupTable, DEFAULT_CLOSURE_CAP,
};
use phi_spectrum::fp::{
    classify_cosets, fully_invariant_core_strict, normal_subgroup_quotient, phi_invariant_core, recognizable_order,
    recognizable_preorder, recognizable_spectrum, stable_image_coset_analysis, target_elements, CosetClass,
    CosetTarget, Presentation, QuotientCaps, QuotientData, WordEndo, DEFAULT_COSET_CAP,
};
use phi_spectrum::lattice::{
    coset_target_spectrum, finite_k_spectrum, hermite_normal_form, is_periodic, stable_image_probe, IntMatrix,
    LatticeBackend, StableImageProbe, DEFAULT_RESIDUE_CAP,
};
use phi_spectrum::spectrum::{auto_spectrum_by_cover, phi_order, phi_preorder, HorizonPolicy, Target, DEFAULT_HORIZON};
use phi_spectrum::{Error, OrderValue, Spectrum, SubsetSpec};

use crate::problem::{
    show_vector, AbelianTarget, Elem, FiniteEndoSpec, FiniteTarget, Options, Payload, ProblemFile, Query,
};

/// Witness lists are cut at this length.
const MAX_WITNESSES: usize = 16;

/// Effective settings after merging file options and command-line flags.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Settings {
    pub horizon: u64,
    pub coset_cap: usize,
    pub quotient_cap: Option<usize>,
    pub strict_invariant_core: bool,
}

impl Settings {
    pub fn from_options(o: &Options) -> Self {
        Settings {
            horizon: o.horizon.unwrap_or(DEFAULT_HORIZON),
            coset_cap: o.coset_cap.unwrap_or(DEFAULT_COSET_CAP),
            quotient_cap: o.quotient_cap,
            strict_invariant_core: o.strict_invariant_core,
        }
    }
}

/// A successful answer to one query.
#[derive(Debug, Clone, PartialEq)]
pub struct Answer {
    pub text: String,
    pub value: Value,
    pub witnesses: Vec<String>,
    /// False when the answer is limited by the search horizon.
    pub exact: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Answer(Answer),
    Failed { message: String, budget: bool },
}

#[derive(Debug, Clone)]
pub struct Record {
    pub query: String,
    pub outcome: Outcome,
    pub elapsed: Duration,
}

impl Record {
    pub fn to_json(&self) -> Value {
        let ms = self.elapsed.as_secs_f64() * 1000.0;
        match &self.outcome {
            Outcome::Answer(a) => json!({
                "query": self.query,
                "result": a.value,
                "text": a.text,
                "witnesses": a.witnesses,
                "certificate": if a.exact { "exact" } else { "horizon-limited" },
                "elapsed_ms": ms,
            }),
            Outcome::Failed { message, budget } => json!({
                "query": self.query,
                "error": message,
                "error_kind": if *budget { "budget" } else { "input" },
                "elapsed_ms": ms,
            }),
        }
    }

    pub fn human(&self) -> String {
        match &self.outcome {
            Outcome::Answer(a) => {
                let cert = if a.exact { "exact" } else { "horizon-limited" };
                let mut s = format!("{} = {} ({cert})", self.query, a.text);
                if !a.witnesses.is_empty() {
                    s.push_str(&format!("\n  witnesses: {}", a.witnesses.join("; ")));
                }
                s
            }
            Outcome::Failed { message, budget } => {
                let kind = if *budget { "budget exceeded" } else { "error" };
                format!("{}: {kind}: {message}", self.query)
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub records: Vec<Record>,
}

impl RunReport {
    /// 0 on success, 1 if any query hit an input error, else 2 if any hit a
    /// budget.
    pub fn exit_code(&self) -> i32 {
        let mut code = 0;
        for r in &self.records {
            if let Outcome::Failed { budget, .. } = r.outcome {
                if !budget {
                    return 1;
                }
                code = 2;
            }
        }
        code
    }

    pub fn human(&self) -> String {
        self.records.iter().map(|r| r.human() + "\n").collect()
    }

    /// One JSON object per line.
    pub fn json_lines(&self) -> String {
        self.records.iter().map(|r| r.to_json().to_string() + "\n").collect()
    }
}

fn order_json(o: OrderValue) -> Value {
    match o {
        OrderValue::Finite(n) => json!({"variant": "finite", "value": n}),
        OrderValue::Infinite => json!({"variant": "infinite"}),
        OrderValue::UnknownBeyond(h) => json!({"variant": "unknown-beyond", "horizon": h}),
    }
}

fn spectrum_json(s: Spectrum) -> Value {
    match s {
        Spectrum::Empty => json!({"variant": "empty"}),
        Spectrum::Prefix(n) => json!({"variant": "prefix", "max": n}),
        Spectrum::AllNaturals => json!({"variant": "all-naturals"}),
        Spectrum::PrefixUnknownTail { prefix, horizon } => {
            json!({"variant": "prefix-unknown-tail", "prefix": prefix, "horizon": horizon})
        }
    }
}

fn order_answer(o: OrderValue, witness: Option<String>) -> Answer {
    Answer {
        text: o.to_string(),
        value: order_json(o),
        witnesses: witness.into_iter().collect(),
        exact: o.is_certified(),
    }
}

fn spectrum_answer(s: Spectrum, witnesses: Vec<String>) -> Answer {
    Answer {
        text: s.to_string(),
        value: spectrum_json(s),
        witnesses,
        exact: s.is_certified(),
    }
}

fn class_answer(classes: Vec<(String, CosetClass)>) -> Answer {
    let candidates = classes
        .iter()
        .filter(|(_, c)| matches!(c, CosetClass::PeriodicCandidate(_)))
        .count();
    let entries: Vec<Value> = classes
        .iter()
        .map(|(label, c)| match c {
            CosetClass::CertifiedEmpty => json!({"coset": label, "class": "certified-empty"}),
            CosetClass::PeriodicCandidate(p) => {
                json!({"coset": label, "class": "periodic-candidate", "period": p})
            }
        })
        .collect();
    Answer {
        text: format!(
            "{candidates} periodic candidates, {} certified empty",
            classes.len() - candidates
        ),
        value: json!({ "cosets": entries }),
        witnesses: classes.iter().take(MAX_WITNESSES).map(|(l, c)| format!("{l}: {c}")).collect(),
        exact: true,
    }
}

fn missing_target() -> Error {
    Error::InvalidTarget("no `target` line".into())
}

fn unsupported(q: &str) -> Error {
    Error::Unsupported(format!("query `{q}` is not available for this backend"))
}

struct Abelian {
    q: IntMatrix,
    backend: LatticeBackend,
    target: Option<Target<LatticeBackend>>,
}

impl Abelian {
    fn new(p: &crate::problem::AbelianProblem) -> phi_spectrum::Result<Self> {
        let q = IntMatrix::new(p.matrix.clone())?;
        let m = q.dim();
        let target = match &p.target {
            None => None,
            Some(AbelianTarget::Finite(xs)) => Some(SubsetSpec::finite(xs.iter().cloned())),
            Some(AbelianTarget::Cosets { reps, lattice }) => Some(SubsetSpec::Recognizable {
                subgroup: hermite_normal_form(lattice, m)?,
                coset_reps: reps.clone(),
            }),
        };
        Ok(Abelian {
            q,
            backend: LatticeBackend::new(m),
            target,
        })
    }

    fn answer(&self, query: &Query, s: &Settings) -> phi_spectrum::Result<Answer> {
        let vector = |e: &Elem| match e {
            Elem::Vector(v) => Ok(v.clone()),
            _ => Err(Error::InvalidWord("expected a vector".into())),
        };
        let target = || self.target.as_ref().ok_or_else(missing_target);
        match query {
            Query::Order(e) => {
                let g = vector(e)?;
                let o = phi_order(&self.backend, &g, target()?, &self.q, HorizonPolicy::new(s.horizon))?;
                let w = o.finite().map(|n| show_vector(&g.mul_matrix_pow(&self.q, n)));
                Ok(order_answer(o, w))
            }
            Query::Spectrum => {
                let sp = match target()? {
                    SubsetSpec::FiniteSet(xs) => finite_k_spectrum(&self.q, xs, s.horizon)?,
                    SubsetSpec::Recognizable { subgroup, coset_reps } => coset_target_spectrum(
                        &self.q,
                        subgroup,
                        coset_reps,
                        s.quotient_cap.unwrap_or(DEFAULT_RESIDUE_CAP),
                    )?,
                };
                Ok(spectrum_answer(sp, Vec::new()))
            }
            Query::Preorder(n) => {
                let p = phi_preorder(&self.backend, *n, target()?, &self.q)?;
                let show = |cs: &[phi_spectrum::lattice::AffineLattice]| -> Vec<String> {
                    cs.iter().map(ToString::to_string).collect()
                };
                Ok(Answer {
                    text: p.to_string(),
                    value: json!({"include": show(p.include()), "exclude": show(p.exclude())}),
                    witnesses: p.include().iter().take(MAX_WITNESSES).map(|c| show_vector(c.offset())).collect(),
                    exact: true,
                })
            }
            Query::StableImage(e) => {
                let h = vector(e)?;
                let probe = stable_image_probe(&self.q, &h, s.horizon)?;
                let (text, value, exact) = match probe {
                    StableImageProbe::No(k) => (
                        format!("no (in the image of Q^{k}, not of Q^{})", k + 1),
                        json!({"variant": "no", "last_image": k}),
                        true,
                    ),
                    StableImageProbe::Yes { period } => (
                        format!("yes (periodic, period {period})"),
                        json!({"variant": "yes", "period": period}),
                        true,
                    ),
                    StableImageProbe::InStableImage { from } => (
                        format!("yes (image chain constant from Q^{from})"),
                        json!({"variant": "yes", "stable_from": from}),
                        true,
                    ),
                    StableImageProbe::UnknownUpTo(h) => (
                        format!("unknown (in every image up to Q^{h})"),
                        json!({"variant": "unknown", "horizon": h}),
                        false,
                    ),
                };
                Ok(Answer {
                    text,
                    value,
                    witnesses: Vec::new(),
                    exact,
                })
            }
            Query::Period(e) => {
                let h = vector(e)?;
                Ok(period_answer(is_periodic(&self.q, &h)?))
            }
            Query::CosetAnalysis => Err(unsupported("coset-analysis")),
            Query::AutoSpectrum => Err(unsupported("auto-spectrum")),
        }
    }
}

fn period_answer(p: Option<u64>) -> Answer {
    match p {
        Some(p) => Answer {
            text: format!("periodic, period {p}"),
            value: json!({"periodic": true, "period": p}),
            witnesses: Vec::new(),
            exact: true,
        },
        None => Answer {
            text: "not periodic".into(),
            value: json!({"periodic": false}),
            witnesses: Vec::new(),
            exact: true,
        },
    }
}

struct Finite {
    group: FiniteGroupTable,
    phi: Option<FiniteEndo>,
    target: Option<SubsetSpec<usize, ElemSet>>,
}

impl Finite {
    fn new(p: &crate::problem::FiniteProblem) -> phi_spectrum::Result<Self> {
        let group = p.group.build()?;
        let phi = match &p.endo {
            None => None,
            Some(FiniteEndoSpec::Map(m)) => Some(FiniteEndo::new(&group, m.clone())?),
            Some(FiniteEndoSpec::Generators(pairs)) => {
                let (gens, images): (Vec<usize>, Vec<usize>) = pairs.iter().copied().unzip();
                Some(endo_from_generator_images(&group, &gens, &images)?)
            }
        };
        let n = group.order();
        let target = match &p.target {
            None => None,
            Some(FiniteTarget::Finite(xs)) => Some(SubsetSpec::finite(xs.iter().copied())),
            Some(FiniteTarget::Cosets { reps, subgroup }) => Some(SubsetSpec::Recognizable {
                subgroup: ElemSet::from_indices(n, group.span(subgroup))?,
                coset_reps: reps.clone(),
            }),
        };
        Ok(Finite { group, phi, target })
    }

    fn target_set(&self) -> phi_spectrum::Result<ElemSet> {
        use phi_spectrum::spectrum::SetImageBackend;
        let t = self.target.as_ref().ok_or_else(missing_target)?;
        FiniteBackend::new(&self.group).materialize(t)
    }

    fn answer(&self, query: &Query) -> phi_spectrum::Result<Answer> {
        let phi = self
            .phi
            .as_ref()
            .ok_or_else(|| Error::NotHomomorphism("no `endo` line".into()))?;
        let index = |e: &Elem| match e {
            Elem::Index(x) => self.group.check_index(*x).map(|_| *x),
            _ => Err(Error::InvalidWord("expected an element index".into())),
        };
        let label = |x: usize| self.group.label(x);
        match query {
            Query::Order(e) => {
                let g = index(e)?;
                let o = phi_order_exact(phi, g, &self.target_set()?);
                Ok(order_answer(o, o.finite().map(|n| label(phi.apply_pow(g, n)))))
            }
            Query::Spectrum | Query::AutoSpectrum => {
                let k = self.target_set()?;
                let sp = if matches!(query, Query::Spectrum) {
                    spectrum_exact(phi, &k)
                } else {
                    let t = self.target.as_ref().ok_or_else(missing_target)?;
                    let backend = FiniteBackend::new(&self.group);
                    auto_spectrum_by_cover(&backend, t, phi, self.group.order() as u64)?
                };
                let max = sp.verified_max().unwrap_or(0).min(MAX_WITNESSES as u64 - 1);
                let witnesses = if sp == Spectrum::Empty {
                    Vec::new()
                } else {
                    (0..=max)
                        .filter_map(|n| preorder_exact(phi, n, &k).iter().next().map(|x| format!("{n}: {}", label(x))))
                        .collect()
                };
                Ok(spectrum_answer(sp, witnesses))
            }
            Query::Preorder(n) => {
                let p = preorder_exact(phi, *n, &self.target_set()?);
                let labels: Vec<String> = p.iter().map(label).collect();
                Ok(Answer {
                    text: format!("{{{}}}", labels.join(",")),
                    value: json!({ "elements": labels }),
                    witnesses: Vec::new(),
                    exact: true,
                })
            }
            Query::StableImage(e) => {
                let g = index(e)?;
                let yes = stable_image_exact(phi).contains(g);
                Ok(Answer {
                    text: if yes { "yes" } else { "no" }.into(),
                    value: json!({"variant": if yes { "yes" } else { "no" }}),
                    witnesses: Vec::new(),
                    exact: true,
                })
            }
            Query::Period(e) => {
                let g = index(e)?;
                let p = per_exact(phi).contains(g).then(|| {
                    let mut y = phi.apply(g);
                    let mut p = 1;
                    while y != g {
                        y = phi.apply(y);
                        p += 1;
                    }
                    p
                });
                Ok(period_answer(p))
            }
            Query::CosetAnalysis => Ok(class_answer(
                classify_cosets(phi)
                    .into_iter()
                    .enumerate()
                    .map(|(x, c)| (label(x), c))
                    .collect(),
            )),
        }
    }
}

struct Fp<'a> {
    problem: &'a crate::problem::FpProblem,
    pres: Presentation,
    phi: WordEndo,
    settings: Settings,
    target: OnceCell<Result<CosetTarget, Error>>,
    quotient: OnceCell<Result<QuotientData, Error>>,
    normal: OnceCell<Result<QuotientData, Error>>,
}

impl<'a> Fp<'a> {
    fn new(problem: &'a crate::problem::FpProblem, settings: Settings) -> phi_spectrum::Result<Self> {
        let pres = Presentation::new(problem.generators.clone(), problem.relators.clone())?;
        let phi = WordEndo::new(&pres, problem.endo.clone())?;
        Ok(Fp {
            problem,
            pres,
            phi,
            settings,
            target: OnceCell::new(),
            quotient: OnceCell::new(),
            normal: OnceCell::new(),
        })
    }

    fn quotient_cap(&self) -> usize {
        self.settings.quotient_cap.unwrap_or(DEFAULT_CLOSURE_CAP)
    }

    fn target(&self) -> phi_spectrum::Result<&CosetTarget> {
        self.target
            .get_or_init(|| {
                let reps = self.problem.target.as_ref().ok_or_else(missing_target)?;
                CosetTarget::new(&self.pres, &self.problem.subgroup, reps, self.settings.coset_cap)
            })
            .as_ref()
            .map_err(Clone::clone)
    }

    fn quotient(&self) -> phi_spectrum::Result<&QuotientData> {
        self.quotient
            .get_or_init(|| {
                let k = self.target()?;
                if self.settings.strict_invariant_core {
                    let caps = QuotientCaps {
                        quotient: self.quotient_cap(),
                        ..QuotientCaps::default()
                    };
                    fully_invariant_core_strict(&self.pres, &self.phi, k.table().index(), caps)
                } else {
                    phi_invariant_core(&self.pres, &self.phi, k.action(), self.quotient_cap())
                }
            })
            .as_ref()
            .map_err(Clone::clone)
    }

    fn normal_quotient(&self) -> phi_spectrum::Result<&QuotientData> {
        self.normal
            .get_or_init(|| match &self.problem.normal {
                Some(f) => normal_subgroup_quotient(&self.pres, &self.phi, f, self.settings.coset_cap, self.quotient_cap()),
                None => self.quotient().cloned(),
            })
            .as_ref()
            .map_err(Clone::clone)
    }

    fn show(&self, w: &phi_spectrum::fp::Word) -> String {
        self.pres.show(w)
    }

    fn answer(&self, query: &Query) -> phi_spectrum::Result<Answer> {
        match query {
            Query::Order(Elem::Word(g)) => {
                let qd = self.quotient()?;
                let o = recognizable_order(qd, g, self.target()?)?;
                let witness = o.finite().map(|n| {
                    let x = qd.theta().apply_pow(qd.eval_word(g), n);
                    format!("N*{}", self.show(&qd.labels()[x]))
                });
                Ok(order_answer(o, witness))
            }
            Query::Order(_) => Err(Error::InvalidWord("expected a word".into())),
            Query::Spectrum => {
                let qd = self.quotient()?;
                let k = self.target()?;
                let sp = recognizable_spectrum(qd, k)?;
                let set = target_elements(qd, k)?;
                let labels = qd.labels();
                let max = sp.verified_max().unwrap_or(0).min(MAX_WITNESSES as u64 - 1);
                let witnesses = if sp == Spectrum::Empty {
                    Vec::new()
                } else {
                    (0..=max)
                        .filter_map(|n| {
                            preorder_exact(qd.theta(), n, &set)
                                .iter()
                                .next()
                                .map(|x| format!("{n}: N*{}", self.show(&labels[x])))
                        })
                        .collect()
                };
                Ok(spectrum_answer(sp, witnesses))
            }
            Query::Preorder(n) => {
                let cosets = recognizable_preorder(self.quotient()?, *n, self.target()?)?;
                let labels: Vec<String> = cosets.iter().map(|c| format!("N*{}", self.show(&c.word))).collect();
                Ok(Answer {
                    text: format!("{{{}}}", labels.join(", ")),
                    value: json!({ "cosets": labels }),
                    witnesses: Vec::new(),
                    exact: true,
                })
            }
            Query::CosetAnalysis => {
                let qd = self.normal_quotient()?;
                Ok(class_answer(
                    stable_image_coset_analysis(qd)
                        .into_iter()
                        .map(|c| (format!("N*{}", self.show(&c.coset.word)), c.class))
                        .collect(),
                ))
            }
            Query::StableImage(_) => Err(unsupported("stable-image")),
            Query::Period(_) => Err(unsupported("period")),
            Query::AutoSpectrum => Err(unsupported("auto-spectrum")),
        }
    }
}

fn timed(query: String, f: impl FnOnce() -> phi_spectrum::Result<Answer>) -> Record {
    let start = Instant::now();
    let outcome = match f() {
        Ok(a) => Outcome::Answer(a),
        Err(e) => Outcome::Failed {
            message: e.to_string(),
            budget: e.is_budget(),
        },
    };
    Record {
        query,
        outcome,
        elapsed: start.elapsed(),
    }
}

/// Runs every query in file order. `overrides` come from the command line
/// and win over the file's own options.
pub fn run(problem: &ProblemFile, overrides: &Options) -> RunReport {
    let settings = Settings::from_options(&problem.options.overridden_by(overrides));
    let names: Vec<String> = problem.queries.iter().map(|q| problem.show_query(q)).collect();
    let fail_all = |e: Error| RunReport {
        records: names
            .iter()
            .map(|n| Record {
                query: n.clone(),
                outcome: Outcome::Failed {
                    message: e.to_string(),
                    budget: e.is_budget(),
                },
                elapsed: Duration::ZERO,
            })
            .collect(),
    };
    let records = match &problem.payload {
        Payload::Abelian(p) => match Abelian::new(p) {
            Ok(ctx) => problem
                .queries
                .iter()
                .zip(&names)
                .map(|(q, n)| timed(n.clone(), || ctx.answer(q, &settings)))
                .collect(),
            Err(e) => return fail_all(e),
        },
        Payload::Finite(p) => match Finite::new(p) {
            Ok(ctx) => problem
                .queries
                .iter()
                .zip(&names)
                .map(|(q, n)| timed(n.clone(), || ctx.answer(q)))
                .collect(),
            Err(e) => return fail_all(e),
        },
        Payload::Fp(p) => match Fp::new(p, settings) {
            Ok(ctx) => problem
                .queries
                .iter()
                .zip(&names)
                .map(|(q, n)| timed(n.clone(), || ctx.answer(q)))
                .collect(),
            Err(e) => return fail_all(e),
        },
    };
    RunReport { records }
}
