//! Backend-agnostic result types and drivers for relative orders, preorders
//! and spectra.
//!
//! Endomorphisms act on the right: `x ↦ xφ`, and a composite `φψ` means
//! "apply `φ`, then `ψ`". Every backend follows this convention.
//!
//! The drivers here never decide anything a backend cannot prove. A search
//! that runs out of horizon without a termination certificate reports
//! [`OrderValue::UnknownBeyond`]; an emptiness scan that cannot be closed
//! reports [`Spectrum::PrefixUnknownTail`].

use std::fmt;

use crate::error::{Error, Result};

/// Number of iterations an orbit search runs before asking for a certificate.
pub const DEFAULT_HORIZON: u64 = 64;

/// Relative order of an element in a target set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OrderValue {
    /// `gφ^n ∈ K` and `gφ^i ∉ K` for all `i < n`.
    Finite(u64),
    /// Proved: the forward orbit never meets `K`.
    Infinite,
    /// Every exponent up to and including the horizon was tested negative and
    /// no certificate was found.
    UnknownBeyond(u64),
}

impl OrderValue {
    pub fn finite(self) -> Option<u64> {
        match self {
            OrderValue::Finite(n) => Some(n),
            _ => None,
        }
    }

    /// True unless the value is horizon-limited.
    pub fn is_certified(self) -> bool {
        !matches!(self, OrderValue::UnknownBeyond(_))
    }
}

impl fmt::Display for OrderValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OrderValue::Finite(n) => write!(f, "finite {n}"),
            OrderValue::Infinite => write!(f, "infinite"),
            OrderValue::UnknownBeyond(h) => write!(f, "unknown beyond {h}"),
        }
    }
}

/// Shape of the set of realized relative orders.
///
/// A spectrum is always a prefix `{0, …, n}` of the naturals or all of them.
/// The empty target set has the empty spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Spectrum {
    /// Spectrum of the empty target set.
    Empty,
    /// `{0, …, n}`, with `n + 1` proved absent.
    Prefix(u64),
    /// Every natural number is realized (proved).
    AllNaturals,
    /// `{0, …, prefix}` is verified; nothing is known past `horizon`.
    PrefixUnknownTail { prefix: u64, horizon: u64 },
}

impl Spectrum {
    /// Membership of `n`, or `None` when the result does not decide it.
    pub fn contains(&self, n: u64) -> Option<bool> {
        match *self {
            Spectrum::Empty => Some(false),
            Spectrum::Prefix(max) => Some(n <= max),
            Spectrum::AllNaturals => Some(true),
            Spectrum::PrefixUnknownTail { prefix, .. } => {
                if n <= prefix {
                    Some(true)
                } else {
                    None
                }
            }
        }
    }

    pub fn is_certified(&self) -> bool {
        !matches!(self, Spectrum::PrefixUnknownTail { .. })
    }

    /// Largest verified member, if any.
    pub fn verified_max(&self) -> Option<u64> {
        match *self {
            Spectrum::Empty | Spectrum::AllNaturals => None,
            Spectrum::Prefix(n) => Some(n),
            Spectrum::PrefixUnknownTail { prefix, .. } => Some(prefix),
        }
    }
}

impl fmt::Display for Spectrum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Spectrum::Empty => write!(f, "empty"),
            Spectrum::Prefix(n) => write!(f, "prefix {n}"),
            Spectrum::AllNaturals => write!(f, "all naturals"),
            Spectrum::PrefixUnknownTail { prefix, horizon } => {
                write!(f, "prefix {prefix} with unknown tail beyond {horizon}")
            }
        }
    }
}

/// A target set `K`: finitely many elements, or a finite union of cosets of
/// a subgroup.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SubsetSpec<E, S> {
    FiniteSet(Vec<E>),
    Recognizable { subgroup: S, coset_reps: Vec<E> },
}

impl<E: PartialEq, S> SubsetSpec<E, S> {
    /// Finite target with duplicates removed (first occurrence wins).
    pub fn finite(elements: impl IntoIterator<Item = E>) -> Self {
        let mut out: Vec<E> = Vec::new();
        for e in elements {
            if !out.contains(&e) {
                out.push(e);
            }
        }
        SubsetSpec::FiniteSet(out)
    }
}

/// Search budget for [`phi_order`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HorizonPolicy {
    pub horizon: u64,
}

impl Default for HorizonPolicy {
    fn default() -> Self {
        HorizonPolicy {
            horizon: DEFAULT_HORIZON,
        }
    }
}

impl HorizonPolicy {
    pub fn new(horizon: u64) -> Self {
        HorizonPolicy { horizon }
    }
}

pub type Target<B> = SubsetSpec<<B as Backend>::Elem, <B as Backend>::Subgroup>;

/// A group in which elements can be pushed through an endomorphism and tested
/// against a target set.
pub trait Backend {
    type Elem: Clone + PartialEq + fmt::Debug;
    type Endo;
    type Subgroup;

    /// `xφ`.
    fn apply(&self, phi: &Self::Endo, x: &Self::Elem) -> Self::Elem;

    /// Rejects elements that do not belong to this backend.
    fn check_element(&self, x: &Self::Elem) -> Result<()>;

    /// Rejects endomorphisms that do not belong to this backend.
    fn check_endo(&self, phi: &Self::Endo) -> Result<()>;

    fn contains(&self, target: &Target<Self>, x: &Self::Elem) -> Result<bool>;

    /// Proof that the orbit of `g` never meets `target`, given that the
    /// exponents `0..=searched` were already tested negative.
    ///
    /// Returning `false` means "no proof found", never "reaches".
    fn certify_unreachable(
        &self,
        _phi: &Self::Endo,
        _g: &Self::Elem,
        _target: &Target<Self>,
        _searched: u64,
    ) -> Result<bool> {
        Ok(false)
    }
}

/// Relative order of `g` in `target` under `phi`.
///
/// Walks the orbit `g, gφ, gφ², …` up to the horizon, then asks the backend
/// for an unreachability certificate.
pub fn phi_order<B: Backend>(
    backend: &B,
    g: &B::Elem,
    target: &Target<B>,
    phi: &B::Endo,
    policy: HorizonPolicy,
) -> Result<OrderValue> {
    backend.check_element(g)?;
    backend.check_endo(phi)?;
    let mut x = g.clone();
    for k in 0..=policy.horizon {
        if backend.contains(target, &x)? {
            return Ok(OrderValue::Finite(k));
        }
        if k < policy.horizon {
            x = backend.apply(phi, &x);
        }
    }
    if backend.certify_unreachable(phi, g, target, policy.horizon)? {
        Ok(OrderValue::Infinite)
    } else {
        Ok(OrderValue::UnknownBeyond(policy.horizon))
    }
}

/// Backends able to represent the preimage sets `Kφ^{-n}`.
pub trait PreimageBackend: Backend {
    /// A finite union of basic preimage sets.
    type Union: Clone;
    /// Representation of a preorder, `hit ∖ ⋃ earlier`.
    type Preorder;

    fn preimage_power(&self, phi: &Self::Endo, target: &Target<Self>, n: u64)
        -> Result<Self::Union>;

    fn preorder_from(&self, hit: Self::Union, earlier: &[Self::Union]) -> Result<Self::Preorder>;
}

/// `Kφ^{-n} ∖ ⋃_{i<n} Kφ^{-i}` in the backend's set representation.
pub fn phi_preorder<B: PreimageBackend>(
    backend: &B,
    n: u64,
    target: &Target<B>,
    phi: &B::Endo,
) -> Result<B::Preorder> {
    backend.check_endo(phi)?;
    let earlier = (0..n)
        .map(|i| backend.preimage_power(phi, target, i))
        .collect::<Result<Vec<_>>>()?;
    let hit = backend.preimage_power(phi, target, n)?;
    backend.preorder_from(hit, &earlier)
}

/// Answer of a preorder emptiness probe.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Emptiness {
    Nonempty,
    Empty,
    Unknown,
}

/// Turns a preorder emptiness probe into a spectrum.
///
/// Scans `n = 0..=bound`. The first `Empty` closes the spectrum; the probe is
/// asked once more at `n + 1` and must not answer `Nonempty` there. If every
/// probe up to `bound` is nonempty, the result is `AllNaturals` when the
/// caller holds a certificate and a horizon-limited prefix otherwise.
pub fn assemble_spectrum<F>(mut probe: F, bound: u64, all_naturals_certified: bool) -> Result<Spectrum>
where
    F: FnMut(u64) -> Result<Emptiness>,
{
    for n in 0..=bound {
        match probe(n)? {
            Emptiness::Nonempty => {}
            Emptiness::Empty => {
                if all_naturals_certified {
                    return Err(Error::InconsistentProbe {
                        n,
                        detail: "empty preorder contradicts the all-naturals certificate".into(),
                    });
                }
                if probe(n + 1)? == Emptiness::Nonempty {
                    return Err(Error::InconsistentProbe {
                        n: n + 1,
                        detail: format!("nonempty after a certified empty preorder at {n}"),
                    });
                }
                return Ok(match n {
                    0 => Spectrum::Empty,
                    _ => Spectrum::Prefix(n - 1),
                });
            }
            Emptiness::Unknown => {
                if n == 0 {
                    return Err(Error::InconsistentProbe {
                        n,
                        detail: "preorder 0 is the target itself and must be decided".into(),
                    });
                }
                return Ok(Spectrum::PrefixUnknownTail {
                    prefix: n - 1,
                    horizon: bound,
                });
            }
        }
    }
    if all_naturals_certified {
        Ok(Spectrum::AllNaturals)
    } else {
        Ok(Spectrum::PrefixUnknownTail {
            prefix: bound,
            horizon: bound,
        })
    }
}

/// A finite tail `(x_{-|t|+1}, …, x_{-1}, x_0)` with `x_{-i+1} = x_{-i}φ`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tail<E> {
    entries: Vec<E>,
}

impl<E: Clone + PartialEq + fmt::Debug> Tail<E> {
    /// Checks the orbit relation between consecutive entries.
    pub fn new<B: Backend<Elem = E>>(backend: &B, phi: &B::Endo, entries: Vec<E>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::EmptyTail);
        }
        for (i, pair) in entries.windows(2).enumerate() {
            if backend.apply(phi, &pair[0]) != pair[1] {
                return Err(Error::BrokenTail(i));
            }
        }
        Ok(Tail { entries })
    }

    /// The tail `(x, xφ, …, xφ^{len-1})`.
    pub fn from_start<B: Backend<Elem = E>>(backend: &B, phi: &B::Endo, start: E, len: usize) -> Result<Self> {
        if len == 0 {
            return Err(Error::EmptyTail);
        }
        let mut entries = Vec::with_capacity(len);
        entries.push(start);
        while entries.len() < len {
            let next = backend.apply(phi, entries.last().unwrap());
            entries.push(next);
        }
        Ok(Tail { entries })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `x_{-i}`, for `0 ≤ i < len`.
    pub fn back(&self, i: usize) -> Option<&E> {
        let n = self.entries.len();
        (i < n).then(|| &self.entries[n - 1 - i])
    }

    /// The final entry `x_0`.
    pub fn end(&self) -> &E {
        self.entries.last().unwrap()
    }

    pub fn entries(&self) -> &[E] {
        &self.entries
    }
}

/// `min{i > 0 : x_{-i} ∈ K}`, or `|t|` when no earlier entry lies in `K`.
pub fn tail_lambda<B: Backend>(backend: &B, tail: &Tail<B::Elem>, target: &Target<B>) -> Result<u64> {
    if tail.is_empty() {
        return Err(Error::EmptyTail);
    }
    for i in 1..tail.len() {
        if backend.contains(target, tail.back(i).unwrap())? {
            return Ok(i as u64);
        }
    }
    Ok(tail.len() as u64)
}

/// Backends that can push whole sets forward.
pub trait SetImageBackend: Backend {
    type Set: Clone;

    fn materialize(&self, target: &Target<Self>) -> Result<Self::Set>;
    fn image(&self, phi: &Self::Endo, set: &Self::Set) -> Self::Set;
    fn union(&self, a: &Self::Set, b: &Self::Set) -> Self::Set;
    fn is_subset(&self, a: &Self::Set, b: &Self::Set) -> bool;
    fn is_empty_set(&self, a: &Self::Set) -> bool;
    fn is_bijective(&self, phi: &Self::Endo) -> bool;
    fn is_finite(&self) -> bool;
}

/// Spectrum of `K` under an automorphism: the least `n` with
/// `K ⊆ ⋃_{k=1}^{n+1} Kφ^k`.
pub fn auto_spectrum_by_cover<B: SetImageBackend>(
    backend: &B,
    target: &Target<B>,
    phi: &B::Endo,
    bound: u64,
) -> Result<Spectrum> {
    backend.check_endo(phi)?;
    if !backend.is_bijective(phi) {
        return Err(Error::NotBijective);
    }
    let k = backend.materialize(target)?;
    if backend.is_empty_set(&k) {
        return Ok(Spectrum::Empty);
    }
    let mut power = backend.image(phi, &k);
    let mut covered = power.clone();
    for n in 0..=bound {
        if backend.is_subset(&k, &covered) {
            return Ok(Spectrum::Prefix(n));
        }
        power = backend.image(phi, &power);
        covered = backend.union(&covered, &power);
    }
    if !backend.is_finite() {
        return Err(Error::Unsupported(
            "bound exhausted without containment on an infinite backend".into(),
        ));
    }
    // No containment up to `bound`: every order up to `bound + 1` occurs.
    Ok(Spectrum::PrefixUnknownTail {
        prefix: bound + 1,
        horizon: bound + 1,
    })
}
