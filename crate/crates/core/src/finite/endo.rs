use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::group::FiniteGroupTable;
use super::set::ElemSet;
use crate::error::{Error, Result};

/// Homomorphism checks are exhaustive up to this order.
const EXHAUSTIVE_HOM_ORDER: usize = 512;

/// Pairs sampled for the homomorphism check above [`EXHAUSTIVE_HOM_ORDER`].
const HOM_SAMPLES: usize = 65_536;

/// An endomorphism of a finite group as an index map, acting on the right.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FiniteEndo {
    map: Vec<usize>,
}

/// First pair `(a, b)` with `(ab)φ ≠ aφ·bφ`, if any.
pub fn hom_violation(g: &FiniteGroupTable, map: &[usize]) -> Option<(usize, usize)> {
    let n = g.order();
    let bad = |a: usize, b: usize| map[g.mul(a, b)] != g.mul(map[a], map[b]);
    if n <= EXHAUSTIVE_HOM_ORDER {
        for a in 0..n {
            for b in 0..n {
                if bad(a, b) {
                    return Some((a, b));
                }
            }
        }
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..HOM_SAMPLES {
            let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
            if bad(a, b) {
                return Some((a, b));
            }
        }
    }
    None
}

impl FiniteEndo {
    /// Checks the map is a homomorphism of `g`: exhaustively up to order 512,
    /// on a fixed-seed sample of pairs above.
    pub fn new(g: &FiniteGroupTable, map: Vec<usize>) -> Result<Self> {
        let e = Self::new_unchecked(g, map)?;
        if e.map[0] != 0 {
            return Err(Error::NotHomomorphism("identity is not fixed".into()));
        }
        if let Some((a, b)) = hom_violation(g, &e.map) {
            return Err(Error::NotHomomorphism(format!("product {a}*{b} is not preserved")));
        }
        Ok(e)
    }

    /// Validates only the length and the index range.
    pub fn new_unchecked(g: &FiniteGroupTable, map: Vec<usize>) -> Result<Self> {
        if map.len() != g.order() {
            return Err(Error::DimensionMismatch {
                expected: g.order(),
                found: map.len(),
            });
        }
        for &x in &map {
            g.check_index(x)?;
        }
        Ok(FiniteEndo { map })
    }

    /// For maps known to be endomorphisms of a group that is never built.
    pub(crate) fn from_map_unchecked(map: Vec<usize>) -> Self {
        FiniteEndo { map }
    }

    pub fn identity(order: usize) -> Self {
        FiniteEndo {
            map: (0..order).collect(),
        }
    }

    pub fn trivial(order: usize) -> Self {
        FiniteEndo { map: vec![0; order] }
    }

    pub fn order(&self) -> usize {
        self.map.len()
    }

    pub fn apply(&self, x: usize) -> usize {
        self.map[x]
    }

    pub fn map(&self) -> &[usize] {
        &self.map
    }

    /// `x ↦ xφ^k`.
    pub fn apply_pow(&self, x: usize, k: u64) -> usize {
        (0..k).fold(x, |y, _| self.map[y])
    }

    /// `self` then `other`.
    pub fn then(&self, other: &FiniteEndo) -> FiniteEndo {
        FiniteEndo {
            map: self.map.iter().map(|&x| other.map[x]).collect(),
        }
    }

    pub fn power(&self, k: u64) -> FiniteEndo {
        (0..k).fold(Self::identity(self.order()), |acc, _| acc.then(self))
    }

    pub fn is_bijective(&self) -> bool {
        self.image(&ElemSet::full(self.order())).len() == self.order()
    }

    /// `Sφ`.
    pub fn image(&self, s: &ElemSet) -> ElemSet {
        let mut out = ElemSet::empty(self.order());
        for x in s.iter() {
            out.insert(self.map[x]);
        }
        out
    }

    /// `Sφ^{-1}`.
    pub fn preimage(&self, s: &ElemSet) -> ElemSet {
        ElemSet::filter(self.order(), |x| s.contains(self.map[x]))
    }

    /// `Ker(φ^k)`.
    pub fn kernel_of_power(&self, k: u64) -> ElemSet {
        ElemSet::filter(self.order(), |x| self.apply_pow(x, k) == 0)
    }

    /// `Im(φ^k)`.
    pub fn image_of_power(&self, k: u64) -> ElemSet {
        (0..k).fold(ElemSet::full(self.order()), |s, _| self.image(&s))
    }
}

/// The homomorphism sending `gens[i]` to `images[i]`, built by walking the
/// Cayley graph and then verified on all pairs.
pub fn endo_from_generator_images(g: &FiniteGroupTable, gens: &[usize], images: &[usize]) -> Result<FiniteEndo> {
    if gens.len() != images.len() {
        return Err(Error::DimensionMismatch {
            expected: gens.len(),
            found: images.len(),
        });
    }
    for &x in gens.iter().chain(images) {
        g.check_index(x)?;
    }
    let n = g.order();
    let mut map = vec![usize::MAX; n];
    map[0] = 0;
    let mut queue = vec![0usize];
    let mut i = 0;
    while i < queue.len() {
        let x = queue[i];
        for (&s, &t) in gens.iter().zip(images) {
            let y = g.mul(x, s);
            let fy = g.mul(map[x], t);
            if map[y] == usize::MAX {
                map[y] = fy;
                queue.push(y);
            } else if map[y] != fy {
                return Err(Error::NotHomomorphism(format!(
                    "element {y} would map to both {} and {fy}",
                    map[y]
                )));
            }
        }
        i += 1;
    }
    if queue.len() < n {
        return Err(Error::NotGenerating {
            reached: queue.len(),
            order: n,
        });
    }
    FiniteEndo::new(g, map)
}

/// Every endomorphism of `g`, found by trying all generator images
/// compatible with element orders.
pub fn all_endomorphisms(g: &FiniteGroupTable) -> Vec<FiniteEndo> {
    let gens = g.generating_set();
    let n = g.order();
    let candidates: Vec<Vec<usize>> = gens
        .iter()
        .map(|&s| {
            let o = g.element_order(s);
            (0..n).filter(|&t| o % g.element_order(t) == 0).collect()
        })
        .collect();
    let mut out = Vec::new();
    let mut choice = vec![0usize; gens.len()];
    loop {
        let images: Vec<usize> = choice.iter().zip(&candidates).map(|(&c, cs)| cs[c]).collect();
        if let Ok(e) = endo_from_generator_images(g, &gens, &images) {
            out.push(e);
        }
        let mut pos = 0;
        loop {
            if pos == gens.len() {
                return out;
            }
            choice[pos] += 1;
            if choice[pos] < candidates[pos].len() {
                break;
            }
            choice[pos] = 0;
            pos += 1;
        }
    }
}
