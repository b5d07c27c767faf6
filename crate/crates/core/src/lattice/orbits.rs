//! Stable-image probing and spectra of finite targets in `Z^m`.

use num_traits::ToPrimitive;

use super::matrix::{IntMatrix, IntVector};
use super::normal_form::{AffineLattice, LatticeBasis};
use super::ops::{is_periodic, minkowski_bound, restriction_injective, solve_preimage, stabilization_index};
use crate::error::{Error, Result};
use crate::spectrum::{assemble_spectrum, Emptiness, Spectrum};

/// What a bounded walk down the image chain learned about `h`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StableImageProbe {
    /// `h ∈ Im(Q^k)` but `h ∉ Im(Q^{k+1})`.
    No(u64),
    /// `h` is periodic; periodic points lie in every image.
    Yes { period: u64 },
    /// `h ∈ Im(Q^k) = Im(Q^{k+1})`, so the image chain is constant from `k`
    /// on and `h` lies in the stable image without being periodic.
    InStableImage { from: u64 },
    /// `h` survived every image up to the horizon; nothing proved.
    UnknownUpTo(u64),
}

/// Walks `Im(Q) ⊇ Im(Q²) ⊇ ⋯` looking for the exit of `h`.
///
/// A horizon below the stabilization index is raised to it.
pub fn stable_image_probe(q: &IntMatrix, h: &IntVector, horizon: u64) -> Result<StableImageProbe> {
    if let Some(period) = is_periodic(q, h)? {
        return Ok(StableImageProbe::Yes { period });
    }
    let m = q.dim();
    let horizon = horizon.max(stabilization_index(q));
    let mut power = IntMatrix::identity(m);
    let mut prev = LatticeBasis::full(m);
    for k in 1..=horizon {
        power = power.mul(q);
        let image = LatticeBasis::from_rows(power.rows().to_vec(), m);
        if !image.contains(h) {
            return Ok(StableImageProbe::No(k - 1));
        }
        if image == prev {
            return Ok(StableImageProbe::InStableImage { from: k - 1 });
        }
        prev = image;
    }
    Ok(StableImageProbe::UnknownUpTo(horizon))
}

/// `M_m + stabilization_index − 1`, saturating; bounds the spectrum of a
/// periodic point.
pub fn periodic_spectrum_bound(q: &IntMatrix) -> u64 {
    let bound = minkowski_bound(q.dim()).to_u64().unwrap_or(u64::MAX);
    bound.saturating_add(stabilization_index(q)).saturating_sub(1)
}

/// Spectrum of the singleton `{h}`.
pub fn singleton_spectrum(q: &IntMatrix, h: &IntVector, horizon: u64) -> Result<Spectrum> {
    match stable_image_probe(q, h, horizon)? {
        StableImageProbe::No(k) => {
            // For non-periodic h no x reaches h twice, so the preorders are
            // exactly the preimages.
            let probe = |n: u64| -> Result<Emptiness> {
                Ok(match solve_preimage(q, n, h)? {
                    Some(_) => Emptiness::Nonempty,
                    None => Emptiness::Empty,
                })
            };
            assemble_spectrum(probe, k + 1, false)
        }
        StableImageProbe::Yes { period } => {
            let bound = periodic_spectrum_bound(q);
            let probe = |n: u64| -> Result<Emptiness> {
                let nonempty = n < period || !restriction_injective(q, n - period);
                Ok(if nonempty { Emptiness::Nonempty } else { Emptiness::Empty })
            };
            let sp = assemble_spectrum(probe, bound.saturating_add(1), false)?;
            debug_assert!(matches!(sp, Spectrum::Prefix(n) if n + 1 >= period && n <= bound));
            Ok(sp)
        }
        StableImageProbe::InStableImage { .. } => Ok(Spectrum::AllNaturals),
        StableImageProbe::UnknownUpTo(h) => Ok(Spectrum::PrefixUnknownTail { prefix: h, horizon: h }),
    }
}

/// Spectrum of a finite target `K ⊂ Z^m` with per-`n` emptiness decisions.
#[derive(Debug, Clone)]
pub struct FiniteTargetAnalysis {
    q: IntMatrix,
    targets: Vec<IntVector>,
    singles: Vec<Spectrum>,
    periods: Vec<Option<u64>>,
    horizon: u64,
}

impl FiniteTargetAnalysis {
    pub fn new(q: &IntMatrix, targets: &[IntVector], horizon: u64) -> Result<Self> {
        let mut uniq: Vec<IntVector> = Vec::new();
        for t in targets {
            if t.dim() != q.dim() {
                return Err(Error::DimensionMismatch {
                    expected: q.dim(),
                    found: t.dim(),
                });
            }
            if !uniq.contains(t) {
                uniq.push(t.clone());
            }
        }
        let singles = uniq
            .iter()
            .map(|h| singleton_spectrum(q, h, horizon))
            .collect::<Result<Vec<_>>>()?;
        let periods = uniq.iter().map(|h| is_periodic(q, h)).collect::<Result<Vec<_>>>()?;
        Ok(FiniteTargetAnalysis {
            q: q.clone(),
            targets: uniq,
            singles,
            periods,
            horizon: horizon.max(stabilization_index(q)),
        })
    }

    pub fn targets(&self) -> &[IntVector] {
        &self.targets
    }

    pub fn singleton_spectra(&self) -> &[Spectrum] {
        &self.singles
    }

    /// Whether the preorder of `n` is empty.
    pub fn preorder_emptiness(&self, n: u64) -> Result<Emptiness> {
        let mut unknown = false;
        for r in 0..self.targets.len() {
            match self.singles[r].contains(n) {
                Some(true) => {
                    if self.reaches_first(r, n)? {
                        return Ok(Emptiness::Nonempty);
                    }
                }
                Some(false) => {}
                None => unknown = true,
            }
        }
        Ok(if unknown { Emptiness::Unknown } else { Emptiness::Empty })
    }

    /// Whether some `x` has `xQ^n = g_r` while `xQ^i ∉ K` for all `i < n`.
    ///
    /// The solutions of `xQ^n = g_r` form one coset `a + Ker(Q^n)`. Those
    /// hitting `K` early fall into cosets `a_j + Ker(Q^{n−o_j})` where `o_j`
    /// is the distance from `g_j` to `g_r`. The early hits are a union of
    /// nested-or-disjoint cosets; it covers `a + Ker(Q^n)` only if a single
    /// coset remains after merging and its kernel already equals
    /// `Ker(Q^n)`.
    fn reaches_first(&self, r: usize, n: u64) -> Result<bool> {
        let q = &self.q;
        let g_r = &self.targets[r];
        let Some(whole) = solve_preimage(q, n, g_r)? else {
            return Ok(false);
        };
        let mut pieces: Vec<(u64, AffineLattice)> = Vec::new();
        for (j, g_j) in self.targets.iter().enumerate() {
            let o = if j == r {
                match self.periods[r] {
                    Some(p) if p <= n => p,
                    _ => continue,
                }
            } else {
                let mut x = g_j.clone();
                let mut found = None;
                for k in 1..=n {
                    x = x.mul_matrix(q);
                    if &x == g_r {
                        found = Some(k);
                        break;
                    }
                }
                match found {
                    Some(k) => k,
                    None => continue,
                }
            };
            if let Some(c) = solve_preimage(q, n - o, g_j)? {
                if whole.contains(c.offset()) {
                    pieces.push((o, c));
                }
            }
        }
        pieces.sort_by(|a, b| b.0.cmp(&a.0));
        let mut kept: Vec<(u64, AffineLattice)> = Vec::new();
        for (o, c) in pieces {
            if kept.iter().any(|(_, k)| c.is_subset_of(k)) {
                continue;
            }
            kept.retain(|(_, k)| !k.is_subset_of(&c));
            kept.push((o, c));
        }
        let covered = kept.len() == 1 && restriction_injective(q, n - kept[0].0);
        Ok(!covered)
    }

    pub fn spectrum(&self) -> Result<Spectrum> {
        if self.targets.is_empty() {
            return Ok(Spectrum::Empty);
        }
        if self.singles.iter().any(|s| *s == Spectrum::AllNaturals) {
            return Ok(Spectrum::AllNaturals);
        }
        let probe = |n| self.preorder_emptiness(n);
        if self.singles.iter().all(Spectrum::is_certified) {
            let bound = self.singles.iter().filter_map(Spectrum::verified_max).max().unwrap_or(0);
            assemble_spectrum(probe, bound + 1, false)
        } else {
            assemble_spectrum(probe, self.horizon, false)
        }
    }
}

/// Spectrum of a finite target set.
pub fn finite_k_spectrum(q: &IntMatrix, targets: &[IntVector], horizon: u64) -> Result<Spectrum> {
    FiniteTargetAnalysis::new(q, targets, horizon)?.spectrum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(xs: &[i64]) -> IntVector {
        IntVector::from_i64s(xs)
    }

    #[test]
    fn probe_examples() {
        let dbl = IntMatrix::from_i64s(&[&[2]]);
        assert_eq!(stable_image_probe(&dbl, &v(&[8]), 64).unwrap(), StableImageProbe::No(3));
        let rot = IntMatrix::from_i64s(&[&[0, -1], &[1, 0]]);
        assert_eq!(
            stable_image_probe(&rot, &v(&[1, 0]), 64).unwrap(),
            StableImageProbe::Yes { period: 4 }
        );
        let q = IntMatrix::from_i64s(&[&[2, 0], &[0, 1]]);
        assert_eq!(
            stable_image_probe(&q, &v(&[0, 5]), 64).unwrap(),
            StableImageProbe::Yes { period: 1 }
        );
    }

    #[test]
    fn probe_on_unimodular_matrix_certifies_stable_image() {
        let cat = IntMatrix::from_i64s(&[&[2, 1], &[1, 1]]);
        assert_eq!(
            stable_image_probe(&cat, &v(&[1, 0]), 64).unwrap(),
            StableImageProbe::InStableImage { from: 0 }
        );
        assert_eq!(singleton_spectrum(&cat, &v(&[1, 0]), 64).unwrap(), Spectrum::AllNaturals);
    }

    #[test]
    fn probe_gives_up_at_the_horizon() {
        let q = IntMatrix::from_i64s(&[&[2, 0], &[0, 1]]);
        let h = v(&[1 << 20, 0]);
        assert_eq!(stable_image_probe(&q, &h, 10).unwrap(), StableImageProbe::UnknownUpTo(10));
        assert_eq!(
            singleton_spectrum(&q, &h, 10).unwrap(),
            Spectrum::PrefixUnknownTail { prefix: 10, horizon: 10 }
        );
        assert_eq!(singleton_spectrum(&q, &h, 64).unwrap(), Spectrum::Prefix(20));
    }

    #[test]
    fn singleton_examples() {
        let dbl = IntMatrix::from_i64s(&[&[2]]);
        assert_eq!(singleton_spectrum(&dbl, &v(&[8]), 64).unwrap(), Spectrum::Prefix(3));
        let rot = IntMatrix::from_i64s(&[&[0, -1], &[1, 0]]);
        assert_eq!(singleton_spectrum(&rot, &v(&[1, 0]), 64).unwrap(), Spectrum::Prefix(3));
        let id = IntMatrix::identity(2);
        assert_eq!(singleton_spectrum(&id, &v(&[0, 0]), 64).unwrap(), Spectrum::Prefix(0));
    }

    #[test]
    fn singleton_of_periodic_point_with_kernel() {
        // 0 is fixed; Ker grows once, so orders 0 and 1 occur.
        let q = IntMatrix::from_i64s(&[&[0, 1], &[0, 0]]);
        assert_eq!(singleton_spectrum(&q, &v(&[0, 0]), 64).unwrap(), Spectrum::Prefix(2));
        let z = IntMatrix::zero(2);
        assert_eq!(singleton_spectrum(&z, &v(&[0, 0]), 64).unwrap(), Spectrum::Prefix(1));
    }

    #[test]
    fn finite_target_examples() {
        let dbl = IntMatrix::from_i64s(&[&[2]]);
        // 8 and 2 have order 0; 4 and 1 have order 1; nothing has order 2.
        assert_eq!(finite_k_spectrum(&dbl, &[v(&[8]), v(&[2])], 64).unwrap(), Spectrum::Prefix(1));
        let nil = IntMatrix::from_i64s(&[&[0, 1], &[0, 0]]);
        assert_eq!(finite_k_spectrum(&nil, &[v(&[0, 0])], 64).unwrap(), Spectrum::Prefix(2));
        let id = IntMatrix::identity(3);
        assert_eq!(finite_k_spectrum(&id, &[v(&[1, 2, 3])], 64).unwrap(), Spectrum::Prefix(0));
        assert_eq!(finite_k_spectrum(&id, &[], 64).unwrap(), Spectrum::Empty);
    }

    #[test]
    fn finite_target_with_whole_orbit() {
        // K contains the full rotation orbit, so everything has order 0.
        let rot = IntMatrix::from_i64s(&[&[0, -1], &[1, 0]]);
        let k = [v(&[1, 0]), v(&[0, -1]), v(&[-1, 0]), v(&[0, 1])];
        assert_eq!(finite_k_spectrum(&rot, &k, 64).unwrap(), Spectrum::Prefix(0));
        assert_eq!(finite_k_spectrum(&rot, &k[..2], 64).unwrap(), Spectrum::Prefix(2));
    }

    #[test]
    fn finite_target_inherits_unknown_tail() {
        let q = IntMatrix::from_i64s(&[&[2, 0], &[0, 1]]);
        let sp = finite_k_spectrum(&q, &[v(&[1 << 20, 0]), v(&[3, 0])], 8).unwrap();
        assert_eq!(sp, Spectrum::PrefixUnknownTail { prefix: 8, horizon: 8 });
    }
}
