//! Relative orders, preorders and spectra of group endomorphisms.
//!
//! An endomorphism `φ` acts on the right: `x ↦ xφ`, and `φψ` means "first
//! `φ`, then `ψ`". The relative order of `g` in a target set `K` is the least
//! `k` with `gφ^k ∈ K`; the spectrum of `K` is the set of relative orders
//! that actually occur.

pub mod error;
pub mod finite;
pub mod fp;
pub mod lattice;
pub mod spectrum;

pub use error::{Error, Result};
pub use spectrum::{OrderValue, Spectrum, SubsetSpec};
