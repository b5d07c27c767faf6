//! Free abelian groups `Z^m` with endomorphisms given by integer matrices
//! acting on row vectors from the right.

mod backend;
mod matrix;
mod normal_form;
mod ops;
mod orbits;
mod residue;

pub use backend::{LatticeBackend, LatticePreorder};
pub use matrix::{IntMatrix, IntVector};
pub use normal_form::{check_snf, hermite_normal_form, smith_normal_form, AffineLattice, LatticeBasis, SnfDecomposition};
pub use ops::{
    image_lattice, is_periodic, kernel_lattice, left_kernel_snf, minkowski_bound, periodic_lattice,
    restriction_injective, solve_affine_preimage, solve_preimage, stabilization_index,
};
pub use orbits::{
    finite_k_spectrum, periodic_spectrum_bound, singleton_spectrum, stable_image_probe, FiniteTargetAnalysis,
    StableImageProbe,
};
pub use residue::{coset_target_spectrum, lattice_exponent, DEFAULT_RESIDUE_CAP};
