//! Explicit finite groups on dense indices, identity `0`. Everything here is
//! computed by enumeration, which makes this backend the reference the other
//! backends are tested against.

mod backend;
mod endo;
mod exact;
mod group;
mod set;
mod suite;

pub use backend::FiniteBackend;
pub use endo::{all_endomorphisms, endo_from_generator_images, hom_violation, FiniteEndo};
pub use exact::{
    kernel_cosets, kernel_cover_check, kernel_stabilization_check, orbit_decompose, order_table, per_exact,
    phi_order_exact, preorder_exact, restriction_injective_exact, spectrum_exact, stable_image_exact, tails_ending_in,
};
pub use group::{
    check_permutations, compose_perms, from_closure, group_from_permutations, permutation_closure,
    small_groups_up_to_12, AxiomViolation, FiniteGroupTable, DEFAULT_CLOSURE_CAP,
};
pub use set::ElemSet;
pub use suite::{finite_backend_invariant_suite, finite_backend_invariant_suite_seeded, CheckOutcome, SuiteReport};
