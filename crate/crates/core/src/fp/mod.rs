//! Finitely presented groups, accessed through finite quotients.

mod quotient;
mod recognizable;
mod todd_coxeter;
mod word;

pub use quotient::{
    coset_action_hom, eval_perm_word, fully_invariant_core_strict, normal_subgroup_quotient, phi_invariant_core,
    CoreKind, PermTuple, Provenance, QuotientCaps, QuotientData,
};
pub use recognizable::{
    classify_cosets, recognizable_order, recognizable_preorder, recognizable_spectrum, stable_image_coset_analysis,
    target_elements, CosetClass, CosetClassification, CosetTarget, NCoset,
};
pub use todd_coxeter::{todd_coxeter, CosetTable, DEFAULT_COSET_CAP};
pub use word::{parse_word, Letter, Presentation, Word, WordEndo, WordSyntaxError};
