//! The perturbation calculus: homotopy equivalence data, smallness
//! certificates, the perturbed data and its obligations, degree-local
//! contractions, and the norm-controlled transgression series.

pub mod contraction;
pub mod he;
pub mod series;
pub mod small;

pub use contraction::{
    build_contraction, perturb_contraction, perturb_degree_contraction, DegreeContraction,
};
pub use he::{is_dr, is_special_dr, specialize_dr, HEData};
pub use series::{
    banach_epsilon, probe_constants, transgress_series, NormKind, NormedDegree, OddMap,
    SeriesOptions, Transgression,
};
pub use small::{
    certify, certify_nilpotent, compute_a, perturb, perturbed_dr_condition, retract_perturb,
    verify_lemma_relations, Perturbation, RelationReport, SmallnessCertificate,
};
