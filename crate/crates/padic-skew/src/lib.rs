//! Matrix algebra over non-Archimedean local fields.
//!
//! The crate provides, from the ground up:
//!
//! * fixed-precision arithmetic in a p-adic or Laurent-series field,
//!   together with the standard additive character ([`field`]);
//! * matrices over the field, Haar sampling on the integral general linear
//!   group, and the skew-symmetric canonical form under integral congruence
//!   ([`linalg`]);
//! * samplers for the signature-indexed invariant ensembles on skew
//!   matrices and for invariant measures on rectangular matrices
//!   ([`ensemble`]);
//! * closed-form characteristic functions, orbital-integral estimators with
//!   their error bounds, and exact finite-quotient enumeration oracles
//!   ([`charfn`]);
//! * seeded, reproducible statistical suites with in-tree negative controls
//!   ([`experiment`]).
//!
//! The accompanying book (`book/` in the repository) walks through the
//! concepts chapter by chapter; its code listings compile and run as part of
//! this crate's doc-tests.

pub mod charfn;
pub mod ensemble;
mod error;
pub mod experiment;
mod extint;
pub mod field;
pub mod linalg;

pub use charfn::{
    charfn_closed_form, exact_quotient_integral, gl_vs_mat_gap_bound, mc_charfn, mc_orbital,
    orbital_error_bound, pairing, tau_identity_check, theta_product, BoundReport, CharFactor,
    Domain, Estimate, ExactIntegral, Kernel, McOptions,
};
pub use ensemble::{
    exchange_coords, sample_mat_invariant, sample_orbital, sample_skew_ergodic, stream_rng,
    EnsembleSample, Signature,
};
pub use error::{Error, Result};
pub use experiment::{run_suite, ExperimentConfig, SuiteKind, SuiteReport};
pub use extint::ExtInt;
pub use field::{
    chi, theta, theta_exact_exponent, theta_exponent, FieldKind, FieldSpec, LocalElem, PhaseValue,
    DEFAULT_PRECISION,
};
pub use linalg::{sample_gl, skew_canonical_form, CanonicalSkewForm, LocalMatrix};

#[cfg(doctest)]
mod book {
    //! The book chapters double as doc-tests so the narrative and the code
    //! can never drift apart.

    #[doc = include_str!("../../../README.md")]
    pub struct Readme;

    #[doc = include_str!("../../../book/src/introduction.md")]
    pub struct Introduction;

    #[doc = include_str!("../../../book/src/local-fields.md")]
    pub struct LocalFields;

    #[doc = include_str!("../../../book/src/characters.md")]
    pub struct Characters;

    #[doc = include_str!("../../../book/src/canonical-form.md")]
    pub struct CanonicalForm;

    #[doc = include_str!("../../../book/src/ensembles.md")]
    pub struct Ensembles;

    #[doc = include_str!("../../../book/src/charfn.md")]
    pub struct CharacteristicFunctions;

    #[doc = include_str!("../../../book/src/correspondence.md")]
    pub struct Correspondence;

    #[doc = include_str!("../../../book/src/experiments.md")]
    pub struct Experiments;
}
