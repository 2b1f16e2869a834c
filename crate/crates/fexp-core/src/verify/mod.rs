//! Numerical verification of the converse-proof inequality machinery on
//! small explicit codes: the tilted-density maximum, the Cauchy-Schwarz
//! product bound, the likelihood-ratio floor, and the typical-set lemmas —
//! pointwise where pointwise, by quadrature at blocklength one where
//! marginal densities are required.

mod lemmas;
mod quadrature;
mod suite;
mod tilted;
mod toy;

pub use lemmas::{
    check_lemma3_pointwise, quadrature_lemma_checks_n1, CheckOutcome, GridCheck, LemmaReport,
};
pub use quadrature::adaptive_simpson;
pub use suite::{mc_agreement_configs, run_full_suite, SuiteCheck, SuiteConfig, VerifyReport};
pub use tilted::{
    check_product_lower_bound, log_max_tilted_density_closed, log_r_lower_bound,
    max_tilted_density, r_lower_bound,
};
pub use toy::{ClippedAffine, ToyEncoders, TypicalSetParams};
