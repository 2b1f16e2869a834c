//! Core library for simulating one-bit transmission over an AWGN forward
//! channel with an active, noisy, AWGN feedback link, and for evaluating the
//! achievable / converse error-exponent bounds of that setting.
//!
//! The crate is organized as four largely independent layers:
//!
//! * [`gaussian`] — numerical primitives: the Gaussian tail function `Q` in
//!   linear and log domain, energy accounting, and reproducible
//!   counter-based random streams.
//! * [`schemes`] — executable state machines for the transmission schemes
//!   (no-feedback baseline, almost-sure-constraint scheme, ACK/NACK building
//!   block, three-phase scheme), their exact closed-form error oracles, Monte
//!   Carlo / importance-sampled error estimation, and power audits.
//! * [`exponents`] — closed-form exponent bounds for both power-constraint
//!   regimes, the optimized expected-constraint converse, passive-feedback
//!   and BSC comparison bounds, and slope fitting.
//! * [`verify`] — numerical verification of the inequality machinery used by
//!   the converse arguments (tilted-density maximum, product lower bounds,
//!   likelihood-ratio floors, typical-set lemmas) on small toy encoders.

// Validation uses `!(x > 0.0)` deliberately so NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod exponents;
pub mod gaussian;
pub mod params;
pub mod schemes;
pub mod verify;

pub use error::Error;
pub use params::ChannelParams;

/// Crate result alias.
pub type Result<T> = std::result::Result<T, Error>;
