//! Executable state machines for the four transmission schemes, their exact
//! closed-form error oracles, Monte Carlo / importance-sampled error
//! estimation, and power auditing.
//!
//! Every trial runner is a pure function of `(params, cfg, h, noise)`; the
//! `*_with_noise` variants take explicit noise vectors and are the hook used
//! by deterministic trace tests. Measure-zero ties (a first observation of
//! exactly zero, a statistic exactly on a margin, `|Y_n|` exactly on the
//! threshold) are resolved deterministically: decide "0", declare ACK, and
//! assume no retransmission.

mod audit;
mod estimate;
mod oracle;
mod trial;

pub use audit::{audit_power, PowerAudit};
pub use estimate::{estimate_error, ErrorEstimate, EstimateMode, TiltLink, TiltSpec};
pub use oracle::{
    closed_form_error, closed_form_error_as_scheme, closed_form_error_building_block,
    closed_form_error_no_feedback, closed_form_error_three_phase, error_given_ack, gamma_as,
    log_closed_form_error, log_error_given_ack, log_gamma_as, log_nack_probability,
    nack_probability, reference_exponent, AsBranches,
};
pub use trial::{
    run_trial, run_trial_as_scheme, run_trial_as_scheme_with_noise, run_trial_building_block,
    run_trial_building_block_with_noise, run_trial_no_feedback, run_trial_no_feedback_with_noise,
    run_trial_three_phase, run_trial_three_phase_with_noise, run_trial_with_noise,
};

use serde::{Deserialize, Serialize};

use crate::gaussian::energy;
use crate::{ChannelParams, Error, Result};

/// Which transmission scheme a configuration describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeKind {
    /// Antipodal signaling over all `n` uses, no feedback.
    NoFeedback,
    /// Tentative-decision scheme satisfying the almost-sure feedback
    /// power constraint.
    AsScheme,
    /// Single ACK/NACK building block.
    BuildingBlock,
    /// Transmission / echo / retransmission composition of two building
    /// blocks.
    ThreePhase,
}

impl SchemeKind {
    pub fn name(&self) -> &'static str {
        match self {
            SchemeKind::NoFeedback => "no-feedback",
            SchemeKind::AsScheme => "as-scheme",
            SchemeKind::BuildingBlock => "building-block",
            SchemeKind::ThreePhase => "three-phase",
        }
    }
}

/// Per-scheme knobs.
///
/// `delta` is the decision margin in (0,1). `delta_fb_power` is the small
/// power budget spent on the ACK/NACK symbol (building block and three-phase
/// only). The decision threshold is linear in the blocklength:
/// `upsilon = threshold_coeff * n`, with coefficient 1 by default.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchemeConfig {
    pub kind: SchemeKind,
    pub n: usize,
    pub delta: f64,
    pub delta_fb_power: f64,
    pub threshold_coeff: f64,
}

impl SchemeConfig {
    pub fn no_feedback(n: usize) -> Self {
        SchemeConfig {
            kind: SchemeKind::NoFeedback,
            n,
            delta: 0.0,
            delta_fb_power: 0.0,
            threshold_coeff: 1.0,
        }
    }

    pub fn as_scheme(n: usize, delta: f64) -> Self {
        SchemeConfig {
            kind: SchemeKind::AsScheme,
            n,
            delta,
            delta_fb_power: 0.0,
            threshold_coeff: 1.0,
        }
    }

    pub fn building_block(n: usize, delta: f64, delta_fb_power: f64) -> Self {
        SchemeConfig {
            kind: SchemeKind::BuildingBlock,
            n,
            delta,
            delta_fb_power,
            threshold_coeff: 1.0,
        }
    }

    pub fn three_phase(n: usize, delta: f64, delta_fb_power: f64) -> Self {
        SchemeConfig {
            kind: SchemeKind::ThreePhase,
            n,
            delta,
            delta_fb_power,
            threshold_coeff: 1.0,
        }
    }

    pub fn with_threshold_coeff(mut self, coeff: f64) -> Self {
        self.threshold_coeff = coeff;
        self
    }

    /// Decision threshold `upsilon = threshold_coeff * n`.
    pub fn upsilon(&self) -> f64 {
        self.threshold_coeff * self.n as f64
    }

    /// Validate the configuration against the channel parameters.
    pub fn validate(&self, params: &ChannelParams) -> Result<()> {
        params.validate()?;
        if !(self.threshold_coeff > 0.0) || !self.threshold_coeff.is_finite() {
            return Err(Error::config("threshold coefficient must be positive"));
        }
        let needs_margin = self.kind != SchemeKind::NoFeedback;
        if needs_margin && !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::config(format!(
                "margin delta must lie in (0,1), got {}",
                self.delta
            )));
        }
        if needs_margin && params.p_fb <= 0.0 {
            return Err(Error::config(format!(
                "{} requires positive feedback power",
                self.kind.name()
            )));
        }
        match self.kind {
            SchemeKind::NoFeedback => {
                if self.n < 1 {
                    return Err(Error::config("no-feedback scheme needs n >= 1"));
                }
            }
            SchemeKind::AsScheme => {
                if self.n < 2 {
                    return Err(Error::config("as-scheme needs n >= 2"));
                }
            }
            SchemeKind::BuildingBlock => {
                if self.n < 3 {
                    return Err(Error::config("building block needs n >= 3"));
                }
                if !(self.delta_fb_power > 0.0) {
                    return Err(Error::config("feedback power sliver must be positive"));
                }
                // The block spends delta_fb_power in expectation over the
                // whole block, so the per-symbol budget requires at most
                // n * p_fb in total.
                if self.delta_fb_power > self.n as f64 * params.p_fb {
                    return Err(Error::config(
                        "feedback power sliver exceeds the block feedback budget",
                    ));
                }
            }
            SchemeKind::ThreePhase => {
                if self.n.is_multiple_of(2) {
                    return Err(Error::config(
                        "three-phase scheme requires an odd blocklength",
                    ));
                }
                if self.n < 7 {
                    return Err(Error::config("three-phase scheme needs n >= 7"));
                }
                if !(self.delta_fb_power > 0.0
                    && self.delta_fb_power < params.p_fwd.min(params.p_fb))
                {
                    return Err(Error::config(
                        "three-phase requires 0 < delta_fb_power < min(P, P_FB)",
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Full record of one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct Transcript {
    /// True hypothesis.
    pub h: bool,
    /// Final decision.
    pub h_hat: bool,
    /// Forward-channel inputs.
    pub x: Vec<f64>,
    /// Forward-channel outputs, `y = x + noise`.
    pub y: Vec<f64>,
    /// Feedback-channel inputs.
    pub u: Vec<f64>,
    /// Feedback-channel outputs, `z = u + noise`.
    pub z: Vec<f64>,
    /// A large-amplitude retransmission was sent in the final slot.
    pub retransmitted: bool,
    /// A NACK was signaled by a receiver statistic (building block and
    /// three-phase; always false otherwise).
    pub nack_signaled: bool,
    /// `sum x_k^2`.
    pub fwd_energy: f64,
    /// `sum u_k^2`.
    pub fb_energy: f64,
}

impl Transcript {
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn assemble(
        h: bool,
        h_hat: bool,
        x: Vec<f64>,
        u: Vec<f64>,
        fwd_noise: &[f64],
        fb_noise: &[f64],
        retransmitted: bool,
        nack_signaled: bool,
    ) -> Transcript {
        let y: Vec<f64> = x.iter().zip(fwd_noise).map(|(a, b)| a + b).collect();
        let z: Vec<f64> = u.iter().zip(fb_noise).map(|(a, b)| a + b).collect();
        let fwd_energy = energy(&x);
        let fb_energy = energy(&u);
        Transcript {
            h,
            h_hat,
            x,
            y,
            u,
            z,
            retransmitted,
            nack_signaled,
            fwd_energy,
            fb_energy,
        }
    }

    pub fn is_error(&self) -> bool {
        self.h != self.h_hat
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_validation() {
        let p = ChannelParams::all_ones();
        assert!(SchemeConfig::no_feedback(1).validate(&p).is_ok());
        assert!(SchemeConfig::no_feedback(0).validate(&p).is_err());
        assert!(SchemeConfig::as_scheme(2, 0.3).validate(&p).is_ok());
        assert!(SchemeConfig::as_scheme(1, 0.3).validate(&p).is_err());
        assert!(SchemeConfig::as_scheme(5, 0.0).validate(&p).is_err());
        assert!(SchemeConfig::as_scheme(5, 1.0).validate(&p).is_err());
        assert!(SchemeConfig::building_block(3, 0.5, 0.01)
            .validate(&p)
            .is_ok());
        assert!(SchemeConfig::building_block(2, 0.5, 0.01)
            .validate(&p)
            .is_err());
        assert!(SchemeConfig::building_block(9, 0.5, 0.0)
            .validate(&p)
            .is_err());
        // Block feedback budget: at most n * p_fb in expectation.
        assert!(SchemeConfig::building_block(9, 0.5, 9.0)
            .validate(&p)
            .is_ok());
        assert!(SchemeConfig::building_block(9, 0.5, 9.5)
            .validate(&p)
            .is_err());
        assert!(SchemeConfig::three_phase(7, 0.3, 0.05).validate(&p).is_ok());
        assert!(SchemeConfig::three_phase(8, 0.3, 0.05)
            .validate(&p)
            .is_err());
        assert!(SchemeConfig::three_phase(5, 0.3, 0.05)
            .validate(&p)
            .is_err());
        assert!(SchemeConfig::three_phase(7, 0.3, 1.0).validate(&p).is_err());

        // Feedback schemes reject zero feedback power.
        let no_fb = ChannelParams::new(1.0, 1.0, 0.0, 1.0).unwrap();
        assert!(SchemeConfig::as_scheme(5, 0.3).validate(&no_fb).is_err());
        assert!(SchemeConfig::no_feedback(4).validate(&no_fb).is_ok());
    }

    #[test]
    fn upsilon_scales_linearly() {
        let cfg = SchemeConfig::as_scheme(10, 0.3).with_threshold_coeff(0.5);
        assert_eq!(cfg.upsilon(), 5.0);
        assert_eq!(SchemeConfig::no_feedback(7).upsilon(), 7.0);
    }
}
