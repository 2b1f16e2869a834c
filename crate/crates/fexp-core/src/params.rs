use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Average-power and noise-variance parameters of the two links.
///
/// `p_fwd`/`sigma2_fwd` describe the forward channel, `p_fb`/`sigma2_fb` the
/// feedback channel. Both noise variances must be strictly positive.
/// `p_fb = 0` is accepted only by the no-feedback baseline and by the
/// analytic bound calculators; every feedback scheme requires `p_fb > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    /// Forward-link power budget P.
    pub p_fwd: f64,
    /// Forward-link noise variance.
    pub sigma2_fwd: f64,
    /// Feedback-link power budget.
    pub p_fb: f64,
    /// Feedback-link noise variance.
    pub sigma2_fb: f64,
}

impl ChannelParams {
    pub fn new(p_fwd: f64, sigma2_fwd: f64, p_fb: f64, sigma2_fb: f64) -> Result<Self> {
        let params = ChannelParams {
            p_fwd,
            sigma2_fwd,
            p_fb,
            sigma2_fb,
        };
        params.validate()?;
        Ok(params)
    }

    /// All four parameters equal to one; the reference configuration used
    /// throughout the test suites.
    pub fn all_ones() -> Self {
        ChannelParams {
            p_fwd: 1.0,
            sigma2_fwd: 1.0,
            p_fb: 1.0,
            sigma2_fb: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = self.p_fwd.is_finite()
            && self.sigma2_fwd.is_finite()
            && self.p_fb.is_finite()
            && self.sigma2_fb.is_finite();
        if !finite {
            return Err(Error::domain("channel parameters must be finite"));
        }
        if self.p_fwd <= 0.0 {
            return Err(Error::domain("forward power must be positive"));
        }
        if self.sigma2_fwd <= 0.0 || self.sigma2_fb <= 0.0 {
            return Err(Error::domain("noise variances must be strictly positive"));
        }
        if self.p_fb < 0.0 {
            return Err(Error::domain("feedback power must be nonnegative"));
        }
        Ok(())
    }

    /// Forward-link SNR.
    pub fn snr_fwd(&self) -> f64 {
        self.p_fwd / self.sigma2_fwd
    }

    /// Feedback-link SNR.
    pub fn snr_fb(&self) -> f64 {
        self.p_fb / self.sigma2_fb
    }

    pub fn sigma_fwd(&self) -> f64 {
        self.sigma2_fwd.sqrt()
    }

    pub fn sigma_fb(&self) -> f64 {
        self.sigma2_fb.sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_parameters() {
        assert!(ChannelParams::new(0.0, 1.0, 1.0, 1.0).is_err());
        assert!(ChannelParams::new(1.0, 0.0, 1.0, 1.0).is_err());
        assert!(ChannelParams::new(1.0, 1.0, -0.5, 1.0).is_err());
        assert!(ChannelParams::new(1.0, 1.0, 1.0, 0.0).is_err());
        assert!(ChannelParams::new(f64::NAN, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn accepts_zero_feedback_power() {
        let p = ChannelParams::new(2.0, 1.0, 0.0, 1.0).unwrap();
        assert_eq!(p.snr_fb(), 0.0);
        assert_eq!(p.snr_fwd(), 2.0);
    }
}
