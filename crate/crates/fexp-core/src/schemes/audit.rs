//! Monte Carlo audit of the per-symbol power spent on each link.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::gaussian::{fill_gaussian, RngStream};
use crate::schemes::{run_trial_with_noise, SchemeConfig};
use crate::{ChannelParams, Error, Result};

const Z95: f64 = 1.959963984540054;
const CHUNK: u64 = 1 << 14;

/// Sample means of the per-symbol energies with 95% half-widths, plus the
/// largest per-trial feedback energy seen (the almost-sure constraint is an
/// every-trial bound, so its audit is a maximum, not a mean).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerAudit {
    pub mean_fwd_energy_per_symbol: f64,
    pub mean_fb_energy_per_symbol: f64,
    pub max_fb_energy_per_symbol: f64,
    pub ci_halfwidth_fwd: f64,
    pub ci_halfwidth_fb: f64,
}

impl PowerAudit {
    /// Standard error of the forward per-symbol mean.
    pub fn se_fwd(&self) -> f64 {
        self.ci_halfwidth_fwd / Z95
    }

    pub fn se_fb(&self) -> f64 {
        self.ci_halfwidth_fb / Z95
    }
}

#[derive(Default, Clone, Copy)]
struct Acc {
    fwd_sum: f64,
    fwd_sq: f64,
    fb_sum: f64,
    fb_sq: f64,
    fb_max: f64,
}

/// Estimate per-symbol powers over `trials` runs with uniform hypotheses.
pub fn audit_power(
    params: &ChannelParams,
    cfg: &SchemeConfig,
    trials: u64,
    seed: u64,
) -> Result<PowerAudit> {
    cfg.validate(params)?;
    if trials == 0 {
        return Err(Error::config("at least one trial is required"));
    }
    let n_chunks = trials.div_ceil(CHUNK);
    let partials: Vec<Result<Acc>> = (0..n_chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut acc = Acc::default();
            let lo = chunk * CHUNK;
            let hi = trials.min(lo + CHUNK);
            for trial in lo..hi {
                let mut rng = RngStream::new(seed, trial).rng();
                let h: bool = rng.gen();
                let fwd = fill_gaussian(&mut rng, 0.0, params.sigma_fwd(), cfg.n);
                let fb = fill_gaussian(&mut rng, 0.0, params.sigma_fb(), cfg.n);
                let t = run_trial_with_noise(params, cfg, h, &fwd, &fb)?;
                acc.fwd_sum += t.fwd_energy;
                acc.fwd_sq += t.fwd_energy * t.fwd_energy;
                acc.fb_sum += t.fb_energy;
                acc.fb_sq += t.fb_energy * t.fb_energy;
                acc.fb_max = acc.fb_max.max(t.fb_energy);
            }
            Ok(acc)
        })
        .collect();

    let mut total = Acc::default();
    for p in partials {
        let p = p?;
        total.fwd_sum += p.fwd_sum;
        total.fwd_sq += p.fwd_sq;
        total.fb_sum += p.fb_sum;
        total.fb_sq += p.fb_sq;
        total.fb_max = total.fb_max.max(p.fb_max);
    }

    let t = trials as f64;
    let n = cfg.n as f64;
    let sd = |sum: f64, sq: f64| ((sq - sum * sum / t) / (t - 1.0).max(1.0)).max(0.0).sqrt();
    Ok(PowerAudit {
        mean_fwd_energy_per_symbol: total.fwd_sum / (t * n),
        mean_fb_energy_per_symbol: total.fb_sum / (t * n),
        max_fb_energy_per_symbol: total.fb_max / n,
        ci_halfwidth_fwd: Z95 * sd(total.fwd_sum, total.fwd_sq) / (t.sqrt() * n),
        ci_halfwidth_fb: Z95 * sd(total.fb_sum, total.fb_sq) / (t.sqrt() * n),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn as_scheme_power_identities() {
        // Forward spends nP in expectation ((n-1)P always, P/gamma with
        // probability gamma); feedback spends (n-1) P_FB on every trial.
        let params = ChannelParams::all_ones();
        let cfg = SchemeConfig::as_scheme(9, 0.3);
        let audit = audit_power(&params, &cfg, 200_000, 5).unwrap();
        assert!(
            (audit.mean_fwd_energy_per_symbol - 1.0).abs() <= 3.0 * audit.se_fwd(),
            "mean={} hw={}",
            audit.mean_fwd_energy_per_symbol,
            audit.ci_halfwidth_fwd
        );
        let fb_exact = 8.0 / 9.0;
        assert!((audit.mean_fb_energy_per_symbol - fb_exact).abs() < 1e-12);
        assert!(audit.max_fb_energy_per_symbol <= params.p_fb);
        assert!(audit.ci_halfwidth_fb < 1e-12);
    }

    #[test]
    fn no_feedback_power_is_exact() {
        let params = ChannelParams::new(2.0, 1.0, 0.0, 1.0).unwrap();
        let cfg = SchemeConfig::no_feedback(5);
        let audit = audit_power(&params, &cfg, 1_000, 1).unwrap();
        assert!((audit.mean_fwd_energy_per_symbol - 2.0).abs() < 1e-12);
        assert_eq!(audit.mean_fb_energy_per_symbol, 0.0);
        assert_eq!(audit.max_fb_energy_per_symbol, 0.0);
    }

    #[test]
    fn three_phase_stays_within_budgets() {
        let params = ChannelParams::all_ones();
        let cfg = SchemeConfig::three_phase(15, 0.4, 0.05);
        let audit = audit_power(&params, &cfg, 100_000, 2).unwrap();
        assert!(
            audit.mean_fwd_energy_per_symbol <= params.p_fwd + 3.0 * audit.se_fwd(),
            "fwd mean={}",
            audit.mean_fwd_energy_per_symbol
        );
        assert!(
            audit.mean_fb_energy_per_symbol <= params.p_fb + 3.0 * audit.se_fb(),
            "fb mean={}",
            audit.mean_fb_energy_per_symbol
        );
    }

    #[test]
    fn three_phase_energy_identity() {
        // Exact expectations from the energy bookkeeping: each block spends
        // nu * (its forward power) on its forward role plus its sliver on
        // the reverse role, and the final slot spends P in expectation. A
        // low threshold coefficient makes every retransmission spike fire
        // often enough for the sample mean to see it.
        let params = ChannelParams::all_ones();
        let cfg = SchemeConfig::three_phase(15, 0.4, 0.05).with_threshold_coeff(0.2);
        let audit = audit_power(&params, &cfg, 200_000, 9).unwrap();
        let nu = 7.0;
        let dp = cfg.delta_fb_power;
        let expected_fwd = (nu * (2.0 - dp) + dp + 1.0) / 15.0;
        let expected_fb = (dp + nu * (2.0 - dp)) / 15.0;
        assert!(
            (audit.mean_fwd_energy_per_symbol - expected_fwd).abs() <= 3.0 * audit.se_fwd(),
            "fwd mean {} vs expected {expected_fwd} (se {})",
            audit.mean_fwd_energy_per_symbol,
            audit.se_fwd()
        );
        assert!(
            (audit.mean_fb_energy_per_symbol - expected_fb).abs() <= 3.0 * audit.se_fb(),
            "fb mean {} vs expected {expected_fb} (se {})",
            audit.mean_fb_energy_per_symbol,
            audit.se_fb()
        );
    }
}
