//! Trial runners: one exact execution of a scheme per call.
//!
//! Each scheme has a `*_with_noise` variant taking explicit noise vectors
//! (the deterministic trace hook) and a stream variant that draws the noise
//! from a reproducible [`RngStream`]. The stream variant draws the forward
//! noise first, then the feedback noise, each of length `n`.

use crate::gaussian::{fill_gaussian, RngStream};
use crate::schemes::oracle::{
    block_stats, gamma_as, log_mismatch_from, standalone_block_stats, BlockStats,
};
use crate::schemes::{SchemeConfig, SchemeKind, Transcript};
use crate::{ChannelParams, Error, Result};

fn amplitude_sign(h: bool) -> f64 {
    if h {
        -1.0
    } else {
        1.0
    }
}

fn check_noise(n: usize, fwd: &[f64], fb: &[f64]) -> Result<()> {
    if fwd.len() != n || fb.len() != n {
        return Err(Error::config(format!(
            "noise vectors must have length {n}, got {} and {}",
            fwd.len(),
            fb.len()
        )));
    }
    Ok(())
}

fn draw_noise(params: &ChannelParams, n: usize, stream: RngStream) -> (Vec<f64>, Vec<f64>) {
    let mut rng = stream.rng();
    let fwd = fill_gaussian(&mut rng, 0.0, params.sigma_fwd(), n);
    let fb = fill_gaussian(&mut rng, 0.0, params.sigma_fb(), n);
    (fwd, fb)
}

/// Antipodal baseline: `X_k = +-sqrt(P)` on every use, decision by the sign
/// of `sum Y_k`; the feedback link stays silent.
pub fn run_trial_no_feedback(
    params: &ChannelParams,
    n: usize,
    h: bool,
    stream: RngStream,
) -> Result<Transcript> {
    let (fwd, fb) = draw_noise(params, n, stream);
    run_trial_no_feedback_with_noise(params, n, h, &fwd, &fb)
}

pub fn run_trial_no_feedback_with_noise(
    params: &ChannelParams,
    n: usize,
    h: bool,
    fwd_noise: &[f64],
    fb_noise: &[f64],
) -> Result<Transcript> {
    let cfg = SchemeConfig::no_feedback(n);
    cfg.validate(params)?;
    check_noise(n, fwd_noise, fb_noise)?;
    let amp = amplitude_sign(h) * params.p_fwd.sqrt();
    let x = vec![amp; n];
    let u = vec![0.0; n];
    let sum: f64 = x.iter().zip(fwd_noise).map(|(a, b)| a + b).sum();
    let h_hat = sum < 0.0;
    Ok(Transcript::assemble(
        h, h_hat, x, u, fwd_noise, fb_noise, false, false,
    ))
}

/// Tentative-decision scheme under the almost-sure feedback constraint.
///
/// Slot 1 carries the whole message energy, the receiver feeds its tentative
/// decision back at constant amplitude for `n-1` slots, and the transmitter
/// retransmits in the last slot with amplitude `sqrt(P/gamma)` whenever the
/// fed-back mean fails the margin test. `gamma` is the exact retransmission
/// probability from the oracle, so the forward link spends `nP` in
/// expectation, while the feedback link spends `(n-1) P_FB` on every
/// realization.
pub fn run_trial_as_scheme(
    params: &ChannelParams,
    cfg: &SchemeConfig,
    h: bool,
    stream: RngStream,
) -> Result<Transcript> {
    let (fwd, fb) = draw_noise(params, cfg.n, stream);
    run_trial_as_scheme_with_noise(params, cfg, h, &fwd, &fb)
}

pub fn run_trial_as_scheme_with_noise(
    params: &ChannelParams,
    cfg: &SchemeConfig,
    h: bool,
    fwd_noise: &[f64],
    fb_noise: &[f64],
) -> Result<Transcript> {
    if cfg.kind != SchemeKind::AsScheme {
        return Err(Error::config("expected an as-scheme configuration"));
    }
    cfg.validate(params)?;
    let n = cfg.n;
    check_noise(n, fwd_noise, fb_noise)?;
    let m = n - 1;
    let gamma = gamma_as(params, cfg)?;

    let mut x = vec![0.0; n];
    x[0] = amplitude_sign(h) * ((m as f64) * params.p_fwd).sqrt();
    let y1 = x[0] + fwd_noise[0];
    // Tentative decision by the sign of Y_1; an exact zero decides "0".
    let tentative = y1 < 0.0;

    let fb_amp = amplitude_sign(tentative) * params.p_fb.sqrt();
    let mut u = vec![0.0; n];
    for slot in u.iter_mut().take(m) {
        *slot = fb_amp;
    }
    let z_mean: f64 = u
        .iter()
        .zip(fb_noise)
        .take(m)
        .map(|(a, b)| a + b)
        .sum::<f64>()
        / m as f64;

    let margin = (1.0 - cfg.delta) * params.p_fb.sqrt();
    // No retransmission only when the fed-back mean clears the margin on the
    // hypothesis' own side; boundary values count as cleared.
    let quiet = if h {
        z_mean <= -margin
    } else {
        z_mean >= margin
    };
    let retx = !quiet;
    if retx {
        x[n - 1] = amplitude_sign(h) * (params.p_fwd / gamma).sqrt();
    }
    let y_last = x[n - 1] + fwd_noise[n - 1];

    let ups = cfg.upsilon();
    let h_hat = if y_last > ups {
        false
    } else if y_last < -ups {
        true
    } else {
        tentative
    };
    Ok(Transcript::assemble(
        h, h_hat, x, u, fwd_noise, fb_noise, retx, false,
    ))
}

// One execution of the ACK/NACK building block with caller-assigned link
// roles. `fwd_noise`/`fb_noise` are the noise realizations on the block's
// forward and feedback links, each of length `stats`' blocklength.
pub(crate) struct BlockRun {
    pub x: Vec<f64>,
    pub u: Vec<f64>,
    pub receiver_guess: bool,
    pub nack: bool,
    pub heard_nack: bool,
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn run_block(
    h: bool,
    p_fwd: f64,
    delta: f64,
    upsilon: f64,
    len: usize,
    stats: &BlockStats,
    fwd_noise: &[f64],
    fb_noise: &[f64],
) -> BlockRun {
    let m = len - 1;
    let amp = amplitude_sign(h) * p_fwd.sqrt();
    let mut x = vec![0.0; len];
    for slot in x.iter_mut().take(m) {
        *slot = amp;
    }
    let s: f64 = x
        .iter()
        .zip(fwd_noise)
        .take(m)
        .map(|(a, b)| a + b)
        .sum::<f64>();
    // NACK when the statistic sits strictly inside the margin; the boundary
    // declares ACK.
    let nack = s.abs() / (m as f64) < (1.0 - delta) * p_fwd.sqrt();

    let mut u = vec![0.0; len];
    if nack {
        u[m - 1] = stats.nack_amp;
    }
    let z_probe = u[m - 1] + fb_noise[m - 1];
    let heard_nack = z_probe > upsilon;
    if heard_nack {
        x[m] = amplitude_sign(h) * stats.retx_amp;
    }
    let y_last = x[m] + fwd_noise[m];
    let receiver_guess = if nack { y_last < 0.0 } else { s < 0.0 };
    BlockRun {
        x,
        u,
        receiver_guess,
        nack,
        heard_nack,
    }
}

/// Standalone ACK/NACK building block on the channel's native roles.
pub fn run_trial_building_block(
    params: &ChannelParams,
    cfg: &SchemeConfig,
    h: bool,
    stream: RngStream,
) -> Result<Transcript> {
    let (fwd, fb) = draw_noise(params, cfg.n, stream);
    run_trial_building_block_with_noise(params, cfg, h, &fwd, &fb)
}

pub fn run_trial_building_block_with_noise(
    params: &ChannelParams,
    cfg: &SchemeConfig,
    h: bool,
    fwd_noise: &[f64],
    fb_noise: &[f64],
) -> Result<Transcript> {
    let stats = standalone_block_stats(params, cfg)?;
    check_noise(cfg.n, fwd_noise, fb_noise)?;
    let run = run_block(
        h,
        params.p_fwd,
        cfg.delta,
        cfg.upsilon(),
        cfg.n,
        &stats,
        fwd_noise,
        fb_noise,
    );
    Ok(Transcript::assemble(
        h,
        run.receiver_guess,
        run.x,
        run.u,
        fwd_noise,
        fb_noise,
        run.heard_nack,
        run.nack,
    ))
}

/// Three-phase scheme: a transmission-phase building block over the first
/// `nu = (n-1)/2` uses, an echo-phase building block with the link roles
/// reversed over the next `nu`, and a single retransmission slot whose
/// amplitude is `sqrt(P / P(H'' != H))` with the mismatch probability taken
/// from the composed oracles.
pub fn run_trial_three_phase(
    params: &ChannelParams,
    cfg: &SchemeConfig,
    h: bool,
    stream: RngStream,
) -> Result<Transcript> {
    let (fwd, fb) = draw_noise(params, cfg.n, stream);
    run_trial_three_phase_with_noise(params, cfg, h, &fwd, &fb)
}

pub fn run_trial_three_phase_with_noise(
    params: &ChannelParams,
    cfg: &SchemeConfig,
    h: bool,
    fwd_noise: &[f64],
    fb_noise: &[f64],
) -> Result<Transcript> {
    if cfg.kind != SchemeKind::ThreePhase {
        return Err(Error::config("expected a three-phase configuration"));
    }
    cfg.validate(params)?;
    let n = cfg.n;
    check_noise(n, fwd_noise, fb_noise)?;
    let nu = (n - 1) / 2;
    let block_ups = cfg.threshold_coeff * nu as f64;
    let dp = cfg.delta_fb_power;

    let p1 = 2.0 * params.p_fwd - dp;
    let stats1 = block_stats(
        p1,
        params.sigma2_fwd,
        params.sigma2_fb,
        dp,
        cfg.delta,
        block_ups,
        nu,
    )?;
    let run1 = run_block(
        h,
        p1,
        cfg.delta,
        block_ups,
        nu,
        &stats1,
        &fwd_noise[..nu],
        &fb_noise[..nu],
    );
    let h_prime = run1.receiver_guess;

    // Echo phase: the real feedback channel plays the block's forward role.
    let p2 = 2.0 * params.p_fb - dp;
    let stats2 = block_stats(
        p2,
        params.sigma2_fb,
        params.sigma2_fwd,
        dp,
        cfg.delta,
        block_ups,
        nu,
    )?;
    let run2 = run_block(
        h_prime,
        p2,
        cfg.delta,
        block_ups,
        nu,
        &stats2,
        &fb_noise[nu..2 * nu],
        &fwd_noise[nu..2 * nu],
    );
    let h_second = run2.receiver_guess;

    let mut x = vec![0.0; n];
    let mut u = vec![0.0; n];
    x[..nu].copy_from_slice(&run1.x);
    u[..nu].copy_from_slice(&run1.u);
    // The echo block's feedback symbols travel on the real forward link and
    // its forward symbols on the real feedback link.
    x[nu..2 * nu].copy_from_slice(&run2.u);
    u[nu..2 * nu].copy_from_slice(&run2.x);

    let retransmit = h_second != h;
    if retransmit {
        let mismatch = log_mismatch_from(&stats1, &stats2).exp();
        x[n - 1] = amplitude_sign(h) * (params.p_fwd / mismatch).sqrt();
    }
    let y_last = x[n - 1] + fwd_noise[n - 1];
    let ups = cfg.upsilon();
    let h_hat = if y_last > ups {
        false
    } else if y_last < -ups {
        true
    } else {
        h_prime
    };
    Ok(Transcript::assemble(
        h,
        h_hat,
        x,
        u,
        fwd_noise,
        fb_noise,
        retransmit,
        run1.nack || run2.nack,
    ))
}

/// Dispatch one trial by scheme kind.
pub fn run_trial(
    params: &ChannelParams,
    cfg: &SchemeConfig,
    h: bool,
    stream: RngStream,
) -> Result<Transcript> {
    let (fwd, fb) = draw_noise(params, cfg.n, stream);
    run_trial_with_noise(params, cfg, h, &fwd, &fb)
}

/// Dispatch one trial with injected noise.
pub fn run_trial_with_noise(
    params: &ChannelParams,
    cfg: &SchemeConfig,
    h: bool,
    fwd_noise: &[f64],
    fb_noise: &[f64],
) -> Result<Transcript> {
    match cfg.kind {
        SchemeKind::NoFeedback => {
            run_trial_no_feedback_with_noise(params, cfg.n, h, fwd_noise, fb_noise)
        }
        SchemeKind::AsScheme => run_trial_as_scheme_with_noise(params, cfg, h, fwd_noise, fb_noise),
        SchemeKind::BuildingBlock => {
            run_trial_building_block_with_noise(params, cfg, h, fwd_noise, fb_noise)
        }
        SchemeKind::ThreePhase => {
            run_trial_three_phase_with_noise(params, cfg, h, fwd_noise, fb_noise)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::energy;

    fn ones() -> ChannelParams {
        ChannelParams::all_ones()
    }

    fn zeros(n: usize) -> Vec<f64> {
        vec![0.0; n]
    }

    #[test]
    fn no_feedback_noiseless_traces() {
        let t = run_trial_no_feedback_with_noise(&ones(), 4, false, &zeros(4), &zeros(4)).unwrap();
        assert_eq!(t.x, vec![1.0; 4]);
        assert!(!t.h_hat);
        assert_eq!(t.fwd_energy, 4.0);
        assert_eq!(t.fb_energy, 0.0);
        let t = run_trial_no_feedback_with_noise(&ones(), 4, true, &zeros(4), &zeros(4)).unwrap();
        assert!(t.h_hat);
        assert!(!t.is_error());
    }

    #[test]
    fn as_scheme_noiseless_trace() {
        let cfg = SchemeConfig::as_scheme(5, 0.3);
        let t = run_trial_as_scheme_with_noise(&ones(), &cfg, false, &zeros(5), &zeros(5)).unwrap();
        assert_eq!(t.x[0], 2.0);
        assert_eq!(&t.x[1..], &[0.0; 4]);
        assert_eq!(t.u, vec![1.0, 1.0, 1.0, 1.0, 0.0]);
        assert!(!t.retransmitted);
        assert!(!t.h_hat);
        // Constant-amplitude feedback for n-1 slots on every trial.
        assert_eq!(t.fb_energy, 4.0);
    }

    #[test]
    fn as_scheme_rescue_via_retransmission() {
        // Knock the first observation below zero so the tentative decision is
        // wrong, with feedback strong enough that the fed-back mean exposes
        // it and the retransmission amplitude clears the threshold.
        let params = ChannelParams::new(1.0, 1.0, 4.0, 1.0).unwrap();
        let cfg = SchemeConfig::as_scheme(5, 0.9);
        let mut fwd = zeros(5);
        fwd[0] = -3.0;
        let t = run_trial_as_scheme_with_noise(&params, &cfg, false, &fwd, &zeros(5)).unwrap();
        assert!(t.y[0] < 0.0);
        assert!(t.retransmitted);
        let gamma = gamma_as(&params, &cfg).unwrap();
        let amp = (params.p_fwd / gamma).sqrt();
        assert!((t.x[4] - amp).abs() < 1e-12);
        assert!(amp > cfg.upsilon(), "amp={amp} must clear the threshold");
        assert!(!t.h_hat, "the retransmission rescues the decision");
    }

    #[test]
    fn as_scheme_missed_wrong_tentative_errs() {
        // Tentative wrong and the fed-back mean still clears the margin on
        // the wrong side: transmitter stays quiet, decision stays wrong.
        let params = ones();
        let cfg = SchemeConfig::as_scheme(5, 0.3);
        let mut fwd = zeros(5);
        fwd[0] = -3.0;
        // Feedback noise strong enough to flip the fed-back mean positive.
        let fb = vec![2.0, 2.0, 2.0, 2.0, 0.0];
        let t = run_trial_as_scheme_with_noise(&params, &cfg, false, &fwd, &fb).unwrap();
        assert!(!t.retransmitted);
        assert!(t.h_hat);
        assert!(t.is_error());
    }

    #[test]
    fn building_block_noiseless_trace() {
        let cfg = SchemeConfig::building_block(9, 0.5, 0.01);
        let t = run_trial_building_block_with_noise(&ones(), &cfg, false, &zeros(9), &zeros(9))
            .unwrap();
        assert!(!t.nack_signaled);
        assert!(!t.retransmitted);
        assert!(!t.h_hat);
        assert_eq!(t.u, zeros(9));
        assert_eq!(t.x[8], 0.0);
    }

    #[test]
    fn building_block_nack_symbol_amplitude() {
        // Force |S|/(n-1) inside the margin: with h=0 the clean statistic is
        // sqrt(P) per slot, so cancel it entirely.
        let params = ones();
        let cfg = SchemeConfig::building_block(9, 0.5, 0.01);
        let fwd = vec![-1.0; 9];
        let t = run_trial_building_block_with_noise(&params, &cfg, false, &fwd, &zeros(9)).unwrap();
        assert!(t.nack_signaled);
        let p_nack = nack_probability(1.0, 1.0, 0.5, 9).unwrap();
        let expected = (0.01 / p_nack).sqrt();
        assert!((t.u[7] - expected).abs() < 1e-12, "u={:?}", &t.u[6..]);
        assert!((energy(&t.u) - expected * expected).abs() < 1e-12);
    }

    use crate::schemes::oracle::nack_probability;

    #[test]
    fn three_phase_noiseless_trace() {
        let cfg = SchemeConfig::three_phase(15, 0.4, 0.05);
        let t =
            run_trial_three_phase_with_noise(&ones(), &cfg, false, &zeros(15), &zeros(15)).unwrap();
        assert!(!t.nack_signaled);
        assert!(!t.retransmitted);
        assert_eq!(t.x[14], 0.0);
        assert!(!t.h_hat);
        let t =
            run_trial_three_phase_with_noise(&ones(), &cfg, true, &zeros(15), &zeros(15)).unwrap();
        assert!(t.h_hat);
        assert!(!t.is_error());
    }

    #[test]
    fn three_phase_sequences_have_full_length() {
        let cfg = SchemeConfig::three_phase(15, 0.4, 0.05);
        let t = run_trial_three_phase(&ones(), &cfg, false, RngStream::new(5, 0)).unwrap();
        assert_eq!(t.x.len(), 15);
        assert_eq!(t.y.len(), 15);
        assert_eq!(t.u.len(), 15);
        assert_eq!(t.z.len(), 15);
        for k in 0..15 {
            assert_eq!(t.y[k], t.x[k] + (t.y[k] - t.x[k]));
            assert_eq!(t.fwd_energy, energy(&t.x));
        }
    }

    #[test]
    fn trials_are_reproducible() {
        let cfg = SchemeConfig::as_scheme(9, 0.3);
        let a = run_trial(&ones(), &cfg, true, RngStream::new(42, 7)).unwrap();
        let b = run_trial(&ones(), &cfg, true, RngStream::new(42, 7)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn as_scheme_feedback_energy_is_constant() {
        // Almost-sure constraint: (n-1) P_FB on every trial, any seed.
        let params = ChannelParams::new(1.3, 0.7, 2.5, 1.1).unwrap();
        let cfg = SchemeConfig::as_scheme(7, 0.4);
        for trial in 0..200 {
            let t = run_trial(&params, &cfg, trial % 2 == 0, RngStream::new(9, trial)).unwrap();
            assert!((t.fb_energy - 6.0 * 2.5).abs() < 1e-9);
            assert!(t.fb_energy <= 7.0 * 2.5);
        }
    }

    // Per-slot noise signs of the measure-preserving mirror map that swaps
    // the hypotheses. Message-bearing slots flip; slots carrying unsigned
    // control symbols (the NACK pulses) keep their noise.
    fn mirror_masks(cfg: &SchemeConfig) -> (Vec<f64>, Vec<f64>) {
        let n = cfg.n;
        match cfg.kind {
            SchemeKind::NoFeedback => (vec![-1.0; n], vec![1.0; n]),
            SchemeKind::AsScheme => (vec![-1.0; n], vec![-1.0; n]),
            SchemeKind::BuildingBlock => (vec![-1.0; n], vec![1.0; n]),
            SchemeKind::ThreePhase => {
                let nu = (n - 1) / 2;
                let mut fwd = vec![1.0; n];
                let mut fb = vec![1.0; n];
                // Transmission-phase message slots and the final
                // retransmission ride the forward link.
                for s in fwd.iter_mut().take(nu) {
                    *s = -1.0;
                }
                fwd[n - 1] = -1.0;
                // The echo's message slots ride the feedback link.
                for s in fb.iter_mut().skip(nu).take(nu) {
                    *s = -1.0;
                }
                (fwd, fb)
            }
        }
    }

    #[test]
    fn mirrored_noise_mirrors_transcripts() {
        // Swapping the hypothesis under the scheme's mirror map flips every
        // message-bearing input, leaves the unsigned control symbols alone,
        // and flips the decision — the constructive form of
        // P0(error) = P1(error).
        let params = ChannelParams::new(1.0, 0.8, 1.5, 1.2).unwrap();
        for cfg in [
            SchemeConfig::no_feedback(6),
            SchemeConfig::as_scheme(9, 0.3),
            SchemeConfig::building_block(9, 0.5, 0.2),
            SchemeConfig::three_phase(15, 0.4, 0.05),
        ] {
            let (mask_fwd, mask_fb) = mirror_masks(&cfg);
            for trial in 0..100 {
                let stream = RngStream::new(1234, trial);
                let mut rng = stream.rng();
                let fwd = fill_gaussian(&mut rng, 0.0, params.sigma_fwd(), cfg.n);
                let fb = fill_gaussian(&mut rng, 0.0, params.sigma_fb(), cfg.n);
                let mir_fwd: Vec<f64> = fwd.iter().zip(&mask_fwd).map(|(v, s)| v * s).collect();
                let mir_fb: Vec<f64> = fb.iter().zip(&mask_fb).map(|(v, s)| v * s).collect();
                let t0 = run_trial_with_noise(&params, &cfg, false, &fwd, &fb).unwrap();
                let t1 = run_trial_with_noise(&params, &cfg, true, &mir_fwd, &mir_fb).unwrap();
                for k in 0..cfg.n {
                    // Inputs mirror on flipped slots and coincide elsewhere.
                    assert!(
                        (t0.x[k] * mask_fwd[k] - t1.x[k]).abs() < 1e-9,
                        "{:?} x slot {k}",
                        cfg.kind
                    );
                    assert!(
                        (t0.u[k] * mask_fb[k] - t1.u[k]).abs() < 1e-9,
                        "{:?} u slot {k}",
                        cfg.kind
                    );
                }
                assert_eq!(t0.h_hat, !t1.h_hat, "{:?} trial {trial}", cfg.kind);
                assert_eq!(t0.is_error(), t1.is_error());
                assert_eq!(t0.retransmitted, t1.retransmitted);
                assert_eq!(t0.nack_signaled, t1.nack_signaled);
            }
        }
    }
}
