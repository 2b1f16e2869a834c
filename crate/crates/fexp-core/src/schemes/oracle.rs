//! Exact closed-form error probabilities for the four schemes.
//!
//! Everything is computed in log domain so the exponent sweeps can reach
//! blocklengths of 1e5 and beyond, where the probabilities themselves are far
//! below the double-precision underflow threshold. Every branch probability
//! reduces to a product of Gaussian tails, so each branch is a sum of
//! `log_q_tail` values and the totals are log-sum-exps.

use crate::gaussian::{ln_one_minus_exp, log_q_tail, log_sum_exp};
use crate::schemes::{SchemeConfig, SchemeKind};
use crate::{ChannelParams, Error, Result};

/// Retransmission probability of the almost-sure-constraint scheme.
///
/// Conditioning on the tentative decision: with `m = n-1`,
/// `s = sqrt(m P)/sigma`, `t_ok = sqrt(m) delta sqrt(P_FB)/sigma_FB` and
/// `t_bad = sqrt(m) (2-delta) sqrt(P_FB)/sigma_FB`,
///
/// `gamma = (1 - Q(s)) Q(t_ok) + Q(s) (1 - Q(t_bad))`.
pub fn gamma_as(params: &ChannelParams, cfg: &SchemeConfig) -> Result<f64> {
    Ok(log_gamma_as(params, cfg)?.exp())
}

/// `ln` of [`gamma_as`].
pub fn log_gamma_as(params: &ChannelParams, cfg: &SchemeConfig) -> Result<f64> {
    require_kind(cfg, SchemeKind::AsScheme)?;
    cfg.validate(params)?;
    let a = AsArgs::new(params, cfg);
    Ok(log_sum_exp(&[
        log_q_tail(-a.s) + log_q_tail(a.t_ok),
        log_q_tail(a.s) + log_q_tail(-a.t_bad),
    ]))
}

// Tail arguments shared by the a.s.-scheme oracles.
struct AsArgs {
    s: f64,
    t_ok: f64,
    t_bad: f64,
}

impl AsArgs {
    fn new(params: &ChannelParams, cfg: &SchemeConfig) -> AsArgs {
        let m = (cfg.n - 1) as f64;
        let root_m = m.sqrt();
        AsArgs {
            s: root_m * params.p_fwd.sqrt() / params.sigma_fwd(),
            t_ok: root_m * cfg.delta * params.p_fb.sqrt() / params.sigma_fb(),
            t_bad: root_m * (2.0 - cfg.delta) * params.p_fb.sqrt() / params.sigma_fb(),
        }
    }
}

/// Log-probabilities of the four disjoint branches of the a.s. scheme,
/// conditioned on the hypothesis (the scheme is symmetric, so these are also
/// the unconditional branch contributions to the error probability).
#[derive(Debug, Clone, Copy)]
pub struct AsBranches {
    /// Tentative decision right, retransmission fired, final decision still
    /// crossed the opposite threshold.
    pub ok_retx: f64,
    /// Tentative decision right, no retransmission, noise alone crossed the
    /// opposite threshold.
    pub ok_quiet: f64,
    /// Tentative decision wrong, retransmission fired but failed to push
    /// `Y_n` past the threshold.
    pub bad_retx: f64,
    /// Tentative decision wrong and the transmitter did not notice
    /// (the dominant branch).
    pub bad_quiet: f64,
}

impl AsBranches {
    pub fn log_total(&self) -> f64 {
        log_sum_exp(&[self.ok_retx, self.ok_quiet, self.bad_retx, self.bad_quiet])
    }
}

/// Branch decomposition of the a.s.-scheme error probability.
pub fn as_scheme_error_branches(params: &ChannelParams, cfg: &SchemeConfig) -> Result<AsBranches> {
    require_kind(cfg, SchemeKind::AsScheme)?;
    cfg.validate(params)?;
    let a = AsArgs::new(params, cfg);
    let sigma = params.sigma_fwd();
    let ups = cfg.upsilon();
    let log_gamma = log_sum_exp(&[
        log_q_tail(-a.s) + log_q_tail(a.t_ok),
        log_q_tail(a.s) + log_q_tail(-a.t_bad),
    ]);
    // Retransmission amplitude sqrt(P/gamma); may overflow to +inf for huge
    // n, in which case the affected tails collapse to exact 0/1.
    let amp = (0.5 * (params.p_fwd.ln() - log_gamma)).exp();
    Ok(AsBranches {
        ok_retx: log_q_tail(-a.s) + log_q_tail(a.t_ok) + log_q_tail((ups + amp) / sigma),
        ok_quiet: log_q_tail(-a.s) + log_q_tail(-a.t_ok) + log_q_tail(ups / sigma),
        bad_retx: log_q_tail(a.s) + log_q_tail(-a.t_bad) + log_q_tail((amp - ups) / sigma),
        bad_quiet: log_q_tail(a.s) + log_q_tail(a.t_bad) + log_q_tail(-ups / sigma),
    })
}

/// Exact error probability of the a.s.-constraint scheme.
pub fn closed_form_error_as_scheme(params: &ChannelParams, cfg: &SchemeConfig) -> Result<f64> {
    Ok(log_closed_form_error_as_scheme(params, cfg)?.exp())
}

/// `ln` of [`closed_form_error_as_scheme`].
pub fn log_closed_form_error_as_scheme(params: &ChannelParams, cfg: &SchemeConfig) -> Result<f64> {
    Ok(as_scheme_error_branches(params, cfg)?.log_total())
}

/// NACK probability of the building block:
/// `Q(delta sqrt(m P)/sigma) - Q((2-delta) sqrt(m P)/sigma)` with `m = n-1`.
pub fn nack_probability(p_bar: f64, sigma2: f64, delta: f64, n: usize) -> Result<f64> {
    Ok(log_nack_probability(p_bar, sigma2, delta, n)?.exp())
}

/// `ln` of [`nack_probability`].
pub fn log_nack_probability(p_bar: f64, sigma2: f64, delta: f64, n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::domain("NACK statistic needs n >= 2"));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::domain("margin delta must lie in (0,1)"));
    }
    if !(p_bar > 0.0 && sigma2 > 0.0) {
        return Err(Error::domain("powers and variances must be positive"));
    }
    let scale = ((n - 1) as f64 * p_bar).sqrt() / sigma2.sqrt();
    let lo = log_q_tail(delta * scale);
    let hi = log_q_tail((2.0 - delta) * scale);
    Ok(lo + ln_one_minus_exp(hi - lo))
}

/// Conditional error probability of the building block given an ACK:
/// `Q((2-delta) a) / (Q(-delta a) + Q((2-delta) a))` with
/// `a = sqrt((n-1) P)/sigma`.
pub fn error_given_ack(p_bar: f64, sigma2: f64, delta: f64, n: usize) -> Result<f64> {
    Ok(log_error_given_ack(p_bar, sigma2, delta, n)?.exp())
}

/// `ln` of [`error_given_ack`].
pub fn log_error_given_ack(p_bar: f64, sigma2: f64, delta: f64, n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::domain("statistic needs n >= 2"));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::domain("margin delta must lie in (0,1)"));
    }
    if !(p_bar > 0.0 && sigma2 > 0.0) {
        return Err(Error::domain("powers and variances must be positive"));
    }
    let scale = ((n - 1) as f64 * p_bar).sqrt() / sigma2.sqrt();
    let num = log_q_tail((2.0 - delta) * scale);
    let denom = log_sum_exp(&[log_q_tail(-delta * scale), num]);
    Ok(num - denom)
}

/// Role-parameterized probabilities of one building block. The "forward" and
/// "feedback" links here are whatever the caller assigns; the three-phase
/// scheme reverses them in the echo phase.
#[derive(Debug, Clone, Copy)]
#[cfg_attr(not(test), allow(dead_code))]
pub(crate) struct BlockStats {
    pub log_p_nack: f64,
    /// Amplitude of the NACK feedback symbol, `sqrt(delta_fb_power / P(NACK))`.
    pub nack_amp: f64,
    /// `ln P("NACK" | NACK)`: the transmitter hears a signaled NACK.
    pub log_heard_given_nack: f64,
    /// `ln P("NACK" | ACK)`: noise alone crosses the threshold.
    pub log_heard_given_ack: f64,
    /// `ln P("NACK")`.
    pub log_p_heard: f64,
    /// Retransmission amplitude, `sqrt(p_fwd / P("NACK"))`.
    pub retx_amp: f64,
    /// Log-probabilities of the four error branches:
    /// (NACK,"NACK"), (NACK,"ACK"), (ACK,"NACK"), (ACK,"ACK").
    pub log_branches: [f64; 4],
    /// `ln P(error)` of the block.
    pub log_pe: f64,
}

pub(crate) fn block_stats(
    p_fwd: f64,
    sigma2_fwd: f64,
    sigma2_fb: f64,
    delta_fb_power: f64,
    delta: f64,
    upsilon: f64,
    len: usize,
) -> Result<BlockStats> {
    if len < 3 {
        return Err(Error::config("building block needs at least 3 uses"));
    }
    let log_p_nack = log_nack_probability(p_fwd, sigma2_fwd, delta, len)?;
    let log_p_ack = ln_one_minus_exp(log_p_nack);
    let sigma = sigma2_fwd.sqrt();
    let sigma_fb = sigma2_fb.sqrt();
    let nack_amp = (0.5 * (delta_fb_power.ln() - log_p_nack)).exp();
    let log_heard_given_nack = log_q_tail((upsilon - nack_amp) / sigma_fb);
    let log_heard_given_ack = log_q_tail(upsilon / sigma_fb);
    let log_p_heard = log_sum_exp(&[
        log_p_nack + log_heard_given_nack,
        log_p_ack + log_heard_given_ack,
    ]);
    let retx_amp = (0.5 * (p_fwd.ln() - log_p_heard)).exp();
    let scale = ((len - 1) as f64 * p_fwd).sqrt() / sigma;
    // Error probability of the opposite-side tail of S; this is the whole
    // conditional error under ACK since the receiver then ignores Y_n.
    let log_s_wrong = log_q_tail((2.0 - delta) * scale);
    let log_branches = [
        // NACK signaled and heard: retransmission must beat the noise sign.
        log_p_nack + log_heard_given_nack + log_q_tail(retx_amp / sigma),
        // NACK signaled but unheard: final slot is pure noise, error half
        // the time.
        log_p_nack + ln_one_minus_exp(log_heard_given_nack) + 0.5f64.ln(),
        // ACK declared; decision by sign of S regardless of what the
        // transmitter heard.
        log_s_wrong + log_heard_given_ack,
        log_s_wrong + ln_one_minus_exp(log_heard_given_ack),
    ];
    Ok(BlockStats {
        log_p_nack,
        nack_amp,
        log_heard_given_nack,
        log_heard_given_ack,
        log_p_heard,
        retx_amp,
        log_pe: log_sum_exp(&log_branches),
        log_branches,
    })
}

pub(crate) fn standalone_block_stats(
    params: &ChannelParams,
    cfg: &SchemeConfig,
) -> Result<BlockStats> {
    require_kind(cfg, SchemeKind::BuildingBlock)?;
    cfg.validate(params)?;
    block_stats(
        params.p_fwd,
        params.sigma2_fwd,
        params.sigma2_fb,
        cfg.delta_fb_power,
        cfg.delta,
        cfg.upsilon(),
        cfg.n,
    )
}

/// Exact error probability of the standalone building block.
pub fn closed_form_error_building_block(params: &ChannelParams, cfg: &SchemeConfig) -> Result<f64> {
    Ok(log_closed_form_error_building_block(params, cfg)?.exp())
}

/// `ln` of [`closed_form_error_building_block`].
pub fn log_closed_form_error_building_block(
    params: &ChannelParams,
    cfg: &SchemeConfig,
) -> Result<f64> {
    Ok(standalone_block_stats(params, cfg)?.log_pe)
}

/// The two block instances composed by the three-phase scheme.
pub(crate) fn three_phase_blocks(
    params: &ChannelParams,
    cfg: &SchemeConfig,
) -> Result<(BlockStats, BlockStats)> {
    require_kind(cfg, SchemeKind::ThreePhase)?;
    cfg.validate(params)?;
    let nu = (cfg.n - 1) / 2;
    let block_ups = cfg.threshold_coeff * nu as f64;
    let transmission = block_stats(
        2.0 * params.p_fwd - cfg.delta_fb_power,
        params.sigma2_fwd,
        params.sigma2_fb,
        cfg.delta_fb_power,
        cfg.delta,
        block_ups,
        nu,
    )?;
    let echo = block_stats(
        2.0 * params.p_fb - cfg.delta_fb_power,
        params.sigma2_fb,
        params.sigma2_fwd,
        cfg.delta_fb_power,
        cfg.delta,
        block_ups,
        nu,
    )?;
    Ok((transmission, echo))
}

/// `ln P(H'' != H)`: exactly one of the two blocks erred.
pub(crate) fn log_mismatch_from(b1: &BlockStats, b2: &BlockStats) -> f64 {
    log_sum_exp(&[
        b1.log_pe + ln_one_minus_exp(b2.log_pe),
        ln_one_minus_exp(b1.log_pe) + b2.log_pe,
    ])
}

/// Exact error probability of the three-phase scheme.
pub fn closed_form_error_three_phase(params: &ChannelParams, cfg: &SchemeConfig) -> Result<f64> {
    Ok(log_closed_form_error_three_phase(params, cfg)?.exp())
}

/// `ln` of [`closed_form_error_three_phase`], by full conditioning on
/// `(H', H'')`.
pub fn log_closed_form_error_three_phase(
    params: &ChannelParams,
    cfg: &SchemeConfig,
) -> Result<f64> {
    let (b1, b2) = three_phase_blocks(params, cfg)?;
    let log_pe1 = b1.log_pe;
    let log_pe2 = b2.log_pe;
    let log_mismatch = log_mismatch_from(&b1, &b2);
    let amp = (0.5 * (params.p_fwd.ln() - log_mismatch)).exp();
    let ups = cfg.upsilon();
    let sigma = params.sigma_fwd();
    Ok(log_sum_exp(&[
        // H' = H, H'' = H: silent final slot, noise must cross -upsilon.
        ln_one_minus_exp(log_pe1) + ln_one_minus_exp(log_pe2) + log_q_tail(ups / sigma),
        // H' wrong, echo also wrong so the transmitter never learns:
        // the dominant branch.
        log_pe1 + log_pe2 + log_q_tail(-ups / sigma),
        // H' right but echo wrong: spurious retransmission must cross the
        // opposite threshold to cause an error.
        ln_one_minus_exp(log_pe1) + log_pe2 + log_q_tail((ups + amp) / sigma),
        // H' wrong, echo faithful: rescue retransmission fails only if it
        // cannot clear the threshold.
        log_pe1 + ln_one_minus_exp(log_pe2) + log_q_tail((amp - ups) / sigma),
    ]))
}

/// Exact error probability of antipodal signaling without feedback:
/// `Q(sqrt(n P)/sigma)`.
pub fn closed_form_error_no_feedback(params: &ChannelParams, n: usize) -> Result<f64> {
    Ok(log_closed_form_error_no_feedback(params, n)?.exp())
}

/// `ln` of [`closed_form_error_no_feedback`].
pub fn log_closed_form_error_no_feedback(params: &ChannelParams, n: usize) -> Result<f64> {
    params.validate()?;
    if n < 1 {
        return Err(Error::config("no-feedback scheme needs n >= 1"));
    }
    Ok(log_q_tail(
        (n as f64 * params.p_fwd).sqrt() / params.sigma_fwd(),
    ))
}

/// Dispatch to the scheme's closed-form oracle.
pub fn closed_form_error(params: &ChannelParams, cfg: &SchemeConfig) -> Result<f64> {
    Ok(log_closed_form_error(params, cfg)?.exp())
}

/// Dispatch to the scheme's log-domain closed-form oracle.
pub fn log_closed_form_error(params: &ChannelParams, cfg: &SchemeConfig) -> Result<f64> {
    match cfg.kind {
        SchemeKind::NoFeedback => log_closed_form_error_no_feedback(params, cfg.n),
        SchemeKind::AsScheme => log_closed_form_error_as_scheme(params, cfg),
        SchemeKind::BuildingBlock => log_closed_form_error_building_block(params, cfg),
        SchemeKind::ThreePhase => log_closed_form_error_three_phase(params, cfg),
    }
}

/// The asymptotic exponent the scheme's error probability approaches for the
/// configured margin and power sliver (the delta-dependent reference a sweep
/// slope should converge to).
pub fn reference_exponent(params: &ChannelParams, cfg: &SchemeConfig) -> Result<f64> {
    cfg.validate(params)?;
    let d = cfg.delta;
    Ok(match cfg.kind {
        SchemeKind::NoFeedback => params.snr_fwd() / 2.0,
        SchemeKind::AsScheme => params.snr_fwd() / 2.0 + (2.0 - d).powi(2) * params.snr_fb() / 2.0,
        SchemeKind::BuildingBlock => (2.0 - d).powi(2) * params.snr_fwd() / 2.0,
        SchemeKind::ThreePhase => {
            let dp = cfg.delta_fb_power;
            (2.0 - d).powi(2) / 4.0
                * ((2.0 * params.p_fwd - dp) / params.sigma2_fwd
                    + (2.0 * params.p_fb - dp) / params.sigma2_fb)
        }
    })
}

fn require_kind(cfg: &SchemeConfig, kind: SchemeKind) -> Result<()> {
    if cfg.kind != kind {
        return Err(Error::config(format!(
            "expected a {} configuration, got {}",
            kind.name(),
            cfg.kind.name()
        )));
    }
    Ok(())
}
