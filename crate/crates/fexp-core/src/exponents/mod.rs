//! Closed-form error-exponent bounds for both feedback power-constraint
//! regimes, the optimized expected-constraint converse, passive-feedback and
//! BSC comparison bounds, and least-squares slope fitting for empirical
//! exponents. All exponents are in nats per channel use.

mod optimize;

pub use optimize::{
    converse_expected_tight, inner_infimum, slack_objective, FbBudgetConvention, PowerSplit,
    SlackParams,
};

use serde::{Deserialize, Serialize};

use crate::{ChannelParams, Error, Result};

/// Whether a bound is achievable (lower) or a converse (upper).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundKind {
    Achievable,
    Converse,
}

/// Which power-constraint regime (or comparison setting) a bound lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    AlmostSure,
    Expected,
    Passive,
    Bsc,
}

/// A named exponent value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentBound {
    /// Nats per channel use.
    pub value: f64,
    pub kind: BoundKind,
    pub regime: Regime,
    pub label: String,
}

impl ExponentBound {
    fn new(value: f64, kind: BoundKind, regime: Regime, label: impl Into<String>) -> Self {
        ExponentBound {
            value,
            kind,
            regime,
            label: label.into(),
        }
    }
}

/// Achievable exponent under the almost-sure feedback constraint:
/// `P/(2 s2) + (2-delta)^2 P_FB/(2 s2_FB)`, or its `delta -> 0` limit
/// `P/(2 s2) + 2 P_FB/s2_FB` when no margin is given.
pub fn achievable_as(params: &ChannelParams, delta: Option<f64>) -> Result<ExponentBound> {
    params.validate()?;
    let value = match delta {
        None => params.snr_fwd() / 2.0 + 2.0 * params.snr_fb(),
        Some(d) => {
            if !(d > 0.0 && d < 1.0) {
                return Err(Error::domain("margin delta must lie in (0,1)"));
            }
            params.snr_fwd() / 2.0 + (2.0 - d).powi(2) * params.snr_fb() / 2.0
        }
    };
    Ok(ExponentBound::new(
        value,
        BoundKind::Achievable,
        Regime::AlmostSure,
        match delta {
            None => "achievable, a.s. constraint (margin -> 0)".to_string(),
            Some(d) => format!("achievable, a.s. constraint (margin {d})"),
        },
    ))
}

/// Converse under the almost-sure feedback constraint:
/// `P/(2 s2) + 2 sqrt((P_FB + s2_FB) P_FB) / s2_FB`.
pub fn converse_as(params: &ChannelParams) -> Result<ExponentBound> {
    params.validate()?;
    let value = params.snr_fwd() / 2.0 + as_feedback_term(params);
    Ok(ExponentBound::new(
        value,
        BoundKind::Converse,
        Regime::AlmostSure,
        "converse, a.s. constraint",
    ))
}

fn as_feedback_term(params: &ChannelParams) -> f64 {
    2.0 * ((params.p_fb + params.sigma2_fb) * params.p_fb).sqrt() / params.sigma2_fb
}

/// Rate-R converse under the almost-sure constraint: the caller supplies the
/// no-feedback reliability at the rate of interest and the feedback term of
/// [`converse_as`] is added.
pub fn rate_converse_as(params: &ChannelParams, e_nofb_at_r: f64) -> Result<ExponentBound> {
    params.validate()?;
    if !(e_nofb_at_r >= 0.0) || !e_nofb_at_r.is_finite() {
        return Err(Error::domain(
            "the supplied no-feedback exponent must be finite and nonnegative",
        ));
    }
    Ok(ExponentBound::new(
        e_nofb_at_r + as_feedback_term(params),
        BoundKind::Converse,
        Regime::AlmostSure,
        "rate converse, a.s. constraint",
    ))
}

/// Achievable exponent under the expected feedback constraint:
/// `(2P - D)/s2 + (2 P_FB - D)/s2_FB`, or the `D -> 0` limit
/// `2P/s2 + 2P_FB/s2_FB`.
pub fn achievable_expected(
    params: &ChannelParams,
    delta_fb_power: Option<f64>,
) -> Result<ExponentBound> {
    params.validate()?;
    let value = match delta_fb_power {
        None => 2.0 * params.snr_fwd() + 2.0 * params.snr_fb(),
        Some(d) => {
            if !(d > 0.0 && d < params.p_fwd.min(params.p_fb)) {
                return Err(Error::domain(
                    "power sliver must satisfy 0 < D < min(P, P_FB)",
                ));
            }
            (2.0 * params.p_fwd - d) / params.sigma2_fwd
                + (2.0 * params.p_fb - d) / params.sigma2_fb
        }
    };
    Ok(ExponentBound::new(
        value,
        BoundKind::Achievable,
        Regime::Expected,
        match delta_fb_power {
            None => "achievable, expected constraint (sliver -> 0)".to_string(),
            Some(d) => format!("achievable, expected constraint (sliver {d})"),
        },
    ))
}

/// Closed-form converse under the expected feedback constraint:
/// `(sqrt(P + s2) + sqrt(P))^2 / s2 + (sqrt(P_FB + s2_FB) + sqrt(P_FB))^2 / s2_FB`.
pub fn converse_expected_simple(params: &ChannelParams) -> Result<ExponentBound> {
    params.validate()?;
    let fwd = ((params.p_fwd + params.sigma2_fwd).sqrt() + params.p_fwd.sqrt()).powi(2)
        / params.sigma2_fwd;
    let fb =
        ((params.p_fb + params.sigma2_fb).sqrt() + params.p_fb.sqrt()).powi(2) / params.sigma2_fb;
    Ok(ExponentBound::new(
        fwd + fb,
        BoundKind::Converse,
        Regime::Expected,
        "converse, expected constraint (closed form)",
    ))
}

/// Two-message passive (symbol-by-symbol) feedback bound:
/// tight form `(P/s2 + P/(P+s2) * P_FB/s2_FB) / 2`, loose form
/// `(P/s2 + P_FB/s2_FB) / 2`.
pub fn passive_feedback_bound(params: &ChannelParams, loose: bool) -> Result<ExponentBound> {
    params.validate()?;
    let value = if loose {
        0.5 * (params.snr_fwd() + params.snr_fb())
    } else {
        0.5 * (params.snr_fwd()
            + params.p_fwd / (params.p_fwd + params.sigma2_fwd) * params.snr_fb())
    };
    Ok(ExponentBound::new(
        value,
        BoundKind::Converse,
        Regime::Passive,
        if loose {
            "passive feedback bound (loose)"
        } else {
            "passive feedback bound"
        },
    ))
}

/// BSC comparison bounds: the active-noisy-feedback bound
/// `ln((1-eps_FB)/eps_FB) + E_NoFB(R; eps)` and the perfect-feedback
/// two-codeword bound `ln(1/(4 eps (1-eps))) / 2`.
pub fn bsc_bounds(
    eps: f64,
    eps_fb: f64,
    e_nofb_at_r: f64,
) -> Result<(ExponentBound, ExponentBound)> {
    if !(eps > 0.0 && eps <= 0.5) || !(eps_fb > 0.0 && eps_fb <= 0.5) {
        return Err(Error::domain(
            "crossover probabilities must lie in (0, 1/2]",
        ));
    }
    if !(e_nofb_at_r >= 0.0) || !e_nofb_at_r.is_finite() {
        return Err(Error::domain(
            "the supplied no-feedback exponent must be finite and nonnegative",
        ));
    }
    let active = ((1.0 - eps_fb) / eps_fb).ln() + e_nofb_at_r;
    let two_codeword = 0.5 * (1.0 / (4.0 * eps * (1.0 - eps))).ln();
    Ok((
        ExponentBound::new(
            active,
            BoundKind::Converse,
            Regime::Bsc,
            "BSC active noisy feedback bound",
        ),
        ExponentBound::new(
            two_codeword,
            BoundKind::Converse,
            Regime::Bsc,
            "BSC perfect-feedback two-codeword bound",
        ),
    ))
}

/// A fitted empirical exponent: `-log pe ~ slope * n + intercept`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

/// Least-squares fit of `-log_pe` against `n`.
pub fn fit_exponent_slope(points: &[(u64, f64)]) -> Result<SlopeFit> {
    if points.len() < 3 {
        return Err(Error::domain("slope fit needs at least 3 points"));
    }
    for w in 0..points.len() {
        if !points[w].1.is_finite() {
            return Err(Error::domain("log_pe values must be finite"));
        }
        for v in (w + 1)..points.len() {
            if points[w].0 == points[v].0 {
                return Err(Error::domain("blocklengths must be distinct"));
            }
        }
    }
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|&(x, _)| x as f64).collect();
    let ys: Vec<f64> = points.iter().map(|&(_, y)| -y).collect();
    let mean_x = xs.iter().sum::<f64>() / n;
    let mean_y = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mean_x) * (x - mean_x)).sum();
    let sxy: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (x - mean_x) * (y - mean_y))
        .sum();
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let ss_tot: f64 = ys.iter().map(|y| (y - mean_y) * (y - mean_y)).sum();
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let fit = slope * x + intercept;
            (y - fit) * (y - fit)
        })
        .sum();
    let r2 = if ss_tot == 0.0 {
        1.0
    } else {
        1.0 - ss_res / ss_tot
    };
    Ok(SlopeFit {
        slope,
        intercept,
        r2,
    })
}
