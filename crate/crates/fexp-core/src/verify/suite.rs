//! The full verification suite: randomized inequality checks plus
//! oracle-vs-Monte-Carlo agreement, aggregated into a serializable report.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::lemmas::{check_lemma3_pointwise, quadrature_lemma_checks_n1, CheckOutcome};
use super::tilted::{check_product_lower_bound, max_tilted_density};
use super::toy::{ToyEncoders, TypicalSetParams};
use crate::gaussian::RngStream;
use crate::schemes::{closed_form_error, estimate_error, run_trial, SchemeConfig, TiltSpec};
use crate::{ChannelParams, Result};

/// Sizes of the randomized portions of the suite.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub seed: u64,
    /// Random feedback records for the tilted-density comparison.
    pub tilted_points: usize,
    /// Random `(z, u)` pairs for the product lower bound.
    pub product_pairs: usize,
    /// Member pairs required by the joint-density floor check.
    pub lemma3_members: usize,
    /// Random toy codes for the pointwise checks.
    pub toy_encoders: usize,
    /// Random blocklength-one codes for the quadrature suite.
    pub quadrature_encoders: usize,
    /// Trials per scheme for the oracle-vs-MC agreement checks.
    pub mc_trials: u64,
    /// Parameter draws and trials per draw for the almost-sure energy audit.
    pub as_energy_draws: usize,
    pub as_energy_trials: u64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            seed: 1,
            tilted_points: 1_000,
            product_pairs: 100_000,
            lemma3_members: 10_000,
            toy_encoders: 10,
            quadrature_encoders: 6,
            mc_trials: 1_000_000,
            as_energy_draws: 20,
            as_energy_trials: 50_000,
        }
    }
}

impl SuiteConfig {
    /// A reduced configuration for quick smoke runs.
    pub fn quick(seed: u64) -> Self {
        SuiteConfig {
            seed,
            tilted_points: 100,
            product_pairs: 5_000,
            lemma3_members: 500,
            toy_encoders: 4,
            quadrature_encoders: 2,
            mc_trials: 100_000,
            as_energy_draws: 5,
            as_energy_trials: 5_000,
        }
    }
}

/// One aggregated check of the suite.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SuiteCheck {
    pub name: String,
    pub passed: bool,
    pub instances: u64,
    /// The check's tightest margin, in whatever units the check reports
    /// (relative gap, log-domain slack, sigmas, ...); absent for pure
    /// pass/fail counts.
    pub margin: Option<f64>,
    pub detail: String,
}

/// The whole suite's outcome.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerifyReport {
    pub passed: bool,
    pub checks: Vec<SuiteCheck>,
}

/// The per-scheme configurations used for oracle-vs-MC agreement, chosen so
/// each closed-form error probability lands in [1e-4, 1e-2].
pub fn mc_agreement_configs() -> Vec<(ChannelParams, SchemeConfig)> {
    vec![
        (ChannelParams::all_ones(), SchemeConfig::no_feedback(6)),
        (ChannelParams::all_ones(), SchemeConfig::as_scheme(9, 0.3)),
        (
            ChannelParams::all_ones(),
            SchemeConfig::building_block(9, 0.8, 3.0),
        ),
        (
            ChannelParams::all_ones(),
            SchemeConfig::three_phase(41, 0.4, 0.05),
        ),
    ]
}

/// Run every check and aggregate the report.
pub fn run_full_suite(cfg: &SuiteConfig) -> Result<VerifyReport> {
    let mut checks = Vec::new();
    checks.push(tilted_density_check(cfg)?);
    checks.push(product_bound_check(cfg)?);
    checks.push(lemma3_check(cfg)?);
    checks.extend(quadrature_checks(cfg)?);
    checks.extend(mc_agreement_checks(cfg)?);
    checks.push(importance_sampling_check(cfg)?);
    checks.push(as_energy_check(cfg)?);
    let passed = checks.iter().all(|c| c.passed);
    Ok(VerifyReport { passed, checks })
}

fn tilted_density_check(cfg: &SuiteConfig) -> Result<SuiteCheck> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x7114ed);
    let mut worst_rel = 0.0f64;
    for i in 0..cfg.tilted_points {
        let n = 1 + i % 8;
        let p_fb = rng.gen_range(0.3..3.0);
        let s2 = rng.gen_range(0.3..3.0);
        let z: Vec<f64> = (0..n).map(|_| rng.gen_range(-4.0..4.0)).collect();
        let (closed, numeric) = max_tilted_density(&z, p_fb, s2)?;
        worst_rel = worst_rel.max((closed - numeric).abs() / closed);
    }
    Ok(SuiteCheck {
        name: "tilted-density closed form vs numeric optimization".into(),
        passed: worst_rel <= 1e-6,
        instances: cfg.tilted_points as u64,
        margin: Some(worst_rel),
        detail: format!("worst relative gap {worst_rel:.3e}"),
    })
}

fn product_bound_check(cfg: &SuiteConfig) -> Result<SuiteCheck> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x9d0d);
    let mut failures = 0u64;
    for i in 0..cfg.product_pairs {
        let n = 1 + i % 8;
        let p_fb = rng.gen_range(0.3..3.0);
        let s2 = rng.gen_range(0.3..3.0);
        let z: Vec<f64> = (0..n).map(|_| rng.gen_range(-5.0..5.0)).collect();
        // Draw u inside the power ball, occasionally on its boundary.
        let mut u: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let radius = (n as f64 * p_fb).sqrt();
        let un = u.iter().map(|v| v * v).sum::<f64>().sqrt();
        let target = if i % 5 == 0 {
            radius
        } else {
            rng.gen_range(0.0..radius)
        };
        if un > 0.0 {
            let s = target / un;
            for v in u.iter_mut() {
                *v *= s;
            }
        }
        if !check_product_lower_bound(&z, &u, p_fb, s2)? {
            failures += 1;
        }
    }
    Ok(SuiteCheck {
        name: "feedback product density lower bound".into(),
        passed: failures == 0,
        instances: cfg.product_pairs as u64,
        margin: None,
        detail: format!("{failures} violations"),
    })
}

fn random_typical_sets(rng: &mut ChaCha8Rng) -> TypicalSetParams {
    TypicalSetParams {
        alpha1: rng.gen_range(1.2..3.0),
        alpha2: rng.gen_range(1.2..3.0),
        beta1: rng.gen_range(1.2..3.0),
        beta2: rng.gen_range(2.5..5.0),
    }
}

fn lemma3_check(cfg: &SuiteConfig) -> Result<SuiteCheck> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x1e33a3);
    let mut members = 0u64;
    let mut skipped = 0u64;
    let mut violated = 0u64;
    let per_encoder = cfg.lemma3_members.div_ceil(cfg.toy_encoders.max(1));
    for _ in 0..cfg.toy_encoders {
        let n = rng.gen_range(2..=4);
        let enc = ToyEncoders::random(n, rng.gen_range(0.5..2.0), &mut rng)?;
        let ts = random_typical_sets(&mut rng);
        let s2_fwd = rng.gen_range(0.5..2.0);
        let s2_fb = rng.gen_range(0.5..2.0);
        let mut found = 0usize;
        // Sample mostly-members; reject non-members but count them.
        for _ in 0..per_encoder * 20 {
            if found >= per_encoder {
                break;
            }
            let y: Vec<f64> = (0..n)
                .map(|_| rng.gen_range(-ts.alpha1 * 0.6..ts.alpha1 * 0.6))
                .collect();
            let z: Vec<f64> = (0..n)
                .map(|_| rng.gen_range(-ts.beta1 * 0.6..ts.beta1 * 0.6))
                .collect();
            match check_lemma3_pointwise(&enc, &ts, &y, &z, s2_fwd, s2_fb)? {
                CheckOutcome::Holds => {
                    members += 1;
                    found += 1;
                }
                CheckOutcome::Skipped => skipped += 1,
                CheckOutcome::Violated => violated += 1,
            }
        }
    }
    Ok(SuiteCheck {
        name: "joint density floor on typical sets".into(),
        passed: violated == 0 && members >= cfg.lemma3_members as u64,
        instances: members + skipped,
        margin: None,
        detail: format!("{members} members held, {skipped} skipped, {violated} violations"),
    })
}

fn quadrature_checks(cfg: &SuiteConfig) -> Result<Vec<SuiteCheck>> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x4a4d);
    let params = ChannelParams::all_ones();
    let mut out = Vec::new();
    for idx in 0..cfg.quadrature_encoders {
        let enc = ToyEncoders::random(1, params.p_fb, &mut rng)?;
        let ts = random_typical_sets(&mut rng);
        let report = quadrature_lemma_checks_n1(&enc, &params, &ts)?;
        let failing: Vec<String> = report
            .checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| c.name.clone())
            .collect();
        let worst = report
            .checks
            .iter()
            .map(|c| c.min_margin)
            .fold(f64::INFINITY, f64::min);
        out.push(SuiteCheck {
            name: format!("blocklength-one quadrature suite #{idx}"),
            passed: report.passed,
            instances: report.checks.iter().map(|c| c.points as u64).sum(),
            margin: Some(worst),
            detail: if failing.is_empty() {
                format!("all grids pass, tightest log margin {worst:.3e}")
            } else {
                format!("failing: {}", failing.join(", "))
            },
        });
    }
    Ok(out)
}

fn mc_agreement_checks(cfg: &SuiteConfig) -> Result<Vec<SuiteCheck>> {
    let mut out = Vec::new();
    for (params, scheme) in mc_agreement_configs() {
        let pe = closed_form_error(&params, &scheme)?;
        let est = estimate_error(&params, &scheme, cfg.mc_trials, cfg.seed, None)?;
        // Binomial 3-sigma around the oracle value.
        let sigma = (pe * (1.0 - pe) / cfg.mc_trials as f64).sqrt();
        let gap = (est.p_hat - pe).abs();
        out.push(SuiteCheck {
            name: format!("oracle vs Monte Carlo, {}", scheme.kind.name()),
            passed: gap <= 3.0 * sigma,
            instances: cfg.mc_trials,
            margin: Some(gap / sigma),
            detail: format!(
                "oracle {pe:.6e}, estimate {:.6e}, gap {:.2} sigma",
                est.p_hat,
                gap / sigma
            ),
        });
    }
    Ok(out)
}

fn importance_sampling_check(cfg: &SuiteConfig) -> Result<SuiteCheck> {
    let params = ChannelParams::all_ones();
    let scheme = SchemeConfig::no_feedback(4);
    let trials = cfg.mc_trials.clamp(10_000, 400_000);
    let plain = estimate_error(&params, &scheme, trials, cfg.seed, None)?;
    let tilt = TiltSpec::forward(vec![(0, -1.0), (1, -1.0)]);
    let tilted = estimate_error(&params, &scheme, trials, cfg.seed, Some(&tilt))?;
    let overlap = tilted.ci_low <= plain.ci_high && plain.ci_low <= tilted.ci_high;
    Ok(SuiteCheck {
        name: "importance sampling unbiasedness (overlapping intervals)".into(),
        passed: overlap,
        instances: 2 * trials,
        margin: None,
        detail: format!(
            "plain [{:.4e}, {:.4e}], tilted [{:.4e}, {:.4e}]",
            plain.ci_low, plain.ci_high, tilted.ci_low, tilted.ci_high
        ),
    })
}

fn as_energy_check(cfg: &SuiteConfig) -> Result<SuiteCheck> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0xa5a5);
    let mut checked = 0u64;
    let mut worst_slack = f64::INFINITY;
    for draw in 0..cfg.as_energy_draws {
        let params = ChannelParams::new(
            rng.gen_range(0.3..3.0),
            rng.gen_range(0.3..3.0),
            rng.gen_range(0.3..3.0),
            rng.gen_range(0.3..3.0),
        )?;
        let n = rng.gen_range(3..24usize);
        let scheme = SchemeConfig::as_scheme(n, rng.gen_range(0.1..0.9));
        let budget = n as f64 * params.p_fb;
        for trial in 0..cfg.as_energy_trials {
            let t = run_trial(
                &params,
                &scheme,
                trial % 2 == 0,
                RngStream::new(cfg.seed.wrapping_add(draw as u64), trial),
            )?;
            worst_slack = worst_slack.min(budget - t.fb_energy);
            checked += 1;
        }
    }
    Ok(SuiteCheck {
        name: "almost-sure feedback energy constraint".into(),
        passed: worst_slack >= -1e-9,
        instances: checked,
        margin: Some(worst_slack),
        detail: format!("minimum budget slack {worst_slack:.6e}"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quick_suite_passes() {
        let report = run_full_suite(&SuiteConfig::quick(7)).unwrap();
        for check in &report.checks {
            assert!(check.passed, "{}: {}", check.name, check.detail);
        }
        assert!(report.passed);
    }

    #[test]
    fn report_serializes_to_json() {
        let report = run_full_suite(&SuiteConfig {
            tilted_points: 8,
            product_pairs: 100,
            lemma3_members: 20,
            toy_encoders: 2,
            quadrature_encoders: 1,
            mc_trials: 20_000,
            as_energy_draws: 1,
            as_energy_trials: 500,
            seed: 3,
        })
        .unwrap();
        let json = serde_json::to_string_pretty(&report).unwrap();
        assert!(json.contains("tilted-density"));
    }
}
