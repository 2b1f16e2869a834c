//! Typical-set lemma checks: pointwise on small blocklengths, by quadrature
//! at blocklength one where the marginal densities reduce to 1-D integrals.

use serde::{Deserialize, Serialize};

use super::quadrature::adaptive_simpson;
use super::tilted::{log_max_tilted_density_closed, log_r_lower_bound};
use super::toy::{ToyEncoders, TypicalSetParams};
use crate::gaussian::log_normal_pdf;
use crate::{ChannelParams, Error, Result};

const LN_2PI: f64 = 1.837877066409345483560659472811;
const QUAD_TOL: f64 = 1e-8;
// Log-domain slack absorbing quadrature and roundoff error only.
const MARGIN: f64 = 1e-9;

/// Result of a single pointwise inequality check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckOutcome {
    Holds,
    Violated,
    /// The point is outside the relevant typical set.
    Skipped,
}

// exp(-n ((a1+b2)^2/(2 s2) + (b1+a2)^2/(2 s2_FB))) in log domain.
fn log_typical_factor(n: usize, ts: &TypicalSetParams, sigma2_fwd: f64, sigma2_fb: f64) -> f64 {
    -(n as f64)
        * ((ts.alpha1 + ts.beta2).powi(2) / (2.0 * sigma2_fwd)
            + (ts.beta1 + ts.alpha2).powi(2) / (2.0 * sigma2_fb))
}

/// Pointwise joint-density floor on the typical sets:
/// `p_0(y, z) >= (4 pi^2 s2 s2_FB)^{-n/2} * typical factor` for members of
/// both sets; non-members are skipped, not failed.
pub fn check_lemma3_pointwise(
    enc: &ToyEncoders,
    ts: &TypicalSetParams,
    y: &[f64],
    z: &[f64],
    sigma2_fwd: f64,
    sigma2_fb: f64,
) -> Result<CheckOutcome> {
    enc.validate()?;
    ts.validate()?;
    if y.len() != enc.n || z.len() != enc.n {
        return Err(Error::domain("y and z must have the encoder blocklength"));
    }
    if !enc.in_t_y(ts, y) || !enc.in_t_z0(ts, z) {
        return Ok(CheckOutcome::Skipped);
    }
    let lhs = enc.log_joint_density(false, y, z, sigma2_fwd, sigma2_fb);
    let rhs = -(enc.n as f64 / 2.0) * (2.0 * LN_2PI + sigma2_fwd.ln() + sigma2_fb.ln())
        + log_typical_factor(enc.n, ts, sigma2_fwd, sigma2_fb);
    Ok(if lhs >= rhs - MARGIN {
        CheckOutcome::Holds
    } else {
        CheckOutcome::Violated
    })
}

/// One named inequality verified over a grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridCheck {
    pub name: String,
    pub passed: bool,
    /// Smallest log-domain slack (LHS - RHS) seen over the grid.
    pub min_margin: f64,
    pub points: usize,
}

/// Report of the blocklength-one quadrature suite.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LemmaReport {
    pub checks: Vec<GridCheck>,
    pub passed: bool,
}

struct N1Code {
    x0: f64,
    x1: f64,
    sigma2_fwd: f64,
    sigma2_fb: f64,
}

impl N1Code {
    fn g(&self, enc: &ToyEncoders, y: f64) -> f64 {
        enc.feedback[0].eval(&[y])
    }

    // p_nu(y) = int w(y - x_nu) w_FB(z - g(y)) dz, by quadrature.
    fn marginal_y(&self, enc: &ToyEncoders, hypothesis: bool, y: f64) -> Result<f64> {
        let x = if hypothesis { self.x1 } else { self.x0 };
        let fwd = log_normal_pdf(y, x, self.sigma2_fwd).exp();
        let u = self.g(enc, y);
        let sd = self.sigma2_fb.sqrt();
        let fb_mass = adaptive_simpson(
            &|z| log_normal_pdf(z, u, self.sigma2_fb).exp(),
            u - 13.0 * sd,
            u + 13.0 * sd,
            QUAD_TOL,
        )?;
        Ok(fwd * fb_mass)
    }

    // p_nu(z) = int w(y - x_nu) w_FB(z - g(y)) dy, by quadrature.
    fn marginal_z(&self, enc: &ToyEncoders, hypothesis: bool, z: f64) -> Result<f64> {
        let x = if hypothesis { self.x1 } else { self.x0 };
        let sd = self.sigma2_fwd.sqrt();
        adaptive_simpson(
            &|y| {
                (log_normal_pdf(y, x, self.sigma2_fwd)
                    + log_normal_pdf(z, self.g(enc, y), self.sigma2_fb))
                .exp()
            },
            x - 13.0 * sd,
            x + 13.0 * sd,
            QUAD_TOL,
        )
    }
}

// The blocklength-one typical output set is an interval (possibly empty):
// the norm condition intersected with the preimage of the clipped affine
// feedback map's margin condition.
fn t_y_interval(enc: &ToyEncoders, ts: &TypicalSetParams) -> Option<(f64, f64)> {
    let mut lo = -ts.alpha1;
    let mut hi = ts.alpha1;
    let map = &enc.feedback[0];
    let w = map.weights[0];
    let effective_clip = map.clip.min(1e18);
    if effective_clip < ts.alpha2 {
        // The clip keeps |g| below alpha2 everywhere.
        return Some((lo, hi));
    }
    if w == 0.0 {
        return if map.bias.clamp(-map.clip, map.clip).abs() < ts.alpha2 {
            Some((lo, hi))
        } else {
            None
        };
    }
    let (a, b) = ((-ts.alpha2 - map.bias) / w, (ts.alpha2 - map.bias) / w);
    let (a, b) = if a <= b { (a, b) } else { (b, a) };
    lo = lo.max(a);
    hi = hi.min(b);
    if lo < hi {
        Some((lo, hi))
    } else {
        None
    }
}

fn grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    // Cell centers to stay strictly inside open sets.
    let step = (hi - lo) / points as f64;
    (0..points).map(|i| lo + (i as f64 + 0.5) * step).collect()
}

fn run_grid_check(name: &str, pairs: impl IntoIterator<Item = (f64, f64)>) -> GridCheck {
    let mut min_margin = f64::INFINITY;
    let mut points = 0usize;
    for (lhs, rhs) in pairs {
        min_margin = min_margin.min(lhs - rhs);
        points += 1;
    }
    GridCheck {
        name: name.to_string(),
        passed: points > 0 && min_margin >= -MARGIN,
        min_margin,
        points,
    }
}

/// Blocklength-one verification of the marginal-density lemmas by adaptive
/// quadrature: the output-density ceiling, the feedback-density ceiling and
/// tilted bound, the joint floor's marginal consequences, the
/// likelihood-ratio floor on the typical interval, its integrated form on
/// the negative half-line, and the reference-channel density floor.
pub fn quadrature_lemma_checks_n1(
    enc: &ToyEncoders,
    params: &ChannelParams,
    ts: &TypicalSetParams,
) -> Result<LemmaReport> {
    enc.validate()?;
    ts.validate()?;
    params.validate()?;
    if enc.n != 1 {
        return Err(Error::config(
            "the quadrature suite requires blocklength one",
        ));
    }
    let code = N1Code {
        x0: enc.forward_inputs(false, &[])[0],
        x1: enc.forward_inputs(true, &[])[0],
        sigma2_fwd: params.sigma2_fwd,
        sigma2_fb: params.sigma2_fb,
    };
    let sd_fwd = params.sigma2_fwd.sqrt();
    let sd_fb = params.sigma2_fb.sqrt();
    let mut checks = Vec::new();

    // Output-density ceiling: p_1(y) <= (2 pi s2)^{-1/2}.
    let y_span = (code.x0.abs().max(code.x1.abs()) + 6.0 * sd_fwd).max(ts.alpha1);
    let y_grid = grid(-y_span, y_span, 128);
    let log_peak_fwd = -0.5 * (LN_2PI + params.sigma2_fwd.ln());
    let mut pairs = Vec::new();
    for &y in &y_grid {
        let p1 = code.marginal_y(enc, true, y)?;
        pairs.push((log_peak_fwd, p1.ln()));
    }
    checks.push(run_grid_check("output density ceiling", pairs));

    // Feedback-density ceiling: p_0(z) <= (2 pi s2_FB)^{-1/2}, and the
    // tilted bound p(z) <= closed-form maximum.
    let z_span = (enc.fb_power.sqrt() + 6.0 * sd_fb).max(ts.beta1);
    let z_grid = grid(-z_span, z_span, 128);
    let log_peak_fb = -0.5 * (LN_2PI + params.sigma2_fb.ln());
    let mut ceiling_pairs = Vec::new();
    let mut tilted_pairs = Vec::new();
    for &z in &z_grid {
        let p0 = code.marginal_z(enc, false, z)?;
        let p1 = code.marginal_z(enc, true, z)?;
        ceiling_pairs.push((log_peak_fb, p0.ln()));
        let mix = 0.5 * (p0 + p1);
        let bound = log_max_tilted_density_closed(z.abs(), 1, enc.fb_power, params.sigma2_fb);
        tilted_pairs.push((bound, mix.ln()));
    }
    checks.push(run_grid_check("feedback density ceiling", ceiling_pairs));
    checks.push(run_grid_check(
        "tilted feedback density bound",
        tilted_pairs,
    ));

    // Probability of the typical feedback set under hypothesis 0. At
    // blocklength one the forward-energy condition is a constant predicate.
    let t_z_nonempty = code.x0 * code.x0 < ts.beta2 * ts.beta2;
    let p0_tz = if t_z_nonempty {
        adaptive_simpson(
            &|z| code.marginal_z(enc, false, z).unwrap_or(0.0),
            -ts.beta1,
            ts.beta1,
            QUAD_TOL,
        )?
    } else {
        0.0
    };

    let factor = log_typical_factor(1, ts, params.sigma2_fwd, params.sigma2_fb);
    if let Some((lo, hi)) = t_y_interval(enc, ts) {
        if p0_tz > 0.0 {
            let log_p0_tz = p0_tz.ln();
            // Marginal floor on the typical interval.
            let ty_grid = grid(lo, hi, 128);
            let mut floor_pairs = Vec::new();
            let mut ratio_pairs = Vec::new();
            for &y in &ty_grid {
                let p0 = code.marginal_y(enc, false, y)?;
                let p1 = code.marginal_y(enc, true, y)?;
                let rhs = log_peak_fwd + factor + log_p0_tz;
                floor_pairs.push((p0.ln(), rhs));
                ratio_pairs.push((p0.ln() - p1.ln(), factor + log_p0_tz));
            }
            checks.push(run_grid_check("typical output density floor", floor_pairs));
            checks.push(run_grid_check("likelihood ratio floor", ratio_pairs));

            // Integrated form over the decision region {y < 0}.
            if lo < 0.0 {
                let hi_cut = hi.min(0.0);
                let p0_mass = adaptive_simpson(
                    &|y| code.marginal_y(enc, false, y).unwrap_or(0.0),
                    lo,
                    hi_cut,
                    QUAD_TOL,
                )?;
                let p1_mass = adaptive_simpson(
                    &|y| code.marginal_y(enc, true, y).unwrap_or(0.0),
                    lo,
                    hi_cut,
                    QUAD_TOL,
                )?;
                checks.push(run_grid_check(
                    "integrated likelihood floor on the negative half-line",
                    [(p0_mass.ln(), factor + log_p0_tz + p1_mass.ln())],
                ));
            }
        }
    }

    // Reference-channel floor: p_nu(y,z) >= p(z) w(y - x_nu) r(|z|).
    let mut ref_pairs = Vec::new();
    for &z in z_grid.iter().step_by(8) {
        let p0z = code.marginal_z(enc, false, z)?;
        let p1z = code.marginal_z(enc, true, z)?;
        let log_mix = (0.5 * (p0z + p1z)).ln();
        let r = log_r_lower_bound(z.abs(), 1, enc.fb_power, params.sigma2_fb);
        for &y in y_grid.iter().step_by(8) {
            for hyp in [false, true] {
                let x = if hyp { code.x1 } else { code.x0 };
                let lhs =
                    enc.log_joint_density(hyp, &[y], &[z], params.sigma2_fwd, params.sigma2_fb);
                let rhs = log_mix + log_normal_pdf(y, x, params.sigma2_fwd) + r;
                ref_pairs.push((lhs, rhs));
            }
        }
    }
    checks.push(run_grid_check("reference-channel density floor", ref_pairs));

    let passed = checks.iter().all(|c| c.passed);
    Ok(LemmaReport { checks, passed })
}
