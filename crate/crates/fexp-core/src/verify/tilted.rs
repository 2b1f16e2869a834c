//! The tilted-density maximum, the Cauchy-Schwarz product lower bound, and
//! the likelihood-ratio floor: pointwise pieces of the converse machinery.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::gaussian::log_normal_pdf;
use crate::{Error, Result};

const LN_2PI: f64 = 1.837877066409345483560659472811;

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

// ln prod_k w_FB(z_k | u_k), evaluated directly.
fn log_product_density(z: &[f64], u: &[f64], sigma2_fb: f64) -> f64 {
    z.iter()
        .zip(u)
        .map(|(&zk, &uk)| log_normal_pdf(zk, uk, sigma2_fb))
        .sum()
}

/// `ln max_{||u||^2 <= n P_FB} prod_k w_FB(z_k|u_k)` in closed form:
/// `-(n/2) ln(2 pi s2_FB) - ((||z|| - sqrt(n P_FB))^+)^2 / (2 s2_FB)`.
pub fn log_max_tilted_density_closed(z_norm: f64, n: usize, p_fb: f64, sigma2_fb: f64) -> f64 {
    let slack = (z_norm - (n as f64 * p_fb).sqrt()).max(0.0);
    -(n as f64 / 2.0) * (LN_2PI + sigma2_fb.ln()) - slack * slack / (2.0 * sigma2_fb)
}

/// Closed-form and numerically-optimized maximum of the feedback-channel
/// output density over power-feasible inputs, both in linear domain.
///
/// The numeric branch maximizes the product density directly by projected
/// gradient ascent from several deterministic starts; it never consults the
/// closed form.
pub fn max_tilted_density(z: &[f64], p_fb: f64, sigma2_fb: f64) -> Result<(f64, f64)> {
    let n = z.len();
    if n == 0 || n > 8 {
        return Err(Error::domain(
            "numeric tilted-density search supports 1 <= n <= 8",
        ));
    }
    if !(p_fb > 0.0 && sigma2_fb > 0.0) {
        return Err(Error::domain("powers and variances must be positive"));
    }
    let closed = log_max_tilted_density_closed(norm(z), n, p_fb, sigma2_fb).exp();

    let radius = (n as f64 * p_fb).sqrt();
    let project = |u: &mut [f64]| {
        let r = norm(u);
        if r > radius {
            let s = radius / r;
            for v in u.iter_mut() {
                *v *= s;
            }
        }
    };
    use rand::SeedableRng;
    let mut rng = ChaCha8Rng::seed_from_u64(0x7e57ed);
    let mut best = f64::NEG_INFINITY;
    for start in 0..8 {
        let mut u: Vec<f64> = match start {
            0 => vec![0.0; n],
            _ => (0..n).map(|_| rng.gen_range(-radius..radius)).collect(),
        };
        project(&mut u);
        for _ in 0..400 {
            // Ascent direction of the log-density is (z - u)/s2.
            for k in 0..n {
                u[k] += 0.3 * (z[k] - u[k]);
            }
            project(&mut u);
        }
        best = best.max(log_product_density(z, &u, sigma2_fb));
    }
    Ok((closed, best.exp()))
}

/// Verify the product lower bound
/// `prod_k w_FB(z_k|u_k) >= (2 pi s2_FB)^{-n/2} exp(-(||z|| + sqrt(n P_FB))^2 / (2 s2_FB))`
/// for a power-feasible `u`. Both sides are compared in log domain with a
/// 1e-9 margin for roundoff.
pub fn check_product_lower_bound(z: &[f64], u: &[f64], p_fb: f64, sigma2_fb: f64) -> Result<bool> {
    if z.len() != u.len() || z.is_empty() {
        return Err(Error::domain("z and u must have equal positive length"));
    }
    if !(p_fb > 0.0 && sigma2_fb > 0.0) {
        return Err(Error::domain("powers and variances must be positive"));
    }
    let n = z.len() as f64;
    if norm(u).powi(2) > n * p_fb * (1.0 + 1e-12) {
        return Err(Error::domain(
            "u violates the almost-sure feedback power constraint",
        ));
    }
    let lhs = log_product_density(z, u, sigma2_fb);
    let reach = norm(z) + (n * p_fb).sqrt();
    let rhs = -(n / 2.0) * (LN_2PI + sigma2_fb.ln()) - reach * reach / (2.0 * sigma2_fb);
    Ok(lhs >= rhs - 1e-9)
}

/// `ln` of the likelihood-ratio floor:
/// `-2 max(||z||/sqrt(n), sqrt(P_FB)) sqrt(P_FB) n / s2_FB`.
pub fn log_r_lower_bound(z_norm: f64, n: usize, p_fb: f64, sigma2_fb: f64) -> f64 {
    let per_use = (z_norm / (n as f64).sqrt()).max(p_fb.sqrt());
    -2.0 * per_use * p_fb.sqrt() * n as f64 / sigma2_fb
}

/// Linear-domain [`log_r_lower_bound`]; constant on `||z||^2 <= n P_FB` and
/// monotone nonincreasing beyond.
pub fn r_lower_bound(z_norm: f64, n: usize, p_fb: f64, sigma2_fb: f64) -> f64 {
    log_r_lower_bound(z_norm, n, p_fb, sigma2_fb).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn tilted_maximum_at_origin_is_the_density_peak() {
        for n in 1..=4 {
            let z = vec![0.0; n];
            let (closed, numeric) = max_tilted_density(&z, 1.0, 1.0).unwrap();
            let peak = (2.0 * std::f64::consts::PI).powf(-(n as f64) / 2.0);
            assert!((closed - peak).abs() / peak < 1e-12);
            assert!((numeric - peak).abs() / peak < 1e-9);
        }
    }

    #[test]
    fn tilted_maximum_known_points() {
        // n=1, z=3: (2 pi)^{-1/2} e^{-2}.
        let (closed, numeric) = max_tilted_density(&[3.0], 1.0, 1.0).unwrap();
        let expected = (2.0 * std::f64::consts::PI).sqrt().recip() * (-2.0f64).exp();
        assert!((closed - expected).abs() / expected < 1e-12);
        assert!(
            (numeric - expected).abs() / expected < 1e-8,
            "numeric={numeric}"
        );
        // n=2, z=(2,0).
        let (closed, numeric) = max_tilted_density(&[2.0, 0.0], 1.0, 1.0).unwrap();
        let slack = 2.0 - 2f64.sqrt();
        let expected = (2.0 * std::f64::consts::PI).recip() * (-slack * slack / 2.0).exp();
        assert!((closed - expected).abs() / expected < 1e-12);
        assert!((numeric - expected).abs() / expected < 1e-8);
        assert!((closed - 0.134_062_4).abs() < 1e-6);
    }

    #[test]
    fn closed_and_numeric_agree_on_random_inputs() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for trial in 0..200 {
            let n = 1 + (trial % 8);
            let p_fb = rng.gen_range(0.3..3.0);
            let s2 = rng.gen_range(0.3..3.0);
            let z: Vec<f64> = (0..n).map(|_| rng.gen_range(-4.0..4.0)).collect();
            let (closed, numeric) = max_tilted_density(&z, p_fb, s2).unwrap();
            assert!(
                (closed - numeric).abs() / closed < 1e-6,
                "n={n} closed={closed} numeric={numeric}"
            );
        }
    }

    #[test]
    fn product_bound_holds_and_checks_preconditions() {
        // u = 0 satisfies the bound strictly for any z.
        assert!(check_product_lower_bound(&[1.0, -2.0], &[0.0, 0.0], 1.0, 1.0).unwrap());
        // Constraint-violating u is a precondition error.
        assert!(check_product_lower_bound(&[0.0], &[3.0], 1.0, 1.0).is_err());
        // Equality is approached by the anti-aligned full-power input.
        let z = [2.0, 1.0, -1.0];
        let zn = norm(&z);
        let radius = (3.0f64).sqrt();
        let u: Vec<f64> = z.iter().map(|v| -v * radius / zn).collect();
        let lhs = log_product_density(&z, &u, 1.0);
        let reach = zn + radius;
        let rhs = -(3.0 / 2.0) * LN_2PI - reach * reach / 2.0;
        assert!((lhs - rhs).abs() < 1e-9, "gap {}", lhs - rhs);
        assert!(check_product_lower_bound(&z, &u, 1.0, 1.0).unwrap());
    }

    #[test]
    fn r_floor_shape() {
        // Plateau value on the low-norm side, e^{-2 P_FB n / s2_FB}.
        let boundary = (10.0f64).sqrt();
        let v = r_lower_bound(boundary, 10, 1.0, 1.0);
        assert!((v - (-20.0f64).exp()).abs() / v < 1e-12);
        let v0 = r_lower_bound(0.0, 10, 1.0, 1.0);
        assert!((v0 - v).abs() / v < 1e-12);
        // Continuity across the regime boundary.
        let below = r_lower_bound(boundary * (1.0 - 1e-9), 10, 1.0, 1.0);
        let above = r_lower_bound(boundary * (1.0 + 1e-9), 10, 1.0, 1.0);
        assert!((below - above).abs() / below < 1e-6);
        // Monotone nonincreasing in the norm.
        let mut prev = f64::INFINITY;
        for i in 0..100 {
            let v = r_lower_bound(i as f64 * 0.1, 10, 1.0, 1.0);
            assert!(v <= prev);
            prev = v;
        }
        // ||z||/sqrt(n) = 2, P_FB = s2_FB = 1: e^{-4n}.
        let n = 7usize;
        let v = r_lower_bound(2.0 * (n as f64).sqrt(), n, 1.0, 1.0);
        assert!((v.ln() + 4.0 * n as f64).abs() < 1e-9);
    }
}
