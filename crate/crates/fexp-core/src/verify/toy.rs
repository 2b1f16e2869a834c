//! Tiny explicit coding schemes for falsification testing of the converse
//! lemmas. The encoding maps are clipped affine functions, so all densities
//! are explicitly computable and typical-set membership is decidable, while
//! the feedback maps satisfy the almost-sure power constraint by
//! construction (the clip magnitudes are budgeted against `n * fb_power`).

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::gaussian::log_normal_pdf;
use crate::{Error, Result};

/// `v -> clamp(bias + <weights, v>, -clip, clip)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClippedAffine {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub clip: f64,
}

impl ClippedAffine {
    pub fn constant(value: f64, clip: f64) -> Self {
        ClippedAffine {
            weights: Vec::new(),
            bias: value,
            clip,
        }
    }

    pub fn eval(&self, inputs: &[f64]) -> f64 {
        debug_assert_eq!(inputs.len(), self.weights.len());
        let v = self.bias
            + self
                .weights
                .iter()
                .zip(inputs)
                .map(|(w, x)| w * x)
                .sum::<f64>();
        v.clamp(-self.clip, self.clip)
    }
}

/// Sizes of the typical output/feedback sets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TypicalSetParams {
    pub alpha1: f64,
    pub alpha2: f64,
    pub beta1: f64,
    pub beta2: f64,
}

impl TypicalSetParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha1 > 0.0 && self.alpha2 > 0.0 && self.beta1 > 0.0 && self.beta2 > 0.0) {
            return Err(Error::domain("typical-set parameters must be positive"));
        }
        Ok(())
    }
}

/// A complete blocklength-`n` toy code: per-hypothesis forward maps
/// `x_k = f_k(nu, z^{k-1})` and feedback maps `u_k = g_k(y^k)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToyEncoders {
    pub n: usize,
    /// `forward[nu][k]` consumes the first `k` feedback outputs.
    pub forward: [Vec<ClippedAffine>; 2],
    /// `feedback[k]` consumes the outputs up to and including time `k`.
    pub feedback: Vec<ClippedAffine>,
    pub fb_power: f64,
}

impl ToyEncoders {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.n > 4 {
            return Err(Error::config("toy encoders support 1 <= n <= 4"));
        }
        if !(self.fb_power > 0.0) {
            return Err(Error::config("toy feedback power must be positive"));
        }
        for maps in &self.forward {
            if maps.len() != self.n {
                return Err(Error::config("need one forward map per channel use"));
            }
            for (k, map) in maps.iter().enumerate() {
                if map.weights.len() != k {
                    return Err(Error::config("forward map arity mismatch"));
                }
            }
        }
        if self.feedback.len() != self.n {
            return Err(Error::config("need one feedback map per channel use"));
        }
        let mut clip_energy = 0.0;
        for (k, map) in self.feedback.iter().enumerate() {
            if map.weights.len() != k + 1 {
                return Err(Error::config("feedback map arity mismatch"));
            }
            clip_energy += map.clip * map.clip;
        }
        if clip_energy > self.n as f64 * self.fb_power * (1.0 + 1e-12) {
            return Err(Error::config(
                "feedback clips violate the almost-sure power budget",
            ));
        }
        Ok(())
    }

    /// Draw a random toy code whose feedback maps respect the power budget.
    pub fn random(n: usize, fb_power: f64, rng: &mut ChaCha8Rng) -> Result<ToyEncoders> {
        if n == 0 || n > 4 {
            return Err(Error::config("toy encoders support 1 <= n <= 4"));
        }
        fn gen_map(rng: &mut ChaCha8Rng, arity: usize, clip: f64) -> ClippedAffine {
            ClippedAffine {
                weights: (0..arity).map(|_| rng.gen_range(-1.0..1.0)).collect(),
                bias: rng.gen_range(-1.5..1.5),
                clip,
            }
        }
        let forward0: Vec<ClippedAffine> = (0..n).map(|k| gen_map(rng, k, 3.0)).collect();
        let forward1: Vec<ClippedAffine> = (0..n).map(|k| gen_map(rng, k, 3.0)).collect();
        // Split the clip budget unevenly across the feedback maps.
        let raw: Vec<f64> = (0..n).map(|_| rng.gen_range(0.2..1.0)).collect();
        let total: f64 = raw.iter().sum();
        let usage = rng.gen_range(0.6..1.0);
        let mut feedback = Vec::with_capacity(n);
        for (k, r) in raw.iter().enumerate() {
            let clip = (n as f64 * fb_power * usage * r / total).sqrt();
            feedback.push(gen_map(rng, k + 1, clip));
        }
        let enc = ToyEncoders {
            n,
            forward: [forward0, forward1],
            feedback,
            fb_power,
        };
        enc.validate()?;
        Ok(enc)
    }

    /// Forward inputs `x_k = f_k(nu, z^{k-1})` for a full feedback record.
    pub fn forward_inputs(&self, hypothesis: bool, z: &[f64]) -> Vec<f64> {
        let maps = &self.forward[usize::from(hypothesis)];
        (0..self.n).map(|k| maps[k].eval(&z[..k])).collect()
    }

    /// Feedback inputs `u_k = g_k(y^k)`.
    pub fn feedback_inputs(&self, y: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|k| self.feedback[k].eval(&y[..=k]))
            .collect()
    }

    pub fn in_t_y(&self, ts: &TypicalSetParams, y: &[f64]) -> bool {
        let n = self.n as f64;
        let norm2: f64 = y.iter().map(|v| v * v).sum();
        if norm2 >= n * ts.alpha1 * ts.alpha1 {
            return false;
        }
        let u_energy: f64 = self.feedback_inputs(y).iter().map(|v| v * v).sum();
        u_energy < n * ts.alpha2 * ts.alpha2
    }

    pub fn in_t_z0(&self, ts: &TypicalSetParams, z: &[f64]) -> bool {
        let n = self.n as f64;
        let norm2: f64 = z.iter().map(|v| v * v).sum();
        if norm2 >= n * ts.beta1 * ts.beta1 {
            return false;
        }
        let x_energy: f64 = self.forward_inputs(false, z).iter().map(|v| v * v).sum();
        x_energy < n * ts.beta2 * ts.beta2
    }

    /// `ln p_nu(y, z)`: product of the per-use forward and feedback channel
    /// densities induced by the code.
    pub fn log_joint_density(
        &self,
        hypothesis: bool,
        y: &[f64],
        z: &[f64],
        sigma2_fwd: f64,
        sigma2_fb: f64,
    ) -> f64 {
        let x = self.forward_inputs(hypothesis, z);
        let u = self.feedback_inputs(y);
        let mut log_p = 0.0;
        for k in 0..self.n {
            log_p += log_normal_pdf(y[k], x[k], sigma2_fwd);
            log_p += log_normal_pdf(z[k], u[k], sigma2_fb);
        }
        log_p
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn clipped_affine_clamps() {
        let m = ClippedAffine {
            weights: vec![2.0],
            bias: 0.5,
            clip: 1.0,
        };
        assert_eq!(m.eval(&[10.0]), 1.0);
        assert_eq!(m.eval(&[-10.0]), -1.0);
        assert_eq!(m.eval(&[0.1]), 0.7);
    }

    #[test]
    fn random_encoders_respect_the_budget() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in 1..=4 {
            for _ in 0..20 {
                let enc = ToyEncoders::random(n, 1.3, &mut rng).unwrap();
                enc.validate().unwrap();
                // Brute check on random inputs: feedback energy never exceeds
                // n * fb_power.
                for _ in 0..50 {
                    let y: Vec<f64> = (0..n).map(|_| rng.gen_range(-20.0..20.0)).collect();
                    let u = enc.feedback_inputs(&y);
                    let e: f64 = u.iter().map(|v| v * v).sum();
                    assert!(e <= n as f64 * 1.3 + 1e-9);
                }
            }
        }
        assert!(ToyEncoders::random(5, 1.0, &mut rng).is_err());
    }

    #[test]
    fn membership_checks() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let enc = ToyEncoders::random(3, 1.0, &mut rng).unwrap();
        let ts = TypicalSetParams {
            alpha1: 2.0,
            alpha2: 2.0,
            beta1: 2.0,
            beta2: 4.0,
        };
        assert!(enc.in_t_y(&ts, &[0.0, 0.0, 0.0]));
        // A vector with norm^2 >= n alpha1^2 is outside regardless of the
        // feedback maps.
        assert!(!enc.in_t_y(&ts, &[10.0, 0.0, 0.0]));
        assert!(enc.in_t_z0(&ts, &[0.0, 0.0, 0.0]));
        assert!(!enc.in_t_z0(&ts, &[0.0, 4.0, 0.0]));
    }
}
