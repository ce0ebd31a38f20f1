use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn unit(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    loop {
        let g: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        let n = dot(&g, &g).sqrt();
        if n > 1e-12 {
            return g.iter().map(|v| v / n).collect();
        }
    }
}

/// Uniform point of the radius-`l` ball in R^d.
pub fn ball_point(rng: &mut ChaCha8Rng, d: usize, l: f64) -> Vec<f64> {
    let r = l * rng.random::<f64>().powf(1.0 / d as f64);
    unit(rng, d).into_iter().map(|v| v * r).collect()
}

/// Cycled pool of context sets, a hidden parameter and Gaussian reward noise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    pub context_pool: Vec<Vec<Vec<f64>>>,
    pub theta_star: Vec<f64>,
    pub sigma: f64,
    pub rng_seed: u64,
}

impl Environment {
    /// `pool` context sets of `arms` vectors drawn uniformly from the
    /// radius-`l` ball; theta* is a random direction scaled so that
    /// |<s, theta*>| <= 1 over the pool.
    pub fn generate(dim: usize, arms: usize, pool: usize, l: f64, sigma: f64, seed: u64) -> Result<Self> {
        if dim == 0 || arms == 0 || pool == 0 {
            return Err(HarnessError::Config("dim, arms and pool size must be positive".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let context_pool: Vec<Vec<Vec<f64>>> = (0..pool)
            .map(|_| (0..arms).map(|_| ball_point(&mut rng, dim, l)).collect())
            .collect();
        let dir = unit(&mut rng, dim);
        let peak = context_pool
            .iter()
            .flatten()
            .map(|s| dot(s, &dir).abs())
            .fold(0.0, f64::max);
        let theta_star = dir.iter().map(|v| v / peak.max(1.0e-12)).collect();
        Ok(Self {
            context_pool,
            theta_star,
            sigma,
            rng_seed: seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(1),
        })
    }

    pub fn theta_norm(&self) -> f64 {
        dot(&self.theta_star, &self.theta_star).sqrt()
    }

    pub fn contexts(&self, t: usize) -> &[Vec<f64>] {
        &self.context_pool[(t - 1) % self.context_pool.len()]
    }

    pub fn mean_reward(&self, s: &[f64]) -> f64 {
        dot(s, &self.theta_star)
    }

    /// max_a <s_a, theta*> - <s_arm, theta*>.
    pub fn instant_regret(&self, t: usize, arm: usize) -> f64 {
        let ctxs = self.contexts(t);
        let best = ctxs.iter().map(|s| self.mean_reward(s)).fold(f64::NEG_INFINITY, f64::max);
        best - self.mean_reward(&ctxs[arm])
    }

    /// Independent noise stream for one episode.
    pub fn noise(&self) -> RewardNoise {
        RewardNoise {
            rng: ChaCha8Rng::seed_from_u64(self.rng_seed),
            normal: Normal::new(0.0, self.sigma.max(0.0)).expect("finite sigma"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RewardNoise {
    rng: ChaCha8Rng,
    normal: Normal<f64>,
}

impl RewardNoise {
    /// Noisy reward clipped to [-1, 1]; one draw per step whatever the arm.
    pub fn reward(&mut self, mean: f64) -> f64 {
        (mean + self.normal.sample(&mut self.rng)).clamp(-1.0, 1.0)
    }
}
