#![allow(dead_code)]

use he_emulator::{BackendConfig, HeContext, SecretKey};
use helba::{BanditConfig, HelbaServer, HelbaUser};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

pub struct Toy {
    pub pool: Vec<Vec<Vec<f64>>>,
    pub theta: Vec<f64>,
    pub sigma: f64,
    pub rng: ChaCha8Rng,
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn ball_point(rng: &mut ChaCha8Rng, d: usize, radius: f64) -> Vec<f64> {
    let g: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
    let norm = dot(&g, &g).sqrt();
    let r = radius * rng.random::<f64>().powf(1.0 / d as f64);
    g.iter().map(|v| v / norm * r).collect()
}

impl Toy {
    pub fn new(seed: u64, cfg: &BanditConfig) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pool: Vec<Vec<Vec<f64>>> = (0..4)
            .map(|_| (0..cfg.arms).map(|_| ball_point(&mut rng, cfg.dim, cfg.l_bound)).collect())
            .collect();
        let dir = ball_point(&mut rng, cfg.dim, 1.0);
        let n = dot(&dir, &dir).sqrt();
        let dir: Vec<f64> = dir.iter().map(|v| v / n).collect();
        let peak = pool.iter().flatten().map(|s| dot(s, &dir).abs()).fold(0.0, f64::max);
        let theta = dir.iter().map(|v| v / peak.max(1e-12)).collect();
        Self {
            pool,
            theta,
            sigma: cfg.sigma,
            rng,
        }
    }

    pub fn s_norm(&self) -> f64 {
        dot(&self.theta, &self.theta).sqrt()
    }

    pub fn contexts(&self, t: usize) -> Vec<Vec<f64>> {
        self.pool[(t - 1) % self.pool.len()].clone()
    }

    pub fn reward(&mut self, s: &[f64]) -> f64 {
        let noise = if self.sigma > 0.0 {
            Normal::new(0.0, self.sigma).unwrap().sample(&mut self.rng)
        } else {
            0.0
        };
        (dot(s, &self.theta) + noise).clamp(-1.0, 1.0)
    }
}

pub fn backend(seed: u64) -> BackendConfig {
    BackendConfig {
        n_slots: 8,
        seed,
        ..BackendConfig::default()
    }
}

/// Server, user and an oracle key for test-side decryption.
pub fn parties(cfg: &BanditConfig, seed: u64) -> (HelbaServer, HelbaUser, SecretKey) {
    let (ctx, sk) = HeContext::with_key(backend(seed)).unwrap();
    let (_, oracle) = HeContext::with_key(backend(seed)).unwrap();
    let user = HelbaUser::new(ctx.fork(seed ^ 0x5eed), sk, cfg.dim, cfg.arms);
    let server = HelbaServer::new(ctx, cfg.clone()).unwrap();
    (server, user, oracle)
}

pub fn toy_cfg(s: f64) -> BanditConfig {
    BanditConfig {
        s_bound: Some(s),
        ..BanditConfig::default()
    }
}

/// Plain Cholesky-free solve of a small SPD system via Gaussian elimination.
pub fn solve(a: &[f64], b: &[f64], d: usize) -> Vec<f64> {
    let mut m = a.to_vec();
    let mut x = b.to_vec();
    for c in 0..d {
        for r in c + 1..d {
            let f = m[r * d + c] / m[c * d + c];
            for k in c..d {
                m[r * d + k] -= f * m[c * d + k];
            }
            x[r] -= f * x[c];
        }
    }
    for c in (0..d).rev() {
        for k in c + 1..d {
            x[c] -= m[c * d + k] * x[k];
        }
        x[c] /= m[c * d + c];
    }
    x
}
