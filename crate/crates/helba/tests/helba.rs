mod common;

use common::*;
use he_emulator::{decrypt_audit, Ciphertext, HeContext, Party, SecretKey};
use he_kernels::params::sqrt_iterate;
use helba::formulas::{
    eps_inverse, eps_j, rho_max, selection_slack, sqrt_bounds, trace_scale,
};
use helba::{
    beta_tilde, play_step, play_step_with, BanditConfig, BatchTrigger, HelbaServer, HelbaState,
    HelbaUser,
};
use packed_linalg::{encode_matrix, encode_vector, PackedVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn dec0(sk: &SecretKey, ct: &Ciphertext) -> f64 {
    sk.decrypt(ct, Party::Oracle)[0]
}

fn state_with(ctx: &HeContext, cfg: &BanditConfig, a_bar: &[f64], omega: &[f64], t: usize, t_j: usize) -> HelbaState {
    let d = cfg.dim;
    let mut lam = vec![0.0; d * d];
    for i in 0..d {
        lam[i * d + i] = cfg.lambda;
    }
    HelbaState {
        lambda_check: encode_matrix(ctx, &lam, d, d).unwrap(),
        g_check: encode_vector(ctx, &vec![0.0; d], d).unwrap(),
        a_bar: encode_matrix(ctx, a_bar, d, d).unwrap(),
        omega: ctx.encrypt(omega).unwrap(),
        t_j,
        j: 1,
        t,
        trace_acc: None,
    }
}

fn resumed(cfg: &BanditConfig, a_bar: &[f64], omega: &[f64], t: usize, t_j: usize) -> (HelbaServer, HelbaUser, SecretKey) {
    let (ctx, sk) = HeContext::with_key(backend(7)).unwrap();
    let (_, oracle) = HeContext::with_key(backend(7)).unwrap();
    let state = state_with(&ctx, cfg, a_bar, omega, t, t_j);
    let user = HelbaUser::new(ctx.fork(99), sk, cfg.dim, cfg.arms);
    (HelbaServer::with_state(ctx, cfg.clone(), state).unwrap(), user, oracle)
}

/// Plaintext replica of the index pipeline on the decrypted state.
fn plain_index(cfg: &BanditConfig, a_bar: &[f64], omega: &[f64], x: &[f64], t: usize, t_j: usize) -> f64 {
    let d = cfg.dim;
    let quad: f64 = (0..d)
        .map(|i| x[i] * (0..d).map(|j| a_bar[i * d + j] * x[j]).sum::<f64>())
        .sum();
    let (c1, c2) = sqrt_bounds(t_j, cfg);
    let sp = he_kernels::SqrtParams::new(c1, c2, 1.0 / t as f64).unwrap();
    let root = sqrt_iterate(quad + c1, c2, sp.k0);
    dot(omega, x) + beta_tilde(t, t_j, cfg).unwrap() * (root + 1.0 / t as f64)
}

#[test]
fn scalar_index_matches_hand_computation() {
    let cfg = BanditConfig {
        dim: 1,
        arms: 1,
        ..toy_cfg(1.0)
    };
    let (mut server, mut user, oracle) = resumed(&cfg, &[1.0], &[2.0], 1, 1);
    let x = user.encrypt_context(&[3.0]).unwrap();
    let (beta, rho) = server.compute_indexes(&[x], &mut user).unwrap();
    let got = dec0(&oracle, &rho[0]);
    let want = plain_index(&cfg, &[1.0], &[2.0], &[3.0], 1, 1);
    assert!((got - want).abs() < 1e-8, "{got} vs {want}");
    let exact = 6.0 + beta * ((9.0 + eps_j(1, &cfg)).sqrt() + 1.0);
    assert!((got - exact).abs() <= beta * 1.0 + 1e-8, "within the sqrt precision 1/t");
}

#[test]
fn zero_estimate_leaves_only_the_bonus() {
    let cfg = toy_cfg(1.0);
    let (mut server, mut user, oracle) = resumed(&cfg, &[1.0, 0.0, 0.0, 1.0], &[0.0; 4], 5, 5);
    let ctxs = [vec![1.0, -2.0], vec![0.5, 0.5]];
    let xs: Vec<PackedVector> = ctxs.iter().map(|s| user.encrypt_context(s).unwrap()).collect();
    let (_, rho) = server.compute_indexes(&xs, &mut user).unwrap();
    for (s, r) in ctxs.iter().zip(&rho) {
        let want = plain_index(&cfg, &[1.0, 0.0, 0.0, 1.0], &[0.0, 0.0], s, 5, 5);
        assert!((dec0(&oracle, r) - want).abs() < 1e-8);
    }
}

#[test]
fn rescale_endpoints_and_order() {
    let cfg = toy_cfg(1.0);
    let (mut server, _, oracle) = resumed(&cfg, &[1.0, 0.0, 0.0, 1.0], &[0.0; 4], 10, 10);
    let ctx = server.context().fork(1);
    let beta = beta_tilde(10, 10, &cfg).unwrap();
    let top = rho_max(10, beta, &cfg);
    let lo = server.rescale_indexes(&ctx.encrypt(&[-1.0; 8]).unwrap(), None, beta).unwrap();
    let hi = server.rescale_indexes(&ctx.encrypt(&[top; 8]).unwrap(), None, beta).unwrap();
    assert!(dec0(&oracle, &lo).abs() < 1e-9);
    assert!((dec0(&oracle, &hi) - 1.0).abs() < 1e-9);
    let a = server.rescale_indexes(&ctx.encrypt(&[0.3; 8]).unwrap(), None, beta).unwrap();
    let b = server.rescale_indexes(&ctx.encrypt(&[0.2; 8]).unwrap(), None, beta).unwrap();
    assert!(dec0(&oracle, &a) > dec0(&oracle, &b));
}

fn choose_from(values: &[f64], t: usize) -> usize {
    let cfg = BanditConfig {
        arms: values.len(),
        ..toy_cfg(1.0)
    };
    let (mut server, mut user, _) = resumed(&cfg, &[1.0, 0.0, 0.0, 1.0], &[0.0; 4], t, t);
    let ctx = server.context().fork(1);
    let cts = values.iter().map(|&v| ctx.encrypt(&[v; 8]).unwrap()).collect();
    let b = server.select_arm(cts, &mut user).unwrap();
    user.decode_action(&b, t).unwrap()
}

#[test]
fn select_arm_examples() {
    assert_eq!(choose_from(&[0.3], 1), 0);
    assert_eq!(choose_from(&[0.9, 0.1], 2), 0);
    assert_eq!(choose_from(&[0.1, 0.9], 2), 1);
}

#[test]
fn near_tie_selection_within_corollary_slack() {
    let t = 100;
    let cfg = toy_cfg(1.0);
    let beta = beta_tilde(t, t, &cfg).unwrap();
    let span = rho_max(t, beta, &cfg) - cfg.r_min;
    let vals = [0.500, 0.501];
    let a = choose_from(&vals, t);
    assert!(span * (0.501 - vals[a]) <= selection_slack(t, beta, &cfg));
}

#[test]
fn observe_examples() {
    let cfg = toy_cfg(1.0);
    let (mut server, mut user, oracle) = resumed(&cfg, &[1.0, 0.0, 0.0, 1.0], &[0.0; 4], 1, 1);
    let x = user.encrypt_context(&[1.0, 2.0]).unwrap();
    let zero_y = user.encrypt_reward(0.0).unwrap();
    server.observe(&x, &zero_y, &mut user).unwrap();
    assert!(oracle.decrypt(&server.state().g_check.ct, Party::Oracle).iter().all(|v| v.abs() < 1e-12));

    let before_l = oracle.decrypt(&server.state().lambda_check.ct, Party::Oracle);
    let before_g = oracle.decrypt(&server.state().g_check.ct, Party::Oracle);
    let x0 = user.encrypt_context(&[0.0, 0.0]).unwrap();
    let y = user.encrypt_reward(0.7).unwrap();
    server.observe(&x0, &y, &mut user).unwrap();
    assert_eq!(oracle.decrypt(&server.state().lambda_check.ct, Party::Oracle), before_l);
    assert_eq!(oracle.decrypt(&server.state().g_check.ct, Party::Oracle), before_g);

    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut lam = [1.0 + 1.0, 2.0, 2.0, 1.0 + 4.0];
    let mut g = [0.0; 2];
    for _ in 0..20 {
        let s = ball_point(&mut rng, 2, 5.5);
        let r: f64 = rng.random_range(-1.0..1.0);
        for i in 0..2 {
            g[i] += r * s[i];
            for j in 0..2 {
                lam[i * 2 + j] += s[i] * s[j];
            }
        }
        let x = user.encrypt_context(&s).unwrap();
        let y = user.encrypt_reward(r).unwrap();
        server.observe(&x, &y, &mut user).unwrap();
    }
    let got_l = oracle.decrypt(&server.state().lambda_check.ct, Party::Oracle);
    let got_g = oracle.decrypt(&server.state().g_check.ct, Party::Oracle);
    for i in 0..4 {
        assert!((got_l[i] - lam[i]).abs() < 1e-9);
    }
    for i in 0..2 {
        assert!((got_g[i] - g[i]).abs() < 1e-9 && (got_g[i + 2] - g[i]).abs() < 1e-9);
    }
}

#[test]
fn geometric_trigger_fires_in_the_clear() {
    let cfg = toy_cfg(1.0);
    let (mut server, mut user, _) = resumed(&cfg, &[1.0, 0.0, 0.0, 1.0], &[0.0; 4], 11, 10);
    let before = decrypt_audit().user;
    assert_eq!(server.check_batch_end(&mut user).unwrap(), Some(BatchTrigger::Geometric));
    assert_eq!(decrypt_audit().user, before);
}

fn trace_check(norm: f64, samples: usize) -> (Option<BatchTrigger>, f64) {
    let cfg = BanditConfig {
        eta: 10.0,
        ..toy_cfg(1.0)
    };
    let t_j = 10;
    let t = t_j + samples - 1;
    let (mut server, mut user, _) = resumed(&cfg, &[1.0, 0.0, 0.0, 1.0], &[0.0; 4], t, t_j);
    let mut plain = 0.0;
    for k in 0..samples {
        let a = k as f64;
        let s = [norm * a.cos(), norm * a.sin()];
        plain += dot(&s, &s);
        let x = user.encrypt_context(&s).unwrap();
        let y = user.encrypt_reward(0.0).unwrap();
        server.observe(&x, &y, &mut user).unwrap();
    }
    (server.check_batch_end(&mut user).unwrap(), plain)
}

#[test]
fn trace_trigger_matches_plain_condition() {
    let cfg = toy_cfg(1.0);
    assert_eq!(trace_check(0.0, 1).0, None);
    for (norm, samples) in [(0.3, 1), (0.5, 3), (0.2, 10), (0.95, 1), (1.05, 1), (0.6, 3), (5.5, 1), (4.0, 5)] {
        let (got, plain) = trace_check(norm, samples);
        // The comparator precision 1/(4 t scale) on trace/scale is 1/(4t) on the trace.
        let t = 9 + samples;
        let slack = trace_scale(samples, &cfg) * (1.0 / (4.0 * t as f64 * trace_scale(samples, &cfg)));
        if plain >= cfg.c_trace + slack {
            assert_eq!(got, Some(BatchTrigger::Trace), "trace {plain}");
        } else if plain <= cfg.c_trace - slack {
            assert_eq!(got, None, "trace {plain}");
        }
    }
}

#[test]
fn refresh_without_data_restores_prior() {
    let cfg = toy_cfg(1.0);
    let (mut server, mut user, oracle) = resumed(&cfg, &[1.0, 0.0, 0.0, 1.0], &[0.0; 4], 1, 1);
    server.refresh(&mut user).unwrap();
    let a = oracle.decrypt(&server.state().a_bar.ct, Party::Oracle);
    let w = oracle.decrypt(&server.state().omega, Party::Oracle);
    let eps = eps_inverse(2, &cfg);
    for (i, want) in [1.0, 0.0, 0.0, 1.0].iter().enumerate() {
        assert!((a[i] - want / cfg.lambda).abs() <= eps);
    }
    assert!(w.iter().all(|v| v.abs() < 1e-9));
    assert_eq!(server.state().t_j, 2);
    assert_eq!(server.update_count(), 2);
}

#[test]
fn refreshed_estimate_tracks_ridge_solution() {
    let cfg = toy_cfg(1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for batch in 0..20 {
        let n = rng.random_range(1..=129usize);
        let (mut server, mut user, oracle) = resumed(&cfg, &[1.0, 0.0, 0.0, 1.0], &[0.0; 4], n, 1);
        let mut v = [cfg.lambda, 0.0, 0.0, cfg.lambda];
        let mut g = [0.0; 2];
        for _ in 0..n {
            let s = ball_point(&mut rng, 2, cfg.l_bound);
            let r: f64 = rng.random_range(-1.0..1.0);
            for i in 0..2 {
                g[i] += r * s[i];
                for j in 0..2 {
                    v[i * 2 + j] += s[i] * s[j];
                }
            }
            let x = user.encrypt_context(&s).unwrap();
            let y = user.encrypt_reward(r).unwrap();
            server.observe(&x, &y, &mut user).unwrap();
        }
        server.refresh(&mut user).unwrap();
        let ridge = solve(&v, &g, 2);
        let w = oracle.decrypt(&server.state().omega, Party::Oracle);
        let e = [w[0] - ridge[0], w[2] - ridge[1]];
        let err = (e[0] * (v[0] * e[0] + v[1] * e[1]) + e[1] * (v[2] * e[0] + v[3] * e[1])).sqrt();
        let bound = ((n + 1) as f64).powf(-0.5);
        assert!(err <= bound + 1e-6, "batch {batch}, n = {n}: {err} > {bound}");
    }
}

/// Plain design matrix inverse applied as a norm: ||u||_V.
fn v_norm(v: &[f64], u: &[f64]) -> f64 {
    (u[0] * (v[0] * u[0] + v[1] * u[1]) + u[1] * (v[2] * u[0] + v[3] * u[1])).sqrt()
}

struct Audit {
    covered_runs: usize,
    optimism_checked: usize,
    optimism_failures: usize,
    cor2_failures: usize,
}

/// Runs one episode and checks confidence coverage, optimism, the argmax
/// bound, isolation of the batch state and the batch-count bound.
fn audited_run(seed: u64, horizon: usize, audit: &mut Audit) {
    let base = BanditConfig {
        horizon,
        ..toy_cfg(1.0)
    };
    let mut toy = Toy::new(seed, &base);
    let cfg = BanditConfig {
        s_bound: Some(toy.s_norm()),
        ..base
    };
    let (mut server, mut user, oracle) = parties(&cfg, seed);
    let d = cfg.dim;
    let mut v_all = vec![cfg.lambda, 0.0, 0.0, cfg.lambda];
    let mut v_batch = v_all.clone();
    let mut covered = true;
    let mut frozen: Option<(Ciphertext, Ciphertext)> = None;
    for t in 1..=horizon {
        let ctxs = toy.contexts(t);
        let t_j = server.state().t_j;
        let snapshot = (server.state().a_bar.ct.clone(), server.state().omega.clone());
        if let Some(prev) = &frozen {
            assert!(prev == &snapshot, "batch state changed without a refresh");
        }
        let w = oracle.decrypt(&server.state().omega, Party::Oracle);
        let est: Vec<f64> = (0..d).map(|i| w[i * d]).collect();
        let diff: Vec<f64> = toy.theta.iter().zip(&est).map(|(a, b)| a - b).collect();
        let beta = beta_tilde(t, t_j, &cfg).unwrap();
        let inside = v_norm(&v_batch, &diff) <= beta;
        covered &= inside;
        let mut rho = Vec::new();
        let rep = play_step_with(
            &mut server,
            &mut user,
            &ctxs,
            |a| toy.reward(&ctxs[a]),
            |c| rho = c.rho.iter().map(|r| dec0(&oracle, r)).collect(),
        )
        .unwrap();
        if inside {
            for (s, r) in ctxs.iter().zip(&rho) {
                audit.optimism_checked += 1;
                if *r < dot(&toy.theta, s) {
                    audit.optimism_failures += 1;
                }
            }
        }
        let best = rho.iter().cloned().fold(f64::MIN, f64::max);
        if rho[rep.arm] < best - selection_slack(t, beta, &cfg) {
            audit.cor2_failures += 1;
        }
        let s = &ctxs[rep.arm];
        for i in 0..d {
            for j in 0..d {
                v_all[i * d + j] += s[i] * s[j];
            }
        }
        if rep.batch_end.is_some() {
            v_batch = v_all.clone();
            frozen = None;
        } else {
            frozen = Some(snapshot);
        }
    }
    assert!((server.update_count() as f64) <= cfg.batch_bound());
    assert_eq!(server.telemetry().mismatches().count(), 0);
    if covered {
        audit.covered_runs += 1;
    }
}

#[test]
fn protocol_invariants_over_many_runs() {
    let server_before = decrypt_audit().server;
    let mut audit = Audit {
        covered_runs: 0,
        optimism_checked: 0,
        optimism_failures: 0,
        cor2_failures: 0,
    };
    let runs = 200;
    for seed in 0..runs {
        audited_run(seed, 60, &mut audit);
    }
    // One-sided binomial test at p = 0.01 against a 95% coverage rate:
    // 95% of 200 minus 2.326 standard deviations.
    let floor = 0.95 * runs as f64 - 2.326 * (runs as f64 * 0.95 * 0.05).sqrt();
    assert!(audit.covered_runs as f64 >= floor, "{} of {runs} runs covered", audit.covered_runs);
    assert!(audit.optimism_checked >= 100);
    assert_eq!(audit.optimism_failures, 0);
    assert_eq!(audit.cor2_failures, 0);
    assert_eq!(decrypt_audit().server, server_before);
}

#[test]
fn toy_config_full_horizon() {
    let cfg0 = toy_cfg(1.0);
    let mut toy = Toy::new(3, &cfg0);
    let cfg = toy_cfg(toy.s_norm());
    let (mut server, mut user, _) = parties(&cfg, 3);
    for t in 1..=cfg.horizon {
        let ctxs = toy.contexts(t);
        play_step(&mut server, &mut user, &ctxs, |a| toy.reward(&ctxs[a])).unwrap();
    }
    let tel = server.telemetry();
    assert_eq!(tel.mismatches().count(), 0);
    assert!(tel.calls.iter().all(|c| c.output_level <= 100));
    assert!(server.update_count() as f64 <= cfg.batch_bound());
    assert_eq!(tel.batch_ends.len() + 1, server.update_count());
    assert!(tel.batch_ends.iter().all(|b| b.t < cfg.horizon));
    assert!(play_step(&mut server, &mut user, &toy.contexts(131), |_| 0.0).is_err());
}

#[test]
fn depth_exhaustion_is_attributed() {
    let cfg = toy_cfg(1.0);
    let mut backend = backend(1);
    backend.depth = 30;
    let (ctx, sk) = HeContext::with_key(backend).unwrap();
    let mut user = HelbaUser::new(ctx.fork(2), sk, 2, 2);
    let mut server = HelbaServer::new(ctx, cfg).unwrap();
    let ctxs = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
    let err = play_step(&mut server, &mut user, &ctxs, |_| 0.0).unwrap_err();
    assert!(matches!(err, helba::HelbaError::Kernel { t: 1, .. }), "{err}");
}

#[test]
fn missing_parameter_bound_is_a_config_error() {
    let (ctx, _) = HeContext::with_key(backend(0)).unwrap();
    assert!(HelbaServer::new(ctx, BanditConfig::default()).is_err());
}
