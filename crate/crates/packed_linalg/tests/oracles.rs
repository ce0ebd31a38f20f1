use he_emulator::{BackendConfig, HeContext, Party, SecretKey};
use nalgebra::DMatrix;
use packed_linalg::{decode_matrix, encode_matrix, encode_vector, extract_blocks, mat_mul, mat_vec, plain};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn setup(n_slots: usize) -> (HeContext, SecretKey) {
    HeContext::with_key(BackendConfig {
        n_slots,
        ..BackendConfig::default()
    })
    .unwrap()
}

fn random_matrix(rng: &mut ChaCha8Rng, p: usize, q: usize) -> Vec<f64> {
    (0..p * q).map(|_| rng.random_range(-1.0..1.0)).collect()
}

fn integer_matrix(rng: &mut ChaCha8Rng, p: usize) -> Vec<f64> {
    (0..p * p).map(|_| rng.random_range(-9i32..=9) as f64).collect()
}

fn dense_product(a: &[f64], b: &[f64], p: usize) -> Vec<f64> {
    let ma = DMatrix::from_row_slice(p, p, a);
    let mb = DMatrix::from_row_slice(p, p, b);
    let prod = ma * mb;
    (0..p * p).map(|s| prod[(s / p, s % p)]).collect()
}

#[test]
fn permutation_identity_is_exact() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for trial in 0..100 {
        let p = 1 + trial % 8;
        let m = integer_matrix(&mut rng, p);
        let n = integer_matrix(&mut rng, p);
        assert_eq!(plain::permutation_product(&m, &n, p), dense_product(&m, &n, p), "p = {p}");
    }
}

#[test]
fn swapped_shift_pairing_is_not_a_product() {
    // pairing the row shift with sigma and the column shift with tau does
    // not reproduce MN once p >= 2
    let p = 3;
    let m: Vec<f64> = (0..9).map(|v| v as f64).collect();
    let n: Vec<f64> = (0..9).map(|v| (v * v) as f64).collect();
    let sm = plain::sigma(&m, p);
    let tn = plain::tau(&n, p);
    let mut out = vec![0.0; 9];
    let (mut a, mut b) = (sm.clone(), tn.clone());
    for _ in 0..p {
        for s in 0..9 {
            out[s] += a[s] * b[s];
        }
        a = plain::phi(&a, p);
        b = plain::psi(&b, p);
    }
    assert_ne!(out, dense_product(&m, &n, p));
}

#[test]
fn random_layout_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (ctx, sk) = setup(16);
    let m = random_matrix(&mut rng, 3, 3);
    let pm = encode_matrix(&ctx, &m, 3, 3).unwrap();
    let slots = sk.decrypt(&pm.ct, Party::Oracle);
    for i in 0..3 {
        for j in 0..3 {
            assert!((slots[i * 3 + j] - m[i * 3 + j]).abs() <= 2f64.powi(-41));
        }
    }
    assert!(slots[9..].iter().all(|&v| v == 0.0));
}

#[test]
fn encrypted_mat_mul_matches_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let tol = 2f64.powi(-40 + 6);
    for p in 1usize..=8 {
        let (ctx, sk) = setup((2 * p * p).next_power_of_two());
        for _ in 0..5 {
            let m = random_matrix(&mut rng, p, p);
            let n = random_matrix(&mut rng, p, p);
            let r = mat_mul(
                &ctx,
                &encode_matrix(&ctx, &m, p, p).unwrap(),
                &encode_matrix(&ctx, &n, p, p).unwrap(),
            )
            .unwrap();
            assert_eq!(r.level(), ctx.config().depth - 1, "depth must not depend on p");
            let got = decode_matrix(&sk, &r, Party::Oracle);
            for (g, e) in got.iter().zip(dense_product(&m, &n, p)) {
                assert!((g - e).abs() <= tol, "p = {p}: {g} vs {e}");
            }
        }
    }
}

#[test]
fn encrypted_mat_vec_matches_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let tol = 2f64.powi(-40 + 6);
    for p in 1usize..=8 {
        let (ctx, sk) = setup((p * p).next_power_of_two());
        let a = random_matrix(&mut rng, p, p);
        let y = random_matrix(&mut rng, 1, p);
        let r = mat_vec(
            &ctx,
            &encode_matrix(&ctx, &a, p, p).unwrap(),
            &encode_vector(&ctx, &y, p).unwrap(),
        )
        .unwrap();
        let got = extract_blocks(&sk.decrypt(&r, Party::Oracle), p, p);
        let expect = plain::matmul(&a, &y, p, p, 1);
        for (g, e) in got.iter().zip(expect) {
            assert!((g - e).abs() <= tol);
        }
    }
}

#[test]
fn mat_vec_on_basis_vectors_extracts_columns() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for p in 1usize..=8 {
        let (ctx, sk) = setup((p * p).next_power_of_two());
        let a = random_matrix(&mut rng, p, p);
        let pa = encode_matrix(&ctx, &a, p, p).unwrap();
        for j in 0..p {
            let mut e = vec![0.0; p];
            e[j] = 1.0;
            let r = sk.decrypt(&mat_vec(&ctx, &pa, &encode_vector(&ctx, &e, p).unwrap()).unwrap(), Party::Oracle);
            for i in 0..p {
                let expect = (a[i * p + j] * 2f64.powi(40)).round() / 2f64.powi(40);
                for k in 0..p {
                    assert_eq!(r[i * p + k], expect);
                }
            }
        }
    }
}
