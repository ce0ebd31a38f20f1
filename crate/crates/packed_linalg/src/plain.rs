//! Plaintext versions of the packing permutations, on row-major p x p
//! matrices.

/// sigma(M)_{i,j} = M_{i,[i+j]}
pub fn sigma(m: &[f64], p: usize) -> Vec<f64> {
    gather(p, |i, j| i * p + (i + j) % p, m)
}

/// tau(M)_{i,j} = M_{[i+j],j}
pub fn tau(m: &[f64], p: usize) -> Vec<f64> {
    gather(p, |i, j| ((i + j) % p) * p + j, m)
}

/// psi(M)_{i,j} = M_{i,[j+1]} (column shift)
pub fn psi(m: &[f64], p: usize) -> Vec<f64> {
    gather(p, |i, j| i * p + (j + 1) % p, m)
}

/// phi(M)_{i,j} = M_{[i+1],j} (row shift)
pub fn phi(m: &[f64], p: usize) -> Vec<f64> {
    gather(p, |i, j| ((i + 1) % p) * p + j, m)
}

fn gather(p: usize, src: impl Fn(usize, usize) -> usize, m: &[f64]) -> Vec<f64> {
    assert_eq!(m.len(), p * p, "expected a {p}x{p} matrix");
    (0..p * p).map(|s| m[src(s / p, s % p)]).collect()
}

fn iterate(f: fn(&[f64], usize) -> Vec<f64>, m: &[f64], p: usize, k: usize) -> Vec<f64> {
    (0..k).fold(m.to_vec(), |acc, _| f(&acc, p))
}

/// Sum over k of (psi^k o sigma(M)) .* (phi^k o tau(N)), which equals MN.
pub fn permutation_product(m: &[f64], n: &[f64], p: usize) -> Vec<f64> {
    let sm = sigma(m, p);
    let tn = tau(n, p);
    let mut out = vec![0.0; p * p];
    for k in 0..p {
        let a = iterate(psi, &sm, p, k);
        let b = iterate(phi, &tn, p, k);
        for (o, (x, y)) in out.iter_mut().zip(a.iter().zip(&b)) {
            *o += x * y;
        }
    }
    out
}

/// Row-major p x q times q x r product.
pub fn matmul(a: &[f64], b: &[f64], p: usize, q: usize, r: usize) -> Vec<f64> {
    let mut out = vec![0.0; p * r];
    for i in 0..p {
        for k in 0..q {
            for j in 0..r {
                out[i * r + j] += a[i * q + k] * b[k * r + j];
            }
        }
    }
    out
}

pub fn identity(p: usize) -> Vec<f64> {
    let mut m = vec![0.0; p * p];
    for i in 0..p {
        m[i * p + i] = 1.0;
    }
    m
}
