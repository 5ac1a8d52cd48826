//! Oracles shared by the integration tests. Nothing here calls into the
//! propagator or the bound-state solver.

#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Dense chain Hamiltonian assembled straight from the hopping pattern.
pub fn dense_chain(b: f64, c: f64, mu: f64, n: usize) -> DMatrix<f64> {
    let mut h = DMatrix::zeros(n, n);
    h[(0, 0)] = mu;
    for j in 0..n.saturating_sub(1) {
        let t = if j == 0 { c } else { b };
        h[(j, j + 1)] = t;
        h[(j + 1, j)] = t;
    }
    h
}

/// `exp(-i H t)` by scaled Taylor series and repeated squaring.
pub fn expm_minus_i(h: &DMatrix<f64>, t: f64) -> DMatrix<Complex64> {
    let n = h.nrows();
    let a: DMatrix<Complex64> = h.map(|x| Complex64::new(0.0, -x * t));
    let norm = a.iter().map(|z| z.norm()).sum::<f64>();
    let mut squarings = 0;
    let mut scale = 1.0;
    while norm * scale > 0.25 {
        scale *= 0.5;
        squarings += 1;
    }
    let a = a * Complex64::new(scale, 0.0);
    let mut result = DMatrix::<Complex64>::identity(n, n);
    let mut term = DMatrix::<Complex64>::identity(n, n);
    for k in 1..=30 {
        term = &term * &a * Complex64::new(1.0 / k as f64, 0.0);
        result += &term;
    }
    for _ in 0..squarings {
        result = &result * &result;
    }
    result
}

/// Eigenvector of the chain for eigenvalue `lambda`, by recurrence from the
/// hard wall at site `n - 1` inward. Returns `ln |psi_j|` for `j = 0..n`.
pub fn log_eigenvector(b: f64, c: f64, n: usize, lambda: f64) -> Vec<f64> {
    let mut log = vec![0.0; n];
    let mut next = 0.0_f64; // psi_{j+1}
    let mut cur = 1.0_f64; // psi_j
    let mut offset = 0.0_f64;
    log[n - 1] = 0.0;
    for j in (1..n).rev() {
        // row j: t_{j-1} psi_{j-1} + t_j psi_{j+1} = lambda psi_j (diag 0 for j > 0)
        let left = if j == 1 { c } else { b };
        let right = if j == n - 1 { 0.0 } else { b };
        let prev = (lambda * cur - right * next) / left;
        next = cur;
        cur = prev;
        if cur.abs() > 1e100 {
            cur *= 1e-100;
            next *= 1e-100;
            offset += 100.0 * std::f64::consts::LN_10;
        }
        log[j - 1] = cur.abs().ln() + offset;
    }
    log
}

/// Least-squares slope of `y` against its index over `range`.
pub fn slope(y: &[f64], range: std::ops::Range<usize>) -> f64 {
    let xs: Vec<f64> = range.clone().map(|j| j as f64).collect();
    let ys = &y[range];
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Roots of `(C^2 - 1) x^2 + mu x - 1 = 0` by complex arithmetic, for the
/// resonance pole of a decaying chain.
pub fn quadratic_roots(mu: f64, c: f64) -> Vec<Complex64> {
    let a = c * c - 1.0;
    if a.abs() < 1e-14 {
        return vec![Complex64::new(1.0 / mu, 0.0)];
    }
    let disc = Complex64::new(mu * mu + 4.0 * a, 0.0).sqrt();
    vec![(-mu + disc) / (2.0 * a), (-mu - disc) / (2.0 * a)]
}
