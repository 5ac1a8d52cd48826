//! Chebyshev expansion of `exp(-i H t)` for a symmetric tridiagonal `H`.
//!
//! With `H = c + r G`, `spec(G) ⊂ [-1, 1]`:
//! `exp(-i H t) = exp(-i c t) * sum_k (2 - δ_k0) (-i)^k J_k(r t) T_k(G)`.

use num_complex::Complex64;

use crate::chain::ChainHamiltonian;

/// Largest `|r dt|` handled in one expansion; longer intervals are split.
pub(crate) const MAX_ARGUMENT: f64 = 20.0;

const COEFF_CUTOFF: f64 = 1e-18;

/// Bessel functions `J_0(x) ..= J_kmax(x)` by Miller's backward recurrence,
/// normalized with `J_0 + 2 sum J_{2k} = 1`.
pub(crate) fn bessel_j_sequence(x: f64, kmax: usize) -> Vec<f64> {
    let mut out = vec![0.0; kmax + 1];
    if x == 0.0 {
        out[0] = 1.0;
        return out;
    }
    let ax = x.abs();
    let order = (kmax as f64).max(ax);
    let mut start = order.ceil() as usize + 20 + (40.0 * order).sqrt().ceil() as usize;
    start += start % 2;

    let mut next = 0.0; // J_{k+1}
    let mut cur = 1e-300; // J_k
    let mut even_sum = 0.0;
    for k in (1..=start).rev() {
        if k <= kmax {
            out[k] = cur;
        }
        if k % 2 == 0 {
            even_sum += cur;
        }
        let prev = (2.0 * k as f64 / ax) * cur - next;
        next = cur;
        cur = prev;
        if cur.abs() > 1e250 {
            cur *= 1e-250;
            next *= 1e-250;
            even_sum *= 1e-250;
            for v in out.iter_mut() {
                *v *= 1e-250;
            }
        }
    }
    out[0] = cur;
    let norm = cur + 2.0 * even_sum;
    for v in out.iter_mut() {
        *v /= norm;
    }
    if x < 0.0 {
        for (k, v) in out.iter_mut().enumerate() {
            if k % 2 == 1 {
                *v = -*v;
            }
        }
    }
    out
}

/// Expansion coefficients for one time step.
#[derive(Debug, Clone)]
pub(crate) struct StepCoefficients {
    dt: f64,
    phase: Complex64,
    coeffs: Vec<Complex64>,
}

impl StepCoefficients {
    pub(crate) fn new(center: f64, radius: f64, dt: f64) -> Self {
        let x = radius * dt;
        let kmax = x.abs().ceil() as usize + 60;
        let bessel = bessel_j_sequence(x, kmax);
        let mut last = 0;
        for (k, j) in bessel.iter().enumerate() {
            if j.abs() > COEFF_CUTOFF {
                last = k;
            }
        }
        let minus_i_pow = [
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, -1.0),
            Complex64::new(-1.0, 0.0),
            Complex64::new(0.0, 1.0),
        ];
        let coeffs = bessel[..=last]
            .iter()
            .enumerate()
            .map(|(k, &j)| {
                let weight = if k == 0 { 1.0 } else { 2.0 };
                minus_i_pow[k % 4] * (weight * j)
            })
            .collect();
        Self {
            dt,
            phase: Complex64::from_polar(1.0, -center * dt),
            coeffs,
        }
    }

    pub(crate) fn dt(&self) -> f64 {
        self.dt
    }

    pub(crate) fn len(&self) -> usize {
        self.coeffs.len()
    }
}

/// Scratch buffers reused across steps.
#[derive(Debug, Default)]
pub(crate) struct Workspace {
    prev: Vec<Complex64>,
    cur: Vec<Complex64>,
    next: Vec<Complex64>,
    acc: Vec<Complex64>,
}

/// `psi <- exp(-i H dt) psi` with `H = center + radius * G`.
pub(crate) fn apply_step(
    h: &ChainHamiltonian,
    center: f64,
    radius: f64,
    step: &StepCoefficients,
    psi: &mut [Complex64],
    ws: &mut Workspace,
) {
    let n = psi.len();
    if radius == 0.0 {
        for v in psi.iter_mut() {
            *v *= step.phase;
        }
        return;
    }
    for buf in [&mut ws.prev, &mut ws.cur, &mut ws.next, &mut ws.acc] {
        buf.clear();
        buf.resize(n, Complex64::default());
    }
    let inv_r = 1.0 / radius;
    let scaled = |x: &[Complex64], out: &mut [Complex64]| {
        h.apply(x, out);
        for (o, xi) in out.iter_mut().zip(x) {
            *o = (*o - *xi * center) * inv_r;
        }
    };

    ws.prev.copy_from_slice(psi);
    for (a, p) in ws.acc.iter_mut().zip(&ws.prev) {
        *a = *p * step.coeffs[0];
    }
    if step.len() > 1 {
        scaled(&ws.prev, &mut ws.cur);
        for (a, c) in ws.acc.iter_mut().zip(&ws.cur) {
            *a += *c * step.coeffs[1];
        }
        for coeff in &step.coeffs[2..] {
            scaled(&ws.cur, &mut ws.next);
            for ((nx, pv), a) in ws.next.iter_mut().zip(&ws.prev).zip(ws.acc.iter_mut()) {
                *nx = *nx * 2.0 - *pv;
                *a += *nx * *coeff;
            }
            std::mem::swap(&mut ws.prev, &mut ws.cur);
            std::mem::swap(&mut ws.cur, &mut ws.next);
        }
    }
    for (p, a) in psi.iter_mut().zip(&ws.acc) {
        *p = *a * step.phase;
    }
}
