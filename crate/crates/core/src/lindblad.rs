//! Lindblad master-equation baseline for small target systems.
//!
//! `d rho / dt = -i [H, rho] + sum_j G_j (L_j rho L_j† - ½ {L_j† L_j, rho})`
//! integrated with classical RK4. The step is refined by halving until two
//! successive refinements agree to the requested tolerance.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{ensure_finite, Error, Result};
use crate::reduced::TargetDensityMatrix;

/// Largest target dimension accepted.
pub const MAX_DIM: usize = 16;

#[derive(Debug, Clone, PartialEq)]
pub struct JumpOperator {
    pub operator: DMatrix<Complex64>,
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LindbladModel {
    hamiltonian: DMatrix<Complex64>,
    jumps: Vec<JumpOperator>,
}

impl LindbladModel {
    pub fn new(hamiltonian: DMatrix<Complex64>, jumps: Vec<JumpOperator>) -> Result<Self> {
        let m = hamiltonian.nrows();
        if !hamiltonian.is_square() || m == 0 {
            return Err(Error::DimensionMismatch {
                expected: m,
                got: hamiltonian.ncols(),
            });
        }
        if m > MAX_DIM {
            return Err(Error::InvalidArgument(format!(
                "target dimension {m} exceeds {MAX_DIM}"
            )));
        }
        let herm = (&hamiltonian - hamiltonian.adjoint())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        if !herm.is_finite() || herm > 1e-12 {
            return Err(Error::InvalidArgument(
                "Hamiltonian must be Hermitian".into(),
            ));
        }
        for jump in &jumps {
            ensure_finite("rate", jump.rate)?;
            if jump.rate < 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "negative rate {}",
                    jump.rate
                )));
            }
            if jump.operator.shape() != (m, m) {
                return Err(Error::DimensionMismatch {
                    expected: m,
                    got: jump.operator.nrows(),
                });
            }
        }
        Ok(Self { hamiltonian, jumps })
    }

    /// Two-level decay `|1> -> |0>`: `H = diag(e0, e1)`, `L = |0><1|`.
    pub fn spontaneous_decay(e0: f64, e1: f64, gamma: f64) -> Result<Self> {
        ensure_finite("E0", e0)?;
        ensure_finite("E1", e1)?;
        let c = |x: f64| Complex64::new(x, 0.0);
        let h = DMatrix::from_row_slice(2, 2, &[c(e0), c(0.0), c(0.0), c(e1)]);
        let lower = DMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(0.0), c(0.0)]);
        Self::new(
            h,
            vec![JumpOperator {
                operator: lower,
                rate: gamma,
            }],
        )
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.nrows()
    }

    pub fn hamiltonian(&self) -> &DMatrix<Complex64> {
        &self.hamiltonian
    }

    pub fn jumps(&self) -> &[JumpOperator] {
        &self.jumps
    }

    fn generator(&self, rho: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        let minus_i = Complex64::new(0.0, -1.0);
        let mut out = (&self.hamiltonian * rho - rho * &self.hamiltonian) * minus_i;
        for jump in &self.jumps {
            if jump.rate == 0.0 {
                continue;
            }
            let l = &jump.operator;
            let l_dag = l.adjoint();
            let l_dag_l = &l_dag * l;
            let anti = &l_dag_l * rho + rho * &l_dag_l;
            let term = l * rho * &l_dag - anti * Complex64::new(0.5, 0.0);
            out += term * Complex64::new(jump.rate, 0.0);
        }
        out
    }

    /// Right-hand side of the master equation at `rho`.
    pub fn rhs(&self, rho: &TargetDensityMatrix) -> Result<DMatrix<Complex64>> {
        if rho.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: rho.dim(),
            });
        }
        Ok(self.generator(rho.matrix()))
    }

    fn rk4_step(&self, rho: &DMatrix<Complex64>, h: f64) -> DMatrix<Complex64> {
        let half = Complex64::new(0.5 * h, 0.0);
        let full = Complex64::new(h, 0.0);
        let k1 = self.generator(rho);
        let k2 = self.generator(&(rho + &k1 * half));
        let k3 = self.generator(&(rho + &k2 * half));
        let k4 = self.generator(&(rho + &k3 * full));
        rho + (k1 + k2 * Complex64::new(2.0, 0.0) + k3 * Complex64::new(2.0, 0.0) + k4)
            * Complex64::new(h / 6.0, 0.0)
    }

    /// Fixed-step RK4. Each output interval is split into the fewest equal
    /// steps not longer than `step`.
    pub fn integrate_with_step(
        &self,
        rho0: &TargetDensityMatrix,
        times: &[f64],
        step: f64,
    ) -> Result<Vec<DMatrix<Complex64>>> {
        if rho0.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: rho0.dim(),
            });
        }
        if !step.is_finite() || step <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "step must be positive, got {step}"
            )));
        }
        validate_times(times)?;
        let mut rho = rho0.matrix().clone();
        let mut t_prev = 0.0;
        let mut out = Vec::with_capacity(times.len());
        for &t in times {
            let span = t - t_prev;
            if span > 0.0 {
                let n = (span / step).ceil().max(1.0) as usize;
                let h = span / n as f64;
                for _ in 0..n {
                    rho = self.rk4_step(&rho, h);
                }
            }
            t_prev = t;
            out.push(rho.clone());
        }
        Ok(out)
    }

    /// Integrates with the default options.
    pub fn integrate(
        &self,
        rho0: &TargetDensityMatrix,
        times: &[f64],
    ) -> Result<Vec<TargetDensityMatrix>> {
        self.integrate_with(rho0, times, &IntegratorOptions::default())
    }

    /// Integrates, halving the RK4 step until the trajectory changes by less
    /// than `options.tolerance` (max entry) between successive halvings.
    pub fn integrate_with(
        &self,
        rho0: &TargetDensityMatrix,
        times: &[f64],
        options: &IntegratorOptions,
    ) -> Result<Vec<TargetDensityMatrix>> {
        let rate_scale: f64 = self
            .jumps
            .iter()
            .map(|j| j.rate * j.operator.norm_squared())
            .sum();
        // The coherent part is not used to pick the starting step; the
        // refinement loop catches an under-resolved commutator.
        let mut step = options.initial_step;
        if rate_scale > 0.0 {
            step = step.min(0.05 / rate_scale);
        }
        let mut coarse = self.integrate_with_step(rho0, times, step)?;
        for _ in 0..options.max_halvings {
            step *= 0.5;
            let fine = self.integrate_with_step(rho0, times, step)?;
            let change = coarse
                .iter()
                .zip(&fine)
                .flat_map(|(a, b)| (a - b).iter().map(|z| z.norm()).collect::<Vec<_>>())
                // NaN must not be swallowed by max: a blown-up run never converges
                .fold(
                    0.0,
                    |m: f64, d| if d.is_nan() { f64::INFINITY } else { m.max(d) },
                );
            if change.is_finite() && change < options.tolerance {
                return fine
                    .into_iter()
                    .map(|m| {
                        TargetDensityMatrix::new(m).map_err(|e| {
                            Error::InvariantViolation(format!("Lindblad trajectory: {e}"))
                        })
                    })
                    .collect();
            }
            coarse = fine;
        }
        Err(Error::Convergence(format!(
            "step refinement stalled after {} halvings (step {step:e})",
            options.max_halvings
        )))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorOptions {
    pub tolerance: f64,
    pub initial_step: f64,
    pub max_halvings: usize,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-8,
            initial_step: 0.05,
            max_halvings: 14,
        }
    }
}

fn validate_times(times: &[f64]) -> Result<()> {
    for (k, &t) in times.iter().enumerate() {
        ensure_finite("t", t)?;
        if t < 0.0 || (k > 0 && t < times[k - 1]) {
            return Err(Error::InvalidArgument(
                "times must be sorted and non-negative".into(),
            ));
        }
    }
    Ok(())
}

pub fn lindblad_rhs(
    model: &LindbladModel,
    rho: &TargetDensityMatrix,
) -> Result<DMatrix<Complex64>> {
    model.rhs(rho)
}

pub fn integrate(
    model: &LindbladModel,
    rho0: &TargetDensityMatrix,
    times: &[f64],
) -> Result<Vec<TargetDensityMatrix>> {
    model.integrate(rho0, times)
}
