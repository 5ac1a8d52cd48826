//! Target density matrices obtained by tracing out the ancilla.
//!
//! Chain site `j` carries the joint state `|j> ⊗ |phi_j>`. Because the
//! ancilla states are orthonormal, a pure chain state reduces to
//! `rho_T = sum_j <n_j> |phi_j><phi_j|`, whatever the overlaps among the
//! `|phi_j>`. Target states are stored as explicit vectors in an orthonormal
//! computational basis; their Gram matrix is derived from them.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chain::{decompose_block, BlockSpec};
use crate::error::{Error, Result};
use crate::propagator::{default_dt, time_grid, AmplitudeVector, ObservableSeries, Propagator};

const STATE_NORM_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-10;
pub const HERMITIAN_TOL: f64 = 1e-12;
pub const PSD_TOL: f64 = 1e-10;

/// Normalized target-space vector.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetState(DVector<Complex64>);

impl TargetState {
    pub fn new(v: DVector<Complex64>) -> Result<Self> {
        if v.is_empty() {
            return Err(Error::InvalidArgument("empty target state".into()));
        }
        let norm = v.norm_squared();
        if !norm.is_finite() || (norm - 1.0).abs() > STATE_NORM_TOL {
            return Err(Error::InvalidArgument(format!(
                "target state must be normalized, got <phi|phi> = {norm}"
            )));
        }
        Ok(Self(v))
    }

    pub fn from_real(components: &[f64]) -> Result<Self> {
        Self::new(DVector::from_iterator(
            components.len(),
            components.iter().map(|&x| Complex64::new(x, 0.0)),
        ))
    }

    /// Computational basis state `|k>` of a `dim`-dimensional target.
    pub fn basis(dim: usize, k: usize) -> Result<Self> {
        if k >= dim {
            return Err(Error::IndexOutOfRange { index: k, len: dim });
        }
        let mut v = DVector::zeros(dim);
        v[k] = Complex64::new(1.0, 0.0);
        Ok(Self(v))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn vector(&self) -> &DVector<Complex64> {
        &self.0
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &TargetState) -> Complex64 {
        self.0.dotc(&other.0)
    }

    pub fn projector(&self) -> DMatrix<Complex64> {
        &self.0 * self.0.adjoint()
    }
}

/// Assignment `j -> |phi_j>` of target states to chain sites.
///
/// Sites `0 .. head.len()` use `head`; later sites repeat `cycle`. An empty
/// cycle means only the head sites are covered.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetMap {
    states: Vec<TargetState>,
    head: Vec<usize>,
    cycle: Vec<usize>,
}

impl TargetMap {
    pub fn new(states: Vec<TargetState>, head: Vec<usize>, cycle: Vec<usize>) -> Result<Self> {
        let dim = states
            .first()
            .ok_or_else(|| Error::InvalidArgument("target map needs at least one state".into()))?
            .dim();
        if let Some(s) = states.iter().find(|s| s.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: s.dim(),
            });
        }
        if let Some(&bad) = head.iter().chain(&cycle).find(|&&l| l >= states.len()) {
            return Err(Error::IndexOutOfRange {
                index: bad,
                len: states.len(),
            });
        }
        if head.is_empty() && cycle.is_empty() {
            return Err(Error::InvalidArgument("target map assigns no sites".into()));
        }
        Ok(Self {
            states,
            head,
            cycle,
        })
    }

    /// Site 0 carries `states[first]`, every later site `states[rest]`.
    pub fn impurity(states: Vec<TargetState>, first: usize, rest: usize) -> Result<Self> {
        Self::new(states, vec![first], vec![rest])
    }

    /// Even sites carry `states[even]`, odd sites `states[odd]`.
    pub fn alternating(states: Vec<TargetState>, even: usize, odd: usize) -> Result<Self> {
        Self::new(states, Vec::new(), vec![even, odd])
    }

    /// Explicit per-site labels; covers exactly `labels.len()` sites.
    pub fn explicit(states: Vec<TargetState>, labels: Vec<usize>) -> Result<Self> {
        Self::new(states, labels, Vec::new())
    }

    pub fn dim(&self) -> usize {
        self.states[0].dim()
    }

    pub fn states(&self) -> &[TargetState] {
        &self.states
    }

    pub fn label(&self, site: usize) -> Option<usize> {
        if site < self.head.len() {
            Some(self.head[site])
        } else if self.cycle.is_empty() {
            None
        } else {
            Some(self.cycle[(site - self.head.len()) % self.cycle.len()])
        }
    }

    pub fn covers(&self, n_sites: usize) -> bool {
        !self.cycle.is_empty() || n_sites <= self.head.len()
    }

    /// `G_ab = <phi_a|phi_b>` over the listed states.
    pub fn gram(&self) -> DMatrix<Complex64> {
        let k = self.states.len();
        DMatrix::from_fn(k, k, |a, b| self.states[a].inner(&self.states[b]))
    }
}

/// Hermitian, positive semidefinite, unit-trace target density matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetDensityMatrix(DMatrix<Complex64>);

impl TargetDensityMatrix {
    pub fn new(rho: DMatrix<Complex64>) -> Result<Self> {
        if !rho.is_square() || rho.nrows() == 0 {
            return Err(Error::DimensionMismatch {
                expected: rho.nrows(),
                got: rho.ncols(),
            });
        }
        if rho.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("density matrix".into()));
        }
        let herm_err = (&rho - rho.adjoint())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        if herm_err > HERMITIAN_TOL {
            return Err(Error::InvariantViolation(format!(
                "density matrix not Hermitian (max deviation {herm_err:e})"
            )));
        }
        let tr = rho.trace().re;
        if (tr - 1.0).abs() > TRACE_TOL {
            return Err(Error::InvariantViolation(format!("trace {tr} != 1")));
        }
        let out = Self(rho);
        let min_eig = out.eigenvalues().last().copied().unwrap_or(0.0);
        if min_eig < -PSD_TOL {
            return Err(Error::InvariantViolation(format!(
                "density matrix has negative eigenvalue {min_eig:e}"
            )));
        }
        Ok(out)
    }

    pub fn pure(state: &TargetState) -> Result<Self> {
        Self::new(state.projector())
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn element(&self, row: usize, col: usize) -> Complex64 {
        self.0[(row, col)]
    }

    /// `<k|rho|k>`.
    pub fn population(&self, k: usize) -> f64 {
        self.0[(k, k)].re
    }

    /// `<phi|rho|phi>`.
    pub fn expectation(&self, state: &TargetState) -> f64 {
        state.0.dotc(&(&self.0 * &state.0)).re
    }

    pub fn purity(&self) -> f64 {
        (&self.0 * &self.0).trace().re
    }

    /// Eigenvalues, descending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = self
            .0
            .clone()
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .collect();
        ev.sort_by(|a, b| b.total_cmp(a));
        ev
    }

    /// `½ ||rho - sigma||_1`.
    pub fn trace_distance(&self, other: &TargetDensityMatrix) -> Result<f64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: other.dim(),
            });
        }
        let diff = &self.0 - &other.0;
        Ok(0.5
            * diff
                .symmetric_eigenvalues()
                .iter()
                .map(|e| e.abs())
                .sum::<f64>())
    }

    pub fn to_json(&self) -> DensityMatrixJson {
        let m = self.dim();
        DensityMatrixJson {
            dim: m,
            re: (0..m)
                .map(|i| (0..m).map(|j| self.0[(i, j)].re).collect())
                .collect(),
            im: (0..m)
                .map(|i| (0..m).map(|j| self.0[(i, j)].im).collect())
                .collect(),
        }
    }

    pub fn from_json(json: &DensityMatrixJson) -> Result<Self> {
        let m = json.dim;
        let rows_ok = |rows: &Vec<Vec<f64>>| rows.len() == m && rows.iter().all(|r| r.len() == m);
        if !rows_ok(&json.re) || !rows_ok(&json.im) {
            return Err(Error::DimensionMismatch {
                expected: m,
                got: json.re.len(),
            });
        }
        Self::new(DMatrix::from_fn(m, m, |i, j| {
            Complex64::new(json.re[i][j], json.im[i][j])
        }))
    }
}

/// Wire format `{"dim": M, "re": [[...]], "im": [[...]]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityMatrixJson {
    pub dim: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

/// Total chain weight carried by each label of `map`.
fn label_weights(psi: &AmplitudeVector, map: &TargetMap) -> Result<Vec<f64>> {
    if !map.covers(psi.len()) {
        return Err(Error::DimensionMismatch {
            expected: psi.len(),
            got: map.head.len(),
        });
    }
    let mut weights = vec![0.0; map.states.len()];
    for (j, a) in psi.amplitudes().iter().enumerate() {
        let label = map.label(j).expect("coverage checked");
        weights[label] += a.norm_sqr();
    }
    Ok(weights)
}

fn accumulate(rho: &mut DMatrix<Complex64>, weight: f64, state: &TargetState) {
    if weight != 0.0 {
        *rho += state.projector() * Complex64::new(weight, 0.0);
    }
}

/// Reduced target state of a pure chain state.
pub fn reduce(psi: &AmplitudeVector, map: &TargetMap) -> Result<TargetDensityMatrix> {
    let weights = label_weights(psi, map)?;
    let m = map.dim();
    let mut rho = DMatrix::zeros(m, m);
    for (w, s) in weights.iter().zip(&map.states) {
        accumulate(&mut rho, *w, s);
    }
    TargetDensityMatrix::new(rho)
}

/// One component of a classical ancilla+target mixture.
#[derive(Debug, Clone, Copy)]
pub enum Branch<'a> {
    /// Joint state that moves along the chain.
    Evolving {
        weight: f64,
        psi: &'a AmplitudeVector,
    },
    /// Joint state the Hamiltonian does not act on.
    Inert { weight: f64, state: &'a TargetState },
}

impl Branch<'_> {
    fn weight(&self) -> f64 {
        match *self {
            Branch::Evolving { weight, .. } | Branch::Inert { weight, .. } => weight,
        }
    }
}

/// Convex combination of the branch reductions.
pub fn mix_reduce(branches: &[Branch<'_>], map: &TargetMap) -> Result<TargetDensityMatrix> {
    if branches.is_empty() {
        return Err(Error::InvalidArgument("no branches".into()));
    }
    if let Some(b) = branches
        .iter()
        .find(|b| b.weight().is_nan() || b.weight() < 0.0)
    {
        return Err(Error::InvalidArgument(format!(
            "negative branch weight {}",
            b.weight()
        )));
    }
    let total: f64 = branches.iter().map(Branch::weight).sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidArgument(format!(
            "branch weights sum to {total}, not 1"
        )));
    }
    let m = map.dim();
    let mut rho = DMatrix::zeros(m, m);
    for branch in branches {
        match *branch {
            Branch::Evolving { weight, psi } => {
                let weights = label_weights(psi, map)?;
                for (w, s) in weights.iter().zip(&map.states) {
                    accumulate(&mut rho, weight * w, s);
                }
            }
            Branch::Inert { weight, state } => {
                if state.dim() != m {
                    return Err(Error::DimensionMismatch {
                        expected: m,
                        got: state.dim(),
                    });
                }
                accumulate(&mut rho, weight, state);
            }
        }
    }
    TargetDensityMatrix::new(rho)
}

/// `((1 + P)/2) |a><a| + ((1 - P)/2) |b><b|`.
pub fn parity_mix_state(
    parity: f64,
    a: &TargetState,
    b: &TargetState,
) -> Result<TargetDensityMatrix> {
    if !parity.is_finite() || parity.abs() > 1.0 + 1e-12 {
        return Err(Error::InvalidArgument(format!(
            "parity {parity} outside [-1, 1]"
        )));
    }
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            got: b.dim(),
        });
    }
    let mut rho = DMatrix::zeros(a.dim(), a.dim());
    accumulate(&mut rho, 0.5 * (1.0 + parity), a);
    accumulate(&mut rho, 0.5 * (1.0 - parity), b);
    TargetDensityMatrix::new(rho)
}

/// Occupation of `|E_0>` over time for the block model started in
/// `|0> ⊗ |E_m>`, with site 0 carrying `|E_m>` and every later site `|E_0>`.
pub fn run_example4(block: &BlockSpec, initial_m: usize, t_max: f64) -> Result<ObservableSeries> {
    run_block_chain(block, initial_m, t_max, default_dt(block.bulk_hopping))
}

/// As [`run_example4`] with an explicit sampling interval.
pub fn run_block_chain(
    block: &BlockSpec,
    initial_m: usize,
    t_max: f64,
    dt: f64,
) -> Result<ObservableSeries> {
    let chains = decompose_block(block)?;
    let m_size = block.block_size();
    let chain = chains.get(initial_m).ok_or(Error::IndexOutOfRange {
        index: initial_m,
        len: m_size,
    })?;
    let ground = TargetState::basis(m_size, 0)?;
    let map = TargetMap::impurity(
        vec![TargetState::basis(m_size, initial_m)?, ground.clone()],
        0,
        1,
    )?;
    let times = time_grid(t_max, dt)?;
    let h = crate::chain::build_chain(chain)?;
    let psi0 = AmplitudeVector::site(chain.n_sites, 0)?;
    let mut values = Vec::with_capacity(times.len());
    Propagator::new(&h).for_each_time(&psi0, &times, |_, psi| {
        values.push(reduce(psi, &map)?.expectation(&ground));
        Ok(())
    })?;
    ObservableSeries::new(times, values)
}

/// [`run_block_chain`] for every initial target state, chains in parallel.
pub fn run_block(block: &BlockSpec, t_max: f64, dt: f64) -> Result<Vec<ObservableSeries>> {
    (0..block.block_size())
        .into_par_iter()
        .map(|m| run_block_chain(block, m, t_max, dt))
        .collect()
}
