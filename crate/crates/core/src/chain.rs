//! Truncated chain Hamiltonians.
//!
//! The joint ancilla+target dynamics restricted to the states
//! `e_j = |j> ⊗ |phi_j>` is a single particle hopping on a half-line. Site 0
//! carries the impurity energy `mu` and couples to site 1 with `C`; every
//! later bond has hopping `B` and zero on-site energy. The chain is cut with
//! a hard wall after `n_sites` sites.
//!
//! The block model (all target eigenstates coupled uniformly to the bath)
//! splits into one such chain per target eigenvalue, see [`BlockSpec`].

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};

/// Largest dimension for which a dense matrix is ever assembled.
pub const DENSE_LIMIT: usize = 64;

/// Parameters of one semi-infinite chain truncated to `n_sites` sites.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainSpec {
    /// Bulk hopping `B` (> 0).
    pub bulk_hopping: f64,
    /// Hopping `C` between the impurity site and the bulk (>= 0).
    pub boundary_hopping: f64,
    /// On-site energy `mu` of site 0.
    pub site_energy: f64,
    pub n_sites: usize,
}

impl ChainSpec {
    pub fn new(
        bulk_hopping: f64,
        boundary_hopping: f64,
        site_energy: f64,
        n_sites: usize,
    ) -> Result<Self> {
        let spec = Self {
            bulk_hopping,
            boundary_hopping,
            site_energy,
            n_sites,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        ensure_finite("B", self.bulk_hopping)?;
        ensure_finite("C", self.boundary_hopping)?;
        ensure_finite("mu", self.site_energy)?;
        if self.bulk_hopping <= 0.0 {
            return Err(Error::InvalidSpec(format!(
                "bulk hopping must be positive, got {}",
                self.bulk_hopping
            )));
        }
        if self.boundary_hopping < 0.0 {
            return Err(Error::InvalidSpec(format!(
                "boundary hopping must be non-negative, got {}",
                self.boundary_hopping
            )));
        }
        if self.n_sites < 2 {
            return Err(Error::InvalidSpec(format!(
                "a chain needs at least 2 sites, got {}",
                self.n_sites
            )));
        }
        if !self.reduced_energy().is_finite() || !self.reduced_coupling().is_finite() {
            return Err(Error::InvalidSpec(
                "mu/B and C/B must be finite".to_string(),
            ));
        }
        Ok(())
    }

    /// `mu / B`.
    pub fn reduced_energy(&self) -> f64 {
        self.site_energy / self.bulk_hopping
    }

    /// `C / B`.
    pub fn reduced_coupling(&self) -> f64 {
        self.boundary_hopping / self.bulk_hopping
    }

    /// Time at which a signal travelling at the maximal group velocity `2B`
    /// crosses the truncated chain: `N / (2B)`.
    pub fn valid_horizon(&self) -> f64 {
        self.n_sites as f64 / (2.0 * self.bulk_hopping)
    }

    pub fn with_sites(mut self, n_sites: usize) -> Self {
        self.n_sites = n_sites;
        self
    }
}

/// Real symmetric tridiagonal matrix stored as its diagonal and first
/// off-diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainHamiltonian {
    diag: Vec<f64>,
    offdiag: Vec<f64>,
}

/// Builds the truncated chain Hamiltonian: diagonal `(mu, 0, 0, ...)`,
/// off-diagonal `(C, B, B, ...)`.
pub fn build_chain(spec: &ChainSpec) -> Result<ChainHamiltonian> {
    spec.validate()?;
    let n = spec.n_sites;
    let mut diag = vec![0.0; n];
    diag[0] = spec.site_energy;
    let mut offdiag = vec![spec.bulk_hopping; n - 1];
    offdiag[0] = spec.boundary_hopping;
    Ok(ChainHamiltonian { diag, offdiag })
}

impl ChainHamiltonian {
    #[cfg(test)]
    pub(crate) fn from_parts(diag: Vec<f64>, offdiag: Vec<f64>) -> Result<Self> {
        if diag.len() < 2 || offdiag.len() + 1 != diag.len() {
            return Err(Error::DimensionMismatch {
                expected: diag.len().saturating_sub(1),
                got: offdiag.len(),
            });
        }
        Ok(Self { diag, offdiag })
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn offdiag(&self) -> &[f64] {
        &self.offdiag
    }

    /// `out = H x`.
    pub fn apply(&self, x: &[Complex64], out: &mut [Complex64]) {
        let n = self.len();
        debug_assert_eq!(x.len(), n);
        debug_assert_eq!(out.len(), n);
        for i in 0..n {
            let mut acc = x[i] * self.diag[i];
            if i > 0 {
                acc += x[i - 1] * self.offdiag[i - 1];
            }
            if i + 1 < n {
                acc += x[i + 1] * self.offdiag[i];
            }
            out[i] = acc;
        }
    }

    /// Gershgorin enclosure `[lo, hi]` of the spectrum.
    pub fn spectral_bounds(&self) -> (f64, f64) {
        let n = self.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let left = if i > 0 {
                self.offdiag[i - 1].abs()
            } else {
                0.0
            };
            let right = if i + 1 < n {
                self.offdiag[i].abs()
            } else {
                0.0
            };
            lo = lo.min(self.diag[i] - left - right);
            hi = hi.max(self.diag[i] + left + right);
        }
        (lo, hi)
    }

    /// Number of eigenvalues strictly below `x` (Sturm sequence count).
    pub fn count_below(&self, x: f64) -> usize {
        let (lo, hi) = self.spectral_bounds();
        let tiny = f64::EPSILON * (hi.abs().max(lo.abs()).max(1.0)) * 1e-3;
        let mut count = 0;
        let mut q = self.diag[0] - x;
        for i in 0..self.len() {
            if i > 0 {
                let b = self.offdiag[i - 1];
                q = self.diag[i] - x - b * b / q;
            }
            if q == 0.0 {
                q = -tiny;
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// The `k`-th smallest eigenvalue (0-based), located by bisection on
    /// the Sturm count.
    pub fn eigenvalue(&self, k: usize) -> Result<f64> {
        let n = self.len();
        if k >= n {
            return Err(Error::IndexOutOfRange { index: k, len: n });
        }
        let (mut lo, mut hi) = self.spectral_bounds();
        let pad = 1e-12 * (hi - lo).abs().max(1.0);
        lo -= pad;
        hi += pad;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.count_below(mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// All eigenvalues lying strictly outside `[lo, hi]`, ascending.
    pub fn eigenvalues_outside(&self, lo: f64, hi: f64) -> Result<Vec<f64>> {
        let n = self.len();
        let below = self.count_below(lo);
        let not_above = self.count_below(hi.next_up());
        let mut out = Vec::new();
        for k in 0..below {
            out.push(self.eigenvalue(k)?);
        }
        for k in not_above..n {
            out.push(self.eigenvalue(k)?);
        }
        Ok(out)
    }

    /// Dense copy of the matrix. Only available for `len() <= DENSE_LIMIT`.
    pub fn to_dense(&self) -> Result<DMatrix<f64>> {
        let n = self.len();
        if n > DENSE_LIMIT {
            return Err(Error::InvalidArgument(format!(
                "dense assembly limited to {DENSE_LIMIT} sites, got {n}"
            )));
        }
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = self.diag[i];
        }
        for (i, &b) in self.offdiag.iter().enumerate() {
            m[(i, i + 1)] = b;
            m[(i + 1, i)] = b;
        }
        Ok(m)
    }
}

/// Block model: `M` target eigenvalues, each coupled to the bath with the
/// same `B` and `C`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockSpec {
    pub bulk_hopping: f64,
    pub boundary_hopping: f64,
    /// Target eigenvalues `E_0 .. E_{M-1}`.
    pub energies: Vec<f64>,
    /// Truncation length of every chain.
    pub n_sites: usize,
}

impl BlockSpec {
    pub fn new(
        bulk_hopping: f64,
        boundary_hopping: f64,
        energies: Vec<f64>,
        n_sites: usize,
    ) -> Result<Self> {
        let spec = Self {
            bulk_hopping,
            boundary_hopping,
            energies,
            n_sites,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.energies.is_empty() {
            return Err(Error::InvalidSpec(
                "block model needs at least one target energy".to_string(),
            ));
        }
        for (m, &e) in self.energies.iter().enumerate() {
            ensure_finite(&format!("E_{m}"), e)?;
        }
        ChainSpec {
            bulk_hopping: self.bulk_hopping,
            boundary_hopping: self.boundary_hopping,
            site_energy: 0.0,
            n_sites: self.n_sites,
        }
        .validate()
    }

    /// Number of target states `M`.
    pub fn block_size(&self) -> usize {
        self.energies.len()
    }

    /// Dense block matrix in the interleaved basis `e_{m + M j}`.
    /// Only available for `M * n_sites <= DENSE_LIMIT`.
    pub fn to_dense(&self) -> Result<DMatrix<f64>> {
        self.validate()?;
        let m_size = self.block_size();
        let dim = m_size * self.n_sites;
        if dim > DENSE_LIMIT {
            return Err(Error::InvalidArgument(format!(
                "dense assembly limited to {DENSE_LIMIT}, got {dim}"
            )));
        }
        let mut h = DMatrix::zeros(dim, dim);
        for (m, &e) in self.energies.iter().enumerate() {
            h[(m, m)] = e;
            for j in 0..self.n_sites - 1 {
                let a = basis_index(m, j, m_size)?;
                let b = basis_index(m, j + 1, m_size)?;
                let t = if j == 0 {
                    self.boundary_hopping
                } else {
                    self.bulk_hopping
                };
                h[(a, b)] = t;
                h[(b, a)] = t;
            }
        }
        Ok(h)
    }
}

/// Splits the block model into `M` independent chains, the `m`-th with
/// impurity energy `E_m`.
pub fn decompose_block(spec: &BlockSpec) -> Result<Vec<ChainSpec>> {
    spec.validate()?;
    spec.energies
        .iter()
        .map(|&e| ChainSpec::new(spec.bulk_hopping, spec.boundary_hopping, e, spec.n_sites))
        .collect()
}

/// Flat index `m + M j` of the block basis state `|j> ⊗ |phi_j^(m)>`.
pub fn basis_index(m: usize, j: usize, block_size: usize) -> Result<usize> {
    if m >= block_size {
        return Err(Error::IndexOutOfRange {
            index: m,
            len: block_size,
        });
    }
    j.checked_mul(block_size)
        .and_then(|v| v.checked_add(m))
        .ok_or_else(|| Error::InvalidArgument(format!("site index {j} overflows")))
}
