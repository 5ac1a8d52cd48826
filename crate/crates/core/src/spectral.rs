//! Decay versus trapping.
//!
//! A chain started on the impurity site empties completely iff its spectrum
//! has no discrete part outside the band `[-2B, 2B]`. Two routes decide
//! this: the closed-form inequality in [`decay_condition`] and the explicit
//! bound-state solver [`find_bound_states`]. The solver is the ground truth.
//!
//! Bound states follow the ansatz `psi_0 = A B / C`, `psi_j = A x^j` for
//! `j >= 1`, which leaves the quadratic
//! `(C_B^2 - 1) x^2 + mu_B x - 1 = 0` with energy `B (x + 1/x)`.
//! Normalizable solutions need `|x| < 1`.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};
use crate::output::{format_sig, CsvTable};

/// `|C_B - 1|` below which the linear (C = B) branch is used.
pub const UNIT_COUPLING_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CriterionBranch {
    General,
    CEqualsB,
    MuZero,
}

impl fmt::Display for CriterionBranch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CriterionBranch::General => "general",
            CriterionBranch::CEqualsB => "c_equals_b",
            CriterionBranch::MuZero => "mu_zero",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundState {
    /// Geometric decay factor `x` of the amplitudes, `|x| < 1`.
    pub decay_factor: f64,
    /// Energy `x + 1/x` in units of the bulk hopping `B`.
    pub energy: f64,
    /// `|<bound|e_0>|^2`.
    pub overlap_sq: f64,
}

impl BoundState {
    fn from_root(x: f64, coupling: f64) -> Self {
        let x2 = x * x;
        // |psi_0|^2 / (|psi_0|^2 + sum_{j>=1} |psi_j|^2) with psi_0 = A/C_B
        let overlap_sq = (1.0 - x2) / (1.0 - x2 + coupling * coupling * x2);
        Self {
            decay_factor: x,
            energy: x + 1.0 / x,
            overlap_sq,
        }
    }

    /// Energy in absolute units for bulk hopping `b`.
    pub fn energy_for(&self, b: f64) -> f64 {
        self.energy * b
    }

    /// `-1 / ln|x|`, in sites.
    pub fn localization_length(&self) -> f64 {
        -1.0 / self.decay_factor.abs().ln()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayVerdict {
    pub decays: bool,
    pub bound_states: Vec<BoundState>,
    pub branch: CriterionBranch,
}

impl DecayVerdict {
    pub fn trapped_weight(&self) -> f64 {
        sum_fourth_powers(&self.bound_states)
    }
}

// An empty f64 sum is -0.0; adding +0.0 keeps "0" out of signed output.
fn sum_fourth_powers(states: &[BoundState]) -> f64 {
    states
        .iter()
        .map(|b| b.overlap_sq * b.overlap_sq)
        .sum::<f64>()
        + 0.0
}

fn check_args(mu_b: f64, c_b: f64) -> Result<()> {
    ensure_finite("mu_B", mu_b)?;
    ensure_finite("C_B", c_b)?;
    if c_b <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "C_B must be positive, got {c_b}"
        )));
    }
    Ok(())
}

fn branch_for(mu_b: f64, c_b: f64) -> CriterionBranch {
    if (c_b - 1.0).abs() < UNIT_COUPLING_TOL {
        CriterionBranch::CEqualsB
    } else if mu_b == 0.0 {
        CriterionBranch::MuZero
    } else {
        CriterionBranch::General
    }
}

/// Analytic screen: `true` iff the chain has no discrete eigenvalue outside
/// `[-2B, 2B]`, so the impurity site eventually empties.
///
/// Boundary points (equality) count as trapped. A negative radicand means
/// the bound-state roots are complex with `|x| > 1`, which decays.
pub fn decay_condition(mu_b: f64, c_b: f64) -> Result<bool> {
    check_args(mu_b, c_b)?;
    Ok(match branch_for(mu_b, c_b) {
        CriterionBranch::CEqualsB => mu_b.abs() < 1.0,
        CriterionBranch::MuZero => c_b < std::f64::consts::SQRT_2,
        CriterionBranch::General => {
            let radicand = mu_b * mu_b + 4.0 * c_b * c_b - 4.0;
            if radicand < 0.0 {
                true
            } else {
                2.0 * (1.0 - c_b * c_b).abs() < (mu_b.abs() - radicand.sqrt()).abs()
            }
        }
    })
}

/// All normalizable bound states of the semi-infinite chain, sorted by energy.
pub fn find_bound_states(mu_b: f64, c_b: f64) -> Result<Vec<BoundState>> {
    check_args(mu_b, c_b)?;
    let lead = c_b * c_b - 1.0;
    let mut roots = Vec::with_capacity(2);
    if (c_b - 1.0).abs() < UNIT_COUPLING_TOL {
        if mu_b != 0.0 {
            roots.push(1.0 / mu_b);
        }
    } else {
        let disc = mu_b * mu_b + 4.0 * lead;
        if disc >= 0.0 {
            // stable form: q = -(b + sign(b) sqrt(disc)) / 2, roots q/a and c/q
            let sign = if mu_b >= 0.0 { 1.0 } else { -1.0 };
            let q = -0.5 * (mu_b + sign * disc.sqrt());
            if q != 0.0 {
                roots.push(q / lead);
                roots.push(-1.0 / q);
            }
        }
    }
    let mut states: Vec<BoundState> = roots
        .into_iter()
        .filter(|x| x.is_finite() && x.abs() < 1.0 && *x != 0.0)
        .map(|x| BoundState::from_root(x, c_b))
        .collect();
    states.sort_by(|a, b| a.energy.total_cmp(&b.energy));
    states.dedup_by(|a, b| a.decay_factor == b.decay_factor);
    Ok(states)
}

/// Long-time plateau of `<n_0(t)>` from the initial state `e_0`:
/// `sum_b |<b|e_0>|^4`.
pub fn trapped_weight(mu_b: f64, c_b: f64) -> Result<f64> {
    Ok(sum_fourth_powers(&find_bound_states(mu_b, c_b)?))
}

pub fn classify(mu_b: f64, c_b: f64) -> Result<DecayVerdict> {
    Ok(DecayVerdict {
        decays: decay_condition(mu_b, c_b)?,
        bound_states: find_bound_states(mu_b, c_b)?,
        branch: branch_for(mu_b, c_b),
    })
}

/// Inclusive grid `lo, lo + step, ..., <= hi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridAxis {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

impl GridAxis {
    pub fn new(lo: f64, hi: f64, step: f64) -> Result<Self> {
        let axis = Self { lo, hi, step };
        axis.validate()?;
        Ok(axis)
    }

    fn validate(&self) -> Result<()> {
        if !(self.lo.is_finite() && self.hi.is_finite() && self.step.is_finite()) {
            return Err(Error::InvalidGrid("grid bounds must be finite".into()));
        }
        if self.step <= 0.0 {
            return Err(Error::InvalidGrid(format!(
                "step must be positive, got {}",
                self.step
            )));
        }
        if self.hi < self.lo {
            return Err(Error::InvalidGrid(format!(
                "empty range {}:{}",
                self.lo, self.hi
            )));
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        let count = ((self.hi - self.lo) / self.step + 1e-9).floor() as usize + 1;
        (0..count).map(|k| self.lo + k as f64 * self.step).collect()
    }
}

impl FromStr for GridAxis {
    type Err = Error;

    /// Parses `lo:hi:step`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(Error::InvalidGrid(format!(
                "expected lo:hi:step, got '{s}'"
            )));
        }
        let mut nums = [0.0; 3];
        for (slot, p) in nums.iter_mut().zip(&parts) {
            *slot = p
                .trim()
                .parse()
                .map_err(|_| Error::InvalidGrid(format!("not a number: '{p}'")))?;
        }
        GridAxis::new(nums[0], nums[1], nums[2])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseCell {
    pub mu_b: f64,
    pub c_b: f64,
    pub verdict: DecayVerdict,
}

/// Verdicts over a `(mu_B, C_B)` grid, row-major with `C_B` as the row
/// (outer) index and `mu_B` as the column (inner) index.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseDiagram {
    pub mu_values: Vec<f64>,
    pub c_values: Vec<f64>,
    pub cells: Vec<PhaseCell>,
}

impl PhaseDiagram {
    pub fn cell(&self, row: usize, col: usize) -> &PhaseCell {
        &self.cells[row * self.mu_values.len() + col]
    }

    pub fn to_table(&self) -> CsvTable {
        let mut table = CsvTable::new(["mu_B", "C_B", "decays", "n_bound", "trapped_weight"]);
        for cell in &self.cells {
            table.push_row(vec![
                format_sig(cell.mu_b),
                format_sig(cell.c_b),
                (cell.verdict.decays as u8).to_string(),
                cell.verdict.bound_states.len().to_string(),
                format_sig(cell.verdict.trapped_weight()),
            ]);
        }
        table
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        self.to_table().write(out)
    }
}

pub fn phase_diagram(mu_axis: &GridAxis, c_axis: &GridAxis) -> Result<PhaseDiagram> {
    mu_axis.validate()?;
    c_axis.validate()?;
    let mu_values = mu_axis.values();
    let c_values = c_axis.values();
    if c_values[0] <= 0.0 {
        return Err(Error::InvalidGrid(format!(
            "C_B values must be positive, grid starts at {}",
            c_values[0]
        )));
    }
    let rows: Vec<Vec<PhaseCell>> = c_values
        .par_iter()
        .map(|&c_b| {
            mu_values
                .iter()
                .map(|&mu_b| classify(mu_b, c_b).map(|verdict| PhaseCell { mu_b, c_b, verdict }))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PhaseDiagram {
        mu_values,
        c_values,
        cells: rows.into_iter().flatten().collect(),
    })
}
