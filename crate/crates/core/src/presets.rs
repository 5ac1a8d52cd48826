//! Ready-made scenarios: qubit reset, qubit mixing, spontaneous decay
//! (microscopic chain against the Lindblad baseline) and controllable
//! dissipation in the block model. The command-line `example` subcommand and
//! the runnable examples are thin wrappers around these.

use rayon::prelude::*;

use crate::chain::{BlockSpec, ChainSpec};
use crate::error::Result;
use crate::lindblad::LindbladModel;
use crate::output::{format_sig, CsvTable};
use crate::propagator::{
    simulate, time_grid, AmplitudeVector, Observable, ObservableSeries, Propagator,
};
use crate::reduced::{
    mix_reduce, reduce, run_block, Branch, TargetDensityMatrix, TargetMap, TargetState,
};
use crate::spectral::{classify, trapped_weight};

fn qubit(k: usize) -> TargetState {
    TargetState::basis(2, k).expect("qubit basis state")
}

/// Mixed qubit `½(|0><0| + |1><1|)` reset to `|0>`: the `|1>` half sits on
/// the impurity site, the `|0>` half is inert.
#[derive(Debug, Clone)]
pub struct ResetRun {
    pub spec: ChainSpec,
    pub times: Vec<f64>,
    pub n0: Vec<f64>,
    pub states: Vec<TargetDensityMatrix>,
}

pub fn qubit_reset(spec: &ChainSpec, t_max: f64, dt: f64) -> Result<ResetRun> {
    let times = time_grid(t_max, dt)?;
    let map = TargetMap::impurity(vec![qubit(1), qubit(0)], 0, 1)?;
    let ground = qubit(0);
    let h = crate::chain::build_chain(spec)?;
    let psi0 = AmplitudeVector::site(spec.n_sites, 0)?;
    let mut n0 = Vec::with_capacity(times.len());
    let mut states = Vec::with_capacity(times.len());
    Propagator::new(&h).for_each_time(&psi0, &times, |_, psi| {
        n0.push(psi.occupation(0)?);
        states.push(mix_reduce(
            &[
                Branch::Evolving { weight: 0.5, psi },
                Branch::Inert {
                    weight: 0.5,
                    state: &ground,
                },
            ],
            &map,
        )?);
        Ok(())
    })?;
    Ok(ResetRun {
        spec: *spec,
        times,
        n0,
        states,
    })
}

impl ResetRun {
    pub fn to_table(&self) -> CsvTable {
        let ground = TargetDensityMatrix::pure(&qubit(0)).expect("pure state");
        let mut t = CsvTable::new([
            "t",
            "n0",
            "rho_00",
            "rho_11",
            "purity",
            "trace_distance_to_ground",
        ]);
        t.comment(chain_comment("qubit reset", &self.spec));
        for ((time, n0), rho) in self.times.iter().zip(&self.n0).zip(&self.states) {
            let dist = rho.trace_distance(&ground).expect("same dimension");
            t.push_values(&[
                *time,
                *n0,
                rho.population(0),
                rho.population(1),
                rho.purity(),
                dist,
            ]);
        }
        t
    }
}

/// Pure `|1>` mixed toward `½(|a><a| + |b><b|)` by an alternating target
/// map, for orthogonal `a, b` and for a pair with overlap `<a|b> = overlap`.
#[derive(Debug, Clone)]
pub struct MixingRun {
    pub spec: ChainSpec,
    pub overlap: f64,
    pub times: Vec<f64>,
    pub parity: Vec<f64>,
    pub orthogonal: Vec<TargetDensityMatrix>,
    pub overlapping: Vec<TargetDensityMatrix>,
}

/// `a = |1>`, `b = sqrt(1 - g^2)|0> + g|1>`.
pub fn overlapping_pair(overlap: f64) -> Result<(TargetState, TargetState)> {
    let b = TargetState::from_real(&[(1.0 - overlap * overlap).max(0.0).sqrt(), overlap])?;
    Ok((qubit(1), b))
}

pub fn qubit_mixing(spec: &ChainSpec, overlap: f64, t_max: f64, dt: f64) -> Result<MixingRun> {
    let times = time_grid(t_max, dt)?;
    let orth_map = TargetMap::alternating(vec![qubit(1), qubit(0)], 0, 1)?;
    let (a, b) = overlapping_pair(overlap)?;
    let overlap_map = TargetMap::alternating(vec![a, b], 0, 1)?;
    let h = crate::chain::build_chain(spec)?;
    let psi0 = AmplitudeVector::site(spec.n_sites, 0)?;
    let mut parity = Vec::with_capacity(times.len());
    let mut orthogonal = Vec::with_capacity(times.len());
    let mut overlapping = Vec::with_capacity(times.len());
    Propagator::new(&h).for_each_time(&psi0, &times, |_, psi| {
        parity.push(psi.parity());
        orthogonal.push(reduce(psi, &orth_map)?);
        overlapping.push(reduce(psi, &overlap_map)?);
        Ok(())
    })?;
    Ok(MixingRun {
        spec: *spec,
        overlap,
        times,
        parity,
        orthogonal,
        overlapping,
    })
}

impl MixingRun {
    pub fn to_table(&self) -> CsvTable {
        let mut t = CsvTable::new([
            "t",
            "parity",
            "eig_max_orthogonal",
            "eig_min_orthogonal",
            "purity_orthogonal",
            "eig_max_overlap",
            "eig_min_overlap",
            "purity_overlap",
        ]);
        t.comment(chain_comment("qubit mixing", &self.spec));
        t.comment(format!("overlap <a|b> = {}", format_sig(self.overlap)));
        for k in 0..self.times.len() {
            let eo = self.orthogonal[k].eigenvalues();
            let ev = self.overlapping[k].eigenvalues();
            t.push_values(&[
                self.times[k],
                self.parity[k],
                eo[0],
                eo[1],
                self.orthogonal[k].purity(),
                ev[0],
                ev[1],
                self.overlapping[k].purity(),
            ]);
        }
        t
    }
}

/// Decay of `|1>` under the microscopic chain for several impurity energies,
/// beside the Lindblad decay with the same initial state.
#[derive(Debug, Clone)]
pub struct DecayComparison {
    pub bulk_hopping: f64,
    pub boundary_hopping: f64,
    pub n_sites: usize,
    pub site_energies: Vec<f64>,
    pub microscopic: Vec<ObservableSeries>,
    pub trapped_weights: Vec<f64>,
    pub gamma: f64,
    pub target_energies: (f64, f64),
    pub lindblad_excited: ObservableSeries,
}

#[derive(Debug, Clone)]
pub struct DecayComparisonConfig {
    pub bulk_hopping: f64,
    pub boundary_hopping: f64,
    pub n_sites: usize,
    pub site_energies: Vec<f64>,
    pub gamma: f64,
    pub target_energies: (f64, f64),
    pub t_max: f64,
    pub dt: f64,
}

impl Default for DecayComparisonConfig {
    fn default() -> Self {
        Self {
            bulk_hopping: 1.0,
            boundary_hopping: 1.0,
            n_sites: 400,
            site_energies: vec![0.0, 0.7, 1.4, 2.1],
            gamma: 1.0,
            target_energies: (0.0, 1.0),
            t_max: 60.0,
            dt: 0.1,
        }
    }
}

pub fn spontaneous_decay(cfg: &DecayComparisonConfig) -> Result<DecayComparison> {
    let times = time_grid(cfg.t_max, cfg.dt)?;
    let microscopic = cfg
        .site_energies
        .par_iter()
        .map(|&mu| {
            let spec = ChainSpec::new(cfg.bulk_hopping, cfg.boundary_hopping, mu, cfg.n_sites)?;
            let psi0 = AmplitudeVector::site(cfg.n_sites, 0)?;
            let mut run = simulate(&spec, &psi0, &times, &[Observable::Occupation(0)])?;
            Ok(run.series.remove("n0").expect("n0 recorded"))
        })
        .collect::<Result<Vec<_>>>()?;
    let trapped_weights = cfg
        .site_energies
        .iter()
        .map(|&mu| {
            trapped_weight(
                mu / cfg.bulk_hopping,
                cfg.boundary_hopping / cfg.bulk_hopping,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let model =
        LindbladModel::spontaneous_decay(cfg.target_energies.0, cfg.target_energies.1, cfg.gamma)?;
    let excited = TargetDensityMatrix::pure(&qubit(1))?;
    let traj = model.integrate(&excited, &times)?;
    let lindblad_excited =
        ObservableSeries::new(times, traj.iter().map(|r| r.population(1)).collect())?;
    Ok(DecayComparison {
        bulk_hopping: cfg.bulk_hopping,
        boundary_hopping: cfg.boundary_hopping,
        n_sites: cfg.n_sites,
        site_energies: cfg.site_energies.clone(),
        microscopic,
        trapped_weights,
        gamma: cfg.gamma,
        target_energies: cfg.target_energies,
        lindblad_excited,
    })
}

impl DecayComparison {
    pub fn microscopic_table(&self) -> CsvTable {
        let mut header = vec!["t".to_string()];
        header.extend(
            self.site_energies
                .iter()
                .map(|mu| format!("n0_mu{}", format_sig(*mu))),
        );
        let mut t = CsvTable::new(header);
        t.comment(format!(
            "microscopic decay B={} C={} sites={}",
            format_sig(self.bulk_hopping),
            format_sig(self.boundary_hopping),
            self.n_sites
        ));
        for (mu, w) in self.site_energies.iter().zip(&self.trapped_weights) {
            t.comment(format!(
                "mu={} predicted plateau (trapped_weight) = {}",
                format_sig(*mu),
                format_sig(*w)
            ));
        }
        let times = &self.lindblad_excited.times;
        for (k, time) in times.iter().enumerate() {
            let mut row = vec![*time];
            row.extend(self.microscopic.iter().map(|s| s.values[k]));
            t.push_values(&row);
        }
        t
    }

    pub fn lindblad_table(&self) -> CsvTable {
        let mut t = CsvTable::new(["t", "rho_11", "exp_minus_gamma_t", "exp_minus_2gamma_t"]);
        t.comment(format!(
            "Lindblad decay L=|0><1| Gamma={} E0={} E1={}",
            format_sig(self.gamma),
            format_sig(self.target_energies.0),
            format_sig(self.target_energies.1)
        ));
        t.comment("exp_minus_gamma_t: closed form of the integrated equation");
        t.comment("exp_minus_2gamma_t: reference curve exp(-2 Gamma t) as quoted for this example");
        let s = &self.lindblad_excited;
        for (time, v) in s.times.iter().zip(&s.values) {
            t.push_values(&[
                *time,
                *v,
                (-self.gamma * time).exp(),
                (-2.0 * self.gamma * time).exp(),
            ]);
        }
        t
    }
}

/// Block model started in each `|0> ⊗ |E_m>` in turn.
#[derive(Debug, Clone)]
pub struct ControllableRun {
    pub block: BlockSpec,
    pub series: Vec<ObservableSeries>,
    /// `1 - trapped_weight(E_m / B, C / B)`.
    pub predicted_plateaus: Vec<f64>,
}

pub fn controllable_dissipation(block: &BlockSpec, t_max: f64, dt: f64) -> Result<ControllableRun> {
    let series = run_block(block, t_max, dt)?;
    let c_b = block.boundary_hopping / block.bulk_hopping;
    let predicted_plateaus = block
        .energies
        .iter()
        .enumerate()
        .map(|(m, &e)| {
            if m == 0 {
                Ok(1.0)
            } else {
                trapped_weight(e / block.bulk_hopping, c_b).map(|w| 1.0 - w)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ControllableRun {
        block: block.clone(),
        series,
        predicted_plateaus,
    })
}

impl ControllableRun {
    pub fn to_table(&self) -> CsvTable {
        let mut header = vec!["t".to_string()];
        header.extend((0..self.series.len()).map(|m| format!("E0_occupation_m{m}")));
        let mut t = CsvTable::new(header);
        t.comment(format!(
            "block model B={} C={} sites={} energies=[{}]",
            format_sig(self.block.bulk_hopping),
            format_sig(self.block.boundary_hopping),
            self.block.n_sites,
            self.block
                .energies
                .iter()
                .map(|e| format_sig(*e))
                .collect::<Vec<_>>()
                .join(" ")
        ));
        let c_b = self.block.boundary_hopping / self.block.bulk_hopping;
        for (m, (&e, plateau)) in self
            .block
            .energies
            .iter()
            .zip(&self.predicted_plateaus)
            .enumerate()
        {
            let decays = classify(e / self.block.bulk_hopping, c_b)
                .map(|v| v.decays as u8)
                .unwrap_or(0);
            t.comment(format!(
                "m={m} E={} decays={decays} predicted plateau={}",
                format_sig(e),
                format_sig(*plateau)
            ));
        }
        let times = &self.series[0].times;
        for (k, time) in times.iter().enumerate() {
            let mut row = vec![*time];
            row.extend(self.series.iter().map(|s| s.values[k]));
            t.push_values(&row);
        }
        t
    }
}

pub(crate) fn chain_comment(label: &str, spec: &ChainSpec) -> String {
    format!(
        "{label} B={} C={} mu={} sites={}",
        format_sig(spec.bulk_hopping),
        format_sig(spec.boundary_hopping),
        format_sig(spec.site_energy),
        spec.n_sites
    )
}
