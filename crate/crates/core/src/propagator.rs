//! Exact time evolution on the truncated chain and the observables read off
//! it: site occupations `n_j`, the even-odd difference `P`, occupation maps
//! for the light-cone picture, and exponential decay fits.
//!
//! `exp(-i H t)` is applied with a Chebyshev expansion on the tridiagonal
//! matrix, so memory stays `O(N)`. Long intervals are split into sub-steps
//! whose expansion argument stays below a fixed bound.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::chain::{build_chain, ChainHamiltonian, ChainSpec};
use crate::chebyshev::{apply_step, StepCoefficients, Workspace, MAX_ARGUMENT};
use crate::error::{ensure_finite, Error, Result};

/// Tolerance on `| ||psi|| - 1 |`.
pub const NORM_TOL: f64 = 1e-10;

/// Occupation of the last site that counts as having reached the wall.
pub const BOUNDARY_THRESHOLD: f64 = 1e-3;

/// Default safety factor between the light-cone length and the chain length.
pub const DEFAULT_MARGIN: f64 = 1.25;

/// Unit-norm complex amplitudes over the chain basis `e_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeVector(Vec<Complex64>);

impl AmplitudeVector {
    pub fn new(amps: Vec<Complex64>) -> Result<Self> {
        if amps.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::NonFinite("amplitude vector".into()));
        }
        let v = Self(amps);
        let norm = v.norm_sqr();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidArgument(format!(
                "amplitudes must have unit norm, got |psi|^2 = {norm}"
            )));
        }
        Ok(v)
    }

    /// Scales `amps` to unit norm.
    pub fn normalized(amps: Vec<Complex64>) -> Result<Self> {
        if amps.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::NonFinite("amplitude vector".into()));
        }
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::InvalidArgument("zero vector".into()));
        }
        Self::new(amps.into_iter().map(|a| a / norm).collect())
    }

    /// The basis state `e_site` on a chain of `n_sites`.
    pub fn site(n_sites: usize, site: usize) -> Result<Self> {
        if site >= n_sites {
            return Err(Error::IndexOutOfRange {
                index: site,
                len: n_sites,
            });
        }
        let mut amps = vec![Complex64::default(); n_sites];
        amps[site] = Complex64::new(1.0, 0.0);
        Ok(Self(amps))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.0
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `<n_j> = |psi_j|^2`.
    pub fn occupation(&self, site: usize) -> Result<f64> {
        self.0
            .get(site)
            .map(|a| a.norm_sqr())
            .ok_or(Error::IndexOutOfRange {
                index: site,
                len: self.len(),
            })
    }

    pub fn occupations(&self) -> Vec<f64> {
        self.0.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Even-odd difference `<P> = sum_even |psi_j|^2 - sum_odd |psi_j|^2`.
    pub fn parity(&self) -> f64 {
        self.0
            .iter()
            .enumerate()
            .map(|(j, a)| {
                if j % 2 == 0 {
                    a.norm_sqr()
                } else {
                    -a.norm_sqr()
                }
            })
            .sum()
    }
}

pub fn occupation(psi: &AmplitudeVector, site: usize) -> Result<f64> {
    psi.occupation(site)
}

pub fn parity(psi: &AmplitudeVector) -> f64 {
    psi.parity()
}

/// Applies `exp(-i H t)` to amplitude vectors.
#[derive(Debug, Clone)]
pub struct Propagator<'a> {
    hamiltonian: &'a ChainHamiltonian,
    center: f64,
    radius: f64,
}

impl<'a> Propagator<'a> {
    pub fn new(hamiltonian: &'a ChainHamiltonian) -> Self {
        let (lo, hi) = hamiltonian.spectral_bounds();
        Self {
            hamiltonian,
            center: 0.5 * (lo + hi),
            radius: 0.5 * (hi - lo),
        }
    }

    fn substeps(&self, dt: f64) -> (usize, f64) {
        let count = ((self.radius * dt.abs()) / MAX_ARGUMENT).ceil().max(1.0) as usize;
        (count, dt / count as f64)
    }

    fn advance(
        &self,
        amps: &mut [Complex64],
        dt: f64,
        cache: &mut Option<StepCoefficients>,
        ws: &mut Workspace,
    ) {
        if dt == 0.0 {
            return;
        }
        let (count, sub) = self.substeps(dt);
        if cache.as_ref().map(|c| c.dt()) != Some(sub) {
            *cache = Some(StepCoefficients::new(self.center, self.radius, sub));
        }
        let step = cache.as_ref().expect("coefficients cached");
        for _ in 0..count {
            apply_step(self.hamiltonian, self.center, self.radius, step, amps, ws);
        }
    }

    /// `exp(-i H t) psi` for any finite `t`, including negative times.
    pub fn evolve(&self, psi: &AmplitudeVector, t: f64) -> Result<AmplitudeVector> {
        ensure_finite("t", t)?;
        self.check_len(psi)?;
        let mut amps = psi.0.clone();
        self.advance(&mut amps, t, &mut None, &mut Workspace::default());
        checked(amps, t)
    }

    /// Evolves `psi0` to each of the sorted, non-negative `times`.
    pub fn propagate(&self, psi0: &AmplitudeVector, times: &[f64]) -> Result<Vec<AmplitudeVector>> {
        let mut out = Vec::with_capacity(times.len());
        self.for_each_time(psi0, times, |_, psi| {
            out.push(psi.clone());
            Ok(())
        })?;
        Ok(out)
    }

    /// Streams `(t, psi(t))` to `visit` without keeping the trajectory.
    pub fn for_each_time<F>(
        &self,
        psi0: &AmplitudeVector,
        times: &[f64],
        mut visit: F,
    ) -> Result<()>
    where
        F: FnMut(f64, &AmplitudeVector) -> Result<()>,
    {
        self.check_len(psi0)?;
        validate_times(times)?;
        let mut cache = None;
        let mut ws = Workspace::default();
        let mut current = psi0.clone();
        let mut t_prev = 0.0;
        for &t in times {
            self.advance(&mut current.0, t - t_prev, &mut cache, &mut ws);
            t_prev = t;
            let norm = current.norm_sqr();
            if !norm.is_finite() || (norm - 1.0).abs() > NORM_TOL {
                return Err(Error::InvariantViolation(format!(
                    "norm drifted to {norm} at t = {t}"
                )));
            }
            visit(t, &current)?;
        }
        Ok(())
    }

    fn check_len(&self, psi: &AmplitudeVector) -> Result<()> {
        if psi.len() != self.hamiltonian.len() {
            return Err(Error::DimensionMismatch {
                expected: self.hamiltonian.len(),
                got: psi.len(),
            });
        }
        Ok(())
    }
}

fn checked(amps: Vec<Complex64>, t: f64) -> Result<AmplitudeVector> {
    let v = AmplitudeVector(amps);
    let norm = v.norm_sqr();
    if !norm.is_finite() || (norm - 1.0).abs() > NORM_TOL {
        return Err(Error::InvariantViolation(format!(
            "norm drifted to {norm} at t = {t}"
        )));
    }
    Ok(v)
}

fn validate_times(times: &[f64]) -> Result<()> {
    for (k, &t) in times.iter().enumerate() {
        ensure_finite("t", t)?;
        if t < 0.0 {
            return Err(Error::InvalidArgument(format!("negative time {t}")));
        }
        if k > 0 && t < times[k - 1] {
            return Err(Error::InvalidArgument("times must be sorted".into()));
        }
    }
    Ok(())
}

/// `exp(-i H t) psi0` at each of `times`.
pub fn propagate(
    hamiltonian: &ChainHamiltonian,
    psi0: &AmplitudeVector,
    times: &[f64],
) -> Result<Vec<AmplitudeVector>> {
    Propagator::new(hamiltonian).propagate(psi0, times)
}

/// `0, dt, 2 dt, ... <= t_max`.
pub fn time_grid(t_max: f64, dt: f64) -> Result<Vec<f64>> {
    ensure_finite("t_max", t_max)?;
    ensure_finite("dt", dt)?;
    if dt <= 0.0 || t_max <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "need dt > 0 and t_max > 0, got dt = {dt}, t_max = {t_max}"
        )));
    }
    let count = (t_max / dt + 1e-9).floor() as usize;
    Ok((0..=count).map(|k| k as f64 * dt).collect())
}

/// Chain length needed to keep the wall out of sight until `t_max`:
/// `ceil(2 B t_max margin)`, at least 2.
pub fn light_cone_sites(bulk_hopping: f64, t_max: f64, margin: f64) -> usize {
    ((2.0 * bulk_hopping * t_max * margin).ceil() as usize).max(2)
}

/// Default sampling interval `0.1 / B`.
pub fn default_dt(bulk_hopping: f64) -> f64 {
    0.1 / bulk_hopping
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Observable {
    /// `<n_j>`
    Occupation(usize),
    /// Even-odd difference.
    Parity,
    /// `sum_j <n_j>`
    Norm,
}

impl Observable {
    pub fn evaluate(&self, psi: &AmplitudeVector) -> Result<f64> {
        match *self {
            Observable::Occupation(j) => psi.occupation(j),
            Observable::Parity => Ok(psi.parity()),
            Observable::Norm => Ok(psi.norm_sqr()),
        }
    }
}

impl fmt::Display for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Observable::Occupation(j) => write!(f, "n{j}"),
            Observable::Parity => f.write_str("parity"),
            Observable::Norm => f.write_str("norm"),
        }
    }
}

impl FromStr for Observable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "parity" | "P" => Ok(Observable::Parity),
            "norm" => Ok(Observable::Norm),
            other => other
                .strip_prefix('n')
                .and_then(|j| j.parse().ok())
                .map(Observable::Occupation)
                .ok_or_else(|| Error::InvalidArgument(format!("unknown observable '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ObservableSeries {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl ObservableSeries {
    pub fn new(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if times.len() != values.len() {
            return Err(Error::DimensionMismatch {
                expected: times.len(),
                got: values.len(),
            });
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidArgument(
                "times must be strictly increasing".into(),
            ));
        }
        if values.iter().chain(&times).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("series".into()));
        }
        Ok(Self { times, values })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> Option<(f64, f64)> {
        Some((*self.times.last()?, *self.values.last()?))
    }

    /// Value at the sample closest to `t`.
    pub fn at(&self, t: f64) -> Option<f64> {
        let idx = self
            .times
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - t).abs().total_cmp(&(b.1 - t).abs()))?
            .0;
        Some(self.values[idx])
    }

    /// Arithmetic mean of the samples with `lo <= t <= hi`.
    pub fn mean_over(&self, lo: f64, hi: f64) -> Option<f64> {
        let picked: Vec<f64> = self
            .times
            .iter()
            .zip(&self.values)
            .filter(|(t, _)| **t >= lo && **t <= hi)
            .map(|(_, v)| *v)
            .collect();
        if picked.is_empty() {
            None
        } else {
            Some(picked.iter().sum::<f64>() / picked.len() as f64)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropagationResult {
    pub series: BTreeMap<String, ObservableSeries>,
    /// First sampled time with `<n_{N-1}> > BOUNDARY_THRESHOLD`.
    pub boundary_time: Option<f64>,
    /// `N / (2B)`.
    pub valid_horizon: f64,
}

/// Evolves `psi0` under the chain of `spec` and records `observables`.
pub fn simulate(
    spec: &ChainSpec,
    psi0: &AmplitudeVector,
    times: &[f64],
    observables: &[Observable],
) -> Result<PropagationResult> {
    let h = build_chain(spec)?;
    let last = spec.n_sites - 1;
    let mut columns = vec![Vec::with_capacity(times.len()); observables.len()];
    let mut boundary_time = None;
    Propagator::new(&h).for_each_time(psi0, times, |t, psi| {
        for (col, obs) in columns.iter_mut().zip(observables) {
            col.push(obs.evaluate(psi)?);
        }
        if boundary_time.is_none() && psi.occupation(last)? > BOUNDARY_THRESHOLD {
            boundary_time = Some(t);
        }
        Ok(())
    })?;
    let mut series = BTreeMap::new();
    for (obs, values) in observables.iter().zip(columns) {
        series.insert(
            obs.to_string(),
            ObservableSeries::new(times.to_vec(), values)?,
        );
    }
    Ok(PropagationResult {
        series,
        boundary_time,
        valid_horizon: spec.valid_horizon(),
    })
}

/// `<n_j>(t)` on a time grid, one row per time.
#[derive(Debug, Clone, PartialEq)]
pub struct OccupationHeatmap {
    pub times: Vec<f64>,
    pub occupations: Vec<Vec<f64>>,
    pub boundary_time: Option<f64>,
    pub valid_horizon: f64,
}

pub fn occupation_heatmap(
    spec: &ChainSpec,
    psi0: &AmplitudeVector,
    t_max: f64,
    dt: f64,
) -> Result<OccupationHeatmap> {
    let times = time_grid(t_max, dt)?;
    let h = build_chain(spec)?;
    let last = spec.n_sites - 1;
    let mut occupations = Vec::with_capacity(times.len());
    let mut boundary_time = None;
    Propagator::new(&h).for_each_time(psi0, &times, |t, psi| {
        let row = psi.occupations();
        if boundary_time.is_none() && row[last] > BOUNDARY_THRESHOLD {
            boundary_time = Some(t);
        }
        occupations.push(row);
        Ok(())
    })?;
    Ok(OccupationHeatmap {
        times,
        occupations,
        boundary_time,
        valid_horizon: spec.valid_horizon(),
    })
}

/// Minimum samples in a fit window.
pub const MIN_FIT_SAMPLES: usize = 5;

/// Negated least-squares slope of `ln(value)` against time over the samples
/// in `[window.0, window.1]`.
pub fn fit_decay_rate(series: &ObservableSeries, window: (f64, f64)) -> Result<f64> {
    let (lo, hi) = window;
    let picked: Vec<(f64, f64)> = series
        .times
        .iter()
        .zip(&series.values)
        .filter(|(t, _)| **t >= lo && **t <= hi)
        .map(|(t, v)| (*t, *v))
        .collect();
    if picked.len() < MIN_FIT_SAMPLES {
        return Err(Error::InvalidArgument(format!(
            "fit window [{lo}, {hi}] holds {} samples, need {MIN_FIT_SAMPLES}",
            picked.len()
        )));
    }
    if let Some((t, v)) = picked.iter().find(|(_, v)| *v <= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "non-positive value {v} at t = {t} inside the fit window"
        )));
    }
    let n = picked.len() as f64;
    let mean_t = picked.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = picked.iter().map(|p| p.1.ln()).sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for &(t, v) in &picked {
        let dx = t - mean_t;
        sxy += dx * (v.ln() - mean_y);
        sxx += dx * dx;
    }
    Ok(-(sxy / sxx) + 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn occupation_examples() {
        let e0 = AmplitudeVector::site(6, 0).unwrap();
        assert_eq!(e0.occupation(0).unwrap(), 1.0);
        assert_eq!(e0.occupation(5).unwrap(), 0.0);
        assert!(matches!(
            e0.occupation(6),
            Err(Error::IndexOutOfRange { .. })
        ));
        let s = 0.5f64.sqrt();
        let plus = AmplitudeVector::new(vec![c(s, 0.0), c(s, 0.0), c(0.0, 0.0)]).unwrap();
        assert!((plus.occupation(1).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn parity_examples() {
        assert_eq!(AmplitudeVector::site(4, 0).unwrap().parity(), 1.0);
        assert_eq!(AmplitudeVector::site(4, 1).unwrap().parity(), -1.0);
        let s = 0.5f64.sqrt();
        let plus = AmplitudeVector::new(vec![c(s, 0.0), c(0.0, s)]).unwrap();
        assert!(plus.parity().abs() < 1e-15);
    }

    #[test]
    fn amplitude_validation() {
        assert!(AmplitudeVector::new(vec![c(1.0, 0.0), c(1.0, 0.0)]).is_err());
        assert!(AmplitudeVector::new(vec![c(f64::NAN, 0.0)]).is_err());
        assert!(AmplitudeVector::normalized(vec![c(0.0, 0.0)]).is_err());
        let v = AmplitudeVector::normalized(vec![c(3.0, 0.0), c(0.0, 4.0)]).unwrap();
        assert!((v.occupation(0).unwrap() - 0.36).abs() < 1e-15);
        assert!(AmplitudeVector::site(3, 3).is_err());
    }

    #[test]
    fn decoupled_site_only_picks_up_a_phase() {
        let spec = ChainSpec::new(1.0, 0.0, 0.7, 10).unwrap();
        let h = build_chain(&spec).unwrap();
        let e0 = AmplitudeVector::site(10, 0).unwrap();
        let times = [0.0, 0.5, 3.0, 17.25];
        for (t, psi) in times.iter().zip(propagate(&h, &e0, &times).unwrap()) {
            let expect = Complex64::from_polar(1.0, -0.7 * t);
            assert!((psi.amplitudes()[0] - expect).norm() < 1e-12, "t={t}");
            assert!((psi.occupation(0).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_hamiltonian_is_identity() {
        let h = ChainHamiltonian::from_parts(vec![0.0, 0.0], vec![0.0]).unwrap();
        let psi = AmplitudeVector::site(2, 1).unwrap();
        assert_eq!(Propagator::new(&h).evolve(&psi, 5.0).unwrap(), psi);
    }

    #[test]
    fn rejects_bad_inputs() {
        let h = build_chain(&ChainSpec::new(1.0, 1.0, 0.0, 8).unwrap()).unwrap();
        let short = AmplitudeVector::site(4, 0).unwrap();
        assert!(matches!(
            propagate(&h, &short, &[1.0]),
            Err(Error::DimensionMismatch { .. })
        ));
        let e0 = AmplitudeVector::site(8, 0).unwrap();
        assert!(propagate(&h, &e0, &[2.0, 1.0]).is_err());
        assert!(propagate(&h, &e0, &[-1.0]).is_err());
        assert!(matches!(
            propagate(&h, &e0, &[f64::NAN]),
            Err(Error::NonFinite(_))
        ));
    }

    #[test]
    fn long_interval_matches_many_short_steps() {
        let spec = ChainSpec::new(1.0, 0.6, 0.3, 120).unwrap();
        let h = build_chain(&spec).unwrap();
        let e0 = AmplitudeVector::site(120, 0).unwrap();
        let one = propagate(&h, &e0, &[37.0]).unwrap().pop().unwrap();
        let grid = time_grid(37.0, 0.1).unwrap();
        let many = propagate(&h, &e0, &grid).unwrap().pop().unwrap();
        for (a, b) in one.amplitudes().iter().zip(many.amplitudes()) {
            assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn forward_then_backward_is_identity() {
        let spec = ChainSpec::new(1.0, 0.8, -0.4, 60).unwrap();
        let h = build_chain(&spec).unwrap();
        let p = Propagator::new(&h);
        let psi0 = AmplitudeVector::site(60, 2).unwrap();
        let fwd = p.evolve(&psi0, 23.5).unwrap();
        let back = p.evolve(&fwd, -23.5).unwrap();
        for (a, b) in back.amplitudes().iter().zip(psi0.amplitudes()) {
            assert!((a - b).norm() < 1e-8);
        }
    }

    #[test]
    fn time_grid_and_light_cone() {
        let g = time_grid(1.0, 0.25).unwrap();
        assert_eq!(g, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(time_grid(60.0, 0.1).unwrap().len(), 601);
        assert!(time_grid(1.0, 0.0).is_err());
        assert_eq!(light_cone_sites(1.0, 40.0, 1.25), 100);
        assert_eq!(light_cone_sites(1.0, 0.1, 1.0), 2);
    }

    #[test]
    fn observable_names_round_trip() {
        for obs in [
            Observable::Occupation(0),
            Observable::Occupation(79),
            Observable::Parity,
            Observable::Norm,
        ] {
            assert_eq!(obs.to_string().parse::<Observable>().unwrap(), obs);
        }
        assert!("q3".parse::<Observable>().is_err());
    }

    #[test]
    fn fit_recovers_synthetic_rate() {
        let times: Vec<f64> = (0..50).map(|k| k as f64 * 0.2).collect();
        let values = times.iter().map(|t| 2.0 * (-0.37 * t).exp()).collect();
        let s = ObservableSeries::new(times, values).unwrap();
        assert!((fit_decay_rate(&s, (1.0, 9.0)).unwrap() - 0.37).abs() < 1e-12);
    }

    #[test]
    fn fit_of_constant_is_zero() {
        let times: Vec<f64> = (0..10).map(f64::from).collect();
        let s = ObservableSeries::new(times, vec![0.4; 10]).unwrap();
        assert_eq!(fit_decay_rate(&s, (0.0, 9.0)).unwrap(), 0.0);
    }

    #[test]
    fn fit_errors() {
        let times: Vec<f64> = (0..10).map(f64::from).collect();
        let mut values = vec![1.0; 10];
        values[4] = 0.0;
        let s = ObservableSeries::new(times.clone(), values).unwrap();
        assert!(fit_decay_rate(&s, (0.0, 9.0)).is_err());
        let s = ObservableSeries::new(times, vec![1.0; 10]).unwrap();
        assert!(fit_decay_rate(&s, (0.0, 3.0)).is_err());
    }

    #[test]
    fn series_invariants() {
        assert!(ObservableSeries::new(vec![0.0, 0.0], vec![1.0, 1.0]).is_err());
        assert!(ObservableSeries::new(vec![0.0, 1.0], vec![1.0]).is_err());
        assert!(ObservableSeries::new(vec![0.0, 1.0], vec![1.0, f64::INFINITY]).is_err());
    }

    #[test]
    fn decoupled_chain_never_reaches_wall() {
        let spec = ChainSpec::new(1.0, 0.0, 0.5, 20).unwrap();
        let e0 = AmplitudeVector::site(20, 0).unwrap();
        let map = occupation_heatmap(&spec, &e0, 50.0, 0.5).unwrap();
        assert_eq!(map.boundary_time, None);
        assert_eq!(map.occupations.len(), map.times.len());
    }
}
