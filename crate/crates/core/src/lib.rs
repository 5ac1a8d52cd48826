//! Spectrally gated dissipation of a finite target coupled to a
//! semi-infinite ancilla chain.
//!
//! The joint dynamics is a single particle hopping on the chain states
//! `e_j = |j> ⊗ |phi_j>`. Whether the target relaxes depends on whether the
//! impurity at site 0 supports a bound state outside the bath band
//! `[-2B, 2B]`:
//!
//! - [`chain`] builds the truncated tridiagonal Hamiltonian and splits the
//!   block model into independent chains.
//! - [`spectral`] decides decay versus trapping, finds bound states and
//!   predicts the trapped weight; it also produces phase diagrams.
//! - [`propagator`] evolves chain states exactly and evaluates site
//!   occupations and the even-odd difference.
//! - [`reduced`] traces out the ancilla to give the target density matrix.
//! - [`lindblad`] integrates the Lindblad master equation as a baseline.
//! - [`presets`] wires these together into the standard scenarios, and
//!   [`cli`] exposes everything as the `specdis` command.
//!
//! ```
//! use specdis::{build_chain, propagate, AmplitudeVector, ChainSpec};
//!
//! let spec = ChainSpec::new(1.0, 1.0, 0.0, 200).unwrap();
//! let h = build_chain(&spec).unwrap();
//! let psi0 = AmplitudeVector::site(200, 0).unwrap();
//! let psi = propagate(&h, &psi0, &[40.0]).unwrap();
//! assert!(psi[0].occupation(0).unwrap() < 0.05);
//! ```

mod chebyshev;

pub mod chain;
pub mod cli;
pub mod error;
pub mod lindblad;
pub mod output;
pub mod presets;
pub mod propagator;
pub mod reduced;
pub mod spectral;

pub use chain::{
    basis_index, build_chain, decompose_block, BlockSpec, ChainHamiltonian, ChainSpec,
};
pub use error::{Error, Result};
pub use lindblad::{JumpOperator, LindbladModel};
pub use propagator::{
    fit_decay_rate, occupation_heatmap, propagate, simulate, AmplitudeVector, Observable,
    ObservableSeries, PropagationResult, Propagator,
};
pub use reduced::{
    mix_reduce, parity_mix_state, reduce, run_example4, Branch, TargetDensityMatrix, TargetMap,
    TargetState,
};
pub use spectral::{
    classify, decay_condition, find_bound_states, phase_diagram, trapped_weight, BoundState,
    DecayVerdict, GridAxis,
};
