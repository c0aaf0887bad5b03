//! Quantum walks of two interacting hard-core bosons on one-dimensional
//! lattices with power-law hopping `t/|i-j|^α` and interactions `v/|i-j|^β`.
//!
//! Energies are in units of `t`, times in units of `1/t`, and `ħ = 1`.
//! Sites are 0-based throughout the library.

// `!(x > 0.0)` is used deliberately so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod basis;
pub mod dispersion;
pub mod ensemble;
pub mod error;
pub mod model;
pub mod observables;
pub mod openprop;
pub mod spectral;

pub use basis::PairBasis;
pub use dispersion::{band_edges, single_dispersion, BandEdges, MomentumLevel};
pub use ensemble::{DisorderPlan, EnsembleAccumulator, StationarityReport};
pub use error::{Error, Result};
pub use model::{
    build_hamiltonian, nn_mode_hamiltonian, HamiltonianMatrix, HoppingMode, ModelSpec,
};
pub use observables::{CorrelationMatrix, DensityProfile, QuadrantWeights};
pub use openprop::{ScatterSetup, SurvivalMeasure};
pub use spectral::{eigendecompose, evolve, PairState, SpectralDecomposition};
