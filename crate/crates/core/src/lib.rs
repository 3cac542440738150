//! Spectral-density-based, measure-preserving rejection ABC for
//! Hamiltonian-type stochastic differential equations.
//!
//! The crate is organised bottom-up:
//!
//! * [`linalg`]: matrix exponential, increment covariance, PSD Cholesky.
//! * [`models`]: the damped oscillators and the Jansen–Rit neural mass model.
//! * [`sim`]: exact, Euler–Maruyama and Strang splitting simulators.
//! * [`summaries`]: kernel density and smoothed-periodogram estimates, IAE.
//! * [`abc`]: priors, pilot weight, rejection sampler, posterior statistics.

pub mod abc;
pub mod error;
pub mod ingest;
pub mod linalg;
pub mod models;
pub mod params;
pub mod rng;
pub mod sim;
pub mod stats;
pub mod summaries;

pub use abc::{
    distance, draw_stats, pilot_weight, posterior_stats, run_abc, AbcRun, AbcSettings, Aggregator, DistanceConfig, ModelBuilder,
    ModelSpec, PilotReport, PosteriorStats, Provenance, ReferenceSet, UniformPrior,
};
pub use error::{Error, Result};
pub use linalg::{cholesky_psd, increment_covariance, matrix_exp, Matrix};
pub use models::{HamiltonianModel, ModelId};
pub use params::ParameterVector;
pub use rng::RngStream;
pub use sim::{simulate, Integrator, Scheme, SimGrid, Trajectory};
pub use summaries::{iae, summarize, DensityEstimate, SpectralEstimate, SummaryConfig, SummaryPair};
