//! Simulator and analysis toolkit for a two-dimensional measurement-only
//! circuit of random nearest-neighbour `XX` and `ZZ` checks.
//!
//! States are CSS stabilizer states stored as a pair of GF(2) sectors
//! ([`tableau::SectorTableau`]). Trajectories sample checks on an `L × L`
//! lattice ([`lattice`]), record correlators, entropies and site classes
//! ([`observables`]), and ensembles of runs are averaged in [`ensemble`].
//! [`analysis`] fits profiles and performs the finite-size scaling collapse;
//! [`oracle`] and [`verify`] cross-check the tableau against a dense
//! state-vector simulation.

pub mod analysis;
pub mod ensemble;
pub mod error;
pub mod gf2;
pub mod lattice;
pub mod observables;
pub mod oracle;
pub mod snapshot;
pub mod tableau;
pub mod verify;

pub use ensemble::{run_ensemble, EnsembleStats, Estimate, GridPoint, RunConfig, Schedule, Trajectory};
pub use error::{Error, Result};
pub use lattice::{Boundary, CheckKind, Direction, LatticeSpec, MixChances};
pub use observables::{ObservableRecord, Pauli, Scalar};
pub use tableau::{Basis, PauliSupport, SectorTableau};
