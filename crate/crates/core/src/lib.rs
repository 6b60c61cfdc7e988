//! Numerical ergodic theory: orbits, invariant measures, Lyapunov spectra,
//! statistical attractors, SRB-like measures, mixing and entropy.

pub mod attractors;
pub mod ergodic_stats;
pub mod entropy_mixing;
pub mod error;
pub mod experiment;
pub mod lyapunov;
pub mod measures;
pub mod phase_space;
pub mod systems;

pub use error::{Error, Result};
pub use phase_space::{GridSet, Partition, PhaseSpace, Point, SpaceKind};
pub use systems::{Iterate, OrbitSegment, Params, SystemSpec};
