//! Simulation library for a finite spin system in a time-varying potential.

pub mod dynamics;
pub mod hilbert;
mod linalg;
pub mod phasespace;

pub use dynamics::{DensityMatrix, MasterEquation, PhysicalParams, PotentialSchedule, Trajectory};
pub use hilbert::{OperatorSet, SpinBasis};
pub use phasespace::{EntropyRecord, HusimiField, SphereGrid};
