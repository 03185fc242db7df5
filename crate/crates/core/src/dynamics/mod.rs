//! Time-dependent Hamiltonian assembly and Lindblad evolution of the density
//! matrix under localisation and thermal dissipators.

mod hamiltonian;
mod integrate;
mod lindblad;

pub use hamiltonian::{HamiltonianBuilder, HamiltonianSource, TiltProfile};
pub use integrate::{evolve, propagate_unitary, CorrectionLog, Trajectory, TrajectorySample};
pub use lindblad::{
    lindblad_rhs, steady_state, DissipatorModel, DissipatorSet, GammaProfile, MasterEquation,
};

use crate::hilbert::{HilbertError, OperatorSet, SpinBasis};
use crate::linalg::{hermitian_eigen, hermiticity_defect, max_abs, trace, CMatrix, CVector};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DynamicsError {
    #[error("invalid physical parameters: {0}")]
    InvalidParams(String),
    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),
    #[error("time {t} outside the schedule range [0, {tau}]")]
    TimeOutOfRange { t: f64, tau: f64 },
    #[error("operator set corrupted: {0}")]
    CorruptedOperators(String),
    #[error("density matrix invalid: {0}")]
    InvalidState(String),
    #[error(
        "positivity violation at t = {t}: min eigenvalue {min_eigenvalue:.3e} < -1e-6; \
         retry with more integration steps (current dt = {dt:.3e})"
    )]
    PositivityViolation {
        t: f64,
        min_eigenvalue: f64,
        dt: f64,
    },
    #[error("steps ({steps}) must be a positive multiple of the stride ({stride})")]
    BadStride { steps: usize, stride: usize },
    #[error("linear solve failed: {0}")]
    SolveFailed(String),
    #[error(transparent)]
    Hilbert(#[from] HilbertError),
}

/// Physical constants of the model in configurable units.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PhysicalParams {
    pub mass: f64,
    pub omega: f64,
    pub hbar: f64,
    /// Energy scale of the Gaussian barrier term.
    pub energy_scale: f64,
    /// Length scale of the Gaussian barrier term.
    pub width: f64,
    /// Localisation (position-decoherence) strength.
    pub localisation: f64,
    /// Thermal coupling strength.
    pub thermal_coupling: f64,
    /// Mean bath occupation.
    pub nbar: f64,
    /// Which operator realization the dissipators use.
    #[serde(default)]
    pub dissipator_model: DissipatorModel,
}

impl PhysicalParams {
    /// Desk-scale defaults: hbar = m = omega = W = 1, E = 5, Lambda = 0.01,
    /// gamma = 0.05, nbar = 1.
    pub fn desk_scale() -> Self {
        Self {
            mass: 1.0,
            omega: 1.0,
            hbar: 1.0,
            energy_scale: 5.0,
            width: 1.0,
            localisation: 0.01,
            thermal_coupling: 0.05,
            nbar: 1.0,
            dissipator_model: DissipatorModel::SpinExact,
        }
    }

    pub fn validate(&self) -> Result<(), DynamicsError> {
        let positive = [
            ("mass", self.mass),
            ("omega", self.omega),
            ("hbar", self.hbar),
            ("width", self.width),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(DynamicsError::InvalidParams(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        let nonnegative = [
            ("energy_scale", self.energy_scale),
            ("localisation", self.localisation),
            ("thermal_coupling", self.thermal_coupling),
            ("nbar", self.nbar),
        ];
        for (name, v) in nonnegative {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(DynamicsError::InvalidParams(format!(
                    "{name} must be non-negative and finite, got {v}"
                )));
            }
        }
        Ok(())
    }

    /// Replace the stored occupation with the Bose-Einstein value at inverse
    /// temperature beta for the configured omega.
    pub fn with_beta(mut self, beta: f64) -> Result<Self, DynamicsError> {
        if !(beta > 0.0) {
            return Err(DynamicsError::InvalidParams(format!(
                "beta must be positive, got {beta}"
            )));
        }
        self.nbar = bose_occupation(beta, self.hbar, self.omega);
        Ok(self)
    }

    pub fn operator_set(&self, basis: SpinBasis) -> OperatorSet {
        OperatorSet::new(basis, self.hbar, self.mass, self.omega)
    }
}

/// Mean occupation (e^{beta hbar omega} - 1)^{-1}.
pub fn bose_occupation(beta: f64, hbar: f64, omega: f64) -> f64 {
    ((beta * hbar * omega).exp() - 1.0).recip()
}

/// The time profile of the trap potential over one run.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum PotentialSchedule {
    /// Harmonic trap plus a Gaussian term interpolating to a double well,
    /// with alpha(t) = 1 - t/tau.
    GaussianToDoubleWell { duration: f64 },
    /// Static quartic double well c1 x^2 + c2 x^4 (c1 < 0 < c2).
    StaticDoubleWell { duration: f64, c1: f64, c2: f64 },
    /// Quartic double well with a linear tilt control alpha_c(t) * x.
    TiltControlled {
        duration: f64,
        c1: f64,
        c2: f64,
        tilt: TiltProfile,
    },
}

impl PotentialSchedule {
    pub fn duration(&self) -> f64 {
        match self {
            Self::GaussianToDoubleWell { duration }
            | Self::StaticDoubleWell { duration, .. }
            | Self::TiltControlled { duration, .. } => *duration,
        }
    }

    pub fn validate(&self) -> Result<(), DynamicsError> {
        if !(self.duration() > 0.0) {
            return Err(DynamicsError::InvalidSchedule(format!(
                "duration must be positive, got {}",
                self.duration()
            )));
        }
        match self {
            Self::GaussianToDoubleWell { .. } => Ok(()),
            Self::StaticDoubleWell { c1, c2, .. } | Self::TiltControlled { c1, c2, .. } => {
                if !(*c1 < 0.0) || !(*c2 > 0.0) {
                    Err(DynamicsError::InvalidSchedule(format!(
                        "double well needs c1 < 0 < c2, got c1 = {c1}, c2 = {c2}"
                    )))
                } else {
                    Ok(())
                }
            }
        }
    }

    /// Interpolation coefficient of the Gaussian-to-double-well ramp.
    pub fn alpha(&self, t: f64) -> f64 {
        1.0 - t / self.duration()
    }
}

/// N x N Hermitian, unit-trace, positive-semidefinite state.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: CMatrix,
}

pub const HERMITICITY_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-10;
pub const EIGENVALUE_FLOOR: f64 = -1e-8;

impl DensityMatrix {
    pub fn new(matrix: CMatrix) -> Result<Self, DynamicsError> {
        if matrix.nrows() != matrix.ncols() {
            return Err(DynamicsError::InvalidState(format!(
                "matrix is {}x{}, expected square",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let herm = hermiticity_defect(&matrix);
        if herm > HERMITICITY_TOL {
            return Err(DynamicsError::InvalidState(format!(
                "hermiticity defect {herm:.3e} exceeds {HERMITICITY_TOL:.0e}"
            )));
        }
        let tr = trace(&matrix);
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(DynamicsError::InvalidState(format!(
                "trace {tr} differs from 1 beyond {TRACE_TOL:.0e}"
            )));
        }
        let (values, _) = hermitian_eigen(&matrix);
        let min = values.first().copied().unwrap_or(0.0);
        if min < EIGENVALUE_FLOOR {
            return Err(DynamicsError::InvalidState(format!(
                "minimum eigenvalue {min:.3e} below {EIGENVALUE_FLOOR:.0e}"
            )));
        }
        Ok(Self { matrix })
    }

    /// Wrap a matrix already checked by the caller (integrator samples are
    /// hermitized, trace-normalized and positivity-gated before storage).
    pub(crate) fn from_trusted(matrix: CMatrix) -> Self {
        Self { matrix }
    }

    pub fn from_pure(state: &CVector) -> Result<Self, DynamicsError> {
        let norm = state.norm();
        if norm == 0.0 {
            return Err(DynamicsError::InvalidState("zero state vector".into()));
        }
        let normalized = state.scale(1.0 / norm);
        let matrix = &normalized * normalized.adjoint();
        Ok(Self { matrix })
    }

    pub fn maximally_mixed(dimension: usize) -> Self {
        Self {
            matrix: CMatrix::identity(dimension, dimension).scale(1.0 / dimension as f64),
        }
    }

    /// Diagonal state with geometric populations of mean occupation nbar
    /// (the detailed-balance fixed point of the thermal dissipator).
    pub fn thermal_geometric(dimension: usize, nbar: f64) -> Self {
        let ratio = if nbar > 0.0 { nbar / (nbar + 1.0) } else { 0.0 };
        let mut pops: Vec<f64> = (0..dimension).map(|n| ratio.powi(n as i32)).collect();
        let norm: f64 = pops.iter().sum();
        for p in &mut pops {
            *p /= norm;
        }
        Self {
            matrix: CMatrix::from_diagonal(&CVector::from_iterator(
                dimension,
                pops.iter().map(|&p| C64::new(p, 0.0)),
            )),
        }
    }

    /// Gibbs state exp(-beta H)/Z from a Hermitian Hamiltonian.
    pub fn gibbs(hamiltonian: &CMatrix, beta: f64) -> Self {
        let (values, vectors) = hermitian_eigen(hamiltonian);
        let ground = values[0];
        let weights: Vec<f64> = values.iter().map(|&e| (-beta * (e - ground)).exp()).collect();
        let z: f64 = weights.iter().sum();
        let diag = CVector::from_iterator(values.len(), weights.iter().map(|&w| C64::new(w / z, 0.0)));
        Self {
            matrix: &vectors * CMatrix::from_diagonal(&diag) * vectors.adjoint(),
        }
    }

    /// Draw a full-rank random state (Ginibre construction) from a seeded RNG.
    pub fn random(dimension: usize, seed: u64) -> Self {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut normal = || {
            let u1: f64 = rng.random_range(f64::MIN_POSITIVE..1.0);
            let u2: f64 = rng.random_range(0.0..1.0);
            (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
        };
        let g = CMatrix::from_fn(dimension, dimension, |_, _| C64::new(normal(), normal()));
        let mut m = &g * g.adjoint();
        let tr = trace(&m).re;
        m /= C64::new(tr, 0.0);
        Self { matrix: m }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn dimension(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn purity(&self) -> f64 {
        trace(&(&self.matrix * &self.matrix)).re
    }

    pub fn expectation(&self, op: &CMatrix) -> C64 {
        trace(&(op * &self.matrix))
    }

    /// Smallest eigenvalue (for positivity diagnostics).
    pub fn min_eigenvalue(&self) -> f64 {
        hermitian_eigen(&self.matrix).0[0]
    }

    /// Fidelity-free distance helper: max-abs difference of matrices.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        max_abs(&(&self.matrix - &other.matrix))
    }
}
