//! Hamiltonian assembly. Scalar potentials are applied through the spectral
//! decomposition of the position quadrature: diagonalize x once, map the
//! potential over its eigenvalues, rotate back. Exact on the truncated space
//! and well behaved for the Gaussian barrier, which has poor operator-series
//! convergence.

use super::{DynamicsError, PhysicalParams, PotentialSchedule};
use crate::hilbert::OperatorSet;
use crate::linalg::{hermiticity_defect, CMatrix};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::Arc;

/// Shape of the linear tilt control alpha_c(t).
///
/// Both shapes are smooth (raised cosine) so the control derivative stays
/// bounded at segment joints, and both vanish at t = 0 and t = tau.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "kebab-case")]
pub enum TiltProfile {
    /// Ramp up over `ramp_fraction * tau`, hold, ramp down symmetrically.
    RampHoldRamp { amplitude: f64, ramp_fraction: f64 },
    /// Single smooth lobe amplitude * sin^2(pi t / tau).
    SineLobe { amplitude: f64 },
}

impl TiltProfile {
    pub fn amplitude(&self) -> f64 {
        match self {
            Self::RampHoldRamp { amplitude, .. } | Self::SineLobe { amplitude } => *amplitude,
        }
    }

    pub fn with_amplitude(self, amplitude: f64) -> Self {
        match self {
            Self::RampHoldRamp { ramp_fraction, .. } => Self::RampHoldRamp {
                amplitude,
                ramp_fraction,
            },
            Self::SineLobe { .. } => Self::SineLobe { amplitude },
        }
    }

    pub fn value(&self, t: f64, tau: f64) -> f64 {
        match *self {
            Self::RampHoldRamp {
                amplitude,
                ramp_fraction,
            } => {
                let tr = ramp_fraction * tau;
                if t < tr {
                    amplitude * 0.5 * (1.0 - (PI * t / tr).cos())
                } else if t <= tau - tr {
                    amplitude
                } else {
                    amplitude * 0.5 * (1.0 - (PI * (tau - t) / tr).cos())
                }
            }
            Self::SineLobe { amplitude } => amplitude * (PI * t / tau).sin().powi(2),
        }
    }

    pub fn derivative(&self, t: f64, tau: f64) -> f64 {
        match *self {
            Self::RampHoldRamp {
                amplitude,
                ramp_fraction,
            } => {
                let tr = ramp_fraction * tau;
                if t < tr {
                    amplitude * 0.5 * PI / tr * (PI * t / tr).sin()
                } else if t <= tau - tr {
                    0.0
                } else {
                    -amplitude * 0.5 * PI / tr * (PI * (tau - t) / tr).sin()
                }
            }
            Self::SineLobe { amplitude } => {
                amplitude * PI / tau * (2.0 * PI * t / tau).sin()
            }
        }
    }
}

/// Anything that can produce the system Hamiltonian at a given time.
pub trait HamiltonianSource: Send + Sync {
    fn hamiltonian(&self, t: f64) -> Result<CMatrix, DynamicsError>;
    fn duration(&self) -> f64;
}

/// Builds H(t) = p^2/2m + V(x, t) for a [`PotentialSchedule`].
pub struct HamiltonianBuilder {
    ops: Arc<OperatorSet>,
    params: PhysicalParams,
    schedule: PotentialSchedule,
    kinetic: CMatrix,
}

impl HamiltonianBuilder {
    pub fn new(
        ops: Arc<OperatorSet>,
        params: PhysicalParams,
        schedule: PotentialSchedule,
    ) -> Result<Self, DynamicsError> {
        params.validate()?;
        schedule.validate()?;
        let defect = hermiticity_defect(&ops.x);
        if defect > 1e-12 {
            return Err(DynamicsError::CorruptedOperators(format!(
                "position operator hermiticity defect {defect:.3e}"
            )));
        }
        let kinetic = (&ops.p * &ops.p).scale(1.0 / (2.0 * params.mass));
        Ok(Self {
            ops,
            params,
            schedule,
            kinetic,
        })
    }

    pub fn schedule(&self) -> &PotentialSchedule {
        &self.schedule
    }

    pub fn params(&self) -> &PhysicalParams {
        &self.params
    }

    pub fn operators(&self) -> &Arc<OperatorSet> {
        &self.ops
    }

    /// Scalar potential at position xi and time t.
    pub fn scalar_potential(&self, xi: f64, t: f64) -> f64 {
        let p = &self.params;
        match &self.schedule {
            PotentialSchedule::GaussianToDoubleWell { .. } => {
                let alpha = self.schedule.alpha(t);
                let u = xi * xi / (2.0 * p.width * p.width);
                0.5 * p.mass * p.omega * p.omega * xi * xi
                    - p.energy_scale * (alpha + (1.0 - alpha) * u) * (-u).exp()
            }
            PotentialSchedule::StaticDoubleWell { c1, c2, .. } => {
                c1 * xi * xi + c2 * xi.powi(4)
            }
            PotentialSchedule::TiltControlled { c1, c2, tilt, .. } => {
                c1 * xi * xi + c2 * xi.powi(4) + tilt.value(t, self.schedule.duration()) * xi
            }
        }
    }
}

impl HamiltonianSource for HamiltonianBuilder {
    fn hamiltonian(&self, t: f64) -> Result<CMatrix, DynamicsError> {
        let tau = self.schedule.duration();
        if !(0.0..=tau * (1.0 + 1e-12)).contains(&t) {
            return Err(DynamicsError::TimeOutOfRange { t, tau });
        }
        let potential = self.ops.potential_matrix(|xi| self.scalar_potential(xi, t));
        Ok(&self.kinetic + potential)
    }

    fn duration(&self) -> f64 {
        self.schedule.duration()
    }
}
