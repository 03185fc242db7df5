//! Lindblad generator: localisation (double-commutator in a position-like
//! operator) plus a thermal dissipator, and a direct steady-state solver for
//! the static generator.
//!
//! The dissipators come in two operator realizations. `SpinExact` uses the
//! angular-momentum images (localisation through J_x, thermal jumps through
//! J_+/J_-), which pair exactly with the sphere-quadrature entropy rates in
//! [`crate::phasespace`]. `BosonicTruncated` uses the bare truncated ladder
//! operators; it reproduces the same physics in the low-occupation sector
//! but the phase-space rate identities then hold only approximately.

use super::hamiltonian::HamiltonianSource;
use super::{DynamicsError, PhysicalParams};
use crate::hilbert::OperatorSet;
use crate::linalg::{anticommutator, commutator, CMatrix};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DissipatorModel {
    #[default]
    SpinExact,
    BosonicTruncated,
}

/// Thermal coupling over time; protocols may raise it inside a cooling
/// window.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct GammaProfile {
    pub base: f64,
    pub cooling: Option<CoolingWindow>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CoolingWindow {
    pub gamma: f64,
    pub start: f64,
    pub end: f64,
}

impl GammaProfile {
    pub fn constant(base: f64) -> Self {
        Self {
            base,
            cooling: None,
        }
    }

    pub fn at(&self, t: f64) -> f64 {
        match self.cooling {
            Some(w) if t >= w.start && t <= w.end => w.gamma,
            _ => self.base,
        }
    }
}

/// Jump operators and strengths of both dissipation channels, with the
/// operator products cached.
pub struct DissipatorSet {
    pub model: DissipatorModel,
    pub lambda: f64,
    pub nbar: f64,
    /// Position-like operator of the localisation channel.
    pub loc_op: CMatrix,
    /// Jump toward the vacuum sector (rate gamma (nbar + 1)).
    pub decay: CMatrix,
    /// Jump away from the vacuum sector (rate gamma nbar).
    pub excite: CMatrix,
    loc_sq: CMatrix,
    decay_gram: CMatrix,
    excite_gram: CMatrix,
}

impl DissipatorSet {
    pub fn new(ops: &OperatorSet, params: &PhysicalParams) -> Self {
        let model = params.dissipator_model;
        let (loc_op, decay, excite) = match model {
            DissipatorModel::SpinExact => {
                let hp = crate::hilbert::hp_correspondence(ops.basis);
                (ops.jx.clone(), hp.j_plus, hp.j_minus)
            }
            DissipatorModel::BosonicTruncated => {
                (ops.x.clone(), ops.a.clone(), ops.a_dag.clone())
            }
        };
        let loc_sq = &loc_op * &loc_op;
        let decay_gram = decay.adjoint() * &decay;
        let excite_gram = excite.adjoint() * &excite;
        Self {
            model,
            lambda: params.localisation,
            nbar: params.nbar,
            loc_op,
            decay,
            excite,
            loc_sq,
            decay_gram,
            excite_gram,
        }
    }

    /// Localisation channel: -lambda [L, [L, rho]].
    pub fn localisation(&self, rho: &CMatrix) -> CMatrix {
        if self.lambda == 0.0 {
            return CMatrix::zeros(rho.nrows(), rho.ncols());
        }
        let inner = commutator(&self.loc_op, rho);
        commutator(&self.loc_op, &inner).scale(-self.lambda)
    }

    /// Thermal channel at coupling gamma:
    /// gamma [(nbar+1) D[decay] + nbar D[excite]] with
    /// D[O] rho = O rho O^H - {O^H O, rho}/2.
    pub fn thermal(&self, rho: &CMatrix, gamma: f64) -> CMatrix {
        let n = rho.nrows();
        if gamma == 0.0 {
            return CMatrix::zeros(n, n);
        }
        let mut out = (&self.decay * rho * self.decay.adjoint()
            - anticommutator(&self.decay_gram, rho).scale(0.5))
        .scale(gamma * (self.nbar + 1.0));
        if self.nbar > 0.0 {
            out += (&self.excite * rho * self.excite.adjoint()
                - anticommutator(&self.excite_gram, rho).scale(0.5))
            .scale(gamma * self.nbar);
        }
        out
    }

    pub fn apply(&self, rho: &CMatrix, gamma: f64) -> CMatrix {
        self.localisation(rho) + self.thermal(rho, gamma)
    }

    /// Total double-commutator weight of the localisation channel (used by
    /// the superoperator assembly).
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    fn loc_sq(&self) -> &CMatrix {
        &self.loc_sq
    }
}

/// Right-hand side of the master equation for an explicit Hamiltonian.
pub fn lindblad_rhs(
    rho: &CMatrix,
    hamiltonian: &CMatrix,
    dissipators: &DissipatorSet,
    gamma: f64,
    hbar: f64,
) -> CMatrix {
    let unitary = commutator(hamiltonian, rho) * C64::new(0.0, -1.0 / hbar);
    unitary + dissipators.apply(rho, gamma)
}

/// The full generator: a Hamiltonian source plus the dissipator set.
pub struct MasterEquation {
    pub hamiltonian: Arc<dyn HamiltonianSource>,
    pub dissipators: DissipatorSet,
    pub gamma: GammaProfile,
    pub hbar: f64,
}

impl MasterEquation {
    pub fn new(
        hamiltonian: Arc<dyn HamiltonianSource>,
        dissipators: DissipatorSet,
        gamma: GammaProfile,
        hbar: f64,
    ) -> Self {
        Self {
            hamiltonian,
            dissipators,
            gamma,
            hbar,
        }
    }

    pub fn duration(&self) -> f64 {
        self.hamiltonian.duration()
    }

    pub fn rhs(&self, t: f64, rho: &CMatrix) -> Result<CMatrix, DynamicsError> {
        let h = self.hamiltonian.hamiltonian(t)?;
        Ok(lindblad_rhs(
            rho,
            &h,
            &self.dissipators,
            self.gamma.at(t),
            self.hbar,
        ))
    }
}

/// Column-major vectorization index: rho[(i, j)] lives at j * n + i.
fn liouvillian_matrix(
    h: &CMatrix,
    dissipators: &DissipatorSet,
    gamma: f64,
    hbar: f64,
) -> CMatrix {
    let n = h.nrows();
    let id = CMatrix::identity(n, n);
    let mut l = CMatrix::zeros(n * n, n * n);

    // vec(A rho B) = (B^T kron A) vec(rho)
    let sandwich = |a: &CMatrix, b: &CMatrix| b.transpose().kronecker(a);
    let left = |a: &CMatrix| sandwich(a, &id);
    let right = |b: &CMatrix| sandwich(&id, b);

    let minus_i_over_hbar = C64::new(0.0, -1.0 / hbar);
    l += (left(h) - right(h)) * minus_i_over_hbar;

    if dissipators.lambda() != 0.0 {
        let lam = C64::new(dissipators.lambda(), 0.0);
        let x = &dissipators.loc_op;
        let xsq = dissipators.loc_sq();
        l += (sandwich(x, x) * C64::new(2.0, 0.0) - left(xsq) - right(xsq)) * lam;
    }

    if gamma > 0.0 {
        let mut channel = |op: &CMatrix, gram: &CMatrix, rate: f64| {
            let r = C64::new(rate, 0.0);
            let op_dag = op.adjoint();
            l += (sandwich(op, &op_dag)
                - (left(gram) + right(gram)) * C64::new(0.5, 0.0))
                * r;
        };
        channel(
            &dissipators.decay,
            &dissipators.decay_gram,
            gamma * (dissipators.nbar + 1.0),
        );
        if dissipators.nbar > 0.0 {
            channel(
                &dissipators.excite,
                &dissipators.excite_gram,
                gamma * dissipators.nbar,
            );
        }
    }
    l
}

/// Solve for the stationary state of the generator frozen at time `t`:
/// the one-dimensional null space of the Liouvillian, fixed to unit trace.
pub fn steady_state(me: &MasterEquation, t: f64) -> Result<super::DensityMatrix, DynamicsError> {
    let h = me.hamiltonian.hamiltonian(t)?;
    let gamma = me.gamma.at(t);
    let n = h.nrows();
    let mut l = liouvillian_matrix(&h, &me.dissipators, gamma, me.hbar);

    // Replace the first row with the trace functional; the right-hand side
    // then pins Tr rho = 1.
    for col in 0..n * n {
        l[(0, col)] = C64::new(0.0, 0.0);
    }
    for i in 0..n {
        l[(0, i * n + i)] = C64::new(1.0, 0.0);
    }
    let mut b = nalgebra::DVector::<C64>::zeros(n * n);
    b[0] = C64::new(1.0, 0.0);

    let lu = l.lu();
    let solution = lu
        .solve(&b)
        .ok_or_else(|| DynamicsError::SolveFailed("singular trace-fixed Liouvillian".into()))?;

    let mut rho = CMatrix::zeros(n, n);
    for j in 0..n {
        for i in 0..n {
            rho[(i, j)] = solution[j * n + i];
        }
    }
    let rho = crate::linalg::hermitize(&rho);
    let tr = crate::linalg::trace(&rho);
    let rho = rho.scale(1.0 / tr.re);
    super::DensityMatrix::new(rho)
}
