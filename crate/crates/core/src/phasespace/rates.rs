//! Wehrl entropy rate decomposition: irreversible production and flux rates
//! of the localisation and thermal channels, plus the per-step decomposition
//! record along a trajectory.
//!
//! The quadrature forms below are exact partners of the `SpinExact`
//! dissipators: with the vacuum at the north pole the thermal integrands
//! carry (2 nbar + 1) + cos(theta) denominators, and the detailed-balance
//! fixed point zeroes both thermal integrands pointwise. Each channel obeys
//! dS/dt = Pi - Phi against the exact Husimi flow of its dissipator, which
//! the tests check on random states.

use super::{husimi_of_matrix, husimi_values, wehrl_entropy_of_values, HusimiField, Q_FLOOR};
use super::{HusimiCache, PhaseSpaceError, SphereGrid};
use crate::dynamics::{propagate_unitary, MasterEquation, Trajectory};
use crate::hilbert::SpinBasis;
use serde::Serialize;
use std::f64::consts::PI;

/// One decomposed entropy-rate sample.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct EntropyRecord {
    pub t: f64,
    pub s_q: f64,
    pub ds_q_dt: f64,
    pub ds_u_dt: f64,
    pub pi_lc: f64,
    pub phi_lc: f64,
    pub pi_th: f64,
    pub phi_th: f64,
    /// |dS_Q/dt - (dS_U/dt + Pi_lc + Pi_th - Phi_th)|
    pub residual: f64,
}

/// Localisation channel rates (Pi, Phi). Phi is identically zero; Pi is
/// Lambda (N / 4 pi) * integral of |J_x(Q)|^2 / Q with the angular
/// differential J_x(Q) = i(sin(phi) d_theta + cot(theta) cos(phi) d_phi) Q.
pub fn localisation_rates(field: &HusimiField, lambda: f64, basis: SpinBasis) -> (f64, f64) {
    if lambda == 0.0 {
        return (0.0, 0.0);
    }
    let grid = field.grid();
    let n_phi = grid.n_phi;
    let mut integral = 0.0;
    for i in 0..grid.n_theta {
        let w = grid.weight(i);
        let cot = grid.cos_theta(i) / grid.sin_theta(i);
        for k in 0..n_phi {
            let r = i * n_phi + k;
            let q = field.q[r];
            if q <= Q_FLOOR {
                continue;
            }
            let phi = grid.phi(k);
            let jx_q = phi.sin() * field.dq_dtheta[r] + cot * phi.cos() * field.dq_dphi[r];
            integral += w * jx_q * jx_q / q;
        }
    }
    let pi = lambda * basis.dimension() as f64 / (4.0 * PI) * integral;
    (pi, 0.0)
}

/// Thermal channel rates (Pi, Phi) at coupling gamma and bath occupation
/// nbar.
pub fn thermal_rates(
    field: &HusimiField,
    gamma: f64,
    nbar: f64,
    basis: SpinBasis,
) -> (f64, f64) {
    if gamma == 0.0 {
        return (0.0, 0.0);
    }
    let grid = field.grid();
    let n = basis.dimension() as f64;
    let j = basis.spin();
    let wbar = 2.0 * nbar + 1.0;
    let n_phi = grid.n_phi;

    let mut phi_integral = 0.0;
    let mut pi_integral = 0.0;
    for i in 0..grid.n_theta {
        let w = grid.weight(i);
        let x = grid.cos_theta(i);
        let s = grid.sin_theta(i);
        for k in 0..n_phi {
            let r = i * n_phi + k;
            let q = field.q[r];
            if q <= Q_FLOOR {
                continue;
            }
            let dq_t = field.dq_dtheta[r];
            let dq_p = field.dq_dphi[r];
            phi_integral += w * s * (2.0 * j * q * s / (wbar + x) + dq_t);
            let drift = 2.0 * j * q * s + (wbar + x) * dq_t;
            pi_integral += w / q
                * (dq_p * dq_p * (wbar * x + 1.0) * x / (s * s)
                    + drift * drift / (wbar + x));
        }
    }
    let phi = gamma * j * n / (4.0 * PI) * phi_integral;
    let pi = gamma * n / (8.0 * PI) * pi_integral;
    (pi, phi)
}

/// Entropy rate -(N / 4 pi) * integral of (1 + ln Q) * Qdot for a channel
/// whose Husimi flow is `flow` (the sandwich of the channel output).
pub fn channel_entropy_rate(
    flow: &[f64],
    q: &[f64],
    grid: &SphereGrid,
    basis: SpinBasis,
) -> f64 {
    let vals: Vec<f64> = flow
        .iter()
        .zip(q)
        .map(|(&f, &qv)| if qv > Q_FLOOR { (1.0 + qv.ln()) * f } else { 0.0 })
        .collect();
    -grid.integrate(&vals) * basis.dimension() as f64 / (4.0 * PI)
}

/// Decompose the Wehrl entropy rate at interior sample `k` of a trajectory.
///
/// dS_Q/dt comes from a central difference of the Wehrl entropy over the
/// stored samples; the unitary share is measured by propagating the state a
/// short step (sample spacing / 10) under the Hamiltonian alone; the channel
/// rates come from the quadrature forms above. The residual of the balance
/// is stored alongside.
pub fn decompose_entropy_rate(
    traj: &Trajectory,
    k: usize,
    cache: &HusimiCache,
    me: &MasterEquation,
) -> Result<EntropyRecord, PhaseSpaceError> {
    let last = traj.samples.len().checked_sub(1).ok_or(PhaseSpaceError::TrajectoryTooShort)?;
    if last < 2 {
        return Err(PhaseSpaceError::TrajectoryTooShort);
    }
    if k == 0 || k >= last {
        return Err(PhaseSpaceError::IndexOutOfRange { k, last: last - 1 });
    }
    let basis = cache.basis;
    let s_prev = wehrl_entropy_of_values(
        &husimi_values(traj.samples[k - 1].rho.matrix(), cache),
        &cache.grid,
        basis,
    );
    let s_next = wehrl_entropy_of_values(
        &husimi_values(traj.samples[k + 1].rho.matrix(), cache),
        &cache.grid,
        basis,
    );
    record_at(traj, k, (s_prev, s_next), cache, me)
}

fn record_at(
    traj: &Trajectory,
    k: usize,
    neighbors: (f64, f64),
    cache: &HusimiCache,
    me: &MasterEquation,
) -> Result<EntropyRecord, PhaseSpaceError> {
    let basis = cache.basis;
    let sample = &traj.samples[k];
    let t = sample.t;
    let field = husimi_of_matrix(sample.rho.matrix(), cache, t);
    let s_q = super::wehrl_entropy(&field, basis);

    let ds_q_dt = (neighbors.1 - neighbors.0) / (2.0 * traj.sample_dt);

    let (pi_lc, phi_lc) = localisation_rates(&field, me.dissipators.lambda, basis);
    let (pi_th, phi_th) = thermal_rates(&field, me.gamma.at(t), me.dissipators.nbar, basis);

    // unitary share: exact short-time conjugation by exp(-i H dt_u / hbar)
    let h = me.hamiltonian.hamiltonian(t)?;
    let dt_u = traj.sample_dt / 10.0;
    let forward = propagate_unitary(&h, sample.rho.matrix(), dt_u, me.hbar);
    let backward = propagate_unitary(&h, sample.rho.matrix(), -dt_u, me.hbar);
    let s_fwd = wehrl_entropy_of_values(&husimi_values(&forward, cache), &cache.grid, basis);
    let s_bwd = wehrl_entropy_of_values(&husimi_values(&backward, cache), &cache.grid, basis);
    let ds_u_dt = (s_fwd - s_bwd) / (2.0 * dt_u);

    let residual = (ds_q_dt - (ds_u_dt + pi_lc + pi_th - phi_th)).abs();
    Ok(EntropyRecord {
        t,
        s_q,
        ds_q_dt,
        ds_u_dt,
        pi_lc,
        phi_lc,
        pi_th,
        phi_th,
        residual,
    })
}

/// Records for every interior sample of a trajectory, sharing the entropy
/// evaluations between neighbors.
pub fn entropy_records(
    traj: &Trajectory,
    cache: &HusimiCache,
    me: &MasterEquation,
) -> Result<Vec<EntropyRecord>, PhaseSpaceError> {
    if traj.samples.len() < 3 {
        return Err(PhaseSpaceError::TrajectoryTooShort);
    }
    let basis = cache.basis;
    let entropies: Vec<f64> = traj
        .samples
        .iter()
        .map(|s| {
            wehrl_entropy_of_values(&husimi_values(s.rho.matrix(), cache), &cache.grid, basis)
        })
        .collect();
    let mut out = Vec::with_capacity(traj.samples.len() - 2);
    for k in 1..traj.samples.len() - 1 {
        out.push(record_at(
            traj,
            k,
            (entropies[k - 1], entropies[k + 1]),
            cache,
            me,
        )?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{
        evolve, steady_state, DensityMatrix, DissipatorSet, DynamicsError, GammaProfile,
        HamiltonianBuilder, HamiltonianSource, PhysicalParams, PotentialSchedule,
    };
    use crate::linalg::CMatrix;
    use crate::phasespace::{build_sphere_grid, husimi_q};
    use approx::assert_abs_diff_eq;
    use num_complex::Complex64 as C64;
    use std::sync::Arc;

    fn basis(n: usize) -> SpinBasis {
        SpinBasis::new(n).unwrap()
    }

    fn cache(n: usize) -> HusimiCache {
        let b = basis(n);
        let grid = Arc::new(build_sphere_grid(b, n + 10, 2 * n + 14).unwrap());
        HusimiCache::new(b, grid).unwrap()
    }

    fn spin_params() -> PhysicalParams {
        PhysicalParams::desk_scale()
    }

    #[test]
    fn uniform_field_produces_nothing() {
        let b = basis(25);
        let c = cache(25);
        let field = husimi_q(&DensityMatrix::maximally_mixed(25), &c, 0.0);
        let (pi, phi) = localisation_rates(&field, 0.3, b);
        assert_abs_diff_eq!(pi, 0.0, epsilon = 1e-10);
        assert_eq!(phi, 0.0);
    }

    #[test]
    fn zero_couplings_short_circuit() {
        let b = basis(9);
        let c = cache(9);
        let field = husimi_q(&DensityMatrix::random(9, 1), &c, 0.0);
        assert_eq!(localisation_rates(&field, 0.0, b), (0.0, 0.0));
        assert_eq!(thermal_rates(&field, 0.0, 1.0, b), (0.0, 0.0));
    }

    #[test]
    fn localisation_production_nonnegative_on_random_states() {
        let b = basis(15);
        let c = cache(15);
        for seed in 0..20 {
            let field = husimi_q(&DensityMatrix::random(15, seed), &c, 0.0);
            let (pi, _) = localisation_rates(&field, 0.02, b);
            assert!(pi >= 0.0, "seed {seed}: pi = {pi}");
        }
    }

    #[test]
    fn thermal_rates_vanish_on_detailed_balance_state() {
        // Fixed point from the null space of the thermal generator alone,
        // cross-checked against the analytic geometric state.
        let n = 25;
        let b = basis(n);
        let c = cache(n);
        let mut params = spin_params();
        params.localisation = 0.0;
        struct ZeroH {
            n: usize,
        }
        impl HamiltonianSource for ZeroH {
            fn hamiltonian(&self, _t: f64) -> Result<CMatrix, DynamicsError> {
                Ok(CMatrix::zeros(self.n, self.n))
            }
            fn duration(&self) -> f64 {
                1.0
            }
        }
        let ops = Arc::new(params.operator_set(b));
        let me = crate::dynamics::MasterEquation::new(
            Arc::new(ZeroH { n }),
            DissipatorSet::new(&ops, &params),
            GammaProfile::constant(params.thermal_coupling),
            params.hbar,
        );
        let fixed = steady_state(&me, 0.5).unwrap();
        let geometric = DensityMatrix::thermal_geometric(n, params.nbar);
        assert!(fixed.max_abs_diff(&geometric) < 1e-9);

        let field = husimi_q(&fixed, &c, 0.0);
        let (pi, phi) = thermal_rates(&field, params.thermal_coupling, params.nbar, b);
        assert!(pi.abs() < 1e-6, "pi = {pi:.3e}");
        assert!(phi.abs() < 1e-6, "phi = {phi:.3e}");
    }

    /// The decisive identity: for each channel, the quadrature rates must
    /// reproduce the Wehrl entropy rate of the exact dissipator flow.
    #[test]
    fn channel_rates_match_exact_husimi_flow() {
        for n in [2usize, 9, 25] {
            let b = basis(n);
            let c = cache(n);
            let params = spin_params();
            let ops = Arc::new(params.operator_set(b));
            let diss = DissipatorSet::new(&ops, &params);
            for seed in [4u64, 17] {
                let rho = DensityMatrix::random(n, seed);
                let field = husimi_q(&rho, &c, 0.0);

                let loc_flow = husimi_values(&diss.localisation(rho.matrix()), &c);
                let ds_lc = channel_entropy_rate(&loc_flow, &field.q, &c.grid, b);
                let (pi_lc, _) = localisation_rates(&field, params.localisation, b);
                assert!(
                    (ds_lc - pi_lc).abs() <= 1e-8 * pi_lc.abs().max(1e-3),
                    "N = {n} seed {seed}: localisation {ds_lc} vs {pi_lc}"
                );

                let th_flow = husimi_values(
                    &diss.thermal(rho.matrix(), params.thermal_coupling),
                    &c,
                );
                let ds_th = channel_entropy_rate(&th_flow, &field.q, &c.grid, b);
                let (pi_th, phi_th) =
                    thermal_rates(&field, params.thermal_coupling, params.nbar, b);
                assert!(
                    (ds_th - (pi_th - phi_th)).abs()
                        <= 1e-8 * (pi_th.abs() + phi_th.abs()).max(1e-3),
                    "N = {n} seed {seed}: thermal {ds_th} vs {}",
                    pi_th - phi_th
                );
            }
        }
    }

    /// Independent two-level oracle: the thermal Bloch equations give the
    /// Husimi flow in closed form, bypassing the matrix dissipator entirely.
    #[test]
    fn two_level_bloch_oracle() {
        let b = basis(2);
        let c = cache(2);
        let gamma = 0.35;
        let nbar = 0.8;
        let wbar = 2.0 * nbar + 1.0;
        // Bloch vector of a generic state
        let (rx, ry, rz) = (0.31, -0.22, 0.41);
        let m = CMatrix::from_row_slice(
            2,
            2,
            &[
                C64::new(0.5 * (1.0 + rz), 0.0),
                C64::new(0.5 * rx, -0.5 * ry),
                C64::new(0.5 * rx, 0.5 * ry),
                C64::new(0.5 * (1.0 - rz), 0.0),
            ],
        );
        let rho = DensityMatrix::new(m).unwrap();
        let field = husimi_q(&rho, &c, 0.0);

        // decay toward +z at rate gamma(nbar+1), pumping at gamma nbar:
        // rz' = -gamma wbar rz + gamma, transverse at half rate
        let rz_dot = -gamma * wbar * rz + gamma;
        let rx_dot = -0.5 * gamma * wbar * rx;
        let ry_dot = -0.5 * gamma * wbar * ry;
        let flow: Vec<f64> = (0..c.grid.node_count())
            .map(|r| {
                let i = r / c.grid.n_phi;
                let k = r % c.grid.n_phi;
                let (st, ct) = (c.grid.sin_theta(i), c.grid.cos_theta(i));
                let phi = c.grid.phi(k);
                0.5 * (rx_dot * st * phi.cos() + ry_dot * st * phi.sin() + rz_dot * ct)
            })
            .collect();
        let ds_bloch = channel_entropy_rate(&flow, &field.q, &c.grid, b);
        let (pi, phi) = thermal_rates(&field, gamma, nbar, b);
        assert_abs_diff_eq!(ds_bloch, pi - phi, epsilon = 1e-10);
    }

    #[test]
    fn rates_stable_under_grid_doubling() {
        let n = 25;
        let b = basis(n);
        let coarse = HusimiCache::new(b, Arc::new(build_sphere_grid(b, 25, 50).unwrap())).unwrap();
        let fine = HusimiCache::new(b, Arc::new(build_sphere_grid(b, 50, 100).unwrap())).unwrap();
        let params = spin_params();
        for seed in [6u64, 23] {
            let rho = DensityMatrix::random(n, seed);
            let fc = husimi_q(&rho, &coarse, 0.0);
            let ff = husimi_q(&rho, &fine, 0.0);
            let (pc, _) = localisation_rates(&fc, params.localisation, b);
            let (pf, _) = localisation_rates(&ff, params.localisation, b);
            assert!(((pc - pf) / pf).abs() < 1e-8, "Pi_lc {pc} vs {pf}");
            let (pic, phic) = thermal_rates(&fc, params.thermal_coupling, params.nbar, b);
            let (pif, phif) = thermal_rates(&ff, params.thermal_coupling, params.nbar, b);
            assert!(((pic - pif) / pif).abs() < 1e-8, "Pi_th {pic} vs {pif}");
            assert!(((phic - phif) / phif).abs() < 1e-8, "Phi_th {phic} vs {phif}");
        }
    }

    #[test]
    fn rigid_rotation_leaves_entropy_flat() {
        // closed evolution with H proportional to Jz rotates Q rigidly in
        // phi, so dS_Q/dt vanishes at every interior sample
        let n = 13;
        let b = basis(n);
        let c = cache(n);
        let mut params = spin_params();
        params.localisation = 0.0;
        params.thermal_coupling = 0.0;
        struct JzH {
            h: CMatrix,
        }
        impl HamiltonianSource for JzH {
            fn hamiltonian(&self, _t: f64) -> Result<CMatrix, DynamicsError> {
                Ok(self.h.clone())
            }
            fn duration(&self) -> f64 {
                4.0
            }
        }
        let (_, _, jz, _) = crate::hilbert::build_angular_momentum(b);
        let ops = Arc::new(params.operator_set(b));
        let me = crate::dynamics::MasterEquation::new(
            Arc::new(JzH { h: jz.scale(0.7) }),
            DissipatorSet::new(&ops, &params),
            GammaProfile::constant(0.0),
            params.hbar,
        );
        let psi = crate::hilbert::spin_coherent_state(b, 1.1, 0.4).unwrap();
        let rho0 = DensityMatrix::from_pure(&psi).unwrap();
        let traj = evolve(&me, &rho0, 800, 80).unwrap();
        let records = entropy_records(&traj, &c, &me).unwrap();
        for r in &records {
            assert!(r.ds_q_dt.abs() < 1e-6, "t = {}: dS = {}", r.t, r.ds_q_dt);
            assert!(r.residual < 1e-6);
        }
    }

    #[test]
    fn pure_localisation_rate_balances_entropy_slope() {
        // Lambda > 0, gamma = 0, H = 0: the only term left is Pi_lc.
        let n = 15;
        let b = basis(n);
        let c = cache(n);
        let mut params = spin_params();
        params.thermal_coupling = 0.0;
        params.localisation = 0.05;
        struct ZeroH {
            n: usize,
        }
        impl HamiltonianSource for ZeroH {
            fn hamiltonian(&self, _t: f64) -> Result<CMatrix, DynamicsError> {
                Ok(CMatrix::zeros(self.n, self.n))
            }
            fn duration(&self) -> f64 {
                2.0
            }
        }
        let ops = Arc::new(params.operator_set(b));
        let me = crate::dynamics::MasterEquation::new(
            Arc::new(ZeroH { n }),
            DissipatorSet::new(&ops, &params),
            GammaProfile::constant(0.0),
            params.hbar,
        );
        let rho0 = DensityMatrix::random(n, 31);
        let traj = evolve(&me, &rho0, 2000, 50).unwrap();
        let records = entropy_records(&traj, &c, &me).unwrap();
        for r in &records {
            assert!(r.pi_lc > 0.0);
            assert!(
                (r.ds_q_dt - r.pi_lc).abs() < 1e-3 * r.pi_lc,
                "t = {}: dS = {} vs Pi = {}",
                r.t,
                r.ds_q_dt,
                r.pi_lc
            );
        }
    }

    #[test]
    fn driven_steady_state_balances_rates() {
        // Harmonic trap with both channels on: at the stationary state the
        // production rates balance the flux with every term nonzero.
        let n = 15;
        let b = basis(n);
        let c = cache(n);
        let mut params = spin_params();
        params.energy_scale = 0.0; // plain harmonic trap
        let ops = Arc::new(params.operator_set(b));
        let builder = HamiltonianBuilder::new(
            ops.clone(),
            params,
            PotentialSchedule::GaussianToDoubleWell { duration: 1.0 },
        )
        .unwrap();
        let me = crate::dynamics::MasterEquation::new(
            Arc::new(builder),
            DissipatorSet::new(&ops, &params),
            GammaProfile::constant(params.thermal_coupling),
            params.hbar,
        );
        let ss = steady_state(&me, 1.0).unwrap();
        let residual = me.rhs(1.0, ss.matrix()).unwrap();
        assert!(crate::linalg::max_abs(&residual) < 1e-8);

        let field = husimi_q(&ss, &c, 1.0);
        let (pi_lc, _) = localisation_rates(&field, params.localisation, b);
        let (pi_th, phi_th) = thermal_rates(&field, params.thermal_coupling, params.nbar, b);
        assert!(pi_lc > 0.0);
        assert!(pi_th > 0.0);
        assert!(phi_th > 0.0);
        let balance = (pi_lc + pi_th - phi_th).abs();
        assert!(
            balance <= 1e-3 * pi_th,
            "balance {balance:.3e} vs Pi_th {pi_th:.3e}"
        );
    }

    #[test]
    fn decompose_rejects_boundary_indices() {
        let n = 5;
        let b = basis(n);
        let c = cache(n);
        let params = spin_params();
        struct ZeroH;
        impl HamiltonianSource for ZeroH {
            fn hamiltonian(&self, _t: f64) -> Result<CMatrix, DynamicsError> {
                Ok(CMatrix::zeros(5, 5))
            }
            fn duration(&self) -> f64 {
                1.0
            }
        }
        let ops = Arc::new(params.operator_set(b));
        let me = crate::dynamics::MasterEquation::new(
            Arc::new(ZeroH),
            DissipatorSet::new(&ops, &params),
            GammaProfile::constant(0.0),
            params.hbar,
        );
        let rho0 = DensityMatrix::maximally_mixed(n);
        let traj = evolve(&me, &rho0, 4, 1).unwrap();
        assert!(decompose_entropy_rate(&traj, 0, &c, &me).is_err());
        assert!(decompose_entropy_rate(&traj, 4, &c, &me).is_err());
        assert!(decompose_entropy_rate(&traj, 2, &c, &me).is_ok());
    }
}
