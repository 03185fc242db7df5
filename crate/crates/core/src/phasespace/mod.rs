//! Husimi-function phase space over spin coherent states: sphere quadrature,
//! the Q field and its angular derivatives, Wehrl entropy, and the entropy
//! production / flux rate decomposition.

mod rates;

pub use rates::{
    decompose_entropy_rate, entropy_records, localisation_rates, thermal_rates, EntropyRecord,
};

use crate::dynamics::DensityMatrix;
use crate::hilbert::{CoherentFactory, SpinBasis};
use crate::linalg::{commutator, CMatrix, CVector};
use num_complex::Complex64 as C64;
use std::f64::consts::PI;
use std::sync::Arc;
use thiserror::Error;

/// Contributions with Q at or below this floor are dropped from logarithmic
/// and 1/Q integrands; for band-limited Q they vanish in the limit.
pub const Q_FLOOR: f64 = 1e-14;

#[derive(Debug, Error)]
pub enum PhaseSpaceError {
    #[error(
        "grid too small for N = {n}: need n_theta >= {min_theta} and n_phi >= {min_phi}, \
         got {n_theta} x {n_phi}"
    )]
    GridTooSmall {
        n: usize,
        min_theta: usize,
        min_phi: usize,
        n_theta: usize,
        n_phi: usize,
    },
    #[error("field was built on a different grid")]
    GridMismatch,
    #[error("record index {k} outside the interior range 1..={last}")]
    IndexOutOfRange { k: usize, last: usize },
    #[error("trajectory too short for central differences")]
    TrajectoryTooShort,
    #[error(transparent)]
    Dynamics(#[from] crate::dynamics::DynamicsError),
}

/// Product quadrature on the sphere: Gauss-Legendre in cos(theta) by a
/// uniform periodic grid in phi. Exact for the trigonometric polynomials a
/// spin-j Husimi function is made of once n_theta >= 2j+1 and n_phi >= 4j+2.
#[derive(Debug, Clone)]
pub struct SphereGrid {
    pub n_theta: usize,
    pub n_phi: usize,
    thetas: Vec<f64>,
    cos_thetas: Vec<f64>,
    sin_thetas: Vec<f64>,
    /// Gauss-Legendre weights (already containing the sin(theta) measure).
    gl_weights: Vec<f64>,
    phis: Vec<f64>,
    phi_weight: f64,
}

impl SphereGrid {
    pub fn node_count(&self) -> usize {
        self.n_theta * self.n_phi
    }

    pub fn theta(&self, i: usize) -> f64 {
        self.thetas[i]
    }

    pub fn phi(&self, k: usize) -> f64 {
        self.phis[k]
    }

    /// Combined quadrature weight of node (i, k); summing f * weight over
    /// all nodes approximates the integral of f over the sphere.
    pub fn weight(&self, i: usize) -> f64 {
        self.gl_weights[i] * self.phi_weight
    }

    pub fn cos_theta(&self, i: usize) -> f64 {
        self.cos_thetas[i]
    }

    pub fn sin_theta(&self, i: usize) -> f64 {
        self.sin_thetas[i]
    }

    /// Integrate a scalar function given per-node values (node-major layout
    /// r = i * n_phi + k).
    pub fn integrate(&self, values: &[f64]) -> f64 {
        let mut total = 0.0;
        for i in 0..self.n_theta {
            let w = self.weight(i);
            let row = &values[i * self.n_phi..(i + 1) * self.n_phi];
            total += w * row.iter().sum::<f64>();
        }
        total
    }

    pub fn integrate_fn(&self, mut f: impl FnMut(f64, f64) -> f64) -> f64 {
        let mut total = 0.0;
        for i in 0..self.n_theta {
            let w = self.weight(i);
            for k in 0..self.n_phi {
                total += w * f(self.thetas[i], self.phis[k]);
            }
        }
        total
    }
}

/// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration on the
/// Legendre recurrence.
fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        // Chebyshev-like initial guess, descending in x
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_and_derivative(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_and_derivative(n, x);
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

fn legendre_and_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Build the quadrature grid, rejecting sizes that cannot resolve the
/// degree-4j Husimi polynomials of the given basis.
pub fn build_sphere_grid(
    basis: SpinBasis,
    n_theta: usize,
    n_phi: usize,
) -> Result<SphereGrid, PhaseSpaceError> {
    let n = basis.dimension();
    let min_theta = n; // 2j + 1
    let min_phi = 2 * n - 2 + 2; // 4j + 2
    if n_theta < min_theta || n_phi < min_phi {
        return Err(PhaseSpaceError::GridTooSmall {
            n,
            min_theta,
            min_phi,
            n_theta,
            n_phi,
        });
    }
    let (xs, ws) = gauss_legendre(n_theta);
    // Gauss nodes are interior, so theta = acos(x) never touches the poles.
    let mut order: Vec<usize> = (0..n_theta).collect();
    order.sort_by(|&a, &b| xs[b].partial_cmp(&xs[a]).expect("node ordering"));
    let cos_thetas: Vec<f64> = order.iter().map(|&i| xs[i]).collect();
    let gl_weights: Vec<f64> = order.iter().map(|&i| ws[i]).collect();
    let thetas: Vec<f64> = cos_thetas.iter().map(|&x| x.acos()).collect();
    let sin_thetas: Vec<f64> = cos_thetas.iter().map(|&x| (1.0 - x * x).sqrt()).collect();
    let phis: Vec<f64> = (0..n_phi)
        .map(|k| 2.0 * PI * k as f64 / n_phi as f64)
        .collect();
    Ok(SphereGrid {
        n_theta,
        n_phi,
        thetas,
        cos_thetas,
        sin_thetas,
        gl_weights,
        phis,
        phi_weight: 2.0 * PI / n_phi as f64,
    })
}

/// Coherent states evaluated once per grid node, shared by every field
/// build on that grid.
pub struct HusimiCache {
    pub basis: SpinBasis,
    pub grid: Arc<SphereGrid>,
    states: Vec<CVector>,
    sin_phis: Vec<f64>,
    cos_phis: Vec<f64>,
    jx: CMatrix,
    jy: CMatrix,
    jz: CMatrix,
}

impl HusimiCache {
    pub fn new(basis: SpinBasis, grid: Arc<SphereGrid>) -> Result<Self, PhaseSpaceError> {
        let factory = CoherentFactory::new(basis);
        let mut states = Vec::with_capacity(grid.node_count());
        for i in 0..grid.n_theta {
            for k in 0..grid.n_phi {
                let state = factory
                    .state(grid.theta(i), grid.phi(k))
                    .map_err(crate::dynamics::DynamicsError::from)?;
                states.push(state);
            }
        }
        let sin_phis = (0..grid.n_phi).map(|k| grid.phi(k).sin()).collect();
        let cos_phis = (0..grid.n_phi).map(|k| grid.phi(k).cos()).collect();
        let (jx, jy, jz, _) = crate::hilbert::build_angular_momentum(basis);
        Ok(Self {
            basis,
            grid,
            states,
            sin_phis,
            cos_phis,
            jx,
            jy,
            jz,
        })
    }

    fn expectation(&self, node: usize, op: &CMatrix) -> C64 {
        let v = &self.states[node];
        let mut acc = C64::new(0.0, 0.0);
        let n = v.len();
        for col in 0..n {
            let mut col_acc = C64::new(0.0, 0.0);
            for row in 0..n {
                col_acc += v[row].conj() * op[(row, col)];
            }
            acc += col_acc * v[col];
        }
        acc
    }

    /// <Omega| m |Omega> on every node for an arbitrary matrix.
    pub fn sandwich(&self, m: &CMatrix) -> Vec<C64> {
        (0..self.grid.node_count())
            .map(|r| self.expectation(r, m))
            .collect()
    }

    /// Resolution of the identity: (N / 4 pi) * integral of |Omega><Omega|.
    pub fn identity_resolution(&self) -> CMatrix {
        let n = self.basis.dimension();
        let mut acc = CMatrix::zeros(n, n);
        for i in 0..self.grid.n_theta {
            let w = self.grid.weight(i);
            for k in 0..self.grid.n_phi {
                let v = &self.states[i * self.grid.n_phi + k];
                acc += (v * v.adjoint()).scale(w);
            }
        }
        acc.scale(n as f64 / (4.0 * PI))
    }
}

/// Q(theta, phi) sampled on the grid together with its exact angular
/// derivatives. The derivatives come from the operator identities
/// d_phi Q = i<[Jz, rho]> and
/// d_theta Q = i(cos(phi) <[Jy, rho]> - sin(phi) <[Jx, rho]>),
/// so they are spectrally exact rather than interpolated.
pub struct HusimiField {
    pub t: f64,
    pub q: Vec<f64>,
    pub dq_dtheta: Vec<f64>,
    pub dq_dphi: Vec<f64>,
    grid: Arc<SphereGrid>,
}

impl HusimiField {
    pub fn grid(&self) -> &Arc<SphereGrid> {
        &self.grid
    }

    /// (N / 4 pi) * integral of Q; equals 1 for a unit-trace state.
    pub fn normalization(&self, basis: SpinBasis) -> f64 {
        self.grid.integrate(&self.q) * basis.dimension() as f64 / (4.0 * PI)
    }

    pub fn min_value(&self) -> f64 {
        self.q.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Husimi field of a state at timestamp `t`.
pub fn husimi_q(rho: &DensityMatrix, cache: &HusimiCache, t: f64) -> HusimiField {
    husimi_of_matrix(rho.matrix(), cache, t)
}

/// Same construction for an arbitrary (not necessarily unit-trace) Hermitian
/// matrix; used for generator outputs.
pub fn husimi_of_matrix(m: &CMatrix, cache: &HusimiCache, t: f64) -> HusimiField {
    let grid = cache.grid.clone();
    let n_phi = grid.n_phi;
    let cx = commutator(&cache.jx, m);
    let cy = commutator(&cache.jy, m);
    let cz = commutator(&cache.jz, m);

    let count = grid.node_count();
    let mut q = vec![0.0; count];
    let mut dq_dtheta = vec![0.0; count];
    let mut dq_dphi = vec![0.0; count];
    for r in 0..count {
        let k = r % n_phi;
        q[r] = cache.expectation(r, m).re;
        // i z has real part -Im(z)
        let ex = cache.expectation(r, &cx).im;
        let ey = cache.expectation(r, &cy).im;
        let ez = cache.expectation(r, &cz).im;
        dq_dtheta[r] = -(cache.cos_phis[k] * ey - cache.sin_phis[k] * ex);
        dq_dphi[r] = -ez;
    }
    HusimiField {
        t,
        q,
        dq_dtheta,
        dq_dphi,
        grid,
    }
}

/// Plain Q values (no derivatives) for an arbitrary Hermitian matrix.
pub fn husimi_values(m: &CMatrix, cache: &HusimiCache) -> Vec<f64> {
    (0..cache.grid.node_count())
        .map(|r| cache.expectation(r, m).re)
        .collect()
}

/// Wehrl entropy -(N / 4 pi) * integral of Q ln Q, with the integrand set to
/// zero wherever Q <= Q_FLOOR.
pub fn wehrl_entropy(field: &HusimiField, basis: SpinBasis) -> f64 {
    let vals: Vec<f64> = field
        .q
        .iter()
        .map(|&q| if q > Q_FLOOR { q * q.ln() } else { 0.0 })
        .collect();
    -field.grid.integrate(&vals) * basis.dimension() as f64 / (4.0 * PI)
}

/// Wehrl entropy straight from per-node Q values.
pub fn wehrl_entropy_of_values(values: &[f64], grid: &SphereGrid, basis: SpinBasis) -> f64 {
    let vals: Vec<f64> = values
        .iter()
        .map(|&q| if q > Q_FLOOR { q * q.ln() } else { 0.0 })
        .collect();
    -grid.integrate(&vals) * basis.dimension() as f64 / (4.0 * PI)
}
