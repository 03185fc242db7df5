//! Truncated operator algebra: bosonic ladder operators, position/momentum
//! quadratures, angular-momentum matrices, the Holstein-Primakoff
//! correspondence between them, and spin coherent states.
//!
//! Everything lives in one N-dimensional space with N = 2j + 1. Basis index
//! n is the bosonic occupation number; under the Holstein-Primakoff mapping
//! the same index carries the magnetic quantum number m = j - n, so the
//! bosonic vacuum sits at m = +j (the north pole of the coherent-state
//! sphere).

use crate::linalg::{hermitian_eigen, CMatrix, CVector};
use num_complex::Complex64 as C64;
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HilbertError {
    #[error("basis dimension must be at least 2, got {0}")]
    DimensionTooSmall(usize),
    #[error("polar angle theta = {0} outside [0, pi]")]
    ThetaOutOfRange(f64),
    #[error("azimuthal angle phi = {0} outside [0, 2*pi)")]
    PhiOutOfRange(f64),
}

/// Truncated space of dimension N, carrying spin j = (N - 1)/2.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SpinBasis {
    dimension: usize,
}

impl SpinBasis {
    pub fn new(dimension: usize) -> Result<Self, HilbertError> {
        if dimension < 2 {
            return Err(HilbertError::DimensionTooSmall(dimension));
        }
        Ok(Self { dimension })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    /// Spin quantum number j = (N - 1)/2, exact in binary for any N.
    pub fn spin(&self) -> f64 {
        (self.dimension as f64 - 1.0) / 2.0
    }

    /// Magnetic quantum number carried by basis index n.
    pub fn m_of_index(&self, n: usize) -> f64 {
        self.spin() - n as f64
    }
}

/// Builds the truncated ladder pair: a[n-1, n] = sqrt(n), a_dag = a^H.
pub fn build_ladder(basis: SpinBasis) -> (CMatrix, CMatrix) {
    let n = basis.dimension();
    let mut a = CMatrix::zeros(n, n);
    for k in 1..n {
        a[(k - 1, k)] = C64::new((k as f64).sqrt(), 0.0);
    }
    let a_dag = a.adjoint();
    (a, a_dag)
}

/// Standard spin-j matrices in the Jz eigenbasis ordered m = +j down to -j.
pub fn build_angular_momentum(basis: SpinBasis) -> (CMatrix, CMatrix, CMatrix, CMatrix) {
    let n = basis.dimension();
    let j = basis.spin();
    let mut j_minus = CMatrix::zeros(n, n);
    for i in 0..n - 1 {
        // J- |j, m> = sqrt((j+m)(j-m+1)) |j, m-1> with m = j - i
        let amp = ((2.0 * j - i as f64) * (i as f64 + 1.0)).sqrt();
        j_minus[(i + 1, i)] = C64::new(amp, 0.0);
    }
    let j_plus = j_minus.adjoint();
    let jx = (&j_plus + &j_minus).scale(0.5);
    let jy = (&j_plus - &j_minus) * C64::new(0.0, -0.5);
    let jz = CMatrix::from_diagonal(&CVector::from_iterator(
        n,
        (0..n).map(|i| C64::new(basis.m_of_index(i), 0.0)),
    ));
    let j2 = &jx * &jx + &jy * &jy + &jz * &jz;
    (jx, jy, jz, j2)
}

/// Fock index <-> Jz eigenvalue bijection plus the exact matrix realization
/// of the Holstein-Primakoff images J- = a_dag sqrt(2j - a_dag a) and
/// Jz = j - a_dag a.
pub struct HpCorrespondence {
    pub basis: SpinBasis,
    pub j_minus: CMatrix,
    pub j_plus: CMatrix,
    pub jz: CMatrix,
}

impl HpCorrespondence {
    pub fn m_of_fock(&self, n: usize) -> f64 {
        self.basis.m_of_index(n)
    }

    pub fn fock_of_m(&self, m: f64) -> usize {
        (self.basis.spin() - m).round() as usize
    }
}

pub fn hp_correspondence(basis: SpinBasis) -> HpCorrespondence {
    let n = basis.dimension();
    let j = basis.spin();
    let (_, a_dag) = build_ladder(basis);
    // sqrt(2j - n) on the number diagonal, clamped at the truncation edge
    let root = CMatrix::from_diagonal(&CVector::from_iterator(
        n,
        (0..n).map(|k| C64::new((2.0 * j - k as f64).max(0.0).sqrt(), 0.0)),
    ));
    let j_minus = &a_dag * &root;
    let j_plus = j_minus.adjoint();
    let jz = CMatrix::from_diagonal(&CVector::from_iterator(
        n,
        (0..n).map(|k| C64::new(j - k as f64, 0.0)),
    ));
    HpCorrespondence {
        basis,
        j_minus,
        j_plus,
        jz,
    }
}

/// The full operator set used by the dynamics: ladder pair, quadratures
/// (x, p with the configured hbar/m/omega scales), angular momentum, and the
/// cached eigendecomposition of x used to evaluate potentials spectrally.
pub struct OperatorSet {
    pub basis: SpinBasis,
    pub a: CMatrix,
    pub a_dag: CMatrix,
    pub x: CMatrix,
    pub p: CMatrix,
    pub jx: CMatrix,
    pub jy: CMatrix,
    pub jz: CMatrix,
    pub j2: CMatrix,
    x_values: Vec<f64>,
    x_vectors: CMatrix,
}

impl OperatorSet {
    pub fn new(basis: SpinBasis, hbar: f64, mass: f64, omega: f64) -> Self {
        let (a, a_dag) = build_ladder(basis);
        let x_scale = (hbar / (2.0 * mass * omega)).sqrt();
        let p_scale = (hbar * mass * omega / 2.0).sqrt();
        let x = (&a_dag + &a).scale(x_scale);
        let p = (&a_dag - &a) * C64::new(0.0, p_scale);
        let (jx, jy, jz, j2) = build_angular_momentum(basis);
        let (x_values, x_vectors) = hermitian_eigen(&x);
        Self {
            basis,
            a,
            a_dag,
            x,
            p,
            jx,
            jy,
            jz,
            j2,
            x_values,
            x_vectors,
        }
    }

    pub fn dimension(&self) -> usize {
        self.basis.dimension()
    }

    /// Eigenvalues of the position quadrature, ascending.
    pub fn x_eigenvalues(&self) -> &[f64] {
        &self.x_values
    }

    /// Evaluate a scalar potential v(x) as a matrix through the spectral
    /// decomposition of x.
    pub fn potential_matrix(&self, v: impl Fn(f64) -> f64) -> CMatrix {
        let diag = CVector::from_iterator(
            self.x_values.len(),
            self.x_values.iter().map(|&xi| C64::new(v(xi), 0.0)),
        );
        &self.x_vectors * CMatrix::from_diagonal(&diag) * self.x_vectors.adjoint()
    }

    /// Parity operator (-1)^n in the Fock basis; conjugation flips x -> -x.
    pub fn parity(&self) -> CMatrix {
        CMatrix::from_diagonal(&CVector::from_iterator(
            self.dimension(),
            (0..self.dimension()).map(|n| C64::new(if n % 2 == 0 { 1.0 } else { -1.0 }, 0.0)),
        ))
    }
}

/// Precomputed rotation factors for building many coherent states on a grid.
pub struct CoherentFactory {
    basis: SpinBasis,
    jy_values: Vec<f64>,
    jy_vectors: CMatrix,
    /// Adjoint-row of jy_vectors applied to |j,j> (basis vector 0).
    seed: CVector,
}

impl CoherentFactory {
    pub fn new(basis: SpinBasis) -> Self {
        let (_, jy, _, _) = build_angular_momentum(basis);
        let (jy_values, jy_vectors) = hermitian_eigen(&jy);
        // V^H e_0 is just the conjugated first row of V
        let seed = CVector::from_iterator(
            basis.dimension(),
            (0..basis.dimension()).map(|k| jy_vectors[(0, k)].conj()),
        );
        Self {
            basis,
            jy_values,
            jy_vectors,
            seed,
        }
    }

    /// |Omega> = exp(-i phi Jz) exp(-i theta Jy) |j, j>.
    pub fn state(&self, theta: f64, phi: f64) -> Result<CVector, HilbertError> {
        if !(0.0..=PI).contains(&theta) {
            return Err(HilbertError::ThetaOutOfRange(theta));
        }
        if !(0.0..2.0 * PI).contains(&phi) {
            return Err(HilbertError::PhiOutOfRange(phi));
        }
        let n = self.basis.dimension();
        let j = self.basis.spin();
        let rotated = CVector::from_iterator(
            n,
            (0..n).map(|k| (-C64::i() * (self.jy_values[k] * theta)).exp() * self.seed[k]),
        );
        let mut state = &self.jy_vectors * rotated;
        for (i, entry) in state.iter_mut().enumerate() {
            let m = j - i as f64;
            *entry *= (-C64::i() * (m * phi)).exp();
        }
        Ok(state)
    }
}

/// Spin coherent state by exact rotation of |j, j>.
pub fn spin_coherent_state(basis: SpinBasis, theta: f64, phi: f64) -> Result<CVector, HilbertError> {
    CoherentFactory::new(basis).state(theta, phi)
}
