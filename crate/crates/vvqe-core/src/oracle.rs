//! Dense-matrix ground truth: operator materialization, exact spectra
//! (optionally restricted to a particle-number sector), and eigenstate
//! residuals. Everything here is for desk-scale verification, hence the hard
//! dimension cap.

use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

use crate::pauli::{PauliPolynomial, PauliString};
use crate::state::StateVector;

/// Largest qubit count the dense oracle will materialize.
pub const MAX_DENSE_QUBITS: usize = 12;

const HERMITICITY_TOL: f64 = 1e-10;

#[derive(Debug, Error, PartialEq)]
pub enum OracleError {
    #[error("{0} qubits exceed the dense-oracle cap of {MAX_DENSE_QUBITS}")]
    DimensionGuard(usize),
    #[error("matrix is not Hermitian (max |A - A^dagger| = {0:.3e})")]
    NotHermitian(f64),
    #[error("qubit count mismatch: {0} vs {1}")]
    QubitMismatch(usize, usize),
}

/// Dense 2^n x 2^n complex matrix together with its qubit count.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseOperator {
    n_qubits: usize,
    matrix: DMatrix<Complex64>,
}

impl DenseOperator {
    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn hermiticity_defect(&self) -> f64 {
        let adj = self.matrix.adjoint();
        (&self.matrix - adj)
            .iter()
            .map(|c| c.norm())
            .fold(0.0, f64::max)
    }
}

/// Dense matrix of a single canonical Pauli string.
pub fn string_to_dense(string: &PauliString) -> Result<DMatrix<Complex64>, OracleError> {
    let n = string.n_qubits();
    if n > MAX_DENSE_QUBITS {
        return Err(OracleError::DimensionGuard(n));
    }
    let dim = 1usize << n;
    let x = string.x_mask() as usize;
    let z = string.z_mask();
    let y_phase = match (string.x_mask() & z).count_ones() % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    };
    let mut m = DMatrix::zeros(dim, dim);
    for col in 0..dim {
        let sign = if (z & col as u64).count_ones() % 2 == 0 {
            1.0
        } else {
            -1.0
        };
        m[(col ^ x, col)] = y_phase * sign;
    }
    Ok(m)
}

/// Materialize a polynomial as a dense operator.
pub fn to_dense(poly: &PauliPolynomial) -> Result<DenseOperator, OracleError> {
    let n = poly.n_qubits();
    if n > MAX_DENSE_QUBITS {
        return Err(OracleError::DimensionGuard(n));
    }
    let dim = 1usize << n;
    let mut matrix = DMatrix::zeros(dim, dim);
    for (s, c) in poly.terms() {
        matrix += string_to_dense(s)? * *c;
    }
    Ok(DenseOperator { n_qubits: n, matrix })
}

/// Ascending eigenvalues with matching eigenvectors (as statevectors).
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Vec<StateVector>,
}

impl Spectrum {
    /// Nearest eigenvalue to `energy` and its index.
    pub fn nearest(&self, energy: f64) -> (usize, f64) {
        let mut best = (0usize, f64::INFINITY);
        for (i, &ev) in self.eigenvalues.iter().enumerate() {
            let d = (ev - energy).abs();
            if d < best.1 {
                best = (i, d);
            }
        }
        (best.0, self.eigenvalues[best.0])
    }
}

/// Full spectrum of a Hermitian operator, or the spectrum restricted to the
/// span of basis states with the given Hamming weight (the particle-number
/// sector under the Jordan-Wigner convention). The restriction projects onto
/// the sector before diagonalizing, so degeneracies across sectors stay
/// unambiguous.
pub fn spectrum(
    op: &DenseOperator,
    particle_filter: Option<usize>,
) -> Result<Spectrum, OracleError> {
    let defect = op.hermiticity_defect();
    if defect > HERMITICITY_TOL {
        return Err(OracleError::NotHermitian(defect));
    }
    let dim = op.dim();
    let basis: Vec<usize> = match particle_filter {
        None => (0..dim).collect(),
        Some(m) => (0..dim).filter(|c| c.count_ones() as usize == m).collect(),
    };
    let d = basis.len();
    let mut sub = DMatrix::zeros(d, d);
    for (i, &bi) in basis.iter().enumerate() {
        for (j, &bj) in basis.iter().enumerate() {
            sub[(i, j)] = op.matrix[(bi, bj)];
        }
    }
    // Work around rounding: symmetrize before the eigensolve.
    let sub = (sub.clone() + sub.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = sub.symmetric_eigen();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());
    let mut eigenvalues = Vec::with_capacity(d);
    let mut eigenvectors = Vec::with_capacity(d);
    for &k in &order {
        eigenvalues.push(eig.eigenvalues[k]);
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        for (i, &bi) in basis.iter().enumerate() {
            amps[bi] = eig.eigenvectors[(i, k)];
        }
        eigenvectors.push(StateVector::from_amplitudes(op.n_qubits, amps).unwrap());
    }
    Ok(Spectrum {
        eigenvalues,
        eigenvectors,
    })
}

/// ||H|psi> - <H>|psi>||_2 for a normalized state; equals sqrt(variance).
pub fn eigenstate_residual(
    state: &StateVector,
    hamiltonian: &PauliPolynomial,
) -> Result<f64, OracleError> {
    if state.n_qubits() != hamiltonian.n_qubits() {
        return Err(OracleError::QubitMismatch(
            state.n_qubits(),
            hamiltonian.n_qubits(),
        ));
    }
    let h_psi = state
        .apply_polynomial(hamiltonian)
        .expect("qubit counts already checked");
    let energy: Complex64 = state.inner(&h_psi).expect("matching sizes");
    let mut acc = 0.0;
    for (h_amp, amp) in h_psi.amplitudes().iter().zip(state.amplitudes()) {
        acc += (h_amp - energy * amp).norm_sqr();
    }
    Ok(acc.sqrt())
}
