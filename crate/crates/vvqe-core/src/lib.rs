//! Variance-minimizing variational quantum eigensolvers on a dense
//! statevector simulator, with an exact-diagonalization oracle for
//! self-verification.
//!
//! Module map:
//! * [`pauli`] — Pauli-string/polynomial algebra with phase tracking.
//! * [`state`] — statevector, Pauli rotations, expectation values.
//! * [`ucc`] — Jordan-Wigner excitation generators and Trotterized UCC circuits.
//! * [`variance`] — energy, energy variance, quantum covariance matrix,
//!   finite-difference gradients, and Hamiltonian-sampling estimators.
//! * [`solve`] — cost functions over orthogonal reference sets, gradient
//!   descent, Hamiltonian-sampling SGD, and multi-start surveys.
//! * [`oracle`] — dense spectra and eigenstate residuals.
//! * [`hamfile`] — the text fixture format for qubit Hamiltonians.

pub mod hamfile;
pub mod oracle;
pub mod pauli;
pub mod solve;
pub mod state;
pub mod ucc;
pub mod variance;

pub use pauli::{pauli_mul, poly_mul, PauliOp, PauliPolynomial, PauliString, Phase};
pub use state::StateVector;
