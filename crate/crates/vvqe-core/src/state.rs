//! Dense statevector simulation: basis states, Pauli rotations, expectations.
//!
//! Bit convention, used everywhere downstream: a bitstring is read
//! left-to-right as qubit 0..n-1, and qubit q is the q-th least significant
//! bit of the amplitude index. So `basis_state(4, "0011")` puts amplitude 1
//! at index 0b1100 = 12, with qubits 2 and 3 in |1>.
//!
//! Rotations implement exp(-i*angle/2 * P) for a canonical Pauli string P.
//! Expectations walk the basis in place (X/Y flip bits, Z contributes signs)
//! instead of materializing dense matrices, so a term costs O(2^n).

use num_complex::Complex64;
use thiserror::Error;

use crate::pauli::{Hermiticity, PauliPolynomial, PauliString};

#[derive(Debug, Error, PartialEq)]
pub enum StateError {
    #[error("bitstring length {0} does not match qubit count {1}")]
    BitstringLength(usize, usize),
    #[error("bitstring may contain only '0' and '1', got `{0}`")]
    BitstringChar(char),
    #[error("qubit count mismatch: {0} vs {1}")]
    QubitMismatch(usize, usize),
    #[error("expectation requires a Hermitian polynomial")]
    NotHermitian,
}

/// Dense complex amplitude vector over the 2^n computational basis states.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// Computational basis state for a bitstring under the stated convention.
    pub fn basis_state(n_qubits: usize, bitstring: &str) -> Result<Self, StateError> {
        if bitstring.len() != n_qubits {
            return Err(StateError::BitstringLength(bitstring.len(), n_qubits));
        }
        let mut index = 0usize;
        for (q, ch) in bitstring.chars().enumerate() {
            match ch {
                '0' => {}
                '1' => index |= 1 << q,
                other => return Err(StateError::BitstringChar(other)),
            }
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n_qubits];
        amps[index] = Complex64::new(1.0, 0.0);
        Ok(StateVector { n_qubits, amps })
    }

    pub fn from_amplitudes(n_qubits: usize, amps: Vec<Complex64>) -> Result<Self, StateError> {
        if amps.len() != 1 << n_qubits {
            return Err(StateError::BitstringLength(amps.len(), 1 << n_qubits));
        }
        Ok(StateVector { n_qubits, amps })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn inner(&self, other: &StateVector) -> Result<Complex64, StateError> {
        if self.n_qubits != other.n_qubits {
            return Err(StateError::QubitMismatch(self.n_qubits, other.n_qubits));
        }
        Ok(self
            .amps
            .iter()
            .zip(other.amps.iter())
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    pub fn distance(&self, other: &StateVector) -> Result<f64, StateError> {
        if self.n_qubits != other.n_qubits {
            return Err(StateError::QubitMismatch(self.n_qubits, other.n_qubits));
        }
        Ok(self
            .amps
            .iter()
            .zip(other.amps.iter())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt())
    }

    /// In-place exp(-i*angle/2 * P); the caller owns the single-writer contract.
    pub fn apply_pauli_rotation(
        &mut self,
        string: &PauliString,
        angle: f64,
    ) -> Result<(), StateError> {
        if string.n_qubits() != self.n_qubits {
            return Err(StateError::QubitMismatch(string.n_qubits(), self.n_qubits));
        }
        let cos = Complex64::new((angle / 2.0).cos(), 0.0);
        let minus_i_sin = Complex64::new(0.0, -(angle / 2.0).sin());
        let x = string.x_mask();
        let z = string.z_mask();
        let y_phase = phase_i_pow((x & z).count_ones());
        if x == 0 {
            // Diagonal string: eigenvalue (-1)^{|z & c|} per basis state.
            for (c, amp) in self.amps.iter_mut().enumerate() {
                let sign = parity_sign(z & c as u64);
                *amp = (cos + minus_i_sin * sign) * *amp;
            }
        } else {
            for c in 0..self.amps.len() {
                let d = c ^ x as usize;
                if d < c {
                    continue; // each pair once
                }
                // P|c> = i^{#Y} (-1)^{|z & c|} |c ^ x>
                let f_c = y_phase * parity_sign(z & c as u64);
                let f_d = y_phase * parity_sign(z & d as u64);
                let a_c = self.amps[c];
                let a_d = self.amps[d];
                self.amps[c] = cos * a_c + minus_i_sin * f_d * a_d;
                self.amps[d] = cos * a_d + minus_i_sin * f_c * a_c;
            }
        }
        Ok(())
    }

    /// Complex expectation <psi|P|psi> of a single canonical string.
    pub fn expectation_string(&self, string: &PauliString) -> Result<Complex64, StateError> {
        if string.n_qubits() != self.n_qubits {
            return Err(StateError::QubitMismatch(string.n_qubits(), self.n_qubits));
        }
        let x = string.x_mask();
        let z = string.z_mask();
        let y_phase = phase_i_pow((x & z).count_ones());
        let mut acc = Complex64::new(0.0, 0.0);
        for (c, amp) in self.amps.iter().enumerate() {
            let target = c ^ x as usize;
            let f = y_phase * parity_sign(z & c as u64);
            acc += self.amps[target].conj() * f * amp;
        }
        Ok(acc)
    }

    /// <psi|A|psi> for a Hermitian polynomial; the imaginary residue must be
    /// below 1e-10 and is then discarded.
    pub fn expectation(&self, poly: &PauliPolynomial) -> Result<f64, StateError> {
        if poly.n_qubits() != self.n_qubits {
            return Err(StateError::QubitMismatch(poly.n_qubits(), self.n_qubits));
        }
        if poly.hermiticity() != Hermiticity::Hermitian {
            return Err(StateError::NotHermitian);
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for (s, c) in poly.terms() {
            acc += c * self.expectation_string(s)?;
        }
        assert!(
            acc.im.abs() < 1e-10,
            "Hermitian expectation drifted off the real axis: {}",
            acc.im
        );
        Ok(acc.re)
    }

    /// Unnormalized A|psi> for any polynomial.
    pub fn apply_polynomial(&self, poly: &PauliPolynomial) -> Result<StateVector, StateError> {
        if poly.n_qubits() != self.n_qubits {
            return Err(StateError::QubitMismatch(poly.n_qubits(), self.n_qubits));
        }
        let mut out = vec![Complex64::new(0.0, 0.0); self.amps.len()];
        for (s, coeff) in poly.terms() {
            let x = s.x_mask();
            let z = s.z_mask();
            let y_phase = phase_i_pow((x & z).count_ones());
            for (c, amp) in self.amps.iter().enumerate() {
                let f = y_phase * parity_sign(z & c as u64);
                out[c ^ x as usize] += coeff * f * amp;
            }
        }
        Ok(StateVector {
            n_qubits: self.n_qubits,
            amps: out,
        })
    }
}

fn parity_sign(bits: u64) -> f64 {
    if bits.count_ones() % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

fn phase_i_pow(k: u32) -> Complex64 {
    match k % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}
