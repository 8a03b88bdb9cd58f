//! Jordan-Wigner mapping of fermionic excitation generators and Trotterized
//! unitary coupled cluster circuits with shared parameters.
//!
//! Conventions:
//! * qubit index == spin-orbital index; the lowering operator is
//!   `a_p = Z_0 .. Z_{p-1} (X_p + i Y_p)/2`, so excitation generators carry a
//!   Z-string on the indices strictly between their endpoints.
//! * unit-parameter generators: `g_pq = a_p^+ a_q - a_q^+ a_p` and
//!   `g_pqrs = a_p^+ a_q^+ a_r a_s - a_s^+ a_r^+ a_q a_p`, both anti-Hermitian.
//! * a circuit gate (P, b, j) is evaluated as the rotation
//!   exp(-i * angle/2 * P) with angle = -2 * b * theta[j], which makes the
//!   per-term product of rotations equal exp(theta * generator) because the
//!   Pauli terms of one generator mutually commute.

use num_complex::Complex64;
use thiserror::Error;

use crate::pauli::{poly_mul, PauliOp, PauliPolynomial, PauliString};
use crate::state::StateVector;

#[derive(Debug, Error, PartialEq)]
pub enum UccError {
    #[error("excitation indices must be distinct, got {0:?}")]
    IndexCollision(Vec<usize>),
    #[error("orbital index {index} out of range for {n_qubits} qubits")]
    OrbitalOutOfRange { index: usize, n_qubits: usize },
    #[error("trotter step count must be at least 1")]
    ZeroTrotterSteps,
    #[error("parameter vector length {got} does not match circuit arity {want}")]
    ParamLength { got: usize, want: usize },
    #[error("reference state has {0} qubits, circuit has {1}")]
    ReferenceMismatch(usize, usize),
}

/// Fermionic excitation with its index into the shared parameter vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Excitation {
    Single { p: usize, q: usize },
    Double { p: usize, q: usize, r: usize, s: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExcitationTerm {
    pub excitation: Excitation,
    pub param_index: usize,
}

/// One parameterized Pauli rotation of the compiled circuit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gate {
    pub string: PauliString,
    pub base_coeff: f64,
    pub param_index: usize,
}

/// Ordered list of parameterized Pauli rotations with a parameter-sharing map.
#[derive(Debug, Clone, PartialEq)]
pub struct AnsatzCircuit {
    n_qubits: usize,
    gates: Vec<Gate>,
    excitations: Vec<ExcitationTerm>,
    n_params: usize,
    trotter_steps: usize,
}

fn lowering(p: usize, n_qubits: usize) -> PauliPolynomial {
    let z_mask = (1u64 << p) - 1;
    let x_string = PauliString::from_masks(n_qubits, 1 << p, z_mask).unwrap();
    let y_string = PauliString::from_masks(n_qubits, 1 << p, z_mask | (1 << p)).unwrap();
    PauliPolynomial::from_terms(
        n_qubits,
        [
            (x_string, Complex64::new(0.5, 0.0)),
            (y_string, Complex64::new(0.0, 0.5)),
        ],
    )
    .unwrap()
}

fn raising(p: usize, n_qubits: usize) -> PauliPolynomial {
    lowering(p, n_qubits).adjoint()
}

fn check_orbitals(indices: &[usize], n_qubits: usize) -> Result<(), UccError> {
    for (i, &a) in indices.iter().enumerate() {
        if a >= n_qubits {
            return Err(UccError::OrbitalOutOfRange { index: a, n_qubits });
        }
        if indices[i + 1..].contains(&a) {
            return Err(UccError::IndexCollision(indices.to_vec()));
        }
    }
    Ok(())
}

/// Jordan-Wigner image of the unit-parameter single excitation
/// `a_p^+ a_q - a_q^+ a_p`: an anti-Hermitian two-term polynomial.
pub fn jw_single(p: usize, q: usize, n_qubits: usize) -> Result<PauliPolynomial, UccError> {
    check_orbitals(&[p, q], n_qubits)?;
    let forward = poly_mul(&raising(p, n_qubits), &lowering(q, n_qubits)).unwrap();
    let backward = poly_mul(&raising(q, n_qubits), &lowering(p, n_qubits)).unwrap();
    Ok(forward.sub(&backward).unwrap())
}

/// Jordan-Wigner image of the unit-parameter double excitation
/// `a_p^+ a_q^+ a_r a_s - a_s^+ a_r^+ a_q a_p`: anti-Hermitian, eight terms.
pub fn jw_double(
    p: usize,
    q: usize,
    r: usize,
    s: usize,
    n_qubits: usize,
) -> Result<PauliPolynomial, UccError> {
    check_orbitals(&[p, q, r, s], n_qubits)?;
    let forward = poly_mul(
        &poly_mul(&raising(p, n_qubits), &raising(q, n_qubits)).unwrap(),
        &poly_mul(&lowering(r, n_qubits), &lowering(s, n_qubits)).unwrap(),
    )
    .unwrap();
    Ok(forward.sub(&forward.adjoint()).unwrap())
}

/// JW generator of any excitation term.
pub fn generator(excitation: Excitation, n_qubits: usize) -> Result<PauliPolynomial, UccError> {
    match excitation {
        Excitation::Single { p, q } => jw_single(p, q, n_qubits),
        Excitation::Double { p, q, r, s } => jw_double(p, q, r, s, n_qubits),
    }
}

/// Total particle-number operator `sum_q (1 - Z_q)/2`.
pub fn number_operator(n_qubits: usize) -> PauliPolynomial {
    let mut op = PauliPolynomial::zero(n_qubits).unwrap();
    op.add_term(
        &PauliString::identity(n_qubits).unwrap(),
        Complex64::new(n_qubits as f64 / 2.0, 0.0),
    )
    .unwrap();
    for q in 0..n_qubits {
        op.add_term(
            &PauliString::single(n_qubits, q, PauliOp::Z).unwrap(),
            Complex64::new(-0.5, 0.0),
        )
        .unwrap();
    }
    op
}

impl AnsatzCircuit {
    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn n_params(&self) -> usize {
        self.n_params
    }

    pub fn trotter_steps(&self) -> usize {
        self.trotter_steps
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn excitations(&self) -> &[ExcitationTerm] {
        &self.excitations
    }

    /// Apply all gates in order to a copy of the reference.
    pub fn prepare_state(
        &self,
        params: &[f64],
        reference: &StateVector,
    ) -> Result<StateVector, UccError> {
        if params.len() != self.n_params {
            return Err(UccError::ParamLength {
                got: params.len(),
                want: self.n_params,
            });
        }
        if reference.n_qubits() != self.n_qubits {
            return Err(UccError::ReferenceMismatch(
                reference.n_qubits(),
                self.n_qubits,
            ));
        }
        let mut state = reference.clone();
        for gate in &self.gates {
            let angle = -2.0 * gate.base_coeff * params[gate.param_index];
            state
                .apply_pauli_rotation(&gate.string, angle)
                .expect("gate strings match the circuit qubit count");
        }
        Ok(state)
    }
}

/// Trotterized UCC circuit with one shared parameter per excitation term;
/// each of the `trotter_steps` passes applies angle theta/k.
pub fn build_ucc(
    singles: &[(usize, usize)],
    doubles: &[(usize, usize, usize, usize)],
    trotter_steps: usize,
    n_qubits: usize,
) -> Result<AnsatzCircuit, UccError> {
    build_ucc_impl(singles, doubles, trotter_steps, n_qubits, true)
}

/// Variant with an independent parameter per (Trotter step, excitation) pair,
/// matching the multi-step form with per-step amplitudes. Rarely needed; the
/// shared-parameter circuit is the default everywhere.
pub fn build_ucc_per_step(
    singles: &[(usize, usize)],
    doubles: &[(usize, usize, usize, usize)],
    trotter_steps: usize,
    n_qubits: usize,
) -> Result<AnsatzCircuit, UccError> {
    build_ucc_impl(singles, doubles, trotter_steps, n_qubits, false)
}

fn build_ucc_impl(
    singles: &[(usize, usize)],
    doubles: &[(usize, usize, usize, usize)],
    trotter_steps: usize,
    n_qubits: usize,
    shared_params: bool,
) -> Result<AnsatzCircuit, UccError> {
    if trotter_steps == 0 {
        return Err(UccError::ZeroTrotterSteps);
    }
    let mut excitations = Vec::with_capacity(singles.len() + doubles.len());
    for (i, &(p, q)) in singles.iter().enumerate() {
        excitations.push(ExcitationTerm {
            excitation: Excitation::Single { p, q },
            param_index: i,
        });
    }
    for (i, &(p, q, r, s)) in doubles.iter().enumerate() {
        excitations.push(ExcitationTerm {
            excitation: Excitation::Double { p, q, r, s },
            param_index: singles.len() + i,
        });
    }
    let per_step = excitations.len();
    let n_params = if shared_params {
        per_step
    } else {
        per_step * trotter_steps
    };
    let mut gates = Vec::new();
    for step in 0..trotter_steps {
        for term in &excitations {
            let gen = generator(term.excitation, n_qubits)?;
            let param_index = if shared_params {
                term.param_index
            } else {
                step * per_step + term.param_index
            };
            for (string, coeff) in gen.terms() {
                debug_assert!(coeff.re.abs() < 1e-14, "generator must be anti-Hermitian");
                let step_scale = if shared_params { trotter_steps as f64 } else { 1.0 };
                gates.push(Gate {
                    string: *string,
                    base_coeff: coeff.im / step_scale,
                    param_index,
                });
            }
        }
    }
    Ok(AnsatzCircuit {
        n_qubits,
        gates,
        excitations,
        n_params,
        trotter_steps,
    })
}

/// All unordered orbital pairs p < q: the default single-excitation list.
pub fn all_singles(n_qubits: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for p in 0..n_qubits {
        for q in p + 1..n_qubits {
            out.push((p, q));
        }
    }
    out
}

/// All pairings of two disjoint orbital pairs, one tuple per pairing: the
/// default double-excitation list for small systems (3 tuples on 4 orbitals).
pub fn disjoint_doubles(n_qubits: usize) -> Vec<(usize, usize, usize, usize)> {
    let mut out = Vec::new();
    for p in 0..n_qubits {
        for q in p + 1..n_qubits {
            for r in 0..n_qubits {
                for s in r + 1..n_qubits {
                    if r > p && ![r, s].contains(&p) && ![r, s].contains(&q) {
                        out.push((p, q, r, s));
                    }
                }
            }
        }
    }
    out
}

/// Double excitations from occupied pairs of the reference bitstring into
/// virtual pairs (creations on virtuals, annihilations on occupieds).
pub fn occ_virt_doubles(reference: &str) -> Vec<(usize, usize, usize, usize)> {
    let occupied: Vec<usize> = reference
        .chars()
        .enumerate()
        .filter(|(_, c)| *c == '1')
        .map(|(q, _)| q)
        .collect();
    let virtuals: Vec<usize> = reference
        .chars()
        .enumerate()
        .filter(|(_, c)| *c == '0')
        .map(|(q, _)| q)
        .collect();
    let mut out = Vec::new();
    for (i, &v1) in virtuals.iter().enumerate() {
        for &v2 in &virtuals[i + 1..] {
            for (j, &o1) in occupied.iter().enumerate() {
                for &o2 in &occupied[j + 1..] {
                    out.push((v1, v2, o1, o2));
                }
            }
        }
    }
    out
}
