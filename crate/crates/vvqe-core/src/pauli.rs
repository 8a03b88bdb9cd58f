//! Pauli strings and real/complex Pauli polynomials.
//!
//! A Pauli string is stored as an (x-mask, z-mask) pair of bit masks, one bit
//! per qubit: bit q of `x_mask`/`z_mask` says whether the string acts with an
//! X/Z factor on qubit q, and a set bit in both masks means Y. Products and
//! commutation checks are then word-level bit operations, which matters
//! because the quantum covariance matrix needs O(N^2) of them.
//!
//! The canonical stored form of a string carries phase +1; products report
//! their accumulated phase in {+1, +i, -1, -i} separately.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use thiserror::Error;

/// Magnitude below which polynomial coefficients are pruned.
pub const COEFF_FLOOR: f64 = 1e-12;

/// Hard cap from the u64 mask representation.
pub const MAX_QUBITS: usize = 64;

#[derive(Debug, Error, PartialEq)]
pub enum PauliError {
    #[error("qubit count mismatch: {0} vs {1}")]
    QubitMismatch(usize, usize),
    #[error("qubit index {index} out of range for {n_qubits} qubits")]
    QubitOutOfRange { index: usize, n_qubits: usize },
    #[error("qubit count {0} exceeds the supported maximum of {MAX_QUBITS}")]
    TooManyQubits(usize),
    #[error("qubit count must be positive")]
    ZeroQubits,
    #[error("invalid Pauli token `{0}`")]
    InvalidToken(String),
    #[error("operation requires a Hermitian polynomial")]
    NotHermitian,
}

/// Single-qubit Pauli operator label.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PauliOp {
    I,
    X,
    Y,
    Z,
}

impl PauliOp {
    fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => PauliOp::I,
            (true, false) => PauliOp::X,
            (true, true) => PauliOp::Y,
            (false, true) => PauliOp::Z,
        }
    }

    fn letter(self) -> char {
        match self {
            PauliOp::I => 'I',
            PauliOp::X => 'X',
            PauliOp::Y => 'Y',
            PauliOp::Z => 'Z',
        }
    }
}

/// Phase of a Pauli product, a power of i.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    PlusOne,
    PlusI,
    MinusOne,
    MinusI,
}

impl Phase {
    pub fn from_exponent(k: u8) -> Self {
        match k % 4 {
            0 => Phase::PlusOne,
            1 => Phase::PlusI,
            2 => Phase::MinusOne,
            _ => Phase::MinusI,
        }
    }

    pub fn exponent(self) -> u8 {
        match self {
            Phase::PlusOne => 0,
            Phase::PlusI => 1,
            Phase::MinusOne => 2,
            Phase::MinusI => 3,
        }
    }

    pub fn to_complex(self) -> Complex64 {
        match self {
            Phase::PlusOne => Complex64::new(1.0, 0.0),
            Phase::PlusI => Complex64::new(0.0, 1.0),
            Phase::MinusOne => Complex64::new(-1.0, 0.0),
            Phase::MinusI => Complex64::new(0.0, -1.0),
        }
    }
}

/// Tensor product of single-qubit Paulis in canonical (+1 phase) form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PauliString {
    n_qubits: usize,
    x_mask: u64,
    z_mask: u64,
}

impl PauliString {
    pub fn identity(n_qubits: usize) -> Result<Self, PauliError> {
        if n_qubits == 0 {
            return Err(PauliError::ZeroQubits);
        }
        if n_qubits > MAX_QUBITS {
            return Err(PauliError::TooManyQubits(n_qubits));
        }
        Ok(PauliString {
            n_qubits,
            x_mask: 0,
            z_mask: 0,
        })
    }

    pub fn from_ops(ops: &[PauliOp]) -> Result<Self, PauliError> {
        let mut s = PauliString::identity(ops.len())?;
        for (q, &op) in ops.iter().enumerate() {
            s.set_op(q, op);
        }
        Ok(s)
    }

    /// Build from masks; bits above `n_qubits` must be clear.
    pub fn from_masks(n_qubits: usize, x_mask: u64, z_mask: u64) -> Result<Self, PauliError> {
        let base = PauliString::identity(n_qubits)?;
        let valid = if n_qubits == 64 { u64::MAX } else { (1u64 << n_qubits) - 1 };
        if x_mask & !valid != 0 || z_mask & !valid != 0 {
            return Err(PauliError::QubitOutOfRange {
                index: 63 - (x_mask | z_mask).leading_zeros() as usize,
                n_qubits,
            });
        }
        Ok(PauliString { x_mask, z_mask, ..base })
    }

    /// Single non-identity factor on one qubit.
    pub fn single(n_qubits: usize, qubit: usize, op: PauliOp) -> Result<Self, PauliError> {
        let mut s = PauliString::identity(n_qubits)?;
        if qubit >= n_qubits {
            return Err(PauliError::QubitOutOfRange { index: qubit, n_qubits });
        }
        s.set_op(qubit, op);
        Ok(s)
    }

    fn set_op(&mut self, qubit: usize, op: PauliOp) {
        let bit = 1u64 << qubit;
        self.x_mask &= !bit;
        self.z_mask &= !bit;
        match op {
            PauliOp::I => {}
            PauliOp::X => self.x_mask |= bit,
            PauliOp::Y => {
                self.x_mask |= bit;
                self.z_mask |= bit;
            }
            PauliOp::Z => self.z_mask |= bit,
        }
    }

    pub fn op(&self, qubit: usize) -> PauliOp {
        let bit = 1u64 << qubit;
        PauliOp::from_bits(self.x_mask & bit != 0, self.z_mask & bit != 0)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn x_mask(&self) -> u64 {
        self.x_mask
    }

    pub fn z_mask(&self) -> u64 {
        self.z_mask
    }

    pub fn is_identity(&self) -> bool {
        self.x_mask == 0 && self.z_mask == 0
    }

    /// Number of qubits acted on non-trivially.
    pub fn weight(&self) -> usize {
        (self.x_mask | self.z_mask).count_ones() as usize
    }

    fn y_count(&self) -> u32 {
        (self.x_mask & self.z_mask).count_ones()
    }

    /// True iff the two strings commute (symplectic inner product is even).
    pub fn commutes_with(&self, other: &PauliString) -> bool {
        let anti = (self.x_mask & other.z_mask).count_ones()
            + (self.z_mask & other.x_mask).count_ones();
        anti % 2 == 0
    }
}

impl fmt::Display for PauliString {
    /// Token form, e.g. `X0 Z2`; the identity prints as `I`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_identity() {
            return write!(f, "I");
        }
        let mut first = true;
        for q in 0..self.n_qubits {
            let op = self.op(q);
            if op != PauliOp::I {
                if !first {
                    write!(f, " ")?;
                }
                write!(f, "{}{}", op.letter(), q)?;
                first = false;
            }
        }
        Ok(())
    }
}

/// Product of two Pauli strings as (canonical string, phase) with
/// `a * b == phase * string` as operators.
pub fn pauli_mul(a: &PauliString, b: &PauliString) -> Result<(PauliString, Phase), PauliError> {
    if a.n_qubits != b.n_qubits {
        return Err(PauliError::QubitMismatch(a.n_qubits, b.n_qubits));
    }
    let x = a.x_mask ^ b.x_mask;
    let z = a.z_mask ^ b.z_mask;
    let out = PauliString {
        n_qubits: a.n_qubits,
        x_mask: x,
        z_mask: z,
    };
    // Writing each string as i^{#Y} X^x Z^z, commuting Z^{z_a} past X^{x_b}
    // costs (-1)^{|z_a & x_b|}, and the result is re-canonicalized.
    let k = a.y_count() + b.y_count() + 2 * (a.z_mask & b.x_mask).count_ones()
        + 4 * out.y_count()  // keep the subtraction unsigned
        - out.y_count();
    Ok((out, Phase::from_exponent((k % 4) as u8)))
}

/// How the coefficients of a canonical polynomial classify under conjugation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Hermiticity {
    /// All coefficients real: the operator is Hermitian.
    Hermitian,
    /// All coefficients purely imaginary: the operator is anti-Hermitian.
    AntiHermitian,
    /// Mixed coefficients.
    General,
}

/// Linear combination of Pauli strings with complex coefficients.
///
/// Terms are kept canonical: merged by string, pruned below [`COEFF_FLOOR`]
/// (or a caller-chosen floor), and iterated in a fixed deterministic order.
/// Hermitian operators have real coefficients, anti-Hermitian ones purely
/// imaginary; [`PauliPolynomial::hermiticity`] classifies accordingly.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliPolynomial {
    n_qubits: usize,
    terms: BTreeMap<PauliString, Complex64>,
}

impl PauliPolynomial {
    pub fn zero(n_qubits: usize) -> Result<Self, PauliError> {
        if n_qubits == 0 {
            return Err(PauliError::ZeroQubits);
        }
        if n_qubits > MAX_QUBITS {
            return Err(PauliError::TooManyQubits(n_qubits));
        }
        Ok(PauliPolynomial {
            n_qubits,
            terms: BTreeMap::new(),
        })
    }

    pub fn from_terms<I>(n_qubits: usize, terms: I) -> Result<Self, PauliError>
    where
        I: IntoIterator<Item = (PauliString, Complex64)>,
    {
        let mut poly = PauliPolynomial::zero(n_qubits)?;
        for (s, c) in terms {
            poly.add_term(&s, c)?;
        }
        poly.prune(COEFF_FLOOR);
        Ok(poly)
    }

    /// Convenience for Hermitian operators given as real coefficients.
    pub fn from_real_terms<I>(n_qubits: usize, terms: I) -> Result<Self, PauliError>
    where
        I: IntoIterator<Item = (PauliString, f64)>,
    {
        PauliPolynomial::from_terms(
            n_qubits,
            terms.into_iter().map(|(s, c)| (s, Complex64::new(c, 0.0))),
        )
    }

    pub fn add_term(&mut self, string: &PauliString, coeff: Complex64) -> Result<(), PauliError> {
        if string.n_qubits != self.n_qubits {
            return Err(PauliError::QubitMismatch(string.n_qubits, self.n_qubits));
        }
        let entry = self.terms.entry(*string).or_insert(Complex64::new(0.0, 0.0));
        *entry += coeff;
        if entry.norm() <= COEFF_FLOOR {
            self.terms.remove(string);
        }
        Ok(())
    }

    /// Drop terms with |coefficient| below `floor`.
    pub fn prune(&mut self, floor: f64) {
        self.terms.retain(|_, c| c.norm() > floor);
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn n_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, string: &PauliString) -> Complex64 {
        self.terms.get(string).copied().unwrap_or(Complex64::new(0.0, 0.0))
    }

    /// Terms in the fixed storage order (sorted by mask pair).
    pub fn terms(&self) -> impl Iterator<Item = (&PauliString, &Complex64)> {
        self.terms.iter()
    }

    pub fn hermiticity(&self) -> Hermiticity {
        let all_real = self.terms.values().all(|c| c.im.abs() <= COEFF_FLOOR);
        if all_real {
            return Hermiticity::Hermitian;
        }
        let all_imag = self.terms.values().all(|c| c.re.abs() <= COEFF_FLOOR);
        if all_imag {
            Hermiticity::AntiHermitian
        } else {
            Hermiticity::General
        }
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermiticity() == Hermiticity::Hermitian
    }

    /// Terms as (string, real coefficient); errors unless Hermitian.
    pub fn real_terms(&self) -> Result<Vec<(PauliString, f64)>, PauliError> {
        if !self.is_hermitian() {
            return Err(PauliError::NotHermitian);
        }
        Ok(self.terms.iter().map(|(s, c)| (*s, c.re)).collect())
    }

    pub fn scaled(&self, factor: Complex64) -> PauliPolynomial {
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c *= factor;
        }
        out.prune(COEFF_FLOOR);
        out
    }

    /// Hermitian adjoint: strings are self-adjoint, so conjugate coefficients.
    pub fn adjoint(&self) -> PauliPolynomial {
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c = c.conj();
        }
        out
    }

    pub fn add(&self, other: &PauliPolynomial) -> Result<PauliPolynomial, PauliError> {
        if self.n_qubits != other.n_qubits {
            return Err(PauliError::QubitMismatch(self.n_qubits, other.n_qubits));
        }
        let mut out = self.clone();
        for (s, c) in other.terms.iter() {
            out.add_term(s, *c)?;
        }
        Ok(out)
    }

    pub fn sub(&self, other: &PauliPolynomial) -> Result<PauliPolynomial, PauliError> {
        self.add(&other.scaled(Complex64::new(-1.0, 0.0)))
    }

    /// Sum of squared coefficient magnitudes, |c|^2.
    pub fn frobenius_norm_sq(&self) -> f64 {
        self.terms.values().map(|c| c.norm_sqr()).sum()
    }

    /// Tr[A^2] = 2^n |c|^2, from the trace-orthogonality of Pauli strings.
    pub fn trace_of_square(&self) -> f64 {
        (1u64 << self.n_qubits) as f64 * self.frobenius_norm_sq()
    }
}

/// Operator product of two polynomials, canonicalized with like terms merged.
pub fn poly_mul(a: &PauliPolynomial, b: &PauliPolynomial) -> Result<PauliPolynomial, PauliError> {
    if a.n_qubits != b.n_qubits {
        return Err(PauliError::QubitMismatch(a.n_qubits, b.n_qubits));
    }
    let mut out = PauliPolynomial::zero(a.n_qubits)?;
    for (sa, ca) in a.terms.iter() {
        for (sb, cb) in b.terms.iter() {
            let (s, phase) = pauli_mul(sa, sb)?;
            let entry = out.terms.entry(s).or_insert(Complex64::new(0.0, 0.0));
            *entry += ca * cb * phase.to_complex();
        }
    }
    out.prune(COEFF_FLOOR);
    Ok(out)
}
