//! The text format for qubit Hamiltonians: one real coefficient and a
//! space-separated Pauli spec per line (`0.17, X0 Z1 Y3`; empty spec means
//! identity), with optional `key = value` metadata lines. The exact grammar
//! is documented with examples in fixtures/README.md.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;
use thiserror::Error;

use crate::pauli::{PauliOp, PauliPolynomial, PauliString};

#[derive(Debug, Error, PartialEq)]
pub enum HamFileError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: qubit index {index} exceeds n_qubits = {n_qubits}")]
    IndexOverflow {
        line: usize,
        index: usize,
        n_qubits: usize,
    },
    #[error("line {line}: duplicate term spec after canonicalization")]
    DuplicateTerm { line: usize },
    #[error("file contains no terms")]
    Empty,
    #[error("cannot infer n_qubits from an identity-only file; add an `n_qubits` line")]
    UnknownQubitCount,
    #[error("io error: {0}")]
    Io(String),
}

/// Metadata keys carried alongside the term list.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct HamMetadata {
    pub molecule: Option<String>,
    pub basis: Option<String>,
    pub bond_length: Option<f64>,
    pub n_electrons: Option<usize>,
    pub hf_reference: Option<String>,
    pub jw_note: Option<String>,
    /// Any keys not otherwise recognized, in file order.
    pub extra: Vec<(String, String)>,
}

fn parse_err(line: usize, message: impl Into<String>) -> HamFileError {
    HamFileError::Parse {
        line,
        message: message.into(),
    }
}

fn parse_pauli_token(tok: &str, line: usize) -> Result<(usize, PauliOp), HamFileError> {
    let mut chars = tok.chars();
    let letter = chars
        .next()
        .ok_or_else(|| parse_err(line, "empty Pauli token"))?;
    let op = match letter {
        'X' | 'x' => PauliOp::X,
        'Y' | 'y' => PauliOp::Y,
        'Z' | 'z' => PauliOp::Z,
        other => return Err(parse_err(line, format!("invalid Pauli letter `{other}`"))),
    };
    let index: usize = chars
        .as_str()
        .parse()
        .map_err(|_| parse_err(line, format!("invalid qubit index in token `{tok}`")))?;
    Ok((index, op))
}

/// Parse the text form into a canonical Hermitian polynomial and metadata.
pub fn parse_hamiltonian(text: &str) -> Result<(PauliPolynomial, HamMetadata), HamFileError> {
    let mut metadata = HamMetadata::default();
    let mut declared_qubits: Option<usize> = None;
    // (line number, coefficient, ops as (index, op))
    let mut raw_terms: Vec<(usize, f64, Vec<(usize, PauliOp)>)> = Vec::new();

    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw_line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if line == "terms:" {
            continue;
        }
        // A term line is `<float>, <spec>`; everything before the first comma
        // must parse as a coefficient. Otherwise try `key = value` metadata.
        let (coeff_part, spec_part) = match line.split_once(',') {
            Some((c, s)) => (c.trim(), s.trim()),
            None => (line, ""),
        };
        if let Ok(coeff) = coeff_part.parse::<f64>() {
            let mut ops = Vec::new();
            for tok in spec_part.split_whitespace() {
                ops.push(parse_pauli_token(tok, line_no)?);
            }
            raw_terms.push((line_no, coeff, ops));
            continue;
        }
        if let Some((key, value)) = line.split_once('=') {
            let key = key.trim().to_ascii_lowercase();
            let value = value.trim().to_string();
            match key.as_str() {
                "n_qubits" => {
                    let n: usize = value
                        .parse()
                        .map_err(|_| parse_err(line_no, "invalid n_qubits value"))?;
                    declared_qubits = Some(n);
                }
                "molecule" => metadata.molecule = Some(value),
                "basis" => metadata.basis = Some(value),
                "bond_length" => {
                    metadata.bond_length = Some(
                        value
                            .parse()
                            .map_err(|_| parse_err(line_no, "invalid bond_length value"))?,
                    )
                }
                "n_electrons" => {
                    metadata.n_electrons = Some(
                        value
                            .parse()
                            .map_err(|_| parse_err(line_no, "invalid n_electrons value"))?,
                    )
                }
                "hf_reference" => metadata.hf_reference = Some(value),
                "jw_note" => metadata.jw_note = Some(value),
                other => metadata.extra.push((other.to_string(), value)),
            }
            continue;
        }
        return Err(parse_err(
            line_no,
            "expected `coefficient, pauli-spec` or `key = value`",
        ));
    }

    if raw_terms.is_empty() {
        return Err(HamFileError::Empty);
    }
    let max_index = raw_terms
        .iter()
        .flat_map(|(_, _, ops)| ops.iter().map(|(q, _)| *q))
        .max();
    let n_qubits = match (declared_qubits, max_index) {
        (Some(n), _) => n,
        (None, Some(m)) => m + 1,
        (None, None) => return Err(HamFileError::UnknownQubitCount),
    };

    let mut seen: BTreeMap<PauliString, usize> = BTreeMap::new();
    let mut poly = PauliPolynomial::zero(n_qubits)
        .map_err(|e| parse_err(0, e.to_string()))?;
    for (line_no, coeff, ops) in raw_terms {
        let mut string = PauliString::identity(n_qubits).unwrap();
        for (q, op) in ops {
            if q >= n_qubits {
                return Err(HamFileError::IndexOverflow {
                    line: line_no,
                    index: q,
                    n_qubits,
                });
            }
            let single = PauliString::single(n_qubits, q, op).unwrap();
            let (merged, _) = crate::pauli::pauli_mul(&string, &single).unwrap();
            if merged.op(q) == PauliOp::I {
                // two tokens on one qubit collapsed: treat as duplicate spec
                return Err(HamFileError::DuplicateTerm { line: line_no });
            }
            string = merged;
        }
        if seen.insert(string, line_no).is_some() {
            return Err(HamFileError::DuplicateTerm { line: line_no });
        }
        poly.add_term(&string, Complex64::new(coeff, 0.0))
            .expect("qubit counts match by construction");
    }
    Ok((poly, metadata))
}

/// Load a Hamiltonian fixture from disk.
pub fn load_hamiltonian(
    path: impl AsRef<Path>,
) -> Result<(PauliPolynomial, HamMetadata), HamFileError> {
    let text = std::fs::read_to_string(path.as_ref())
        .map_err(|e| HamFileError::Io(format!("{}: {e}", path.as_ref().display())))?;
    parse_hamiltonian(&text)
}

/// Serialize a Hermitian polynomial (plus metadata) back to the text form.
/// Coefficients print in shortest round-trip decimal, so load -> serialize ->
/// load is the identity.
pub fn serialize_hamiltonian(poly: &PauliPolynomial, metadata: &HamMetadata) -> String {
    let mut out = String::new();
    if let Some(m) = &metadata.molecule {
        let _ = writeln!(out, "molecule = {m}");
    }
    if let Some(b) = &metadata.basis {
        let _ = writeln!(out, "basis = {b}");
    }
    if let Some(l) = metadata.bond_length {
        let _ = writeln!(out, "bond_length = {l}");
    }
    let _ = writeln!(out, "n_qubits = {}", poly.n_qubits());
    if let Some(n) = metadata.n_electrons {
        let _ = writeln!(out, "n_electrons = {n}");
    }
    if let Some(r) = &metadata.hf_reference {
        let _ = writeln!(out, "hf_reference = {r}");
    }
    if let Some(n) = &metadata.jw_note {
        let _ = writeln!(out, "jw_note = {n}");
    }
    for (k, v) in &metadata.extra {
        let _ = writeln!(out, "{k} = {v}");
    }
    let _ = writeln!(out, "terms:");
    for (s, c) in poly.terms() {
        let spec = if s.is_identity() {
            String::new()
        } else {
            format!(" {s}")
        };
        let _ = writeln!(out, "{},{}", c.re, spec);
    }
    out
}
