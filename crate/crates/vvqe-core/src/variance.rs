//! Energy, energy variance, the quantum covariance matrix, their
//! finite-difference gradients, and the Hamiltonian-sampling estimators.
//!
//! Two routes to the variance coexist on purpose: the fast path squares the
//! Hamiltonian once (cached) and evaluates <H^2> - <H>^2, while the
//! covariance-matrix route exposes the per-pair entries
//! `G_ij = <L_i L_j> - <L_i><L_j>` that Hamiltonian sampling needs. The two
//! agree to 1e-9 and the test suite holds them to that.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::pauli::{pauli_mul, poly_mul, PauliPolynomial, PauliString};
use crate::state::{StateError, StateVector};
use crate::ucc::{AnsatzCircuit, UccError};

/// Central-difference probe step, in radians.
pub const DEFAULT_FD_STEP: f64 = 1e-5;

#[derive(Debug, Error)]
pub enum VarianceError {
    #[error("Hamiltonian polynomial must be Hermitian")]
    NotHermitian,
    #[error("sampling rate {0} outside (0, 1]")]
    RateOutOfRange(f64),
    #[error("sample mask is empty")]
    EmptyMask,
    #[error("mask built for {mask} terms, Hamiltonian has {hamiltonian}")]
    MaskTermCount { mask: usize, hamiltonian: usize },
    #[error("mask index {0} out of range")]
    MaskIndexOutOfRange(usize),
    #[error("non-finite cost at probe point for parameter {0}")]
    NonFinite(usize),
    #[error(transparent)]
    State(#[from] StateError),
    #[error(transparent)]
    Ucc(#[from] UccError),
}

/// A Hermitian Pauli Hamiltonian with its term list in a fixed order, the
/// cached square H^2, and |c|^2.
#[derive(Debug, Clone)]
pub struct Hamiltonian {
    poly: PauliPolynomial,
    terms: Vec<(PauliString, f64)>,
    squared: PauliPolynomial,
    coeff_norm_sq: f64,
}

impl Hamiltonian {
    pub fn new(poly: PauliPolynomial) -> Result<Self, VarianceError> {
        let terms = poly.real_terms().map_err(|_| VarianceError::NotHermitian)?;
        let squared = poly_mul(&poly, &poly).expect("square of a polynomial with itself");
        let coeff_norm_sq = poly.frobenius_norm_sq();
        Ok(Hamiltonian {
            poly,
            terms,
            squared,
            coeff_norm_sq,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.poly.n_qubits()
    }

    pub fn n_terms(&self) -> usize {
        self.terms.len()
    }

    /// Terms in the fixed order the covariance matrix and masks index into.
    pub fn terms(&self) -> &[(PauliString, f64)] {
        &self.terms
    }

    pub fn coefficients(&self) -> Vec<f64> {
        self.terms.iter().map(|(_, c)| *c).collect()
    }

    pub fn poly(&self) -> &PauliPolynomial {
        &self.poly
    }

    pub fn squared(&self) -> &PauliPolynomial {
        &self.squared
    }

    /// |c|^2 over the stored terms.
    pub fn coeff_norm_sq(&self) -> f64 {
        self.coeff_norm_sq
    }

    /// E(theta) = <psi|H|psi>.
    pub fn energy(&self, state: &StateVector) -> Result<f64, VarianceError> {
        Ok(state.expectation(&self.poly)?)
    }

    /// Fast-path energy variance <H^2> - <H>^2 via the cached square.
    pub fn variance(&self, state: &StateVector) -> Result<f64, VarianceError> {
        let e = state.expectation(&self.poly)?;
        let e2 = state.expectation(&self.squared)?;
        Ok(e2 - e * e)
    }

    /// Full quantum covariance matrix; only the upper triangle is evaluated,
    /// the lower triangle is filled by conjugation.
    pub fn covariance_matrix(&self, state: &StateVector) -> Result<CovarianceMatrix, VarianceError> {
        let n = self.terms.len();
        let singles = self.term_expectations(state)?;
        let mut entries = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let g = self.pair_covariance(state, i, j, &singles)?;
                entries[(i, j)] = g;
                if i != j {
                    entries[(j, i)] = g.conj();
                }
            }
        }
        Ok(CovarianceMatrix { entries })
    }

    /// Masked, rescaled quadratic form (|c|^2 / |c_masked|^2) c~^T G c~,
    /// touching only |kept|^2 covariance entries.
    pub fn sampled_variance(
        &self,
        state: &StateVector,
        mask: &SampleMask,
    ) -> Result<f64, VarianceError> {
        self.validate_mask(mask)?;
        let kept = &mask.kept;
        let singles = self.masked_term_expectations(state, kept)?;
        let mut form = 0.0;
        for (a, &i) in kept.iter().enumerate() {
            let c_i = self.terms[i].1;
            for &j in &kept[a..] {
                let c_j = self.terms[j].1;
                let g = self.pair_covariance_masked(state, i, j, &singles)?;
                if i == j {
                    form += c_i * c_j * g.re;
                } else {
                    form += 2.0 * c_i * c_j * g.re;
                }
            }
        }
        let masked_norm_sq: f64 = kept.iter().map(|&i| self.terms[i].1.powi(2)).sum();
        Ok(self.coeff_norm_sq / masked_norm_sq * form)
    }

    fn validate_mask(&self, mask: &SampleMask) -> Result<(), VarianceError> {
        if mask.n_terms != self.terms.len() {
            return Err(VarianceError::MaskTermCount {
                mask: mask.n_terms,
                hamiltonian: self.terms.len(),
            });
        }
        if mask.kept.is_empty() {
            return Err(VarianceError::EmptyMask);
        }
        for &i in &mask.kept {
            if i >= self.terms.len() {
                return Err(VarianceError::MaskIndexOutOfRange(i));
            }
        }
        Ok(())
    }

    fn term_expectations(&self, state: &StateVector) -> Result<Vec<f64>, VarianceError> {
        self.terms
            .iter()
            .map(|(s, _)| Ok(state.expectation_string(s)?.re))
            .collect()
    }

    fn masked_term_expectations(
        &self,
        state: &StateVector,
        kept: &[usize],
    ) -> Result<Vec<(usize, f64)>, VarianceError> {
        kept.iter()
            .map(|&i| Ok((i, state.expectation_string(&self.terms[i].0)?.re)))
            .collect()
    }

    fn pair_covariance(
        &self,
        state: &StateVector,
        i: usize,
        j: usize,
        singles: &[f64],
    ) -> Result<Complex64, VarianceError> {
        let (prod, phase) = pauli_mul(&self.terms[i].0, &self.terms[j].0)
            .expect("terms share the Hamiltonian qubit count");
        let pair = phase.to_complex() * state.expectation_string(&prod)?;
        Ok(pair - Complex64::new(singles[i] * singles[j], 0.0))
    }

    fn pair_covariance_masked(
        &self,
        state: &StateVector,
        i: usize,
        j: usize,
        singles: &[(usize, f64)],
    ) -> Result<Complex64, VarianceError> {
        let e_i = singles.iter().find(|(k, _)| *k == i).unwrap().1;
        let e_j = singles.iter().find(|(k, _)| *k == j).unwrap().1;
        let (prod, phase) = pauli_mul(&self.terms[i].0, &self.terms[j].0)
            .expect("terms share the Hamiltonian qubit count");
        let pair = phase.to_complex() * state.expectation_string(&prod)?;
        Ok(pair - Complex64::new(e_i * e_j, 0.0))
    }
}

/// Hermitian matrix of term covariances G_ij(theta).
#[derive(Debug, Clone)]
pub struct CovarianceMatrix {
    entries: DMatrix<Complex64>,
}

impl CovarianceMatrix {
    pub fn n_terms(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        self.entries[(i, j)]
    }

    pub fn hermiticity_defect(&self) -> f64 {
        (&self.entries - self.entries.adjoint())
            .iter()
            .map(|c| c.norm())
            .fold(0.0, f64::max)
    }

    /// c^T Re(G) c; only the real part enters with real coefficients.
    pub fn quadratic_form(&self, coeffs: &[f64]) -> f64 {
        assert_eq!(coeffs.len(), self.n_terms());
        let mut acc = 0.0;
        for i in 0..coeffs.len() {
            for j in 0..coeffs.len() {
                acc += coeffs[i] * coeffs[j] * self.entries[(i, j)].re;
            }
        }
        acc
    }

    /// Smallest eigenvalue of the Hermitian part (used by the PSD checks).
    pub fn min_eigenvalue(&self) -> f64 {
        let herm = (self.entries.clone() + self.entries.adjoint()) * Complex64::new(0.5, 0.0);
        let eig = herm.symmetric_eigen();
        eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min)
    }
}

/// Index subset of Hamiltonian terms kept by one sampling draw.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleMask {
    pub n_terms: usize,
    pub kept: Vec<usize>,
    pub rate: f64,
}

impl SampleMask {
    /// The degenerate s = 1 mask keeping every term.
    pub fn full(n_terms: usize) -> Self {
        SampleMask {
            n_terms,
            kept: (0..n_terms).collect(),
            rate: 1.0,
        }
    }

    pub fn is_full(&self) -> bool {
        self.kept.len() == self.n_terms
    }
}

/// Uniformly random subset of max(1, round(s*N)) term indices, without
/// replacement; deterministic for a fixed RNG stream.
pub fn draw_mask<R: Rng + ?Sized>(
    n_terms: usize,
    rate: f64,
    rng: &mut R,
) -> Result<SampleMask, VarianceError> {
    if !(rate > 0.0 && rate <= 1.0) {
        return Err(VarianceError::RateOutOfRange(rate));
    }
    let size = ((rate * n_terms as f64).round() as usize).clamp(1, n_terms);
    let mut kept = rand::seq::index::sample(rng, n_terms, size).into_vec();
    kept.sort_unstable();
    Ok(SampleMask {
        n_terms,
        kept,
        rate,
    })
}

/// Central finite differences of a scalar function of the parameters.
/// Components are independent, so the probes run in parallel; results are
/// collected in order and bitwise reproducible.
pub fn fd_gradient<F>(
    cost: F,
    params: &[f64],
    step: f64,
) -> Result<Vec<f64>, VarianceError>
where
    F: Fn(&[f64]) -> Result<f64, VarianceError> + Sync,
{
    (0..params.len())
        .into_par_iter()
        .map(|i| {
            let mut probe = params.to_vec();
            probe[i] = params[i] + step;
            let plus = cost(&probe)?;
            probe[i] = params[i] - step;
            let minus = cost(&probe)?;
            let g = (plus - minus) / (2.0 * step);
            if !g.is_finite() {
                return Err(VarianceError::NonFinite(i));
            }
            Ok(g)
        })
        .collect()
}

/// d/dtheta of the fast-path variance of U(theta)|reference>.
pub fn variance_gradient(
    circuit: &AnsatzCircuit,
    params: &[f64],
    reference: &StateVector,
    hamiltonian: &Hamiltonian,
    step: f64,
) -> Result<Vec<f64>, VarianceError> {
    fd_gradient(
        |p| {
            let state = circuit.prepare_state(p, reference)?;
            hamiltonian.variance(&state)
        },
        params,
        step,
    )
}

/// d/dtheta of the energy of U(theta)|reference>.
pub fn energy_gradient(
    circuit: &AnsatzCircuit,
    params: &[f64],
    reference: &StateVector,
    hamiltonian: &Hamiltonian,
    step: f64,
) -> Result<Vec<f64>, VarianceError> {
    fd_gradient(
        |p| {
            let state = circuit.prepare_state(p, reference)?;
            hamiltonian.energy(&state)
        },
        params,
        step,
    )
}

/// d/dtheta of the sampled variance under one fixed mask; the mask is held
/// constant across both probe points of every component.
pub fn sampled_variance_gradient(
    circuit: &AnsatzCircuit,
    params: &[f64],
    reference: &StateVector,
    hamiltonian: &Hamiltonian,
    mask: &SampleMask,
    step: f64,
) -> Result<Vec<f64>, VarianceError> {
    fd_gradient(
        |p| {
            let state = circuit.prepare_state(p, reference)?;
            hamiltonian.sampled_variance(&state, mask)
        },
        params,
        step,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{spectrum, to_dense};
    use crate::pauli::PauliOp;
    use crate::ucc::build_ucc;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ham(n: usize, terms: &[(&[PauliOp], f64)]) -> Hamiltonian {
        let poly = PauliPolynomial::from_real_terms(
            n,
            terms
                .iter()
                .map(|(ops, c)| (PauliString::from_ops(ops).unwrap(), *c)),
        )
        .unwrap();
        Hamiltonian::new(poly).unwrap()
    }

    fn random_state(n: usize, seed: u64) -> StateVector {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut state = StateVector::basis_state(n, &"0".repeat(n)).unwrap();
        for _ in 0..20 {
            let q = rng.gen_range(0..n);
            let op = [PauliOp::X, PauliOp::Y, PauliOp::Z][rng.gen_range(0..3)];
            let mut s = PauliString::single(n, q, op).unwrap();
            if rng.gen_bool(0.5) && n > 1 {
                let q2 = (q + 1) % n;
                let op2 = [PauliOp::X, PauliOp::Y, PauliOp::Z][rng.gen_range(0..3)];
                s = PauliString::from_ops(
                    &(0..n)
                        .map(|k| {
                            if k == q {
                                op
                            } else if k == q2 {
                                op2
                            } else {
                                PauliOp::I
                            }
                        })
                        .collect::<Vec<_>>(),
                )
                .unwrap();
            }
            let angle = rng.gen_range(-3.0..3.0);
            state.apply_pauli_rotation(&s, angle).unwrap();
        }
        state
    }

    #[test]
    fn energy_of_simple_polynomial() {
        use PauliOp::*;
        let h = ham(1, &[(&[Z], 0.5), (&[I], 0.25)]);
        let zero = StateVector::basis_state(1, "0").unwrap();
        assert!((h.energy(&zero).unwrap() - 0.75).abs() < 1e-12);
    }

    #[test]
    fn energy_of_eigenvector_is_eigenvalue() {
        use PauliOp::*;
        let h = ham(2, &[(&[Z, I], 0.7), (&[X, X], 0.4), (&[I, Z], -0.2)]);
        let spec = spectrum(&to_dense(h.poly()).unwrap(), None).unwrap();
        for (ev, vec) in spec.eigenvalues.iter().zip(&spec.eigenvectors).take(2) {
            assert!((h.energy(vec).unwrap() - ev).abs() < 1e-10);
            assert!(h.variance(vec).unwrap().abs() < 1e-9);
        }
    }

    #[test]
    fn covariance_of_z_and_x_on_zero_state() {
        use PauliOp::*;
        let h = ham(1, &[(&[X], 1.0), (&[Z], 1.0)]);
        let zero = StateVector::basis_state(1, "0").unwrap();
        let g = h.covariance_matrix(&zero).unwrap();
        // term order is storage order: X before Z here
        let (x_idx, z_idx) = if h.terms()[0].0.op(0) == X { (0, 1) } else { (1, 0) };
        assert!((g.entry(x_idx, x_idx).re - 1.0).abs() < 1e-12);
        assert!(g.entry(z_idx, z_idx).norm() < 1e-12);
        assert!(g.entry(x_idx, z_idx).norm() < 1e-12);
        assert!(g.hermiticity_defect() < 1e-12);
    }

    #[test]
    fn plus_state_variance_of_z_is_one() {
        use PauliOp::*;
        let h = ham(1, &[(&[Z], 1.0)]);
        let mut plus = StateVector::basis_state(1, "0").unwrap();
        plus.apply_pauli_rotation(
            &PauliString::single(1, 0, PauliOp::Y).unwrap(),
            std::f64::consts::FRAC_PI_2,
        )
        .unwrap();
        assert!((h.variance(&plus).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fast_path_agrees_with_quadratic_form() {
        use PauliOp::*;
        let h = ham(
            3,
            &[
                (&[Z, Z, I], 0.42),
                (&[X, I, X], -0.81),
                (&[I, Y, Y], 0.33),
                (&[Z, I, I], 0.9),
                (&[I, I, I], -0.25),
            ],
        );
        for seed in 0..5 {
            let state = random_state(3, seed);
            let fast = h.variance(&state).unwrap();
            let g = h.covariance_matrix(&state).unwrap();
            let quad = g.quadratic_form(&h.coefficients());
            assert!((fast - quad).abs() < 1e-9, "fast {fast} vs quad {quad}");
            assert!(fast >= -1e-10);
            assert!(g.min_eigenvalue() >= -1e-9);
            for i in 0..h.n_terms() {
                let d = g.entry(i, i).re;
                assert!((-1e-12..=1.0 + 1e-12).contains(&d));
            }
        }
    }

    #[test]
    fn eigenstate_quadratic_form_vanishes() {
        use PauliOp::*;
        let h = ham(2, &[(&[Z, I], 1.0), (&[X, X], 0.5), (&[Z, Z], -0.3)]);
        let spec = spectrum(&to_dense(h.poly()).unwrap(), None).unwrap();
        let g = h.covariance_matrix(&spec.eigenvectors[0]).unwrap();
        assert!(g.quadratic_form(&h.coefficients()).abs() < 1e-9);
    }

    #[test]
    fn variance_gradient_matches_analytic_single_parameter() {
        use PauliOp::*;
        // RX(theta) on |0> against H = Z: variance is sin^2(theta),
        // d/dtheta = sin(2 theta).
        let h = ham(1, &[(&[Z], 1.0)]);
        let reference = StateVector::basis_state(1, "0").unwrap();
        let theta = 0.83;
        let grad = fd_gradient(
            |p| {
                let mut st = reference.clone();
                st.apply_pauli_rotation(&PauliString::single(1, 0, X).unwrap(), p[0])
                    .unwrap();
                h.variance(&st)
            },
            &[theta],
            DEFAULT_FD_STEP,
        )
        .unwrap();
        assert!((grad[0] - (2.0 * theta).sin()).abs() < 1e-8);
    }

    #[test]
    fn gradient_vanishes_at_eigenstate_minimum() {
        use PauliOp::*;
        // theta = 0 maps the reference to itself, an exact eigenstate of this
        // diagonal Hamiltonian, so Delta = 0 is an interior smooth minimum.
        let hz = ham(4, &[(&[Z, I, I, I], 1.0), (&[I, Z, Z, I], 0.5)]);
        let circuit = build_ucc(&[(0, 1), (2, 3)], &[], 1, 4).unwrap();
        let reference = StateVector::basis_state(4, "0011").unwrap();
        let grad = variance_gradient(&circuit, &[0.0, 0.0], &reference, &hz, DEFAULT_FD_STEP)
            .unwrap();
        let norm: f64 = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        assert!(norm < 1e-6, "gradient norm {norm}");
    }

    #[test]
    fn energy_gradient_of_empty_circuit_is_absent() {
        use PauliOp::*;
        let h = ham(2, &[(&[Z, I], 1.0)]);
        let circuit = build_ucc(&[], &[], 1, 2).unwrap();
        let reference = StateVector::basis_state(2, "01").unwrap();
        let grad = energy_gradient(&circuit, &[], &reference, &h, DEFAULT_FD_STEP).unwrap();
        assert!(grad.is_empty());
    }

    #[test]
    fn central_and_forward_differences_agree() {
        use PauliOp::*;
        let h = ham(4, &[(&[Z, I, I, I], 0.06), (&[X, X, I, I], 0.03), (&[I, I, Y, Y], -0.04)]);
        let circuit = build_ucc(&[(0, 2), (1, 3)], &[(0, 1, 2, 3)], 1, 4).unwrap();
        let reference = StateVector::basis_state(4, "0011").unwrap();
        let params = [0.31, -0.42, 0.55];
        let central =
            variance_gradient(&circuit, &params, &reference, &h, DEFAULT_FD_STEP).unwrap();
        // independent central differencing at a different step agrees tightly
        let central_coarse =
            variance_gradient(&circuit, &params, &reference, &h, 1e-4).unwrap();
        for (a, b) in central.iter().zip(&central_coarse) {
            assert!((a - b).abs() < 1e-5);
        }
        // forward differences at h' = 1e-4
        let hp = 1e-4;
        let base = {
            let st = circuit.prepare_state(&params, &reference).unwrap();
            h.variance(&st).unwrap()
        };
        for i in 0..params.len() {
            let mut p = params.to_vec();
            p[i] += hp;
            let st = circuit.prepare_state(&p, &reference).unwrap();
            let fwd = (h.variance(&st).unwrap() - base) / hp;
            assert!(
                (central[i] - fwd).abs() < 1e-5,
                "component {i}: central {} vs forward {}",
                central[i],
                fwd
            );
        }
    }

    #[test]
    fn draw_mask_contracts() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let full = draw_mask(7, 1.0, &mut rng).unwrap();
        assert_eq!(full.kept, (0..7).collect::<Vec<_>>());
        let half = draw_mask(10, 0.5, &mut rng).unwrap();
        assert_eq!(half.kept.len(), 5);
        let tiny = draw_mask(9, 0.01, &mut rng).unwrap();
        assert_eq!(tiny.kept.len(), 1);
        assert!(matches!(
            draw_mask(5, 0.0, &mut rng),
            Err(VarianceError::RateOutOfRange(_))
        ));
        assert!(matches!(
            draw_mask(5, 1.5, &mut rng),
            Err(VarianceError::RateOutOfRange(_))
        ));
        // determinism under a fixed seed
        let mut r1 = ChaCha8Rng::seed_from_u64(99);
        let mut r2 = ChaCha8Rng::seed_from_u64(99);
        assert_eq!(
            draw_mask(20, 0.3, &mut r1).unwrap(),
            draw_mask(20, 0.3, &mut r2).unwrap()
        );
    }

    #[test]
    fn full_mask_reproduces_variance() {
        use PauliOp::*;
        let h = ham(
            3,
            &[
                (&[Z, Z, I], 0.42),
                (&[X, I, X], -0.81),
                (&[I, Y, Y], 0.33),
                (&[I, I, I], 0.1),
            ],
        );
        for seed in 0..4 {
            let state = random_state(3, 100 + seed);
            let full = SampleMask::full(h.n_terms());
            let sampled = h.sampled_variance(&state, &full).unwrap();
            let exact = h.variance(&state).unwrap();
            assert!((sampled - exact).abs() < 1e-9);
        }
    }

    #[test]
    fn empty_and_malformed_masks_rejected() {
        use PauliOp::*;
        let h = ham(2, &[(&[Z, I], 1.0), (&[X, X], 0.5)]);
        let state = StateVector::basis_state(2, "00").unwrap();
        let empty = SampleMask {
            n_terms: 2,
            kept: vec![],
            rate: 0.5,
        };
        assert!(matches!(
            h.sampled_variance(&state, &empty),
            Err(VarianceError::EmptyMask)
        ));
        let mismatched = SampleMask::full(3);
        assert!(matches!(
            h.sampled_variance(&state, &mismatched),
            Err(VarianceError::MaskTermCount { .. })
        ));
    }

    #[test]
    fn exhaustive_masks_match_independent_evaluation() {
        use PauliOp::*;
        // N = 4 terms, enumerate all masks of size 2 and check the estimator
        // against a from-scratch evaluation of the masked, rescaled form.
        let h = ham(
            2,
            &[(&[Z, I], 0.8), (&[X, X], -0.5), (&[I, Z], 0.3), (&[Y, Y], 0.2)],
        );
        let state = random_state(2, 7);
        let coeffs = h.coefficients();
        let n = h.n_terms();
        let norm_sq: f64 = coeffs.iter().map(|c| c * c).sum();
        let mut library_avg = 0.0;
        let mut direct_avg = 0.0;
        let mut count = 0.0;
        for a in 0..n {
            for b in a + 1..n {
                let mask = SampleMask {
                    n_terms: n,
                    kept: vec![a, b],
                    rate: 0.5,
                };
                let lib = h.sampled_variance(&state, &mask).unwrap();
                // independent: dense expectations of the two kept strings
                let mut direct = 0.0;
                for &i in &[a, b] {
                    for &j in &[a, b] {
                        let (prod, phase) = pauli_mul(&h.terms()[i].0, &h.terms()[j].0).unwrap();
                        let pair =
                            (phase.to_complex() * state.expectation_string(&prod).unwrap()).re;
                        let ei = state.expectation_string(&h.terms()[i].0).unwrap().re;
                        let ej = state.expectation_string(&h.terms()[j].0).unwrap().re;
                        direct += coeffs[i] * coeffs[j] * (pair - ei * ej);
                    }
                }
                let masked_norm: f64 = coeffs[a] * coeffs[a] + coeffs[b] * coeffs[b];
                direct *= norm_sq / masked_norm;
                assert!((lib - direct).abs() < 1e-9);
                library_avg += lib;
                direct_avg += direct;
                count += 1.0;
            }
        }
        assert!((library_avg / count - direct_avg / count).abs() < 1e-9);
    }

    #[test]
    fn sampled_gradient_with_full_mask_matches_exact() {
        use PauliOp::*;
        let h = ham(4, &[(&[Z, I, I, I], 0.6), (&[X, X, I, I], 0.3), (&[I, I, Z, Z], -0.2)]);
        let circuit = build_ucc(&[(0, 2), (1, 3)], &[], 1, 4).unwrap();
        let reference = StateVector::basis_state(4, "0011").unwrap();
        let params = [0.4, -0.7];
        let exact = variance_gradient(&circuit, &params, &reference, &h, DEFAULT_FD_STEP).unwrap();
        let full = SampleMask::full(h.n_terms());
        let sampled = sampled_variance_gradient(
            &circuit,
            &params,
            &reference,
            &h,
            &full,
            DEFAULT_FD_STEP,
        )
        .unwrap();
        for (a, b) in exact.iter().zip(&sampled) {
            assert!((a - b).abs() < 1e-8);
        }
    }
}
