//! Cost functions and optimizers: single-ansatz variance minimization,
//! the equal-weight variance cost over a set of orthogonal references, the
//! weighted-energy subspace-search cost, the mixed energy+variance cost,
//! plain gradient descent, and stochastic gradient descent by Hamiltonian
//! sampling.
//!
//! All randomness flows through injected seeded generators; independent
//! survey starts run in parallel but collect in order, so results are
//! deterministic for a fixed seed.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::oracle::{spectrum, to_dense, Spectrum, MAX_DENSE_QUBITS};
use crate::state::{StateError, StateVector};
use crate::ucc::{AnsatzCircuit, UccError};
use crate::variance::{draw_mask, fd_gradient, Hamiltonian, SampleMask, VarianceError};

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("reference list is empty")]
    EmptyReferences,
    #[error("duplicate reference bitstring `{0}`")]
    DuplicateReference(String),
    #[error("weight list length {got} does not match reference count {want}")]
    WeightCount { got: usize, want: usize },
    #[error("subspace-search weights must be strictly decreasing and positive")]
    WeightsNotDecreasing,
    #[error("variance mixing factor must be nonnegative, got {0}")]
    NegativeEtaV(f64),
    #[error("invalid sampling schedule: {0}")]
    ScheduleInvalid(String),
    #[error(transparent)]
    State(#[from] StateError),
    #[error(transparent)]
    Ucc(#[from] UccError),
    #[error(transparent)]
    Variance(#[from] VarianceError),
}

/// How the per-state weights were constructed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightMode {
    /// w_n = 1/k exactly.
    Equal,
    /// Strictly decreasing positive weights (subspace-search ordering).
    Descending,
}

/// A shared ansatz circuit acting on k mutually orthogonal basis references.
#[derive(Debug, Clone)]
pub struct OrthogonalSet {
    circuit: AnsatzCircuit,
    references: Vec<StateVector>,
    reference_bits: Vec<String>,
    weights: Vec<f64>,
    weight_mode: WeightMode,
}

impl OrthogonalSet {
    /// Equal-weight set, w_n = 1/k.
    pub fn equal_weights(
        circuit: AnsatzCircuit,
        reference_bits: &[impl AsRef<str>],
    ) -> Result<Self, SolveError> {
        let k = reference_bits.len();
        Self::build(
            circuit,
            reference_bits,
            vec![1.0 / k as f64; k],
            WeightMode::Equal,
        )
    }

    /// Subspace-search set with strictly decreasing positive weights.
    pub fn descending_weights(
        circuit: AnsatzCircuit,
        reference_bits: &[impl AsRef<str>],
        weights: Vec<f64>,
    ) -> Result<Self, SolveError> {
        if weights.len() != reference_bits.len() {
            return Err(SolveError::WeightCount {
                got: weights.len(),
                want: reference_bits.len(),
            });
        }
        let decreasing = weights.windows(2).all(|w| w[0] > w[1]) && weights.iter().all(|w| *w > 0.0);
        if !decreasing {
            return Err(SolveError::WeightsNotDecreasing);
        }
        Self::build(circuit, reference_bits, weights, WeightMode::Descending)
    }

    fn build(
        circuit: AnsatzCircuit,
        reference_bits: &[impl AsRef<str>],
        weights: Vec<f64>,
        weight_mode: WeightMode,
    ) -> Result<Self, SolveError> {
        if reference_bits.is_empty() {
            return Err(SolveError::EmptyReferences);
        }
        let mut bits = Vec::with_capacity(reference_bits.len());
        let mut references = Vec::with_capacity(reference_bits.len());
        for b in reference_bits {
            let b = b.as_ref().to_string();
            if bits.contains(&b) {
                return Err(SolveError::DuplicateReference(b));
            }
            references.push(StateVector::basis_state(circuit.n_qubits(), &b)?);
            bits.push(b);
        }
        Ok(OrthogonalSet {
            circuit,
            references,
            reference_bits: bits,
            weights,
            weight_mode,
        })
    }

    pub fn k(&self) -> usize {
        self.references.len()
    }

    pub fn circuit(&self) -> &AnsatzCircuit {
        &self.circuit
    }

    pub fn reference_bits(&self) -> &[String] {
        &self.reference_bits
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight_mode(&self) -> WeightMode {
        self.weight_mode
    }

    /// U(theta)|R_n> for every reference.
    pub fn states(&self, params: &[f64]) -> Result<Vec<StateVector>, SolveError> {
        self.references
            .iter()
            .map(|r| Ok(self.circuit.prepare_state(params, r)?))
            .collect()
    }

    /// Per-state energies and variances at theta.
    pub fn evaluate(&self, h: &Hamiltonian, params: &[f64]) -> Result<SetEval, SolveError> {
        let mut energies = Vec::with_capacity(self.k());
        let mut variances = Vec::with_capacity(self.k());
        for state in self.states(params)? {
            energies.push(h.energy(&state)?);
            variances.push(h.variance(&state)?);
        }
        Ok(SetEval { energies, variances })
    }
}

/// Per-state diagnostics of one cost evaluation.
#[derive(Debug, Clone)]
pub struct SetEval {
    pub energies: Vec<f64>,
    pub variances: Vec<f64>,
}

/// Weighted variance cost sum_n w_n Delta_n(theta).
pub fn cost_variance_set(
    set: &OrthogonalSet,
    h: &Hamiltonian,
    params: &[f64],
) -> Result<f64, SolveError> {
    let mut acc = 0.0;
    for (state, w) in set.states(params)?.iter().zip(&set.weights) {
        acc += w * h.variance(state)?;
    }
    Ok(acc)
}

/// Subspace-search cost sum_n w_n E_n(theta); requires descending weights.
pub fn cost_ssvqe(set: &OrthogonalSet, h: &Hamiltonian, params: &[f64]) -> Result<f64, SolveError> {
    if set.weight_mode != WeightMode::Descending {
        return Err(SolveError::WeightsNotDecreasing);
    }
    let mut acc = 0.0;
    for (state, w) in set.states(params)?.iter().zip(&set.weights) {
        acc += w * h.energy(state)?;
    }
    Ok(acc)
}

/// Mixed cost sum_n E_n + eta_v * sum_n Delta_n (unweighted sums).
pub fn cost_mixed(
    set: &OrthogonalSet,
    h: &Hamiltonian,
    params: &[f64],
    eta_v: f64,
) -> Result<f64, SolveError> {
    if eta_v < 0.0 {
        return Err(SolveError::NegativeEtaV(eta_v));
    }
    let mut acc = 0.0;
    for state in set.states(params)? {
        acc += h.energy(&state)?;
        if eta_v > 0.0 {
            acc += eta_v * h.variance(&state)?;
        }
    }
    Ok(acc)
}

/// Gradient-descent settings and stopping rules.
#[derive(Debug, Clone)]
pub struct OptimizerConfig {
    /// Step size eta (eta_A for the mixed cost).
    pub learning_rate: f64,
    /// Variance mixing factor eta_v, used by the mixed cost only.
    pub eta_v: f64,
    pub max_iterations: usize,
    /// Stop when the gradient 2-norm falls below this.
    pub grad_tolerance: f64,
    /// Stop when the cost moved less than this over the stall window.
    pub cost_stall_tolerance: f64,
    pub cost_stall_window: usize,
    /// Central-difference probe step.
    pub fd_step: f64,
    /// Hamiltonian-sampling schedule: (start iteration, rate), starts at 0.
    pub schedule: Vec<(usize, f64)>,
    pub seed: u64,
    /// Record theta every this many iterations (0 = never); the terminal
    /// theta is always available on the trajectory.
    pub theta_snapshot_every: usize,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            learning_rate: 0.05,
            eta_v: 1.0,
            max_iterations: 5000,
            grad_tolerance: 1e-8,
            cost_stall_tolerance: 1e-12,
            cost_stall_window: 10,
            fd_step: crate::variance::DEFAULT_FD_STEP,
            schedule: vec![(0, 1.0)],
            seed: 0,
            theta_snapshot_every: 0,
        }
    }
}

impl OptimizerConfig {
    pub fn validate_schedule(&self) -> Result<(), SolveError> {
        if self.schedule.is_empty() {
            return Err(SolveError::ScheduleInvalid("schedule is empty".into()));
        }
        if self.schedule[0].0 != 0 {
            return Err(SolveError::ScheduleInvalid(
                "first schedule entry must start at iteration 0".into(),
            ));
        }
        for w in self.schedule.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(SolveError::ScheduleInvalid(
                    "schedule iterations must be strictly increasing".into(),
                ));
            }
        }
        for &(_, rate) in &self.schedule {
            if !(rate > 0.0 && rate <= 1.0) {
                return Err(SolveError::ScheduleInvalid(format!(
                    "rate {rate} outside (0, 1]"
                )));
            }
        }
        Ok(())
    }

    /// Sampling rate active at an iteration index.
    pub fn active_rate(&self, iteration: usize) -> f64 {
        let mut rate = self.schedule.first().map(|e| e.1).unwrap_or(1.0);
        for &(start, r) in &self.schedule {
            if start <= iteration {
                rate = r;
            }
        }
        rate
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TerminalStatus {
    Converged,
    MaxIterations,
    Failed,
}

/// One optimizer iteration as recorded in a trajectory.
#[derive(Debug, Clone)]
pub struct IterationRecord {
    pub iteration: usize,
    pub cost: f64,
    pub energies: Vec<f64>,
    pub variances: Vec<f64>,
    pub sampling_rate: f64,
    pub theta: Option<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub records: Vec<IterationRecord>,
    pub status: TerminalStatus,
    pub final_params: Vec<f64>,
    pub final_cost: f64,
    /// Present when status is Failed.
    pub failure: Option<String>,
}

impl Trajectory {
    pub fn iterations(&self) -> usize {
        self.records.last().map(|r| r.iteration).unwrap_or(0)
    }

    pub fn final_record(&self) -> Option<&IterationRecord> {
        self.records.last()
    }
}

/// Full cost evaluation: the scalar plus per-state diagnostics.
#[derive(Debug, Clone)]
pub struct CostEval {
    pub cost: f64,
    pub energies: Vec<f64>,
    pub variances: Vec<f64>,
}

/// Plain gradient descent theta <- theta - eta * grad over caller-supplied
/// cost and gradient callbacks. Stops on gradient norm, cost stall, or the
/// iteration cap; a non-finite cost or gradient ends the run with status
/// `Failed` and the last valid iterate.
pub fn minimize<C, G>(
    cost: C,
    gradient: G,
    theta0: &[f64],
    config: &OptimizerConfig,
) -> Trajectory
where
    C: Fn(&[f64]) -> Result<CostEval, SolveError>,
    G: Fn(&[f64]) -> Result<Vec<f64>, SolveError>,
{
    descend(cost, |_, theta| gradient(theta), theta0, config, |_| 1.0)
}

fn descend<C, G, R>(
    cost: C,
    mut gradient: G,
    theta0: &[f64],
    config: &OptimizerConfig,
    rate_at: R,
) -> Trajectory
where
    C: Fn(&[f64]) -> Result<CostEval, SolveError>,
    G: FnMut(usize, &[f64]) -> Result<Vec<f64>, SolveError>,
    R: Fn(usize) -> f64,
{
    let mut theta = theta0.to_vec();
    let mut records: Vec<IterationRecord> = Vec::new();
    let snapshot = |iter: usize, theta: &[f64]| -> Option<Vec<f64>> {
        if config.theta_snapshot_every > 0 && iter % config.theta_snapshot_every == 0 {
            Some(theta.to_vec())
        } else {
            None
        }
    };

    let initial = match cost(&theta) {
        Ok(e) if e.cost.is_finite() => e,
        Ok(e) => {
            return Trajectory {
                records,
                status: TerminalStatus::Failed,
                final_params: theta,
                final_cost: e.cost,
                failure: Some("non-finite initial cost".into()),
            }
        }
        Err(err) => {
            return Trajectory {
                records,
                status: TerminalStatus::Failed,
                final_params: theta,
                final_cost: f64::NAN,
                failure: Some(err.to_string()),
            }
        }
    };
    let mut last_cost = initial.cost;
    records.push(IterationRecord {
        iteration: 0,
        cost: initial.cost,
        energies: initial.energies,
        variances: initial.variances,
        sampling_rate: rate_at(0),
        theta: snapshot(0, &theta),
    });

    let mut status = TerminalStatus::MaxIterations;
    let mut failure = None;
    for t in 1..=config.max_iterations {
        let grad = match gradient(t - 1, &theta) {
            Ok(g) => g,
            Err(err) => {
                status = TerminalStatus::Failed;
                failure = Some(err.to_string());
                break;
            }
        };
        let grad_norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        if !grad_norm.is_finite() {
            status = TerminalStatus::Failed;
            failure = Some("non-finite gradient".into());
            break;
        }
        if grad_norm < config.grad_tolerance {
            status = TerminalStatus::Converged;
            break;
        }
        let previous = theta.clone();
        for (x, g) in theta.iter_mut().zip(&grad) {
            *x -= config.learning_rate * g;
        }
        let eval = match cost(&theta) {
            Ok(e) if e.cost.is_finite() => e,
            Ok(_) => {
                theta = previous;
                status = TerminalStatus::Failed;
                failure = Some("non-finite cost after update".into());
                break;
            }
            Err(err) => {
                theta = previous;
                status = TerminalStatus::Failed;
                failure = Some(err.to_string());
                break;
            }
        };
        last_cost = eval.cost;
        records.push(IterationRecord {
            iteration: t,
            cost: eval.cost,
            energies: eval.energies,
            variances: eval.variances,
            sampling_rate: rate_at(t),
            theta: snapshot(t, &theta),
        });
        if records.len() > config.cost_stall_window {
            let back = &records[records.len() - 1 - config.cost_stall_window];
            if (back.cost - eval.cost).abs() < config.cost_stall_tolerance {
                status = TerminalStatus::Converged;
                break;
            }
        }
    }
    Trajectory {
        records,
        status,
        final_params: theta,
        final_cost: last_cost,
        failure,
    }
}

fn set_cost_eval(
    set: &OrthogonalSet,
    h: &Hamiltonian,
    params: &[f64],
    scalar: impl Fn(&SetEval) -> f64,
) -> Result<CostEval, SolveError> {
    let eval = set.evaluate(h, params)?;
    Ok(CostEval {
        cost: scalar(&eval),
        energies: eval.energies.clone(),
        variances: eval.variances,
    })
}

/// Gradient descent on the weighted variance cost of an orthogonal set.
pub fn minimize_variance_set(
    set: &OrthogonalSet,
    h: &Hamiltonian,
    theta0: &[f64],
    config: &OptimizerConfig,
) -> Trajectory {
    let weights = set.weights().to_vec();
    minimize(
        |p| {
            set_cost_eval(set, h, p, |e| {
                e.variances.iter().zip(&weights).map(|(v, w)| v * w).sum()
            })
        },
        |p| Ok(fd_gradient(|q| cost_variance_set(set, h, q).map_err(flatten), p, config.fd_step)?),
        theta0,
        config,
    )
}

/// Gradient descent on the subspace-search weighted-energy cost.
pub fn minimize_ssvqe(
    set: &OrthogonalSet,
    h: &Hamiltonian,
    theta0: &[f64],
    config: &OptimizerConfig,
) -> Trajectory {
    let weights = set.weights().to_vec();
    minimize(
        |p| {
            if set.weight_mode() != WeightMode::Descending {
                return Err(SolveError::WeightsNotDecreasing);
            }
            set_cost_eval(set, h, p, |e| {
                e.energies.iter().zip(&weights).map(|(en, w)| en * w).sum()
            })
        },
        |p| Ok(fd_gradient(|q| cost_ssvqe(set, h, q).map_err(flatten), p, config.fd_step)?),
        theta0,
        config,
    )
}

/// Gradient descent on the mixed cost with eta_v from the config.
pub fn minimize_mixed(
    set: &OrthogonalSet,
    h: &Hamiltonian,
    theta0: &[f64],
    config: &OptimizerConfig,
) -> Trajectory {
    let eta_v = config.eta_v;
    minimize(
        |p| {
            if eta_v < 0.0 {
                return Err(SolveError::NegativeEtaV(eta_v));
            }
            set_cost_eval(set, h, p, |e| {
                e.energies.iter().sum::<f64>() + eta_v * e.variances.iter().sum::<f64>()
            })
        },
        |p| Ok(fd_gradient(|q| cost_mixed(set, h, q, eta_v).map_err(flatten), p, config.fd_step)?),
        theta0,
        config,
    )
}

/// Single-ansatz variance descent (the survey building block).
pub fn minimize_single_variance(
    circuit: &AnsatzCircuit,
    reference: &StateVector,
    h: &Hamiltonian,
    theta0: &[f64],
    config: &OptimizerConfig,
) -> Trajectory {
    let scalar = |p: &[f64]| -> Result<f64, VarianceError> {
        let state = circuit.prepare_state(p, reference)?;
        h.variance(&state)
    };
    minimize(
        |p| {
            let state = circuit.prepare_state(p, reference).map_err(SolveError::from)?;
            let e = h.energy(&state)?;
            let v = h.variance(&state)?;
            Ok(CostEval {
                cost: v,
                energies: vec![e],
                variances: vec![v],
            })
        },
        |p| Ok(fd_gradient(&scalar, p, config.fd_step)?),
        theta0,
        config,
    )
}

/// Stochastic gradient descent on the weighted variance cost by Hamiltonian
/// sampling: one fresh mask per iteration at the scheduled rate, shared by
/// all states and both probe points of every gradient component. A rate of 1
/// uses the exact fast-path gradient, so a schedule of [(0, 1.0)] reproduces
/// `minimize_variance_set` exactly.
pub fn minimize_sgd<R: Rng + ?Sized>(
    set: &OrthogonalSet,
    h: &Hamiltonian,
    theta0: &[f64],
    config: &OptimizerConfig,
    rng: &mut R,
) -> Result<Trajectory, SolveError> {
    config.validate_schedule()?;
    let weights = set.weights().to_vec();
    let scalar_masked = |p: &[f64], mask: &SampleMask| -> Result<f64, VarianceError> {
        let mut acc = 0.0;
        for (state, w) in set
            .states(p)
            .map_err(|e| match e {
                SolveError::Variance(v) => v,
                SolveError::State(s) => VarianceError::State(s),
                SolveError::Ucc(u) => VarianceError::Ucc(u),
                other => panic!("unexpected state preparation error: {other}"),
            })?
            .iter()
            .zip(&weights)
        {
            acc += w * h.sampled_variance(state, mask)?;
        }
        Ok(acc)
    };
    let trajectory = descend(
        |p| {
            set_cost_eval(set, h, p, |e| {
                e.variances.iter().zip(&weights).map(|(v, w)| v * w).sum()
            })
        },
        |iter, p| {
            let rate = config.active_rate(iter);
            if rate >= 1.0 {
                Ok(fd_gradient(
                    |q| cost_variance_set(set, h, q).map_err(flatten),
                    p,
                    config.fd_step,
                )?)
            } else {
                let mask = draw_mask(h.n_terms(), rate, rng)?;
                Ok(fd_gradient(|q| scalar_masked(q, &mask), p, config.fd_step)?)
            }
        },
        theta0,
        config,
        |iter| config.active_rate(iter),
    );
    Ok(trajectory)
}

fn flatten(err: SolveError) -> VarianceError {
    match err {
        SolveError::Variance(v) => v,
        SolveError::State(s) => VarianceError::State(s),
        SolveError::Ucc(u) => VarianceError::Ucc(u),
        other => panic!("unexpected cost error: {other}"),
    }
}

/// Outcome of one survey start.
#[derive(Debug, Clone)]
pub struct SurveyRecord {
    pub start_index: usize,
    pub theta: Vec<f64>,
    pub energy: f64,
    pub variance: f64,
    pub status: TerminalStatus,
    pub accepted: bool,
    pub nearest_index: Option<usize>,
    pub nearest_eigenvalue: Option<f64>,
}

/// Independent variance minimizations from uniformly random starts in
/// [0, 2pi]^K; accepted runs are those with terminal variance below the
/// threshold, tagged with the nearest exact eigenvalue when the dense oracle
/// is available. Starts run in parallel; results are ordered and
/// deterministic for a fixed seed.
pub fn multi_start_survey<R: Rng + ?Sized>(
    h: &Hamiltonian,
    circuit: &AnsatzCircuit,
    reference: &StateVector,
    n_starts: usize,
    accept_threshold: f64,
    config: &OptimizerConfig,
    rng: &mut R,
) -> Result<Vec<SurveyRecord>, SolveError> {
    let oracle: Option<Spectrum> = if h.n_qubits() <= MAX_DENSE_QUBITS {
        let dense = to_dense(h.poly()).expect("within the dense cap");
        Some(spectrum(&dense, None).expect("Hamiltonians are Hermitian"))
    } else {
        None
    };
    let seeds: Vec<u64> = (0..n_starts).map(|_| rng.gen()).collect();
    let records: Vec<SurveyRecord> = seeds
        .par_iter()
        .enumerate()
        .map(|(start_index, &seed)| {
            let mut local = ChaCha8Rng::seed_from_u64(seed);
            let theta0: Vec<f64> = (0..circuit.n_params())
                .map(|_| local.gen_range(0.0..2.0 * std::f64::consts::PI))
                .collect();
            let run = minimize_single_variance(circuit, reference, h, &theta0, config);
            let record = run.final_record();
            let (energy, variance) = record
                .map(|r| (r.energies[0], r.variances[0]))
                .unwrap_or((f64::NAN, f64::NAN));
            let accepted = run.status != TerminalStatus::Failed && variance < accept_threshold;
            let (nearest_index, nearest_eigenvalue) = match &oracle {
                Some(spec) if energy.is_finite() => {
                    let (idx, ev) = spec.nearest(energy);
                    (Some(idx), Some(ev))
                }
                _ => (None, None),
            };
            SurveyRecord {
                start_index,
                theta: run.final_params,
                energy,
                variance,
                status: run.status,
                accepted,
                nearest_index,
                nearest_eigenvalue,
            }
        })
        .collect();
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::{PauliOp, PauliPolynomial, PauliString};
    use crate::ucc::{all_singles, build_ucc, disjoint_doubles};

    fn test_hamiltonian(n: usize, terms: &[(&[PauliOp], f64)]) -> Hamiltonian {
        let poly = PauliPolynomial::from_real_terms(
            n,
            terms
                .iter()
                .map(|(ops, c)| (PauliString::from_ops(ops).unwrap(), *c)),
        )
        .unwrap();
        Hamiltonian::new(poly).unwrap()
    }

    fn quadratic_bowl() -> (
        impl Fn(&[f64]) -> Result<CostEval, SolveError>,
        impl Fn(&[f64]) -> Result<Vec<f64>, SolveError>,
    ) {
        (
            |p: &[f64]| {
                Ok(CostEval {
                    cost: p.iter().map(|x| x * x).sum(),
                    energies: vec![],
                    variances: vec![],
                })
            },
            |p: &[f64]| Ok(p.iter().map(|x| 2.0 * x).collect()),
        )
    }

    #[test]
    fn bowl_converges_geometrically() {
        let (cost, grad) = quadratic_bowl();
        let config = OptimizerConfig {
            learning_rate: 0.1,
            max_iterations: 2000,
            grad_tolerance: 1e-12,
            ..Default::default()
        };
        let run = minimize(cost, grad, &[1.0, -2.0, 0.5], &config);
        assert_eq!(run.status, TerminalStatus::Converged);
        assert!(run.final_cost < 1e-12);
    }

    #[test]
    fn one_step_update_arithmetic() {
        let cost = |p: &[f64]| {
            Ok(CostEval {
                cost: 2.0 * p[0],
                energies: vec![],
                variances: vec![],
            })
        };
        let grad = |_: &[f64]| Ok(vec![2.0]);
        let config = OptimizerConfig {
            learning_rate: 0.05,
            max_iterations: 1,
            grad_tolerance: 0.0,
            cost_stall_tolerance: 0.0,
            ..Default::default()
        };
        let run = minimize(cost, grad, &[1.0], &config);
        assert!((run.final_params[0] - 0.9).abs() < 1e-15);
    }

    #[test]
    fn non_finite_cost_fails_with_last_valid_iterate() {
        let cost = |p: &[f64]| {
            Ok(CostEval {
                cost: if p[0] < 0.9 { f64::NAN } else { p[0] },
                energies: vec![],
                variances: vec![],
            })
        };
        let grad = |_: &[f64]| Ok(vec![10.0]);
        let config = OptimizerConfig {
            learning_rate: 0.05,
            max_iterations: 50,
            grad_tolerance: 0.0,
            ..Default::default()
        };
        let run = minimize(cost, grad, &[1.0], &config);
        assert_eq!(run.status, TerminalStatus::Failed);
        assert!((run.final_params[0] - 1.0).abs() < 1e-15);
        assert!(run.failure.is_some());
    }

    #[test]
    fn schedule_lookup() {
        let config = OptimizerConfig {
            schedule: vec![(0, 0.1), (1000, 1.0)],
            ..Default::default()
        };
        config.validate_schedule().unwrap();
        assert_eq!(config.active_rate(0), 0.1);
        assert_eq!(config.active_rate(999), 0.1);
        assert_eq!(config.active_rate(1000), 1.0);
        assert_eq!(config.active_rate(5000), 1.0);
        let bad = OptimizerConfig {
            schedule: vec![(5, 0.1)],
            ..Default::default()
        };
        assert!(bad.validate_schedule().is_err());
        let bad_rate = OptimizerConfig {
            schedule: vec![(0, 0.0)],
            ..Default::default()
        };
        assert!(bad_rate.validate_schedule().is_err());
    }

    #[test]
    fn orthogonal_set_validation() {
        use PauliOp::*;
        let circuit = build_ucc(&all_singles(4), &disjoint_doubles(4), 1, 4).unwrap();
        let _ = test_hamiltonian(4, &[(&[Z, I, I, I], 1.0)]);
        assert!(matches!(
            OrthogonalSet::equal_weights(circuit.clone(), &["0011", "0011"]),
            Err(SolveError::DuplicateReference(_))
        ));
        assert!(matches!(
            OrthogonalSet::descending_weights(
                circuit.clone(),
                &["0011", "0101"],
                vec![0.5, 0.5]
            ),
            Err(SolveError::WeightsNotDecreasing)
        ));
        let set = OrthogonalSet::equal_weights(circuit, &["0011", "0101"]).unwrap();
        assert_eq!(set.weights(), &[0.5, 0.5]);
    }

    #[test]
    fn k_equal_one_reduces_to_plain_costs() {
        use PauliOp::*;
        let h = test_hamiltonian(4, &[(&[Z, I, I, I], 0.7), (&[X, X, I, I], 0.4)]);
        let circuit = build_ucc(&all_singles(4), &disjoint_doubles(4), 1, 4).unwrap();
        let params: Vec<f64> = (0..9).map(|i| 0.05 * (i as f64 + 1.0)).collect();
        let set = OrthogonalSet::equal_weights(circuit.clone(), &["0011"]).unwrap();
        let state = circuit
            .prepare_state(&params, &StateVector::basis_state(4, "0011").unwrap())
            .unwrap();
        let var_cost = cost_variance_set(&set, &h, &params).unwrap();
        assert!((var_cost - h.variance(&state).unwrap()).abs() < 1e-12);
        let ss = OrthogonalSet::descending_weights(circuit, &["0011"], vec![1.0]).unwrap();
        let e_cost = cost_ssvqe(&ss, &h, &params).unwrap();
        assert!((e_cost - h.energy(&state).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn equal_weight_cost_is_permutation_invariant() {
        use PauliOp::*;
        let h = test_hamiltonian(4, &[(&[Z, I, I, I], 0.7), (&[X, X, I, I], 0.4), (&[I, Z, Z, I], -0.3)]);
        let circuit = build_ucc(&all_singles(4), &disjoint_doubles(4), 1, 4).unwrap();
        let params: Vec<f64> = (0..9).map(|i| 0.1 + 0.07 * i as f64).collect();
        let a = OrthogonalSet::equal_weights(circuit.clone(), &["0011", "0101", "1010"]).unwrap();
        let b = OrthogonalSet::equal_weights(circuit.clone(), &["1010", "0011", "0101"]).unwrap();
        let ca = cost_variance_set(&a, &h, &params).unwrap();
        let cb = cost_variance_set(&b, &h, &params).unwrap();
        assert!((ca - cb).abs() < 1e-12);
        // the weighted-energy cost is not permutation invariant
        let wa = OrthogonalSet::descending_weights(
            circuit.clone(),
            &["0011", "0101", "1010"],
            vec![3.0, 2.0, 1.0],
        )
        .unwrap();
        let wb = OrthogonalSet::descending_weights(
            circuit,
            &["1010", "0011", "0101"],
            vec![3.0, 2.0, 1.0],
        )
        .unwrap();
        let ea = cost_ssvqe(&wa, &h, &params).unwrap();
        let eb = cost_ssvqe(&wb, &h, &params).unwrap();
        assert!((ea - eb).abs() > 1e-6, "permuting references should move the weighted cost");
    }

    #[test]
    fn mixed_cost_reductions_and_validation() {
        use PauliOp::*;
        let h = test_hamiltonian(4, &[(&[Z, I, I, I], 0.7), (&[X, X, I, I], 0.4)]);
        let circuit = build_ucc(&all_singles(4), &disjoint_doubles(4), 1, 4).unwrap();
        let set = OrthogonalSet::equal_weights(circuit, &["0011", "0101"]).unwrap();
        let params: Vec<f64> = (0..9).map(|i| 0.04 * i as f64).collect();
        let eval = set.evaluate(&h, &params).unwrap();
        let energy_sum: f64 = eval.energies.iter().sum();
        let mix0 = cost_mixed(&set, &h, &params, 0.0).unwrap();
        assert!((mix0 - energy_sum).abs() < 1e-12);
        assert!(matches!(
            cost_mixed(&set, &h, &params, -0.5),
            Err(SolveError::NegativeEtaV(_))
        ));
    }

    #[test]
    fn mixed_gradient_is_linear_combination() {
        use PauliOp::*;
        let h = test_hamiltonian(
            4,
            &[(&[Z, I, I, I], 0.7), (&[X, X, I, I], 0.4), (&[I, Y, Y, I], 0.2)],
        );
        let circuit = build_ucc(&all_singles(4), &disjoint_doubles(4), 1, 4).unwrap();
        let set = OrthogonalSet::equal_weights(circuit, &["0011", "0110"]).unwrap();
        let params: Vec<f64> = (0..9).map(|i| 0.3 - 0.06 * i as f64).collect();
        let eta_v = 0.8;
        let step = 1e-5;
        let mixed = fd_gradient(
            |p| cost_mixed(&set, &h, p, eta_v).map_err(flatten),
            &params,
            step,
        )
        .unwrap();
        let energy_sum = fd_gradient(
            |p| cost_mixed(&set, &h, p, 0.0).map_err(flatten),
            &params,
            step,
        )
        .unwrap();
        let var_sum = fd_gradient(
            |p| {
                let mut acc = 0.0;
                for state in set.states(p).map_err(flatten)? {
                    acc += h.variance(&state)?;
                }
                Ok(acc)
            },
            &params,
            step,
        )
        .unwrap();
        for i in 0..params.len() {
            let combo = energy_sum[i] + eta_v * var_sum[i];
            assert!(
                (mixed[i] - combo).abs() < 1e-9,
                "component {i}: {} vs {}",
                mixed[i],
                combo
            );
        }
    }

    #[test]
    fn sgd_with_unit_rate_matches_exact_descent() {
        use PauliOp::*;
        let h = test_hamiltonian(4, &[(&[Z, I, I, I], 0.7), (&[X, X, I, I], 0.4)]);
        let circuit = build_ucc(&all_singles(4), &disjoint_doubles(4), 1, 4).unwrap();
        let set = OrthogonalSet::equal_weights(circuit, &["0011", "0101"]).unwrap();
        let theta0: Vec<f64> = (0..9).map(|i| 0.2 + 0.05 * i as f64).collect();
        let config = OptimizerConfig {
            learning_rate: 0.08,
            max_iterations: 40,
            grad_tolerance: 1e-14,
            cost_stall_tolerance: 0.0,
            schedule: vec![(0, 1.0)],
            ..Default::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let sgd = minimize_sgd(&set, &h, &theta0, &config, &mut rng).unwrap();
        let exact = minimize_variance_set(&set, &h, &theta0, &config);
        assert_eq!(sgd.records.len(), exact.records.len());
        for (a, b) in sgd.records.iter().zip(&exact.records) {
            assert_eq!(a.cost.to_bits(), b.cost.to_bits(), "iteration {}", a.iteration);
        }
        for (a, b) in sgd.final_params.iter().zip(&exact.final_params) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn sgd_is_deterministic_under_fixed_seed() {
        use PauliOp::*;
        let h = test_hamiltonian(
            4,
            &[(&[Z, I, I, I], 0.7), (&[X, X, I, I], 0.4), (&[I, Z, I, Z], -0.2)],
        );
        let circuit = build_ucc(&all_singles(4), &disjoint_doubles(4), 1, 4).unwrap();
        let set = OrthogonalSet::equal_weights(circuit, &["0011", "0101"]).unwrap();
        let theta0: Vec<f64> = (0..9).map(|i| 0.2 + 0.05 * i as f64).collect();
        let config = OptimizerConfig {
            learning_rate: 0.05,
            max_iterations: 30,
            grad_tolerance: 1e-14,
            cost_stall_tolerance: 0.0,
            schedule: vec![(0, 0.4)],
            ..Default::default()
        };
        let run = |seed: u64| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            minimize_sgd(&set, &h, &theta0, &config, &mut rng).unwrap()
        };
        let a = run(42);
        let b = run(42);
        for (ra, rb) in a.records.iter().zip(&b.records) {
            assert_eq!(ra.cost.to_bits(), rb.cost.to_bits());
        }
        let c = run(43);
        let different = a
            .records
            .iter()
            .zip(&c.records)
            .any(|(ra, rc)| ra.cost.to_bits() != rc.cost.to_bits());
        assert!(different, "different seeds should draw different masks");
    }

    #[test]
    fn survey_single_start_reduces_to_minimize() {
        use PauliOp::*;
        let h = test_hamiltonian(2, &[(&[Z, I], 0.9), (&[I, Z], -0.4), (&[X, X], 0.3)]);
        let circuit = build_ucc(&all_singles(2), &[], 1, 2).unwrap();
        let reference = StateVector::basis_state(2, "01").unwrap();
        let config = OptimizerConfig {
            learning_rate: 0.2,
            max_iterations: 3000,
            ..Default::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let survey =
            multi_start_survey(&h, &circuit, &reference, 1, 1e-8, &config, &mut rng).unwrap();
        assert_eq!(survey.len(), 1);
        let record = &survey[0];
        if record.accepted {
            let nearest = record.nearest_eigenvalue.unwrap();
            assert!((record.energy - nearest).abs() < 1e-6);
        }
    }
}
