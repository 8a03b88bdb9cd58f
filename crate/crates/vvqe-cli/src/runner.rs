//! Experiment orchestration: load inputs, run the requested mode, and write
//! `trajectory.csv` / `summary.json` / `points.csv` artifacts. Output files
//! are written atomically (temp file + rename) and runs are deterministic
//! for a fixed config and seed.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use vvqe_core::hamfile::{load_hamiltonian, HamMetadata};
use vvqe_core::oracle::{spectrum, to_dense, Spectrum, MAX_DENSE_QUBITS};
use vvqe_core::solve::{
    minimize_mixed, minimize_sgd, minimize_single_variance, minimize_ssvqe,
    minimize_variance_set, multi_start_survey, OptimizerConfig, OrthogonalSet, TerminalStatus,
    Trajectory,
};
use vvqe_core::state::StateVector;
use vvqe_core::ucc::{all_singles, build_ucc, disjoint_doubles, occ_virt_doubles, AnsatzCircuit};
use vvqe_core::variance::Hamiltonian;

use crate::config::{
    ConfigError, DoublesSpec, ExperimentConfig, Mode, SinglesSpec, Theta0,
};
use crate::mds::{mds_embed, MdsMetric};

#[derive(Debug, Error)]
pub enum RunError {
    /// Bad configuration or unreadable/invalid inputs: exit code 2.
    #[error(transparent)]
    Config(#[from] ConfigError),
    /// Solver or output failure after validation: exit code 3.
    #[error("{0}")]
    Solver(String),
}

impl RunError {
    pub fn exit_code(&self) -> u8 {
        match self {
            RunError::Config(_) => 2,
            RunError::Solver(_) => 3,
        }
    }
}

fn invalid(msg: impl Into<String>) -> RunError {
    RunError::Config(ConfigError::Invalid(msg.into()))
}

fn solver(msg: impl std::fmt::Display) -> RunError {
    RunError::Solver(msg.to_string())
}

/// Command-line overrides applied on top of a config file.
#[derive(Debug, Clone, Default)]
pub struct CliOverrides {
    pub hamiltonian: Option<PathBuf>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct HamiltonianInfo {
    path: String,
    n_qubits: usize,
    n_terms: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    molecule: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    basis: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    bond_length: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    n_electrons: Option<usize>,
}

#[derive(Debug, Serialize)]
struct OracleBlock {
    eigenvalues: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    filtered: Option<FilteredSpectrum>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    assignments: Vec<Assignment>,
}

#[derive(Debug, Serialize)]
struct FilteredSpectrum {
    particle_sector: usize,
    eigenvalues: Vec<f64>,
}

#[derive(Debug, Serialize)]
struct Assignment {
    state: usize,
    nearest_index: usize,
    nearest_eigenvalue: f64,
    abs_error: f64,
}

#[derive(Debug, Serialize)]
struct TrajectorySummary {
    mode: String,
    seed: u64,
    hamiltonian: HamiltonianInfo,
    references: Vec<String>,
    n_params: usize,
    status: String,
    iterations: usize,
    final_cost: f64,
    energies: Vec<f64>,
    variances: Vec<f64>,
    theta: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    failure: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    oracle: Option<OracleBlock>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    theta_snapshots: Vec<ThetaSnapshot>,
}

#[derive(Debug, Serialize)]
struct ThetaSnapshot {
    iteration: usize,
    theta: Vec<f64>,
}

#[derive(Debug, Serialize)]
struct SurveySummary {
    mode: String,
    seed: u64,
    hamiltonian: HamiltonianInfo,
    reference: String,
    n_params: usize,
    n_starts: usize,
    accept_threshold: f64,
    n_accepted: usize,
    starts: Vec<SurveyStartOut>,
    #[serde(skip_serializing_if = "Option::is_none")]
    oracle: Option<OracleBlock>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SurveyStartOut {
    pub start_index: usize,
    pub theta: Vec<f64>,
    pub energy: f64,
    pub variance: f64,
    pub status: String,
    pub accepted: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nearest_index: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nearest_eigenvalue: Option<f64>,
}

#[derive(Debug, Deserialize)]
struct SurveySummaryIn {
    starts: Vec<SurveyStartOut>,
}

#[derive(Debug, Serialize)]
struct SpectrumSummary {
    mode: String,
    hamiltonian: HamiltonianInfo,
    eigenvalues: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    filtered: Option<FilteredSpectrum>,
}

#[derive(Debug, Serialize)]
struct MdsSummary {
    mode: String,
    input: String,
    metric: String,
    n_points: usize,
    degenerate: bool,
    leading_eigenvalues: [f64; 2],
}

fn status_str(status: TerminalStatus) -> String {
    match status {
        TerminalStatus::Converged => "converged",
        TerminalStatus::MaxIterations => "max-iterations",
        TerminalStatus::Failed => "failed",
    }
    .to_string()
}

fn write_atomic(path: &Path, contents: &str) -> Result<(), RunError> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, contents).map_err(|e| solver(format!("write {}: {e}", tmp.display())))?;
    fs::rename(&tmp, path).map_err(|e| solver(format!("rename to {}: {e}", path.display())))?;
    Ok(())
}

fn to_json(value: &impl Serialize) -> Result<String, RunError> {
    serde_json::to_string_pretty(value).map_err(|e| solver(format!("serialize summary: {e}")))
}

struct LoadedHamiltonian {
    hamiltonian: Hamiltonian,
    metadata: HamMetadata,
    info: HamiltonianInfo,
}

fn load(config: &ExperimentConfig, overrides: &CliOverrides) -> Result<LoadedHamiltonian, RunError> {
    let path = overrides
        .hamiltonian
        .clone()
        .or_else(|| config.hamiltonian.clone())
        .ok_or_else(|| invalid("no hamiltonian path given (config or --hamiltonian)"))?;
    let (poly, metadata) =
        load_hamiltonian(&path).map_err(|e| RunError::Config(ConfigError::Invalid(e.to_string())))?;
    let info = HamiltonianInfo {
        path: path.display().to_string(),
        n_qubits: poly.n_qubits(),
        n_terms: poly.n_terms(),
        molecule: metadata.molecule.clone(),
        basis: metadata.basis.clone(),
        bond_length: metadata.bond_length,
        n_electrons: metadata.n_electrons,
    };
    let hamiltonian = Hamiltonian::new(poly)
        .map_err(|e| RunError::Config(ConfigError::Invalid(e.to_string())))?;
    Ok(LoadedHamiltonian {
        hamiltonian,
        metadata,
        info,
    })
}

fn build_circuit(
    config: &ExperimentConfig,
    n_qubits: usize,
    reference: &str,
) -> Result<AnsatzCircuit, RunError> {
    let singles = match &config.ansatz.singles {
        SinglesSpec::Named(name) => match name.as_str() {
            "all" => all_singles(n_qubits),
            "none" => vec![],
            other => return Err(invalid(format!("unknown singles spec `{other}`"))),
        },
        SinglesSpec::Explicit(v) => v.clone(),
    };
    let doubles = match &config.ansatz.doubles {
        DoublesSpec::Named(name) => match name.as_str() {
            "disjoint" => disjoint_doubles(n_qubits),
            "occ-virt" => occ_virt_doubles(reference),
            "none" => vec![],
            other => return Err(invalid(format!("unknown doubles spec `{other}`"))),
        },
        DoublesSpec::Explicit(v) => v.clone(),
    };
    build_ucc(&singles, &doubles, config.ansatz.trotter_steps, n_qubits)
        .map_err(|e| RunError::Config(ConfigError::Invalid(e.to_string())))
}

fn draw_theta0(
    spec: &Theta0,
    n_params: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<f64>, RunError> {
    match spec {
        Theta0::Named(name) => {
            if name == "zero" {
                return Ok(vec![0.0; n_params]);
            }
            if name == "random" {
                return Ok((0..n_params)
                    .map(|_| rng.gen_range(0.0..2.0 * std::f64::consts::PI))
                    .collect());
            }
            if let Some(rest) = name.strip_prefix("random:") {
                let parts: Vec<&str> = rest.split(':').collect();
                if parts.len() == 2 {
                    let lo: f64 = parts[0]
                        .parse()
                        .map_err(|_| invalid("bad theta0 range lower bound"))?;
                    let hi: f64 = parts[1]
                        .parse()
                        .map_err(|_| invalid("bad theta0 range upper bound"))?;
                    if !(lo < hi) {
                        return Err(invalid("theta0 range must satisfy lo < hi"));
                    }
                    return Ok((0..n_params).map(|_| rng.gen_range(lo..hi)).collect());
                }
                return Err(invalid("theta0 must be `random:LO:HI`"));
            }
            Err(invalid(format!("unknown theta0 spec `{name}`")))
        }
        Theta0::Explicit(v) => {
            if v.len() != n_params {
                return Err(invalid(format!(
                    "theta0 has {} entries but the circuit has {} parameters",
                    v.len(),
                    n_params
                )));
            }
            Ok(v.clone())
        }
    }
}

fn oracle_block(
    h: &Hamiltonian,
    metadata: &HamMetadata,
    particle_sector: Option<usize>,
    energies: &[f64],
) -> Option<OracleBlock> {
    if h.n_qubits() > MAX_DENSE_QUBITS {
        return None;
    }
    let dense = to_dense(h.poly()).ok()?;
    let full = spectrum(&dense, None).ok()?;
    let sector = particle_sector.or(metadata.n_electrons);
    let filtered = sector.and_then(|m| {
        spectrum(&dense, Some(m)).ok().map(|s| FilteredSpectrum {
            particle_sector: m,
            eigenvalues: s.eigenvalues,
        })
    });
    let assignments = energies
        .iter()
        .enumerate()
        .map(|(state, &e)| {
            let (nearest_index, nearest_eigenvalue) = full.nearest(e);
            Assignment {
                state,
                nearest_index,
                nearest_eigenvalue,
                abs_error: (e - nearest_eigenvalue).abs(),
            }
        })
        .collect();
    Some(OracleBlock {
        eigenvalues: full.eigenvalues,
        filtered,
        assignments,
    })
}

fn trajectory_csv(run: &Trajectory, k: usize) -> String {
    let mut out = String::new();
    out.push_str("iteration,cost");
    for n in 0..k {
        let _ = write!(out, ",e_{n}");
    }
    for n in 0..k {
        let _ = write!(out, ",delta_{n}");
    }
    out.push_str(",sampling_rate\n");
    for rec in &run.records {
        let _ = write!(out, "{},{}", rec.iteration, rec.cost);
        for e in &rec.energies {
            let _ = write!(out, ",{e}");
        }
        for v in &rec.variances {
            let _ = write!(out, ",{v}");
        }
        let _ = writeln!(out, ",{}", rec.sampling_rate);
    }
    out
}

fn ensure_out_dir(overrides: &CliOverrides) -> Result<PathBuf, RunError> {
    let dir = overrides.out.clone().unwrap_or_else(|| PathBuf::from("out"));
    fs::create_dir_all(&dir).map_err(|e| solver(format!("create {}: {e}", dir.display())))?;
    Ok(dir)
}

/// Run one experiment; returns the artifact directory on success.
pub fn run_experiment(
    mode: Mode,
    config: &ExperimentConfig,
    overrides: &CliOverrides,
) -> Result<PathBuf, RunError> {
    config.validate(mode)?;
    match mode {
        Mode::Spectrum => run_spectrum(config, overrides),
        Mode::Survey => run_survey(config, overrides),
        Mode::Mds => run_mds(config, overrides),
        Mode::Ortho | Mode::Ssvqe | Mode::Mixed | Mode::Sgd => {
            run_trajectory_mode(mode, config, overrides)
        }
    }
}

fn run_spectrum(config: &ExperimentConfig, overrides: &CliOverrides) -> Result<PathBuf, RunError> {
    let loaded = load(config, overrides)?;
    let h = &loaded.hamiltonian;
    if h.n_qubits() > MAX_DENSE_QUBITS {
        return Err(invalid(format!(
            "spectrum mode needs n <= {MAX_DENSE_QUBITS} qubits, fixture has {}",
            h.n_qubits()
        )));
    }
    let dense = to_dense(h.poly()).map_err(|e| solver(e))?;
    let full = spectrum(&dense, None).map_err(|e| solver(e))?;
    let sector = config.spectrum.particle_sector.or(loaded.metadata.n_electrons);
    let filtered = match sector {
        Some(m) => Some(FilteredSpectrum {
            particle_sector: m,
            eigenvalues: spectrum(&dense, Some(m)).map_err(|e| solver(e))?.eigenvalues,
        }),
        None => None,
    };
    let out_dir = ensure_out_dir(overrides)?;
    let summary = SpectrumSummary {
        mode: "spectrum".into(),
        hamiltonian: loaded.info,
        eigenvalues: full.eigenvalues,
        filtered,
    };
    write_atomic(&out_dir.join("summary.json"), &to_json(&summary)?)?;
    println!("spectrum: wrote {}", out_dir.join("summary.json").display());
    Ok(out_dir)
}

fn run_survey(config: &ExperimentConfig, overrides: &CliOverrides) -> Result<PathBuf, RunError> {
    let loaded = load(config, overrides)?;
    let h = &loaded.hamiltonian;
    let reference_bits = config
        .reference
        .clone()
        .or_else(|| loaded.metadata.hf_reference.clone())
        .ok_or_else(|| invalid("survey mode needs `reference` (or hf_reference metadata)"))?;
    let circuit = build_circuit(config, h.n_qubits(), &reference_bits)?;
    let reference = StateVector::basis_state(h.n_qubits(), &reference_bits)
        .map_err(|e| RunError::Config(ConfigError::Invalid(e.to_string())))?;
    let opt = config.optimizer_config(overrides.seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(opt.seed);
    let records = multi_start_survey(
        h,
        &circuit,
        &reference,
        config.survey.n_starts,
        config.survey.accept_threshold,
        &opt,
        &mut rng,
    )
    .map_err(|e| solver(e))?;
    let starts: Vec<SurveyStartOut> = records
        .iter()
        .map(|r| SurveyStartOut {
            start_index: r.start_index,
            theta: r.theta.clone(),
            energy: r.energy,
            variance: r.variance,
            status: status_str(r.status),
            accepted: r.accepted,
            nearest_index: r.nearest_index,
            nearest_eigenvalue: r.nearest_eigenvalue,
        })
        .collect();
    let n_accepted = starts.iter().filter(|s| s.accepted).count();
    let energies: Vec<f64> = records.iter().map(|r| r.energy).collect();
    let oracle = oracle_block(h, &loaded.metadata, config.spectrum.particle_sector, &energies);
    let out_dir = ensure_out_dir(overrides)?;
    let summary = SurveySummary {
        mode: "survey".into(),
        seed: opt.seed,
        hamiltonian: loaded.info,
        reference: reference_bits,
        n_params: circuit.n_params(),
        n_starts: config.survey.n_starts,
        accept_threshold: config.survey.accept_threshold,
        n_accepted,
        starts,
        oracle,
    };
    write_atomic(&out_dir.join("summary.json"), &to_json(&summary)?)?;
    println!(
        "survey: {n_accepted}/{} starts accepted; wrote {}",
        config.survey.n_starts,
        out_dir.join("summary.json").display()
    );
    Ok(out_dir)
}

fn run_trajectory_mode(
    mode: Mode,
    config: &ExperimentConfig,
    overrides: &CliOverrides,
) -> Result<PathBuf, RunError> {
    let loaded = load(config, overrides)?;
    let h = &loaded.hamiltonian;
    let refs = &config.references;
    let circuit = build_circuit(config, h.n_qubits(), &refs[0])?;
    let opt = config.optimizer_config(overrides.seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(opt.seed);
    let theta0 = draw_theta0(&config.optimizer.theta0, circuit.n_params(), &mut rng)?;

    let build_set = |descending: bool| -> Result<OrthogonalSet, RunError> {
        if descending {
            let k = refs.len();
            let weights = config.weights.clone().unwrap_or_else(|| {
                (0..k).map(|i| (k - i) as f64 / k as f64).collect()
            });
            OrthogonalSet::descending_weights(circuit.clone(), refs, weights)
                .map_err(|e| RunError::Config(ConfigError::Invalid(e.to_string())))
        } else {
            OrthogonalSet::equal_weights(circuit.clone(), refs)
                .map_err(|e| RunError::Config(ConfigError::Invalid(e.to_string())))
        }
    };

    let run: Trajectory = match mode {
        Mode::Ortho => {
            if refs.len() == 1 {
                let reference = StateVector::basis_state(h.n_qubits(), &refs[0])
                    .map_err(|e| RunError::Config(ConfigError::Invalid(e.to_string())))?;
                minimize_single_variance(&circuit, &reference, h, &theta0, &opt)
            } else {
                minimize_variance_set(&build_set(false)?, h, &theta0, &opt)
            }
        }
        Mode::Ssvqe => minimize_ssvqe(&build_set(true)?, h, &theta0, &opt),
        Mode::Mixed => minimize_mixed(&build_set(false)?, h, &theta0, &opt),
        Mode::Sgd => minimize_sgd(&build_set(false)?, h, &theta0, &opt, &mut rng)
            .map_err(|e| solver(e))?,
        _ => unreachable!("trajectory modes only"),
    };

    let out_dir = ensure_out_dir(overrides)?;
    write_atomic(
        &out_dir.join("trajectory.csv"),
        &trajectory_csv(&run, refs.len()),
    )?;
    let final_record = run.final_record();
    let energies = final_record.map(|r| r.energies.clone()).unwrap_or_default();
    let variances = final_record.map(|r| r.variances.clone()).unwrap_or_default();
    let oracle = oracle_block(h, &loaded.metadata, config.spectrum.particle_sector, &energies);
    let theta_snapshots = run
        .records
        .iter()
        .filter_map(|r| {
            r.theta.as_ref().map(|t| ThetaSnapshot {
                iteration: r.iteration,
                theta: t.clone(),
            })
        })
        .collect();
    let summary = TrajectorySummary {
        mode: mode.as_str().into(),
        seed: opt.seed,
        hamiltonian: loaded.info,
        references: refs.clone(),
        n_params: circuit.n_params(),
        status: status_str(run.status),
        iterations: run.iterations(),
        final_cost: run.final_cost,
        energies,
        variances,
        theta: run.final_params.clone(),
        failure: run.failure.clone(),
        oracle,
        theta_snapshots,
    };
    write_atomic(&out_dir.join("summary.json"), &to_json(&summary)?)?;
    println!(
        "{}: status {} after {} iterations, final cost {:.6e}; wrote {}",
        mode.as_str(),
        status_str(run.status),
        run.iterations(),
        run.final_cost,
        out_dir.join("summary.json").display()
    );
    if run.status == TerminalStatus::Failed {
        return Err(solver(format!(
            "optimizer failed: {}",
            run.failure.unwrap_or_else(|| "unknown".into())
        )));
    }
    Ok(out_dir)
}

fn run_mds(config: &ExperimentConfig, overrides: &CliOverrides) -> Result<PathBuf, RunError> {
    let input = config.mds.input.clone().expect("validated");
    let text = fs::read_to_string(&input)
        .map_err(|e| invalid(format!("cannot read mds input {}: {e}", input.display())))?;
    let survey: SurveySummaryIn = serde_json::from_str(&text)
        .map_err(|e| invalid(format!("mds input is not a survey summary: {e}")))?;
    let accepted: Vec<&SurveyStartOut> = survey.starts.iter().filter(|s| s.accepted).collect();
    let thetas: Vec<Vec<f64>> = accepted.iter().map(|s| s.theta.clone()).collect();
    let metric = match config.mds.metric.as_deref() {
        None | Some("periodic-cosine") => MdsMetric::PeriodicCosine,
        Some("euclidean") => MdsMetric::Euclidean,
        Some(other) => return Err(invalid(format!("unknown mds metric `{other}`"))),
    };
    let embedding = mds_embed(&thetas, metric).map_err(|e| solver(e))?;
    if embedding.degenerate {
        eprintln!("mds: all points coincide; coordinates are degenerate at the origin");
    }
    let mut csv = String::from("start_index,x,y,energy,variance,nearest_index\n");
    for (s, c) in accepted.iter().zip(&embedding.coords) {
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{}",
            s.start_index,
            c[0],
            c[1],
            s.energy,
            s.variance,
            s.nearest_index.map(|i| i as i64).unwrap_or(-1)
        );
    }
    let out_dir = ensure_out_dir(overrides)?;
    write_atomic(&out_dir.join("points.csv"), &csv)?;
    let summary = MdsSummary {
        mode: "mds".into(),
        input: input.display().to_string(),
        metric: match metric {
            MdsMetric::PeriodicCosine => "periodic-cosine".into(),
            MdsMetric::Euclidean => "euclidean".into(),
        },
        n_points: thetas.len(),
        degenerate: embedding.degenerate,
        leading_eigenvalues: embedding.leading_eigenvalues,
    };
    write_atomic(&out_dir.join("summary.json"), &to_json(&summary)?)?;
    println!(
        "mds: embedded {} accepted solutions; wrote {}",
        thetas.len(),
        out_dir.join("points.csv").display()
    );
    Ok(out_dir)
}
