use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::config::{RunConfig, RunMode};
use super::output::{write_json, ErrorRecord, SnapshotWriter, TrajectoryRecord, TrajectoryWriter};
use crate::error::{Error, Result};
use crate::fd::{
    heat_hamiltonian_1d, laplace_hamiltonian_2d, second_difference, stencil_matrix_1d,
    stencil_matrix_2d, BoundaryCondition, FdOperator,
};
use crate::grid::{encode_samples, readout_probabilities, GridSpec};
use crate::norm::{ground_state, linear_factor, GroundStateInfo, GroundStateSource, NormTracker};
use crate::oracle::{fidelity, mse_direct, mse_factored, norm_ratio, rescaled, SpectralSolution};
use crate::qite::QiteEvolver;
use crate::state::StateVector;

/// Heat Hamiltonian `−α∇²` on the configured grid.
pub fn build_hamiltonian(grid: &GridSpec, alpha: f64) -> Result<FdOperator<f64>> {
    grid.validate()?;
    match grid.axes.as_slice() {
        [x] => heat_hamiltonian_1d(x.qubits, x.spacing, alpha, x.bc),
        [x, y] => {
            laplace_hamiltonian_2d(x.qubits, y.qubits, x.spacing, y.spacing, alpha, x.bc, y.bc)
        }
        _ => Err(Error::Usage("grid must have one or two axes".into())),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Summary {
    pub final_fidelity: f64,
    pub final_mse: f64,
    pub final_mse_direct: f64,
    pub final_log10_ratio: f64,
    pub max_abs_log10_ratio: f64,
    /// Ground-state eigenvalue used for norm correction.
    pub lambda0: f64,
    pub lambda0_exact: f64,
    pub ground_state_source: GroundStateSource,
    pub initial_norm: f64,
    pub steps_completed: usize,
    pub final_c_prime_product: f64,
    pub max_imag_amplitude: f64,
    pub runtime_seconds: f64,
    pub config: RunConfig,
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub summary: Summary,
    pub records: Vec<TrajectoryRecord>,
}

struct Recorder<'a> {
    cfg: &'a RunConfig,
    solution: SpectralSolution<f64>,
    scale_sqr: f64,
    samples: usize,
    snapshot_steps: BTreeSet<usize>,
    trajectory: TrajectoryWriter,
    snapshots: SnapshotWriter,
    rng: Option<(ChaCha8Rng, u64)>,
    records: Vec<TrajectoryRecord>,
    max_imag: f64,
    last_mse_direct: f64,
}

impl Recorder<'_> {
    fn record(
        &mut self,
        step: usize,
        state: &StateVector<f64>,
        c_psi: f64,
        c_prime: f64,
        fit_residual: f64,
    ) -> Result<TrajectoryRecord> {
        let t = step as f64 * self.cfg.qite.dt;
        let (exact, c_f) = self.solution.evolve(t)?;
        let f = fidelity(&exact, state)?;
        let r = norm_ratio(c_psi, c_f)?;
        let abs_f = self.scale_sqr * c_f;
        let abs_psi = self.scale_sqr * c_psi;
        let rec = TrajectoryRecord {
            step,
            t,
            fidelity: f,
            mse: mse_factored(abs_f, r, f, self.samples),
            log10_norm_ratio: r.log10(),
            c_prime,
            c_psi,
            c_f,
            fit_residual,
        };
        self.trajectory.write(&rec)?;
        self.records.push(rec);
        self.max_imag = self.max_imag.max(state.max_imag());
        let f_vec = rescaled(&exact, abs_f);
        let psi_vec = rescaled(state, abs_psi);
        self.last_mse_direct = mse_direct(&f_vec, &psi_vec)?;
        if self.snapshot_steps.contains(&step) {
            let approx = match &mut self.rng {
                Some((rng, shots)) => readout_probabilities(state, Some(*shots), rng)?
                    .iter()
                    .map(|p| p.sqrt() * abs_psi.sqrt())
                    .collect(),
                None => psi_vec.real_parts(),
            };
            self.snapshots.write(t, &f_vec.real_parts(), &approx)?;
        }
        Ok(rec)
    }

    fn flush(&mut self) -> Result<()> {
        self.trajectory.flush()?;
        self.snapshots.flush()
    }
}

fn snapshot_steps(cfg: &RunConfig) -> BTreeSet<usize> {
    cfg.snapshot_times
        .iter()
        .map(|t| ((t / cfg.qite.dt).round() as usize).min(cfg.qite.steps))
        .collect()
}

/// Runs one configuration and writes `trajectory.csv`, `snapshots.csv` and `summary.json`.
///
/// On a step failure the rows produced so far stay on disk next to `error.json`.
pub fn run_experiment(cfg: &RunConfig) -> Result<RunOutcome> {
    cfg.validate()?;
    let started = Instant::now();
    let out = &cfg.outputs;
    std::fs::create_dir_all(out)?;
    let h = build_hamiltonian(&cfg.grid, cfg.alpha)?;
    let (psi0, norm0) = encode_samples::<f64>(&cfg.initial_samples()?)?;
    let exact_ground = ground_state(&h, GroundStateSource::ExactEigen, None)?;
    let ground = match cfg.norm.ground_state {
        GroundStateSource::ExactEigen => exact_ground.clone(),
        GroundStateSource::LongQite => ground_state(
            &h,
            GroundStateSource::LongQite,
            Some((&cfg.qite, cfg.norm.long_horizon, &psi0)),
        )?,
    };
    let mut rec = Recorder {
        cfg,
        solution: SpectralSolution::new(&h, &psi0)?,
        scale_sqr: norm0 * norm0,
        samples: cfg.grid.total_samples(),
        snapshot_steps: snapshot_steps(cfg),
        trajectory: TrajectoryWriter::create(&out.join("trajectory.csv"))?,
        snapshots: SnapshotWriter::create(&out.join("snapshots.csv"), &cfg.grid)?,
        rng: cfg
            .readout
            .as_ref()
            .map(|r| (ChaCha8Rng::seed_from_u64(r.seed), r.shots)),
        records: Vec::with_capacity(cfg.qite.steps + 1),
        max_imag: 0.0,
        last_mse_direct: 0.0,
    };
    rec.record(0, &psi0, 1.0, 1.0, 0.0)?;

    let mut tracker = NormTracker::new(cfg.norm.period, &ground, &psi0, norm0)?;
    let result = match cfg.mode {
        RunMode::Qite => run_qite(cfg, &h, &ground, &psi0, &mut tracker, &mut rec),
        RunMode::ExactOnly => run_exact(cfg, &mut rec),
    };
    rec.flush()?;
    if let Err(e) = result {
        let step = match &e {
            Error::StepFailure { step, .. } => Some(*step),
            _ => None,
        };
        write_json(
            &out.join("error.json"),
            &ErrorRecord {
                step,
                error: e.to_string(),
                exit_code: e.exit_code(),
            },
        )?;
        return Err(e);
    }

    let last = *rec.records.last().expect("step 0 recorded");
    let summary = Summary {
        final_fidelity: last.fidelity,
        final_mse: last.mse,
        final_mse_direct: rec.last_mse_direct,
        final_log10_ratio: last.log10_norm_ratio,
        max_abs_log10_ratio: rec
            .records
            .iter()
            .map(|r| r.log10_norm_ratio.abs())
            .fold(0.0, f64::max),
        lambda0: ground.eigenvalue,
        lambda0_exact: exact_ground.eigenvalue,
        ground_state_source: ground.source,
        initial_norm: norm0,
        steps_completed: last.step,
        final_c_prime_product: tracker.c_prime_product(),
        max_imag_amplitude: rec.max_imag,
        runtime_seconds: started.elapsed().as_secs_f64(),
        config: cfg.clone(),
    };
    write_json(&out.join("summary.json"), &summary)?;
    log::info!(
        "{}: F = {:.12}, MSE = {:.3e}, log10 r = {:.3e} in {:.1} s",
        out.display(),
        summary.final_fidelity,
        summary.final_mse,
        summary.final_log10_ratio,
        summary.runtime_seconds
    );
    Ok(RunOutcome {
        summary,
        records: rec.records,
    })
}

fn run_qite(
    cfg: &RunConfig,
    h: &FdOperator<f64>,
    ground: &GroundStateInfo<f64>,
    psi0: &StateVector<f64>,
    tracker: &mut NormTracker<f64>,
    rec: &mut Recorder,
) -> Result<()> {
    let evolver = QiteEvolver::new(h, &cfg.qite)?;
    let dt = cfg.qite.dt;
    let mut prev = psi0.clone();
    evolver.run(psi0, |k, report| {
        let c_prime = linear_factor(&prev, h, dt)?;
        let state = &report.state_after;
        let upd = tracker.update(c_prime, k as f64 * dt, state, ground)?;
        rec.record(k, state, upd.c_psi, c_prime, report.residual)?;
        prev = state.clone();
        Ok(())
    })?;
    Ok(())
}

fn run_exact(cfg: &RunConfig, rec: &mut Recorder) -> Result<()> {
    let mut prev_cf = 1.0;
    for k in 1..=cfg.qite.steps {
        let (state, c_f) = rec.solution.evolve(k as f64 * cfg.qite.dt)?;
        rec.record(k, &state, c_f, c_f / prev_cf, 0.0)?;
        prev_cf = c_f;
    }
    Ok(())
}

/// Per-domain-size results of [`sweep_domains`].
pub struct SweepOutcome {
    pub runs: Vec<(usize, Result<RunOutcome>)>,
}

impl SweepOutcome {
    /// Highest exit code among failed runs, or 0.
    pub fn exit_code(&self) -> i32 {
        self.runs
            .iter()
            .filter_map(|(_, r)| r.as_ref().err().map(Error::exit_code))
            .max()
            .unwrap_or(0)
    }
}

/// Runs `cfg` once per domain size into `outputs/D{d}` and writes `outputs/sweep.csv`.
pub fn sweep_domains(cfg: &RunConfig, domains: &[usize]) -> Result<SweepOutcome> {
    cfg.validate()?;
    let n = cfg.grid.qubit_count();
    if domains.is_empty() {
        return Err(Error::Usage("no domain sizes given".into()));
    }
    if let Some(d) = domains.iter().find(|&&d| d > n || d < 2) {
        return Err(Error::Usage(format!("domain size {d} outside 2..={n}")));
    }
    std::fs::create_dir_all(&cfg.outputs)?;
    let runs: Vec<(usize, Result<RunOutcome>)> = domains
        .par_iter()
        .map(|&d| {
            let mut c = cfg.clone();
            c.qite.domain_size = d;
            c.outputs = domain_dir(&cfg.outputs, d);
            let r = run_experiment(&c);
            if let Err(e) = &r {
                log::error!("D={d}: {e}");
            }
            (d, r)
        })
        .collect();
    write_sweep(&cfg.outputs.join("sweep.csv"), &runs)?;
    Ok(SweepOutcome { runs })
}

pub fn domain_dir(base: &Path, d: usize) -> PathBuf {
    base.join(format!("D{d}"))
}

fn write_sweep(path: &Path, runs: &[(usize, Result<RunOutcome>)]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["step".to_string(), "t".to_string()];
    for (d, _) in runs {
        header.push(format!("fidelity_D{d}"));
        header.push(format!("mse_D{d}"));
    }
    w.write_record(&header)?;
    let rows = runs
        .iter()
        .filter_map(|(_, r)| r.as_ref().ok().map(|o| o.records.len()))
        .max()
        .unwrap_or(0);
    for i in 0..rows {
        let base = runs
            .iter()
            .find_map(|(_, r)| r.as_ref().ok().and_then(|o| o.records.get(i)))
            .expect("some run has this row");
        let mut row = vec![base.step.to_string(), base.t.to_string()];
        for (_, r) in runs {
            match r.as_ref().ok().and_then(|o| o.records.get(i)) {
                Some(rec) => {
                    row.push(rec.fidelity.to_string());
                    row.push(rec.mse.to_string());
                }
                None => row.extend([String::new(), String::new()]),
            }
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Clone, Debug, Serialize)]
pub struct HamiltonianReport {
    pub qubits: Vec<usize>,
    pub boundaries: Vec<BoundaryCondition>,
    pub terms: usize,
    pub max_abs_deviation: f64,
}

/// Compares the Pauli decomposition against the direct stencil matrix (unit spacing).
pub fn validate_hamiltonian(
    qubits: &[usize],
    boundaries: &[BoundaryCondition],
) -> Result<HamiltonianReport> {
    if qubits.len() != boundaries.len() || qubits.is_empty() || qubits.len() > 2 {
        return Err(Error::Usage(
            "give one or two axes with one boundary condition each".into(),
        ));
    }
    let total: usize = qubits.iter().sum();
    if total > 10 {
        return Err(Error::Usage(format!(
            "{total} qubits exceed the limit of 10"
        )));
    }
    let (pauli, direct) = match (qubits, boundaries) {
        ([n], [bc]) => (
            second_difference::<f64>(*n, *bc)?,
            stencil_matrix_1d(*n, *bc)?,
        ),
        ([n1, n2], [bx, by]) => (
            laplace_hamiltonian_2d(*n1, *n2, 1.0, 1.0, 1.0, *bx, *by)?
                .pauli()
                .clone(),
            stencil_matrix_2d(*n1, *n2, 1.0, 1.0, *bx, *by)?,
        ),
        _ => unreachable!("lengths checked above"),
    };
    let dense = pauli.dense()?;
    let dev = dense
        .iter()
        .zip(direct.iter())
        .map(|(z, d)| (z.re - d).abs().max(z.im.abs()))
        .fold(0.0, f64::max);
    Ok(HamiltonianReport {
        qubits: qubits.to_vec(),
        boundaries: boundaries.to_vec(),
        terms: pauli.len(),
        max_abs_deviation: dev,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct HeuristicReport {
    pub lambda0_estimate: f64,
    pub overlap: f64,
    pub abs_error: f64,
    pub horizon: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct GroundStateReport {
    pub lambda0: f64,
    pub gap: f64,
    pub degenerate: bool,
    pub initial_overlap: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub heuristic: Option<HeuristicReport>,
}

/// Exact ground state of the configured Hamiltonian, optionally against the long-run estimate.
pub fn ground_state_report(cfg: &RunConfig, heuristic: bool) -> Result<GroundStateReport> {
    cfg.validate()?;
    let h = build_hamiltonian(&cfg.grid, cfg.alpha)?;
    let (psi0, _) = encode_samples::<f64>(&cfg.initial_samples()?)?;
    let exact = ground_state(&h, GroundStateSource::ExactEigen, None)?;
    let heuristic = if heuristic {
        let est = ground_state(
            &h,
            GroundStateSource::LongQite,
            Some((&cfg.qite, cfg.norm.long_horizon, &psi0)),
        )?;
        Some(HeuristicReport {
            lambda0_estimate: est.eigenvalue,
            overlap: exact.state.inner(&est.state)?.re,
            abs_error: (est.eigenvalue - exact.eigenvalue).abs(),
            horizon: cfg.norm.long_horizon,
        })
    } else {
        None
    };
    Ok(GroundStateReport {
        lambda0: exact.eigenvalue,
        gap: h.eigensystem().ground_gap(),
        degenerate: exact.degenerate,
        initial_overlap: exact.state.inner(&psi0)?.re,
        heuristic,
    })
}
