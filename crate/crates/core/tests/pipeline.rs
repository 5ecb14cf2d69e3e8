use std::fs;
use std::path::Path;

use qite_pde::experiment::{read_trajectory, run_experiment, RunConfig};
use qite_pde::fd::heat_hamiltonian_1d;
use qite_pde::grid::{encode, AxisSpec, GridSpec, InitialCondition};
use qite_pde::oracle::{fidelity, SpectralSolution};
use qite_pde::qite::{QiteConfig, QiteEvolver};
use qite_pde::BoundaryCondition;

fn config(out: &Path, extra: &str) -> RunConfig {
    let text = format!(
        r#"{{
  "grid": {{"axes": [{{"qubits": 4, "spacing": 0.1, "bc": "periodic"}}]}},
  "initial": {{"kind": "triangle_wave", "height": 1.0, "offset": 0.5}},
  "alpha": 0.8,
  "qite": {{"domain_size": 3, "dt": 0.001, "steps": 60}},
  "norm": {{"period": 7}},
  "outputs": {:?},
  "snapshot_times": [0.0, 0.03, 0.06]{extra}
}}"#,
        out.display().to_string()
    );
    RunConfig::from_json(&text, None).unwrap()
}

#[test]
fn repeated_runs_are_bit_identical() {
    let dir = tempfile::tempdir().unwrap();
    let extra = r#", "readout": {"shots": 2000, "seed": 11}"#;
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    run_experiment(&config(&a, extra)).unwrap();
    run_experiment(&config(&b, extra)).unwrap();
    for f in ["trajectory.csv", "snapshots.csv"] {
        assert_eq!(
            fs::read(a.join(f)).unwrap(),
            fs::read(b.join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn summary_agrees_with_trajectory_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let outcome = run_experiment(&config(&out, "")).unwrap();
    let rows = read_trajectory(&out.join("trajectory.csv")).unwrap();
    assert_eq!(rows.len(), 61);
    assert_eq!(rows, outcome.records);

    let s: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    let last = rows.last().unwrap();
    assert_eq!(s["final_fidelity"].as_f64().unwrap(), last.fidelity);
    assert_eq!(s["final_mse"].as_f64().unwrap(), last.mse);
    assert_eq!(
        s["final_log10_ratio"].as_f64().unwrap(),
        last.log10_norm_ratio
    );
    assert_eq!(s["steps_completed"].as_u64().unwrap(), 60);
    let max_ratio = rows
        .iter()
        .map(|r| r.log10_norm_ratio.abs())
        .fold(0.0, f64::max);
    assert_eq!(s["max_abs_log10_ratio"].as_f64().unwrap(), max_ratio);
    let product: f64 = rows.iter().map(|r| r.c_prime).product();
    let reported = s["final_c_prime_product"].as_f64().unwrap();
    assert!(
        (product - reported).abs() <= 1e-14 * reported,
        "{product} vs {reported}"
    );
    // the factored and direct MSE forms agree on the final state
    let direct = s["final_mse_direct"].as_f64().unwrap();
    assert!(
        (direct - last.mse).abs() <= 1e-10,
        "{direct} vs {}",
        last.mse
    );
}

#[test]
fn exact_only_mode_tracks_the_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("exact");
    let outcome = run_experiment(&config(&out, r#", "mode": "exact_only""#)).unwrap();
    for r in &outcome.records {
        assert!((r.fidelity - 1.0).abs() <= 1e-12, "{r:?}");
        assert!(r.mse.abs() <= 1e-12, "{r:?}");
        assert_eq!(r.c_psi, r.c_f);
    }
}

#[test]
fn single_precision_core_runs() {
    let grid = GridSpec::new_1d(AxisSpec::new(4, 0.1, BoundaryCondition::Zero));
    let (psi0, _) = encode::<f32>(&InitialCondition::SquareWave, &grid).unwrap();
    let h = heat_hamiltonian_1d::<f32>(4, 0.1, 0.8, BoundaryCondition::Zero).unwrap();
    let cfg = QiteConfig::new(4, 1e-3, 50);
    let end = QiteEvolver::new(&h, &cfg)
        .unwrap()
        .run(&psi0, |_, _| Ok(()))
        .unwrap();
    let (exact, _) = SpectralSolution::new(&h, &psi0)
        .unwrap()
        .evolve(0.05)
        .unwrap();
    let f = fidelity(&exact, &end).unwrap();
    assert!(f > 0.999, "f32 fidelity {f}");
    assert!((end.norm() - 1.0).abs() < 1e-4);
}
