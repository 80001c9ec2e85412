//! The pinned dfs2 leakage benchmark checked against the reference oracle and
//! the committed golden numbers.

#[path = "common/oracle.rs"]
mod oracle;

use std::path::PathBuf;

use serde_json::{json, Value};

use leolab::codes::qubit_state;
use leolab::dynamics::{
    decoupled_limit_unitary, loglog_slope, parity_kick_unitary, simulate, single_cycle_defect,
    sweep_cycles, ParityKickSchedule,
};
use leolab::leo::exchange_2dfs_leo;
use leolab::models::{dfs2_leakage_model, BathSpec, Dfs2Term, SystemBathModel};
use leolab::opalg::{hermitian_exponential, random_hermitian};

use oracle::*;

fn golden_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../bench/golden/dfs2_leakage.json")
}

fn library_model() -> SystemBathModel {
    dfs2_leakage_model(
        &[Dfs2Term::X(0)],
        BENCH_G,
        &BathSpec::new(BENCH_BATH_DIM, BENCH_BATH_SEED),
    )
    .unwrap()
}

fn golden_json(g: &Golden) -> Value {
    json!({
        "model": "dfs2_leakage",
        "leak_set": ["X1"],
        "g": BENCH_G,
        "bath_seed": BENCH_BATH_SEED,
        "bath_dim": BENCH_BATH_DIM,
        "total_time": BENCH_TOTAL_TIME,
        "n_cycles": BENCH_N,
        "initial_state": "01",
        "free_leakage": g.free_leakage,
        "pulsed_leakage": g.pulsed_leakage,
        "suppression_factor": g.suppression_factor,
        "distances": g.distances.iter().map(|(n, d)| json!({"n": n, "distance_to_limit": d})).collect::<Vec<_>>(),
        "distance_non_increasing": g.distances.windows(2).all(|w| w[1].1 <= w[0].1),
        "single_cycle_defects": g.defects.iter().map(|(t, d)| json!({"tau": t, "defect": d})).collect::<Vec<_>>(),
        "defect_slope": g.defect_slope,
        "short_segment_leakage": {"tau": 0.01, "n_cycles": 64, "leakage": g.unit_example_leakage},
    })
}

fn load_golden() -> Value {
    let text = std::fs::read_to_string(golden_path()).expect("golden file is committed");
    serde_json::from_str(&text).unwrap()
}

fn rel_close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * b.abs().max(a.abs())
}

/// Rewrites the golden file from the oracle: `cargo test -- --ignored regenerate`.
#[test]
#[ignore]
fn regenerate_golden() {
    let text = serde_json::to_string_pretty(&golden_json(&golden())).unwrap();
    let path = golden_path();
    std::fs::create_dir_all(path.parent().unwrap()).unwrap();
    std::fs::write(path, text + "\n").unwrap();
}

#[test]
fn oracle_exponential_agrees_with_eigen_route() {
    for seed in 0..5 {
        let h = random_hermitian(8, seed);
        let t = 0.37 * (seed as f64 + 1.0);
        let via_eigen = hermitian_exponential(&h, -t).unwrap();
        let via_taylor = propagator(h.matrix(), t);
        assert!((via_eigen.matrix() - via_taylor).norm() < 1e-12);
    }
}

#[test]
fn oracle_reproduces_committed_golden() {
    let g = golden();
    let file = load_golden();
    let close = |key: &str, x: f64| {
        let y = file[key].as_f64().unwrap();
        assert!(rel_close(x, y, 1e-9), "{key}: oracle {x} vs golden {y}");
    };
    close("free_leakage", g.free_leakage);
    close("pulsed_leakage", g.pulsed_leakage);
    close("suppression_factor", g.suppression_factor);
    close("defect_slope", g.defect_slope);
    for (k, (n, d)) in g.distances.iter().enumerate() {
        let row = &file["distances"][k];
        assert_eq!(row["n"].as_u64().unwrap(), *n);
        assert!(rel_close(*d, row["distance_to_limit"].as_f64().unwrap(), 1e-9));
    }
    assert_eq!(file["distance_non_increasing"], Value::Bool(true));
}

#[test]
fn library_model_matches_oracle_hamiltonian() {
    let b = pinned_benchmark();
    let m = library_model();
    assert!((m.h_joint.matrix() - &b.h).norm() < 1e-15);
}

#[test]
fn library_propagators_match_oracle() {
    let b = pinned_benchmark();
    let m = library_model();
    let leo = exchange_2dfs_leo().unwrap();
    for n in [1u64, 8, 64] {
        let tau = BENCH_TOTAL_TIME / (2.0 * n as f64);
        let s = ParityKickSchedule::new(leo.clone(), n, tau).unwrap();
        let lib = parity_kick_unitary(&m, &s).unwrap();
        assert!((lib.matrix() - b.pulsed(n, tau)).norm() < 1e-12, "n = {n}");
    }
    let lim = decoupled_limit_unitary(&m, BENCH_TOTAL_TIME).unwrap();
    assert!((lim.matrix() - b.limit(BENCH_TOTAL_TIME)).norm() < 1e-12);
}

#[test]
fn library_sweep_matches_golden() {
    let file = load_golden();
    let m = library_model();
    let leo = exchange_2dfs_leo().unwrap();
    let psi = qubit_state("01");
    let rows = sweep_cycles(&m, Some(&leo), BENCH_TOTAL_TIME, &CONVERGENCE_NS, &psi).unwrap();
    for (k, row) in rows.iter().enumerate() {
        let d = file["distances"][k]["distance_to_limit"].as_f64().unwrap();
        assert!((row.distance_to_limit - d).abs() < 1e-10, "n = {}", row.n);
    }
    for n in [8usize, 16, 32] {
        let k = CONVERGENCE_NS.iter().position(|&x| x == n as u64).unwrap();
        let ratio = rows[k].distance_to_limit / rows[k + 1].distance_to_limit;
        assert!((1.7..=2.3).contains(&ratio), "ratio at n = {n}: {ratio}");
    }
    let pulsed = rows.last().unwrap().final_leakage;
    let golden = file["pulsed_leakage"].as_f64().unwrap();
    assert!(rel_close(pulsed, golden, 1e-6));
}

#[test]
fn library_suppression_matches_golden() {
    let file = load_golden();
    let m = library_model();
    let psi = qubit_state("01");
    let pulsed = ParityKickSchedule::from_total_time(Some(exchange_2dfs_leo().unwrap()), BENCH_N, BENCH_TOTAL_TIME).unwrap();
    let free = ParityKickSchedule::from_total_time(None, BENCH_N, BENCH_TOTAL_TIME).unwrap();
    let lp = simulate(&m, &pulsed, &psi).unwrap().final_leakage();
    let lf = simulate(&m, &free, &psi).unwrap().final_leakage();
    let factor = lf / lp;
    assert!(factor >= 50.0);
    assert!(rel_close(factor, file["suppression_factor"].as_f64().unwrap(), 1e-6));
    assert!(rel_close(lf, file["free_leakage"].as_f64().unwrap(), 1e-9));
}

#[test]
fn pulsed_beats_free_at_every_n_from_four() {
    let m = library_model();
    let leo = exchange_2dfs_leo().unwrap();
    let psi = qubit_state("01");
    let ns = [4u64, 8, 16, 32, 64];
    let pulsed = sweep_cycles(&m, Some(&leo), BENCH_TOTAL_TIME, &ns, &psi).unwrap();
    let free = sweep_cycles(&m, None, BENCH_TOTAL_TIME, &ns, &psi).unwrap();
    for (p, f) in pulsed.iter().zip(&free) {
        assert!(p.final_leakage < f.final_leakage, "n = {}", p.n);
    }
}

#[test]
fn single_cycle_defect_is_second_order() {
    let file = load_golden();
    let m = library_model();
    let leo = exchange_2dfs_leo().unwrap();
    let ds: Vec<f64> = DEFECT_TAUS.iter().map(|&t| single_cycle_defect(&m, &leo, t).unwrap()).collect();
    for (k, d) in ds.iter().enumerate() {
        let g = file["single_cycle_defects"][k]["defect"].as_f64().unwrap();
        assert!((d - g).abs() < 1e-12);
    }
    let slope = loglog_slope(&DEFECT_TAUS, &ds);
    assert!((slope - 2.0).abs() <= 0.1, "slope {slope}");
}

#[test]
fn short_segment_example_stays_below_bound() {
    let m = library_model();
    let s = ParityKickSchedule::new(exchange_2dfs_leo().unwrap(), 64, 0.01).unwrap();
    let leak = simulate(&m, &s, &qubit_state("01")).unwrap().final_leakage();
    assert!(leak <= 1e-4);
    let golden = load_golden()["short_segment_leakage"]["leakage"].as_f64().unwrap();
    assert!(rel_close(leak, golden, 1e-6));
}
