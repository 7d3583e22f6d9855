use std::process::Command as Process;

use m1chain::formats::{read_quench_csv, read_triplets, write_quench_csv, BetheJson, Column, StateJson};
use m1chain::m1chain_core::{build_m1, build_pxp, build_supercharge, ConstrainedBasis, ModelParams, C64};
use m1chain::{run, RunConfig};
use proptest::prelude::*;
use serde_json::Value;

fn report(args: &[&str]) -> m1chain::Report {
    let mut full = vec!["m1chain"];
    full.extend_from_slice(args);
    run(&RunConfig::from_args(full).unwrap()).unwrap()
}

fn json(args: &[&str]) -> Value {
    serde_json::from_str(&report(args).body).unwrap()
}

fn binary(args: &[&str]) -> std::process::Output {
    Process::new(env!("CARGO_BIN_EXE_m1chain")).args(args).output().unwrap()
}

#[test]
fn m1_spectrum_reports_two_zero_modes_at_half_filling_minus_two() {
    let v = json(&["spectrum", "--n", "12", "--model", "m1"]);
    assert_eq!(v["dim"], 322);
    assert_eq!(v["passed"], true);
    let singlets = v["susy"]["singlets_by_sector"].as_object().unwrap();
    assert_eq!(singlets.len(), 1);
    assert_eq!(singlets["4"], 2);
    let total: usize = v["sectors"]
        .as_array()
        .unwrap()
        .iter()
        .map(|s| s["eigenvalues"].as_array().unwrap().len())
        .sum();
    assert_eq!(total, 322);
    assert_eq!(v["config"]["N"], 12);
    assert_eq!(v["version"], env!("CARGO_PKG_VERSION"));
}

#[test]
fn pxp_spectrum_is_symmetric_at_zero_mu() {
    let v = json(&["spectrum", "--n", "10", "--model", "pxp", "--mu", "0"]);
    let check = v["checks"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["name"] == "spectrum symmetry about 0")
        .unwrap();
    assert_eq!(check["passed"], true);
    let mut e: Vec<f64> = v["sectors"][0]["eigenvalues"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_f64().unwrap())
        .collect();
    e.sort_by(f64::total_cmp);
    for k in 0..e.len() {
        assert!((e[k] + e[e.len() - 1 - k]).abs() < 1e-10);
    }
}

#[test]
fn invalid_ring_exits_with_error() {
    let out = binary(&["spectrum", "--n", "2"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("ring size 2"));
}

#[test]
fn integer_table_small_ring_is_well_formed() {
    let v = json(&["table-integers", "--n", "6", "--format", "json"]);
    let rows = v["rows"].as_array().unwrap();
    let fs: Vec<u64> = rows.iter().map(|r| r["f"].as_u64().unwrap()).collect();
    assert!(fs.windows(2).all(|w| w[0] < w[1]));
    for r in rows {
        let levels = r["levels"].as_array().unwrap();
        assert!(!levels.is_empty());
        for l in levels {
            assert!(l["multiplicity"].as_u64().unwrap() >= 1);
            assert!(l["max_distance"].as_f64().unwrap() <= 1e-8);
        }
    }
    // vacuum of the six-site ring has energy 6
    assert_eq!(rows[0]["f"], 0);
    assert_eq!(rows[0]["levels"][0]["energy"], 6);
    let text = report(&["table-integers", "--n", "6"]).body;
    assert_eq!(text.lines().count(), rows.len() + 1);
}

fn csv_columns(body: &str) -> (Vec<String>, Vec<Vec<f64>>) {
    read_quench_csv(body.as_bytes()).unwrap()
}

#[test]
fn z2_quench_matches_cos_squared() {
    let r = report(&[
        "quench",
        "--n",
        "12",
        "--init",
        "z2",
        "--mu",
        "0",
        "--analytic",
        "--tmax",
        "10",
    ]);
    assert!(r.passed);
    let (header, rows) = csv_columns(&r.body);
    assert_eq!(header, ["t", "fidelity", "F", "z2_analytic"]);
    assert_eq!(rows.len(), 2000);
    for row in rows {
        let c = (6f64.sqrt() * row[0]).cos();
        assert!((row[1] - c * c).abs() < 1e-8);
    }
}

#[test]
fn two_sample_grid_gives_two_rows() {
    let (_, rows) = csv_columns(&report(&["quench", "--n", "8", "--samples", "2"]).body);
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0][0], 0.0);
    assert_eq!(rows[1][0], 10.0);
}

#[test]
fn z2_on_odd_ring_is_rejected() {
    let out = binary(&["quench", "--n", "9", "--init", "z2"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn single_fermion_quench_with_overlays() {
    let r = report(&[
        "quench",
        "--n",
        "12",
        "--init",
        "single",
        "--analytic",
        "--tmax",
        "15",
        "--samples",
        "300",
    ]);
    assert!(r.passed);
    let (header, rows) = csv_columns(&r.body);
    assert_eq!(header, ["t", "fidelity", "F", "exact_sum", "bessel"]);
    for row in rows {
        assert!((row[1] - row[3]).abs() < 1e-8);
    }
}

#[test]
fn analytic_only_curve_at_thirty_sites() {
    let r = report(&[
        "quench",
        "--n",
        "30",
        "--init",
        "single",
        "--analytic-only",
        "--tmax",
        "20",
    ]);
    let (header, rows) = csv_columns(&r.body);
    assert_eq!(header, ["t", "exact_sum", "bessel"]);
    assert_eq!(rows.len(), 2000);
    assert!(rows.iter().all(|r| (r[1] - r[2]).abs() < 0.02));
    let v = json(&[
        "quench",
        "--n",
        "30",
        "--init",
        "single",
        "--analytic-only",
        "--format",
        "json",
        "--samples",
        "5",
    ]);
    assert_eq!(v["quench"]["method"], "analytic");
    assert!(v["quench"]["fidelity"].is_null());
}

#[test]
fn quench_json_carries_metadata() {
    let v = json(&[
        "quench",
        "--n",
        "8",
        "--mu",
        "0.4",
        "--format",
        "json",
        "--samples",
        "11",
        "--method",
        "krylov",
    ]);
    let q = &v["quench"];
    assert_eq!(q["N"], 8);
    assert_eq!(q["mu"], 0.4);
    assert_eq!(q["method"], "krylov");
    assert_eq!(q["tolerances"]["krylov"], 1e-10);
    assert_eq!(q["times"].as_array().unwrap().len(), 11);
    assert_eq!(q["columns"][0]["name"], "F");
}

#[test]
fn state_file_init_matches_builtin() {
    let dir = tempfile::tempdir().unwrap();
    let basis = ConstrainedBasis::new(8).unwrap();
    let k = basis.index_of(&"01010101".parse().unwrap()).unwrap();
    let mut v = vec![C64::new(0.0, 0.0); basis.dim()];
    v[k] = C64::new(0.0, 2.0);
    let path = dir.path().join("z2.json");
    std::fs::write(&path, serde_json::to_string(&StateJson::from_vector(8, &v)).unwrap()).unwrap();
    let init = format!("file:{}", path.display());
    let a = csv_columns(&report(&["quench", "--n", "8", "--init", &init, "--samples", "50"]).body).1;
    let b = csv_columns(&report(&["quench", "--n", "8", "--init", "z2", "--samples", "50"]).body).1;
    for (x, y) in a.iter().zip(&b) {
        assert!((x[1] - y[1]).abs() < 1e-12);
    }
    let idx = format!("index:{k}");
    let c = csv_columns(&report(&["quench", "--n", "8", "--init", &idx, "--samples", "50"]).body).1;
    assert_eq!(c, b);
}

#[test]
fn single_fermion_family_has_twelve_solutions() {
    let v = json(&["bethe-verify", "--n", "12", "--family", "single"]);
    let sols = v["solutions"].as_array().unwrap();
    assert_eq!(sols.len(), 12);
    assert_eq!(sols.iter().filter(|s| s["integer_energy"] == true).count(), 8);
    assert!(sols.iter().all(|s| s["eigen_residual"].as_f64().unwrap() < 1e-10));
    assert_eq!(v["passed"], true);
}

#[test]
fn special_and_dressed_families() {
    let v = json(&["bethe-verify", "--n", "12", "--family", "special", "--f", "3"]);
    let s = &v["solutions"][0];
    assert_eq!(s["solution"]["energy"], 9.0);
    assert!(s["eigen_residual"].as_f64().unwrap() <= 1e-8);
    let v = json(&["bethe-verify", "--n", "12", "--family", "special", "--f", "2"]);
    assert_eq!(v["solutions"][0]["admissible"], false);
    assert_eq!(v["passed"], true);
    let v = json(&[
        "bethe-verify",
        "--n",
        "6",
        "--family",
        "dressed",
        "--n-plus",
        "1",
        "--n-minus",
        "1",
    ]);
    assert_eq!(v["solutions"].as_array().unwrap().len(), 6);
    assert_eq!(v["passed"], true);
}

#[test]
fn perturbed_solution_fails_without_eigenvector_claim() {
    let dir = tempfile::tempdir().unwrap();
    let sol = m1chain::m1chain_core::special_solution(12, 3, m1chain::m1chain_core::Branch::Plus)
        .unwrap()
        .solution()
        .unwrap();
    let mut file = BetheJson::from(&sol);
    file.mus[1][0] += 1e-3;
    let path = dir.path().join("sol.json");
    std::fs::write(&path, serde_json::to_string(&file).unwrap()).unwrap();
    let p = path.to_str().unwrap();
    let r = report(&["bethe-verify", "--solution", p]);
    assert!(!r.passed);
    let v: Value = serde_json::from_str(&r.body).unwrap();
    assert!(v["solutions"][0]["solution"]["residual"].as_f64().unwrap() > 1e-6);
    assert!(v["solutions"][0]["eigen_residual"].is_null());
    assert_eq!(binary(&["bethe-verify", "--solution", p]).status.code(), Some(1));

    std::fs::write(&path, "{\"N\": 12,\n\"f\": 3, \"mus\": [[0.5, oops]]}").unwrap();
    let out = binary(&["bethe-verify", "--solution", p]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
}

#[test]
fn mps_check_reports() {
    let v = json(&["mps-check", "--n", "12", "--f", "3", "--branch", "plus"]);
    assert!((v["overlap_modulus"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    assert_eq!(v["bond_dim"], 8);
    for c in v["cuts"].as_array().unwrap() {
        assert!(c["entropy"].as_f64().unwrap() <= 8f64.ln());
        assert!(c["schmidt_rank"].as_u64().unwrap() <= 8);
    }
    let r = report(&["mps-check", "--n", "12", "--f", "2", "--format", "text"]);
    assert!(r.passed);
    assert!(r.body.contains("inadmissible: parity condition"));
    assert_eq!(binary(&["mps-check", "--n", "12", "--f", "2"]).status.code(), Some(0));
    let v = json(&["mps-check", "--n", "9", "--f", "2", "--branch", "plus"]);
    assert_eq!(v["admissible"], true);
    assert_eq!(v["passed"], true);
}

#[test]
fn identical_configs_give_identical_json() {
    for args in [
        &["spectrum", "--n", "9"][..],
        &[
            "quench",
            "--n",
            "10",
            "--format",
            "json",
            "--samples",
            "40",
            "--mu",
            "0.3",
        ],
        &["bethe-verify", "--n", "9", "--family", "single"],
        &["mps-check", "--n", "9", "--f", "4", "--branch", "minus"],
    ] {
        assert_eq!(report(args).body, report(args).body);
    }
}

#[test]
fn thread_count_does_not_change_output() {
    let one = Process::new(env!("CARGO_BIN_EXE_m1chain"))
        .args(["spectrum", "--n", "11"])
        .env("M1CHAIN_THREADS", "1")
        .output()
        .unwrap();
    let four = Process::new(env!("CARGO_BIN_EXE_m1chain"))
        .args(["spectrum", "--n", "11"])
        .env("M1CHAIN_THREADS", "4")
        .output()
        .unwrap();
    assert!(one.status.success());
    assert_eq!(one.stdout, four.stdout);
}

#[test]
fn output_file_and_operator_export() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("h.txt");
    let out = binary(&[
        "operator",
        "--n",
        "7",
        "--model",
        "pxp",
        "--mu",
        "0.25",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let op = read_triplets(std::io::BufReader::new(std::fs::File::open(&path).unwrap())).unwrap();
    let basis = ConstrainedBasis::new(7).unwrap();
    assert_eq!(op, build_pxp(&basis, &ModelParams::new(7, 0.25).unwrap()).unwrap());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn triplet_export_round_trips(n in 3usize..10, which in 0usize..3, mu in -2.0f64..2.0) {
        let basis = ConstrainedBasis::new(n).unwrap();
        let op = match which {
            0 => build_m1(&basis).unwrap(),
            1 => build_supercharge(&basis).unwrap(),
            _ => build_pxp(&basis, &ModelParams::new(n, mu).unwrap()).unwrap(),
        };
        let mut buf = Vec::new();
        m1chain::formats::write_triplets(&op, &mut buf).unwrap();
        prop_assert_eq!(read_triplets(buf.as_slice()).unwrap(), op);
    }

    #[test]
    fn quench_csv_round_trips(values in prop::collection::vec(-1e6f64..1e6, 2..40)) {
        let times: Vec<f64> = (0..values.len()).map(|k| k as f64 * 0.1).collect();
        let cols = [Column { name: "F".into(), values: values.iter().map(|v| v * 3.0).collect() }];
        let mut buf = Vec::new();
        write_quench_csv(&times, Some(&values), &cols, &mut buf).unwrap();
        let (_, rows) = read_quench_csv(buf.as_slice()).unwrap();
        for (k, row) in rows.iter().enumerate() {
            prop_assert_eq!(row[1], values[k]);
            prop_assert_eq!(row[2], values[k] * 3.0);
        }
    }

    #[test]
    fn sample_count_sets_row_count(samples in 2usize..60) {
        let s = samples.to_string();
        let (_, rows) = csv_columns(&report(&["quench", "--n", "6", "--samples", &s, "--tmax", "3"]).body);
        prop_assert_eq!(rows.len(), samples);
    }
}
