mod support;

use support::{read_csv, read_json, stackq, stackq_ok};

#[test]
fn zz_scan_writes_csv_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    stackq_ok(dir.path(), &["zz-scan", "--pair", "Q3,Q7", "--flux", "0:0.45:0.01"]);
    let (header, rows) = read_csv(&dir.path().join("zz_scan.csv"));
    assert_eq!(header, ["flux", "zeta_mhz"]);
    assert_eq!(rows.len(), 46);
    let manifest = read_json(&dir.path().join("run_manifest.json"));
    assert_eq!(manifest["command"], "zz-scan");
    assert_eq!(manifest["seed"], 0);
    assert_eq!(manifest["overrides"]["flux"], "0:0.45:0.01");
    assert_eq!(manifest["outputs"], serde_json::json!(["zz_scan.csv"]));
    assert!(manifest["version"].is_string() && manifest["runtime_s"].is_number());
}

#[test]
fn spectrum_csv_header() {
    let dir = tempfile::tempdir().unwrap();
    stackq_ok(dir.path(), &["spectrum", "--coupler", "C_37", "--flux", "0,0.1,0.2"]);
    let (header, rows) = read_csv(&dir.path().join("spectrum.csv"));
    assert_eq!(header, ["flux", "freq_ghz"]);
    assert_eq!(rows.len(), 3);
    assert!(rows.windows(2).all(|w| w[1][1] < w[0][1]));
}

#[test]
fn topo_build_example() {
    let dir = tempfile::tempdir().unwrap();
    stackq_ok(dir.path(), &["topo", "build", "--chips", "1x1", "--qubits", "2x2", "--layers", "2"]);
    let g = read_json(&dir.path().join("topology.json"));
    assert_eq!(g["nodes"].as_array().unwrap().len(), 8);
    assert_eq!(g["edges"].as_array().unwrap().len(), 12);
    let manifest = read_json(&dir.path().join("run_manifest.json"));
    assert_eq!(manifest["command"], "topo build");
    assert_eq!(manifest["outputs"], serde_json::json!(["topology.json", "topology.dot"]));

    let report = tempfile::tempdir().unwrap();
    let graph = dir.path().join("topology.json");
    stackq_ok(report.path(), &["topo", "validate", "--graph", graph.to_str().unwrap()]);
    let r = read_json(&report.path().join("topology_report.json"));
    assert_eq!(r["components"], 1);
}

#[test]
fn unknown_subcommand_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = stackq(dir.path(), &["frobnicate"]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("Usage"));
    let last = err.lines().last().unwrap();
    assert_eq!(serde_json::from_str::<serde_json::Value>(last).unwrap()["error"], "usage");
}

#[test]
fn exit_status_follows_error_kind() {
    let dir = tempfile::tempdir().unwrap();
    let o = stackq(dir.path(), &["zz-zero", "--pair", "Q3,Q7", "--bracket", "0,0.05"]);
    assert_eq!(o.status.code(), Some(3));
    let diag: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(diag["kind"], "physics");
    assert_eq!(diag["error"], "NoSignChange");

    let o = stackq(dir.path(), &["zz-scan", "--pair", "Q3,Q99"]);
    assert_eq!(o.status.code(), Some(2));

    let bad = dir.path().join("device.json");
    std::fs::write(&bad, "{\"modes\": []").unwrap();
    let o = stackq(dir.path(), &["--device", bad.to_str().unwrap(), "zz-scan"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(o.stderr.iter().filter(|&&b| b == b'\n').count(), 1);
}

#[test]
fn seeded_runs_are_identical_across_worker_counts() {
    let args = ["rb", "isolated", "--qubits", "2", "--lengths", "1,4,16,64", "--sequences", "10", "--bootstrap", "20"];
    let runs: Vec<_> = ["1", "3"]
        .iter()
        .map(|jobs| {
            let dir = tempfile::tempdir().unwrap();
            let mut full = vec!["--seed", "9", "--jobs", jobs];
            full.extend(args);
            full.extend(["--depolarizing", "0.99"]);
            stackq_ok(dir.path(), &full);
            std::fs::read(dir.path().join("rb.json")).unwrap()
        })
        .collect();
    assert_eq!(runs[0], runs[1]);
}

#[test]
fn sampled_tomography_depends_only_on_the_seed() {
    let run = |seed: &str| {
        let dir = tempfile::tempdir().unwrap();
        stackq_ok(dir.path(), &["--seed", seed, "qst", "--shots", "500"]);
        std::fs::read(dir.path().join("qst.json")).unwrap()
    };
    assert_eq!(run("4"), run("4"));
    assert_ne!(run("4"), run("5"));
}

#[test]
fn calibration_feeds_later_commands() {
    let dir = tempfile::tempdir().unwrap();
    stackq_ok(dir.path(), &["cz-cal", "--pair", "Q3,Q7"]);
    let cal = dir.path().join("cz_calibration.json");
    let cal = cal.to_str().unwrap();
    let bell = tempfile::tempdir().unwrap();
    stackq_ok(bell.path(), &["bell", "--pair", "Q3,Q7", "--calibration", cal]);
    let f = read_json(&bell.path().join("bell.json"))["fidelity"].as_f64().unwrap();
    assert!(f > 0.998, "{f}");
    let qst = tempfile::tempdir().unwrap();
    stackq_ok(qst.path(), &["qst", "--calibration", cal, "--shots", "exact"]);
    let g = read_json(&qst.path().join("qst.json"))["fidelity"].as_f64().unwrap();
    assert!((f - g).abs() < 1e-9);
    let wrong = stackq(qst.path(), &["bell", "--pair", "Q2,Q3", "--calibration", cal]);
    assert_eq!(wrong.status.code(), Some(2));
}
