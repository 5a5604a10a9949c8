//! End-to-end tests against the compiled binary: exit codes, output
//! formats, determinism, and rank invariance through the file round trip.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_polyatree"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf8 stdout")
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("utf8 stderr")
}

/// Deterministic, irregular, tie-free sample data for the file tests.
fn sample_values(count: usize, phase: f64) -> Vec<f64> {
    (0..count)
        .map(|i| {
            let t = i as f64 + phase;
            (t * 0.816).sin() * 2.0 + (t * 0.137).cos() * 0.5
        })
        .collect()
}

fn write_sample(path: &Path, values: &[f64]) {
    let mut text = String::from("# generated by the cli test\n");
    for v in values {
        text.push_str(&format!("{v:?}\n"));
    }
    fs::write(path, text).unwrap();
}

#[test]
fn test_subcommand_reports_a_posterior() {
    let dir = tempfile::tempdir().unwrap();
    let g1 = dir.path().join("g1.txt");
    let g2 = dir.path().join("g2.txt");
    write_sample(&g1, &sample_values(30, 0.1));
    write_sample(&g2, &sample_values(30, 0.55));

    let out = run(&[
        "test",
        "--group1",
        g1.to_str().unwrap(),
        "--group2",
        g2.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("log BF (H0/H1)"));
    assert!(text.contains("Pr(H0 | data)"));
    assert!(text.contains("level contributions"));
}

#[test]
fn json_report_has_the_documented_shape() {
    let dir = tempfile::tempdir().unwrap();
    let g1 = dir.path().join("g1.txt");
    let g2 = dir.path().join("g2.txt");
    write_sample(&g1, &sample_values(25, 0.0));
    write_sample(&g2, &sample_values(25, 3.3));
    let out_dir = dir.path().join("report");

    let out = run(&[
        "test",
        "--group1",
        g1.to_str().unwrap(),
        "--group2",
        g2.to_str().unwrap(),
        "--json",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));

    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).expect("valid JSON");
    assert_eq!(report["method"], "subjective");
    assert!(report["log_bf"].is_f64());
    let posterior = report["posterior_h0"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&posterior));
    assert!(report["levels"].as_array().unwrap().len() > 1);
    assert!(report["levels"][0]["level"].is_u64());
    assert!(report["levels"][0]["contribution"].is_f64());
    assert!(report["warnings"].is_array());
    let manifest = &report["manifest"];
    assert_eq!(manifest["subcommand"], "test");
    assert_eq!(manifest["inputs"].as_array().unwrap().len(), 2);
    assert_eq!(
        manifest["inputs"][0]["sha256"].as_str().unwrap().len(),
        64
    );

    // The same report and manifest land on disk when --out is given.
    let on_disk: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("report.json")).unwrap()).unwrap();
    assert_eq!(on_disk, report);
    let manifest_file: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest_file["config"]["method"], "subjective");
}

#[test]
fn combined_csv_input_matches_two_file_input() {
    let dir = tempfile::tempdir().unwrap();
    let y1 = sample_values(20, 0.2);
    let y2 = sample_values(20, 1.7);
    let g1 = dir.path().join("g1.txt");
    let g2 = dir.path().join("g2.txt");
    write_sample(&g1, &y1);
    write_sample(&g2, &y2);
    let combined = dir.path().join("both.csv");
    let mut text = String::from("value,group\n");
    for v in &y1 {
        text.push_str(&format!("{v:?},1\n"));
    }
    for v in &y2 {
        text.push_str(&format!("{v:?},2\n"));
    }
    fs::write(&combined, text).unwrap();

    let from_files = run(&[
        "test",
        "--group1",
        g1.to_str().unwrap(),
        "--group2",
        g2.to_str().unwrap(),
        "--json",
    ]);
    let from_csv = run(&["test", "--csv", combined.to_str().unwrap(), "--json"]);
    assert!(from_files.status.success());
    assert!(from_csv.status.success());
    let a: serde_json::Value = serde_json::from_str(&stdout(&from_files)).unwrap();
    let b: serde_json::Value = serde_json::from_str(&stdout(&from_csv)).unwrap();
    assert_eq!(a["log_bf"], b["log_bf"]);
    assert_eq!(a["posterior_h0"], b["posterior_h0"]);
}

#[test]
fn rank_preserving_transform_leaves_the_empirical_report_unchanged() {
    let dir = tempfile::tempdir().unwrap();
    let y1 = sample_values(18, 0.4);
    let y2 = sample_values(18, 2.9);
    let g1 = dir.path().join("g1.txt");
    let g2 = dir.path().join("g2.txt");
    let e1 = dir.path().join("e1.txt");
    let e2 = dir.path().join("e2.txt");
    write_sample(&g1, &y1);
    write_sample(&g2, &y2);
    write_sample(&e1, &y1.iter().map(|v| v.exp()).collect::<Vec<_>>());
    write_sample(&e2, &y2.iter().map(|v| v.exp()).collect::<Vec<_>>());

    let report = |a: &Path, b: &Path| -> serde_json::Value {
        let out = run(&[
            "test",
            "--method",
            "empirical",
            "--group1",
            a.to_str().unwrap(),
            "--group2",
            b.to_str().unwrap(),
            "--json",
        ]);
        assert!(out.status.success(), "stderr: {}", stderr(&out));
        serde_json::from_str(&stdout(&out)).unwrap()
    };
    let raw = report(&g1, &g2);
    let transformed = report(&e1, &e2);
    assert_eq!(raw["log_bf"], transformed["log_bf"]);
    assert_eq!(raw["levels"], transformed["levels"]);
}

#[test]
fn usage_problems_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let g1 = dir.path().join("g1.txt");
    let g2 = dir.path().join("g2.txt");
    write_sample(&g1, &sample_values(10, 0.0));
    write_sample(&g2, &sample_values(10, 1.0));
    let g = |p: &Path| p.to_str().unwrap().to_string();

    // No input at all.
    assert_eq!(run(&["test"]).status.code(), Some(2));
    // Missing file.
    let out = run(&["test", "--group1", "/nonexistent/x", "--group2", &g(&g2)]);
    assert_eq!(out.status.code(), Some(2));
    // Prior outside (0, 1).
    let out = run(&[
        "test",
        "--group1",
        &g(&g1),
        "--group2",
        &g(&g2),
        "--prior-h0",
        "1.5",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("prior_h0"));
    // Unparseable sample line.
    let bad = dir.path().join("bad.txt");
    fs::write(&bad, "1.0\nnot-a-number\n").unwrap();
    let out = run(&["test", "--group1", &g(&bad), "--group2", &g(&g2)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("not-a-number"));
    // Unknown scenario name (clap rejects it).
    let out = run(&["simulate", "--scenario", "upside-down"]);
    assert_eq!(out.status.code(), Some(2));
    // Theta outside the scenario's range.
    let out = run(&["simulate", "--scenario", "variance", "--theta-grid", "0:3:1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn degenerate_data_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let constant = dir.path().join("c.txt");
    fs::write(&constant, "2.5\n2.5\n2.5\n2.5\n").unwrap();
    let out = run(&[
        "test",
        "--group1",
        constant.to_str().unwrap(),
        "--group2",
        constant.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3), "stderr: {}", stderr(&out));
}

#[test]
fn simulate_is_deterministic_across_runs_and_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for (sub, threads) in [("a", None), ("b", None), ("c", Some("2"))] {
        let out_dir = dir.path().join(sub);
        let mut args = vec![
            "simulate",
            "--scenario",
            "mean",
            "--theta-grid",
            "0:3:3",
            "--n",
            "12",
            "--reps",
            "6",
            "--calib-reps",
            "8",
            "--seed",
            "42",
            "--out",
        ];
        let out_str = out_dir.to_str().unwrap().to_string();
        args.push(&out_str);
        if let Some(t) = threads {
            args.extend_from_slice(&["--threads", t]);
        }
        let out = run(&args.iter().map(|s| &**s).collect::<Vec<_>>());
        assert!(out.status.success(), "stderr: {}", stderr(&out));
        outputs.push((
            fs::read(out_dir.join("power.csv")).unwrap(),
            fs::read(out_dir.join("levels.csv")).unwrap(),
        ));
    }
    assert_eq!(outputs[0], outputs[1], "same seed, same bytes");
    assert_eq!(outputs[0], outputs[2], "thread count must not leak in");

    let power = String::from_utf8(outputs[0].0.clone()).unwrap();
    assert!(
        power.starts_with("theta,power_pt,power_ks,power_wilcoxon,mean_ph1,ph1_lo,ph1_hi\n"),
        "header must be stable: {power}"
    );
    assert_eq!(power.lines().count(), 3, "header plus one row per theta");
    let levels = String::from_utf8(outputs[0].1.clone()).unwrap();
    assert!(levels.starts_with("level,min,q1,median,q3,max\n"));
}

#[test]
fn different_seeds_give_different_curves() {
    let dir = tempfile::tempdir().unwrap();
    let mut csvs = Vec::new();
    for seed in ["1", "2"] {
        let out_dir = dir.path().join(seed);
        let out = run(&[
            "simulate",
            "--scenario",
            "mean",
            "--theta-grid",
            "1.5",
            "--n",
            "10",
            "--reps",
            "6",
            "--calib-reps",
            "6",
            "--seed",
            seed,
            "--out",
            out_dir.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "stderr: {}", stderr(&out));
        csvs.push(fs::read(out_dir.join("power.csv")).unwrap());
    }
    assert_ne!(csvs[0], csvs[1]);
}

#[test]
fn null_study_writes_the_consistency_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "simulate",
        "--scenario",
        "mean",
        "--study",
        "null",
        "--n-grid",
        "8,16",
        "--reps",
        "6",
        "--seed",
        "9",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let csv = fs::read_to_string(dir.path().join("null.csv")).unwrap();
    assert!(csv.starts_with("n,mean_ph1,ph1_lo,ph1_hi\n"));
    assert_eq!(csv.lines().count(), 3);
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["config"]["study"], "null");
    assert_eq!(manifest["config"]["n_grid"][1], 16);
}

#[test]
fn plot_renders_power_curves_as_three_series() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("power.csv");
    fs::write(
        &csv,
        "theta,power_pt,power_ks,power_wilcoxon,mean_ph1,ph1_lo,ph1_hi\n\
         0,0.05,0.04,0.06,0.5,0.1,0.9\n\
         1,0.5,0.4,0.45,0.8,0.5,0.99\n\
         2,0.95,0.9,0.92,0.99,0.9,1\n",
    )
    .unwrap();
    let out = run(&["plot", "--input", csv.to_str().unwrap()]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let svg = fs::read_to_string(dir.path().join("power.svg")).unwrap();
    assert_eq!(svg.matches("<svg").count(), 1);
    assert_eq!(svg.matches("</svg>").count(), 1);
    assert_eq!(svg.matches("<polyline").count(), 3);
    assert!(svg.contains("theta"));
    assert!(svg.contains("power"));
}

#[test]
fn plot_renders_level_boxes_and_respects_out_path() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("levels.csv");
    fs::write(
        &csv,
        "level,min,q1,median,q3,max\n1,-3,-2,-1.5,-1,0\n2,-1,-0.5,0,0.5,1\n",
    )
    .unwrap();
    let target = dir.path().join("nested/boxes.svg");
    let out = run(&[
        "plot",
        "--input",
        csv.to_str().unwrap(),
        "--out",
        target.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let svg = fs::read_to_string(&target).unwrap();
    // One background rect plus one box per level.
    assert_eq!(svg.matches("<rect").count(), 3);
}

#[test]
fn plot_rejects_empty_and_malformed_csv() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.csv");
    fs::write(&empty, "theta,power_pt,power_ks,power_wilcoxon,mean_ph1,ph1_lo,ph1_hi\n").unwrap();
    assert_eq!(
        run(&["plot", "--input", empty.to_str().unwrap()]).status.code(),
        Some(2)
    );

    let malformed = dir.path().join("m.csv");
    fs::write(&malformed, "theta,power_pt\n0,oops\n").unwrap();
    assert_eq!(
        run(&["plot", "--input", malformed.to_str().unwrap()]).status.code(),
        Some(2)
    );

    let unknown = dir.path().join("u.csv");
    fs::write(&unknown, "a,b\n1,2\n").unwrap();
    assert_eq!(
        run(&["plot", "--input", unknown.to_str().unwrap()]).status.code(),
        Some(2)
    );
}

#[test]
fn monte_carlo_alternative_depends_on_seed_only() {
    let dir = tempfile::tempdir().unwrap();
    let g1 = dir.path().join("g1.txt");
    let g2 = dir.path().join("g2.txt");
    write_sample(&g1, &sample_values(14, 0.3));
    write_sample(&g2, &sample_values(14, 2.1));
    let report = |seed: &str| -> serde_json::Value {
        let out = run(&[
            "test",
            "--method",
            "empirical",
            "--h1-mc-samples",
            "400",
            "--seed",
            seed,
            "--group1",
            g1.to_str().unwrap(),
            "--group2",
            g2.to_str().unwrap(),
            "--json",
        ]);
        assert!(out.status.success(), "stderr: {}", stderr(&out));
        serde_json::from_str(&stdout(&out)).unwrap()
    };
    let a = report("7");
    let b = report("7");
    let c = report("8");
    assert_eq!(a["log_bf"], b["log_bf"]);
    assert_ne!(a["log_bf"], c["log_bf"]);
}
