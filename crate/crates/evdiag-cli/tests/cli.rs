//! End-to-end checks of the command-line surface and its exit-code contract.

use std::path::Path;
use std::process::{Command, Output};

use evdiag::closures::ClosureSpec;
use evdiag::field::{Field, Snapshot, SnapshotSeries};
use evdiag::grid::Grid;
use evdiag::io;

fn evdiag(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_evdiag"))
        .args(args)
        .output()
        .expect("failed to launch binary")
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("process terminated by signal")
}

#[test]
fn taylor_green_analyze_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("tg");
    let report = dir.path().join("report.json");

    let run = evdiag(&[
        "taylor-green",
        "--n",
        "32",
        "--nu",
        "0.01",
        "--t-end",
        "2",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&run), 0, "{}", String::from_utf8_lossy(&run.stderr));

    let analyze = evdiag(&[
        "analyze",
        "--manifest",
        out.join("manifest").to_str().unwrap(),
        "--report",
        report.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&analyze), 0, "{}", String::from_utf8_lossy(&analyze.stderr));

    let parsed: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    let lambda = parsed["lambda_T"].as_f64().unwrap();
    let expect = (15.0f64 / 2.0).sqrt();
    assert!((lambda - expect).abs() <= 0.01 * expect, "lambda_T = {lambda}");
    assert!(parsed["energy_residual"].as_f64().unwrap() <= 1e-4);
    // schema guarantees the monitoring triple even when unavailable
    assert!(parsed["monitoring"]["ratio_nu"].is_null());
    assert!(parsed["monitoring"]["avg_l_over_L"].is_null());
    assert!(parsed["monitoring"]["I_model"].is_null());
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("tg");
    evdiag(&[
        "taylor-green",
        "--n",
        "16",
        "--nu",
        "0.02",
        "--t-end",
        "1",
        "--out",
        out.to_str().unwrap(),
    ]);
    let (r1, r2) = (dir.path().join("a.json"), dir.path().join("b.json"));
    for r in [&r1, &r2] {
        let a = evdiag(&[
            "analyze",
            "--manifest",
            out.join("manifest").to_str().unwrap(),
            "--report",
            r.to_str().unwrap(),
        ]);
        assert_eq!(exit_code(&a), 0);
    }
    assert_eq!(std::fs::read(&r1).unwrap(), std::fs::read(&r2).unwrap());
}

#[test]
fn simulate_verify_and_dissipation_dump() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("run.conf");
    std::fs::write(
        &conf,
        "solver.n = 32\nsolver.nu = 0.01\nsolver.t_end = 3\nsolver.snapshot_every = 4\n\
         solver.seed = 5\nforcing.kind = kolmogorov\nforcing.chi = 1\nforcing.k_f = 2\n\
         closure.kind = smagorinsky\nclosure.cs = 0.17\n",
    )
    .unwrap();
    let out = dir.path().join("run");
    let sim = evdiag(&["simulate", "--config", conf.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(exit_code(&sim), 0, "{}", String::from_utf8_lossy(&sim.stderr));

    let verify = evdiag(&["verify", "--manifest", out.join("manifest").to_str().unwrap()]);
    assert_eq!(exit_code(&verify), 0, "{}", String::from_utf8_lossy(&verify.stdout));
    let text = String::from_utf8_lossy(&verify.stdout).to_string();
    assert!(text.contains("cauchy_schwarz_time: pass"), "{text}");
    assert!(text.contains("closure_inequality: pass"), "{text}");
    assert!(text.contains("energy_residual: pass"), "{text}");

    let dump = dir.path().join("diss");
    let report = dir.path().join("report.json");
    let analyze = evdiag(&[
        "analyze",
        "--manifest",
        out.join("manifest").to_str().unwrap(),
        "--report",
        report.to_str().unwrap(),
        "--dump-dissipation-field",
        dump.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&analyze), 0);
    let first = io::read_snapshot(&dump.join("diss_000000.evdg")).unwrap();
    let density = first.dissipation.expect("dissipation field present");
    assert!(density.component(0).iter().all(|v| *v >= 0.0));
    // density integrates to eps0 + eps_turb of the first snapshot
    let parsed: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert!(parsed["bounds"].as_array().unwrap().len() == 3);
}

fn write_flagged_manifest(dir: &Path) -> std::path::PathBuf {
    // a tiny hand-built record whose eddy viscosity dwarfs L·U
    let g = Grid::periodic_square(16, 2.0 * std::f64::consts::PI).unwrap();
    let snaps: Vec<Snapshot> = (0..12)
        .map(|i| {
            let t = i as f64 * 0.1;
            let mut v = Field::from_fn_2d(g, 1, t, |c, x, y| {
                if c == 0 {
                    (y + 0.1 * t.sin()).sin()
                } else {
                    0.05 * x.sin()
                }
            })
            .unwrap();
            v.set_time(t);
            let l = Field::scalar(g, vec![50.0; g.ncells()], t).unwrap();
            let kprime = Field::scalar(g, vec![50.0; g.ncells()], t).unwrap();
            Snapshot { velocity: v, nu_turb: None, l: Some(l), kprime: Some(kprime) }
        })
        .collect();
    let series = SnapshotSeries::new(snaps).unwrap();
    let forcing =
        Field::from_fn_2d(g, 1, 0.0, |c, _, y| if c == 0 { (2.0 * y).sin() } else { 0.0 })
            .unwrap();
    let closure = ClosureSpec::prescribed(1.0).unwrap();
    io::write_run(dir, &series, Some(&forcing), 0.01, &closure).unwrap()
}

#[test]
fn exit_codes_partition_outcomes() {
    // input error -> 2
    let missing = evdiag(&["analyze", "--manifest", "/nonexistent/manifest", "--report", "/tmp/x"]);
    assert_eq!(exit_code(&missing), 2);

    // unknown flag -> usage error 2
    let unknown = evdiag(&["analyze", "--bogus-flag"]);
    assert_eq!(exit_code(&unknown), 2);

    // flagged diagnostics -> 1
    let dir = tempfile::tempdir().unwrap();
    let manifest = write_flagged_manifest(dir.path());
    let report = dir.path().join("report.json");
    let flagged = evdiag(&[
        "analyze",
        "--manifest",
        manifest.to_str().unwrap(),
        "--report",
        report.to_str().unwrap(),
    ]);
    assert_eq!(
        exit_code(&flagged),
        1,
        "stdout: {} stderr: {}",
        String::from_utf8_lossy(&flagged.stdout),
        String::from_utf8_lossy(&flagged.stderr)
    );
    let parsed: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert!(parsed["monitoring"]["flags"]["ratio_nu"].as_bool().unwrap());

    // same record, sky-high threshold -> 0
    let relaxed = evdiag(&[
        "analyze",
        "--manifest",
        manifest.to_str().unwrap(),
        "--flag-threshold",
        "1e9",
        "--report",
        report.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&relaxed), 0);
}
