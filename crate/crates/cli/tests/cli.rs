use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use psi_cli::{parse_config, RunConfig};

fn psi_sim(cwd: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_psi-sim"))
        .current_dir(cwd)
        .args(args)
        .output()
        .expect("spawn psi-sim")
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

const SMALL_QUDIT: &str = "[scene]\ntype = eq6_qudit\n[sweep]\nrepetitions = 4\nilluminations = 1.7, 3.0\nsigmas = 3.0, 0.2\nn_bin = 1, 2\n";

#[test]
fn simulate_writes_manifest_and_four_frames() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("eq6.cfg"), "[scene]\ntype = eq6_qudit\n").unwrap();
    let out = psi_sim(
        tmp.path(),
        &[
            "simulate", "--config", "eq6.cfg", "--seed", "42", "--out", "run",
        ],
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(out.stdout.is_empty());
    let dir = tmp.path().join("run");
    assert!(dir.join("manifest.txt").is_file());
    assert!(dir.join("interferograms.manifest").is_file());
    let frames = (0..4)
        .filter(|n| dir.join(format!("interferograms_frame{n}.ammap")).is_file())
        .count();
    assert_eq!(frames, 4);
    assert!(fs::read_to_string(dir.join("manifest.txt"))
        .unwrap()
        .contains("seed = 42"));
}

#[test]
fn reconstruct_reads_simulated_frames() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(
        tmp.path().join("lens.cfg"),
        "[scene]\ntype = lens\n[noise]\nenabled = false\n",
    )
    .unwrap();
    assert!(psi_sim(
        tmp.path(),
        &["simulate", "--config", "lens.cfg", "--out", "sim"]
    )
    .status
    .success());
    let out = psi_sim(
        tmp.path(),
        &[
            "reconstruct",
            "--manifest",
            "sim/interferograms.manifest",
            "--out",
            "rec",
        ],
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let truth = psi_core::mapio::load_map(&tmp.path().join("sim/true_phase.phmap"))
        .unwrap()
        .1;
    let got = psi_core::mapio::load_map(&tmp.path().join("rec/phase.phmap"))
        .unwrap()
        .1;
    let offset = got[[0, 0]] - truth[[0, 0]];
    let worst = truth
        .iter()
        .zip(got.iter())
        .map(|(t, g)| psi_core::circular::circular_distance(g - t, offset))
        .fold(0.0, f64::max);
    // frames are stored as f32
    assert!(worst < 1e-4, "worst {worst}");
}

#[test]
fn sweep_map_has_one_row_per_cell() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = "[scene]\ntype = eq6_qudit\n[sweep]\nrepetitions = 2\nilluminations = 1.0, 3.0, 8.0\nsigmas = 3.0, 1.0, 0.2\n";
    fs::write(tmp.path().join("map.cfg"), cfg).unwrap();
    let out = psi_sim(
        tmp.path(),
        &["sweep-map", "--config", "map.cfg", "--out", "m", "--quiet"],
    );
    assert!(out.status.success());
    let rows = csv_rows(&tmp.path().join("m/fidelity_map.csv"));
    assert_eq!(
        rows[0],
        [
            "illumination",
            "readout_sigma_or_nsamp",
            "n_bin",
            "mean_fidelity",
            "std",
            "stderr"
        ]
    );
    assert_eq!(rows.len(), 1 + 3 * 3);
    assert!(rows[1..].iter().all(|r| r[2] == "1"));
}

#[test]
fn stderr_matches_raw_values() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(
        tmp.path().join("q.cfg"),
        format!("{SMALL_QUDIT}raw = true\n"),
    )
    .unwrap();
    assert!(psi_sim(
        tmp.path(),
        &[
            "qudit-experiment",
            "--config",
            "q.cfg",
            "--out",
            "q",
            "--quiet"
        ]
    )
    .status
    .success());
    let summary = csv_rows(&tmp.path().join("q/fidelity.csv"));
    let raw = csv_rows(&tmp.path().join("q/fidelity_raw.csv"));
    assert_eq!(summary.len(), 1 + 2 * 2 * 2);
    for row in &summary[1..] {
        let values: Vec<f64> = raw[1..]
            .iter()
            .filter(|r| r[..3] == row[..3])
            .map(|r| r[4].parse().unwrap())
            .collect();
        assert_eq!(values.len(), 4);
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let std = (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
        let reported: Vec<f64> = row[3..].iter().map(|v| v.parse().unwrap()).collect();
        assert!((reported[0] - mean).abs() < 1e-12);
        assert!((reported[1] - std).abs() < 1e-12);
        assert!((reported[2] - std / n.sqrt()).abs() < 1e-12);
    }
}

#[test]
fn manifest_reproduces_the_run() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("q.cfg"), SMALL_QUDIT).unwrap();
    assert!(psi_sim(
        tmp.path(),
        &[
            "qudit-experiment",
            "--config",
            "q.cfg",
            "--seed",
            "9",
            "--out",
            "a",
            "--quiet"
        ]
    )
    .status
    .success());
    assert!(psi_sim(
        tmp.path(),
        &[
            "qudit-experiment",
            "--config",
            "a/manifest.txt",
            "--out",
            "b",
            "--quiet"
        ]
    )
    .status
    .success());
    for name in ["fidelity.csv", "manifest.txt"] {
        assert_eq!(
            fs::read(tmp.path().join("a").join(name)).unwrap(),
            fs::read(tmp.path().join("b").join(name)).unwrap(),
            "{name}"
        );
    }
    let seed9 = fs::read(tmp.path().join("a/fidelity.csv")).unwrap();
    assert!(psi_sim(
        tmp.path(),
        &[
            "qudit-experiment",
            "--config",
            "q.cfg",
            "--seed",
            "10",
            "--out",
            "c",
            "--quiet"
        ]
    )
    .status
    .success());
    assert_ne!(seed9, fs::read(tmp.path().join("c/fidelity.csv")).unwrap());
}

#[test]
fn config_errors_exit_2_and_write_nothing() {
    let tmp = tempfile::tempdir().unwrap();
    let cases = [
        (
            "bin.cfg",
            "[scene]\ntype = eq6_qudit\n[sweep]\nn_bin = 200\n",
            "n_bin",
        ),
        (
            "key.cfg",
            "[scene]\ntype = eq6_qudit\nslit_count = 6\n",
            "slit_count",
        ),
        (
            "type.cfg",
            "[scene]\ntype = eq6_qudit\n[sweep]\nrepetitions = many\n",
            "repetitions",
        ),
    ];
    for (name, text, key) in cases {
        fs::write(tmp.path().join(name), text).unwrap();
        let out = psi_sim(
            tmp.path(),
            &["qudit-experiment", "--config", name, "--out", "never"],
        );
        assert_eq!(out.status.code(), Some(2), "{name}");
        assert!(String::from_utf8_lossy(&out.stderr).contains(key), "{name}");
    }
    let out = psi_sim(tmp.path(), &["qudit-experiment", "--out", "never"]);
    assert_eq!(out.status.code(), Some(2));
    fs::write(tmp.path().join("lens.cfg"), "[scene]\ntype = lens\n").unwrap();
    let out = psi_sim(
        tmp.path(),
        &["sweep-map", "--config", "lens.cfg", "--out", "never"],
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(!tmp.path().join("never").exists());
}

#[test]
fn runtime_failure_exits_1() {
    let tmp = tempfile::tempdir().unwrap();
    let out = psi_sim(
        tmp.path(),
        &[
            "reconstruct",
            "--manifest",
            "missing.manifest",
            "--out",
            "r",
        ],
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(!tmp.path().join("r").exists());
}

#[test]
fn writes_only_inside_out() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(
        tmp.path().join("lens.cfg"),
        "[scene]\ntype = lens\n[output]\ndir = elsewhere\n",
    )
    .unwrap();
    assert!(psi_sim(
        tmp.path(),
        &[
            "continuous-experiment",
            "--config",
            "lens.cfg",
            "--out",
            "only/here",
            "--quiet"
        ]
    )
    .status
    .success());
    let mut top: Vec<String> = fs::read_dir(tmp.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    top.sort();
    assert_eq!(top, ["lens.cfg", "only"]);
    let files: Vec<_> = fs::read_dir(tmp.path().join("only/here"))
        .unwrap()
        .collect();
    // manifest, reference, six case maps, three tables
    assert_eq!(files.len(), 11);
}

#[test]
fn phase_map_scene_runs_continuous_experiment() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(
        tmp.path().join("lens.cfg"),
        "[scene]\ntype = lens\nwidth = 48\nheight = 40\n",
    )
    .unwrap();
    assert!(psi_sim(
        tmp.path(),
        &["simulate", "--config", "lens.cfg", "--out", "sim", "--quiet"]
    )
    .status
    .success());
    let cfg = "[scene]\ntype = phmap\nphase_file = sim/true_phase.phmap\namplitude_file = sim/true_amplitude.ammap\n";
    fs::write(tmp.path().join("map.cfg"), cfg).unwrap();
    let out = psi_sim(
        tmp.path(),
        &[
            "continuous-experiment",
            "--config",
            "map.cfg",
            "--out",
            "c",
            "--quiet",
        ],
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let rows = csv_rows(&tmp.path().join("c/phase_error.csv"));
    assert_eq!(rows.len(), 1 + 6);
    assert!(rows[1..].iter().all(|r| r[3] == (48 * 40).to_string()));
}

#[test]
fn resolved_manifest_parses_to_the_same_config() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("q.cfg"), SMALL_QUDIT).unwrap();
    assert!(psi_sim(
        tmp.path(),
        &[
            "qudit-experiment",
            "--config",
            "q.cfg",
            "--out",
            "a",
            "--quiet"
        ]
    )
    .status
    .success());
    let original: RunConfig = parse_config(SMALL_QUDIT, tmp.path()).unwrap();
    let echoed = fs::read_to_string(tmp.path().join("a/manifest.txt")).unwrap();
    assert_eq!(parse_config(&echoed, tmp.path()).unwrap(), original);
}
