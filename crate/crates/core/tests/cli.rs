use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use passive_glrt::channel::{simulate_observation, ScenarioConfig};
use passive_glrt::config::RunConfigFile;
use passive_glrt::detectors::DetectorKind;
use passive_glrt::io::{read_curves, write_observations};
use passive_glrt::waveform::FormatModel;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_passive-glrt"))
}

fn bundled() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/paper_fig1c.conf")
}

const SMALL: &str = r#"
seed = 5
pf_target = 0.05
trials_h0 = 200
trials_h1 = 100
snr_grid_db = [-20.0, -10.0]
detectors = ["PMR_GLRT", "PMR_RGLRT_K", "PSL_RGLRT_K"]

[scenario]
transmitters = 2
receivers = 2
dnr_db = -10.0

[format]
kind = "ofdm"
Ns = 4
P = 2
TgOverTsym = 0.0
L = 1
constellation = "bpsk"
"#;

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let path = dir.join("run.conf");
    fs::write(&path, text).unwrap();
    path
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn bundled_config_is_valid() {
    let cfg = RunConfigFile::load(&bundled()).unwrap();
    let exp = cfg.to_experiment().unwrap();
    assert_eq!(exp.scenario.transmitters, 2);
    assert_eq!(exp.scenario.receivers, 3);
    assert_eq!(exp.scenario.dnr_db, -10.0);
    assert_eq!(exp.pf_target, 1e-3);
    assert_eq!(exp.formats[0].sample_count(), 640);
}

#[test]
fn bundled_config_runs_end_to_end_at_reduced_trials() {
    let dir = tempfile::tempdir().unwrap();
    let text = fs::read_to_string(bundled())
        .unwrap()
        .replace("trials_h0 = 10000", "trials_h0 = 1000")
        .replace("trials_h1 = 10000", "trials_h1 = 50");
    let cfg = write_config(dir.path(), &text);
    let out = dir.path().join("out");
    let status = bin()
        .args(["curve", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let rows = read_curves(fs::File::open(out.join("curves.csv")).unwrap()).unwrap();
    assert_eq!(rows.len(), 6 * 13);
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["thresholds"].as_array().unwrap().len(), 6);
    assert_eq!(manifest["config"]["format"]["P"], 64);
}

#[test]
fn curve_output_and_manifest_reproduce_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let run = |name: &str, extra: &[&str]| {
        let out = dir.path().join(name);
        let status = bin()
            .args(["curve", "--seed", "7", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(&out)
            .args(extra)
            .status()
            .unwrap();
        assert!(status.success());
        out
    };
    let a = run("a", &[]);
    let b = run("b", &["--threads", "3"]);
    let csv_a = fs::read(a.join("curves.csv")).unwrap();
    assert_eq!(csv_a, fs::read(b.join("curves.csv")).unwrap());
    let header = String::from_utf8(csv_a.clone()).unwrap();
    assert!(header.starts_with("detector,snr_db,pd,stderr\n"));

    // the config echoed in the manifest reproduces the run on its own
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(a.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed"], 7);
    let echoed: RunConfigFile = serde_json::from_value(manifest["config"].clone()).unwrap();
    let echo_path = dir.path().join("echo.conf");
    fs::write(&echo_path, echoed.to_toml()).unwrap();
    let c = dir.path().join("c");
    assert!(bin()
        .args(["curve", "--config"])
        .arg(&echo_path)
        .arg("--out")
        .arg(&c)
        .status()
        .unwrap()
        .success());
    assert_eq!(csv_a, fs::read(c.join("curves.csv")).unwrap());
}

#[test]
fn detectors_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out = bin()
        .args(["calibrate", "--detectors", "AMR_GLRT,PSL_GLRT", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "detector,threshold");
    assert!(lines[1].starts_with("AMR_GLRT,"));
    assert!(lines[2].starts_with("PSL_GLRT,"));
    assert_eq!(lines.len(), 3);
}

#[test]
fn schema_violations_exit_with_1() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        SMALL.replace("pf_target = 0.05", "pf_target = 0.001"),
        SMALL.replace("seed = 5", "seed = 5\nunknown = true"),
        SMALL.replace("Ns = 4", "Ns = 4\nrolloff = 0.2"),
        SMALL.replace("\"PMR_GLRT\"", "\"PMR_GLRTX\""),
        "not = [valid".to_string(),
    ];
    for text in cases {
        let cfg = write_config(dir.path(), &text);
        let out = bin()
            .args(["curve", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(dir.path().join("x"))
            .output()
            .unwrap();
        assert_eq!(out.status.code(), Some(1), "{text}");
        assert!(!out.stderr.is_empty());
    }
    let out = bin()
        .args(["curve", "--config", "/nonexistent", "--out", "/tmp/x"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let out = bin().args(["frobnicate"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn numeric_failure_exits_with_2() {
    let dir = tempfile::tempdir().unwrap();
    // 2^17 candidates per transmitter exceeds the exhaustive-search cap
    let text = SMALL
        .replace("\"PSL_RGLRT_K\"", "\"PMR_GLRT_K_EXACT\"")
        .replace("Ns = 4", "Ns = 17");
    let cfg = write_config(dir.path(), &text);
    let out_dir = dir.path().join("out");
    let out = bin()
        .args(["curve", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out_dir)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    // the detectors that succeeded are still written
    let rows = read_curves(fs::File::open(out_dir.join("curves.csv")).unwrap()).unwrap();
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().all(|r| r.detector != "PMR_GLRT_K_EXACT"));
}

#[test]
fn detect_matches_in_process_statistic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = write_config(dir.path(), SMALL);
    let cfg = RunConfigFile::load(&cfg_path).unwrap();
    let exp = cfg.to_experiment().unwrap();
    let models: Vec<FormatModel> = exp.models();
    let obs = simulate_observation(
        &ScenarioConfig {
            snr_db: -3.0,
            ..exp.scenario.clone()
        },
        &models,
        &mut ChaCha8Rng::seed_from_u64(21),
    )
    .unwrap();
    let obs_path = dir.path().join("obs.csv");
    write_observations(&obs, fs::File::create(&obs_path).unwrap()).unwrap();

    for kind in DetectorKind::ALL {
        let expected = kind.evaluate(&models, &obs, 1.0).unwrap();
        let out = bin()
            .arg("detect")
            .arg(&obs_path)
            .args(["--detector", kind.name(), "--config"])
            .arg(&cfg_path)
            .output()
            .unwrap();
        assert!(out.status.success(), "{kind}");
        let printed: f64 = stdout(&out).trim().parse().unwrap();
        assert!(
            (printed - expected).abs() <= 1e-11 * expected.abs().max(1.0),
            "{kind}: {printed} vs {expected}"
        );
    }
}

#[test]
fn detect_on_zero_observations_prints_zero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let mut text = String::from("transmitter,channel,receiver,sample,re,im\n");
    for t in 0..2 {
        for j in 0..2 {
            for k in 0..8 {
                text.push_str(&format!("{t},s,{j},{k},0,0\n"));
            }
        }
    }
    let obs = dir.path().join("zero.csv");
    fs::write(&obs, text).unwrap();
    let out = bin()
        .arg("detect")
        .arg(&obs)
        .args(["--detector", "PSL_RGLRT_K", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(stdout(&out).trim(), "0");
}

#[test]
fn detect_hand_evaluated_fixture() {
    // one transmitter, one receiver, OFDM Ns=2 P=1: H = [[1,1],[1,-1]],
    // G^H G = 2I, so the relaxed PSL statistic is ||H^H s||² / 2.
    // s = (1, 2i): H^H s = (1+2i, 1-2i), squared norm 10, statistic 5.
    let dir = tempfile::tempdir().unwrap();
    let cfg = SMALL
        .replace("transmitters = 2", "transmitters = 1")
        .replace("Ns = 4", "Ns = 2")
        .replace("P = 2", "P = 1");
    let cfg = write_config(dir.path(), &cfg);
    let obs = dir.path().join("fixture.csv");
    fs::write(
        &obs,
        "transmitter,channel,receiver,sample,re,im\n0,s,0,0,1,0\n0,s,0,1,0,2\n",
    )
    .unwrap();
    let out = bin()
        .arg("detect")
        .arg(&obs)
        .args(["--detector", "PSL_RGLRT_K", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert_eq!(stdout(&out).trim(), "5");
    let out = bin()
        .arg("detect")
        .arg(&obs)
        .args(["--detector", "PSL_GLRT", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert_eq!(stdout(&out).trim(), "5");
}

#[test]
fn detect_rejects_malformed_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let obs = dir.path().join("bad.csv");
    fs::write(
        &obs,
        "transmitter,channel,receiver,sample,re,im\n0,s,0,0,abc,0\n",
    )
    .unwrap();
    let out = bin()
        .arg("detect")
        .arg(&obs)
        .args(["--detector", "PSL_GLRT", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn pulse_subcommand() {
    let out = bin()
        .args(["pulse", "--rolloff", "0.22", "-M", "8", "-P", "4"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let mut rdr = csv::Reader::from_reader(out.stdout.as_slice());
    assert_eq!(rdr.headers().unwrap(), vec!["index", "t", "value"]);
    let rows: Vec<(usize, f64, f64)> = rdr.deserialize().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 32);
    let peak = rows.iter().map(|r| r.2).fold(f64::MIN, f64::max);
    assert_eq!(peak, 1.0);
    assert_eq!(rows[16].1, 0.0);

    let out = bin()
        .args(["pulse", "--rolloff", "1.5", "-M", "8", "-P", "4"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}
