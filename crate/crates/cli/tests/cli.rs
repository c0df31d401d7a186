use std::collections::HashMap;
use std::path::Path;
use std::process::{Command, Output};

use qchan_core::analysis::{classify_default, rate_from_series, MarkovClass, SeriesKind, TimeSeries};
use qchan_core::spinbath::{bloch_factor, CouplingEnsemble, HalfInt};

const BIN: &str = env!("CARGO_BIN_EXE_qchan");

fn qchan(dir: &Path, args: &[&str]) -> Output {
    Command::new(BIN).args(args).current_dir(dir).output().expect("spawn qchan")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = qchan(dir, args);
    assert!(out.status.success(), "qchan {args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

struct Csv {
    meta: HashMap<String, String>,
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Csv {
    fn parse(text: &str) -> Self {
        let mut meta = HashMap::new();
        let mut lines = Vec::new();
        for line in text.lines() {
            match line.strip_prefix("# ") {
                Some(m) => {
                    let (k, v) = m.split_once(" = ").unwrap();
                    meta.insert(k.to_string(), v.to_string());
                }
                None => lines.push(line),
            }
        }
        let header = lines[0].split(',').map(String::from).collect();
        let rows = lines[1..].iter().map(|l| l.split(',').map(String::from).collect()).collect();
        Csv { meta, header, rows }
    }

    fn read(path: &Path) -> Self {
        Self::parse(&std::fs::read_to_string(path).unwrap())
    }

    fn col(&self, name: &str) -> Vec<f64> {
        let j = self.header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"));
        self.rows.iter().map(|r| r[j].parse().unwrap()).collect()
    }
}

fn report(text: &str) -> HashMap<String, String> {
    text.lines().filter_map(|l| l.split_once(" = ")).map(|(k, v)| (k.to_string(), v.to_string())).collect()
}

/// Command lines of the fenced shell blocks in the README.
fn readme_commands() -> Vec<Vec<String>> {
    let readme = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../../README.md")).unwrap();
    let mut commands = Vec::new();
    let mut in_block = false;
    for line in readme.lines() {
        if line.starts_with("```") {
            in_block = !in_block && line.trim_start_matches('`') == "sh";
            continue;
        }
        if let (true, Some(rest)) = (in_block, line.strip_prefix("qchan ")) {
            assert!(!rest.contains(['"', '\'', '|', '>']), "README example needs a shell: {line}");
            commands.push(rest.split_whitespace().map(String::from).collect());
        }
    }
    commands
}

#[test]
fn readme_examples_run() {
    let dir = tempfile::tempdir().unwrap();
    let commands = readme_commands();
    assert!(commands.len() >= 10, "found only {} README examples", commands.len());
    for args in &commands {
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        let stdout = ok(dir.path(), &args);
        if args[..2] == ["analyze", "series.csv"] {
            let r = report(&stdout);
            assert_eq!(r["classification"], "constant-rate");
            let rate: f64 = r["constant-rate"].parse().unwrap();
            assert!((rate - 2.0).abs() < 1e-6, "rate {rate}");
        }
    }
    for file in ["fig1-style.csv", "single.csv", "series.csv", "fixed.csv", "lorentz.json", "figures/fig2.csv"] {
        assert!(dir.path().join(file).exists(), "{file} missing");
    }
}

#[test]
fn output_is_byte_identical_across_runs_and_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let run = |threads: &str, args: &[&str]| {
        let out = Command::new(BIN).args(args).env("QCHAN_THREADS", threads).current_dir(dir.path()).output().unwrap();
        assert!(out.status.success());
        out.stdout
    };
    for args in [
        &["depol-classical", "--mc", "3000", "--seed", "7", "--steps", "50"][..],
        &["dephasing-classical", "--cosines", "1:0.5,0.3:2", "--mc", "3000", "--seed", "3", "--steps", "50"],
        &["dephasing-quantum", "--ohmic", "--beta", "1", "--steps", "40"],
    ] {
        let a = run("1", args);
        assert_eq!(a, run("1", args));
        assert_eq!(a, run("4", args));
    }
}

#[test]
fn analyze_reproduces_the_library_verdict() {
    let dir = tempfile::tempdir().unwrap();
    let l = HalfInt::from_twice(3);
    let text = ok(dir.path(), &["depol-spinbath", "--l", "3/2", "--g", "0.8", "--t-max", "12", "--steps", "600"]);
    std::fs::write(dir.path().join("s.csv"), &text).unwrap();

    let ensemble = CouplingEnsemble::fixed(l, 0.8).unwrap();
    let h = 12.0 / 600.0;
    let ts = TimeSeries::sample(SeriesKind::BlochFactor, h, 601, |t| bloch_factor(&ensemble, t)).unwrap();
    let lib = classify_default(&rate_from_series(&ts).unwrap()).unwrap();
    let MarkovClass::NonMarkovian { intervals } = &lib else { panic!("expected non-markovian, got {lib:?}") };
    let expected = intervals.iter().map(|(a, b)| format!("[{a:.16e}, {b:.16e}]")).collect::<Vec<_>>().join(" ");

    let run_meta = Csv::parse(&text).meta;
    let r = report(&ok(dir.path(), &["analyze", "s.csv"]));
    assert_eq!(r["classification"], "non-markovian");
    assert_eq!(r["negative-intervals"], expected);
    assert_eq!(run_meta["negative-intervals"], expected);
}

#[test]
fn analyze_round_trip_matches_run_metadata_for_every_model() {
    let dir = tempfile::tempdir().unwrap();
    for (name, args) in [
        ("a.csv", &["depol-spinbath", "--ensemble", "lorentzian", "--half-width", "0.7"][..]),
        ("b.csv", &["depol-classical", "--sigma", "0.6"]),
        ("c.csv", &["dephasing-quantum", "--modes", "1:0.5,0.4:1.7", "--beta", "3"]),
        ("d.csv", &["dephasing-classical", "--process", "white", "--intensity", "0.3"]),
        ("e.csv", &["amp-damping", "--g", "0.4", "--steps", "800", "--t-max", "20"]),
    ] {
        let mut full = args.to_vec();
        full.extend(["--out", name]);
        ok(dir.path(), &full);
        let meta = Csv::read(&dir.path().join(name)).meta;
        let r = report(&ok(dir.path(), &["analyze", name]));
        assert_eq!(r["classification"], meta["classification"], "{args:?}");
        for key in ["constant-rate", "negative-intervals"] {
            assert_eq!(r.get(key), meta.get(key), "{key} for {args:?}");
        }
    }
}

#[test]
fn config_file_sits_between_flags_and_defaults() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("c.json"), r#"{"g": 2.0, "sigma": 0.5, "t-max": 3, "steps": 30}"#).unwrap();
    let text = ok(dir.path(), &["depol-classical", "--config", "c.json", "--g", "1.5"]);
    let csv = Csv::parse(&text);
    let config: serde_json::Value = serde_json::from_str(&csv.meta["config"]).unwrap();
    assert_eq!(config["g"], 1.5);
    assert_eq!(config["sigma"], 0.5);
    assert_eq!(config["t-max"], 3.0);
    assert_eq!(config["seed"], 0);
    assert_eq!(csv.rows.len(), 31);
}

#[test]
fn invalid_configuration_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("typo.json"), r#"{"sigma": 1, "sgima": 2}"#).unwrap();
    std::fs::write(dir.path().join("broken.json"), "{\n  \"g\": 1,\n  \"sigma\": \n}").unwrap();
    for (args, needle) in [
        (&["depol-classical", "--config", "typo.json"][..], "sgima"),
        (&["depol-classical", "--config", "broken.json"], "line 4"),
        (&["depol-classical", "--steps", "3"], "steps"),
        (&["depol-classical", "--sigma", "-1"], "domain"),
        (&["depol-spinbath", "--ensemble", "cauchy"], "ensemble"),
        (&["depol-spinbath", "--l", "x"], "parse"),
        (&["dephasing-quantum", "--ohmic", "--single-mode"], "choose one"),
        (&["amp-damping", "--modes", "0.1-1"], "modes"),
        (&["analyze", "missing.csv"], "missing.csv"),
        (&["depol-classical", "--bogus"], "bogus"),
    ] {
        let out = qchan(dir.path(), args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        let err = String::from_utf8_lossy(&out.stderr);
        assert!(err.contains(needle), "{args:?}: {err}");
    }
    let out = Command::new(BIN).arg("depol-classical").env("QCHAN_THREADS", "many").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn numerical_failure_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let out = qchan(dir.path(), &["oracle", "spin-bath", "--l", "30"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("resource"));
}

#[test]
fn json_output_has_meta_and_columns() {
    let dir = tempfile::tempdir().unwrap();
    let text = ok(dir.path(), &["amp-damping", "--steps", "40", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["meta"]["model"], "amp-damping");
    for col in ["t", "f_or_coherence", "p", "gamma", "gamma_err", "flags", "decoherence", "phase"] {
        assert_eq!(v["columns"][col].as_array().unwrap().len(), 41, "{col}");
    }
}

#[test]
fn monte_carlo_dataset_tracks_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let text = ok(
        dir.path(),
        &[
            "depol-classical",
            "--g",
            "1",
            "--sigma",
            "1",
            "--t-max",
            "4",
            "--steps",
            "400",
            "--mc",
            "10000",
            "--seed",
            "42",
        ],
    );
    let csv = Csv::parse(&text);
    let (f, mc, se) = (csv.col("f_or_coherence"), csv.col("mc_f"), csv.col("mc_stderr"));
    let within = (0..f.len()).filter(|&i| (mc[i] - f[i]).abs() <= 4.0 * se[i] + 1e-15).count();
    assert!(within as f64 >= 0.99 * f.len() as f64, "{within} of {}", f.len());
}

#[test]
fn single_mode_dephasing_peaks_at_one_minus_e_minus_two() {
    let dir = tempfile::tempdir().unwrap();
    let text =
        ok(dir.path(), &["dephasing-quantum", "--single-mode", "--omega", "0.5", "--weight", "4", "--t-max", "25"]);
    let peak = Csv::parse(&text).col("p").into_iter().fold(0.0, f64::max);
    // Grid spacing 1/16 misses ωt = 2π by at most half a step.
    assert!((peak - (1.0 - (-2.0f64).exp())).abs() < 1e-3, "{peak}");
    // t_max = 8π puts ωt = 2π on the grid.
    let t_max = (8.0 * std::f64::consts::PI).to_string();
    let text = ok(
        dir.path(),
        &["dephasing-quantum", "--single-mode", "--omega", "0.5", "--weight", "4", "--t-max", &t_max, "--steps", "800"],
    );
    let peak = Csv::parse(&text).col("p").into_iter().fold(0.0, f64::max);
    assert!((peak - (1.0 - (-2.0f64).exp())).abs() < 1e-12, "{peak}");
}

#[test]
fn figure_two_curves() {
    let dir = tempfile::tempdir().unwrap();
    let printed = ok(dir.path(), &["reproduce", "fig2", "--out-dir", "out"]);
    assert!(printed.trim().ends_with("fig2.csv"));
    let csv = Csv::read(&dir.path().join("out/fig2.csv"));
    assert_eq!(csv.meta["figure"], "fig2");
    let (t, zero, warm) = (csv.col("t"), csv.col("p_zero_t"), csv.col("p_beta_tau"));
    for (i, &ti) in t.iter().enumerate() {
        let expect = 1.0 - (-ti * ti / (1.0 + ti * ti)).exp();
        assert!((zero[i] - expect).abs() < 1e-6, "t = {ti}");
    }
    let last = t.len() - 1;
    assert!((zero[last] - (1.0 - (-1.0f64).exp())).abs() < 1e-3);
    assert!(warm[last] > zero[last]);
}

#[test]
fn figure_one_has_inset_difference() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["reproduce", "fig1", "--mc", "2000"]);
    let csv = Csv::read(&dir.path().join("fig1.csv"));
    assert_eq!(csv.header, ["t", "f_theory", "f_mc", "mc_stderr", "diff"]);
    assert_eq!(csv.rows.len(), 400);
    let (f, mc, d) = (csv.col("f_theory"), csv.col("f_mc"), csv.col("diff"));
    for i in 0..f.len() {
        assert_eq!(d[i], mc[i] - f[i]);
    }
}

#[test]
fn oracles_agree_with_models() {
    let dir = tempfile::tempdir().unwrap();
    for (args, tol) in [
        (&["oracle", "spin-bath", "--l", "5/2", "--g", "1.3", "--steps", "60"][..], 1e-10),
        (&["oracle", "dephasing", "--coupling", "0.6", "--omega", "0.9", "--beta", "1.5", "--steps", "60"], 1e-10),
        (&["oracle", "single-excitation", "--g", "0.5", "--t-max", "5", "--steps", "5000"], 1e-6),
    ] {
        let csv = Csv::parse(&ok(dir.path(), args));
        let max: f64 = csv.meta["max-abs-diff"].parse().unwrap();
        assert!(max <= tol, "{args:?}: {max}");
    }
}
