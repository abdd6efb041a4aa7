use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_aperiodica"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn path(dir: &Path, name: &str) -> String {
    dir.join(name).to_str().unwrap().to_string()
}

fn read_json(p: &str) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

/// Points a + bτ in [lo, hi] whose conjugate a + bτ' lies in [−1, τ − 1].
fn fibonacci_count(lo: f64, hi: f64) -> usize {
    let tau = (1.0 + 5f64.sqrt()) / 2.0;
    let conj = 1.0 - tau;
    let mut n = 0;
    for b in -400i64..=400 {
        for a in -400i64..=400 {
            let x = a as f64 + b as f64 * tau;
            let y = a as f64 + b as f64 * conj;
            if (lo..=hi).contains(&x) && (-1.0..=tau - 1.0).contains(&y) {
                n += 1;
            }
        }
    }
    n
}

#[test]
fn generate_matches_the_count_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let out = path(dir.path(), "fib.json");
    let o = run(&["generate", "--fixture", "fibonacci", "--box", "0:100", "--out", &out]);
    assert_eq!(o.status.code(), Some(0));
    let v = read_json(&out);
    assert_eq!(v["points"].as_array().unwrap().len(), fibonacci_count(0.0, 100.0));
    assert_eq!(v["mode"], "exact");
}

#[test]
fn analyze_reports_rank_two_and_a_meyer_verdict() {
    let dir = tempfile::tempdir().unwrap();
    let sample = path(dir.path(), "fib.json");
    let report = path(dir.path(), "report.json");
    assert_eq!(run(&["generate", "--fixture", "fibonacci", "--box", "0:100", "--out", &sample]).status.code(), Some(0));
    assert_eq!(run(&["analyze", "--in", &sample, "--out", &report]).status.code(), Some(0));
    let v = read_json(&report);
    assert_eq!(v["s"], 2);
    assert_eq!(v["verdict"], "meyer_plausible");
    assert_eq!(v["rank_exceeds_d"], true);
}

#[test]
fn minimality_of_rational_map_exits_with_verdict_code() {
    let o = run(&["minimality", "--matrix", "0.5,0.3333333333"]);
    assert_eq!(o.status.code(), Some(3));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["verdict"], "non_minimal");
    let w: Vec<i64> = v["witness"].as_array().unwrap().iter().map(|x| x.as_i64().unwrap()).collect();
    assert!(w == vec![2, -3] || w == vec![-2, 3], "{w:?}");
}

#[test]
fn minimality_of_fibonacci_map_succeeds() {
    let tau = (1.0 + 5f64.sqrt()) / 2.0;
    let m = format!("{},{}", 1.0 / (1.0 + tau * tau), tau / (1.0 + tau * tau));
    let o = run(&["minimality", "--matrix", &m]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["verdict"], "minimal");
}

#[test]
fn reconstruct_rejects_the_drift_sample() {
    let dir = tempfile::tempdir().unwrap();
    let sample = path(dir.path(), "drift.json");
    assert_eq!(run(&["generate", "--fixture", "sqrt_drift", "--out", &sample]).status.code(), Some(0));
    let o = run(&["reconstruct", "--in", &sample]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("[meyer]"));
}

#[test]
fn invalid_inputs_exit_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = path(dir.path(), "bad.json");
    std::fs::write(&bad, "{\"dim\": 1, \"mode\": \"numeric\"").unwrap();
    let o = run(&["analyze", "--in", &bad]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("[input]"));
    assert_eq!(run(&["generate", "--fixture", "penrose"]).status.code(), Some(2));
    assert_eq!(run(&["generate", "--fixture", "fibonacci", "--box", "5:1"]).status.code(), Some(2));
    assert_eq!(run(&["analyze", "--in", &path(dir.path(), "missing.json")]).status.code(), Some(2));
    assert_eq!(run(&["minimality", "--matrix", "0.5,x"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn outputs_are_byte_identical_across_runs_and_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for (k, threads) in ["1", "4"].iter().enumerate() {
        let sample = path(dir.path(), &format!("ab{k}.json"));
        let report = path(dir.path(), &format!("rt{k}.json"));
        let o = bin()
            .env("APERIODICA_THREADS", threads)
            .args(["generate", "--fixture", "ammann_beenker", "--box", "0:12,0:12", "--nonsingular", "--seed", "7", "--out", &sample])
            .output()
            .unwrap();
        assert_eq!(o.status.code(), Some(0));
        let o = bin()
            .env("APERIODICA_THREADS", threads)
            .args(["roundtrip", "--fixture", "fibonacci", "--box", "0:200", "--seed", "3", "--out", &report])
            .output()
            .unwrap();
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        outputs.push((std::fs::read(&sample).unwrap(), std::fs::read(&report).unwrap()));
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn json_outputs_survive_parse_and_print() {
    let dir = tempfile::tempdir().unwrap();
    let sample = path(dir.path(), "s.json");
    let files = [
        ("report.json", vec!["analyze", "--in"]),
        ("cps.json", vec!["reconstruct", "--in"]),
        ("window.json", vec!["window", "--in"]),
        ("recover.json", vec!["recover", "--in"]),
        ("roundtrip.json", vec!["roundtrip", "--in"]),
    ];
    assert_eq!(run(&["generate", "--fixture", "silver", "--box", "0:150", "--out", &sample]).status.code(), Some(0));
    let mut produced = vec![sample.clone()];
    for (name, args) in files {
        let out = path(dir.path(), name);
        let mut argv = args.clone();
        argv.push(&sample);
        argv.extend(["--out", &out]);
        let o = run(&argv);
        assert_eq!(o.status.code(), Some(0), "{name}: {}", String::from_utf8_lossy(&o.stderr));
        produced.push(out);
    }
    for p in produced {
        let text = std::fs::read_to_string(&p).unwrap();
        let v: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(serde_json::to_string_pretty(&v).unwrap() + "\n", text, "{p}");
    }
}

#[test]
fn render_formats() {
    let dir = tempfile::tempdir().unwrap();
    let sample = path(dir.path(), "ab.json");
    let report = path(dir.path(), "report.json");
    let window = path(dir.path(), "w.json");
    assert_eq!(run(&["generate", "--fixture", "ammann_beenker", "--box", "0:10,0:10", "--out", &sample]).status.code(), Some(0));
    assert_eq!(run(&["analyze", "--in", &sample, "--out", &report]).status.code(), Some(0));
    assert_eq!(run(&["window", "--fixture", "ammann_beenker", "--out", &window]).status.code(), Some(0));

    let svg = run(&["render", "--in", &sample, "--format", "svg"]);
    assert_eq!(svg.status.code(), Some(0));
    let text = String::from_utf8(svg.stdout).unwrap();
    assert!(text.contains("width=\"800\" height=\"800\""));
    let n = read_json(&sample)["points"].as_array().unwrap().len();
    assert_eq!(text.matches("<circle").count(), n);

    let csv = String::from_utf8(run(&["render", "--in", &report, "--format", "csv"]).stdout).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("R,C"));
    let rs: Vec<f64> = lines.map(|l| l.split(',').next().unwrap().parse().unwrap()).collect();
    assert!(rs.windows(2).all(|w| w[0] < w[1]));

    let wsvg = String::from_utf8(run(&["render", "--in", &window, "--format", "svg"]).stdout).unwrap();
    assert!(wsvg.contains("<path d=\"M"));
    assert!(wsvg.trim_end().ends_with("</svg>"));

    let cube = path(dir.path(), "cube.json");
    std::fs::write(
        &cube,
        r#"{"dim": 3, "mode": "numeric", "points": [[0.5, 0.5, 0.5]], "box": {"lo": [0, 0, 0], "hi": [1, 1, 1]}}"#,
    )
    .unwrap();
    let o = run(&["render", "--in", &cube, "--format", "svg"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("[render]"));
}
