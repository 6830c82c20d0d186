use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

fn nesy(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nesy"))
        .args(args)
        .current_dir(fixtures())
        .output()
        .expect("binary runs")
}

fn nesy_env(args: &[&str], key: &str, value: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nesy"))
        .args(args)
        .env(key, value)
        .current_dir(fixtures())
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    assert!(
        o.status.success(),
        "exit {:?}: {}",
        o.status.code(),
        String::from_utf8_lossy(&o.stderr)
    );
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn docs(o: &Output) -> Vec<Value> {
    stdout(o)
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

fn stderr_line(o: &Output) -> String {
    let s = String::from_utf8(o.stderr.clone()).unwrap();
    assert_eq!(s.lines().count(), 1, "diagnostic is one line: {s:?}");
    s
}

const GOLDEN: &[(&str, &[&str])] = &[
    ("running", &["--model", "running.nesy"]),
    (
        "running_grad_map",
        &[
            "--model",
            "running.nesy",
            "--grad",
            "--map",
            "--json-indent",
            "2",
        ],
    ),
    (
        "running_circuit",
        &["--model", "running.nesy", "--backend", "circuit"],
    ),
    (
        "running_oracle",
        &[
            "--model",
            "running.nesy",
            "--backend",
            "circuit",
            "--oracle",
        ],
    ),
    (
        "running_inline",
        &["--model", "running.nesy", "--query", "both", "-e", "!h | c"],
    ),
    (
        "running_presets",
        &["--model", "running.nesy", "--preset", "deepproblog_prop"],
    ),
    (
        "point_ltn",
        &["--model", "point.nesy", "--preset", "ltn", "--grad"],
    ),
    ("fuzzy_mc", &["--model", "fuzzy.nesy"]),
    ("fuzzy_seed", &["--model", "fuzzy.nesy", "--seed", "11"]),
    (
        "fuzzy_quad_grad",
        &["--model", "fuzzy.nesy", "--backend", "quad", "--grad"],
    ),
    (
        "fuzzy_neupsl",
        &[
            "--model",
            "fuzzy.nesy",
            "--preset",
            "neupsl",
            "--query",
            "imp",
            "--query",
            "conj",
            "--json-indent",
            "4",
        ],
    ),
    (
        "mln_nmln",
        &["--model", "mln.nesy", "--preset", "nmln", "--grad", "--map"],
    ),
    ("mixed_quad", &["--model", "mixed.nesy"]),
    (
        "mixed_mc",
        &["--model", "mixed.nesy", "--backend", "mc", "--seed", "3"],
    ),
];

/// Compare against `tests/golden/<name>.json`; set `NESY_BLESS=1` to rewrite.
#[test]
fn golden_outputs() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden");
    let bless = std::env::var_os("NESY_BLESS").is_some();
    let mut failures = Vec::new();
    for (name, args) in GOLDEN {
        let got = stdout(&nesy(args));
        let path = dir.join(format!("{name}.json"));
        if bless {
            std::fs::create_dir_all(&dir).unwrap();
            std::fs::write(&path, &got).unwrap();
            continue;
        }
        let want =
            std::fs::read_to_string(&path).unwrap_or_else(|_| panic!("missing {}", path.display()));
        if got != want {
            failures.push(format!("{name}:\n--- want\n{want}--- got\n{got}"));
        }
    }
    assert!(failures.is_empty(), "{}", failures.join("\n"));
}

#[test]
fn running_example_matches_enumeration() {
    let mut oracle = 0.0;
    let p = [0.8, 0.5, 0.5];
    for bits in 0..8u32 {
        let w: Vec<bool> = (0..3).map(|i| bits >> i & 1 == 1).collect();
        let weight: f64 = (0..3)
            .map(|i| if w[i] { p[i] } else { 1.0 - p[i] })
            .product();
        if !w[0] || w[1] || w[2] {
            oracle += weight;
        }
    }
    for backend in ["enum", "circuit"] {
        let d = docs(&nesy(&[
            "--model",
            "running.nesy",
            "--query",
            "rule",
            "--backend",
            backend,
        ]));
        assert_eq!(d.len(), 1);
        assert_eq!(d[0]["backend"], backend);
        assert!((d[0]["value"].as_f64().unwrap() - oracle).abs() < 1e-12);
    }
}

#[test]
fn ltn_preset_satisfies_the_rule_at_the_point() {
    let d = docs(&nesy(&["--model", "point.nesy", "--preset", "ltn"]));
    assert_eq!(d[0]["value"], 1.0);
    assert_eq!(d[0]["preset"], "ltn");
    assert_eq!(d[0]["quadruple"]["measure"], "dirac");
}

#[test]
fn flags_beat_file_sections() {
    let file = docs(&nesy(&["--model", "fuzzy.nesy"]));
    let same_seed = docs(&nesy(&["--model", "fuzzy.nesy", "--seed", "7"]));
    let other_seed = docs(&nesy(&["--model", "fuzzy.nesy", "--seed", "8"]));
    assert_eq!(file, same_seed);
    assert_ne!(file[0]["value"], other_seed[0]["value"]);

    let quad = docs(&nesy(&["--model", "fuzzy.nesy", "--backend", "quad"]));
    assert_eq!(quad[0]["backend"], "quad");
    assert!(quad[0].get("std_error").is_none());

    let mc = docs(&nesy(&["--model", "mixed.nesy", "--backend", "mc"]));
    assert_eq!(mc[0]["backend"], "mc");

    let inline = docs(&nesy(&["--model", "running.nesy", "-e", "c"]));
    assert_eq!(inline.len(), 1);
    assert_eq!(inline[0]["query"], "c");
    assert_eq!(inline[0]["value"], 0.5);

    let oracle = docs(&nesy(&[
        "--model",
        "running.nesy",
        "--backend",
        "circuit",
        "--oracle",
    ]));
    assert_eq!(oracle[0]["backend"], "enum");
}

#[test]
fn monte_carlo_output_is_byte_identical() {
    let args = [
        "--model",
        "fuzzy.nesy",
        "--grad",
        "--preset",
        "neupsl",
        "--query",
        "imp",
        "-e",
        "b & !a",
    ];
    let first = stdout(&nesy(&args));
    for _ in 0..3 {
        assert_eq!(stdout(&nesy(&args)), first);
    }
    for threads in ["1", "3"] {
        assert_eq!(
            stdout(&nesy_env(&args, "RAYON_NUM_THREADS", threads)),
            first
        );
    }
}

#[test]
fn undeclared_symbol_exits_one_and_names_it() {
    let o = nesy(&["--model", "running.nesy", "-e", "h & qq"]);
    assert_eq!(o.status.code(), Some(1));
    let msg = stderr_line(&o);
    assert!(msg.contains("`qq`"), "{msg}");

    let o = nesy(&["--model", "broken.nesy"]);
    assert_eq!(o.status.code(), Some(1));
    let msg = stderr_line(&o);
    assert!(
        msg.contains("broken.nesy:7:") && msg.contains("`z`"),
        "{msg}"
    );
}

#[test]
fn numerical_failures_exit_two() {
    let o = nesy(&["--model", "overflow.nesy"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr_line(&o).contains("Z = inf"));

    let o = nesy(&["--model", "mln.nesy", "-e", "h & !h", "--grad"]);
    assert_eq!(o.status.code(), Some(2));
    stderr_line(&o);
}

#[test]
fn input_errors_exit_one() {
    let cases: &[&[&str]] = &[
        &["--model", "missing.nesy"],
        &["--model", "running.nesy", "--bogus"],
        &["--model", "running.nesy", "--backend", "gpu"],
        &["--model", "running.nesy", "--preset", "nope"],
        &["--model", "running.nesy", "--preset", "ltn"],
        &["--model", "running.nesy", "--query", "absent"],
        &["--model", "mixed.nesy", "--map"],
        &["--model", "broken.nesy", "-e", "h"],
    ];
    for args in cases {
        let o = nesy(args);
        assert_eq!(o.status.code(), Some(1), "{args:?}");
        assert!(o.stdout.is_empty(), "{args:?}");
    }
    assert_eq!(nesy(&["--help"]).status.code(), Some(0));
}

#[test]
fn file_query_errors_point_at_the_query_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.nesy");
    std::fs::write(
        &path,
        "symbols { a: unit }\nsemantics boolean\nbelief dirac { a: 0.5 }\nmeasure counting\n\nquery \"a\"\n",
    )
    .unwrap();
    let o = nesy(&["--model", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let msg = stderr_line(&o);
    assert!(msg.contains("m.nesy:6:"), "{msg}");
}
