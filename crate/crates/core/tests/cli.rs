//! End-to-end runs of the `capkit` binary.
//!
//! Help texts are compared with `tests/golden/help/*.txt`. Regenerate them
//! with `CAPKIT_UPDATE_GOLDEN=1 cargo test --test cli`.

mod common;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use capkit::fense::validate_semb;
use serde_json::Value;

const SUBCOMMANDS: [&str; 12] = [
    "stats",
    "ngrams",
    "overlap",
    "filter-wc",
    "sample-epoch",
    "eval",
    "crossref",
    "fense",
    "decode",
    "te-compare",
    "train-toy",
    "gen-synth",
];

fn capkit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_capkit"))
        .args(args)
        .env_remove("CAPKIT_LEXICON_DIR")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = capkit(args);
    assert!(
        out.status.success(),
        "capkit {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn jsonl(path: &Path) -> Vec<Value> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/help")
}

#[test]
fn help_texts_match_golden_files() {
    let update = std::env::var_os("CAPKIT_UPDATE_GOLDEN").is_some();
    let dir = golden_dir();
    if update {
        fs::create_dir_all(&dir).unwrap();
    }
    let mut cases = vec![("capkit".to_string(), vec!["--help"])];
    for sub in SUBCOMMANDS {
        cases.push((sub.to_string(), vec![sub, "--help"]));
    }
    for (name, args) in cases {
        let text = ok(&args);
        let path = dir.join(format!("{name}.txt"));
        if update {
            fs::write(&path, &text).unwrap();
        } else {
            let expected = fs::read_to_string(&path).unwrap_or_else(|_| {
                panic!("missing {}; set CAPKIT_UPDATE_GOLDEN=1", path.display())
            });
            assert_eq!(text, expected, "help of {name} changed");
        }
    }
}

#[test]
fn usage_and_operational_errors_have_distinct_codes() {
    let out = capkit(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));

    let out = capkit(&["stats", "--manifest", "/nonexistent/manifest.jsonl"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.starts_with("capkit-error[io]: "), "{err}");
    assert_eq!(err.lines().count(), 1);
}

#[test]
fn corpus_commands_on_a_small_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = dir.path().join("m.jsonl");
    let lines = [
        r#"{"id":"a1","dataset":"AC","subset":"train","duration_sec":10.0,"captions":["A dog barks.","A dog is barking loudly"],"source_key":"yt1"}"#,
        r#"{"id":"a2","dataset":"AC","subset":"train","duration_sec":10.0,"captions":["Rain falls on a roof"],"source_key":"yt2"}"#,
        r#"{"id":"w1","dataset":"WC_AS","subset":"train","duration_sec":45.0,"captions":["wind blows"],"source_key":"yt3"}"#,
        r#"{"id":"w2","dataset":"WC_AS","subset":"train","duration_sec":12.0,"captions":["a car passes"],"source_key":"yt1"}"#,
        r#"{"id":"w3","dataset":"WC_FS","subset":"train","duration_sec":5.0,"captions":["birds chirp"]}"#,
    ];
    fs::write(&manifest, lines.join("\n")).unwrap();

    let stats: Value = serde_json::from_str(&ok(&["stats", "--manifest", p(&manifest)])).unwrap();
    assert_eq!(stats["n_audio"], 5, "{stats}");
    assert_eq!(stats["n_captions"], 6);

    let csv = ok(&[
        "ngrams",
        "--manifest",
        p(&manifest),
        "--n",
        "2",
        "--format",
        "csv",
    ]);
    assert!(csv.lines().count() > 1);

    let filtered = dir.path().join("f.jsonl");
    let keys = dir.path().join("keys.txt");
    fs::write(&keys, "yt1\n").unwrap();
    ok(&[
        "filter-wc",
        "--manifest",
        p(&manifest),
        "--exclude-keys",
        p(&keys),
        "--out",
        p(&filtered),
    ]);
    let kept: Vec<String> = jsonl(&filtered)
        .iter()
        .map(|r| r["id"].as_str().unwrap().to_string())
        .collect();
    // w1 is too long, a1 and w2 carry an excluded key
    assert_eq!(kept, ["a2", "w3"]);

    let out = capkit(&[
        "overlap",
        "--manifest",
        p(&manifest),
        "--against",
        p(&manifest),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("w3"));

    let keyed = dir.path().join("keyed.jsonl");
    fs::write(&keyed, lines[..4].join("\n")).unwrap();
    let report: Value = serde_json::from_str(&ok(&[
        "overlap",
        "--manifest",
        p(&keyed),
        "--against",
        p(&keyed),
    ]))
    .unwrap();
    assert!(report.to_string().contains("overlap_pct"), "{report}");
}

#[test]
fn synthetic_pipeline_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("synth");
    ok(&[
        "gen-synth",
        "--out",
        p(&data),
        "--seed",
        "1",
        "--train-per-style",
        "40",
        "--val-per-style",
        "10",
    ]);
    let manifest = data.join("manifest.jsonl");
    let semb = data.join("captions.semb");
    let (count, dim) = validate_semb(&fs::read(&semb).unwrap()).unwrap();
    assert!(count > 0 && dim == 32);

    let ckpt = dir.path().join("toy.ckpt");
    let trace = dir.path().join("trace.csv");
    let stdout = ok(&[
        "train-toy",
        "--manifest",
        p(&manifest),
        "--seed",
        "3",
        "--embeddings",
        p(&semb),
        "--out",
        p(&ckpt),
        "--trace",
        p(&trace),
        "--format",
        "csv",
    ]);
    assert!(stdout.starts_with("# resolved config"), "{stdout}");
    assert!(ckpt.exists());
    assert!(fs::read_to_string(&trace).unwrap().starts_with("epoch,"));

    let decoded = dir.path().join("decoded.jsonl");
    let decode_args = [
        "decode",
        "--checkpoint",
        p(&ckpt),
        "--manifest",
        p(&manifest),
        "--subset",
        "val",
        "--task",
        "AC",
        "--max-len",
        "20",
        "--out",
        p(&decoded),
    ];
    ok(&decode_args);
    let first = fs::read(&decoded).unwrap();
    ok(&decode_args);
    assert_eq!(
        first,
        fs::read(&decoded).unwrap(),
        "decode is not deterministic"
    );
    let records = jsonl(&decoded);
    assert_eq!(records.len(), 20);

    let candidates = dir.path().join("candidates.jsonl");
    let lines: Vec<String> = records
        .iter()
        .map(|r| serde_json::json!({"id": r["id"], "caption": r["caption"]}).to_string())
        .collect();
    fs::write(&candidates, lines.join("\n")).unwrap();
    let scores: Value = serde_json::from_str(&ok(&[
        "eval",
        "--candidates",
        p(&candidates),
        "--references",
        p(&manifest),
    ]))
    .unwrap();
    assert!(
        scores["corpus"]["cider_d"].as_f64().unwrap() >= 0.0,
        "{scores}"
    );
    assert_eq!(scores["items"].as_array().unwrap().len(), 20);

    let pairs = dir.path().join("pairs.jsonl");
    let stats = dir.path().join("stats.json");
    ok(&[
        "te-compare",
        "--checkpoint",
        p(&ckpt),
        "--manifest",
        p(&manifest),
        "--subset",
        "val",
        "--task-a",
        "AC",
        "--task-b",
        "CL",
        "--max-len",
        "20",
        "--out",
        p(&pairs),
        "--stats",
        p(&stats),
    ]);
    assert_eq!(jsonl(&pairs).len(), 20);
    let table = fs::read_to_string(&stats).unwrap();
    assert!(table.contains("mean_sent_len"), "{table}");
}

#[test]
fn fense_command_reads_a_handwritten_store() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = dir.path().join("refs.jsonl");
    fs::write(
        &manifest,
        r#"{"id":"c1","dataset":"AC","subset":"test","duration_sec":10.0,"captions":["a dog barks"]}"#,
    )
    .unwrap();
    let candidates = dir.path().join("cands.jsonl");
    fs::write(&candidates, r#"{"id":"c1","caption":"a dog barks"}"#).unwrap();
    let key = common::golden_key("a dog barks").unwrap();
    let semb = dir.path().join("e.semb");
    fs::write(&semb, common::semb_bytes(3, &[(key, vec![1.0, 2.0, 2.0])])).unwrap();

    let out: Value = serde_json::from_str(&ok(&[
        "fense",
        "--candidates",
        p(&candidates),
        "--references",
        p(&manifest),
        "--embeddings",
        p(&semb),
    ]))
    .unwrap();
    let text = out.to_string();
    assert!(text.contains("\"fense\""), "{text}");
    assert!(
        text.contains("1.0") || text.contains(":1,") || text.contains(":1}"),
        "{text}"
    );
}

#[test]
fn closed_stdout_is_not_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let mut child = Command::new(env!("CARGO_BIN_EXE_capkit"))
        .args([
            "gen-synth",
            "--seed",
            "1",
            "--out",
            p(&dir.path().join("s")),
        ])
        .stdout(std::process::Stdio::piped())
        .stderr(std::process::Stdio::piped())
        .spawn()
        .unwrap();
    drop(child.stdout.take());
    let out = child.wait_with_output().unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}
