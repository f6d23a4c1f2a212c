//! End-to-end tests of the `idx` binary: every subcommand plus the exit
//! code contract (0 ok, 1 usage, 2 input error, 3 correctness failure).

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn idx() -> Command {
    Command::new(env!("CARGO_BIN_EXE_idx"))
}

fn run(args: &[&str], cwd: &Path) -> Output {
    idx()
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).to_string()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).to_string()
}

fn tempdir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("idx-cli-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn parse_build_query_flow() {
    let dir = tempdir("flow");
    let out = run(
        &["gen", "tree", "--node-count", "300", "--seed", "3", "-o", "t.xml"],
        &dir,
    );
    assert!(out.status.success(), "{}", stderr(&out));

    let out = run(&["parse", "t.xml", "--stats"], &dir);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("nodes: 300"), "{text}");
    assert!(text.contains("distinct-label-paths:"), "{text}");

    let out = run(
        &["build", "t.xml", "--kind", "dataguide", "-o", "dg.json"],
        &dir,
    );
    assert!(out.status.success(), "{}", stderr(&out));

    let out = run(
        &["query", "--index", "dg.json", "--doc", "t.xml", "--path", "//a/b"],
        &dir,
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("exact: true"), "{text}");
    assert!(text.contains("count:"), "{text}");
}

#[test]
fn ak_query_validate_flag() {
    let dir = tempdir("ak");
    run(
        &["gen", "tree", "--node-count", "400", "--seed", "4", "-o", "t.xml"],
        &dir,
    );
    let out = run(
        &["build", "t.xml", "--kind", "ak", "--k", "1", "-o", "ak.json"],
        &dir,
    );
    assert!(out.status.success(), "{}", stderr(&out));

    // A long pattern is inexact without --validate and exact with it.
    let base = ["query", "--index", "ak.json", "--doc", "t.xml", "--path", "//a/a/a/a"];
    let plain = run(&base, &dir);
    assert!(plain.status.success());
    let mut with_validate: Vec<&str> = base.to_vec();
    with_validate.push("--validate");
    let validated = run(&with_validate, &dir);
    assert!(validated.status.success());
    assert!(stdout(&validated).contains("exact: true"));
}

#[test]
fn warehouse_flow_and_equivalence() {
    let dir = tempdir("wh");
    let out = run(
        &[
            "gen", "star", "--fact-count", "200", "--seed", "5", "--facts-out", "facts.xml",
            "--dims-out", "dims.xml",
        ],
        &dir,
    );
    assert!(out.status.success(), "{}", stderr(&out));

    let out = run(
        &["wh", "build-index", "--facts", "facts.xml", "--dims", "dims.xml", "-o", "index.xml"],
        &dir,
    );
    assert!(out.status.success(), "{}", stderr(&out));

    std::fs::write(
        dir.join("q.json"),
        r#"{"selections":[],"groupBy":[{"dim":"dim0","level":"level0","attr":"attr1"}],
            "aggregate":{"fn":"COUNT","measure":"m0"}}"#,
    )
    .unwrap();

    let with_joins = run(
        &["wh", "query", "--q", "q.json", "--facts", "facts.xml", "--dims", "dims.xml"],
        &dir,
    );
    assert!(with_joins.status.success(), "{}", stderr(&with_joins));
    let via_index = run(&["wh", "query", "--q", "q.json", "--index", "index.xml"], &dir);
    assert!(via_index.status.success(), "{}", stderr(&via_index));
    assert_eq!(stdout(&with_joins), stdout(&via_index));
}

#[test]
fn bench_writes_csv_and_json() {
    let dir = tempdir("bench");
    std::fs::write(
        dir.join("bench.json"),
        r#"{
            "scenarios": ["path-naive", "path-dataguide"],
            "seed": 6, "warmup": 0, "repetitions": 2,
            "tree": {"nodeCount": 200, "maxDepth": 8, "maxFanout": 5,
                     "labelAlphabetSize": 3, "seed": 6},
            "pathQueryCount": 3
        }"#,
    )
    .unwrap();
    let out = run(&["bench", "--config", "bench.json", "-o", "report.csv"], &dir);
    assert!(out.status.success(), "{}", stderr(&out));
    let csv = std::fs::read_to_string(dir.join("report.csv")).unwrap();
    assert!(csv.starts_with("scenario,corpus_size,index_kind,query,"));
    assert_eq!(csv.lines().count(), 1 + 6);
    let json = std::fs::read_to_string(dir.join("report.json")).unwrap();
    assert!(json.contains("\"rows\""));
}

#[test]
fn exit_codes_contract() {
    let dir = tempdir("codes");

    // 1: usage error (unknown flag).
    let out = run(&["parse", "--nope"], &dir);
    assert_eq!(out.status.code(), Some(1), "{}", stderr(&out));

    // 1: generator parameter out of range.
    let out = run(
        &["gen", "tree", "--node-count", "0", "-o", "t.xml"],
        &dir,
    );
    assert_eq!(out.status.code(), Some(1), "{}", stderr(&out));

    // 1: --kind ak requires --k.
    std::fs::write(dir.join("ok.xml"), "<a/>").unwrap();
    let out = run(&["build", "ok.xml", "--kind", "ak", "-o", "i.json"], &dir);
    assert_eq!(out.status.code(), Some(1), "{}", stderr(&out));

    // Flags may precede the positional input, as in
    // `idx build --kind dataguide IN.xml -o IDX.json`.
    let out = run(&["build", "--kind", "dataguide", "ok.xml", "-o", "i.json"], &dir);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));

    // 2: missing input file.
    let out = run(&["parse", "missing.xml"], &dir);
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));

    // 2: malformed XML with a position in the message.
    std::fs::write(dir.join("bad.xml"), "<a><b></a>").unwrap();
    let out = run(&["parse", "bad.xml"], &dir);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("line"), "{}", stderr(&out));

    // 0: --help.
    let out = run(&["--help"], &dir);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn doc_hash_mismatch_is_input_error() {
    let dir = tempdir("hash");
    run(&["gen", "tree", "--node-count", "50", "--seed", "1", "-o", "a.xml"], &dir);
    run(&["gen", "tree", "--node-count", "50", "--seed", "2", "-o", "b.xml"], &dir);
    let out = run(&["build", "a.xml", "--kind", "one", "-o", "one.json"], &dir);
    assert!(out.status.success());
    let out = run(
        &["query", "--index", "one.json", "--doc", "b.xml", "--path", "//a"],
        &dir,
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(
        stderr(&out).contains("built for document"),
        "{}",
        stderr(&out)
    );
}
