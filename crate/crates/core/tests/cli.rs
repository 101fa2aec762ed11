use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use dpe::bench::{WORKED_X, WORKED_Y};

fn dpe(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dpe"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write_worked_pair(path: &Path) {
    let mut text = String::from("x,y\n");
    for (a, b) in WORKED_X.chars().zip(WORKED_Y.chars()) {
        text.push_str(&format!("{a},{b}\n"));
    }
    fs::write(path, text).unwrap();
}

#[test]
fn infer_reports_the_worked_example() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("pair.csv");
    write_worked_pair(&input);
    let graph = dir.path().join("graph.jsonl");
    let report = dir.path().join("report.txt");
    let o = dpe(&[
        "infer",
        "--input",
        input.to_str().unwrap(),
        "--binarize",
        "none",
        "--graph",
        graph.to_str().unwrap(),
        "--out",
        report.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&report).unwrap();
    assert!(text.contains("verdict: x_causes_y"));
    assert!(text.contains("h_bar X->Y: 0.074084"));
    assert!(text.contains("h_bar Y->X: 0.410896"));

    let lines: Vec<serde_json::Value> = fs::read_to_string(&graph)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(lines.len(), 11);
    assert_eq!(lines.iter().filter(|v| v["direction"] == "X->Y").count(), 8);
    assert_eq!(lines[0]["pattern"], "01");
}

#[test]
fn binarised_real_columns_give_the_same_verdict() {
    // real values whose midpoint split reproduces the worked bits
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("real.csv");
    let mut text = String::from("t,x,y\n");
    for (i, (a, b)) in WORKED_X.chars().zip(WORKED_Y.chars()).enumerate() {
        let x = if a == '1' { 3.5 } else { -1.0 };
        let y = if b == '1' { 12.0 } else { 10.0 };
        text.push_str(&format!("{i},{x},{y}\n"));
    }
    fs::write(&input, text).unwrap();
    for mode in ["equiwidth", "nonzero"] {
        let o = dpe(&[
            "infer",
            "--input",
            input.to_str().unwrap(),
            "--cols",
            "2,3",
            "--binarize",
            mode,
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        if mode == "equiwidth" {
            assert!(stdout(&o).contains("verdict: x_causes_y"));
        }
    }
}

#[test]
fn demo_prints_both_tables() {
    let o = dpe(&["demo-worked-example"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("dictionary: {011101, 11101, 00110011101, 01101}"));
    assert!(text.contains("average weighted entropy: 0.074084"));
    assert!(text.contains("average weighted entropy: 0.410896"));
}

#[test]
fn input_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.csv");
    assert_eq!(
        dpe(&["infer", "--input", missing.to_str().unwrap()])
            .status
            .code(),
        Some(1)
    );

    let ragged = dir.path().join("ragged.csv");
    fs::write(&ragged, "1,2\n3\n").unwrap();
    let o = dpe(&["infer", "--input", ragged.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("ragged.csv:2:"));

    assert_eq!(
        dpe(&["bench", "--family", "nope", "--out", "x.csv"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(dpe(&["no-such-command"]).status.code(), Some(1));
    assert_eq!(dpe(&["--help"]).status.code(), Some(0));
}

#[test]
fn bench_writes_csv_and_jsonl() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("r.csv");
    let o = dpe(&[
        "bench",
        "--family",
        "delay",
        "--trials",
        "5",
        "--values",
        "1,2",
        "--seed",
        "3",
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "family,parameter,value,method,trials,correct,independent,accuracy,mean_hbar_xy,mean_hbar_yx,variant"
    );
    assert_eq!(lines.count(), 8);

    let jsonl = dir.path().join("r.jsonl");
    let o = dpe(&[
        "bench",
        "--family",
        "tent",
        "--methods",
        "dpe",
        "--trials",
        "3",
        "--values",
        "0.5",
        "--format",
        "jsonl",
        "--out",
        jsonl.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let row: serde_json::Value =
        serde_json::from_str(fs::read_to_string(&jsonl).unwrap().trim()).unwrap();
    assert_eq!(row["family"], "tent");
    assert_eq!(row["trials"], 3);
}

#[test]
fn genomic_counts_hypotheses() {
    let dir = tempfile::tempdir().unwrap();
    let reference = dir.path().join("rs.fasta");
    let cw = dir.path().join("cw.fasta");
    let candidates = dir.path().join("cands");
    fs::create_dir(&candidates).unwrap();
    fs::write(&reference, ">rs\nACGTACGTTGCAACGTAGCTAGCTAGGATCCA\n").unwrap();
    fs::write(&cw, ">cw\nACGTACGATGCAACGTAGCTTGCTAGGATCCA\n").unwrap();
    fs::write(
        candidates.join("a.fasta"),
        ">s1\nACGTACGTTGCAACGAAGCTAGCTAGGATCCA\n>s2\nACGAACGATGCAACGTAGCTTGCTAGGTTCCA\n",
    )
    .unwrap();
    fs::write(candidates.join("b.fa"), ">s3\nNN\n").unwrap();
    fs::write(candidates.join("notes.txt"), "ignored").unwrap();
    let out = dir.path().join("g.csv");
    let o = dpe(&[
        "genomic",
        "--reference",
        reference.to_str().unwrap(),
        "--cw",
        cw.to_str().unwrap(),
        "--candidates",
        candidates.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&out).unwrap();
    let row = text.lines().nth(1).unwrap();
    assert!(row.starts_with("cands,2,1,"), "{row}");
}
