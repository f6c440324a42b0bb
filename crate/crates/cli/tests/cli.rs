use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn subsum(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_subsum")).args(args).output().expect("spawn subsum")
}

fn path(dir: &TempDir, name: &str) -> String {
    dir.path().join(name).to_string_lossy().into_owned()
}

fn write(dir: &TempDir, name: &str, text: &str) -> String {
    let p = path(dir, name);
    fs::write(&p, text).unwrap();
    p
}

fn read(p: &str) -> String {
    fs::read_to_string(Path::new(p)).unwrap()
}

#[test]
fn run_writes_one_line_per_query() {
    let dir = TempDir::new().unwrap();
    let trace = write(&dir, "t.txt", "mode subset-sum\ntmax 10\n+ 3\n? 8\n+ 5\n? 8\n? 0\n");
    for engine in ["dynamic", "offline", "naive"] {
        let out = path(&dir, &format!("{engine}.ans"));
        let o = subsum(&["run", "--engine", engine, "--trace", &trace, "--out", &out]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        assert_eq!(read(&out), "N\nY\nY\n");
    }
    let o = subsum(&["run", "--engine", "naive", "--trace", &trace]);
    assert_eq!(String::from_utf8_lossy(&o.stdout), "N\nY\nY\n");
}

#[test]
fn answers_are_byte_identical_across_runs() {
    let dir = TempDir::new().unwrap();
    let trace = path(&dir, "g.txt");
    let o = subsum(&["gen", "--mode", "subset-sum", "--bound", "200", "--oprs", "400", "--seed", "3", "--out", &trace]);
    assert_eq!(o.status.code(), Some(0));
    let a = path(&dir, "a.ans");
    let b = path(&dir, "b.ans");
    for out in [&a, &b] {
        let o = subsum(&["run", "--engine", "dynamic", "--trace", &trace, "--seed", "9", "--out", out]);
        assert_eq!(o.status.code(), Some(0));
    }
    assert_eq!(read(&a), read(&b));
    assert!(!read(&a).is_empty());
}

#[test]
fn gen_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let a = path(&dir, "a.txt");
    let b = path(&dir, "b.txt");
    for out in [&a, &b] {
        let o = subsum(&[
            "gen", "--mode", "3sum", "--bound", "20", "--oprs", "50", "--seed", "1", "--query-ratio", "0.3",
            "--delete-ratio", "0.2", "--out", out,
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    }
    assert_eq!(read(&a), read(&b));
}

#[test]
fn verify_passes_on_generated_traces() {
    let dir = TempDir::new().unwrap();
    for (mode, extra) in [("subset-sum", vec![]), ("3sum", vec!["--delete-ratio", "0.2"]), ("ksum", vec!["--k", "4"])] {
        let trace = path(&dir, &format!("{mode}.txt"));
        let mut args = vec!["gen", "--mode", mode, "--bound", "15", "--oprs", "60", "--seed", "2", "--out", &trace];
        args.extend(extra);
        assert_eq!(subsum(&args).status.code(), Some(0));
        let o = subsum(&["verify", "--trace", &trace]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    }
}

#[test]
fn bench_csv_has_one_row_per_pair() {
    let dir = TempDir::new().unwrap();
    let t1 = write(&dir, "one.txt", "mode subset-sum\ntmax 10\n+ 3\n? 3\n");
    let t2 = write(&dir, "two.txt", "mode subset-sum\ntmax 20\n+ 7\n? 14\n");
    let csv = path(&dir, "out.csv");
    let o = subsum(&["bench", "--traces", &t1, &t2, "--engines", "dynamic,naive", "--csv", &csv]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = read(&csv);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "engine,trace,ops,total_ns,amortized_ns,rebuilds");
    assert_eq!(lines.len(), 5);
    assert!(lines[1].starts_with("dynamic,one.txt,2,"));
    assert!(lines[4].starts_with("naive,two.txt,2,"));
}

#[test]
fn reduce_writes_subset_sum_trace() {
    let dir = TempDir::new().unwrap();
    let trace = write(&dir, "k.txt", "mode ksum\nrmax 10\nk 3\n+ 1 5\n+ 3 5\n?\n");
    let out = path(&dir, "r.txt");
    let o = subsum(&["reduce", "--trace", &trace, "--out", &out]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = read(&out);
    assert!(text.contains("tmax 2820"));
    assert!(text.contains("+ 845"));
    assert!(text.contains("+ 1075"));
    assert!(text.contains("? 2820"));
    let ans = path(&dir, "r.ans");
    assert_eq!(subsum(&["run", "--engine", "dynamic", "--trace", &out, "--out", &ans]).status.code(), Some(0));
    assert_eq!(read(&ans), "N\n");
}

#[test]
fn errors_exit_with_two() {
    let dir = TempDir::new().unwrap();
    let missing = path(&dir, "missing.txt");
    assert_eq!(subsum(&["run", "--engine", "naive", "--trace", &missing]).status.code(), Some(2));
    let bad = write(&dir, "bad.txt", "mode subset-sum\ntmax 10\n* 3\n");
    assert_eq!(subsum(&["verify", "--trace", &bad]).status.code(), Some(2));
    let good = write(&dir, "good.txt", "mode subset-sum\ntmax 10\n+ 3\n");
    assert_eq!(subsum(&["run", "--engine", "3sum", "--trace", &good]).status.code(), Some(2));
    assert_eq!(subsum(&["run", "--engine", "warp", "--trace", &good]).status.code(), Some(2));
}
