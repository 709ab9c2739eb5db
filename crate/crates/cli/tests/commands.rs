use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const CYCLE: &str = "lang R/2\nsize 3\nR 1 2\nR 2 3\nR 3 1\n";
const EDGE: &str = "lang R/2\nsize 2\nR 1 2\n";
const HALF: &str = "lang R/2\nresolution 2\ncell R 1|2 * * 2\n";

fn structlim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_structlim"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn density_prints_lowest_terms() {
    let dir = TempDir::new().unwrap();
    let m = write(dir.path(), "m.struct", EDGE);
    let n = write(dir.path(), "n.struct", CYCLE);
    // Each of the three 2-subsets of the 3-cycle spans a single directed edge.
    assert_eq!(
        stdout(&structlim(&[
            "density",
            "--kind",
            "p",
            "-M",
            s(&m),
            "-N",
            s(&n)
        ])),
        "1/1\n"
    );
    assert_eq!(
        stdout(&structlim(&[
            "density",
            "--kind",
            "t",
            "-M",
            s(&m),
            "-N",
            s(&n)
        ])),
        "1/3\n"
    );
    assert_eq!(
        stdout(&structlim(&[
            "density",
            "--kind",
            "tind",
            "-M",
            s(&m),
            "-N",
            s(&n)
        ])),
        "1/2\n"
    );
}

#[test]
fn sampling_is_reproducible() {
    let dir = TempDir::new().unwrap();
    let f = write(dir.path(), "f.limit", HALF);
    let run = |name: &str| {
        let out = dir.path().join(name);
        let o = structlim(&[
            "sample",
            "--limit",
            s(&f),
            "--m",
            "9",
            "--seed",
            "42",
            "--out",
            s(&out),
        ]);
        assert!(o.status.success());
        fs::read(out).unwrap()
    };
    let (a, b) = (run("a.struct"), run("b.struct"));
    assert_eq!(a, b);
    assert!(String::from_utf8(a)
        .unwrap()
        .starts_with("lang R/2\nsize 9\n"));
}

#[test]
fn encode_decode_roundtrip_is_canonical() {
    let dir = TempDir::new().unwrap();
    // Out of order, with a loop and a comment.
    let n = write(
        dir.path(),
        "n.struct",
        "lang R/2 U/1\nsize 4\nR 3 3 # loop\nU 2\nR 4 1\nR 1 2\n",
    );
    let d = dir.path().join("n.dhyp");
    assert!(structlim(&["encode", "-N", s(&n), "--out", s(&d)])
        .status
        .success());
    let back = stdout(&structlim(&["decode", "-D", s(&d)]));
    assert_eq!(back, "lang R/2 U/1\nsize 4\nR 1 2\nR 3 3\nR 4 1\nU 2\n");
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    let bad = write(dir.path(), "bad.struct", "lang R/2\nsize 3\nR 4 1\n");
    let n = write(dir.path(), "n.struct", CYCLE);
    let o = structlim(&["density", "--kind", "p", "-M", s(&bad), "-N", s(&n)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));

    let other = write(dir.path(), "other.struct", "lang E/2\nsize 3\n");
    let o = structlim(&["density", "--kind", "p", "-M", s(&other), "-N", s(&n)]);
    assert_eq!(o.status.code(), Some(1));

    let missing = dir.path().join("missing.struct");
    let o = structlim(&["dist", "-M", s(&missing), "-N", s(&n)]);
    assert_eq!(o.status.code(), Some(1));

    assert_eq!(structlim(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn dist_and_limit_density() {
    let dir = TempDir::new().unwrap();
    let a = write(dir.path(), "a.struct", CYCLE);
    let b = write(dir.path(), "b.struct", "lang R/2\nsize 3\nR 1 2\nR 2 3\n");
    assert_eq!(
        stdout(&structlim(&["dist", "-M", s(&a), "-N", s(&b)])),
        "1/9\n"
    );

    let f = write(dir.path(), "f.limit", HALF);
    let sym = write(dir.path(), "sym.struct", "lang R/2\nsize 2\nR 1 2\nR 2 1\n");
    assert_eq!(
        stdout(&structlim(&[
            "limit-density",
            "--limit",
            s(&f),
            "-M",
            s(&sym)
        ])),
        "1/2\n"
    );
}

#[test]
fn remove_repairs_a_triangle() {
    let dir = TempDir::new().unwrap();
    let tri = "lang R/2\nsize 3\nR 1 2\nR 2 1\nR 1 3\nR 3 1\nR 2 3\nR 3 2\n";
    let pattern = write(dir.path(), "tri.struct", tri);
    let host = write(dir.path(), "host.struct", tri);
    let out = dir.path().join("fixed.struct");
    let o = structlim(&[
        "remove",
        "-N",
        s(&host),
        "--forbid",
        s(&pattern),
        "--out",
        s(&out),
    ]);
    let report = stdout(&o);
    assert!(
        report.starts_with("success=true iterations=1 d=1/9"),
        "{report}"
    );
    assert_eq!(fs::read_to_string(out).unwrap().lines().count(), 2 + 5);
}

#[test]
fn converge_and_experiments_write_csv() {
    let dir = TempDir::new().unwrap();
    let f = write(dir.path(), "f.limit", HALF);
    let csv = dir.path().join("conv.csv");
    let args = [
        "converge",
        "--limit",
        s(&f),
        "--k",
        "2",
        "--sizes",
        "4,6",
        "--trials",
        "20",
        "--seed",
        "3",
        "--out",
        s(&csv),
    ];
    assert!(structlim(&args).status.success());
    let text = fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("m,samples,type,pattern,"));
    // Two sizes times the 2 + 10 binary types of size at most 2.
    assert_eq!(text.lines().count(), 1 + 2 * 12);
    assert!(structlim(&args).status.success());
    assert_eq!(fs::read_to_string(&csv).unwrap(), text);

    let edge = write(dir.path(), "e.struct", "lang R/2\nsize 2\nR 1 2\nR 2 1\n");
    let exp = dir.path().join("exp.csv");
    let o = structlim(&[
        "removal-exp",
        "--forbid",
        s(&edge),
        "--eps",
        "0.1",
        "--trials",
        "4",
        "--limit",
        s(&f),
        "--m",
        "6",
        "--seed",
        "1",
        "--out",
        s(&exp),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = fs::read_to_string(&exp).unwrap();
    assert_eq!(rows.lines().count(), 1 + 4);

    let o = structlim(&[
        "hpcheck", "--n", "8", "--levels", "2", "--l", "2", "--seed", "5",
    ]);
    let line = stdout(&o);
    assert!(
        line.contains('/') && line.trim_end().split(' ').count() == 2,
        "{line}"
    );
}
