use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn cssp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cssp")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn corpus() -> TempDir {
    let dir = TempDir::new().unwrap();
    let out = cssp(&["gen-corpus", "-o", dir.path().to_str().unwrap(), "--random", "2"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    dir
}

fn file(dir: &Path, name: &str) -> String {
    dir.join(name).to_str().unwrap().to_string()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

#[test]
fn gen_corpus_writes_every_graph() {
    let dir = corpus();
    for name in ["k2", "k3", "k4", "p3", "c5", "petersen", "gnp4_20240101", "gnp4_20240102"] {
        assert!(dir.path().join(format!("{name}.col")).exists(), "{name}");
    }
    let k3 = fs::read_to_string(dir.path().join("k3.col")).unwrap();
    assert!(k3.contains("p edge 3 3\ne 1 2\ne 1 3\ne 2 3\n"));
}

#[test]
fn reduce_k3() {
    let dir = corpus();
    let inst = file(dir.path(), "k3.inst");
    let out = cssp(&["reduce", "-i", &file(dir.path(), "k3.col"), "-o", &inst]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.starts_with("n 3\nm 3\nt 1/864\ntau_sq "), "{text}");
    let body = fs::read_to_string(&inst).unwrap();
    assert!(body.starts_with("cssp-instance v1\nn 3 m 3 k 3\nt 1/864\n"));
    let cols: std::collections::BTreeSet<&str> =
        body.lines().skip(4).filter_map(|l| l.split_whitespace().nth(1)).collect();
    assert_eq!(cols.len(), 12);
}

#[test]
fn decide_reports() {
    let dir = corpus();
    for g in ["k3", "k4"] {
        let out = cssp(&["reduce", "-i", &file(dir.path(), &format!("{g}.col")), "-o", &file(dir.path(), &format!("{g}.inst"))]);
        assert_eq!(out.status.code(), Some(0));
    }
    let yes = cssp(&["decide", "-i", &file(dir.path(), "k3.inst"), "--mode", "exact-full"]);
    assert_eq!(yes.status.code(), Some(0));
    let text = stdout(&yes);
    assert!(text.starts_with("decision YES\ndelta_sq "), "{text}");
    assert!(text.contains("\nselection v1^1 v2^2 v3^3\nsubsets 220\nmode exact-full\n"), "{text}");

    let no = cssp(&["decide", "-i", &file(dir.path(), "k4.inst"), "--mode", "exact-structured"]);
    assert_eq!(no.status.code(), Some(0));
    assert!(stdout(&no).starts_with("decision NO\n"));
    assert!(stdout(&no).contains("delta_sq_kind upper-bound\n"));

    let greedy = cssp(&["decide", "-i", &file(dir.path(), "k3.inst"), "--mode", "greedy"]);
    assert_eq!(greedy.status.code(), Some(0));
    assert!(stdout(&greedy).contains("mode greedy\n"));
}

#[test]
fn petersen_full_enumeration_hits_the_cap() {
    let dir = corpus();
    let inst = file(dir.path(), "petersen.inst");
    assert_eq!(cssp(&["reduce", "-i", &file(dir.path(), "petersen.col"), "-o", &inst]).status.code(), Some(0));
    let out = cssp(&["decide", "-i", &inst, "--mode", "exact-full"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stdout(&out).is_empty());
    assert!(stderr(&out).contains("3190187286"), "{}", stderr(&out));
}

#[test]
fn input_errors_exit_2() {
    let dir = TempDir::new().unwrap();
    let self_loop = write(dir.path(), "loop.col", "p edge 3 1\ne 1 1\n");
    let out = cssp(&["reduce", "-i", self_loop.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("self-loop"));

    let empty = write(dir.path(), "empty.col", "c no edges\np edge 3 0\n");
    let out = cssp(&["reduce", "-i", empty.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("reduction requires m ≥ 1"), "{}", stderr(&out));

    let garbage = write(dir.path(), "junk.col", "\u{0}\u{1} not a graph");
    assert_eq!(cssp(&["color", "-i", garbage.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(cssp(&["decide", "-i", garbage.to_str().unwrap()]).status.code(), Some(2));
    let missing = dir.path().join("missing.col");
    assert_eq!(cssp(&["verify", "-i", missing.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(cssp(&["decide", "--mode", "quantum"]).status.code(), Some(2));
    assert_eq!(cssp(&[]).status.code(), Some(2));
}

#[test]
fn verify_color_and_lemmas() {
    let dir = corpus();
    let out = cssp(&["verify", "-i", &file(dir.path(), "k3.col")]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).ends_with("VERDICT PASS\n"));

    let out = cssp(&["verify", "-i", &file(dir.path(), "k4.col"), "--mode", "full"]);
    assert!(stdout(&out).contains("CHECK theorem_full k4 PASS"), "{}", stdout(&out));

    let out = cssp(&["color", "-i", &file(dir.path(), "k4.col")]);
    assert_eq!(stdout(&out), "no three-coloring\n");
    let out = cssp(&["color", "-i", &file(dir.path(), "c5.col")]);
    assert_eq!(stdout(&out), "three-coloring\nv1 1\nv2 2\nv3 1\nv4 2\nv5 3\n");

    let out = cssp(&["check-lemmas", "-i", &file(dir.path(), "k3.col")]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.lines().filter(|l| l.starts_with("CHECK")).all(|l| l.contains(" PASS ")), "{text}");
    assert!(text.ends_with("VERDICT PASS\n"));
}

#[test]
fn outputs_are_deterministic() {
    let a = corpus();
    let b = corpus();
    for name in ["k4.col", "gnp4_20240101.col", "gnp4_20240102.col"] {
        assert_eq!(fs::read(a.path().join(name)).unwrap(), fs::read(b.path().join(name)).unwrap());
    }
    let run = || {
        let r = cssp(&["reduce", "-i", &file(a.path(), "p3.col")]);
        let inst = write(a.path(), "p3.inst", &stdout(&r));
        (stdout(&r), stdout(&cssp(&["decide", "-i", inst.to_str().unwrap()])))
    };
    assert_eq!(run(), run());
}
