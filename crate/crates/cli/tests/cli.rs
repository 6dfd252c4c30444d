use std::path::Path;
use std::process::{Command, Output};

fn ludics(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ludics"))
        .args(args)
        .current_dir(dir)
        .env("LUDICS_COLOR", "0")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn fixture() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    let w = |name: &str, text: &str| std::fs::write(dir.path().join(name), text).unwrap();
    w("p.lud", "sig a/1 b/0; x0|a<b().#>");
    w("n.lud", "a(y).(y|b<>)");
    w("q.lud", "x0|b<>");
    w("cut.lud", "[a(y).(y|b<>)]|a<b().#>");
    w("left.mlud", "x := a(y).(y|b<>)\n");
    w("right.mlud", "pos := x|a<b().#>\n");
    w("bad.lud", "x0|a<");
    dir
}

#[test]
fn ortho_exit_codes() {
    let dir = fixture();
    let yes = ludics(dir.path(), &["ortho", "p.lud", "n.lud"]);
    assert_eq!(yes.status.code(), Some(0));
    assert!(stdout(&yes).contains("verdict: Orthogonal"));
    let no = ludics(dir.path(), &["ortho", "q.lud", "n.lud"]);
    assert_eq!(no.status.code(), Some(1));
    let bad = ludics(dir.path(), &["ortho", "bad.lud", "n.lud"]);
    assert_eq!(bad.status.code(), Some(2));
    let usage = ludics(dir.path(), &["ortho"]);
    assert_eq!(usage.status.code(), Some(2));
}

#[test]
fn report_echoes_command_and_bounds() {
    let dir = fixture();
    let o = ludics(dir.path(), &["interact", "p.lud", "n.lud", "--max-len", "9"]);
    let text = stdout(&o);
    assert!(text.starts_with("$ ludics interact p.lud n.lud --max-len 9\n"), "{text}");
    assert!(text.contains("max-len=9"));
    assert!(text.contains("path: x0|a<x0.1> b_x0.1() #"), "{text}");
}

#[test]
fn normalize_cut() {
    let dir = fixture();
    let o = ludics(dir.path(), &["normalize", "cut.lud", "--trace"]);
    let text = stdout(&o);
    assert_eq!(o.status.code(), Some(0), "{text}");
    assert!(text.contains("normal form: #"), "{text}");
    assert!(text.contains("redex:"), "{text}");
    assert!(String::from_utf8_lossy(&o.stderr).contains("time:"));
}

#[test]
fn paths_json_is_deterministic() {
    let dir = fixture();
    let a = ludics(dir.path(), &["paths", "n.lud", "--json"]);
    let b = ludics(dir.path(), &["paths", "n.lud", "--json"]);
    assert_eq!(a.stdout, b.stdout);
    let v: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["result"].as_array().unwrap().len(), 2);
    assert_eq!(v["bounds"]["max_len"], 16);
}

#[test]
fn tree_writes_dot() {
    let dir = fixture();
    let o = ludics(dir.path(), &["tree", "n.lud", "--dot", "t.dot"]);
    assert_eq!(o.status.code(), Some(0));
    let dot = std::fs::read_to_string(dir.path().join("t.dot")).unwrap();
    assert!(dot.starts_with("digraph"));
}

#[test]
fn minteract_runs() {
    let dir = fixture();
    let o = ludics(dir.path(), &["minteract", "left.mlud", "right.mlud"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("sequence: a_x(x.1) x.1|b<>"), "{}", stdout(&o));
}

#[test]
fn behaviour_checks() {
    let dir = fixture();
    let o = ludics(dir.path(), &["behaviour", "up(down(C b))", "regular", "--max-len", "10"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let o = ludics(dir.path(), &["behaviour", "C b", "member", "q.lud"]);
    assert!(stdout(&o).contains("verdict: Member"));
    let o = ludics(dir.path(), &["behaviour", "C b", "member", "p.lud"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("NotMember"));
}

#[test]
fn nat_incarnation_sizes() {
    let dir = fixture();
    let o = ludics(dir.path(), &["data", "Nat", "monotone", "--max-len", "8"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("incarnation sizes: [1, 4, 7, 10]"), "{}", stdout(&o));
}

#[test]
fn encode_nat() {
    let dir = fixture();
    let o = ludics(dir.path(), &["encode", "nat", "1"]);
    assert!(stdout(&o).contains("x0|p2<val(x1).(x1|p1<val(x2).(x2|n<>)>)>"), "{}", stdout(&o));
    let o = ludics(dir.path(), &["encode", "tree", "a[leaf]"]);
    assert_eq!(o.status.code(), Some(0));
    let o = ludics(dir.path(), &["encode", "nat", "x"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn func_verdicts() {
    let dir = fixture();
    let pure = ludics(dir.path(), &["func", "Bool (x) Bool"]);
    assert_eq!(pure.status.code(), Some(0));
    let impure = ludics(dir.path(), &["func", "(Bool -o Bool) -o Bool", "--witness", "--json"]);
    assert_eq!(impure.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_slice(&impure.stdout).unwrap();
    assert_eq!(v["result"]["agrees"], true);
    assert!(v["result"]["witness"]["path"].as_array().unwrap().len() > 2);
}
