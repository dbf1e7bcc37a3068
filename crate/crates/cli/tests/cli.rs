use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

const ADDING: &str = "alphabet 2\na = (e, a) [1 0]\n";
const BOUNDED_PAIR: &str = "alphabet 2\ns = (e, e) [1 0]\nb = (s, b)\nc = (c, s)\n";
const ORDERS: &str = "alphabet 2\ns = (e, e) [1 0]\na = (e, a) [1 0]\nb = (a, b)\nc = (c, s)\n";

fn fixture(name: &str, text: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("arboreal-cli-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_arboreal")).args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn order_verdicts_and_exit_codes() {
    let f = fixture("orders.fr", ORDERS);
    let f = f.to_str().unwrap();
    let out = run(&["order", f, "a"]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).starts_with("infinite"));
    assert_eq!(code(&run(&["order", f, "a", "--assert-finite"])), 1);
    let out = run(&["order", f, "c"]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out).trim(), "2");
    let out = run(&["order", f, "b"]);
    assert!(stdout(&out).contains("--2-->"));
}

#[test]
fn conjugate_in_aut_emits_a_system() {
    let f = fixture("adding.fr", ADDING);
    let out = run(&["conjugate", f.to_str().unwrap(), "a", "a^-1", "--group", "aut", "--emit-conjugator"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    let system = &text[text.find("alphabet").unwrap()..];
    assert!(arboreal::parse_system(system).is_ok());
}

#[test]
fn restricted_groups() {
    let f = fixture("adding2.fr", ADDING);
    let f = f.to_str().unwrap();
    assert_eq!(code(&run(&["conjugate", f, "a", "a^-1", "--group", "pol0"])), 1);
    assert_eq!(code(&run(&["conjugate", f, "a", "a^-1", "--group", "pol-1"])), 1);
    assert_eq!(code(&run(&["conjugate", f, "a", "a^-1", "--group", "fsg"])), 0);
    let g = fixture("bc.fr", BOUNDED_PAIR);
    let g = g.to_str().unwrap();
    assert_eq!(code(&run(&["conjugate", g, "b", "c", "--group", "pol0"])), 0);
    assert_eq!(code(&run(&["conjugate", g, "b", "c", "--group", "polinf"])), 0);
    assert_eq!(code(&run(&["conjugate", g, "b", "c", "--group", "pol-1"])), 1);
}

#[test]
fn json_report_fields() {
    let f = fixture("bc2.fr", BOUNDED_PAIR);
    let out = run(&["--json", "conjugate", f.to_str().unwrap(), "b", "c", "--group", "pol0"]);
    assert_eq!(code(&out), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    for key in ["command", "inputs", "verdict", "witness", "caps", "version"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert_eq!(v["verdict"], "conjugate");
    assert_eq!(v["witness"]["machine_states"], 2);
    assert_eq!(v["inputs"]["file"]["sha256"].as_str().unwrap().len(), 64);
    let again = run(&["--json", "conjugate", f.to_str().unwrap(), "b", "c", "--group", "pol0"]);
    assert_eq!(stdout(&out), stdout(&again));
}

#[test]
fn dot_export() {
    let f = fixture("orders2.fr", ORDERS);
    let f = f.to_str().unwrap();
    let dot = fixture("c.dot", "");
    assert_eq!(code(&run(&["graph", "order", f, "c", "--dot", dot.to_str().unwrap()])), 0);
    let text = fs::read_to_string(&dot).unwrap();
    assert_eq!(text.lines().filter(|l| l.contains("->")).count(), 4);
    assert_eq!(code(&run(&["graph", "conj", f, "e", "e", "--dot", dot.to_str().unwrap()])), 0);
    let text = fs::read_to_string(&dot).unwrap();
    assert_eq!(text.lines().filter(|l| l.contains("[label=") && !l.contains("->")).count(), 2);
}

#[test]
fn other_commands() {
    let f = fixture("orders3.fr", ORDERS);
    let f = f.to_str().unwrap();
    assert_eq!(stdout(&run(&["classify", f, "b"])).trim(), "polynomial degree 1");
    assert_eq!(stdout(&run(&["act", f, "a", "11"])).trim(), "0,0");
    assert_eq!(code(&run(&["equal", f, "a*a^-1", "e"])), 0);
    assert_eq!(code(&run(&["equal", f, "a", "b"])), 1);
    assert_eq!(code(&run(&["os", f, "b"])), 0);
    assert_eq!(code(&run(&["nucleus", f, "a"])), 0);
    assert_eq!(stdout(&run(&["oracle", "trunc-order", f, "a", "--depth", "3"])).trim(), "8");
    assert_eq!(stdout(&run(&["oracle", "orbit-tree", f, "a", "--depth", "1"])).trim(), "(1 (2))");
    assert_eq!(code(&run(&["oracle", "verify", f, "e", "a", "b", "--depth", "3"])), 1);
    assert_eq!(code(&run(&["representative", f, "a", "--depth", "3"])), 0);
    let out = run(&["parse", f]);
    assert_eq!(code(&out), 0);
    assert!(arboreal::parse_system(&stdout(&out)).is_ok());
}

#[test]
fn simultaneous_pairs_file() {
    let f = fixture("adding3.fr", ADDING);
    let pairs = fixture("pairs.txt", "a*a a^-1*a^-1\n");
    let out = run(&[
        "conjugate",
        f.to_str().unwrap(),
        "a",
        "a^-1",
        "--simultaneous",
        pairs.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
}

#[test]
fn errors_exit_three() {
    let bad = fixture("bad.fr", "alphabet 2\na = (e, q)\n");
    assert_eq!(code(&run(&["parse", bad.to_str().unwrap()])), 3);
    assert_eq!(code(&run(&["parse", "/nonexistent/file.fr"])), 3);
    assert_eq!(code(&run(&["frobnicate"])), 3);
    let f = fixture("adding4.fr", ADDING);
    assert_eq!(code(&run(&["order", f.to_str().unwrap(), "zz"])), 3);
}
