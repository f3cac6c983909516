use std::process::{Command, Output};

use sepvar::kernel::CRat;
use sepvar::star::Builtin;

fn sepvar(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sepvar")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).trim().to_string()
}

#[test]
fn eval_closed_forms() {
    let o = sepvar(&["eval", "--m", "1", "--nu-max", "2", "star(zb1, z1)"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "z1*zb1 + nu");
    assert_eq!(stdout(&sepvar(&["eval", "--m", "1", "berezin(z1*zb1)"])), "z1*zb1 + nu");
    assert_eq!(stdout(&sepvar(&["eval", "--m", "1", "star(1, 1)"])), "1");
    // z̄^2 ⋆ z^2 = z^2 z̄^2 + 4ν z z̄ + 2ν²
    assert_eq!(stdout(&sepvar(&["eval", "--m", "1", "star(zb1^2, z1^2)"])), "z1^2*zb1^2 + 4*nu*z1*zb1 + 2*nu^2");
    let two = sepvar(&["eval", "--m", "2", "star(zb2, z2) - star(z2, zb2)"]);
    assert_eq!(stdout(&two), "nu");
}

#[test]
fn eval_curved() {
    // on the disc z̄ ⋆ z = z z̄ + ν(1 − z z̄)² through the first order
    let o = sepvar(&["eval", "--potential", "hyperbolic", "--m", "1", "--nu-max", "1", "star(zb1, z1)"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "z1*zb1 + nu*z1^2*zb1^2 - 2*nu*z1*zb1 + nu");
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(sepvar(&["eval", "z1"]).status.code(), Some(2));
    assert_eq!(sepvar(&["eval", "--m", "1", "star(z1,"]).status.code(), Some(2));
    let o = sepvar(&["eval", "--m", "1", "star(z1,"]);
    assert!(String::from_utf8_lossy(&o.stderr).contains("byte 8"));
    assert_eq!(sepvar(&["verify", "--m", "1", "--suite", "bogus"]).status.code(), Some(2));
    assert_eq!(sepvar(&["verify", "--m", "1", "--mutate", "bogus"]).status.code(), Some(2));
    assert_eq!(sepvar(&["verify", "--m", "1", "--nu-max", "0"]).status.code(), Some(2));
    assert_eq!(sepvar(&["verify", "--potential", "/no/such/file.json", "--m", "1"]).status.code(), Some(2));
    assert_eq!(sepvar(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn potentials_list() {
    let o = sepvar(&["potentials", "list"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    for b in Builtin::ALL {
        assert!(s.contains(b.name()));
    }
}

#[test]
fn verify_report_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for p in [&a, &b] {
        let o = sepvar(&["verify", "--m", "1", "--l", "2", "--suite", "main-theorem", "--seed", "11", "--out", p.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let ja = std::fs::read(&a).unwrap();
    assert_eq!(ja, std::fs::read(&b).unwrap());
    let v: serde_json::Value = serde_json::from_slice(&ja).unwrap();
    assert_eq!(v["schema_version"], 1);
    let checks = v["checks"].as_array().unwrap();
    let golden = checks.iter().find(|c| c["name"] == "main-theorem/golden").unwrap();
    assert_eq!(golden["residual"], "zero");
    assert_eq!(golden["detail"], "lhs nu^2 rhs nu^2");
    assert!(checks.iter().all(|c| c.get("anchor").is_some() && c.get("window").is_some()));
    assert!(checks.iter().all(|c| c.get("runtime_ms").is_none()));
}

#[test]
fn lemma_suites_pass_and_flip_fails() {
    let o = sepvar(&["verify", "--m", "1", "--suite", "lemmas"]);
    assert_eq!(o.status.code(), Some(0));
    let o = sepvar(&["verify", "--m", "1", "--suite", "berezin", "--mutate", "orientation-flip"]);
    assert_eq!(o.status.code(), Some(1));
    let o = sepvar(&["verify", "--m", "1", "--suite", "structural", "--mutate", "perturb-phase"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn potential_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cubic.json");
    let p = Builtin::Flat.potential(1, 8).perturbed(CRat::from_ratio(1, 2));
    std::fs::write(&path, serde_json::to_string(&p.to_file()).unwrap()).unwrap();
    let path = path.to_str().unwrap();
    let o = sepvar(&["eval", "--potential", path, "--nu-max", "1", "--deg-max", "5", "star(zb1, z1)"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).contains("weight 3"));
    // g = 1 + z + z̄ and z̄ ⋆ z = zz̄ + ν/g + O(ν²)
    assert_eq!(stdout(&o), "z1*zb1 - nu*z1 - nu*zb1 + nu");
    assert_eq!(sepvar(&["eval", "--potential", path, "--m", "2", "1"]).status.code(), Some(2));
    let o = sepvar(&["verify", "--potential", path, "--suite", "berezin"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
}
