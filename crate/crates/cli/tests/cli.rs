use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn data(name: &str) -> String {
    let mut p = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    p.push("tests/data");
    p.push(name);
    p.display().to_string()
}

fn picalc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_picalc")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn json(args: &[&str]) -> (i32, Value) {
    let mut all = args.to_vec();
    all.extend(["--format", "json"]);
    let o = picalc(&all);
    (o.status.code().unwrap(), serde_json::from_slice(&o.stdout).expect("one JSON object"))
}

#[test]
fn check_rc_exit_codes() {
    let o = picalc(&["check-rc", &data("z2.txt")]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "RC holds");
    let (code, v) = json(&["check-rc", &data("conj_pair.txt")]);
    assert_eq!(code, 1);
    assert_eq!(v["violations"][0]["kind"], "ConjugatePair");
    assert_eq!(v["violations"][0]["relators"], serde_json::json!([0, 1]));
    let (code, v) = json(&["check-rc", &data("not_cr.txt")]);
    assert_eq!(code, 1);
    assert_eq!(v["violations"][0]["kind"], "NotCyclicallyReduced");
}

#[test]
fn input_errors_name_file_and_line() {
    let o = picalc(&["check-rc", &data("unknown.txt")]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("unknown.txt") && err.contains("line 4"), "{err}");
    let o = picalc(&["snf", &data("bad_m.txt")]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 1"));
    assert_eq!(picalc(&["check-rc", &data("missing.txt")]).status.code(), Some(2));
    assert_eq!(picalc(&["check-rc"]).status.code(), Some(2));
    let (code, v) = json(&["certificate", &data("z2.txt"), &data("bad_cert.json")]);
    assert_eq!(code, 2);
    assert!(v["error"].as_str().unwrap().contains("out of range"));
}

#[test]
fn small_cancellation_and_pieces() {
    let (code, v) = json(&["check-c", &data("comm.txt")]);
    assert_eq!(code, 1);
    assert_eq!(v["min_pieces"], serde_json::json!([4]));
    let (code, v) = json(&["check-c", &data("z2.txt")]);
    assert_eq!(code, 0);
    assert_eq!(v["min_pieces"], serde_json::json!([null]));
    let (_, v) = json(&["pieces", &data("comm.txt")]);
    assert_eq!(v["pieces"].as_array().unwrap().len(), 4);
    assert_eq!(picalc(&["stars-disjoint", &data("ab.txt"), &data("ba.txt")]).status.code(), Some(1));
    assert_eq!(picalc(&["stars-disjoint", &data("ab.txt"), &data("z2_free.txt")]).status.code(), Some(0));
}

#[test]
fn abelian_invariants() {
    let o = picalc(&["abelianization", &data("z2_free.txt")]);
    assert_eq!(stdout(&o).trim(), "rank 1, torsion [2]");
    let (_, v) = json(&["abelianization", &data("z2_free.txt")]);
    assert_eq!(v["free_rank"], 1);
    assert_eq!(v["torsion"], serde_json::json!([2]));
    let (_, v) = json(&["snf", &data("m.txt")]);
    assert_eq!(v["diagonal"], serde_json::json!([2, 4]));
}

#[test]
fn witness_and_certificates() {
    let (code, v) = json(&["witness", &data("z2.txt"), "--word", "a^4", "--max-factors", "4", "--max-conj", "2"]);
    assert_eq!(code, 0);
    assert_eq!(v["certificate"], serde_json::json!([["", 0, 1], ["", 0, 1]]));
    let (code, v) = json(&["witness", &data("z2.txt"), "--word", "a", "--jobs", "2"]);
    assert_eq!(code, 1);
    assert_eq!(v["verdict"], "refuted_by_abelianization");
    let (code, v) = json(&["witness", &data("z2_free.txt"), "--word", "b a b^-1 a^-1", "--max-factors", "2", "--max-conj", "1"]);
    assert_eq!(code, 1);
    assert_eq!(v["verdict"], "not_found_within");
    let (code, v) = json(&["certificate", &data("z2_free.txt"), &data("cert.json")]);
    assert_eq!(code, 0);
    assert_eq!(v["value"], "a^2 b a^-2 b^-1");
    assert_eq!(v["picture"]["vertices"].as_array().unwrap().len(), 2);
}

#[test]
fn pictures_end_to_end() {
    let (z2, disk, sphere) = (data("z2.txt"), data("disk_a2.json"), data("sphere.json"));
    assert_eq!(picalc(&["picture-validate", &z2, &disk]).status.code(), Some(0));
    assert_eq!(stdout(&picalc(&["picture-boundary", &z2, &disk])).trim(), "a^2");
    let (code, v) = json(&["glue", &z2, &disk, &z2, &disk]);
    assert_eq!(code, 0);
    let glued: Value = serde_json::from_str(&std::fs::read_to_string(&sphere).unwrap()).unwrap();
    assert_eq!(v["picture"], glued);
    let (_, v) = json(&["picture-dipoles", &z2, &sphere]);
    assert_eq!(v["folding_pairs"].as_array().unwrap().len(), 1);
    let (code, v) = json(&["picture-reduce", &z2, &sphere]);
    assert_eq!(code, 0);
    assert_eq!(v["emptied"], true);
    let trace: Value = serde_json::from_str(&std::fs::read_to_string(data("trace.json")).unwrap()).unwrap();
    assert_eq!(v["trace"], trace);
    let (code, v) = json(&["picture-reduce", &z2, &sphere, "--replay", &data("trace.json")]);
    assert_eq!(code, 0);
    assert_eq!(v["picture"]["vertices"], serde_json::json!([]));
    assert_eq!(picalc(&["picture-reduce", &z2, &disk]).status.code(), Some(2));
    assert_eq!(picalc(&["picture-validate", &data("comm.txt"), &sphere]).status.code(), Some(1));
}

#[test]
fn pictures_written_to_files() {
    let dir = std::env::temp_dir().join(format!("picalc-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let file = |n: &str| dir.join(n).display().to_string();
    let (z2, z2z2) = (data("z2_free.txt"), data("z2z2.txt"));
    let o = picalc(&["certificate", &z2, &data("cert.json"), "--out", &file("w1.json")]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("picture written to"));
    assert_eq!(picalc(&["certificate", &z2z2, &data("cert.json"), "--out", &file("w2.json")]).status.code(), Some(0));
    assert_eq!(stdout(&picalc(&["picture-boundary", &z2z2, &file("w2.json")])).trim(), "a^2 b a^-2 b^-1");
    let o = picalc(&[
        "glue", &z2, &file("w1.json"), &z2z2, &file("w2.json"), "--out", &file("s.json"), "--presentation-out", &file("u.txt"),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let union = std::fs::read_to_string(file("u.txt")).unwrap();
    assert_eq!(union.lines().filter(|l| *l == "a^2").count(), 1, "{union}");
    assert!(union.lines().any(|l| l == "b^2"), "{union}");
    assert_eq!(stdout(&picalc(&["check-rc", &file("u.txt")])).trim(), "RC holds");
    assert_eq!(picalc(&["picture-validate", &file("u.txt"), &file("s.json")]).status.code(), Some(0));
    let (code, v) = json(&["picture-reduce", &file("u.txt"), &file("s.json")]);
    assert_eq!(code, 0);
    assert_eq!(v["emptied"], true);
    let o = picalc(&["certificate", &z2, &data("cert.json"), "--out", &file("missing/w.json")]);
    assert_eq!(o.status.code(), Some(2));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn free_products_and_relative_words() {
    let (code, v) = json(&["fp-order", "--factor", "cyclic:2:a", "--factor", "z:b", "--element", "b a b^-1"]);
    assert_eq!(code, 0);
    assert_eq!(v, serde_json::json!({ "order": 2, "conjugator": "b", "element": "a" }));
    let table = format!("table:{}", data("z2_table.txt"));
    let (_, v) = json(&["fp-order", "--factor", &table, "--factor", "z:b", "--element", "s b"]);
    assert_eq!(v["order"], "infinite");
    let o = picalc(&["augment", "--factor", "cyclic:2:a", "--factor", "cyclic:3:c", "--element", "a c"]);
    assert_eq!(stdout(&o).trim(), "x1 {a} x1^-1 x2 {c} x2^-1");
    assert_eq!(picalc(&["augment", "--factor", "cyclic:2:a", "--element", "a"]).status.code(), Some(2));
    assert_eq!(picalc(&["rel-orientable", &data("selfinv.txt"), "--factor", "cyclic:4:a"]).status.code(), Some(1));
    assert_eq!(picalc(&["rel-orientable", &data("generic.txt"), "--factor", "cyclic:4:a"]).status.code(), Some(0));
}

#[test]
fn text_and_json_verdicts_agree() {
    let cases: Vec<Vec<String>> = vec![
        vec!["check-rc".into(), data("conj_pair.txt")],
        vec!["check-c".into(), data("comm.txt")],
        vec!["rel-orientable".into(), data("selfinv.txt"), "--factor".into(), "cyclic:4:a".into()],
        vec!["witness".into(), data("z2.txt"), "--word".into(), "a^2".into()],
    ];
    for c in cases {
        let args: Vec<&str> = c.iter().map(String::as_str).collect();
        let text = picalc(&args);
        let (code, _) = json(&args);
        assert_eq!(text.status.code(), Some(code), "{c:?}");
        assert_eq!(stdout(&text), stdout(&picalc(&args)));
    }
}
