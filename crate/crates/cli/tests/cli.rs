use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name).to_string_lossy().into_owned()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tropicast")).args(args).env_remove("TROPICAST_SEED").output().unwrap()
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn tmp(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("tropicast-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn four_lines_have_28_self_intersections() {
    let v = json(&run(&["selfint", "--curve", &data("four_lines.json"), "--matrix", "1 0 1; 0 1 2"]));
    assert_eq!(v["count"], 28);
    assert_eq!(v["schema"], "tropicast/1");
    let p = &v["points"][0];
    assert!(p["pt"][0].is_string());
    assert!(["ray", "edge"].contains(&p["kinds"][0].as_str().unwrap()));
}

#[test]
fn cube_fiber_polytope_is_a_hexagon() {
    let out = run(&["fiber", "--polytope", &data("cube.json"), "--psi", "1 1 1"]);
    let v = json(&out);
    assert_eq!(v["vertices"].as_array().unwrap().len(), 6);
    assert_eq!(v["vertices"][0], serde_json::json!(["1/2", "3/2", "5/2"]));
    assert_eq!(v["source"], "plain");
    let doc: tropicast::io::FiberJson = serde_json::from_slice(&out.stdout).unwrap();
    let back = tropicast::io::FiberJson::from_fiber(&doc.to_fiber().unwrap());
    assert_eq!(back, doc);
}

#[test]
fn mixed_fiber_of_two_segments() {
    let v = json(&run(&["mixedfiber", "--polytopes", &data("segment_x.json"), &data("segment_y.json"), "--psi", "1 1 0"]));
    assert_eq!(v["source"], "mixed");
    assert_eq!(v["factors"], serde_json::json!([0, 1]));
}

#[test]
fn sweep_is_deterministic_and_within_bound() {
    let a = run(&["sweep", "--family", "caterpillar", "--n", "4", "--trials", "200", "--seed", "3"]);
    let b = run(&["sweep", "--family", "caterpillar", "--n", "4", "--trials", "200", "--seed", "3"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("n,trial,count,bound,ok"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 200);
    assert!(rows.iter().all(|r| r[4] == "true" && r[3] == "3"));
    assert_eq!(rows.iter().map(|r| r[2].parse::<usize>().unwrap()).max(), Some(3));
}

#[test]
fn environment_seed_overrides_flag() {
    let with_env = Command::new(env!("CARGO_BIN_EXE_tropicast"))
        .args(["sweep", "--n", "3", "--trials", "5", "--seed", "1"])
        .env("TROPICAST_SEED", "9")
        .output()
        .unwrap();
    let flag = run(&["sweep", "--n", "3", "--trials", "5", "--seed", "9"]);
    assert_eq!(with_env.stdout, flag.stdout);
}

#[test]
fn monomial_map_dual_subdivision() {
    let svg = tmp("dual.svg");
    let v = json(&run(&[
        "dualsub",
        "--curve",
        &data("planes.json"),
        "--matrix",
        "1 2 0; 0 1 1",
        "--compare",
        &data("planes_compare.json"),
        "--svg",
        svg.to_str().unwrap(),
    ]));
    assert_eq!(v["count"], 1);
    assert_eq!(v["dual_subdivision"]["matches_pushforward"], true);
    let ps: Vec<u64> = v["dual_subdivision"]["cells"].as_array().unwrap().iter().map(|c| c["p"].as_u64().unwrap()).collect();
    assert_eq!(ps.iter().filter(|&&p| p == 2).count(), 1);
    let text = std::fs::read_to_string(svg).unwrap();
    assert!(text.contains("p=2"));
}

#[test]
fn selfint_svg_marks_points() {
    let svg = tmp("four.svg");
    json(&run(&["selfint", "--curve", &data("four_lines.json"), "--matrix", "1 0 1; 0 1 2", "--svg", svg.to_str().unwrap()]));
    let text = std::fs::read_to_string(svg).unwrap();
    assert!(text.starts_with("<svg"));
    assert_eq!(text.matches("class=\"sip\"").count(), 28);
}

#[test]
fn caterpillar_output_round_trips() {
    let v = json(&run(&["caterpillar", "--n", "5"]));
    assert_eq!(v["count"], 6);
    assert_eq!(v["bound"], 6);
    let line: tropicast::io::LineJson = serde_json::from_value(v["line"].clone()).unwrap();
    let parsed = line.to_line().unwrap();
    assert_eq!(tropicast::io::LineJson::from_line(&parsed), line);
    // the emitted line is itself a valid curve input
    let path = tmp("line.json");
    std::fs::write(&path, serde_json::to_string(&v["line"]).unwrap()).unwrap();
    let m: Vec<String> = v["matrix"].as_array().unwrap().iter().map(|r| r.as_array().unwrap().iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")).collect();
    let s = json(&run(&["selfint", "--curve", path.to_str().unwrap(), "--matrix", &m.join("; ")]));
    assert_eq!(s["count"], 6);
}

#[test]
fn tropicalize_and_hypersurface_round_trip() {
    let path = tmp("poly.json");
    std::fs::write(&path, r#"{"n_vars":2,"terms":[{"exp":[1,0],"coeff":"4"},{"exp":[0,1],"coeff":"1/2"},{"exp":[0,0],"coeff":"3"}]}"#).unwrap();
    let out = run(&["tropicalize", "--poly", path.to_str().unwrap(), "--prime", "2"]);
    let v = json(&out);
    let vals: Vec<&str> = v["terms"].as_array().unwrap().iter().map(|t| t["val"].as_str().unwrap()).collect();
    assert_eq!(vals, ["2", "-1", "0"]);
    let doc: tropicast::io::PolynomialJson = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(tropicast::io::PolynomialJson::from_poly(&doc.to_poly().unwrap()), doc);

    std::fs::write(&path, &out.stdout).unwrap();
    let h = run(&["hypersurface", "--poly", path.to_str().unwrap()]);
    let c: tropicast::io::ComplexJson = serde_json::from_slice(&h.stdout).unwrap();
    assert_eq!(c.vertices.len(), 1);
    assert_eq!(serde_json::to_value(&c).unwrap(), json(&h));
}

#[test]
fn intersect_reports_decompositions() {
    let v = json(&run(&["intersect", "--system", &data("planes.json")]));
    assert_eq!(v["is_proper"], true);
    assert!(v["cells"].as_array().unwrap().iter().all(|c| c["decomposition"].as_array().unwrap().len() == 2));
}

#[test]
fn degenerate_projection_exits_with_2() {
    let out = run(&["selfint", "--curve", &data("planes.json"), "--matrix", "1 0 0; 0 1 0"]);
    assert_eq!(out.status.code(), Some(2));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["schema"], "tropicast/1");
    assert_eq!(err["error"], "projection");
}

#[test]
fn usage_errors_exit_with_1() {
    assert_eq!(run(&["selfint", "--curve", "missing.json", "--matrix", "1 0 0; 0 1 0"]).status.code(), Some(1));
    assert_eq!(run(&["selfint", "--curve", &data("four_lines.json"), "--matrix", "1 x"]).status.code(), Some(1));
    assert_eq!(run(&["sweep", "--family", "snowflake", "--n", "4"]).status.code(), Some(1));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}
