mod common;

use std::path::PathBuf;

use serde_json::Value;

use shrubkit::bounds::chi;
use shrubkit::cli::run;
use shrubkit::els::{self, Thresholds};
use shrubkit::io;
use shrubkit::structures::Tree;
use shrubkit::treemodel;

use common::*;

struct Dir(PathBuf);

impl Dir {
    fn new(tag: &str) -> Dir {
        let d = std::env::temp_dir().join(format!("shrubkit-cli-{tag}-{}", std::process::id()));
        std::fs::create_dir_all(&d).unwrap();
        Dir(d)
    }

    fn file(&self, name: &str, body: &str) -> String {
        let p = self.0.join(name);
        std::fs::write(&p, body).unwrap();
        p.to_string_lossy().into_owned()
    }
}

impl Drop for Dir {
    fn drop(&mut self) {
        std::fs::remove_dir_all(&self.0).ok();
    }
}

fn call(args: &[&str]) -> (i32, String) {
    run(std::iter::once("shrubkit").chain(args.iter().copied()))
}

fn json(out: &str) -> Value {
    serde_json::from_str(out).unwrap()
}

#[test]
fn equiv_matches_the_documented_output() {
    let dir = Dir::new("equiv");
    let a = dir.file("a.json", r#"{"p":1,"tree":{"label":1,"children":[{"label":1},{"label":1},{"label":1}]}}"#);
    let b = dir.file("b.json", &io::tree_to_value(&Tree::star(1, 1, 4).unwrap()).to_string());
    assert_eq!(call(&["equiv", "--m", "1", &a, &b]), (0, r#"{"equivalent":true,"m":1}"#.to_string()));
    assert_eq!(call(&["equiv", "--m", "3", &a, &b]).0, 1);
    let g = dir.file("g.json", r#"{"p":1,"vertices":[{"id":"v0","label":1}],"edges":[]}"#);
    assert_eq!(call(&["equiv", "--m", "1", &a, &g]).0, 2);
}

#[test]
fn shrink_and_grow_are_thin_adapters() {
    let dir = Dir::new("adapters");
    let mut rng = rng(31);
    for k in 0..10 {
        let t = random_tree(&mut rng, 2, 2, 5);
        let path = dir.file(&format!("t{k}.json"), &io::tree_to_value(&t).to_string());
        let th = Thresholds::practical(1);
        let (code, out) = call(&["shrink", &path, "--m", "1", "--q", "1"]);
        assert_eq!(code, 0);
        let want = els::shrink(&t, 1, &th).unwrap();
        assert_eq!(io::tree_from_value(json(&out)["tree"].clone()).unwrap(), want);
        if let Ok((g, _)) = els::grow(&t, 2, 2, &Thresholds::practical(2)) {
            let (code, out) = call(&["grow", &path, "--m", "2", "--k", "2"]);
            assert_eq!(code, 0);
            assert_eq!(io::tree_from_value(json(&out)["tree"].clone()).unwrap(), g);
        }
    }
}

#[test]
fn model_commands_follow_the_library() {
    let dir = Dir::new("model");
    let mut rng = rng(37);
    for k in 0..10 {
        let tm = random_model(&mut rng, 5);
        let path = dir.file(&format!("m{k}.json"), &io::model_to_value(&tm).to_string());
        assert_eq!(call(&["validate", &path]), (0, r#"{"ok":true,"violations":[]}"#.to_string()));
        let g = treemodel::materialize(&tm).unwrap();
        assert_eq!(call(&["materialize", &path]).1, io::graph_to_value(&g).to_string());
        assert_eq!(call(&["materialize", &path, "--dot"]).1, g.to_dot().trim_end());
        assert_eq!(call(&["flatten", &path]).1, io::tree_to_value(&treemodel::flatten(&tm).unwrap()).to_string());
        let phi = "(exists1 x (exists1 y (E x y)))";
        let (code, out) = call(&["interpret", &path, phi, "--check"]);
        assert_eq!(code, 0);
        assert_eq!(json(&out)["graph"], json(&out)["tree"]);
    }
    let bad = dir.file(
        "bad.json",
        r#"{"r":2,"p":1,"d":1,"signature":[[1,2,1]],"tree":{"internal":true,"children":[{"leaf":[1,1]},{"leaf":[2,1]}]}}"#,
    );
    let (code, out) = call(&["validate", &bad]);
    assert_eq!(code, 2);
    assert!(out.contains("signature-symmetry"));
    assert_eq!(call(&["validate", &bad, "--symmetrize"]).0, 0);
}

#[test]
fn bounds_and_usage() {
    assert_eq!(call(&["bounds", "--fn", "chi", "--d", "1", "--p", "1", "--m", "1"]).1, chi(1, 1, 1).to_string());
    assert_eq!(call(&["bounds", "--fn", "chi", "--d", "1", "--p", "1", "--m", "1", "--json"]).1, r#"{"value":"tower(2, 1568)"}"#);
    assert_eq!(call(&["bounds", "--fn", "g", "--d", "1"]).1, "28");
    assert_eq!(call(&["census", "--d", "1", "--p", "1", "--m", "1", "--max-size", "3", "--unknown"]).0, 2);
    assert_eq!(call(&["frobnicate"]).0, 2);
    assert_eq!(call(&["shrink", "/nonexistent/tree.json", "--m", "1"]).0, 2);
}

#[test]
fn budget_exhaustion_exits_with_three() {
    let dir = Dir::new("budget");
    let t = dir.file("t.json", &io::tree_to_value(&Tree::star(1, 1, 5).unwrap()).to_string());
    let out = std::process::Command::new(env!("CARGO_BIN_EXE_shrubkit"))
        .args(["equiv", "--m", "2", &t, &t])
        .env("SHRUBKIT_BUDGET", "work=5")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("budget exceeded"));
}

#[test]
fn sequential_and_parallel_sweeps_agree() {
    let args = ["calibrate", "--d", "2", "--p", "2", "--m", "1", "--max-size", "6"];
    let seq = call(&args);
    let mut par = args.to_vec();
    par.extend(["--jobs", "3"]);
    assert_eq!(call(&par), seq);
    let census = ["census", "--d", "2", "--p", "1", "--m", "2", "--max-size", "7"];
    let mut census_par = census.to_vec();
    census_par.extend(["--jobs", "2"]);
    assert_eq!(call(&census), call(&census_par));
}
