use std::path::Path;
use std::process::{Command, Output};

fn focalnet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_focalnet")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn list_prints_gallery() {
    let o = focalnet(&["list"]);
    assert!(o.status.success());
    let names: Vec<String> = stdout(&o).lines().map(String::from).collect();
    assert!(names.contains(&"helicoid".to_string()) && names.contains(&"dini".to_string()));
    let src = stdout(&focalnet(&["list", "--source"]));
    assert!(src.contains("surface torus {"));
}

#[test]
fn helicoid_point_is_minimal_and_weingarten() {
    let o = focalnet(&["eval", "--surface", "helicoid", "--at", "0.3,1.0", "--json"]);
    assert!(o.status.success());
    let doc: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(doc["status"], "ok");
    assert_eq!(doc["values"]["flags"]["cmc"], true);
    assert_eq!(doc["values"]["flags"]["weingarten"], true);
    assert_eq!(doc["values"]["flags"]["moulding"], false);
}

#[test]
fn negative_coordinates_parse() {
    let o = focalnet(&["eval", "--surface", "helicoid", "--at", "-0.3,-1.0"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn sphere_point_is_umbilic() {
    let o = focalnet(&["eval", "--surface", "sphere", "--at", "0.1,0.2"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("status: umbilic"));
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        vec!["eval", "--surface", "helicoid"],
        vec!["eval", "--surface", "nope", "--at", "0,0"],
        vec!["eval", "--surface", "helicoid", "--param", "zz=1", "--at", "0,1"],
        vec!["eval", "--surface", "helicoid", "--file", "x.surf", "--at", "0,1"],
        vec!["check", "--suite", "everything"],
        vec!["mesh", "--surface", "plane", "--nu", "2", "--nv", "2", "--nets", "15", "--out", "x"],
        vec!["grid", "--surface", "plane", "--nu", "0", "--nv", "2", "--out", "x.json"],
    ] {
        assert_eq!(focalnet(&args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn file_source_with_parameter() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cyl.surf");
    std::fs::write(
        &path,
        "surface tube {\n  param r = 1\n  x = r * cos(u)\n  y = r * sin(u)\n  z = v + u * v / 4\n  domain u in [-1, 1] v in [-1, 1]\n}\n",
    )
    .unwrap();
    let o = focalnet(&["eval", "--file", path.to_str().unwrap(), "--param", "r=2", "--at", "0.2,0.3", "--json"]);
    let doc: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(doc["params"]["r"], 2.0);
    assert_eq!(doc["surface"], "tube");
}

#[test]
fn grid_writes_reproducible_reports() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let json = dir.path().join(format!("{name}.json"));
        let csv = dir.path().join(format!("{name}.csv"));
        let o = focalnet(&[
            "grid", "--surface", "dini", "--nu", "5", "--nv", "4", "--out", json.to_str().unwrap(), "--csv", csv.to_str().unwrap(),
        ]);
        assert!(o.status.success());
        (std::fs::read(json).unwrap(), std::fs::read_to_string(csv).unwrap())
    };
    let (a, csv) = run("a");
    let (b, _) = run("b");
    assert_eq!(a, b);
    let doc: serde_json::Value = serde_json::from_slice(&a).unwrap();
    assert_eq!(doc["schema"], 1);
    assert_eq!(doc["records"].as_array().unwrap().len(), 20);
    assert_eq!(csv.lines().count(), 21);
}

#[test]
fn degenerate_grid_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.json");
    let o = focalnet(&["grid", "--surface", "sphere", "--nu", "3", "--nv", "3", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(out.exists());
}

#[test]
fn check_suite_passes_and_tight_bound_fails() {
    let o = focalnet(&["check", "--suite", "structure"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("PASS structure/helicoid/codazzi"));
    assert!(text.contains("PASS structure/dini/gauss"));
    let o = focalnet(&["check", "--suite", "structure", "--tol", "1e-30"]);
    assert_eq!(o.status.code(), Some(1));
}

fn read_dir(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort();
    files
}

#[test]
fn mesh_export_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let o = focalnet(&[
            "mesh", "--surface", "graph_generic", "--nu", "6", "--nv", "5", "--central", "1,2", "--nets", "13,17", "--out",
            out.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let files = read_dir(&a);
    assert_eq!(files, read_dir(&b));
    let names: Vec<&str> = files.iter().map(|f| f.0.as_str()).collect();
    assert!(names.contains(&"surface.obj") && names.contains(&"manifest.json"));
    let surface = String::from_utf8(files.iter().find(|f| f.0 == "surface.obj").unwrap().1.clone()).unwrap();
    assert_eq!(surface.lines().filter(|l| l.starts_with("v ")).count(), 30);
    assert_eq!(surface.lines().filter(|l| l.starts_with("f ")).count(), 40);
}
