use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn hodgebench(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hodgebench"))
        .args(args)
        .current_dir(dir)
        .env_remove("HODGEBENCH_OUT")
        .output()
        .expect("binary runs")
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

#[test]
fn sphere_suite_reports_equalities_and_embeds_config() {
    let dir = tempfile::tempdir().unwrap();
    let out = hodgebench(&["bounds", "--suite", "spheres", "--out", "o"], dir.path());
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report = json(&dir.path().join("o/bounds.json"));
    assert_eq!(report["tool"], "hodgebench");
    assert_eq!(report["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(report["config"]["suite"], "spheres");
    let verdicts = report["result"]["verdicts"].as_array().unwrap();
    assert!(!verdicts.is_empty());
    for v in verdicts {
        assert_ne!(v["state"], "violated", "{v}");
        let name = v["name"].as_str().unwrap();
        if name == "main_lower_bound" || name == "xia_bound" || name == "special_killing_relation" {
            assert!(v["tightness"].as_f64().unwrap() <= 1e-12, "{v}");
        }
    }
    let summary = std::fs::read_to_string(dir.path().join("o/bounds_summary.txt")).unwrap();
    assert!(summary.starts_with(&format!("# hodgebench {} config=", env!("CARGO_PKG_VERSION"))));
}

#[test]
fn degree_p_upper_bound_is_sharp_at_middle_degree() {
    let dir = tempfile::tempdir().unwrap();
    let out = hodgebench(&["bounds", "--suite", "spheres", "--theorem", "upper-p", "--out", "o"], dir.path());
    assert_eq!(code(&out), 0);
    let report = json(&dir.path().join("o/bounds.json"));
    let verdicts = report["result"]["verdicts"].as_array().unwrap();
    let mut sharp = 0;
    for v in verdicts {
        assert_eq!(v["name"], "upper_bound_degree_p");
        let geometry = v["geometry"].as_str().unwrap();
        let n: usize = geometry["sphere(n=".len()..].split(',').next().unwrap().parse().unwrap();
        let p = v["p"].as_u64().unwrap() as usize;
        let t = v["tightness"].as_f64().unwrap();
        if 2 * p == n + 1 {
            assert!(t <= 1e-12, "{v}");
            sharp += 1;
        } else {
            assert!(t > 1e-3, "{v}");
        }
    }
    assert_eq!(sharp, 3 * 3, "n = 3, 5, 7 at three radii");
}

#[test]
fn identical_config_gives_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("run.json"),
        r#"{"command":"bounds","geometry":"ellipsoid:1,1,1.2,2","out":"o","seed":7}"#,
    )
    .unwrap();
    assert_eq!(code(&hodgebench(&["run", "run.json"], dir.path())), 0);
    let first = std::fs::read(dir.path().join("o/bounds.json")).unwrap();
    assert_eq!(code(&hodgebench(&["run", "run.json"], dir.path())), 0);
    assert_eq!(first, std::fs::read(dir.path().join("o/bounds.json")).unwrap());
    assert_eq!(json(&dir.path().join("o/bounds.json"))["config"]["seed"], 7);
}

#[test]
fn ellipsoid_suite_is_satisfied() {
    let dir = tempfile::tempdir().unwrap();
    let out = hodgebench(&["bounds", "--suite", "ellipsoids", "--p", "1", "--out", "o"], dir.path());
    assert_eq!(code(&out), 0);
    let report = json(&dir.path().join("o/bounds.json"));
    let verdicts = report["result"]["verdicts"].as_array().unwrap();
    // the degree-p upper bound needs n >= 3 and the Killing relation a sphere
    assert_eq!(verdicts.len(), 5 * 3);
    for v in verdicts {
        assert_eq!(v["state"], "satisfied", "{v}");
    }
}

#[test]
fn icosphere_spectrum_has_triple_eigenvalue_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = hodgebench(&["spectrum", "--geometry", "icosphere:4", "--k", "10", "--p", "0", "--out", "o"], dir.path());
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report = json(&dir.path().join("o/spectrum_p0.json"));
    let clusters = report["result"]["clusters"].as_array().unwrap();
    let first = clusters.iter().find(|c| c["value"].as_f64().unwrap() > 1e-6).unwrap();
    assert!((first["value"].as_f64().unwrap() - 2.0).abs() < 0.04);
    assert_eq!(first["multiplicity"], 3);
    let csv = std::fs::read_to_string(dir.path().join("o/spectrum_p0.csv")).unwrap();
    assert!(csv.starts_with("# hodgebench"));
    assert_eq!(csv.lines().count(), 2 + 10);
}

#[test]
fn torus_file_has_two_harmonic_one_forms() {
    let dir = tempfile::tempdir().unwrap();
    let torus = hodgebench::mesh::generate_torus(2.0, 0.7, 24, 12);
    std::fs::write(dir.path().join("torus.off"), hodgebench::mesh::io::write_off(&torus)).unwrap();
    let out = hodgebench(&["spectrum", "--mesh", "torus.off", "--p", "1", "--out", "o"], dir.path());
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report = json(&dir.path().join("o/spectrum_p1.json"));
    let harmonic = report["result"]["families"].as_array().unwrap().iter().filter(|f| *f == "harmonic").count();
    assert_eq!(harmonic, 2);
}

#[test]
fn invalid_mesh_exits_with_validation_code() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("open.off"), "OFF\n4 2 0\n0 0 0\n1 0 0\n0 1 0\n0 0 1\n3 0 1 2\n3 0 1 3\n").unwrap();
    let out = hodgebench(&["spectrum", "--mesh", "open.off", "--out", "o"], dir.path());
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("non_manifold_edge"));
}

#[test]
fn linear_function_residuals_decrease() {
    let dir = tempfile::tempdir().unwrap();
    let out = hodgebench(&["reilly", "--field", "linear-x1", "--levels", "1..3", "--out", "o"], dir.path());
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("o/reilly_convergence.csv")).unwrap();
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(csv.as_bytes());
    let dec: Vec<f64> = reader
        .deserialize::<std::collections::HashMap<String, String>>()
        .map(|r| r.unwrap()["residual_dec"].parse::<f64>().unwrap().abs())
        .collect();
    assert_eq!(dec.len(), 3);
    assert!(dec[1] < dec[0] && dec[2] < dec[1], "{dec:?}");
    let strict = hodgebench(&["reilly", "--field", "linear-x1", "--levels", "1..3", "--strict-dec", "--out", "o"], dir.path());
    assert_eq!(code(&strict), 0);
}

#[test]
fn coarsening_order_is_flagged_as_regression() {
    let dir = tempfile::tempdir().unwrap();
    let out = hodgebench(&["reilly", "--field", "linear-x1", "--levels", "3,1", "--strict-dec", "--out", "o"], dir.path());
    assert_eq!(code(&out), 4);
}

#[test]
fn radial_square_matches_closed_forms() {
    let dir = tempfile::tempdir().unwrap();
    let out = hodgebench(&["reilly", "--field", "radial-sq", "--out", "o"], dir.path());
    assert_eq!(code(&out), 0);
    let report = json(&dir.path().join("o/reilly_ledgers.json"));
    let l = &report["result"]["ledgers"][0];
    let pi = std::f64::consts::PI;
    let close = |key: &str, want: f64| {
        let got = l[key].as_f64().unwrap();
        assert!((got - want).abs() <= 0.05 * want.abs(), "{key}: {got} vs {want}");
    };
    // Δf = -3 throughout, |Hess f|² = 3, and on the sphere f_N = -1 with nH = 2
    close("laplacian_sq", 12.0 * pi);
    close("hessian_sq", 4.0 * pi);
    close("boundary_mean", 8.0 * pi);
    assert!(l["boundary_shape"].as_f64().unwrap().abs() < 0.05);
}

#[test]
fn zero_field_ledger_is_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = hodgebench(&["reilly", "--field", "zero", "--levels", "1", "--out", "o"], dir.path());
    assert_eq!(code(&out), 0);
    let report = json(&dir.path().join("o/reilly_ledgers.json"));
    let ledger = report["result"]["ledgers"][0].as_object().unwrap();
    for (key, value) in ledger {
        if let Some(x) = value.as_f64() {
            assert_eq!(x, 0.0, "{key}");
        }
    }
}

#[test]
fn form_fields_and_output_directory_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_hodgebench"))
        .args(["reilly", "--field", "x2dx1", "--geometry", "ball:2"])
        .current_dir(dir.path())
        .env("HODGEBENCH_OUT", "from-env")
        .output()
        .unwrap();
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report = json(&dir.path().join("from-env/reilly_ledgers.json"));
    assert_eq!(report["result"]["ledgers"][0]["degree"], 1);
}

#[test]
fn bad_arguments_exit_with_usage_code() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["bounds", "--suite", "spheres", "--tol", "-1", "--out", "o"][..],
        &["bounds", "--suite", "cubes", "--out", "o"],
        &["bounds", "--suite", "spheres", "--theorem", "nope", "--out", "o"],
        &["spectrum", "--geometry", "icosphere:1", "--mesh", "x.off"],
        &["spectrum", "--geometry", "sphere:3"],
        &["reilly", "--field", "nonsense"],
        &["frobnicate"],
    ] {
        assert_eq!(code(&hodgebench(args, dir.path())), 1, "{args:?}");
    }
}
