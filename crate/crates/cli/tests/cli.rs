use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn np3(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_np3")).args(args).output().expect("spawn np3")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| {
        panic!("stdout is not JSON ({e}): {}", String::from_utf8_lossy(&o.stdout))
    })
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("np3-cli-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn catalog_list_and_show() {
    let o = np3(&["catalog", "list", "--format", "json"]);
    assert_eq!(code(&o), 0);
    let list = json(&o);
    assert_eq!(list.as_array().unwrap().len(), 6);

    let o = np3(&["catalog", "list"]);
    assert_eq!(String::from_utf8_lossy(&o.stdout).lines().count(), 7);

    let o = np3(&["catalog", "show", "s3_round", "--format", "json"]);
    assert_eq!(code(&o), 0);
    let show = json(&o);
    let fields: Vec<&str> = show["manifold"]["fields"]
        .as_array()
        .unwrap()
        .iter()
        .map(|f| f["field_id"].as_str().unwrap())
        .collect();
    assert!(fields.contains(&"hopf"));
    assert!(show["expected"].as_array().unwrap().iter().all(|r| r["oracle"].is_string()));

    let o = np3(&["catalog", "show", "klein_bottle"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown manifold `klein_bottle`"));
}

#[test]
fn analyze_examples() {
    let o = np3(&["analyze", "--manifold", "euclidean", "--field", "constant"]);
    assert_eq!(code(&o), 0);
    let sc = &json(&o)["results"]["spin_coefficients"];
    for name in ["kappa", "rho", "sigma", "epsilon", "beta"] {
        assert_eq!(sc[name]["re"].as_f64(), Some(0.0), "{name}");
        assert_eq!(sc[name]["im"].as_f64(), Some(0.0), "{name}");
    }

    let o = np3(&["analyze", "--manifold", "s3_round", "--field", "hopf", "--point", "0.9,0.1,-0.2"]);
    assert_eq!(code(&o), 0);
    let d = json(&o);
    assert_eq!(d["results"]["classification"]["killing"], true);
    assert_eq!(d["results"]["classification"]["hypersurface_orthogonal"], false);
    assert_eq!(d["summary"]["killing"], true);
    assert_eq!(d["config"]["point"], serde_json::json!([0.9, 0.1, -0.2]));
    assert!(d["version"].is_string());

    let o = np3(&["analyze", "--manifold", "s3_round", "--field", "hopf", "--point", "0.9,0.1"]);
    assert_eq!(code(&o), 2);
    let o = np3(&["analyze", "--manifold", "s3_round", "--field", "hopf", "--point", "5,0,0"]);
    assert_eq!(code(&o), 2);
    let o = np3(&["analyze", "--manifold", "s3_round", "--field", "nope"]);
    assert_eq!(code(&o), 2);
    let o = np3(&["analyze", "--manifold", "s3_round", "--field", "hopf", "--param", "r=-1"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn verify_examples() {
    let o = np3(&["verify", "--manifold", "s3_round", "--field", "hopf", "--samples", "100", "--tol", "1e-5"]);
    assert_eq!(code(&o), 0);
    let d = json(&o);
    assert_eq!(d["summary"]["all_pass"], true);
    assert_eq!(d["summary"]["points"], 100);

    let o = np3(&["verify", "--manifold", "s3_round", "--field", "hopf", "--samples", "10", "--tol", "1e-15"]);
    assert_eq!(code(&o), 1);
    let d = json(&o);
    assert_eq!(d["results"].as_array().unwrap().len(), 11);
    assert_eq!(d["summary"]["all_pass"], false);

    let o = np3(&["verify", "--manifold", "h2xr", "--field", "vertical", "--samples", "20"]);
    assert_eq!(code(&o), 0);

    let o = np3(&["verify", "--manifold", "nil", "--field", "horizontal", "--samples", "5", "--format", "csv"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.starts_with("equation_id,points,max_residual,mean_residual,tol,pass,worst_u1,worst_u2,worst_u3"));
    assert_eq!(text.lines().count(), 12);
}

#[test]
fn flow_examples() {
    let o = np3(&["flow", "--manifold", "euclidean", "--field", "radial_in", "--point", "1,0,0", "--format", "json"]);
    assert_eq!(code(&o), 0);
    let d = json(&o);
    assert_eq!(d["summary"]["length"], 0.9);
    let t = d["summary"]["predicted_blowup_t"].as_f64().unwrap();
    assert!((t - 1.0).abs() < 1e-6);
    assert_eq!(d["results"]["focusing"]["status"], "checked");

    let o = np3(&["flow", "--manifold", "s3_round", "--field", "hopf", "--length", "6.283185307179586", "--step", "1e-2", "--format", "json"]);
    assert_eq!(code(&o), 0);
    let d = json(&o);
    assert_eq!(d["summary"]["sign_changes"], 0);
    assert_eq!(d["results"]["focusing"]["status"], "not_applicable");

    let o = np3(&["flow", "--manifold", "euclidean", "--field", "constant", "--step", "0.1"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("t,u1,u2,u3,v1,v2,v3,div_direct,div_transported"));
    for line in lines {
        let cols: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
        assert_eq!(&cols[7..12], &[0.0; 5]);
    }
    // the summary goes to stderr when the trace is on stdout
    let summary: Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(summary["summary"]["omega_verdict"], "zero_along_curve");
}

#[test]
fn flow_writes_trace_to_file() {
    let path = scratch("trace.csv");
    let p = path.to_str().unwrap();
    let o = np3(&["flow", "--manifold", "h3", "--field", "radial", "--step", "1e-2", "--out", p]);
    assert_eq!(code(&o), 0);
    let summary: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(summary["summary"]["transport_consistent"], true);
    let trace = std::fs::read_to_string(&path).unwrap();
    assert_eq!(trace.lines().count(), 102);
}

#[test]
fn flow_rejects_non_geodesic_fields() {
    let path = scratch("circle.toml");
    std::fs::write(
        &path,
        r#"
id = "plane"
[domain]
u1 = [-3.0, 3.0]
u2 = [-3.0, 3.0]
u3 = [-3.0, 3.0]
[metric]
g11 = "1"
g22 = "1"
g33 = "1"
[fields]
circle = ["-u2", "u1", "0"]
"#,
    )
    .unwrap();
    let file = path.to_str().unwrap();
    let o = np3(&["flow", "--metric-file", file, "--field", "circle", "--point", "1,0,0"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("not geodesic"));
    let o = np3(&["analyze", "--metric-file", file, "--field", "circle", "--point", "1,0,0"]);
    assert_eq!(code(&o), 0);
    let d = json(&o);
    let kappa = &d["results"]["spin_coefficients"]["kappa"];
    let norm = kappa["re"].as_f64().unwrap().hypot(kappa["im"].as_f64().unwrap());
    // unit circle: ∇_k k = −x, and |⟨x, m⟩| = 1/√2
    assert!((norm - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-4, "|kappa| = {norm}");
    assert_eq!(d["config"]["analytic_partials"], false);
}

#[test]
fn principal_examples() {
    let o = np3(&["principal", "--manifold", "h2xr", "--field", "vertical", "--samples", "20"]);
    assert_eq!(code(&o), 0);
    let d = json(&o);
    assert_eq!(d["summary"]["two_principal_and_killing"], true);

    let o = np3(&["principal", "--manifold", "h3", "--field", "radial", "--samples", "20"]);
    assert_eq!(code(&o), 0);
    assert_eq!(json(&o)["summary"]["neither"], true);

    let o = np3(&["principal", "--manifold", "euclidean", "--field", "constant", "--samples", "5"]);
    assert_eq!(code(&o), 2);
    let d = json(&o);
    assert_eq!(d["summary"]["hypotheses_hold"], false);
    assert!(d["summary"]["violation"].as_str().unwrap().contains("nonzero"));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(code(&np3(&["verify", "--field", "hopf"])), 2);
    assert_eq!(code(&np3(&["verify", "--manifold", "s3_round", "--field", "hopf", "--samples", "0"])), 2);
    assert_eq!(code(&np3(&["verify", "--manifold", "s3_round", "--field", "hopf", "--tol", "-1"])), 2);
    assert_eq!(code(&np3(&["flow", "--manifold", "s3_round", "--field", "hopf", "--step", "0"])), 2);
    assert_eq!(code(&np3(&["analyze", "--manifold", "s3_round", "--field", "hopf", "--param", "mu=2"])), 2);
    assert_eq!(code(&np3(&["frobnicate"])), 2);
}

#[test]
fn identical_runs_are_byte_identical() {
    let args = ["verify", "--manifold", "berger", "--field", "meridian", "--samples", "30", "--seed", "7"];
    let (a, b) = (np3(&args), np3(&args));
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let args = ["flow", "--manifold", "nil", "--field", "vertical", "--step", "1e-2"];
    assert_eq!(np3(&args).stdout, np3(&args).stdout);
}
