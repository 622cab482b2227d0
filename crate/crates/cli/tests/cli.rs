use std::path::Path;
use std::process::{Command, Output};

use serde_json::{json, Value};
use tempfile::TempDir;
use xis3::product::{random_spectral, SpectralCoeffs, Support};
use xis3::scalar::Rational;

fn xi_s3(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_xi-s3")).args(args).output().expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("json on stdout")
}

fn write(dir: &TempDir, name: &str, v: &Value) -> String {
    let path = dir.path().join(name);
    std::fs::write(&path, v.to_string()).unwrap();
    path.to_str().unwrap().to_string()
}

fn poly(nvars: usize, terms: &[(&[u32], (i64, i64))]) -> Value {
    json!({
        "nvars": nvars,
        "terms": terms.iter().map(|(e, (n, d))| json!({ "exp": e, "coef": [n, d] })).collect::<Vec<_>>(),
    })
}

fn inner_product_form() -> Value {
    poly(
        8,
        &[
            (&[1, 0, 0, 0, 1, 0, 0, 0], (1, 1)),
            (&[0, 1, 0, 0, 0, 1, 0, 0], (1, 1)),
            (&[0, 0, 1, 0, 0, 0, 1, 0], (1, 1)),
            (&[0, 0, 0, 1, 0, 0, 0, 1], (1, 1)),
        ],
    )
}

#[test]
fn basis_of_degree_one_has_four_elements_with_gram_a_quarter() {
    let v = stdout_json(&xi_s3(&["basis", "--k", "1"]));
    assert_eq!(v["dimension"], 4);
    assert_eq!(v["elements"].as_array().unwrap().len(), 4);
    for g in v["gram_diag"].as_array().unwrap() {
        assert_eq!(g, &json!([1, 4]));
    }
}

#[test]
fn basis_of_degree_zero_is_the_constant() {
    let v = stdout_json(&xi_s3(&["basis", "--k", "0"]));
    assert_eq!(v["elements"], json!([{ "nvars": 4, "terms": [{ "exp": [0, 0, 0, 0], "coef": [1, 1] }] }]));
}

#[test]
fn basis_of_degree_two_has_nine_elements() {
    let v = stdout_json(&xi_s3(&["basis", "--k", "2"]));
    assert_eq!(v["elements"].as_array().unwrap().len(), 9);
}

#[test]
fn basis_text_format_and_cap() {
    let out = xi_s3(&["basis", "--k", "1", "--format", "text"]);
    assert!(String::from_utf8_lossy(&out.stdout).contains("dimension 4"));
    let out = xi_s3(&["basis", "--k", "5", "--degree-cap", "4"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("degree cap"));
}

#[test]
fn constant_input_is_fixed_by_every_method() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "one.json", &poly(8, &[(&[0; 8], (3, 2))]));
    let sym = stdout_json(&xi_s3(&["xi", "--input", &input, "--method", "symbolic"]));
    assert_eq!(sym, poly(8, &[(&[0; 8], (3, 2))]));
    let coeffs = stdout_json(&xi_s3(&["xi", "--input", &input, "--method", "spectral"]));
    assert_eq!(coeffs, json!({ "N": 0, "blocks": { "0,0": [[[3, 2]]] } }));
    let kern = stdout_json(&xi_s3(&["xi", "--input", &input, "--method", "kernel", "--points", "3"]));
    for s in kern["samples"].as_array().unwrap() {
        assert!((s["value"].as_f64().unwrap() - 1.5).abs() < 1e-12);
    }
}

#[test]
fn linear_input_is_annihilated() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "x1.json", &poly(4, &[(&[1, 0, 0, 0], (1, 1))]));
    let out = stdout_json(&xi_s3(&["xi", "--input", &input]));
    assert_eq!(out["terms"], json!([]));
    let coeffs = stdout_json(&xi_s3(&["xi", "--input", &input, "--method", "spectral"]));
    assert_eq!(coeffs["blocks"], json!({}));
}

#[test]
fn inner_product_form_maps_to_x1_y1() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "f.json", &inner_product_form());
    let out_path = dir.path().join("tf.json");
    let out = xi_s3(&["xi", "--input", &input, "--method", "symbolic", "--output", out_path.to_str().unwrap()]);
    assert!(out.status.success());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(out_path).unwrap()).unwrap();
    assert_eq!(v, poly(8, &[(&[1, 0, 0, 0, 1, 0, 0, 0], (1, 1))]));
}

#[test]
fn method_input_mismatch_and_malformed_input_exit_two() {
    let dir = TempDir::new().unwrap();
    let spectral = write(&dir, "c.json", &json!({ "N": 0, "blocks": {} }));
    let out = xi_s3(&["xi", "--input", &spectral, "--method", "symbolic"]);
    assert_eq!(out.status.code(), Some(2));
    let bad = write(&dir, "bad.json", &json!({ "hello": 1 }));
    assert_eq!(xi_s3(&["xi", "--input", &bad]).status.code(), Some(2));
    let missing = dir.path().join("missing.json");
    assert_eq!(xi_s3(&["xi", "--input", missing.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(xi_s3(&["xi", "--input", &spectral, "--method", "nonsense"]).status.code(), Some(2));
}

#[test]
fn solve_box_examples() {
    let dir = TempDir::new().unwrap();
    let zero = write(&dir, "zero.json", &json!({ "N": 2, "blocks": {} }));
    assert_eq!(stdout_json(&xi_s3(&["solve-box", "--input", &zero])), json!({ "N": 2, "blocks": {} }));

    let v = json!({ "N": 1, "blocks": { "0,1": [[[3, 1], [-6, 5], [0, 1], [1, 1]]] } });
    let input = write(&dir, "v.json", &v);
    let u = stdout_json(&xi_s3(&["solve-box", "--input", &input]));
    assert_eq!(u, json!({ "N": 1, "blocks": { "0,1": [[[1, 1], [-2, 5], [0, 1], [1, 3]]] } }));
}

#[test]
fn solve_box_round_trips_random_off_diagonal_data() {
    let dir = TempDir::new().unwrap();
    let c = random_spectral(3, Support::OffDiagonal, 21);
    let input = write(&dir, "c.json", &c.to_json());
    let u = SpectralCoeffs::<Rational>::from_json(&stdout_json(&xi_s3(&["solve-box", "--input", &input]))).unwrap();
    assert_eq!(xis3::operators::box_apply(&u), c);
}

#[test]
fn solve_box_names_the_offending_block() {
    let dir = TempDir::new().unwrap();
    let v = json!({ "N": 1, "blocks": { "1,1": [[[1, 1], [0, 1], [0, 1], [0, 1]], [[0, 1], [0, 1], [0, 1], [0, 1]], [[0, 1], [0, 1], [0, 1], [0, 1]], [[0, 1], [0, 1], [0, 1], [0, 1]]] } });
    let out = xi_s3(&["solve-box", "--input", &write(&dir, "d.json", &v)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("(1, 1)"));
}

#[test]
fn verify_degree_zero_passes() {
    let out = xi_s3(&["verify", "--max-degree", "0"]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("0 failed"));
}

fn without_timing(v: &Value) -> Value {
    let mut v = v.clone();
    v.as_object_mut().unwrap().remove("timing");
    v
}

#[test]
fn verify_degree_two_exact_reports_lambda_two() {
    let v = stdout_json(&xi_s3(&["verify", "--max-degree", "2", "--mode", "exact", "--format", "json"]));
    assert_eq!(v["passed"], true);
    let refl = v["verdicts"].as_array().unwrap().iter().find(|x| x["name"] == "reflection").unwrap();
    assert_eq!(refl["witness"][2]["lambda"], json!([1, 3]));
    assert!(v["verdicts"].as_array().unwrap().iter().all(|x| x["anchor"].as_str().is_some_and(|a| !a.is_empty())));
}

#[test]
fn verify_degree_three_exact_and_float_agree() {
    let v = stdout_json(&xi_s3(&["verify", "--max-degree", "3", "--mode", "both", "--format", "json", "--seed", "4"]));
    assert_eq!(v["passed"], true);
    let verdicts = v["verdicts"].as_array().unwrap();
    for name in ["laplace_beltrami", "zonal_identities", "annihilation", "reflection", "exact_couple"] {
        let modes: Vec<_> = verdicts.iter().filter(|x| x["name"] == name).map(|x| (x["mode"].clone(), x["passed"].clone())).collect();
        assert_eq!(modes, vec![(json!("exact"), json!(true)), (json!("float"), json!(true))], "{name}");
    }
}

#[test]
fn verify_is_reproducible_modulo_timing() {
    let args = ["verify", "--max-degree", "1", "--mode", "both", "--format", "json", "--seed", "9"];
    let a = stdout_json(&xi_s3(&args));
    let b = stdout_json(&xi_s3(&args));
    assert_eq!(without_timing(&a).to_string(), without_timing(&b).to_string());
}

#[test]
fn verify_enforces_caps() {
    let out = xi_s3(&["verify", "--max-degree", "4", "--mode", "exact"]);
    assert_eq!(out.status.code(), Some(2));
    let out = xi_s3(&["verify", "--max-degree", "7", "--mode", "float"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_writes_output_file_and_honours_thread_env() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("report.json");
    let out = Command::new(env!("CARGO_BIN_EXE_xi-s3"))
        .args(["verify", "--max-degree", "1", "--format", "json", "--output", path.to_str().unwrap()])
        .env("XI_S3_THREADS", "1")
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(Path::new(&path).exists());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert!(v["timing"].is_array());
}
