use serde_json::Value;
use std::path::PathBuf;
use std::process::{Command, Output};

fn covol(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_covol")).args(args).output().expect("binary runs")
}

fn corpus(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus").join(name).display().to_string()
}

fn scratch(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    dir.join(name)
}

fn report(path: &PathBuf) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn field_report_embeds_config_and_seed() {
    let out = scratch("field.json");
    let o = covol(&["field", "--out", out.to_str().unwrap(), "--seed", "7"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(&out);
    assert_eq!(r["seed"], 7);
    assert_eq!(r["pass"], true);
    assert!(r["config"]["command"].get("Field").is_some());
    assert!(r["checks"].as_array().unwrap().len() > 20);
}

#[test]
fn lehmer_file() {
    let out = scratch("lehmer.json");
    let o = covol(&["mahler", "--poly", &corpus("lehmer.json"), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let r = report(&out);
    let m = r["results"][0]["measure"]["value"].as_f64().unwrap();
    assert!((m - 0.1623576).abs() < 1e-6);
    assert!(r["results"][0]["measure"]["method"].is_string());
}

#[test]
fn bound_reports_conditional_flags() {
    let out = scratch("bound.json");
    let o = covol(&["bound", "--corpus", &corpus("fields.json"), "--D", "1", "--N0", "1000", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let r = report(&out);
    for entry in r["results"].as_array().unwrap() {
        assert!(!entry["report"]["conditional_flags"].as_array().unwrap().is_empty());
    }
}

#[test]
fn grid_csv_and_determinism() {
    let (a, b) = (scratch("grid_a.csv"), scratch("grid_b.csv"));
    for p in [&a, &b] {
        let o = covol(&[
            "verify-asymptotics", "--grid", "m=1000", "kappa=0.5,1", "r=0.51", "--csv", p.to_str().unwrap(),
            "--rho-samples", "500", "--minor-samples", "10", "--moment-samples", "4",
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    }
    let text = std::fs::read_to_string(&a).unwrap();
    assert!(text.starts_with("m,kappa,r,D,estimate,lhs,rhs,margin,quad_error,pass"));
    assert_eq!(text.lines().count(), 1 + 2 * 4);
    assert_eq!(text, std::fs::read_to_string(&b).unwrap());
}

#[test]
fn failing_check_exits_one_and_names_it() {
    // 1 + θ is not a unit in Q(√2)
    let path = scratch("bad_units.json");
    std::fs::write(&path, r#"[{"label": "broken", "min_poly": [-2, 0, 1], "units": [[1, 1], [3, 1]]}]"#).unwrap();
    let o = covol(&["field", "--corpus", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("broken/unit2/is_unit"));
}

#[test]
fn config_errors_exit_two() {
    let path = scratch("garbage.json");
    std::fs::write(&path, "{not json").unwrap();
    assert_eq!(covol(&["field", "--corpus", path.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(covol(&["field", "--label", "no-such-field"]).status.code(), Some(2));
    assert_eq!(covol(&["verify-asymptotics", "--grid", "m=abc"]).status.code(), Some(2));
    assert_eq!(covol(&["bogus"]).status.code(), Some(2));
    assert_eq!(covol(&["bloch", "--z", "1"]).status.code(), Some(2));
    let o = Command::new(env!("CARGO_BIN_EXE_covol")).arg("bloch").env("COVOL_WORKERS", "0").output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bloch_values() {
    let out = scratch("bloch.json");
    let o = covol(&["bloch", "--z", "0,1", "--samples", "100", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let d = report(&out)["results"][0]["D"].as_f64().unwrap();
    // Catalan's constant
    assert!((d - 0.915965594177219).abs() < 1e-12);
}

#[test]
fn saddle_and_units_on_one_field() {
    assert_eq!(covol(&["saddle", "--label", "cubic-49", "--t", "0.3"]).status.code(), Some(0));
    assert_eq!(covol(&["saddle", "--label", "Q(sqrt2)", "--y", "1,2"]).status.code(), Some(2));
    assert_eq!(covol(&["units", "--label", "quartic-1125", "--mu-k", "2"]).status.code(), Some(0));
    assert_eq!(covol(&["geometry", "--label", "biquadratic-relative"]).status.code(), Some(0));
}
