use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fracwave"))
}

fn config(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p.display().to_string()
}

fn snapshot(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

const BASE: &str = "[domain]\nkind = interval\nlength = pi\nn_modes = 3\n[problem]\ns = 0.5\ngamma = 1.5\nT = 1\n[data]\ng = mode:1\n";

#[test]
fn accept_is_byte_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("acc");
    let run = |threads: &str| {
        let o = bin()
            .args(["accept", "--seed", "42", "--out"])
            .arg(&out)
            .env("FRACWAVE_THREADS", threads)
            .output()
            .unwrap();
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
        snapshot(&out)
    };
    let first = run("4");
    fs::remove_dir_all(&out).unwrap();
    let second = run("1");
    assert_eq!(first.keys().collect::<Vec<_>>(), ["acceptance.csv", "acceptance.json"]);
    assert!(first == second, "outputs differ between runs");
}

#[test]
fn solve_single_mode() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config(tmp.path(), "c.ini", BASE);
    let out = tmp.path().join("o");
    let o = bin().args(["solve", "--config", &cfg, "--out"]).arg(&out).output().unwrap();
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(out.join("solution.csv")).unwrap();
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with("# fracwave-core "));
    assert_eq!(lines.next(), Some("t,x,u"));
    let resolved = fs::read_to_string(out.join("resolved_config.ini")).unwrap();
    assert!(resolved.contains("n_modes = 3") && resolved.contains("init_rule = fractional-taylor"));
    // the hash ignores the output path
    let out2 = tmp.path().join("p");
    bin().args(["solve", "--config", &cfg, "--out"]).arg(&out2).output().unwrap();
    assert_eq!(fs::read(out.join("solution.csv")).unwrap(), fs::read(out2.join("solution.csv")).unwrap());
}

#[test]
fn invalid_config_exits_two() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config(tmp.path(), "bad.ini", &BASE.replace("gamma = 1.5", "gamma = 2.5"));
    let out = tmp.path().join("o");
    let o = bin().args(["solve", "--config", &cfg, "--out"]).arg(&out).output().unwrap();
    assert_eq!(code(&o), 2);
    let report = fs::read_to_string(out.join("error.json")).unwrap();
    assert!(report.contains("gamma must lie in (1,2]"), "{report}");

    let cfg = config(tmp.path(), "typo.ini", &format!("{BASE}[weight]\nthetta = 1\n"));
    let o = bin().args(["solve", "--config", &cfg]).current_dir(tmp.path()).output().unwrap();
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 12: unknown key 'thetta'"));
}

#[test]
fn divergence_below_threshold_is_a_pass() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config(tmp.path(), "r.ini", &format!("{BASE}[regularity]\nrho = 1.8\nsuite = spacetime\n"));
    let out = tmp.path().join("o");
    let o = bin().args(["regularity", "--config", &cfg, "--out"]).arg(&out).output().unwrap();
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(out.join("regularity.csv")).unwrap();
    assert!(csv.lines().skip(2).all(|l| l.contains(",inf,") && l.ends_with("PASS")), "{csv}");
}

#[test]
fn manufactured_convergence_order() {
    let tmp = tempfile::tempdir().unwrap();
    let body = BASE.replace("g = mode:1", "f = 1:cubic; 2:cubic");
    let cfg = config(tmp.path(), "c.ini", &body);
    let out = tmp.path().join("o");
    let o = bin().args(["convergence", "--config", &cfg, "--levels", "6", "--out"]).arg(&out).output().unwrap();
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("convergence.json")).unwrap()).unwrap();
    assert_eq!(v["smooth"], true);
    assert!((v["fitted_order"].as_f64().unwrap() - 1.5).abs() < 0.1);
    assert_eq!(fs::read_to_string(out.join("orders.csv")).unwrap().lines().count(), 2 + 6);
}

#[test]
fn psibounds_and_ml() {
    let tmp = tempfile::tempdir().unwrap();
    let o = bin().args(["psibounds", "--s", "0.5", "--theta", "1", "--ellmax", "8", "--out"]).arg(tmp.path()).output().unwrap();
    assert_eq!(code(&o), 0);
    let csv = fs::read_to_string(tmp.path().join("psibounds.csv")).unwrap();
    assert_eq!(csv.lines().nth(1), Some("ell,Psi,normalized_ratio,kappa_hat"));
    let o = bin().args(["ml", "--gamma", "1", "--mu", "1", "--z", "-1"]).output().unwrap();
    assert!(String::from_utf8_lossy(&o.stdout).contains("3.6787944117144"));
}
