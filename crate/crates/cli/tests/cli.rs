use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn desitter(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_desitter")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p
}

/// Data rows of a CSV table: skips the `#` line and the column header.
fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines().skip(2).map(|l| l.split(',').map(str::to_string).collect()).collect()
}

fn num(s: &str) -> f64 {
    s.parse().unwrap()
}

#[test]
fn csv_header_names_units_and_hash() {
    let o = desitter(&["kernel"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    let first = text.lines().next().unwrap();
    assert!(first.starts_with("# desitter kernel; units: "), "{first}");
    let hash = first.rsplit("config_sha256=").next().unwrap();
    assert_eq!(hash.len(), 64);
    assert!(hash.chars().all(|c| c.is_ascii_hexdigit()));
    assert_eq!(text.lines().nth(1).unwrap(), "r,t,re_e,im_e,re_k0,im_k0,re_k1,im_k1,outside_cone");
    // default grid is 11 radii × 10 times
    assert_eq!(csv_rows(&text).len(), 110);
}

#[test]
fn kernel_massless_k1_constant_in_r() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "k.toml",
        "[kernel]\nh = 2\nm = [1, 0]\nr = { start = 0, stop = 0.4, count = 9 }\nt = { start = 0.5, stop = 1.5, count = 3 }\n",
    );
    let o = desitter(&["kernel", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let rows = csv_rows(&String::from_utf8(o.stdout).unwrap());
    let mut inside = 0;
    for row in rows {
        if row[8] == "0" {
            let (t, k1) = (num(&row[1]), num(&row[6]));
            assert!((k1 - 0.5 * t.exp()).abs() <= 1e-13 * t.exp(), "t = {t}: {k1}");
            assert_eq!(num(&row[7]), 0.0);
            inside += 1;
        } else {
            assert!(row[2].is_empty() && row[6].is_empty());
        }
    }
    // φ(0.5) ≈ 0.316 with H = 2, so the grid straddles the cone
    assert!(inside > 3 && inside < 27, "{inside}");
}

#[test]
fn absurd_gate_fails_with_full_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("d.csv");
    let o = desitter(&["dirac-solve", "--gate", "1e-15", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 4);
    let text = fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().nth(1).unwrap(), "t,comp,re_val,im_val,re_oracle,im_oracle,abs_err,rel_err");
    assert_eq!(csv_rows(&text).len(), 3 * 4);

    let o = desitter(&["kg-solve", "--gate", "1e-15"]);
    assert_eq!(code(&o), 4);
    assert_eq!(csv_rows(&String::from_utf8(o.stdout).unwrap()).len(), 3);
}

#[test]
fn acceptance_grid_configs_pass_the_gate() {
    let dir = tempfile::tempdir().unwrap();
    for (h, m) in [(0.5, 0.0), (1.0, 1.0), (1.0, 2.0)] {
        for k in [0.0, 4.0] {
            let body = format!(
                "[dirac]\nh = {h}\nm = [{m}, 0]\nxi = [{}, {}, {}]\nphi = [[0.3, 0.1], [0, 1], [0.2, -0.4], [-1, 0]]\n\
                 times = [0.25, 0.5, 1.0]\n",
                k / 3.0,
                2.0 * k / 3.0,
                2.0 * k / 3.0
            );
            let cfg = write_config(dir.path(), "d.toml", &body);
            let o = desitter(&["dirac-solve", "--config", cfg.to_str().unwrap()]);
            assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        }
    }
    for m in ["[0.5, 1]", "[0.5, -1]", "[2, 0]"] {
        let body = format!("[kg]\nh = 1\nm = {m}\nxi = [0.3333333333333333, 0.6666666666666666, 0.6666666666666666]\n");
        let cfg = write_config(dir.path(), "k.toml", &body);
        let o = desitter(&["kg-solve", "--config", cfg.to_str().unwrap()]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn single_time_zero_returns_the_datum() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "z.toml",
        "[dirac]\nsource = \"mixed\"\ntimes = [0.0]\nphi = [[0.3, 0.1], [0, 1], [0.2, -0.4], [-1, 0]]\n",
    );
    let o = desitter(&["dirac-solve", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let rows = csv_rows(&String::from_utf8(o.stdout).unwrap());
    let datum = [(0.3, 0.1), (0.0, 1.0), (0.2, -0.4), (-1.0, 0.0)];
    assert_eq!(rows.len(), 4);
    for (row, (re, im)) in rows.iter().zip(datum) {
        assert_eq!((num(&row[2]), num(&row[3])), (re, im));
        assert_eq!((num(&row[4]), num(&row[5])), (re, im));
        assert_eq!(num(&row[6]), 0.0);
    }
}

#[test]
fn corrupted_gamma_fails_verification() {
    let o = desitter(&["verify", "--corrupt-gamma"]);
    assert_eq!(code(&o), 5);
    let report: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["pass"], false);
    let checks = report["checks"].as_array().unwrap();
    let cliff = checks.iter().find(|c| c["name"] == "clifford_anticommutators").unwrap();
    assert_eq!(cliff["pass"], false);
    assert!(cliff["max_residual"].as_f64().unwrap() > 0.0);
}

#[test]
fn default_verify_passes() {
    let o = desitter(&["verify"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let report: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["pass"], true);
    let checks = report["checks"].as_array().unwrap();
    for name in ["clifford_anticommutators", "k0_vs_time_derivative", "massless_collapse", "factorization_case_iii",
        "box_g_identity", "square_condition_spherical", "tetrad_anticommutators", "h0_kernel_halving"]
    {
        let c = checks.iter().find(|c| c["name"] == name).unwrap_or_else(|| panic!("missing {name}"));
        assert_eq!(c["pass"], true, "{name}");
        assert!(c["threshold"].is_number() && c["max_residual"].is_number());
    }
}

#[test]
fn bad_configs_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    for (i, body) in ["[kernel\n", "[kernel]\nhh = 1\n", "[kg]\nh = -1\n", "[fundsol]\nt0 = 0.6\n", "gate = 0\n"]
        .iter()
        .enumerate()
    {
        let cfg = write_config(dir.path(), &format!("bad{i}.toml"), body);
        let o = desitter(&["kg-solve", "--config", cfg.to_str().unwrap()]);
        assert_eq!(code(&o), 2, "{body:?}");
    }
    assert_eq!(code(&desitter(&["kernel", "--config", "/nonexistent/run.toml"])), 2);
    assert_eq!(code(&desitter(&["kernel", "--format", "xml"])), 2);
}

#[test]
fn numerical_failure_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "q.toml", "[quadrature]\nmax_subdivisions = 1\nabs_tol = 1e-300\nrel_tol = 1e-300\n");
    assert_eq!(code(&desitter(&["kg-solve", "--config", cfg.to_str().unwrap()])), 3);
}

#[test]
fn flags_override_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "run.toml", "seed = 7\nformat = \"json\"\n[verify]\nfunctions = 2\npoints = 2\n");
    let c = cfg.to_str().unwrap();
    let from_file: Value = serde_json::from_slice(&desitter(&["verify", "--config", c]).stdout).unwrap();
    assert_eq!(from_file["seed"], 7);
    let flagged: Value = serde_json::from_slice(&desitter(&["verify", "--config", c, "--seed", "9"]).stdout).unwrap();
    assert_eq!(flagged["seed"], 9);
    assert_ne!(from_file["config_sha256"], flagged["config_sha256"]);

    // file asks for json; the flag asks for csv
    let o = desitter(&["kernel", "--config", c, "--format", "csv"]);
    assert!(String::from_utf8(o.stdout).unwrap().starts_with("# desitter kernel"));
    let o = desitter(&["kernel", "--config", c]);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["command"], "kernel");
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    for cmd in ["kernel", "fundsol", "limit-h0", "dirac-solve", "verify"] {
        let a = dir.path().join(format!("{cmd}-a.out"));
        let b = dir.path().join(format!("{cmd}-b.out"));
        for p in [&a, &b] {
            let o = desitter(&[cmd, "--seed", "11", "--out", p.to_str().unwrap()]);
            assert_eq!(code(&o), 0, "{cmd}");
        }
        assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap(), "{cmd}");
    }
}

#[test]
fn fundsol_vanishes_off_the_cone() {
    let dir = tempfile::tempdir().unwrap();
    // reach at t = 0.9 from t0 = 0.4 with H = 1 is about 0.26; the bump sits beyond it
    let body = "[fundsol]\nequation = \"kg\"\ntimes = [0.9, 0.2]\n\
                [fundsol.test]\nkind = \"bump\"\ncenter = 1.5\nhalf_width = 0.3\n\
                amplitude = [[1, 0], [0, 1], [0, 0], [0.5, 0]]\n";
    let cfg = write_config(dir.path(), "f.toml", body);
    let o = desitter(&["fundsol", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    for row in csv_rows(&String::from_utf8(o.stdout).unwrap()) {
        assert!(num(&row[2]).abs() <= 1e-12 && num(&row[3]).abs() <= 1e-12, "{row:?}");
    }
}
