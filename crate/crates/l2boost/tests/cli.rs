use std::fs;
use std::path::Path;
use std::process::{Command, Output};
use std::time::Instant;

use l2boost::cli::FitReport;
use l2boost::report::SummaryReport;
use l2boost_core::dgp::{gen_iv, gen_te, DgpConfigIv, DgpConfigTe};
use l2boost_core::inference::{double_selection, iv_estimate};
use l2boost_core::rng::replication_stream;
use l2boost_core::{BoostingConfig, StopRule, Variant};

fn l2boost(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_l2boost")).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn simulate(dir: &Path, extra: &[&str]) -> Output {
    let mut args = vec!["simulate", "--output", dir.to_str().unwrap()];
    args.extend_from_slice(extra);
    l2boost(&args)
}

const SMALL: [&str; 6] = ["--replications", "6", "--set", "iv.p=40", "--set", "te.p=50"];

fn write_csv(path: &Path, names: &[String], cols: &[Vec<f64>]) {
    let mut s = names.join(",");
    s.push('\n');
    for i in 0..cols[0].len() {
        let row: Vec<String> = cols.iter().map(|c| format!("{}", c[i])).collect();
        s.push_str(&row.join(","));
        s.push('\n');
    }
    fs::write(path, s).unwrap();
}

fn fit_json(dir: &Path) -> FitReport {
    serde_json::from_str(&fs::read_to_string(dir.join("fit_report.json")).unwrap()).unwrap()
}

#[test]
fn smoke_run_is_fast() {
    let dir = tempfile::tempdir().unwrap();
    let t = Instant::now();
    let o = simulate(dir.path(), &["--replications", "1"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(t.elapsed().as_secs_f64() < 1.0, "{:?}", t.elapsed());
    let out = String::from_utf8(o.stdout).unwrap();
    assert!(out.contains("post-Lasso*") && out.contains("oBA"), "{out}");
    for f in ["summary.csv", "summary.json", "effective_config.toml"] {
        assert!(dir.path().join(f).is_file());
    }
}

#[test]
fn reruns_and_worker_counts_give_identical_artifacts() {
    let dirs: Vec<_> = (0..3).map(|_| tempfile::tempdir().unwrap()).collect();
    for (dir, workers) in dirs.iter().zip(["1", "1", "8"]) {
        let mut args = SMALL.to_vec();
        args.extend(["--experiment", "te", "--seed", "77", "--workers", workers]);
        let o = simulate(dir.path(), &args);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
    }
    for f in ["summary.csv", "summary.json", "effective_config.toml"] {
        let first = fs::read(dirs[0].path().join(f)).unwrap();
        for d in &dirs[1..] {
            assert_eq!(first, fs::read(d.path().join(f)).unwrap(), "{f}");
        }
    }
}

#[test]
fn effective_config_reproduces_the_run() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let mut args = SMALL.to_vec();
    args.extend(["--variant", "oba", "--set", "boosting.stop_rule=tol"]);
    assert_eq!(code(&simulate(a.path(), &args)), 0);
    let cfg = a.path().join("effective_config.toml");
    assert_eq!(code(&simulate(b.path(), &["--config", cfg.to_str().unwrap()])), 0);
    for f in ["summary.csv", "effective_config.toml"] {
        assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap());
    }
    let text = fs::read_to_string(&cfg).unwrap();
    assert!(text.contains("stop_rule = \"tol\"") && text.contains("variants = [\"oba\"]"), "{text}");
}

#[test]
fn report_rerenders_saved_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let o = simulate(dir.path(), &SMALL);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let d = dir.path().to_str().unwrap();
    let csv = l2boost(&["report", "--output", d, "--format", "csv"]);
    assert_eq!(code(&csv), 0);
    assert_eq!(csv.stdout, fs::read(dir.path().join("summary.csv")).unwrap());
    let text = l2boost(&["report", "--output", d]);
    assert_eq!(text.stdout, o.stdout);
    // idempotent
    assert_eq!(l2boost(&["report", "--output", d]).stdout, text.stdout);
    let json = l2boost(&["report", "--output", d, "--format", "json"]);
    let parsed = SummaryReport::from_json(std::str::from_utf8(&json.stdout).unwrap()).unwrap();
    assert_eq!(parsed, SummaryReport::read(dir.path()).unwrap());
    assert_eq!(parsed.render_json().as_bytes(), &json.stdout[..]);
    assert_eq!(parsed.table.shape(), (2, 4));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    // usage and config errors
    assert_eq!(code(&l2boost(&["report", "--output", d])), 2);
    assert_eq!(code(&l2boost(&["simulate", "--bogus"])), 2);
    assert_eq!(code(&l2boost(&["simulate", "--variant", "lasso"])), 2);
    assert_eq!(code(&simulate(dir.path(), &["--replications", "0"])), 2);
    assert_eq!(code(&simulate(dir.path(), &["--set", "iv.nope=1"])), 2);
    assert_eq!(code(&simulate(dir.path(), &["--config", "/does/not/exist.toml"])), 2);
    assert_eq!(code(&l2boost(&[])), 2);
    assert_eq!(code(&l2boost(&["--help"])), 0);
    // output directory cannot be created
    let blocker = dir.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let o = simulate(&blocker, &["--replications", "1"]);
    assert_eq!(code(&o), 1, "{}", stderr(&o));
}

#[test]
fn string_cell_is_located() {
    let dir = tempfile::tempdir().unwrap();
    let names: Vec<String> = ["y", "d"].iter().map(|s| s.to_string()).chain((1..=15).map(|j| format!("z{j}"))).collect();
    let mut text = names.join(",") + "\n";
    for i in 1..=10 {
        let row: Vec<String> = (0..names.len())
            .map(|j| if i == 7 && names[j] == "z12" { "abc".into() } else { format!("{}", (i * j) as f64 * 0.1) })
            .collect();
        text += &(row.join(",") + "\n");
    }
    let data = dir.path().join("bad.csv");
    fs::write(&data, text).unwrap();
    let o = l2boost(&[
        "fit", "--data", data.to_str().unwrap(), "--outcome", "y", "--treatment", "d", "--instruments", "z*",
        "--output", dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 2);
    let msg = stderr(&o);
    assert!(msg.contains("row 7") && msg.contains("\"z12\""), "{msg}");
}

#[test]
fn fit_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d.csv");
    fs::write(&data, "y,d,x1,x2\n1,2,3,4\n2,1,0,5\n3,3,1,1\n").unwrap();
    let p = data.to_str().unwrap();
    let out = dir.path().to_str().unwrap();
    let base = ["fit", "--data", p, "--output", out];
    let run = |extra: &[&str]| code(&l2boost(&[&base[..], extra].concat()));
    assert_eq!(run(&["--outcome", "y", "--treatment", "d"]), 2);
    assert_eq!(run(&["--outcome", "nope", "--treatment", "d", "--controls", "x*"]), 2);
    assert_eq!(run(&["--outcome", "y", "--treatment", "d", "--controls", "w*"]), 2);
    assert_eq!(run(&["--outcome", "y", "--treatment", "d", "--controls", "x1", "--instruments", "x2"]), 2);
    assert_eq!(run(&["--outcome", "y", "--treatment", "d", "--controls", "x1", "--stop", "bic"]), 2);
    assert_eq!(run(&["--outcome", "y", "--treatment", "d", "--controls", "x1", "--m-max", "0"]), 2);
    assert_eq!(code(&l2boost(&["fit", "--data", "/no/such.csv", "--outcome", "y", "--treatment", "d", "--controls", "x"])), 2);
}

#[test]
fn estimator_failure_is_a_runtime_error() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("flat.csv");
    fs::write(&data, "y,d,x1,x2\n1,2,3,3\n2,1,3,3\n3,3,3,3\n5,1,3,3\n").unwrap();
    let o = l2boost(&[
        "fit", "--data", data.to_str().unwrap(), "--outcome", "y", "--treatment", "d", "--controls", "x*",
        "--output", dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 1, "{}", stderr(&o));
}

#[test]
fn fit_matches_library_on_generated_data() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();

    let te = gen_te(&DgpConfigTe { p: 30, ..Default::default() }, &mut replication_stream(2024, 3)).unwrap();
    let mut names = vec!["y".to_string(), "d".to_string()];
    names.extend((1..=30).map(|j| format!("x{j}")));
    let mut cols = vec![te.y.clone(), te.d.clone()];
    cols.extend(te.x.columns().map(|c| c.to_vec()));
    let data = dir.path().join("te.csv");
    write_csv(&data, &names, &cols);
    let o = l2boost(&[
        "fit", "--data", data.to_str().unwrap(), "--outcome", "y", "--treatment", "d", "--controls", "x",
        "--variant", "oba", "--output", out,
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let rep = fit_json(dir.path());
    let lib = double_selection(&te.y, &te.d, &te.x, &BoostingConfig::new(Variant::Oga)).unwrap();
    assert_eq!(rep.estimate, lib.alpha_hat);
    assert_eq!(rep.se, lib.se);
    assert_eq!(rep.selections[0].m_star, lib.m_star_y);
    let union: Vec<String> = lib.support_union.iter().map(|k| format!("x{}", k + 1)).collect();
    assert_eq!(rep.union.as_ref().unwrap(), &union);
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert!(stdout.contains("95% CI") && stdout.contains(&format!("{:.6}", lib.alpha_hat)), "{stdout}");

    let iv = gen_iv(&DgpConfigIv { p: 20, ..Default::default() }, &mut replication_stream(2024, 4)).unwrap();
    let mut names = vec!["wage".to_string(), "educ".to_string()];
    names.extend((1..=20).map(|j| format!("z{j}")));
    let mut cols = vec![iv.y.clone(), iv.d.clone()];
    cols.extend(iv.z.columns().map(|c| c.to_vec()));
    let data = dir.path().join("iv.csv");
    write_csv(&data, &names, &cols);
    let o = l2boost(&[
        "fit", "--data", data.to_str().unwrap(), "--outcome", "wage", "--treatment", "educ", "--instruments",
        "z*", "--variant", "post-ba", "--stop", "tol", "--output", out, "--format", "json",
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let rep: FitReport = serde_json::from_slice(&o.stdout).unwrap();
    let cfg = BoostingConfig::new(Variant::PostPga).with_stop(StopRule::ResidualTol, 100);
    let lib = iv_estimate(&iv.y, &iv.d, &iv.z, &cfg).unwrap();
    assert_eq!(rep.estimate, lib.beta_hat);
    assert_eq!(rep.se, lib.se);
    assert_eq!(rep.selections[0].m_star, lib.m_star);
    assert_eq!(rep, fit_json(dir.path()));
    assert!((rep.ci_upper - rep.estimate - 1.959963984540054 * rep.se).abs() < 1e-12);
}

/// Solves the normal equations by Gauss-Jordan elimination.
fn ols(cols: &[Vec<f64>], y: &[f64]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let k = cols.len();
    let mut a: Vec<Vec<f64>> = (0..k)
        .map(|i| {
            let mut row: Vec<f64> = (0..k).map(|j| cols[i].iter().zip(&cols[j]).map(|(u, v)| u * v).sum()).collect();
            row.extend((0..k).map(|j| if i == j { 1.0 } else { 0.0 }));
            row.push(cols[i].iter().zip(y).map(|(u, v)| u * v).sum());
            row
        })
        .collect();
    for c in 0..k {
        let piv = (c..k).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())).unwrap();
        a.swap(c, piv);
        let d = a[c][c];
        a[c].iter_mut().for_each(|v| *v /= d);
        for r in 0..k {
            if r != c {
                let f = a[r][c];
                let pivot_row = a[c].clone();
                a[r].iter_mut().zip(&pivot_row).for_each(|(v, p)| *v -= f * p);
            }
        }
    }
    let beta = a.iter().map(|r| r[2 * k]).collect();
    let inv = a.iter().map(|r| r[k..2 * k].to_vec()).collect();
    (beta, inv)
}

#[test]
fn fit_matches_hand_built_oracle() {
    let x1: Vec<f64> = (0..20).map(|i| ((i * 7) % 11) as f64 - 5.0).collect();
    let x2: Vec<f64> = (0..20).map(|i| ((i * i) % 13) as f64 * 0.5).collect();
    let noise: Vec<f64> = (0..20).map(|i| ((i * 5 + 3) % 9) as f64 / 4.0 - 1.0).collect();
    let d: Vec<f64> = (0..20).map(|i| 0.8 * x1[i] - 0.3 * x2[i] + noise[(i + 4) % 20]).collect();
    let y: Vec<f64> = (0..20).map(|i| 1.5 * d[i] + 0.7 * x1[i] + x2[i] + noise[i] * (1.0 + x2[i] / 4.0)).collect();
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("hand.csv");
    let names: Vec<String> = ["y", "d", "x1", "x2"].iter().map(|s| s.to_string()).collect();
    write_csv(&data, &names, &[y.clone(), d.clone(), x1.clone(), x2.clone()]);
    let o = l2boost(&[
        "fit", "--data", data.to_str().unwrap(), "--outcome", "y", "--treatment", "d", "--controls", "x1,x2",
        "--variant", "oba", "--stop", "fixed", "--m-max", "2", "--output", dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let rep = fit_json(dir.path());
    assert_eq!(rep.union.as_deref().unwrap(), &["x1".to_string(), "x2".to_string()]);

    let regs = vec![vec![1.0; 20], d.clone(), x1.clone(), x2.clone()];
    let (beta, inv) = ols(&regs, &y);
    let resid: Vec<f64> = (0..20).map(|i| y[i] - (0..4).map(|j| regs[j][i] * beta[j]).sum::<f64>()).collect();
    // HC1: (X'X)^-1 X' diag(u^2) X (X'X)^-1 * n / (n - k), entry for d
    let meat: Vec<Vec<f64>> = (0..4)
        .map(|a| (0..4).map(|b| (0..20).map(|i| regs[a][i] * regs[b][i] * resid[i] * resid[i]).sum()).collect())
        .collect();
    let mut v = 0.0;
    for a in 0..4 {
        for b in 0..4 {
            v += inv[1][a] * meat[a][b] * inv[b][1];
        }
    }
    let se = (v * 20.0 / 16.0).sqrt();
    assert!((rep.estimate - beta[1]).abs() < 1e-8, "{} vs {}", rep.estimate, beta[1]);
    assert!((rep.se - se).abs() < 1e-8, "{} vs {}", rep.se, se);
}
