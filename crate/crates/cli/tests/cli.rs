use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn netgame(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_netgame"))
        .args(args)
        .output()
        .expect("run netgame")
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

/// Data rows as column vectors, header dropped.
fn rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .skip(1)
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.split(',').map(String::from).collect())
        .collect()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn solve_uniform_three() {
    let out = stdout(&netgame(&["solve", "--set", "n=3", "--set", "prior.kind=uniform", "--set", "lambda=0.4"]));
    let r = rows(&out);
    assert_eq!(r.len(), 12);
    for row in r {
        let d: f64 = row[3].parse().unwrap();
        let a: f64 = row[5].parse().unwrap();
        assert!((a - (1.0 + d)).abs() < 1e-10);
    }
}

#[test]
fn solve_point_mass_triangle_from_config() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "k3.txt", "n 3\n0 1\n0 2\n1 2\n");
    let cfg = write(
        dir.path(),
        "run.cfg",
        "# complete graph on three vertices\nn = 3\nprior.kind = point_mass\npoint_mass.graph = k3.txt\nlambda = 0.3\n",
    );
    let out = stdout(&netgame(&["solve", "--config", &cfg]));
    let on: Vec<_> = rows(&out).into_iter().filter(|r| r[4] == "true").collect();
    assert_eq!(on.len(), 3);
    for r in on {
        assert_eq!(r[5], "2.5");
    }
}

#[test]
fn lambda_at_bound_is_rejected_with_one_line() {
    let out = netgame(&["solve", "--set", "n=3", "--set", "prior.kind=uniform", "--set", "lambda=0.5"]);
    assert!(!out.status.success());
    let err = String::from_utf8(out.stderr).unwrap();
    assert_eq!(err.lines().count(), 1, "{err}");
    assert!(out.stdout.is_empty());
}

#[test]
fn error_paths_print_one_line() {
    let cases: &[&[&str]] = &[
        &["solve"],
        &["solve", "--set", "n=3", "--set", "lambda=0.1"],
        &["solve", "--set", "n=3", "--set", "prior.kind=banana", "--set", "lambda=0.1"],
        &["solve", "--config", "/nonexistent/run.cfg"],
        &["solve", "--set", "n=17", "--set", "prior.kind=uniform", "--set", "lambda=0.01"],
        &["solve", "--set", "n=14", "--set", "prior.kind=uniform", "--set", "lambda=0.01"],
        &["enumerate", "--set", "n=8"],
        &["walks", "--set", "n=3", "--set", "prior.kind=uniform", "--out", "/nonexistent/x.csv"],
        &["frobnicate"],
    ];
    for args in cases {
        let out = netgame(args);
        assert!(!out.status.success(), "{args:?}");
        let err = String::from_utf8(out.stderr).unwrap();
        assert_eq!(err.lines().count(), 1, "{args:?}: {err}");
    }
}

#[test]
fn compare_uniform_four() {
    let out = stdout(&netgame(&["compare", "--set", "n=4", "--set", "prior.kind=uniform", "--set", "lambda=0.2"]));
    let summary = out.lines().find(|l| l.starts_with("# max_abs_diff,uniform,")).unwrap();
    let diff: f64 = summary.rsplit(',').next().unwrap().parse().unwrap();
    assert!(diff < 1e-10);
    assert_eq!(rows(&out).len(), 32);
}

#[test]
fn posterior_two_graph_ambiguity() {
    let out = stdout(&netgame(&[
        "posterior", "--set", "n=3", "--set", "prior.kind=uniform", "--set", "observer=1:100", "--set", "target=0",
    ]));
    let r = rows(&out);
    assert_eq!(r.len(), 2);
    assert!(r.iter().all(|row| row[6] == "0.5"));
}

#[test]
fn sweep_fifty_vertices() {
    let out = stdout(&netgame(&["sweep-welfare", "--set", "n=50", "--set", "lambda=0.005"]));
    let r = rows(&out);
    assert_eq!(r.len(), 25);
    for row in r {
        let w: Vec<f64> = row[3..].iter().map(|x| x.parse().unwrap()).collect();
        assert!(w[2] > w[0] && w[0] > w[1]);
    }
}

#[test]
fn closed_form_families() {
    let uni = stdout(&netgame(&["closed-form", "--set", "n=4", "--set", "family=uniform", "--set", "lambda=0.2"]));
    assert_eq!(rows(&uni).len(), 4);
    let er = stdout(&netgame(&[
        "closed-form", "--set", "n=4", "--set", "family=er", "--set", "er.p=0.5", "--set", "lambda=0.2",
    ]));
    for (a, b) in rows(&uni).iter().zip(rows(&er)) {
        assert_eq!(a[6], b[6]);
    }
    let cp = stdout(&netgame(&["closed-form", "--set", "n=5", "--set", "prior.kind=cp_uniform", "--set", "lambda=0.2"]));
    let core = &rows(&cp)[0];
    assert_eq!(core[4], "core");
    assert!(core[6].starts_with("3.23529"));
}

#[test]
fn walks_long_format() {
    let out = stdout(&netgame(&["walks", "--set", "n=3", "--set", "prior.kind=uniform", "--max-order", "3"]));
    let r = rows(&out);
    assert_eq!(r.len(), 12 * 4);
    // beta of order s is d (3/2)^(s-1) under the uniform prior
    for row in r {
        let (d, s): (i32, i32) = (row[3].parse().unwrap(), row[5].parse().unwrap());
        let beta: f64 = row[6].parse().unwrap();
        let expect = if s == 0 { 1.0 } else { d as f64 * 1.5f64.powi(s - 1) };
        assert!((beta - expect).abs() < 1e-12);
    }
}

#[test]
fn table_prior_compare_and_out_file() {
    let dir = tempfile::tempdir().unwrap();
    // path 0-1-2 and the triangle on three vertices, codes by upper-triangle pairs
    write(dir.path(), "prior.txt", "3 0.25\n7 0.75\n");
    let cfg = write(dir.path(), "run.cfg", "n=3\nprior.kind=table\ntable.path=prior.txt\nlambda=0.3\n");
    let out = dir.path().join("cmp.csv");
    let status = netgame(&["compare", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(status.status.success());
    assert!(status.stdout.is_empty());
    let text = fs::read_to_string(out).unwrap();
    let summary = text.lines().last().unwrap();
    assert!(summary.starts_with("# max_abs_diff,reduced,"));
    let diff: f64 = summary.rsplit(',').next().unwrap().parse().unwrap();
    assert!(diff < 1e-10);
}

#[test]
fn output_independent_of_thread_count() {
    let base = ["--set", "n=9", "--set", "prior.kind=uniform", "--set", "lambda=0.06"];
    let run = |threads: &str| {
        let mut args = vec!["solve", "--threads", threads];
        args.extend(base);
        netgame(&args).stdout
    };
    let one = run("1");
    assert!(!one.is_empty());
    assert_eq!(one, run("4"));
    let sweep = |threads: &str| netgame(&["sweep-welfare", "--threads", threads, "--set", "n=50", "--set", "lambda=0.0101"]).stdout;
    assert_eq!(sweep("1"), sweep("4"));
}
