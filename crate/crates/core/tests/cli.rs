use std::process::{Command, Output};

fn isocubic(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_isocubic")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn solve_converges_on_euler() {
    let o = isocubic(&["solve", "--model", "euler", "--n", "17", "--h", "0.5", "--solver", "linear", "--seed", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let iters: usize = text
        .lines()
        .find_map(|l| l.strip_prefix("iterations "))
        .unwrap()
        .trim()
        .parse()
        .unwrap();
    assert!((4..=15).contains(&iters), "{iters}");
}

#[test]
fn solve_reports_non_convergence() {
    let o = isocubic(&["solve", "--model", "chain", "--n", "9", "--h", "0.5", "--solver", "explicit"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn solve_with_zero_step_takes_one_iteration() {
    for model in ["euler", "alfven", "chain"] {
        let o = isocubic(&["solve", "--model", model, "--n", "5", "--h", "0", "--solver", "explicit"]);
        assert_eq!(o.status.code(), Some(0));
        assert!(stdout(&o).contains("iterations 1"));
    }
}

#[test]
fn solve_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.csv");
    let o = isocubic(&[
        "solve", "--model", "alfven", "--n", "5", "--h", "0.5", "--solver", "newton", "--newton-variant", "v4",
        "--out", path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let csv = std::fs::read_to_string(path).unwrap();
    assert_eq!(csv.lines().count(), 2);
    assert!(csv.lines().nth(1).unwrap().starts_with("alfven,5,5.000000000e-01,newton,42,1,"));
}

#[test]
fn usage_errors() {
    assert_eq!(isocubic(&["solve"]).status.code(), Some(1));
    assert_eq!(isocubic(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(
        isocubic(&["solve", "--model", "euler", "--n", "5", "--h", "-1", "--solver", "linear"]).status.code(),
        Some(1)
    );
    assert_eq!(isocubic(&["bench", "--model", "euler", "--h", "0.5", "--max-n", "2"]).status.code(), Some(1));
    assert_eq!(
        isocubic(&["bench", "--model", "euler", "--h", "0.5", "--max-n", "3", "--out", "/nonexistent/dir/x.csv"])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn bench_row_structure() {
    let o = isocubic(&["bench", "--model", "euler", "--h", "0.5", "--max-n", "33", "--seeds", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "model,N,h,solver,seeds,mean_iter,converged_frac,mean_wall_s,residual_max");
    // 3, 5, 9, 17, 33 × three solvers
    assert_eq!(lines.len(), 16);
    let keys: Vec<(usize, String)> = lines[1..]
        .iter()
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[1].parse().unwrap(), f[3].to_string())
        })
        .collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);
}

#[test]
fn bench_marks_nc_rows() {
    let o = isocubic(&[
        "bench", "--model", "chain", "--h", "0.5", "--max-n", "17", "--solvers", "explicit,linear", "--seeds", "4",
    ]);
    assert_eq!(o.status.code(), Some(0));
    for line in stdout(&o).lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        let frac: f64 = f[6].parse().unwrap();
        assert_eq!(f[5].is_empty(), frac < 1.0, "{line}");
        if f[3] == "linear" {
            assert_eq!(frac, 1.0);
        }
    }
}

#[test]
fn evolve_records_every_stride() {
    let o = isocubic(&["evolve", "--model", "euler", "--n", "9", "--h", "0.1", "--steps", "100", "--record-every", "10"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "step,time,hamiltonian,spectral_drift,solver_iters");
    assert_eq!(lines.len(), 12);
    let max_drift = lines[1..]
        .iter()
        .map(|l| l.split(',').nth(3).unwrap().parse::<f64>().unwrap())
        .fold(0.0, f64::max);
    assert!(max_drift <= 1e-8);
}

#[test]
fn evolve_alfven_completes() {
    let o = isocubic(&["evolve", "--model", "alfven", "--n", "9", "--h", "0.5", "--lambda", "5", "--steps", "50"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn evolve_abort_flushes_partial_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.csv");
    let o = isocubic(&[
        "evolve", "--model", "chain", "--n", "17", "--h", "0.5", "--steps", "5", "--solver", "explicit",
        "--out", path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8(o.stderr).unwrap().contains("step 1"));
    let csv = std::fs::read_to_string(path).unwrap();
    assert_eq!(csv.lines().count(), 2);
}

#[test]
fn riccati_demo() {
    let o = isocubic(&["demo-riccati", "--x", "0,0,1", "--y", "0,0,1", "--h", "1"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("verdict: UNIQUE"));

    let o = isocubic(&["demo-riccati", "--x", "0,0,1", "--y", "0,0,2", "--h", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("verdict: NON-UNIQUE"));
    assert!(text.contains("p_par  = (0.000000000000, 0.000000000000, 2.000000000000)"));

    let o = isocubic(&["demo-riccati", "--seed", "11"]);
    assert_eq!(o.status.code(), Some(0));
    for line in stdout(&o).lines().filter(|l| l.contains("residual")) {
        let r: f64 = line.split_whitespace().last().unwrap().parse().unwrap();
        assert!(r <= 1e-12);
    }

    let o = isocubic(&["demo-riccati", "--x", "0,0,1", "--y", "0,0,0.5", "--h", "1"]);
    assert_eq!(o.status.code(), Some(2));
}
