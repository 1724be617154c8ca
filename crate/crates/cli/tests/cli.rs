use std::process::Command;
use std::time::Instant;

use freegrad_cli::csv::read_trace;
use freegrad_cli::experiment::csv_name;
use freegrad_cli::{run_experiment, Algorithm, ExperimentConfig, ProblemKind};

fn freegrad(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_freegrad")).args(args).output().expect("binary runs")
}

fn small(problem: ProblemKind, algorithms: Vec<Algorithm>, out: &std::path::Path) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(problem, algorithms, out);
    cfg.dim = 8;
    cfg.n = 20;
    cfg.horizon = 300;
    cfg.seeds = vec![0, 1];
    cfg
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("ok");
    let ok = freegrad(&["--problem", "norm2", "--dim", "3", "--T", "20", "--out", out.to_str().unwrap()]);
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stderr));
    for f in ["manifest.txt", "report.txt", "regret.svg", "stepsize.svg", "free_adagrad_main_seed0.csv"] {
        assert!(out.join(f).exists(), "{f}");
    }

    assert_eq!(freegrad(&["--problem", "norm2", "--T", "0"]).status.code(), Some(2));
    assert_eq!(freegrad(&["--problem", "norm2", "--algos", ""]).status.code(), Some(2));
    assert_eq!(freegrad(&["--problem", "nope"]).status.code(), Some(2));
    assert_eq!(freegrad(&["--dim", "3"]).status.code(), Some(2));
    assert_eq!(freegrad(&["--help"]).status.code(), Some(0));

    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "x").unwrap();
    let bad_out = blocker.join("sub");
    let io = freegrad(&["--problem", "norm2", "--dim", "3", "--T", "5", "--out", bad_out.to_str().unwrap()]);
    assert_eq!(io.status.code(), Some(1));
    let missing = dir.path().join("missing.cfg");
    assert_eq!(freegrad(&["--config", missing.to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn help_documents_precedence() {
    let text = String::from_utf8(freegrad(&["--help"]).stdout).unwrap();
    assert!(text.contains("override file values"));
    assert!(text.contains("--T"));
}

#[test]
fn config_file_is_read_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    let out = dir.path().join("o");
    std::fs::write(&cfg, format!("# smoke\nproblem=norm1\ndim=4\nT=999\nalgos=oracle_fixed\nout={}\n", out.display()))
        .unwrap();
    let r = freegrad(&["--config", cfg.to_str().unwrap(), "--T", "12"]);
    assert_eq!(r.status.code(), Some(0), "{}", String::from_utf8_lossy(&r.stderr));
    assert_eq!(read_trace(&out.join("oracle_fixed_seed0.csv")).unwrap().len(), 12);

    std::fs::write(&cfg, "problem=norm1\nspeed=3\n").unwrap();
    assert_eq!(freegrad(&["--config", cfg.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn corrupted_bound_constant_gives_exit_code_three() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small(ProblemKind::Norm1, vec![Algorithm::FreeAdagradMain], dir.path());
    assert_eq!(run_experiment(&cfg).unwrap().exit_code(), 0);
    cfg.bound_scale = 1e-6;
    let outcome = run_experiment(&cfg).unwrap();
    assert_eq!(outcome.exit_code(), 3);
    let report = std::fs::read_to_string(dir.path().join("report.txt")).unwrap();
    assert!(report.contains("FAIL free_adagrad_main seed=0 regret <= cor_main"));
}

#[test]
fn every_algorithm_certifies_on_every_problem() {
    let dir = tempfile::tempdir().unwrap();
    for problem in [ProblemKind::Norm1, ProblemKind::Norm2, ProblemKind::AbsLinear, ProblemKind::NoisySign] {
        let cfg = small(problem, Algorithm::ALL.to_vec(), &dir.path().join(problem.name()));
        let outcome = run_experiment(&cfg).unwrap();
        let failures: Vec<String> = outcome.violations().map(ToString::to_string).collect();
        assert!(failures.is_empty(), "{problem}: {failures:?}");
        assert_eq!(outcome.cells.len(), 16);
    }
}

#[test]
fn emitted_files_round_trip_and_phases_never_decrease() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small(ProblemKind::AbsLinear, Algorithm::ALL.to_vec(), dir.path());
    let outcome = run_experiment(&cfg).unwrap();
    for cell in &outcome.cells {
        let back = read_trace(&dir.path().join(csv_name(cell.algorithm, cell.seed))).unwrap();
        assert_eq!(back, cell.run.records);
        assert!(back.windows(2).all(|w| w[1].k_t >= w[0].k_t));
    }
}

#[test]
fn repeated_runs_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let algos = Algorithm::ALL.to_vec();
    run_experiment(&small(ProblemKind::NoisySign, algos.clone(), a.path())).unwrap();
    run_experiment(&small(ProblemKind::NoisySign, algos.clone(), b.path())).unwrap();
    for algo in algos {
        for seed in [0, 1] {
            let name = csv_name(algo, seed);
            assert_eq!(std::fs::read(a.path().join(&name)).unwrap(), std::fs::read(b.path().join(&name)).unwrap());
        }
    }
    for f in ["regret.svg", "stepsize.svg", "report.txt"] {
        assert_eq!(std::fs::read(a.path().join(f)).unwrap(), std::fs::read(b.path().join(f)).unwrap(), "{f}");
    }
}

#[test]
fn manifest_records_seeds_and_generator() {
    let dir = tempfile::tempdir().unwrap();
    run_experiment(&small(ProblemKind::Norm2, vec![Algorithm::Stochastic], dir.path())).unwrap();
    let m = std::fs::read_to_string(dir.path().join("manifest.txt")).unwrap();
    assert!(m.contains("generator=ChaCha8Rng"));
    assert!(m.contains("seeds=0,1"));
    assert!(m.contains("streams=init:1,data:2,noise:3"));
    assert!(m.contains("wall_time_s="));
    assert!(m.contains("stochastic_seed1.csv algorithm=stochastic seed=1 rows=300"));
}

#[test]
fn one_dimensional_smoke_run_is_fast() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = ExperimentConfig::new(ProblemKind::Norm1, Algorithm::ALL.to_vec(), dir.path());
    cfg.dim = 1;
    cfg.horizon = 1000;
    let start = Instant::now();
    let outcome = run_experiment(&cfg).unwrap();
    assert!(start.elapsed().as_secs_f64() < 1.0);
    assert_eq!(outcome.exit_code(), 0);
}

#[test]
fn expsum_rejects_algorithms_that_need_x_star() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small(ProblemKind::ExpSum, vec![Algorithm::AdagradOracleD], dir.path());
    assert_eq!(run_experiment(&cfg).err().map(|e| e.exit_code()), Some(2));
    let cfg = small(ProblemKind::ExpSum, vec![Algorithm::FreeAdagradMain, Algorithm::FreeAdagradEps], dir.path());
    let outcome = run_experiment(&cfg).unwrap();
    assert_eq!(outcome.exit_code(), 0);
    assert!(outcome.cells.iter().all(|c| c.final_regret() >= 0.0));
}
