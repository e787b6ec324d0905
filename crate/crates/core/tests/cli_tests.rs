//! The `dsge-lab` command line, driven in-process and as a binary.

use std::path::Path;
use std::process::Command;

use dsge_lab::cli::main_with_args;

fn run(args: &[&str]) -> i32 {
    main_with_args(std::iter::once("dsge-lab").chain(args.iter().copied()))
}

fn leftovers(dir: &Path) -> Vec<String> {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .filter(|n| n.ends_with(".partial"))
        .collect()
}

#[test]
fn help_and_version_succeed_and_bad_usage_fails() {
    assert_eq!(run(&["--help"]), 0);
    assert_eq!(run(&["--version"]), 0);
    assert_eq!(run(&["no-such-command"]), 1);
    assert_eq!(run(&["steady-state", "--shocks", "maybe"]), 1);
}

#[test]
fn steady_state_table() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("ss");
    assert_eq!(run(&["steady-state", "--out", out.to_str().unwrap()]), 0);
    let mut rdr = csv::Reader::from_path(out.join("steady_states.csv")).unwrap();
    let headers = rdr.headers().unwrap().clone();
    assert_eq!(&headers[0], "regime");
    let rows: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
    let names: Vec<&str> = rows.iter().map(|r| &r[0]).collect();
    assert_eq!(names, ["amp-pfp", "amp-afp", "pmp-pfp", "pmp-afp"]);
    let b = headers.iter().position(|h| h == "b").unwrap();
    for r in &rows {
        assert!((r[b].parse::<f64>().unwrap() - 4.0).abs() < 1e-9);
    }
    assert!(leftovers(tmp.path()).is_empty());
}

#[test]
fn stability_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("st");
    assert_eq!(run(&["stability", "--out", out.to_str().unwrap()]), 0);
    let verdicts = std::fs::read_to_string(out.join("verdicts.csv")).unwrap();
    assert!(verdicts.contains("amp-afp") && verdicts.contains("explosive"));
    let map = std::fs::read_to_string(out.join("regime_map.csv")).unwrap();
    assert!(map.lines().count() > 100);
}

#[test]
fn bad_config_is_a_config_error_and_leaves_nothing_behind() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("bad.toml");
    std::fs::write(&cfg, "[learning]\nn_trian = 5\n").unwrap();
    let out = tmp.path().join("out");
    assert_eq!(
        run(&[
            "steady-state",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out.to_str().unwrap()
        ]),
        1
    );
    assert!(!out.exists());
    assert!(leftovers(tmp.path()).is_empty());
}

#[test]
fn missing_run_directory_is_an_io_error() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("nothing-here");
    assert_eq!(run(&["report", "--out", out.to_str().unwrap()]), 3);
    assert_eq!(run(&["fisher", "--out", out.to_str().unwrap()]), 3);
}

#[test]
fn adaptive_respects_regime_and_steps() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("al");
    let code = run(&[
        "adaptive",
        "--regime",
        "pmp-afp",
        "--steps",
        "200",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let traj = std::fs::read_to_string(out.join("al_pmp-afp.csv")).unwrap();
    assert_eq!(traj.lines().count(), 201);
    assert!(!out.join("al_amp-pfp.csv").exists());
}

#[test]
fn train_test_fisher_report_pipeline() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("small.toml");
    std::fs::write(
        &cfg,
        "[learning]\nn_train = 2000\nn_interval = 1000\nn_burn = 500\nn_test = 2\nbatch_size = 32\nn_epi_max = 300\n\n\
         [run]\nphase_window = 1\ntransition_log = { tail = 2 }\n",
    )
    .unwrap();
    let run_dir = tmp.path().join("run");
    let (c, o) = (cfg.to_str().unwrap(), run_dir.to_str().unwrap());
    assert_eq!(
        run(&["train", "--config", c, "--out", o, "--seed", "3", "--shocks", "on"]),
        0
    );
    let echoed = std::fs::read_to_string(run_dir.join("config.toml")).unwrap();
    assert!(echoed.contains("seed = 3") && echoed.contains("shocks = true"));

    assert_eq!(run(&["test", "--out", o]), 0);
    assert_eq!(
        std::fs::read(run_dir.join("test/metrics.csv")).unwrap(),
        std::fs::read(run_dir.join("metrics.csv")).unwrap()
    );

    assert_eq!(run(&["fisher", "--out", o]), 0);
    let summary = std::fs::read_to_string(run_dir.join("fisher/fisher_summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 3);

    assert_eq!(run(&["report", "--out", o]), 0);
    let curves = std::fs::read_to_string(run_dir.join("report/learning_curves.csv")).unwrap();
    assert!(curves
        .lines()
        .next()
        .unwrap()
        .starts_with("variable,cycle,step,value,smoothed,lower,upper"));
    assert!(run_dir.join("report/summary.csv").is_file());
    assert!(leftovers(tmp.path()).is_empty());
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_dsge-lab");
    let status = Command::new(bin).arg("--help").output().unwrap().status;
    assert_eq!(status.code(), Some(0));
    let out = Command::new(bin)
        .args(["train", "--config", "/definitely/missing.toml"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing.toml"));
}
