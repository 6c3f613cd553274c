use std::process::{Command, Output};

use darkspin::cli::Dataset;

fn darkspin(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_darkspin"));
    cmd.args(args).env_remove("DARKSPIN_WORKERS");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).expect("utf-8 output")
}

#[test]
fn figure_output_is_independent_of_workers() {
    let one = darkspin(&["figure", "fig8", "--grid", "200", "--workers", "1"], &[]);
    let env = darkspin(
        &["figure", "fig8", "--grid", "200"],
        &[("DARKSPIN_WORKERS", "3")],
    );
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(env.status.code(), Some(0));
    assert_eq!(one.stdout, env.stdout);
    let ds = Dataset::from_csv(&stdout(&one)).unwrap();
    assert_eq!(
        ds.columns,
        vec!["K", "zeta3", "concurrence", "concurrence_cos_phase"]
    );
    assert_eq!(ds.metadata["figure"], "fig8");
}

#[test]
fn exit_codes() {
    assert_eq!(darkspin(&["figure", "fig99"], &[]).status.code(), Some(2));
    assert_eq!(
        darkspin(&["figure", "fig4", "--theta", "1"], &[])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        darkspin(&["oracle-check", "-N", "25"], &[]).status.code(),
        Some(3)
    );
    let three = [
        "sweep",
        "--quantity",
        "xi3",
        "--axis",
        "n=0;2;3",
        "--axis",
        "theta=0;1;2",
        "--axis",
        "K=0;1;2",
    ];
    assert_eq!(darkspin(&three, &[]).status.code(), Some(2));
    assert_eq!(
        darkspin(&["figure", "fig2", "--workers", "0"], &[])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn bell_pair_oracle_check() {
    let out = darkspin(
        &["oracle-check", "-N", "2", "-n", "1", "--theta", "pi:0.5"],
        &[],
    );
    assert_eq!(out.status.code(), Some(0));
    let ds = Dataset::from_csv(&stdout(&out)).unwrap();
    assert_eq!(ds.metadata["passed"], "true");
    assert!(ds.value("concurrence", "max_dev").unwrap() <= 1e-15);
}

#[test]
fn config_file_and_json_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    let out = dir.path().join("out.json");
    std::fs::write(&cfg, "N = 10\nformat = \"json\"\n").unwrap();
    let o = darkspin(
        &[
            "figure",
            "fig2",
            "--config",
            cfg.to_str().unwrap(),
            "--output",
            out.to_str().unwrap(),
        ],
        &[],
    );
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let ds: Dataset = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(ds.rows.len(), 11);
    assert_eq!(ds.metadata["N"], "10");
    std::fs::write(&cfg, "N = 10\nbogus = 1\n").unwrap();
    let o = darkspin(&["figure", "fig2", "--config", cfg.to_str().unwrap()], &[]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn sweep_from_flags() {
    let o = darkspin(
        &[
            "sweep",
            "--quantity",
            "zeta3",
            "--axis",
            "p=0;1;11",
            "--channel",
            "dpc",
            "-n",
            "4",
        ],
        &[],
    );
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let ds = Dataset::from_csv(&stdout(&o)).unwrap();
    let z = ds.column("zeta3").unwrap();
    assert_eq!(z.len(), 11);
    assert!(z[0] > 0.0 && z[10] == 0.0);
}

#[test]
fn help_documents_environment() {
    let o = darkspin(&["--help"], &[]);
    assert!(stdout(&o).contains("DARKSPIN_WORKERS"));
}
