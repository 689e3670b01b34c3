use std::path::Path;
use std::process::{Command, Output};

use mixreg::blur::{BlurOperator, KernelSpec};
use mixreg::io::read_columns_file;
use mixreg::penalty::WeightField;
use mixreg::signals::{add_noise, synth_signal, Grid, NoiseSpec, Signal, SignalKind};

fn mixreg(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mixreg"))
        .args(args)
        .current_dir(cwd)
        .output()
        .unwrap()
}

fn noisy_input(dir: &Path, kind: SignalKind) -> String {
    let g = Grid::new(130).unwrap();
    let op = BlurOperator::build(g, KernelSpec::new(0.05).unwrap());
    let (v, _) = add_noise(
        &op.apply(&synth_signal(kind, g)).unwrap(),
        &NoiseSpec::new(0.01, 5).unwrap(),
    )
    .unwrap();
    let path = dir.join("input.csv");
    v.write_csv(&path).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn solve_each_method_with_morozov() {
    let dir = tempfile::tempdir().unwrap();
    let input = noisy_input(dir.path(), SignalKind::Example31);
    for (method, theta) in [
        ("tikhonov", "auto"),
        ("tv", "auto"),
        ("mixed", "binary:0,0.4"),
        ("mixed", "auto"),
    ] {
        let out = dir.path().join(format!("{method}.csv"));
        let o = mixreg(
            &[
                "solve",
                "--method",
                method,
                "--input",
                &input,
                "--sigma-b",
                "0.05",
                "--morozov",
                "1.1",
                "--theta",
                theta,
                "--out",
                out.to_str().unwrap(),
            ],
            dir.path(),
        );
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        let stderr = String::from_utf8_lossy(&o.stderr);
        assert!(
            stderr.contains("alpha") && stderr.contains("converged true"),
            "{stderr}"
        );
        let restored = Signal::read_csv(&out).unwrap();
        assert_eq!(restored.len(), 131);
    }
}

#[test]
fn solve_fixed_alpha_to_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let input = noisy_input(dir.path(), SignalKind::Example32);
    let o = mixreg(
        &[
            "solve",
            "--method",
            "tv",
            "--input",
            &input,
            "--sigma-b",
            "0.05",
            "--alpha",
            "1e-3",
        ],
        dir.path(),
    );
    assert!(o.status.success());
    let stdout = String::from_utf8(o.stdout).unwrap();
    let mut lines = stdout.lines();
    assert_eq!(lines.next(), Some("t,value"));
    assert_eq!(lines.count(), 131);
}

#[test]
fn theta_command_and_csv_theta() {
    let dir = tempfile::tempdir().unwrap();
    let input = noisy_input(dir.path(), SignalKind::Example31);
    let theta = dir.path().join("theta.csv");
    let o = mixreg(
        &[
            "theta",
            "--input",
            &input,
            "--sigma-b",
            "0.05",
            "--out",
            theta.to_str().unwrap(),
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (header, cols) = read_columns_file(&theta).unwrap();
    assert_eq!(header, ["t", "theta"]);
    let w = WeightField::read_csv(&theta).unwrap();
    assert_eq!(
        cols[1].iter().copied().fold(f64::NEG_INFINITY, f64::max),
        1.0
    );
    assert_eq!(w.theta().iter().copied().fold(f64::INFINITY, f64::min), 0.0);

    let o = mixreg(
        &[
            "solve",
            "--method",
            "mixed",
            "--input",
            &input,
            "--sigma-b",
            "0.05",
            "--theta",
            theta.to_str().unwrap(),
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn bad_arguments_fail_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let input = noisy_input(dir.path(), SignalKind::Example31);
    for args in [
        vec![
            "solve",
            "--method",
            "mixed",
            "--input",
            &input,
            "--sigma-b",
            "0.05",
            "--theta",
            "binary:0.5,0.2",
        ],
        vec![
            "solve",
            "--method",
            "tv",
            "--input",
            "missing.csv",
            "--sigma-b",
            "0.05",
        ],
        vec![
            "solve",
            "--method",
            "tv",
            "--input",
            &input,
            "--sigma-b",
            "-1",
        ],
        vec!["run", "--config", "missing.json"],
    ] {
        let o = mixreg(&args, dir.path());
        assert!(!o.status.success());
        assert!(
            String::from_utf8_lossy(&o.stderr).starts_with("error: "),
            "{args:?}"
        );
    }
    let o = mixreg(
        &[
            "solve",
            "--method",
            "tv",
            "--input",
            &input,
            "--sigma-b",
            "0.05",
            "--alpha",
            "1",
            "--morozov",
            "1.1",
        ],
        dir.path(),
    );
    assert!(!o.status.success());
}

#[test]
fn run_writes_summary_and_plots() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("cfg.json"),
        r#"{"n": 64, "seeds": [0, 1, 2], "methods": ["tikhonov", "mixed_binary"], "out_dir": "first"}"#,
    )
    .unwrap();
    let o = mixreg(
        &["run", "--config", "cfg.json", "--seeds", "4,5"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let summary = std::fs::read_to_string(dir.path().join("first/summary.csv")).unwrap();
    let seeds: Vec<&str> = summary
        .lines()
        .skip(1)
        .map(|l| l.split(',').next().unwrap())
        .collect();
    assert_eq!(seeds, ["4", "4", "5", "5"]);
    assert!(dir
        .path()
        .join("first/seed5_mixed_binary_theta.svg")
        .exists());
    assert!(String::from_utf8_lossy(&o.stdout).contains("plots written"));
}
