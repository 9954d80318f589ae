use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn weakamp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_weakamp"))
        .args(args)
        .output()
        .expect("spawn weakamp")
}

fn weakamp_in(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_weakamp"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("spawn weakamp")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

/// Column index by header name, and the parsed data rows.
fn table(text: &str) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with('#'));
    let header: Vec<String> = lines.next().unwrap().split(',').map(str::to_string).collect();
    let rows = lines
        .map(|l| l.split(',').map(|f| f.parse().unwrap_or(f64::NAN)).collect())
        .collect();
    (header, rows)
}

fn column(header: &[String], name: &str) -> usize {
    header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"))
}

#[test]
fn gaussian_shift_at_real_phase_has_no_position_shift() {
    let o = weakamp(&[
        "shift", "--meter", "gaussian", "--r", "1", "--theta1", "1.5707963", "--theta2", "1.5707963",
        "--phi0", "0", "--g-over-dp", "0.1", "--delta", "1",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (h, rows) = table(&stdout(&o));
    assert_eq!(h, ["dp_shift", "dq_shift", "prob"]);
    assert_eq!(rows[0][1], 0.0);
}

#[test]
fn qubit_shift_without_postselection_effect() {
    let o = weakamp(&["shift", "--meter", "qubit", "--channel", "none", "--theta1", "0", "--theta2", "0", "--g", "0.1"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (h, rows) = table(&stdout(&o));
    assert_eq!(h, ["reading", "prob"]);
    // sin^2(0.1)
    assert!((rows[0][0] - 9.966711079379184e-3).abs() < 1e-15);
}

#[test]
fn zero_coupling_gives_zero_shifts() {
    let o = weakamp(&["shift", "--meter", "gaussian", "--g-over-dp", "0", "--theta1", "0.7", "--theta2", "2.1", "--phi0", "1.3"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (_, rows) = table(&stdout(&o));
    assert_eq!(rows[0][0], 0.0);
    assert_eq!(rows[0][1], 0.0);
}

#[test]
fn parameters_are_echoed() {
    let o = weakamp(&["shift", "--meter", "qubit", "--channel", "depolarizing", "--gamma", "0.2", "--theta1", "1", "--theta2", "2", "--phi0", "3", "--g", "0.05"]);
    let first = stdout(&o).lines().next().unwrap().to_string();
    for kv in ["meter=qubit", "g=0.05", "channel=depolarizing", "gamma=0.2", "theta1=1", "theta2=2", "phi0=3"] {
        assert!(first.split_whitespace().any(|t| t == kv), "{kv} missing from {first}");
    }
}

#[test]
fn usage_errors_exit_2() {
    let cases: &[&[&str]] = &[
        &["shift", "--meter", "qubit", "--theta1", "0", "--theta2", "0"],
        &["shift", "--meter", "qubit", "--g-over-dp", "0.1", "--theta1", "0", "--theta2", "0"],
        &["shift", "--meter", "gaussian", "--g", "0.1", "--theta1", "0", "--theta2", "0"],
        &["shift", "--meter", "qubit", "--g", "0.1", "--gamma", "0.1", "--theta1", "0", "--theta2", "0"],
        &["shift", "--meter", "qubit", "--g", "0.1", "--channel", "depolarizing", "--r", "0.5", "--theta1", "0", "--theta2", "0"],
        &["shift", "--meter", "qubit", "--g", "0.1", "--r", "1.5", "--theta1", "0", "--theta2", "0"],
        &["shift", "--meter", "qubit", "--g", "0.1", "--channel", "depolarizing", "--gamma", "2", "--theta1", "0", "--theta2", "0"],
        &["shift", "--meter", "sideways", "--g", "0.1", "--theta1", "0", "--theta2", "0"],
        &["fig", "7"],
        &["fig", "1", "--steps", "1"],
        &["fig", "1", "--start", "0.5", "--stop", "0.5"],
        &["fig", "1", "--channel", "depolarizing"],
        &["fig", "4", "--channel", "amplitude-damping"],
        &["nonsense"],
    ];
    for args in cases {
        let o = weakamp(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", stderr(&o));
        assert!(!stderr(&o).is_empty(), "{args:?}");
    }
}

#[test]
fn vanishing_postselection_exits_3() {
    let o = weakamp(&["shift", "--meter", "qubit", "--g", "0.1", "--theta1", "0", "--theta2", "3.141592653589793"]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(stderr(&o).contains("postselection"));
}

#[test]
fn unwritable_output_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("missing").join("fig1.csv");
    let o = weakamp(&["fig", "1", "--steps", "3", "-o", target.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# qubit run\nmeter = qubit\ng=0.2\n\nr=0.5\n").unwrap();
    let cfg = cfg.to_str().unwrap();

    let from_file = stdout(&weakamp(&["max", "--config", cfg]));
    let from_flags = stdout(&weakamp(&["max", "--meter", "qubit", "--g", "0.2", "--r", "0.5"]));
    assert_eq!(from_file, from_flags);

    let overridden = weakamp(&["max", "--config", cfg, "--g", "0.3"]);
    assert!(overridden.status.success(), "{}", stderr(&overridden));
    let text = stdout(&overridden);
    assert!(text.lines().next().unwrap().contains(" g=0.3"));
    assert_eq!(text, stdout(&weakamp(&["max", "--meter", "qubit", "--g", "0.3", "--r", "0.5"])));

    let flag_first = stdout(&weakamp(&["max", "--g", "0.3", "--config", cfg]));
    assert_eq!(flag_first, text);
}

#[test]
fn config_rejects_unknown_keys_and_missing_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "meter=qubit\ncoupling=0.1\n").unwrap();
    let o = weakamp(&["max", "--config", cfg.to_str().unwrap(), "--g", "0.1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("coupling"));

    let fig_key = dir.path().join("fig.cfg");
    fs::write(&fig_key, "theta1=1\n").unwrap();
    let o = weakamp(&["fig", "1", "--config", fig_key.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));

    let missing = dir.path().join("absent.cfg");
    let o = weakamp(&["max", "--config", missing.to_str().unwrap(), "--meter", "qubit", "--g", "0.1"]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn csv_format_is_pinned() {
    let text = stdout(&weakamp(&["fig", "2", "--steps", "5"]));
    assert!(!text.contains('\r'));
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "# command=fig n=2 parameter=r start=0 stop=1 steps=5"
    );
    assert_eq!(lines.next().unwrap(), "r,reading_max_g0.1,reading_max_g0.05,reading_max_g0.03");
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 5);
    for row in rows {
        for field in row.split(',') {
            let (mantissa, _) = field.split_once('e').unwrap();
            let digits = mantissa.chars().filter(char::is_ascii_digit).count();
            assert_eq!(digits, 17, "{field}");
        }
    }
}

#[test]
fn identical_flags_give_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    for n in ["1", "3", "6"] {
        let a = dir.path().join(format!("a{n}.csv"));
        let b = dir.path().join(format!("b{n}.csv"));
        for p in [&a, &b] {
            let o = weakamp(&["fig", n, "--steps", "7", "-o", p.to_str().unwrap()]);
            assert!(o.status.success(), "{}", stderr(&o));
            assert!(o.stdout.is_empty());
        }
        assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap(), "fig {n}");
    }
}

#[test]
fn fig1_pure_limit_row_equals_coupling() {
    let (h, rows) = table(&stdout(&weakamp(&["fig", "1"])));
    assert_eq!(rows.len(), 101);
    let r0 = &rows[0];
    assert_eq!(r0[0], 0.0);
    // Dp = 1/2 at delta = 1
    for (c, g) in [("0.1", 0.05), ("0.05", 0.025), ("0.03", 0.015)] {
        let v = r0[column(&h, &format!("dp_max_g{c}dp"))];
        assert!((v - g).abs() < 1e-15, "{c}: {v}");
    }
    let rs: Vec<f64> = rows.iter().map(|r| r[0]).collect();
    assert!(rs.windows(2).all(|w| w[0] < w[1]));
    assert_eq!(*rs.last().unwrap(), 1.0);
}

#[test]
fn fig3_doubling_threshold() {
    let o = weakamp(&["fig", "3", "--start", "0.134", "--stop", "0.2", "--steps", "2"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (h, rows) = table(&stdout(&o));
    assert_eq!(rows[0][0], 0.134);
    let g = 0.03 * 0.5;
    let v = rows[0][column(&h, "dp_max_g0.03dp")];
    assert!((v / (2.0 * g) - 1.0).abs() < 0.01, "{v}");
}

#[test]
fn fig3_phase_damping_matches_depolarizing() {
    let dep = table(&stdout(&weakamp(&["fig", "3", "--steps", "11"]))).1;
    let deph = table(&stdout(&weakamp(&["fig", "3", "--steps", "11", "--channel", "phase-damping"]))).1;
    for (a, b) in dep.iter().zip(&deph) {
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() <= 1e-14 * x.abs().max(1e-300), "gamma {}: {x} vs {y}", a[0]);
        }
    }
}

#[test]
fn fig5_is_flat_in_gamma() {
    let o = weakamp(&["fig", "5", "--stop", "0.95", "--steps", "20"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (h, rows) = table(&stdout(&o));
    assert_eq!(rows.len(), 20);
    for name in ["dp_max_g0.1dp", "dq_max_g0.1dp"] {
        let c = column(&h, name);
        let first = rows[0][c];
        for r in &rows {
            assert!(((r[c] - first) / first).abs() < 1e-4, "{name} at gamma {}: {} vs {first}", r[0], r[c]);
        }
    }
}

#[test]
fn fig6_is_flat_in_gamma() {
    let (h, rows) = table(&stdout(&weakamp(&["fig", "6", "--stop", "0.95", "--steps", "5"])));
    let c = column(&h, "reading_max_g0.1");
    for r in &rows {
        assert!((r[c] - rows[0][c]).abs() < 1e-4 * rows[0][c], "gamma {}", r[0]);
    }
}

#[test]
fn max_and_optimize_agree() {
    let closed = table(&stdout(&weakamp(&["max", "--meter", "gaussian", "--g-over-dp", "0.1", "--channel", "depolarizing", "--gamma", "0.3"]))).1;
    let o = weakamp(&["optimize", "--meter", "gaussian", "--quantity", "dq", "--g-over-dp", "0.1", "--channel", "depolarizing", "--gamma", "0.3"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (h, rows) = table(&stdout(&o));
    let v = rows[0][column(&h, "value")];
    assert!((v - closed[1][1]).abs() < 1e-6 * closed[1][1], "{v} vs {}", closed[1][1]);
}

#[test]
fn amplitude_damping_max_uses_optimizer() {
    let o = weakamp(&["max", "--meter", "qubit", "--g", "0.1", "--channel", "amplitude-damping", "--gamma", "0.5"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.lines().nth(2).unwrap().ends_with(",optimizer"));
}

#[test]
fn verify_passes_and_writes_adjudication() {
    let dir = tempfile::tempdir().unwrap();
    let o = weakamp_in(dir.path(), &["verify"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).ends_with("result: pass\n"));
    let csv = fs::read_to_string(dir.path().join("adjudication.csv")).unwrap();
    assert!(csv.lines().nth(1).unwrap().starts_with("dispute,variant,input_id"));
}

#[test]
fn verify_flags_a_perturbed_formula() {
    let dir = tempfile::tempdir().unwrap();
    let o = weakamp_in(dir.path(), &["verify", "--samples", "50", "--perturb", "postselected_reading=1e-4"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("postselected_reading"), "{}", stderr(&o));

    let o = weakamp_in(dir.path(), &["verify", "--samples", "50", "--perturb", "no_such_formula=1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn verify_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let run = |p: &Path| weakamp(&["verify", "--seed", "7", "--samples", "1000", "--csv", p.to_str().unwrap()]);
    let (oa, ob) = (run(&a), run(&b));
    assert_eq!(oa.status.code(), Some(0));
    assert_eq!(oa.stdout, ob.stdout);
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}
