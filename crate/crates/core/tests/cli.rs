use std::path::Path;
use std::process::{Command, Output};

fn stargen(args: &[&str], threads: Option<&str>) -> Output {
    let mut c = Command::new(env!("CARGO_BIN_EXE_stargen"));
    c.args(args);
    match threads {
        Some(t) => c.env("STARGEN_THREADS", t),
        None => c.env_remove("STARGEN_THREADS"),
    };
    c.output().unwrap()
}

fn text(o: &Output) -> String {
    format!("{}{}", String::from_utf8_lossy(&o.stdout), String::from_utf8_lossy(&o.stderr))
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn configs() -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

#[test]
fn uhf2_run_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = stargen(&["run", "--preset", "uhf2", "--depth", "4", "--truncate", "3", "--out", out], None);
    assert_eq!(code(&o), 0, "{}", text(&o));
    for f in ["snapshot.json", "scaffold.json", "generator.json", "report.json"] {
        let s = std::fs::read_to_string(dir.path().join(f)).unwrap();
        assert!(s.ends_with("}\n"), "{f}");
    }
    assert!(text(&o).contains("checks pass"));
}

#[test]
fn goodearl_config_passes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("goodearl.json");
    let o = stargen(&["run", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()], None);
    assert_eq!(code(&o), 0, "{}", text(&o));
}

#[test]
fn missing_config_field_reports_path() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.json");
    std::fs::write(
        &p,
        r#"{"system": {"villadsen": {"base": {"dim": 0, "points": [[]]}, "c": [1], "k": [1], "l": [1], "eval_points": [[0]], "n0": 2}}, "depth": 3, "truncate": 2}"#,
    )
    .unwrap();
    let o = stargen(&["run", "--config", p.to_str().unwrap()], None);
    assert_eq!(code(&o), 1);
    assert!(text(&o).contains("system.villadsen.s_multiplicities"), "{}", text(&o));
}

#[test]
fn unknown_preset_is_usage_error() {
    let o = stargen(&["run", "--preset", "cuntz"], None);
    assert_eq!(code(&o), 1, "{}", text(&o));
}

#[test]
fn insufficient_depth_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let o = stargen(&["run", "--preset", "goodearl", "--depth", "2", "--truncate", "1", "--out", dir.path().to_str().unwrap()], None);
    assert_eq!(code(&o), 3, "{}", text(&o));
}

#[test]
fn invalid_thread_count_is_usage_error() {
    let o = stargen(&["run", "--preset", "uhf2"], Some("zero"));
    assert_eq!(code(&o), 1);
    assert!(text(&o).contains("STARGEN_THREADS"));
}

#[test]
fn report_filter_and_empty_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert_eq!(code(&stargen(&["run", "--preset", "uhf2", "--out", out], None)), 0);

    let o = stargen(&["report", "--out", out, "--filter", "prod*"], None);
    assert_eq!(code(&o), 0);
    let t = text(&o);
    let rows: Vec<&str> = t.lines().filter(|l| l.starts_with("pass") || l.starts_with("FAIL")).collect();
    assert!(!rows.is_empty());
    assert!(rows.iter().all(|l| l.contains("prod")), "{t}");

    let o = stargen(&["report", "--out", out, "--filter", "no-such-check*"], None);
    assert!(text(&o).contains("no checks found"));

    let empty = dir.path().join("empty.json");
    std::fs::write(&empty, "{}").unwrap();
    let o = stargen(&["report", "--report", empty.to_str().unwrap()], None);
    assert_eq!(code(&o), 0);
    assert!(text(&o).contains("no checks found"));
}

#[test]
fn export_writes_artifacts_without_report() {
    let dir = tempfile::tempdir().unwrap();
    let o = stargen(&["export", "--preset", "uhf2", "--out", dir.path().to_str().unwrap()], None);
    assert_eq!(code(&o), 0, "{}", text(&o));
    assert!(dir.path().join("generator.json").exists());
    assert!(!dir.path().join("report.json").exists());
}

#[test]
fn output_is_identical_across_thread_counts() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for (d, t) in [(&a, "1"), (&b, "4")] {
        let o = stargen(&["run", "--preset", "goodearl", "--depth", "3", "--truncate", "2", "--out", d.path().to_str().unwrap()], Some(t));
        assert_eq!(code(&o), 0, "{}", text(&o));
    }
    for f in ["snapshot.json", "scaffold.json", "generator.json", "report.json"] {
        let x = std::fs::read(a.path().join(f)).unwrap();
        let y = std::fs::read(b.path().join(f)).unwrap();
        assert!(x == y, "{f} differs");
    }
}
