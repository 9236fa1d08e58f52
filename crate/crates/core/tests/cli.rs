use std::fs;

use cavity_rwa::cli::{run_with, EXIT_BUDGET, EXIT_CONFIG, EXIT_OK};
use cavity_rwa::experiments::CONFIG_KEYS;

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("cavity-rwa").chain(args.iter().copied());
    let code = run_with(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

#[test]
fn help_lists_every_key_with_units() {
    let (code, out, _) = run(&["--help"]);
    assert_eq!(code, EXIT_OK);
    for k in CONFIG_KEYS {
        assert!(out.contains(k.key), "missing {}", k.key);
        assert!(out.contains(&format!("[{}]", k.unit)));
    }
}

#[test]
fn validate_rejects_unknown_key() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.cfg");
    fs::write(&bad, "[scenario]\nid = fig1\n[atoms]\nmass = 3\n").unwrap();
    let (code, _, err) = run(&["validate", bad.to_str().unwrap()]);
    assert_eq!(code, EXIT_CONFIG);
    assert_eq!(err.lines().count(), 1);
    assert!(err.starts_with("error:config:"), "{err}");
    assert!(err.contains("atoms.mass"));
}

#[test]
fn validate_accepts_preset_and_refuses_budget() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("fig6.cfg");
    fs::write(&cfg, "[scenario]\nid = fig6\nscale = 1.0\n").unwrap();
    let (code, out, _) = run(&["validate", cfg.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK, "{out}");
    assert!(out.starts_with("ok scenario=fig6"));
    let (code, _, err) = run(&["validate", cfg.to_str().unwrap(), "--set", "run.budget_seconds=1"]);
    assert_eq!(code, EXIT_BUDGET);
    assert!(err.starts_with("error:budget:"));
}

#[test]
fn invalid_physics_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("edge.cfg");
    // symmetric set reaching below mode 1
    fs::write(&cfg, "[modes]\npolicy = symmetric\ncenter_index = 10\nhalf_count = 10\n").unwrap();
    let (code, _, err) = run(&["validate", cfg.to_str().unwrap()]);
    assert_eq!(code, EXIT_CONFIG, "{err}");
    let (code, _, _) = run(&["run", "--scenario", "fig9"]);
    assert_eq!(code, EXIT_CONFIG);
    let (code, _, _) = run(&["frobnicate"]);
    assert_eq!(code, EXIT_CONFIG);
}

#[test]
fn oracle_check_reports_small_error() {
    let (code, out, _) = run(&["oracle-check"]);
    assert_eq!(code, EXIT_OK);
    let err: f64 = out
        .split_whitespace()
        .find_map(|kv| kv.strip_prefix("max_amplitude_error="))
        .unwrap()
        .parse()
        .unwrap();
    assert!(err <= 1e-8);
}

#[test]
fn custom_rabi_run_writes_schema_conforming_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("rabi.cfg");
    fs::write(
        &cfg,
        "[scenario]\nid = custom\nt_end = 3.14159\n\
         [atoms]\ngamma1 = 1\ngamma2 = 0\ngamma3 = 0\nx1 = 0.5\nx2 = 0.25\nx3 = 0.75\nresonance_index = 1\ndetuning = 0\n\
         [modes]\npolicy = asymmetric\nlowest_index = 1\ncount = 1\n\
         [integrator]\nphase_per_step = 0.003\nsample_rows = 500\n\
         [observables]\nprofile_times = 1.0\ngrid_points = 11\n",
    )
    .unwrap();
    let out_dir = dir.path().join("out");
    let (code, out, err) =
        run(&["run", "--config", cfg.to_str().unwrap(), "--out", out_dir.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK, "{err}");
    assert!(out.starts_with("summary scenario=custom modes=1"));

    let series = fs::read_to_string(out_dir.join("custom_n1_series.csv")).unwrap();
    let mut lines = series.lines();
    assert_eq!(lines.next(), Some("t,p1,p2,p3,norm2,energy"));
    let mut rows = 0;
    for line in lines {
        let v: Vec<f64> = line.split(',').map(|s| s.parse().unwrap()).collect();
        assert_eq!(v.len(), 6);
        assert!((v[1] - v[0].cos().powi(2)).abs() < 1e-6, "{line}");
        rows += 1;
    }
    assert!(rows > 400);
    assert!(series.ends_with('\n'));

    let profile = fs::read_to_string(out_dir.join("custom_n1_profile_t1.0000.csv")).unwrap();
    assert!(profile.starts_with("x,e2\n"));
    assert_eq!(profile.lines().count(), 12);
    let tails = fs::read_to_string(out_dir.join("custom_tails.csv")).unwrap();
    assert!(tails.starts_with("mode_count,t,tail_fraction,precausal_avg\n1,"));
    let meta = fs::read_to_string(out_dir.join("custom_n1.meta")).unwrap();
    assert!(meta.lines().all(|l| l.contains('=')));
    assert!(meta.contains("integrator=abm4-pece"));
}
