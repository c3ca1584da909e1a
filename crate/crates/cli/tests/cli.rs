use minmax_hierarchy_cli::config::*;
use minmax_hierarchy_cli::catalog;
use proptest::prelude::*;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn minmax(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_minmax")).args(args).output().expect("binary runs")
}

fn scratch(name: &str) -> PathBuf {
    let p = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("cli").join(name);
    let _ = std::fs::remove_dir_all(&p);
    std::fs::create_dir_all(&p).unwrap();
    p
}

fn text(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn list_shows_four_groups() {
    let o = minmax(&["list"]);
    assert_eq!(o.status.code(), Some(0));
    let t = text(&o);
    assert_eq!(t.lines().count(), 4);
    for g in ["eigen", "s3", "flow", "dist"] {
        assert!(t.lines().any(|l| l.starts_with(g)), "{t}");
    }
    assert_eq!(catalog::GROUPS.len(), 4);
}

#[test]
fn describe_and_unknown_names() {
    let o = minmax(&["describe", "s3"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(text(&o).contains("the family of Clifford Tori"));
    assert_eq!(minmax(&["describe", "nothing"]).status.code(), Some(2));
    assert_eq!(minmax(&["run", "nothing"]).status.code(), Some(2));
    assert_eq!(minmax(&["bogus"]).status.code(), Some(2));
    assert_eq!(minmax(&["flow", "--sigma", "abc"]).status.code(), Some(2));
    assert_eq!(minmax(&["flow", "--sigma", "0.01,0.1"]).status.code(), Some(2));
    assert_eq!(minmax(&["eigen", "--domain", "klein"]).status.code(), Some(2));
}

#[test]
fn config_errors_carry_line_and_field() {
    let dir = scratch("config_errors");
    let bad = dir.join("bad.toml");
    std::fs::write(&bad, "experiment = \"flow\"\n[flow]\nsigmas = [0.1, 0.01]\ngird = 3\n").unwrap();
    let o = minmax(&["run", "--config", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains(":4:1:") && err.contains("gird"), "{err}");
    let e = ExperimentConfig::from_toml("[eigen]\ntol = -1.0\n", Path::new("x.toml")).unwrap_err();
    assert_eq!(e, ConfigError::Invalid { field: "eigen.tol".into(), message: "must be positive".into() });
    let e = ExperimentConfig::from_toml("seed = \"one\"\n", Path::new("x.toml")).unwrap_err();
    assert!(matches!(e, ConfigError::Parse { line: Some(1), .. }), "{e:?}");
    assert!(matches!(ExperimentConfig::load(Path::new("/nonexistent/x.toml")), Err(ConfigError::Io { .. })));
}

#[test]
fn eigen_run_writes_report_and_plot_data() {
    let dir = scratch("eigen");
    let o = minmax(&["run", "eigen", "--domain", "circle", "--n", "128", "--levels", "3", "--out", dir.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", text(&o));
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["pass"], true);
    let checks = report["sections"]["eigen"].as_array().unwrap();
    assert_eq!(checks.iter().filter(|c| c["quantity"].as_str().unwrap().contains("mu_")).count(), 3);
    let widths = std::fs::read_to_string(dir.join("eigen_widths.csv")).unwrap();
    assert_eq!(widths.lines().count(), 4);
    assert!(std::fs::read_to_string(dir.join("plotdata/spectrum.csv")).unwrap().starts_with("domain,index,eigenvalue"));
    assert!(dir.join("timings.json").exists());
}

#[test]
fn flags_override_the_config_file() {
    let dir = scratch("override");
    let cfg = dir.join("c.toml");
    std::fs::write(&cfg, format!("experiment = \"eigen\"\nseed = 3\nout = \"{}\"\n[eigen]\nlevels = 2\ndomains = [{{ kind = \"circle\", n = 64 }}]\n", dir.join("a").display()))
        .unwrap();
    let o = minmax(&["run", "--config", cfg.to_str().unwrap(), "--levels", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let report = std::fs::read_to_string(dir.join("a/report.json")).unwrap();
    assert!(report.contains("mu_3") && report.contains("\"seed\": 3"));
}

#[test]
fn s3_widths_table_and_failure_exit_code() {
    let dir = scratch("s3_widths");
    let o = minmax(&["run", "s3", "--check", "widths", "--out", dir.to_str().unwrap()]);
    let t = text(&o);
    for q in ["W1 = max area", "area of Cl_1", "family sup = 8 pi^2/(3 sqrt 2)", "critical catenoid width"] {
        assert!(t.contains(q), "{t}");
    }
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.join("report.json")).unwrap()).unwrap();
    let all_pass = report["sections"].as_object().unwrap().values().flat_map(|s| s.as_array().unwrap()).all(|c| c["pass"] == true);
    assert_eq!(report["pass"], all_pass);
    assert_eq!(o.status.code(), Some(if all_pass { 0 } else { 1 }));
}

#[test]
fn flow_example_writes_trace_and_verdicts() {
    let dir = scratch("flow");
    let o = minmax(&["run", "flow", "--start", "clifford", "--sigma", "1e-1,1e-2,1e-3", "--out", dir.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", text(&o));
    let trace = std::fs::read_to_string(dir.join("flow_trace_clifford.csv")).unwrap();
    assert!(trace.starts_with("step,t,A_sigma,area,F,grad_norm,path_len,sigma"));
    assert!(!dir.join("flow_trace_geodesic.csv").exists());
    let t = text(&o);
    assert!(t.contains("clifford entropy verdict") && t.contains("clifford limit index <= liminf stage index"));
    assert!(std::fs::read_to_string(dir.join("plotdata/width_vs_sigma.csv")).unwrap().starts_with("sigma,width"));
}

#[test]
fn dist_outputs_are_bitwise_reproducible() {
    let (a, b) = (scratch("dist_a"), scratch("dist_b"));
    for d in [&a, &b] {
        assert_eq!(minmax(&["dist", "--seed", "5", "--out", d.to_str().unwrap()]).status.code(), Some(0));
    }
    for f in ["report.json", "bl_triples.csv"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn nonpositive_tolerances_are_rejected(which in 0usize..4, v in -1.0f64..=0.0) {
        let mut cfg = ExperimentConfig::default();
        match which {
            0 => cfg.eigen.tol = v,
            1 => cfg.s3.envelope_tol = v,
            2 => cfg.flow.grad_tol = v,
            _ => cfg.dist.axiom_tol = v,
        }
        let rejected = matches!(cfg.validate(), Err(ConfigError::Invalid { .. }));
        prop_assert!(rejected);
    }

    #[test]
    fn configs_round_trip_through_toml(seed in any::<u32>(), levels in 1usize..8, tol in 1e-12f64..1e-2, grid in 8usize..128) {
        let mut cfg = ExperimentConfig { seed: seed as u64, ..Default::default() };
        cfg.eigen.levels = levels;
        cfg.eigen.tol = tol;
        cfg.flow.grid = grid;
        let text = toml::to_string(&cfg).unwrap();
        prop_assert_eq!(ExperimentConfig::from_toml(&text, Path::new("t.toml")).unwrap(), cfg);
    }

    #[test]
    fn overrides_keep_valid_configs_valid(levels in 1usize..8, tol in 1e-12f64..1.0, seed in any::<u64>()) {
        let mut cfg = ExperimentConfig::default();
        let o = Overrides { levels: Some(levels), tol: Some(tol), seed: Some(seed), ..Default::default() };
        prop_assert!(cfg.apply(&o).is_ok());
        prop_assert_eq!(cfg.eigen.levels, levels);
        prop_assert_eq!(cfg.flow.grad_tol, tol);
        prop_assert_eq!(cfg.seed, seed);
    }
}
