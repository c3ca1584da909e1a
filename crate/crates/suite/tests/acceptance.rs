//! Runs the full suite twice and prints one verdict line per acceptance criterion.

use minmax_core::report::{Check, VerificationReport};
use minmax_hierarchy_cli::{run_groups, ExperimentConfig};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

struct Run {
    report: VerificationReport,
    raw: String,
    timings: BTreeMap<String, f64>,
}

/// Full suite at the default configuration and seed, written to `dir`.
fn run_suite(dir: &Path) -> Run {
    let cfg = ExperimentConfig { out: dir.to_path_buf(), ..Default::default() };
    let outcome = run_groups(&cfg);
    let report = outcome.write(dir, cfg.seed).expect("outputs written");
    let raw = std::fs::read_to_string(dir.join("report.json")).expect("report.json written");
    Run { report, raw, timings: outcome.timings.into_iter().collect() }
}

struct Verdict {
    pass: bool,
    detail: String,
}

fn sections(r: &VerificationReport, names: &[&str]) -> Vec<Check> {
    names.iter().flat_map(|n| r.sections.get(*n).cloned().unwrap_or_default()).collect()
}

fn seconds(run: &Run, items: &[&str]) -> f64 {
    run.timings.iter().filter(|(k, _)| items.iter().any(|i| k.starts_with(i))).map(|(_, v)| v).sum()
}

fn verdict(run: &Run, names: &[&str], budget: Option<(&[&str], f64)>) -> Verdict {
    let checks = sections(&run.report, names);
    let failed: Vec<&Check> = checks.iter().filter(|c| !c.pass).collect();
    let mut pass = !checks.is_empty() && failed.is_empty();
    let mut detail = format!("{} checks", checks.len());
    for c in &failed {
        detail.push_str(&format!("; failed {}: computed {} expected {} tol {}", c.quantity, c.computed, c.expected, c.tolerance));
    }
    if let Some((items, limit)) = budget {
        let t = seconds(run, items);
        detail.push_str(&format!("; {t:.2} s of {limit} s"));
        pass &= t <= limit;
    }
    Verdict { pass, detail }
}

fn main() {
    let base = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("acceptance");
    let first = run_suite(&base.join("first"));
    let second = run_suite(&base.join("second"));
    let r = &first;
    let mut verdicts = vec![
        ("eigen hierarchy identity", verdict(r, &["eigen"], Some((&["eigen"], 30.0)))),
        ("first width and half volume", verdict(r, &["s3.widths"], Some((&["s3.widths"], 5.0)))),
        ("second width and Jacobi indices", verdict(r, &["s3.index"], Some((&["s3.index"], 60.0)))),
        ("conformal envelope and family sup", verdict(r, &["s3.envelope", "s3.family"], Some((&["s3.envelope", "s3.family"], 600.0)))),
        ("variation formulas", verdict(r, &["flow.variations"], None)),
        ("flow suite", verdict(r, &["flow.clifford", "flow.geodesic"], None)),
        ("distances", verdict(r, &["dist"], None)),
        ("catenoid constant", verdict(r, &["s3.constants"], None)),
        ("degrees", verdict(r, &["s3.degrees"], None)),
    ];
    let same = first.raw == second.raw && first.report == second.report;
    verdicts.push((
        "determinism",
        Verdict { pass: same, detail: format!("report.json {} across two runs", if same { "identical" } else { "differs" }) },
    ));
    let mut failed = 0;
    for (i, (name, v)) in verdicts.iter().enumerate() {
        println!("criterion {:>2} {}: {} ({})", i + 1, if v.pass { "PASS" } else { "FAIL" }, name, v.detail);
        failed += usize::from(!v.pass);
    }
    println!("{} of {} criteria pass", verdicts.len() - failed, verdicts.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
