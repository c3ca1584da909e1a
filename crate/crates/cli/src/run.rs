//! Experiment runners and on-disk output.

use crate::config::*;
use minmax_core::ambient::AmbientManifold;
use minmax_core::chart::{CliffordChart, GeodesicSphereChart};
use minmax_core::complex::{cube_complex, flat_norm, s3_complex};
use minmax_core::degree::{sphere_map_degree, DegreeOptions};
use minmax_core::eigenbasis::{eigenbasis_levels, EigenOptions};
use minmax_core::energy::area;
use minmax_core::flow::*;
use minmax_core::hierarchy::{hierarchy_report, PerturbationOptions, SweepGrid};
use minmax_core::laplacian::{build_laplacian, Domain};
use minmax_core::report::{Check, VerificationReport};
use minmax_core::s3::*;
use minmax_core::sample::sample_immersion;
use minmax_core::spectrum::{jacobi_spectrum, EnergyMode};
use minmax_core::variation::variation_suite;
use minmax_core::varifold::{bl_distance, f_distance, random_measure, varifold_of};
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

/// Checks, payloads, files and timings produced by one or more experiment groups.
#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub sections: Vec<(String, Vec<Check>)>,
    pub data: Vec<(String, serde_json::Value)>,
    /// Paths relative to the output directory.
    pub artifacts: Vec<(PathBuf, String)>,
    pub timings: Vec<(String, f64)>,
}

impl Outcome {
    pub fn section(&mut self, name: &str, checks: Vec<Check>) {
        self.sections.push((name.into(), checks));
    }

    pub fn attach<T: Serialize>(&mut self, key: &str, value: &T) {
        self.data.push((key.into(), serde_json::to_value(value).expect("value serializes")));
    }

    pub fn file(&mut self, path: &str, contents: String) {
        self.artifacts.push((PathBuf::from(path), contents));
    }

    /// Runs one timed item; a computation error becomes a failing check in `section`.
    fn item(&mut self, name: &str, section: &str, f: impl FnOnce(&mut Outcome) -> minmax_core::Result<()>) {
        let t0 = Instant::now();
        if let Err(e) = f(self) {
            self.section(section, vec![Check::predicate(&format!("{name} completed"), false)]);
            self.attach(&format!("{name}.error"), &e.to_string());
        }
        self.timings.push((name.into(), t0.elapsed().as_secs_f64()));
    }

    pub fn merge(&mut self, other: Outcome) {
        self.sections.extend(other.sections);
        self.data.extend(other.data);
        self.artifacts.extend(other.artifacts);
        self.timings.extend(other.timings);
    }

    /// Deterministic report; timings are kept out of it.
    pub fn report(&self, seed: u64) -> VerificationReport {
        let mut r = VerificationReport::new(seed);
        for (name, checks) in &self.sections {
            r.add(name, checks.clone());
        }
        for (k, v) in &self.data {
            r.attach(k, v);
        }
        r
    }

    pub fn timings_json(&self) -> String {
        let map: BTreeMap<&str, f64> = self.timings.iter().map(|(k, v)| (k.as_str(), *v)).collect();
        serde_json::to_string_pretty(&map).expect("timings serialize")
    }

    /// Writes `report.json`, `timings.json` and every artifact under `dir`.
    pub fn write(&self, dir: &Path, seed: u64) -> std::io::Result<VerificationReport> {
        std::fs::create_dir_all(dir.join("plotdata"))?;
        let report = self.report(seed);
        std::fs::write(dir.join("report.json"), report.to_json())?;
        std::fs::write(dir.join("timings.json"), self.timings_json())?;
        for (path, contents) in &self.artifacts {
            let p = dir.join(path);
            if let Some(parent) = p.parent() {
                std::fs::create_dir_all(parent)?;
            }
            std::fs::write(p, contents)?;
        }
        Ok(report)
    }
}

fn csv(header: &str, rows: impl IntoIterator<Item = String>) -> String {
    let mut s = String::from(header);
    s.push('\n');
    for r in rows {
        s.push_str(&r);
        s.push('\n');
    }
    s
}

fn domain(d: &DomainSpec) -> Domain {
    match d.kind {
        DomainKind::Circle => Domain::Circle { n: d.n },
        DomainKind::Torus => Domain::Torus { n: d.n },
        DomainKind::Icosphere => Domain::Icosphere { subdivisions: d.n as u32 },
    }
}

/// Min-max widths of the eigenvalue hierarchy on each configured domain.
pub fn run_eigen(cfg: &EigenConfig, seed: u64) -> Outcome {
    let mut out = Outcome::default();
    let mut widths = Vec::new();
    let mut spectrum = Vec::new();
    for d in &cfg.domains {
        let dom = domain(d);
        let name = dom.describe();
        out.item(&format!("eigen {name}"), "eigen", |out| {
            let l = build_laplacian(&dom)?;
            let b = eigenbasis_levels(&l, cfg.levels, &EigenOptions { seed: seed.wrapping_add(1), ..Default::default() })?;
            let grid = SweepGrid { t_points: cfg.t_points, rotation_samples: cfg.rotation_samples, seed };
            let trials =
                PerturbationOptions { trials: cfg.trials, epsilon: cfg.epsilon, tol: cfg.trial_tol, seed: seed.wrapping_add(17) };
            let r = hierarchy_report(&b, &l, cfg.levels, grid, &trials)?;
            let mut checks = Vec::new();
            for (w, t) in r.widths.iter().zip(&r.trials) {
                checks.push(
                    Check::absolute(&format!("{name} mu_{k} = lambda_{k}", k = w.level), w.lambda, w.mu, cfg.tol * w.lambda.max(1.0))
                        .anchored("k-th min-max width equals the k-th eigenvalue"),
                );
                checks.push(
                    Check::absolute(&format!("{name} level {} perturbed deficit", t.level), 0.0, t.worst_deficit.max(0.0), cfg.trial_tol)
                        .anchored("admissible families never undercut the k-th eigenvalue"),
                );
                widths.push(format!(
                    "{name},{},{},{},{},{},{}",
                    w.level, w.lambda, w.mu, w.gap, w.multiplicity, t.worst_deficit
                ));
            }
            checks.push(Check::predicate(&format!("{name} widths strictly increasing"), r.strictly_increasing));
            for (i, v) in b.eigenvalues.iter().enumerate() {
                spectrum.push(format!("{name},{},{v}", i + 1));
            }
            out.section("eigen", checks);
            out.attach(&format!("eigen.{name}"), &r);
            Ok(())
        });
    }
    out.file("eigen_widths.csv", csv("domain,level,lambda,mu,gap,multiplicity,worst_deficit", widths));
    out.file("plotdata/spectrum.csv", csv("domain,index,eigenvalue", spectrum));
    out
}

/// Widths, envelope, Jacobi indices and degrees on `S³`.
pub fn run_s3(cfg: &S3Config, seed: u64) -> Outcome {
    let mut out = Outcome::default();
    let want = |c: S3Check| cfg.check == S3Check::All || cfg.check == c;
    let pi2 = PI * PI;
    let g = cfg.index_grid;
    let mut cl1_area = None;
    let mut w1_area = None;
    if want(S3Check::Widths) || want(S3Check::Index) {
        out.item("s3.widths", "s3.widths", |out| {
            let geo = geodesic_sphere_sweep();
            let w1 = sweep_max_area(&geo, 200)?;
            let vol = SweptVolumeOptions::default();
            let half = swept_volume(&geo, 0.0, &vol)?;
            let total = swept_volume(&geo, 1.0, &vol)?;
            let cl_total = swept_volume(&clifford_sweep(), 1.0, &vol)?;
            let (e0, e1) = geo.endpoint_areas(1e-3)?;
            let cl1 = area(&sample_immersion(&CliffordChart::new(1.0)?, (g, g), AmbientManifold::S3)?);
            cl1_area = Some(cl1);
            w1_area = Some(w1.area);
            let mut checks = vec![
                Check::absolute("W1 = max area of geodesic sweep", 4.0 * PI, w1.area, cfg.width_tol)
                    .anchored("first width equals 4π"),
                Check::absolute("swept volume at r = pi/2", pi2, half, cfg.volume_tol).anchored("great sphere halves |S³| = 2π²"),
                Check::absolute("total swept volume of geodesic sweep", 2.0 * pi2, total, cfg.volume_tol),
                Check::absolute("total swept volume of Clifford sweep", 2.0 * pi2, cl_total.abs(), 10.0 * cfg.volume_tol),
                Check::below("geodesic sweep end areas", 1e-2, e0.max(e1)),
            ];
            if want(S3Check::Widths) {
                checks.push(Check::absolute("area of Cl_1", 2.0 * pi2, cl1, cfg.width_tol).anchored("second width equals 2π²"));
            }
            out.section("s3.widths", checks);
            out.attach("s3.first_width", &w1);
            Ok(())
        });
    }
    if want(S3Check::Widths) || want(S3Check::Envelope) {
        out.item("s3.family", "s3.family", |out| {
            let sup = family_sup();
            let mut checks = vec![
                Check::relative("family sup = 8 pi^2/(3 sqrt 2)", sup.claimed, sup.sup, cfg.family_tol)
                    .anchored("the family of Clifford Tori attains 8π²/(3√2)"),
                Check::below("family sup below 8 pi", 8.0 * PI, sup.sup),
            ];
            if let (Some(w1), Some(cl1)) = (w1_area, cl1_area) {
                checks.push(Check::predicate("4 pi < 2 pi^2 < 8 pi from computed values", w1 < cl1 && cl1 < 8.0 * PI && sup.sup < 8.0 * PI));
            }
            out.section("s3.family", checks);
            out.attach("s3.family_sup", &sup);
            Ok(())
        });
    }
    if want(S3Check::Widths) {
        out.item("s3.constants", "s3.constants", |out| {
            let cat = critical_catenoid_width();
            out.section(
                "s3.constants",
                vec![
                    Check::below("Lambda tanh Lambda residual", 1e-12 + f64::EPSILON, cat.residual),
                    Check::absolute("critical catenoid width 2 pi / Lambda^2", 4.3658, cat.width, 1e-3)
                        .anchored("critical catenoid width 2πΛ⁻²"),
                ],
            );
            out.attach("s3.catenoid", &cat);
            Ok(())
        });
    }
    if want(S3Check::Envelope) {
        out.item("s3.envelope", "s3.envelope", |out| {
            let sampling = BallSampling { radius: cfg.ball_radius, points: cfg.ball_points, ..Default::default() };
            let ts = case_boundary();
            let rows = envelope_table(&[-0.5, -0.2, -ts, 0.0, ts, 0.2, 0.5], &sampling)?;
            let checks = rows
                .iter()
                .map(|r| {
                    Check::relative(&format!("max area over ball at t = {:.5}", r.t), r.envelope, r.sampled, cfg.envelope_tol)
                        .anchored("sampled conformal maxima follow the envelope")
                })
                .collect();
            out.section("s3.envelope", checks);
            let mut buf = Vec::new();
            write_envelope_csv(&rows, &mut buf)?;
            let text = String::from_utf8(buf).expect("csv is utf-8");
            out.file("envelope.csv", text.clone());
            out.file("plotdata/envelope_samples.csv", text);
            let curve = (-99..=99).filter_map(|i| {
                let t = i as f64 / 100.0;
                bryant_envelope(t).ok().map(|e| format!("{t},{e}"))
            });
            out.file("plotdata/bryant_envelope.csv", csv("t,bryant_envelope", curve));
            out.attach("s3.envelope", &rows);
            Ok(())
        });
    }
    if want(S3Check::Index) {
        out.item("s3.index", "s3.index", |out| {
            let mut checks = Vec::new();
            let mut rows = Vec::new();
            if let Some(cl1) = cl1_area {
                checks.push(Check::absolute("area of Cl_1", 2.0 * pi2, cl1, cfg.width_tol).anchored("second width equals 2π²"));
            }
            let cl = CliffordChart::new(1.0)?;
            for n in [g, 2 * g] {
                let r = jacobi_spectrum(&sample_immersion(&cl, (n, n), AmbientManifold::S3)?, EnergyMode::AreaOnly)?;
                checks.push(
                    Check::absolute(&format!("Cl_1 index at {n}x{n}"), 5.0, r.morse_index as f64, 0.0)
                        .anchored("Clifford torus has index 5"),
                );
                rows.extend(r.eigenvalues.iter().take(40).enumerate().map(|(i, v)| format!("clifford,{n},{},{v}", i + 1)));
                out.attach(&format!("s3.index.clifford_{n}"), &r.eigenvalues.iter().take(12).collect::<Vec<_>>());
            }
            let sphere = sample_immersion(&GeodesicSphereChart::new(PI / 2.0), (g, g), AmbientManifold::S3)?;
            let r = jacobi_spectrum(&sphere, EnergyMode::AreaOnly)?;
            checks.push(Check::absolute(&format!("great sphere index at {g}x{g}"), 1.0, r.morse_index as f64, 0.0).anchored("great sphere has index 1"));
            rows.extend(r.eigenvalues.iter().take(40).enumerate().map(|(i, v)| format!("great_sphere,{g},{},{v}", i + 1)));
            out.section("s3.index", checks);
            out.file("plotdata/jacobi_spectrum.csv", csv("surface,grid,index,eigenvalue", rows));
            Ok(())
        });
    }
    if want(S3Check::Degrees) {
        out.item("s3.degrees", "s3.degrees", |out| {
            let base = DegreeOptions { seed: DegreeOptions::default().seed.wrapping_add(seed), ..Default::default() };
            let mut checks = Vec::new();
            for n in 1..=3 {
                let id = |x: &[f64]| x.to_vec();
                let anti = |x: &[f64]| x.iter().map(|v| -v).collect::<Vec<_>>();
                let expected = if n % 2 == 0 { -1.0 } else { 1.0 };
                checks.push(Check::absolute(&format!("identity degree on S^{n}"), 1.0, sphere_map_degree(&id, n, &base)?.degree as f64, 0.0));
                checks.push(Check::absolute(&format!("antipodal degree on S^{n}"), expected, sphere_map_degree(&anti, n, &base)?.degree as f64, 0.0));
            }
            let opts = DegreeOptions { resolution: cfg.degree_resolution, ..base };
            let rotated = rotated_sphere_degree(&opts)?;
            let sp2 = sp2_boundary_degree(&opts)?;
            checks.push(
                Check::absolute("rotated geodesic sphere degree", 1.0, rotated.degree.degree.abs() as f64, 0.0)
                    .anchored("rotated geodesic spheres form a degree ±1 map"),
            );
            checks.push(Check::absolute("SP2 boundary degree", 1.0, sp2.degree.abs() as f64, 0.0).anchored("circle-pair boundary map has degree ±1"));
            out.section("s3.degrees", checks);
            out.attach("s3.rotated_degree", &rotated);
            out.attach("s3.sp2_degree", &sp2);
            Ok(())
        });
    }
    out
}

fn flow_config(cfg: &FlowSection, grid: (usize, usize)) -> FlowConfig {
    FlowConfig {
        sigmas: cfg.sigmas.clone(),
        initial_step: cfg.initial_step,
        backtrack: cfg.backtrack,
        max_steps: cfg.max_steps,
        grad_tol: cfg.grad_tol,
        index: Some(IndexOptions { grid, index_tol: cfg.index_tol, crit_tol: cfg.crit_tol }),
        ..Default::default()
    }
}

#[derive(Serialize)]
struct ExperimentSummary<'a> {
    sigmas: &'a [f64],
    stage_indices: &'a [usize],
    stage_areas: &'a [f64],
    stages: &'a [StageSummary],
    limit: &'a StageIndex,
    verdict: SemicontinuityVerdict,
    limsup_area: f64,
    multiplicity_one: bool,
    entropy: &'a EntropyReport,
    palais: PalaisCheck,
    state: &'a [f64],
}

/// Flows from critical surfaces, σ-width continuation and variation checks.
pub fn run_flow(cfg: &FlowSection, seed: u64) -> Outcome {
    let mut out = Outcome::default();
    let g = cfg.grid;
    out.item("flow.variations", "flow.variations", |out| {
        let s = variation_suite(seed.wrapping_add(7), cfg.variation_cases, (cfg.variation_grid, cfg.variation_grid))?;
        out.section(
            "flow.variations",
            vec![
                Check::below("first variations against differences", 1e-4, s.first_error).anchored("analytic first variations of Area and F"),
                Check::below("second variations against differences", 1e-3, s.second_error).anchored("analytic second variations of Area and F"),
                Check::below("Hessian asymmetry", 1e-10, s.asymmetry),
                Check::predicate("single bound constant is finite", s.bound_constant.is_finite() && s.bound_constant > 0.0)
                    .anchored("magnitude bounds on DF and D²F"),
            ],
        );
        out.attach("flow.variations", &s);
        Ok(())
    });
    let starts: Vec<(&str, Start)> = [("clifford", Start::Clifford), ("geodesic", Start::Geodesic)]
        .into_iter()
        .filter(|(_, s)| cfg.start == Start::Both || cfg.start == *s)
        .collect();
    for (name, start) in starts {
        let section = format!("flow.{name}");
        out.item(&section, &section.clone(), |out| {
            let (space, c0, grid, limit) = match start {
                Start::Geodesic => (geodesic_space((g / 2, g))?, &cfg.geodesic_start, (g / 2, g), 1.0),
                _ => (clifford_space((g, g))?, &cfg.clifford_start, (g, g), 5.0),
            };
            let e = index_semicontinuity_experiment(&space, c0, &flow_config(cfg, grid))?;
            let palais = e.trace.palais_check();
            let stopped = e.trace.stages.iter().all(|s| matches!(s.reason, StopReason::Converged | StopReason::Resolution));
            let mut checks = vec![
                Check::predicate(&format!("{name} descent monotone"), e.trace.is_monotone()).anchored("energy descends along the flow"),
                Check::above(&format!("{name} path-length inequality slack"), -1e-8, palais.worst_slack)
                    .anchored("energy drop bounds the path length"),
                Check::predicate(&format!("{name} stages end at a critical state"), stopped),
                Check::predicate(&format!("{name} limit index <= liminf stage index"), e.verdict.holds)
                    .anchored("Morse index is lower semicontinuous along σ → 0"),
                Check::absolute(&format!("{name} limit index"), limit, e.limit.morse_index as f64, 0.0),
                Check::predicate(&format!("{name} stage spectra stable under refinement"), e.stages_stable),
            ];
            if start == Start::Clifford {
                checks.push(Check::predicate("clifford entropy verdict", e.entropy.pass).anchored("entropy vanishes as σ → 0"));
                let last = e.stage_areas.last().copied().unwrap_or(f64::NAN);
                checks.push(Check::absolute("clifford terminal area", 2.0 * PI * PI, last, 1e-6));
                checks.push(Check::predicate("clifford limsup area below 8 pi", e.multiplicity_one));
            }
            out.section(&section, checks);
            let mut buf = Vec::new();
            e.trace.write_csv(&mut buf)?;
            out.file(&format!("flow_trace_{name}.csv"), String::from_utf8(buf).expect("csv is utf-8"));
            out.attach(
                &section,
                &ExperimentSummary {
                    sigmas: &e.sigmas,
                    stage_indices: &e.stage_indices,
                    stage_areas: &e.stage_areas,
                    stages: &e.trace.stages,
                    limit: &e.limit,
                    verdict: e.verdict,
                    limsup_area: e.limsup_area,
                    multiplicity_one: e.multiplicity_one,
                    entropy: &e.entropy,
                    palais,
                    state: &e.state,
                },
            );
            Ok(())
        });
    }
    if cfg.width {
        out.item("flow.width", "flow.width", |out| {
            let m = cfg.width_params;
            let params: Vec<f64> = (0..m).map(|i| -0.8 + 1.6 * i as f64 / (m - 1) as f64).collect();
            let family = SweepFamily::from_sweep(&geodesic_sphere_sweep(), &params, 2)?;
            let wc = FlowConfig { max_steps: 10, cutoff: Cutoff { lower: 2.0, band: 1.0 }, ..Default::default() };
            let table = sigma_width_continuation(&family, &cfg.width_sigmas, &wc)?;
            let mut checks = vec![
                Check::predicate("sigma-width nondecreasing in sigma", table.monotone),
                Check::absolute("extrapolated sigma-width", 4.0 * PI, table.extrapolated, 1e-6).anchored("σ-widths converge to the area width"),
            ];
            if let Some(r) = table.rows.iter().find(|r| r.sigma == 0.0) {
                checks.push(Check::absolute("sigma-width at sigma = 0", 4.0 * PI, r.width, 1e-6));
            }
            out.section("flow.width", checks);
            let rows: Vec<String> = table.rows.iter().map(|r| format!("{},{},{},{}", r.sigma, r.width, r.argmax, r.initial_max)).collect();
            out.file("width_sigma.csv", csv("sigma,width,argmax,initial_max", rows));
            let plot = table.rows.iter().map(|r| format!("{},{}", r.sigma, r.width));
            out.file("plotdata/width_vs_sigma.csv", csv("sigma,width", plot));
            out.attach("flow.width", &table);
            Ok(())
        });
    }
    out
}

/// Varifold metric axioms, the `𝐅`-distance and the flat norm of a cube shell.
pub fn run_dist(cfg: &DistConfig, seed: u64) -> Outcome {
    let mut out = Outcome::default();
    out.item("dist.bl", "dist", |out| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(23));
        let span = (cfg.max_atoms - cfg.min_atoms + 1) as u32;
        let (mut symmetry, mut triangle, mut gap, mut identity) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
        let mut rows = Vec::new();
        for k in 0..cfg.triples {
            let v: Vec<_> = (0..3).map(|_| {
                let n = cfg.min_atoms + (rng.next_u32() % span) as usize;
                random_measure(&mut rng, n)
            }).collect();
            let d01 = bl_distance(&v[0], &v[1])?;
            let d10 = bl_distance(&v[1], &v[0])?;
            let d12 = bl_distance(&v[1], &v[2])?;
            let d02 = bl_distance(&v[0], &v[2])?;
            identity = identity.max(bl_distance(&v[0], &v[0])?.abs());
            symmetry = symmetry.max((d01 - d10).abs());
            triangle = triangle.max(d02 - d01 - d12).max(d01 - d02 - d12).max(d12 - d01 - d02);
            for (x, y, d) in [(0, 1, d01), (1, 2, d12), (0, 2, d02)] {
                gap = gap.max((v[x].mass - v[y].mass).abs() - d);
            }
            rows.push(format!("{k},{d01},{d12},{d02},{},{},{}", v[0].mass, v[1].mass, v[2].mass));
        }
        let tol = cfg.axiom_tol;
        out.section(
            "dist",
            vec![
                Check::absolute("BL identity d(V, V)", 0.0, identity, tol).anchored("the bounded-Lipschitz distance is a metric"),
                Check::absolute("BL symmetry defect", 0.0, symmetry, tol),
                Check::absolute("BL triangle violation", 0.0, triangle.max(0.0), tol),
                Check::absolute("BL mass-gap violation", 0.0, gap.max(0.0), tol).anchored("distance dominates the mass gap"),
            ],
        );
        out.file("bl_triples.csv", csv("triple,d01,d12,d02,m0,m1,m2", rows));
        Ok(())
    });
    out.item("dist.f_distance", "dist", |out| {
        let cx = s3_complex(cfg.s3_complex)?;
        let s = |r: f64| sample_immersion(&GeodesicSphereChart::new(r), (8, 16), AmbientManifold::S3);
        let base = s(1.2)?;
        let same = f_distance(&base, &base, &cx)?;
        let other = f_distance(&base, &s(1.5)?, &cx)?;
        out.section(
            "dist",
            vec![
                Check::absolute("F-distance of an immersion to itself", 0.0, same.total, 0.0).anchored("the F-distance vanishes on identical immersions"),
                Check::predicate("F-distance dominates the area gap", other.total >= other.area_gap - 1e-9),
            ],
        );
        out.attach("dist.f_distance", &other);
        out.attach("dist.geodesic_varifold_mass", &varifold_of(&base).mass);
        Ok(())
    });
    out.item("dist.flat_norm", "dist", |out| {
        let n = cfg.flat_grid;
        let cx = cube_complex([-0.5; 3], [1.5; 3], [n, n, n])?;
        let chi: Vec<f64> = (0..cx.tets.len())
            .map(|k| {
                let x = cx.barycenter(k);
                if (0..3).all(|a| x[a] > 0.0 && x[a] < 1.0) {
                    1.0
                } else {
                    0.0
                }
            })
            .collect();
        let t = cx.boundary3(&chi);
        let f = flat_norm(&cx, &t)?;
        out.section(
            "dist",
            vec![Check::relative("flat norm of unit cube shell", cx.mass3(&chi), f.value, cfg.flat_tol)
                .anchored("flat norm of a cube boundary equals the enclosed volume")],
        );
        out.attach("dist.flat_norm", &f);
        Ok(())
    });
    out
}

/// Runs the selected groups on a worker pool bounded by the available parallelism
/// and assembles their outcomes in the fixed order eigen, s3, flow, dist.
pub fn run_groups(cfg: &ExperimentConfig) -> Outcome {
    type Job<'a> = Box<dyn Fn() -> Outcome + Send + Sync + 'a>;
    let mut jobs: Vec<Job> = Vec::new();
    let k = cfg.experiment;
    if k.includes(Kind::Eigen) {
        jobs.push(Box::new(|| run_eigen(&cfg.eigen, cfg.seed)));
    }
    if k.includes(Kind::S3) {
        jobs.push(Box::new(|| run_s3(&cfg.s3, cfg.seed)));
    }
    if k.includes(Kind::Flow) {
        jobs.push(Box::new(|| run_flow(&cfg.flow, cfg.seed)));
    }
    if k.includes(Kind::Dist) {
        jobs.push(Box::new(|| run_dist(&cfg.dist, cfg.seed)));
    }
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get()).min(jobs.len()).max(1);
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<Outcome>>> = Mutex::new(vec![None; jobs.len()]);
    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                if i >= jobs.len() {
                    break;
                }
                let o = jobs[i]();
                results.lock().expect("result lock")[i] = Some(o);
            });
        }
    });
    let mut all = Outcome::default();
    for o in results.into_inner().expect("result lock").into_iter().flatten() {
        all.merge(o);
    }
    all
}

/// One line per check.
pub fn summary(report: &VerificationReport) -> String {
    let mut s = String::new();
    for (section, checks) in &report.sections {
        for c in checks {
            let _ = writeln!(
                s,
                "{} {section}: {} = {} (expected {}, tol {})",
                if c.pass { "PASS" } else { "FAIL" },
                c.quantity,
                c.computed,
                c.expected,
                c.tolerance
            );
        }
    }
    let _ = writeln!(s, "{}", if report.pass { "all checks passed" } else { "some checks failed" });
    s
}
