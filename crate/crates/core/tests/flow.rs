use minmax_core::ambient::{AmbientManifold, Vec4};
use minmax_core::basis::SpherePolyBasis;
use minmax_core::chart::{Chart, EllipsoidChart, Jet};
use minmax_core::flow::*;
use minmax_core::s3::geodesic_sphere_sweep;
use minmax_core::spectrum::{jacobi_spectrum, EnergyMode};
use minmax_core::variation::{normalize_jet, normalize_jet_tangent, FieldJet};
use minmax_core::Error;
use std::f64::consts::PI;

fn jet_diff(a: &Jet, b: &Jet, h: f64) -> FieldJet {
    FieldJet {
        w: (a.pos - b.pos) / (2.0 * h),
        d: [(a.d[0] - b.d[0]) / (2.0 * h), (a.d[1] - b.d[1]) / (2.0 * h)],
        dd: [0, 1, 2].map(|k| (a.dd[k] - b.dd[k]) / (2.0 * h)),
    }
}

#[test]
fn normalize_tangent_matches_differences() {
    let j = Jet {
        pos: Vec4::new(0.9, 0.3, -0.2, 0.4),
        d: [Vec4::new(0.1, 0.5, 0.2, -0.3), Vec4::new(-0.4, 0.1, 0.6, 0.2)],
        dd: [Vec4::new(0.3, -0.1, 0.2, 0.1), Vec4::new(0.0, 0.2, -0.5, 0.3), Vec4::new(0.1, 0.1, 0.1, -0.2)],
    };
    let v = FieldJet {
        w: Vec4::new(0.2, -0.1, 0.3, 0.5),
        d: [Vec4::new(0.4, 0.1, -0.2, 0.0), Vec4::new(0.1, -0.3, 0.2, 0.2)],
        dd: [Vec4::new(-0.1, 0.2, 0.0, 0.3), Vec4::new(0.2, 0.2, 0.1, -0.1), Vec4::new(0.0, -0.2, 0.3, 0.1)],
    };
    let h = 1e-5;
    let shift = |s: f64| Jet {
        pos: j.pos + s * v.w,
        d: [j.d[0] + s * v.d[0], j.d[1] + s * v.d[1]],
        dd: [0, 1, 2].map(|k| j.dd[k] + s * v.dd[k]),
    };
    let fd = jet_diff(&normalize_jet(&shift(h)), &normalize_jet(&shift(-h)), h);
    let an = normalize_jet_tangent(&j, &v);
    assert!((fd.w - an.w).norm() < 1e-9);
    for k in 0..2 {
        assert!((fd.d[k] - an.d[k]).norm() < 1e-9);
    }
    for k in 0..3 {
        assert!((fd.dd[k] - an.dd[k]).norm() < 1e-9);
    }
}

#[test]
fn cutoff_ramp() {
    let c = Cutoff { lower: 2.0, band: 1.0 };
    assert_eq!(cutoff_factor(1.0, &c), 0.0);
    assert_eq!(cutoff_factor(2.0, &c), 0.0);
    assert_eq!(cutoff_factor(3.5, &c), 1.0);
    let mid = cutoff_factor(2.5, &c);
    assert!(mid > 0.0 && mid < 1.0);
    assert!((mid - 0.5).abs() < 1e-15);
    let scan: Vec<f64> = (0..100).map(|i| cutoff_factor(1.5 + 2.0 * i as f64 / 99.0, &c)).collect();
    assert!(scan.windows(2).all(|w| w[1] >= w[0]));
    assert!(scan.iter().all(|x| (0.0..=1.0).contains(x)));
    assert_eq!(cutoff_factor(-1e300, &Cutoff::inactive()), 1.0);
}

#[test]
fn clifford_is_critical_and_contract_holds() {
    let space = clifford_space((32, 32)).unwrap();
    let c = vec![0.0; space.dim()];
    let pg = pseudo_gradient(&space, &c, 0.0).unwrap();
    assert!(pg.norm <= 1e-8, "{}", pg.norm);
    assert!((pg.energies.area - 2.0 * PI * PI).abs() < 1e-10);
    let c = vec![0.02, -0.01, 0.015];
    for sigma in [0.0, 0.1] {
        let pg = pseudo_gradient(&space, &c, sigma).unwrap();
        assert!(pg.norm > 1e-3);
        assert!((pg.contract - 1.0).abs() <= 1e-10);
        assert!((pg.field_norm / pg.norm - 1.0).abs() <= 1e-10);
    }
}

#[test]
fn euclidean_sphere_gradient_is_mean_curvature() {
    let r = 1.7;
    let space = GraphSpace::new(
        Box::new(EllipsoidChart::sphere(r)),
        Box::new(SpherePolyBasis::new(2)),
        AmbientManifold::R3,
        (24, 48),
    )
    .unwrap();
    let c = vec![0.0; space.dim()];
    for sigma in [0.0, 0.3] {
        let pg = pseudo_gradient(&space, &c, sigma).unwrap();
        let s2 = sigma * sigma;
        let h = 1e-5;
        let e = |rr: f64| 4.0 * PI * rr * rr + s2 * (1.0 + 2.0 / (rr * rr)).powi(2) * 4.0 * PI * rr * rr;
        let de = (e(r + h) - e(r - h)) / (2.0 * h);
        let mut cp = c.clone();
        cp[0] = h;
        let mut cm = c.clone();
        cm[0] = -h;
        let fd = (space.energies(&cp, sigma).unwrap().a_sigma - space.energies(&cm, sigma).unwrap().a_sigma) / (2.0 * h);
        assert!((pg.differential[0] - de).abs() < 1e-6 * de.abs(), "{} vs {}", pg.differential[0], de);
        assert!((fd - de).abs() < 1e-6 * de.abs());
        let speed = de / (4.0 * PI * r * r);
        for (n, j) in space.base_sample().nodes.iter().zip(&pg.field.jets) {
            let nu = n.normal.unwrap().nu;
            assert!((j.w - speed * nu).norm() < 1e-8 * speed.abs());
        }
        assert!((pg.contract - 1.0).abs() <= 1e-10);
    }
}

#[test]
fn perturbed_geodesic_sphere_descends() {
    let chart = geodesic_sphere_sweep().chart(0.0).unwrap();
    assert!(chart.topology().is_closed());
    let space = GraphSpace::new(chart, Box::new(SpherePolyBasis::new(1)), AmbientManifold::S3, (16, 32)).unwrap();
    let sample = space.sample_with_normals(&vec![0.0; space.dim()], (16, 32)).unwrap();
    let spec = jacobi_spectrum(&sample, EnergyMode::AreaOnly).unwrap();
    assert!(spec.eigenvalues[0] < -1.0 && spec.morse_index == 1);
    let mut c0 = vec![0.0; space.dim()];
    c0[0] = 0.05;
    let cfg = FlowConfig { sigmas: vec![0.0], max_steps: 8, ..Default::default() };
    let r = flow(&space, &c0, &cfg).unwrap();
    let e: Vec<f64> = r.trace.rows.iter().map(|r| r.a_sigma).collect();
    assert!(e.len() == 9);
    assert!(e.windows(2).all(|w| w[1] < w[0]), "{e:?}");
    assert!(e[0] < 4.0 * PI);
    assert!(r.trace.palais_check().holds);
}

#[test]
fn frozen_below_cutoff() {
    let space = clifford_space((16, 16)).unwrap();
    let c0 = vec![0.02, -0.01, 0.015];
    let cfg = FlowConfig {
        sigmas: vec![0.0],
        cutoff: Cutoff { lower: 100.0, band: 1.0 },
        ..Default::default()
    };
    let r = flow(&space, &c0, &cfg).unwrap();
    assert_eq!(r.state, c0);
    assert_eq!(r.trace.rows.len(), 1);
    assert_eq!(r.trace.stages[0].reason, StopReason::Frozen);
    assert_eq!(r.trace.rows[0].path_len, 0.0);
}

#[test]
fn clifford_flow_returns_to_cl1() {
    let space = clifford_space((32, 32)).unwrap();
    let c0 = vec![0.02, -0.01, 0.015];
    let cfg = FlowConfig { sigmas: vec![0.1, 0.01, 0.001], ..Default::default() };
    let r = flow(&space, &c0, &cfg).unwrap();
    assert!(r.trace.is_monotone());
    let p = r.trace.palais_check();
    assert!(p.holds, "{p:?}");
    for s in &r.trace.stages {
        assert!(s.reason == StopReason::Converged || s.reason == StopReason::Resolution, "{s:?}");
    }
    let last = r.trace.stages.last().unwrap();
    assert!((last.energies.area - 2.0 * PI * PI).abs() < 1e-6, "{}", last.energies.area);
    let ent = entropy_monitor(&r.trace);
    assert!(ent.pass, "{ent:?}");
    let mut buf = Vec::new();
    r.trace.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().next().unwrap(), "step,t,A_sigma,area,F,grad_norm,path_len,sigma");
    assert_eq!(text.lines().count(), r.trace.rows.len() + 1);
}

#[test]
fn entropy_verdicts() {
    let sig: Vec<f64> = (1..=10).map(|k| 2f64.powi(-k)).collect();
    let constant = entropy_sequence(&sig, &vec![3.0; sig.len()]);
    assert!(constant.pass && constant.decreasing);
    let growing: Vec<f64> = sig.iter().map(|s| 3.0 / (s * s)).collect();
    assert!(!entropy_sequence(&sig, &growing).pass);
    assert!(!entropy_sequence(&[0.1], &[1.0]).pass);
    assert_eq!(entropy_quantity(0.0, 5.0), 0.0);
}

#[test]
fn invalid_configs() {
    let space = clifford_space((16, 16)).unwrap();
    let c0 = vec![0.0; 3];
    for cfg in [
        FlowConfig { sigmas: vec![0.01, 0.1], ..Default::default() },
        FlowConfig { sigmas: vec![], ..Default::default() },
        FlowConfig { sigmas: vec![-0.1], ..Default::default() },
        FlowConfig { backtrack: 1.0, ..Default::default() },
        FlowConfig { cutoff: Cutoff { lower: 0.0, band: 0.0 }, ..Default::default() },
    ] {
        assert!(matches!(flow(&space, &c0, &cfg), Err(Error::InvalidConfig(_))));
    }
    assert!(matches!(pseudo_gradient(&space, &[f64::NAN, 0.0, 0.0], 0.1), Err(Error::NaNGradient)));
    assert!(matches!(pseudo_gradient(&space, &c0, -1.0), Err(Error::NegativeSigma(_))));
}

#[test]
fn geodesic_width_continuation() {
    let params: Vec<f64> = (-4..=4).map(|i| i as f64 / 5.0).collect();
    let family = SweepFamily::from_sweep(&geodesic_sphere_sweep(), &params, 2).unwrap();
    let cfg = FlowConfig { max_steps: 10, cutoff: Cutoff { lower: 2.0, band: 1.0 }, ..Default::default() };
    let table = sigma_width_continuation(&family, &[0.1, 0.05, 0.0], &cfg).unwrap();
    assert!(table.monotone);
    let w0 = table.rows.iter().find(|r| r.sigma == 0.0).unwrap();
    assert!((w0.width - 4.0 * PI).abs() < 1e-6, "{}", w0.width);
    assert_eq!(w0.argmax, 0.0);
    let w1 = table.rows.iter().find(|r| r.sigma == 0.1).unwrap();
    assert!((w1.width - 4.04 * PI).abs() < 1e-6, "{}", w1.width);
    assert!((table.extrapolated - 4.0 * PI).abs() < 1e-6);
    for r in &table.rows {
        for (a, b) in r.initial.iter().zip(&r.deformed) {
            assert!(b <= a);
        }
    }
}

#[test]
fn index_semicontinuity() {
    let cfg = FlowConfig {
        sigmas: vec![0.1, 0.01, 0.001],
        index: Some(IndexOptions::default()),
        ..Default::default()
    };
    let cl = index_semicontinuity_experiment(&clifford_space((32, 32)).unwrap(), &[0.02, -0.01, 0.015], &cfg).unwrap();
    assert_eq!(cl.stage_indices, vec![5, 5, 5]);
    assert_eq!(cl.limit.morse_index, 5);
    assert!(cl.verdict.holds && !cl.verdict.strict);
    assert!(cl.stages_stable);
    assert!(cl.multiplicity_one);
    assert!(cl.entropy.pass);
    let inj = cl.injected(1);
    assert!(inj.holds && inj.strict);
    let geo_cfg = FlowConfig { index: Some(IndexOptions { grid: (16, 32), ..Default::default() }), ..cfg };
    let geo = index_semicontinuity_experiment(&geodesic_space((16, 32)).unwrap(), &[0.02, 0.01, -0.015], &geo_cfg).unwrap();
    assert_eq!(geo.stage_indices, vec![1, 1, 1]);
    assert_eq!(geo.limit.morse_index, 1);
    assert!(geo.verdict.holds);
    assert!(geo.stages_stable);
}
