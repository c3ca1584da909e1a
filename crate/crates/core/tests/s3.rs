use minmax_core::ambient::{AmbientManifold, Vec4};
use minmax_core::degree::DegreeOptions;
use minmax_core::energy::area;
use minmax_core::s3::*;
use minmax_core::sample::sample_immersion;
use minmax_core::Error;
use std::f64::consts::PI;

#[test]
fn mobius_examples() {
    let a = Vec4::new(0.5, 0.0, 0.0, 0.0);
    let e0 = Vec4::new(1.0, 0.0, 0.0, 0.0);
    let p = mobius(&a, &(-e0)).unwrap();
    assert!((p + e0).norm() < 1e-15);
    let p = mobius(&Vec4::zeros(), &Vec4::new(0.0, 0.6, 0.8, 0.0)).unwrap();
    assert!((p - Vec4::new(0.0, 0.6, 0.8, 0.0)).norm() < 1e-15);
    let z = Vec4::new(0.0, 1.0, 0.0, 0.0);
    let w = mobius(&a, &z).unwrap();
    assert!((w.norm() - 1.0).abs() < 1e-14);
    assert!(matches!(mobius(&e0, &z), Err(Error::OutOfRange(_))));
    assert!(matches!(mobius(&a, &a), Err(Error::PoleHit(_))));
}

#[test]
fn b_of_t_values() {
    assert_eq!(b_of_t(0.0).unwrap(), 1.0);
    assert!((b_of_t(1.0 / 3.0).unwrap() - 2.0).abs() < 1e-15);
    assert!(matches!(b_of_t(1.0), Err(Error::OutOfRange(_))));
    assert!(matches!(bryant_envelope(-1.0), Err(Error::OutOfRange(_))));
}

#[test]
fn clifford_area_formula() {
    for b in [0.5, 1.0, 2.0, 3.0] {
        let s = sample_immersion(&clifford_chart(b).unwrap(), (48, 48), AmbientManifold::S3).unwrap();
        let exact = 4.0 * PI * PI * b / (1.0 + b * b);
        assert!((area(&s) - exact).abs() < 1e-10);
    }
    let s = sample_immersion(&clifford_chart(2.0).unwrap(), (48, 48), AmbientManifold::S3).unwrap();
    assert!((area(&s) - 8.0 * PI * PI / 5.0).abs() < 1e-10);
}

#[test]
fn conformal_factor_area_matches_chart_quadrature() {
    let fam = ConformalFamily { grid: (96, 96) };
    for (a, t) in [(Vec4::new(0.3, -0.2, 0.1, 0.4), 0.0), (Vec4::new(0.0, 0.5, 0.0, 0.0), 0.3)] {
        let s = sample_immersion(&fam.chart(&a, t).unwrap(), (96, 96), AmbientManifold::S3).unwrap();
        let direct = area(&s);
        assert!((fam.area(&a, t).unwrap() - direct).abs() < 1e-9 * direct);
    }
    assert!((fam.area(&Vec4::zeros(), 0.0).unwrap() - 2.0 * PI * PI).abs() < 1e-10);
}

#[test]
fn envelope_values() {
    let ts = case_boundary();
    assert!((ts - (2f64.sqrt() - 1.0) / (2f64.sqrt() + 1.0)).abs() < 1e-15);
    assert!((bryant_envelope(0.5).unwrap() - 16.017).abs() < 1e-3);
    assert!((bryant_envelope(ts).unwrap() - 18.6105).abs() < 1e-3);
    assert!((bryant_envelope(-ts).unwrap() - 18.6105).abs() < 1e-3);
    assert!((bryant_envelope(0.0).unwrap() - 2.0 * PI * PI).abs() < 1e-12);
    for t in [0.1, 0.3, 0.7] {
        assert!((bryant_envelope(t).unwrap() - bryant_envelope(-t).unwrap()).abs() < 1e-12);
    }
}

#[test]
fn envelope_against_ball_sampling() {
    let ts = case_boundary();
    let sampling = BallSampling { family: ConformalFamily { grid: (64, 64) }, ..Default::default() };
    let rows = envelope_table(&[-0.5, -0.2, -ts, 0.0, ts, 0.2, 0.5], &sampling).unwrap();
    for r in &rows {
        assert!(r.relative_error < 1e-2, "t = {}: {} vs {}", r.t, r.sampled, r.envelope);
    }
    let mut buf = Vec::new();
    write_envelope_csv(&rows, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().next().unwrap(), "t,bryant_envelope,sampled_max");
    assert_eq!(text.lines().count(), 8);
}

#[test]
fn family_supremum() {
    let s = family_sup();
    assert!(s.below_8pi);
    assert!((s.claimed - 18.6105).abs() < 1e-3);
    assert!((s.value_at_case_boundary - s.claimed).abs() < 1e-3);
    assert!((s.sup - 2.0 * PI * PI).abs() < 1e-9);
    assert!(s.t_at_sup.abs() < 1e-6);
}

#[test]
fn geodesic_sweep_width_and_volumes() {
    let geo = geodesic_sphere_sweep();
    let m = sweep_max_area(&geo, 100).unwrap();
    assert!((m.area - 4.0 * PI).abs() < 1e-8);
    assert!(m.t.abs() < 1e-4);
    let (a0, a1) = geo.endpoint_areas(1e-3).unwrap();
    assert!(a0 < 1e-4 && a1 < 1e-4);
    let opts = SweptVolumeOptions::default();
    assert!((swept_volume(&geo, 0.0, &opts).unwrap() - PI * PI).abs() < 1e-4);
    assert!((swept_volume(&geo, 1.0, &opts).unwrap() - 2.0 * PI * PI).abs() < 1e-4);
    let r = PI * 0.3 / 2.0 + PI / 2.0;
    let t = 2.0 * r / PI - 1.0;
    let v = swept_volume(&geo, t, &opts).unwrap();
    assert!((v - PI * (2.0 * r - (2.0 * r).sin())).abs() < 1e-4);
}

#[test]
fn clifford_sweep_volume() {
    let c = clifford_sweep();
    let v = swept_volume(&c, 1.0, &SweptVolumeOptions::default()).unwrap();
    assert!((v.abs() - 2.0 * PI * PI).abs() < 1e-3, "{v}");
    let m = sweep_max_area(&c, 100).unwrap();
    assert!((m.area - 2.0 * PI * PI).abs() < 1e-8);
}

#[test]
fn rotated_sphere_degree_is_one() {
    let opts = DegreeOptions { resolution: 24, ..Default::default() };
    let r = rotated_sphere_degree(&opts).unwrap();
    assert_eq!(r.degree.degree.abs(), 1);
    assert_eq!(r.literal_box_degree, 0);
    let n = rotated_geodesic_sphere(0.3, -0.4, 1.1);
    assert!((n.norm() - 1.0).abs() < 1e-15);
}

#[test]
fn sp2_family() {
    let pair = sp2_circle_family([0.0, 0.0, 0.0]).unwrap();
    for c in pair {
        assert!((c.center[0] - 0.0).abs() < 1e-15 && (c.center[2].abs() - 1.0).abs() < 1e-15);
        assert_eq!(c.offset, -0.5);
    }
    let pair = sp2_circle_family([0.0, 1.0, 0.0]).unwrap();
    assert!(pair.iter().any(|c| c.is_degenerate()));
    assert!(pair.iter().any(|c| c.offset == 0.0 && (c.length() - 2.0 * PI).abs() < 1e-12));
    for p in [[0.2, -0.1, 0.3], [0.4, 0.3, -0.4], [0.0, 0.0, 0.9]] {
        for c in sp2_circle_family(p).unwrap() {
            let n: f64 = c.center.iter().map(|x| x * x).sum();
            assert!((n - 1.0).abs() < 1e-12);
            for s in [0.0, 1.0, 2.5] {
                let x = c.point(s);
                let dot: f64 = x.iter().zip(&c.center).map(|(a, b)| a * b).sum();
                assert!((dot - c.offset).abs() < 1e-12);
            }
        }
    }
    let [a, b] = canonical_pair(sp2_circle_family([0.7, 0.0, 0.3]).unwrap());
    assert!((a.center[0], a.center[1], a.center[2]) <= (b.center[0], b.center[1], b.center[2]));
    assert!(matches!(sp2_circle_family([1.0, 1.0, 0.0]), Err(Error::OutOfRange(_))));
    let d = sp2_boundary_degree(&DegreeOptions::default()).unwrap();
    assert_eq!(d.degree, -1);
}

#[test]
fn catenoid() {
    let c = critical_catenoid_width();
    assert!((c.lambda - 1.19967864).abs() < 1e-8);
    assert!(c.residual < 1e-14);
    assert!((c.width - 4.36566).abs() < 1e-4);
}

#[test]
fn mobius_images_are_conformal() {
    for a in [Vec4::new(0.3, 0.0, 0.0, 0.0), Vec4::new(0.1, -0.4, 0.2, 0.3)] {
        assert!(conformality_defect(&a, (32, 32)).unwrap() < 1e-8);
    }
}
