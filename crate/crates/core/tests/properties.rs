use minmax_core::ambient::{AmbientManifold, Vec4};
use minmax_core::chart::{CliffordChart, EllipsoidChart};
use minmax_core::complex::cube_complex;
use minmax_core::complex::flat_norm;
use minmax_core::degree::{sphere_map_degree, DegreeOptions};
use minmax_core::eigenbasis::{eigenbasis_levels, EigenOptions};
use minmax_core::energy::energies;
use minmax_core::flow::*;
use minmax_core::hierarchy::{haar_rotation, hierarchy_sweep, minmax_width, SweepGrid, SweepPoint};
use minmax_core::laplacian::{build_laplacian, Domain};
use minmax_core::report::{Check, VerificationReport};
use minmax_core::s3::conformality_defect;
use minmax_core::sample::sample_immersion;
use minmax_core::variation::*;
use minmax_core::varifold::{bl_distance, random_measure};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn cases(n: u32) -> ProptestConfig {
    ProptestConfig::with_cases(n)
}

proptest! {
    #![proptest_config(cases(16))]

    #[test]
    fn a_sigma_is_monotone_in_sigma(a in 0.6f64..1.6, b in 0.6f64..1.6, c in 0.6f64..1.6, s1 in 0.0f64..1.0, ds in 0.0f64..1.0) {
        let s = sample_immersion(&EllipsoidChart::new(a, b, c), (16, 16), AmbientManifold::R3).unwrap();
        let e1 = energies(&s, s1).unwrap();
        let e2 = energies(&s, s1 + ds).unwrap();
        prop_assert!(e1.a_sigma >= e1.area);
        prop_assert!(e2.a_sigma >= e1.a_sigma);
    }

    #[test]
    fn hessians_are_symmetric(seed in any::<u64>(), k in 0usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (s, v1) = random_variation_case(&mut rng, k, (24, 24)).unwrap();
        let v2: Box<dyn AmbientField> = if s.ambient.is_sphere() {
            Box::new(SphereTangent(QuadraticField::random(&mut rng, 4, 0.5)))
        } else {
            Box::new(QuadraticField::random(&mut rng, 3, 0.5))
        };
        let w1 = VariationField::from_ambient(&s, v1.as_ref()).unwrap();
        let w2 = VariationField::from_ambient(&s, v2.as_ref()).unwrap();
        let a12 = second_variation_area(&s, &w1, &w2).unwrap();
        let a21 = second_variation_area(&s, &w2, &w1).unwrap();
        let f12 = second_variation_f(&s, &w1, &w2).unwrap();
        let f21 = second_variation_f(&s, &w2, &w1).unwrap();
        prop_assert!((a12 - a21).abs() <= 1e-10 * a12.abs().max(1.0));
        prop_assert!((f12 - f21).abs() <= 1e-10 * f12.abs().max(1.0));
    }

    #[test]
    fn tangential_fields_are_null_at_critical_points(p in 1i32..3, q in 1i32..3, amp in 0.1f64..1.0) {
        let chart = CliffordChart::new(1.0).unwrap();
        let s = sample_immersion(&chart, (32, 32), AmbientManifold::S3).unwrap();
        let (pf, qf) = (p as f64, q as f64);
        let x = move |u: [f64; 2]| {
            [
                ScalarJet { f: amp * (qf * u[1]).sin(), d: [0.0, amp * qf * (qf * u[1]).cos()], dd: [0.0, 0.0, -amp * qf * qf * (qf * u[1]).sin()] },
                ScalarJet { f: (pf * u[0]).cos(), d: [-pf * (pf * u[0]).sin(), 0.0], dd: [-pf * pf * (pf * u[0]).cos(), 0.0, 0.0] },
            ]
        };
        let t = VariationField::tangential(&s, &chart, x);
        prop_assert!(second_variation_area(&s, &t, &t).unwrap().abs() < 1e-8);
    }

    #[test]
    fn conformal_images_of_cl1(a in prop::array::uniform4(-0.4f64..0.4)) {
        let v = Vec4::from_column_slice(&a);
        prop_assert!(conformality_defect(&v, (24, 24)).unwrap() <= 1e-8);
    }

    #[test]
    fn bl_metric_axioms(seed in any::<u64>(), n in prop::array::uniform3(3usize..12)) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v: Vec<_> = n.iter().map(|&k| random_measure(&mut rng, k)).collect();
        let d01 = bl_distance(&v[0], &v[1]).unwrap();
        let d10 = bl_distance(&v[1], &v[0]).unwrap();
        let d12 = bl_distance(&v[1], &v[2]).unwrap();
        let d02 = bl_distance(&v[0], &v[2]).unwrap();
        prop_assert!(bl_distance(&v[0], &v[0]).unwrap().abs() < 1e-10);
        prop_assert!((d01 - d10).abs() < 1e-10);
        prop_assert!(d02 <= d01 + d12 + 1e-8);
        for (x, y, d) in [(0, 1, d01), (1, 2, d12), (0, 2, d02)] {
            prop_assert!(d >= (v[x].mass - v[y].mass).abs() - 1e-9);
        }
    }

    #[test]
    fn cutoff_factor_is_a_monotone_ramp(lower in -5.0f64..5.0, band in 0.1f64..3.0, e1 in -10.0f64..10.0, de in 0.0f64..5.0) {
        let c = Cutoff { lower, band };
        let (f1, f2) = (cutoff_factor(e1, &c), cutoff_factor(e1 + de, &c));
        prop_assert!((0.0..=1.0).contains(&f1) && (0.0..=1.0).contains(&f2));
        prop_assert!(f2 >= f1);
        if e1 <= lower {
            prop_assert_eq!(f1, 0.0);
        }
        if e1 >= lower + band {
            prop_assert_eq!(f1, 1.0);
        }
    }

    #[test]
    fn entropy_of_bounded_energy_vanishes(f in 0.1f64..100.0, n in 3usize..8) {
        let sig: Vec<f64> = (1..=n).map(|k| 10f64.powi(-(k as i32))).collect();
        let r = entropy_sequence(&sig, &vec![f; n]);
        prop_assert!(r.decreasing);
        prop_assert!(r.values.iter().all(|v| *v >= 0.0));
    }

    #[test]
    fn report_pass_is_the_conjunction(flags in prop::collection::vec(prop::collection::vec(any::<bool>(), 0..5), 0..5)) {
        let mut r = VerificationReport::new(0);
        for (i, section) in flags.iter().enumerate() {
            r.add(&format!("s{i}"), section.iter().map(|&b| Check::predicate("p", b)).collect());
        }
        let all = flags.iter().flatten().all(|b| *b);
        prop_assert_eq!(r.pass, all);
        prop_assert_eq!(r.all_pass(), all);
    }
}

proptest! {
    #![proptest_config(cases(8))]

    #[test]
    fn first_variations_match_differences(seed in any::<u64>(), k in 0usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (s, v) = random_variation_case(&mut rng, k, (64, 64)).unwrap();
        let w = VariationField::from_ambient(&s, v.as_ref()).unwrap();
        let ev = |t: f64| {
            let p = perturbed_sample(&s, &w, t).unwrap();
            (minmax_core::energy::area(&p), minmax_core::energy::energy_f(&p))
        };
        let h = 1e-4;
        let ((ap, fp), (am, fm)) = (ev(h), ev(-h));
        let rel = |a: f64, b: f64| (a - b).abs() / b.abs().max(1e-300);
        prop_assert!(rel(first_variation_area(&s, &w).unwrap(), (ap - am) / (2.0 * h)) < 1e-4);
        prop_assert!(rel(first_variation_f(&s, &w).unwrap(), (fp - fm) / (2.0 * h)) < 1e-4);
        let b = bound_check(&s, v.as_ref()).unwrap();
        prop_assert!(b.ratio1 < 100.0 && b.ratio2 < 100.0);
    }

    #[test]
    fn widths_equal_eigenvalues(n in 16usize..96, k in 1usize..4, seed in 0u64..1000) {
        let l = build_laplacian(&Domain::Circle { n }).unwrap();
        let b = eigenbasis_levels(&l, k + 1, &EigenOptions::default()).unwrap();
        let mut prev = f64::NEG_INFINITY;
        for level in 1..=k + 1 {
            let fam = hierarchy_sweep(&b, &l, level, SweepGrid { seed, ..Default::default() }).unwrap();
            let w = minmax_width(&fam);
            prop_assert!(w.gap.abs() <= 1e-8 * w.lambda.max(1.0));
            prop_assert!(w.mu > prev);
            prev = w.mu;
        }
    }

    #[test]
    fn sweep_points_have_unit_norm(k in 2usize..5, t in prop::collection::vec(-1.0f64..1.0, 4), r in prop::collection::vec(0usize..100, 3)) {
        let l = build_laplacian(&Domain::Circle { n: 64 }).unwrap();
        let b = eigenbasis_levels(&l, k, &EigenOptions::default()).unwrap();
        let fam = hierarchy_sweep(&b, &l, k, SweepGrid::default()).unwrap();
        let counts = fam.rotation_counts();
        let rotations: Vec<usize> = counts.iter().zip(&r).map(|(c, x)| x % c).collect();
        let u = fam.eval(&SweepPoint { t: t[..k].to_vec(), rotations });
        prop_assert!((l.norm(&u) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn degree_is_stable_under_small_rotations(seed in any::<u64>(), n in 1usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = haar_rotation(n + 1, &mut rng);
        let small = (DMatrix::identity(n + 1, n + 1) + (&g - g.transpose()) * 0.05).qr().q();
        let small = if small.determinant() < 0.0 { -small } else { small };
        let f = |x: &[f64]| (&small * DVector::from_column_slice(x)).iter().copied().collect::<Vec<_>>();
        prop_assert_eq!(sphere_map_degree(&f, n, &DegreeOptions::default()).unwrap().degree, 1);
    }

    #[test]
    fn flat_norm_is_monotone_in_scale(l1 in 0.1f64..2.0, dl in 0.0f64..2.0) {
        let cx = cube_complex([-0.5; 3], [1.5; 3], [4, 4, 4]).unwrap();
        let chi: Vec<f64> = (0..cx.tets.len())
            .map(|k| if (0..3).all(|a| { let x = cx.barycenter(k); x[a] > 0.0 && x[a] < 1.0 }) { 1.0 } else { 0.0 })
            .collect();
        let t = cx.boundary3(&chi);
        let scaled = |s: f64| t.iter().map(|x| s * x).collect::<Vec<_>>();
        let f1 = flat_norm(&cx, &scaled(l1)).unwrap().value;
        let f2 = flat_norm(&cx, &scaled(l1 + dl)).unwrap().value;
        prop_assert!(f2 >= f1 - 1e-9);
    }
}

proptest! {
    #![proptest_config(cases(4))]

    #[test]
    fn flow_descends_and_satisfies_path_inequality(c in prop::array::uniform3(-0.03f64..0.03), sigma in 0.0f64..0.1) {
        let space = clifford_space((16, 16)).unwrap();
        let cfg = FlowConfig { sigmas: vec![sigma], max_steps: 20, ..Default::default() };
        let r = flow(&space, &c, &cfg).unwrap();
        prop_assert!(r.trace.is_monotone());
        prop_assert!(r.trace.palais_check().holds);
    }

    #[test]
    fn frozen_inside_the_cutoff(c in prop::array::uniform3(-0.03f64..0.03)) {
        let space = clifford_space((16, 16)).unwrap();
        let cfg = FlowConfig { sigmas: vec![0.05], max_steps: 5, cutoff: Cutoff { lower: 100.0, band: 1.0 }, ..Default::default() };
        let r = flow(&space, &c, &cfg).unwrap();
        prop_assert_eq!(r.trace.stages[0].reason, StopReason::Frozen);
        prop_assert_eq!(r.state, c.to_vec());
    }

    #[test]
    fn sigma_widths_are_monotone(s1 in 0.0f64..0.1, ds in 0.01f64..0.1) {
        let family = SweepFamily::from_sweep(&minmax_core::s3::geodesic_sphere_sweep(), &[-0.4, 0.0, 0.4], 1).unwrap();
        let cfg = FlowConfig { max_steps: 5, cutoff: Cutoff { lower: 2.0, band: 1.0 }, ..Default::default() };
        let t = sigma_width_continuation(&family, &[s1 + ds, s1], &cfg).unwrap();
        prop_assert!(t.monotone);
    }
}
