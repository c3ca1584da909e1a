use minmax_core::eigenbasis::*;
use minmax_core::hierarchy::*;
use minmax_core::laplacian::*;
use minmax_core::Error;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::time::Instant;

fn setup(d: Domain, levels: usize) -> (DiscreteLaplacian, EigenBasis) {
    let l = build_laplacian(&d).unwrap();
    let b = eigenbasis_levels(&l, levels, &EigenOptions::default()).unwrap();
    (l, b)
}

#[test]
fn widths_equal_eigenvalues_on_circle_and_torus() {
    let t0 = Instant::now();
    for d in [Domain::Circle { n: 256 }, Domain::Torus { n: 64 }] {
        let (l, b) = setup(d, 5);
        let r = hierarchy_report(&b, &l, 5, SweepGrid::default(), &PerturbationOptions::default()).unwrap();
        for (w, t) in r.widths.iter().zip(&r.trials) {
            println!("{} level {} lambda {:.10} mu {:.10} gap {:.2e} trials worst deficit {:.2e}", r.domain, w.level, w.lambda, w.mu, w.gap, t.worst_deficit);
            assert!(w.gap.abs() <= 1e-8 * w.lambda.max(1.0));
            assert!(w.norm_error < 1e-10);
            assert!(t.pass);
        }
        assert!(r.strictly_increasing);
    }
    println!("elapsed {:?}", t0.elapsed());
}

#[test]
fn level_one_and_two_examples() {
    let (l, b) = setup(Domain::Circle { n: 256 }, 3);
    let f1 = hierarchy_sweep(&b, &l, 1, SweepGrid::default()).unwrap();
    let w1 = minmax_width(&f1);
    assert_eq!(w1.evaluations, 1);
    assert!(w1.mu.abs() < 1e-10);
    let f2 = hierarchy_sweep(&b, &l, 2, SweepGrid::default()).unwrap();
    let w2 = minmax_width(&f2);
    assert!((w2.mu - b.eigenvalues[1]).abs() < 1e-9);
    assert_eq!(w2.argmax.t[1], 0.0);
    let f3 = hierarchy_sweep(&b, &l, 3, SweepGrid { rotation_samples: 12, ..Default::default() }).unwrap();
    assert_eq!(f3.rotations[0].len(), 12);
    assert!((minmax_width(&f3).mu - b.lambda(3).unwrap()).abs() < 1e-9);
    assert!(matches!(hierarchy_sweep(&b, &l, 9, SweepGrid::default()), Err(Error::LevelOutOfRange { .. })));
}

#[test]
fn nested_formula_keeps_unit_norm() {
    let (l, b) = setup(Domain::Torus { n: 16 }, 4);
    let f = hierarchy_sweep(&b, &l, 4, SweepGrid::default()).unwrap();
    let counts = f.rotation_counts();
    for (i, t) in f.t_points().iter().enumerate().step_by(37) {
        let p = SweepPoint { t: t.clone(), rotations: counts.iter().map(|c| i % c).collect() };
        let u = f.eval(&p);
        assert!((l.norm(&u) - 1.0).abs() < 1e-10);
        let c = f.coefficients(t);
        let direct: f64 = c.iter().zip(&f.lambdas).map(|(c, lam)| c * c * lam).sum();
        assert!((l.rayleigh(&u) - direct).abs() < 1e-8 * direct.max(1.0));
    }
}

#[test]
fn random_paths_cross_above_lambda2() {
    let (l, b) = setup(Domain::Circle { n: 256 }, 2);
    let u1 = b.levels[0].vectors.column(0).into_owned();
    let u2 = b.levels[1].vectors.column(0).into_owned();
    let lam2 = b.lambda(2).unwrap();
    let geo = random_admissible_path(&l, &u1, &u2, 0, 0.0, &mut ChaCha8Rng::seed_from_u64(0));
    let r = path_crossing_check(&l, &geo, u1.as_slice(), lam2, 101, 1e-6).unwrap();
    assert!(r.t_cross.abs() < 1e-12 && (r.energy_at_crossing - lam2).abs() < 1e-9);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..50 {
        let p = random_admissible_path(&l, &u1, &u2, 4, 0.5, &mut rng);
        let r = path_crossing_check(&l, &p, u1.as_slice(), lam2, 201, 1e-6).unwrap();
        assert!(r.pass && r.max_energy >= lam2 - 1e-6);
    }
    let flat = |t: f64| -> Vec<f64> { u1.iter().map(|x| x * t.signum()).collect() };
    assert!(matches!(path_crossing_check(&l, &flat, u1.as_slice(), lam2, 101, 1e-6), Err(Error::PathDiscontinuous(_))));
    let wrong = |_: f64| -> Vec<f64> { u2.iter().copied().collect() };
    assert!(matches!(path_crossing_check(&l, &wrong, u1.as_slice(), lam2, 101, 1e-6), Err(Error::PathEndpoints(..))));
}

#[test]
fn rotations_are_special_orthogonal() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for n in 1..7 {
        for r in sample_rotations(n, 8, &mut rng) {
            assert!((r.transpose() * &r - nalgebra::DMatrix::identity(n, n)).amax() < 1e-12);
            assert!((r.determinant() - 1.0).abs() < 1e-12);
        }
    }
}

#[test]
fn csv_dump_has_header_and_rows() {
    let (l, b) = setup(Domain::Circle { n: 64 }, 3);
    let f = hierarchy_sweep(&b, &l, 3, SweepGrid::default()).unwrap();
    let mut out = Vec::new();
    write_family_csv(&f, &mut out, 1).unwrap();
    let s = String::from_utf8(out).unwrap();
    assert!(s.starts_with("t1,t2,t3,rotation2,rayleigh"));
    assert_eq!(s.lines().count(), 1 + 81);
}

#[test]
fn boundary_maps_have_degree_one() {
    use minmax_core::degree::DegreeOptions;
    let (l, b) = setup(Domain::Circle { n: 64 }, 4);
    for k in [3, 4] {
        let f = hierarchy_sweep(&b, &l, k, SweepGrid::default()).unwrap();
        assert_eq!(boundary_degree(&f, &DegreeOptions::default()).unwrap().degree, 1);
    }
    let (l, b) = setup(Domain::Torus { n: 16 }, 3);
    let f = hierarchy_sweep(&b, &l, 3, SweepGrid::default()).unwrap();
    let opts = DegreeOptions { resolution: 8, ..Default::default() };
    assert_eq!(boundary_degree(&f, &opts).unwrap().degree, 1);
}
