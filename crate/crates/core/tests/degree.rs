use minmax_core::degree::*;
use minmax_core::hierarchy::haar_rotation;
use minmax_core::Error;
use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn opts() -> DegreeOptions {
    DegreeOptions::default()
}

#[test]
fn identity_and_antipodal() {
    for n in 1..=3 {
        let id = |x: &[f64]| x.to_vec();
        assert_eq!(sphere_map_degree(&id, n, &opts()).unwrap().degree, 1);
        let anti = |x: &[f64]| x.iter().map(|v| -v).collect::<Vec<_>>();
        let expected = if n % 2 == 0 { -1 } else { 1 };
        assert_eq!(sphere_map_degree(&anti, n, &opts()).unwrap().degree, expected);
    }
}

#[test]
fn winding_numbers() {
    for m in [-3i32, -1, 2, 3] {
        let f = move |x: &[f64]| {
            let a = x[1].atan2(x[0]) * m as f64;
            vec![a.cos(), a.sin()]
        };
        let o = DegreeOptions { resolution: 32, ..opts() };
        assert_eq!(sphere_map_degree(&f, 1, &o).unwrap().degree, m as i64);
    }
}

#[test]
fn reflection_has_degree_minus_one() {
    let f = |x: &[f64]| vec![x[0], x[1], -x[2]];
    assert_eq!(sphere_map_degree(&f, 2, &opts()).unwrap().degree, -1);
}

#[test]
fn spherical_coordinates_box() {
    let f = |p: &[f64]| vec![p[0].sin() * p[1].cos(), p[0].sin() * p[1].sin(), p[0].cos()];
    let r = box_map_degree(&f, &[0.0, 0.0], &[std::f64::consts::PI, 2.0 * std::f64::consts::PI], &DegreeOptions { resolution: 24, ..opts() }).unwrap();
    assert_eq!(r.degree, 1);
}

#[test]
fn stable_under_small_target_rotations() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for n in [2usize, 3] {
        for _ in 0..20 {
            let g = haar_rotation(n + 1, &mut rng);
            let small = {
                let log = (&g - g.transpose()) * 0.05;
                (DMatrix::identity(n + 1, n + 1) + &log).qr().q()
            };
            let small = if small.determinant() < 0.0 { -small } else { small };
            let f = |x: &[f64]| {
                let v = &small * DVector::from_column_slice(x);
                v.iter().copied().collect::<Vec<_>>()
            };
            let d = sphere_map_degree(&f, n, &DegreeOptions { resolution: 8, ..opts() }).unwrap();
            assert_eq!(d.degree, 1);
        }
    }
}

#[test]
fn discontinuous_maps_are_rejected() {
    let f = |x: &[f64]| if x[0] > 0.0 { vec![1.0, 0.0, 0.0] } else { vec![-1.0, 0.0, 0.0] };
    assert!(matches!(sphere_map_degree(&f, 2, &opts()), Err(Error::NotContinuous(_))));
    let g = |x: &[f64]| x.to_vec();
    assert!(matches!(sphere_map_degree(&g, 4, &opts()), Err(Error::InvalidConfig(_))));
}
