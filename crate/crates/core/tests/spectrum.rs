use minmax_core::ambient::AmbientManifold;
use minmax_core::basis::TrigBasis;
use minmax_core::chart::{CliffordChart, EllipsoidChart, GeodesicSphereChart};
use minmax_core::sample::sample_immersion;
use minmax_core::spectrum::*;
use minmax_core::Error;

/// Independent oracle: on `Cl₁` the Jacobi operator is `-Δ - 4` with `Δ` on the flat
/// torus of side `2π`, so the eigenvalues are `2(j²+k²) - 4`.
fn clifford_oracle(k: i64) -> Vec<f64> {
    let mut v = Vec::new();
    for j in -k..=k {
        for l in -k..=k {
            v.push(2.0 * (j * j + l * l) as f64 - 4.0);
        }
    }
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v
}

#[test]
fn clifford_index_five() {
    for n in [64, 128] {
        let s = sample_immersion(&CliffordChart::new(1.0).unwrap(), (n, n), AmbientManifold::S3).unwrap();
        let r = jacobi_spectrum(&s, EnergyMode::AreaOnly).unwrap();
        assert_eq!(r.morse_index, 5, "{:?}", &r.eigenvalues[..8]);
        let oracle = clifford_oracle(6);
        for (a, b) in r.eigenvalues.iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-8, "{a} vs {b}");
        }
        let rs = jacobi_spectrum(&s, EnergyMode::ASigma(1e-3)).unwrap();
        assert_eq!(rs.morse_index, 5);
        assert!(rs.gradient_sup < 1e-6);
    }
}

#[test]
fn great_sphere_index_one() {
    for n in [64, 128] {
        let s = sample_immersion(&GeodesicSphereChart::new(std::f64::consts::FRAC_PI_2), (n, n), AmbientManifold::S3).unwrap();
        let r = jacobi_spectrum(&s, EnergyMode::AreaOnly).unwrap();
        assert_eq!(r.morse_index, 1);
        assert!((r.eigenvalues[0] + 2.0).abs() < 1e-8);
        assert_eq!(r.nullity, 3);
        let rs = jacobi_spectrum(&s, EnergyMode::ASigma(1e-3)).unwrap();
        assert_eq!(rs.morse_index, 1);
    }
}

#[test]
fn non_critical_is_rejected() {
    let s = sample_immersion(&CliffordChart::new(1.5).unwrap(), (32, 32), AmbientManifold::S3).unwrap();
    assert!(matches!(jacobi_spectrum(&s, EnergyMode::AreaOnly), Err(Error::NotCritical(_))));
    let e = sample_immersion(&EllipsoidChart::sphere(1.0), (16, 16), AmbientManifold::R3).unwrap();
    assert!(matches!(jacobi_spectrum(&e, EnergyMode::AreaOnly), Err(Error::NotCritical(_))));
}

#[test]
fn report_serializes() {
    let s = sample_immersion(&CliffordChart::new(1.0).unwrap(), (32, 32), AmbientManifold::S3).unwrap();
    let r = jacobi_spectrum_with(&s, EnergyMode::AreaOnly, &TrigBasis::full(2), &JacobiOptions::default()).unwrap();
    let back: SpectralReport = serde_json::from_str(&r.write_json()).unwrap();
    assert_eq!(back, r);
    assert_eq!(r.basis_size, 25);
}
