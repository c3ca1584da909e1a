use minmax_core::eigenbasis::*;
use minmax_core::laplacian::*;
use rustfft::{num_complex::Complex, FftPlanner};
use std::time::Instant;

/// Eigenvalues of a circulant stencil, read off its discrete Fourier transform.
fn fft_symbol(first_column: &[f64]) -> Vec<f64> {
    let mut buf: Vec<Complex<f64>> = first_column.iter().map(|&x| Complex::new(x, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(buf.len()).process(&mut buf);
    buf.iter().map(|c| c.re).collect()
}

#[test]
fn circle_spectrum_matches_fft_oracle() {
    let n = 256;
    let l = build_laplacian(&Domain::Circle { n }).unwrap();
    let b = eigenbasis(&l, 9).unwrap();
    let h = 2.0 * std::f64::consts::PI / n as f64;
    let mut col = vec![0.0; n];
    col[0] = 2.0 / (h * h);
    col[1] = -1.0 / (h * h);
    col[n - 1] = -1.0 / (h * h);
    let mut oracle = fft_symbol(&col);
    oracle.sort_by(|a, b| a.partial_cmp(b).unwrap());
    for (a, o) in b.eigenvalues.iter().zip(&oracle).take(9) {
        assert!((a - o).abs() < 1e-9 * o.max(1.0), "{a} {o}");
    }
    assert_eq!(&b.multiplicities()[..3], &[1, 2, 2]);
    assert!(b.levels[0].lambda.abs() < 1e-10);
    let u0 = b.levels[0].vectors.column(0);
    assert!(u0.iter().all(|&x| (x - u0[0]).abs() < 1e-10));
    for (k, lev) in b.levels.iter().take(4).enumerate() {
        assert!((lev.lambda - (k * k) as f64).abs() < 2e-3 * (k * k) as f64 + 1e-10);
    }
    assert!(b.residual < 1e-8 && b.orthonormality < 1e-10);
}

#[test]
fn torus_spectrum_matches_fft_oracle() {
    let n = 64;
    let l = build_laplacian(&Domain::Torus { n }).unwrap();
    let t0 = Instant::now();
    let b = eigenbasis(&l, 21).unwrap();
    println!("torus eigenbasis {:?}", t0.elapsed());
    let h = 1.0 / n as f64;
    let mut col = vec![0.0; n];
    col[0] = 2.0 / (h * h);
    col[1] = -1.0 / (h * h);
    col[n - 1] = -1.0 / (h * h);
    let s = fft_symbol(&col);
    let mut oracle: Vec<f64> = s.iter().flat_map(|a| s.iter().map(move |b| a + b)).collect();
    oracle.sort_by(|a, b| a.partial_cmp(b).unwrap());
    for (a, o) in b.eigenvalues.iter().zip(&oracle).take(21) {
        assert!((a - o).abs() < 1e-9 * o.max(1.0), "{a} {o}");
    }
    assert_eq!(b.multiplicities(), vec![1, 4, 4, 4, 8]);
    let pi2 = 4.0 * std::f64::consts::PI.powi(2);
    for (lev, m) in b.levels.iter().zip([0.0, 1.0, 2.0, 4.0, 5.0]) {
        assert!((lev.lambda - pi2 * m).abs() < 5e-3 * pi2 * m + 1e-9);
    }
    assert!(b.residual < 1e-8 && b.orthonormality < 1e-10, "{} {}", b.residual, b.orthonormality);
}

#[test]
fn icosphere_spectrum() {
    let l = build_laplacian(&Domain::Icosphere { subdivisions: 4 }).unwrap();
    let t0 = Instant::now();
    let b = eigenbasis(&l, 16).unwrap();
    println!("icosphere eigenbasis {:?} {:?}", t0.elapsed(), &b.eigenvalues[..16]);
    assert_eq!(&b.multiplicities()[..3], &[1, 3, 5]);
    for (lev, deg) in b.levels.iter().zip(0..3) {
        let exact = (deg * (deg + 1)) as f64;
        assert!((lev.lambda - exact).abs() <= 0.01 * exact + 1e-9, "{} {exact}", lev.lambda);
    }
    assert!(b.residual < 1e-8 && b.orthonormality < 1e-10);
}

#[test]
fn count_and_level_errors() {
    let l = build_laplacian(&Domain::Circle { n: 16 }).unwrap();
    assert!(matches!(eigenbasis(&l, 17), Err(minmax_core::Error::CountTooLarge { .. })));
    let b = eigenbasis(&l, 5).unwrap();
    assert!(matches!(b.level(9), Err(minmax_core::Error::LevelOutOfRange { .. })));
    let tight = EigenOptions { rel_gap: 0.5, band: 10.0, ..Default::default() };
    assert!(matches!(eigenbasis_with(&l, 5, &tight), Err(minmax_core::Error::ClusterAmbiguity { .. })));
}
