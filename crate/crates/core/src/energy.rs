//! Area, the curvature energy `F`, the relaxed area `A^σ`, and Gauss–Bonnet.

use crate::sample::ImmersionSample;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

pub fn area(sample: &ImmersionSample) -> f64 {
    sample.nodes.iter().map(|n| n.dvol()).sum()
}

/// `F = ∫ (1 + |𝕀|²)² dvol`.
pub fn energy_f(sample: &ImmersionSample) -> f64 {
    sample
        .nodes
        .iter()
        .map(|n| {
            let e = 1.0 + n.ii_norm2;
            e * e * n.dvol()
        })
        .sum()
}

/// `A^σ = Area + σ² F`.
pub fn energy_a_sigma(sample: &ImmersionSample, sigma: f64) -> Result<f64> {
    if !(sigma >= 0.0) {
        return Err(Error::NegativeSigma(sigma));
    }
    Ok(area(sample) + sigma * sigma * energy_f(sample))
}

/// Area, `F` and `A^σ` in one pass.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Energies {
    pub area: f64,
    pub f: f64,
    pub a_sigma: f64,
}

pub fn energies(sample: &ImmersionSample, sigma: f64) -> Result<Energies> {
    let a = area(sample);
    let f = energy_f(sample);
    if !(sigma >= 0.0) {
        return Err(Error::NegativeSigma(sigma));
    }
    Ok(Energies { area: a, f, a_sigma: a + sigma * sigma * f })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EulerReport {
    /// Raw `(1/2π) ∫ K dvol`.
    pub quadrature: f64,
    pub chi: i64,
    pub genus: i64,
}

/// Euler characteristic from the intrinsic Gauss curvature.
pub fn euler_characteristic(sample: &ImmersionSample) -> Result<EulerReport> {
    if !sample.topology.is_closed() {
        return Err(Error::OpenTopology);
    }
    let km = sample.ambient.sectional_curvature();
    let total: f64 = sample
        .nodes
        .iter()
        .map(|n| {
            let det = n.g[0] * n.g[2] - n.g[1] * n.g[1];
            let k = km + (n.ii[0].dot(&n.ii[2]) - n.ii[1].norm_squared()) / det;
            k * n.dvol()
        })
        .sum();
    let q = total / (2.0 * PI);
    let chi = q.round();
    if (q - chi).abs() > 0.1 {
        return Err(Error::RoundingAmbiguous(q));
    }
    let chi = chi as i64;
    Ok(EulerReport { quadrature: q, chi, genus: (2 - chi) / 2 })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenusBound {
    pub f: f64,
    pub threshold: f64,
    pub g0: i64,
    pub genus: i64,
    pub below_threshold: bool,
    /// `F < C ⇒ genus ≤ g0`.
    pub holds: bool,
}

/// Evaluate the predicate `F(Φ) < C_{g0} ⇒ genus ≤ g0`.
pub fn genus_bound(sample: &ImmersionSample, threshold: f64, g0: i64) -> Result<GenusBound> {
    let e = euler_characteristic(sample)?;
    let f = energy_f(sample);
    let below = f < threshold;
    Ok(GenusBound { f, threshold, g0, genus: e.genus, below_threshold: below, holds: !below || e.genus <= g0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ambient::AmbientManifold;
    use crate::chart::{CliffordChart, EllipsoidChart, GeodesicSphereChart};
    use crate::sample::sample_immersion;

    #[test]
    fn negative_sigma_rejected() {
        let s = sample_immersion(&EllipsoidChart::sphere(1.0), (8, 8), AmbientManifold::R3).unwrap();
        assert_eq!(energy_a_sigma(&s, -0.1), Err(Error::NegativeSigma(-0.1)));
        assert_eq!(energy_a_sigma(&s, 0.0).unwrap(), area(&s));
    }

    #[test]
    fn geodesic_sphere_energy_closed_form() {
        for r in [0.4, 1.0, 1.3] {
            let s = sample_immersion(&GeodesicSphereChart::new(r), (16, 16), AmbientManifold::S3).unwrap();
            let c = 1.0 / r.tan();
            let exact = (1.0 + 2.0 * c * c).powi(2) * 4.0 * PI * r.sin().powi(2);
            assert!((energy_f(&s) - exact).abs() < 1e-11 * exact);
        }
    }

    #[test]
    fn euler_characteristics() {
        let s = sample_immersion(&EllipsoidChart::new(1.0, 2.0, 0.6), (64, 64), AmbientManifold::R3).unwrap();
        assert_eq!(euler_characteristic(&s).unwrap().chi, 2);
        let t = sample_immersion(&CliffordChart::new(1.7).unwrap(), (16, 16), AmbientManifold::S3).unwrap();
        let e = euler_characteristic(&t).unwrap();
        assert_eq!((e.chi, e.genus), (0, 1));
        let b = genus_bound(&t, 1e9, 0).unwrap();
        assert!(b.below_threshold && !b.holds);
    }
}
