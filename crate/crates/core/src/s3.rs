//! Explicit sweep-outs of `S³`: geodesic spheres, Clifford tori, their Möbius images,
//! rotated great spheres and the symmetric-product circle family of `S²`.

use crate::ambient::{AmbientManifold, Vec4};
use crate::chart::{Chart, CliffordChart, GeodesicSphereChart, MobiusChart};
use crate::degree::{box_map_degree, sphere_map_degree, DegreeOptions, DegreeReport};
use crate::energy::area;
use crate::hierarchy::golden_max;
use crate::quadrature::Rule;
use crate::report::Check;
use crate::sample::{sample_immersion, ImmersionSample};
use crate::{Error, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI};
use std::io::Write;

/// `b_t = (1+t)/(1−t)`.
pub fn b_of_t(t: f64) -> Result<f64> {
    if !(t.abs() < 1.0) {
        return Err(Error::OutOfRange(t));
    }
    Ok((1.0 + t) / (1.0 - t))
}

pub fn clifford_chart(b: f64) -> Result<CliffordChart> {
    CliffordChart::new(b)
}

/// `φ_a(z) = (1−|a|²)(z−a)/|z−a|² − a` for `|a| < 1`.
pub fn mobius(a: &Vec4, z: &Vec4) -> Result<Vec4> {
    if !(a.norm() < 1.0) {
        return Err(Error::OutOfRange(a.norm()));
    }
    crate::chart::mobius_point(a, z)
}

/// Conformal factor of `φ_a` at `z`: `|dφ_a(z) v| = λ |v|`.
pub fn mobius_conformal_factor(a: &Vec4, z: &Vec4) -> f64 {
    (1.0 - a.norm_squared()) / (z - a).norm_squared()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepKind {
    /// Spheres of radius `π(t+1)/2` about `e₀`.
    GeodesicSpheres,
    /// Clifford tori `Cl_{b_t}`.
    CliffordTori,
}

/// One-parameter sweep-out `t ∈ (−1,1) ↦` closed surface in `S³`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepOut1D {
    pub kind: SweepKind,
    pub grid: (usize, usize),
}

pub fn geodesic_sphere_sweep() -> SweepOut1D {
    SweepOut1D { kind: SweepKind::GeodesicSpheres, grid: (16, 32) }
}

pub fn clifford_sweep() -> SweepOut1D {
    SweepOut1D { kind: SweepKind::CliffordTori, grid: (32, 32) }
}

impl SweepOut1D {
    pub fn chart(&self, t: f64) -> Result<Box<dyn Chart + Send>> {
        if !(t.abs() < 1.0) {
            return Err(Error::OutOfRange(t));
        }
        Ok(match self.kind {
            SweepKind::GeodesicSpheres => Box::new(GeodesicSphereChart::new(PI * (t + 1.0) / 2.0)),
            SweepKind::CliffordTori => Box::new(CliffordChart::new(b_of_t(t)?)?),
        })
    }

    pub fn sample(&self, t: f64) -> Result<ImmersionSample> {
        let c = self.chart(t)?;
        sample_immersion(c.as_ref(), self.grid, AmbientManifold::S3)
    }

    pub fn area(&self, t: f64) -> Result<f64> {
        Ok(area(&self.sample(t)?))
    }

    /// Areas at `t = ∓(1 − eps)`.
    pub fn endpoint_areas(&self, eps: f64) -> Result<(f64, f64)> {
        Ok((self.area(-1.0 + eps)?, self.area(1.0 - eps)?))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepMax {
    pub t: f64,
    pub area: f64,
}

/// Maximal area along the sweep: grid scan then golden-section refinement.
pub fn sweep_max_area(sweep: &SweepOut1D, scan: usize) -> Result<SweepMax> {
    let ts: Vec<f64> = (1..scan).map(|i| -1.0 + 2.0 * i as f64 / scan as f64).collect();
    let areas: Vec<f64> = ts.par_iter().map(|&t| sweep.area(t)).collect::<Result<_>>()?;
    let (i, _) = areas.iter().enumerate().fold((0, f64::NEG_INFINITY), |b, (i, &a)| if a > b.1 { (i, a) } else { b });
    let h = 2.0 / scan as f64;
    let lo = (ts[i] - h).max(-1.0 + 1e-9);
    let hi = (ts[i] + h).min(1.0 - 1e-9);
    let (t, a) = golden_max(|t| sweep.area(t).unwrap_or(f64::NEG_INFINITY), lo, hi);
    Ok(if a >= areas[i] { SweepMax { t, area: a } } else { SweepMax { t: ts[i], area: areas[i] } })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweptVolumeOptions {
    /// Gauss–Legendre nodes in `t`.
    pub t_nodes: usize,
    /// Central-difference step for `∂_tΦ`.
    pub step: f64,
}

impl Default for SweptVolumeOptions {
    fn default() -> Self {
        SweptVolumeOptions { t_nodes: 48, step: 1e-5 }
    }
}

/// Flux of `∂_tΦ` through the surface at parameter `t`.
fn flux(sweep: &SweepOut1D, t: f64, h: f64) -> Result<f64> {
    let s = sweep.sample(t)?;
    let (cp, cm) = (sweep.chart((t + h).min(1.0 - 1e-15))?, sweep.chart((t - h).max(-1.0 + 1e-15))?);
    let (n1, n2) = s.shape;
    for i in 0..n1 {
        for j in 0..n2 {
            let a = &s.nodes[i * n2 + j];
            let nu = &a.normal.as_ref().ok_or(Error::NoNormal)?.nu;
            let mut neigh = Vec::with_capacity(2);
            if j + 1 < n2 {
                neigh.push(i * n2 + j + 1);
            } else if s.topology.is_closed() {
                neigh.push(i * n2);
            }
            if i + 1 < n1 {
                neigh.push((i + 1) * n2 + j);
            } else if s.topology == crate::chart::Topology::Torus {
                neigh.push(j);
            }
            for k in neigh {
                if s.nodes[k].normal.as_ref().ok_or(Error::NoNormal)?.nu.dot(nu) <= 0.0 {
                    return Err(Error::NonOrientable);
                }
            }
        }
    }
    Ok(s
        .nodes
        .par_iter()
        .map(|n| {
            let dt = (cp.jet(n.u).pos - cm.jet(n.u).pos) / (2.0 * h);
            dt.dot(&n.normal.as_ref().expect("checked").nu) * n.dvol()
        })
        .collect::<Vec<f64>>()
        .iter()
        .sum())
}

/// `Vol_Φ(t) = ∫_{−1}^{t} ∫ ∂_sΦ · ν dvol ds`.
pub fn swept_volume(sweep: &SweepOut1D, t: f64, opts: &SweptVolumeOptions) -> Result<f64> {
    if !(t > -1.0 && t <= 1.0) {
        return Err(Error::OutOfRange(t));
    }
    let rule = Rule::gauss_legendre(opts.t_nodes, -1.0, t);
    let mut total = 0.0;
    for (s, w) in rule.nodes.iter().zip(&rule.weights) {
        total += w * flux(sweep, *s, opts.step)?;
    }
    Ok(total)
}

/// Envelope of `max_a Area(φ_a ∘ Cl_{b_t})` in three cases split at `t* = 3 − 2√2`.
pub fn bryant_envelope(t: f64) -> Result<f64> {
    if !(t.abs() < 1.0) {
        return Err(Error::OutOfRange(t));
    }
    let ts = case_boundary();
    let c = 8.0 / 3.0 * (2.0f64 / 3.0).sqrt() * PI * PI * (1.0 + t * t).sqrt();
    Ok(if t >= ts {
        c / (1.0 + t)
    } else if t <= -ts {
        c / (1.0 - t)
    } else {
        2.0 * PI * PI * (1.0 - t * t) / (1.0 + t * t)
    })
}

/// `t* = (√2 − 1)/(√2 + 1) = 3 − 2√2`.
pub fn case_boundary() -> f64 {
    3.0 - 2.0 * 2f64.sqrt()
}

/// Möbius images of Clifford tori `(a, t) ↦ φ_a ∘ Cl_{b_t}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConformalFamily {
    pub grid: (usize, usize),
}

impl Default for ConformalFamily {
    fn default() -> Self {
        ConformalFamily { grid: (96, 96) }
    }
}

impl ConformalFamily {
    pub fn chart(&self, a: &Vec4, t: f64) -> Result<MobiusChart<CliffordChart>> {
        if !(a.norm() < 1.0) {
            return Err(Error::OutOfRange(a.norm()));
        }
        Ok(MobiusChart { inner: CliffordChart::new(b_of_t(t)?)?, a: *a })
    }

    /// Area through the conformal factor: `∫ λ(Cl_b)² dA_b`.
    pub fn area(&self, a: &Vec4, t: f64) -> Result<f64> {
        Ok(self.area_evaluator(t)?(a))
    }

    fn area_evaluator(&self, t: f64) -> Result<impl Fn(&Vec4) -> f64 + Sync> {
        let b = b_of_t(t)?;
        let (n1, n2) = self.grid;
        let ca = 1.0 / (1.0 + b * b).sqrt();
        let sa = b * ca;
        let w = ca * sa * (2.0 * PI / n1 as f64) * (2.0 * PI / n2 as f64);
        let first: Vec<(f64, f64)> = (0..n1).map(|i| (ca * (2.0 * PI * i as f64 / n1 as f64).cos(), ca * (2.0 * PI * i as f64 / n1 as f64).sin())).collect();
        let second: Vec<(f64, f64)> = (0..n2).map(|j| (sa * (2.0 * PI * j as f64 / n2 as f64).cos(), sa * (2.0 * PI * j as f64 / n2 as f64).sin())).collect();
        Ok(move |a: &Vec4| {
            let s = 1.0 - a.norm_squared();
            let mut total = 0.0;
            for &(x0, x1) in &first {
                let d01 = (x0 - a[0]).powi(2) + (x1 - a[1]).powi(2);
                for &(x2, x3) in &second {
                    let r = d01 + (x2 - a[2]).powi(2) + (x3 - a[3]).powi(2);
                    total += s * s / (r * r);
                }
            }
            total * w
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BallSampling {
    /// Sampled ball radius.
    pub radius: f64,
    pub points: usize,
    /// Stop doubling once the maximum moves by less than this relative amount.
    pub tol: f64,
    pub max_doublings: usize,
    pub family: ConformalFamily,
}

impl Default for BallSampling {
    fn default() -> Self {
        BallSampling { radius: 0.9, points: 10_000, tol: 3e-3, max_doublings: 4, family: ConformalFamily::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BallMax {
    pub t: f64,
    pub max: f64,
    pub argmax: [f64; 4],
    pub evaluations: usize,
    pub doublings: usize,
}

fn radical_inverse(mut i: usize, base: usize) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while i > 0 {
        f /= base as f64;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

/// Low-discrepancy point on `S³` from the Halton triple with bases 2, 3, 5.
pub fn halton_point(i: usize) -> Vec4 {
    let (u1, u2, u3) = (radical_inverse(i, 2), radical_inverse(i, 3), radical_inverse(i, 5));
    let (a, b) = ((1.0 - u1).sqrt(), u1.sqrt());
    Vec4::new(a * (2.0 * PI * u2).sin(), a * (2.0 * PI * u2).cos(), b * (2.0 * PI * u3).sin(), b * (2.0 * PI * u3).cos())
}

/// Radial shells (including the center and the outer radius) times Halton angular points.
pub fn ball_points(radius: f64, points: usize) -> Vec<Vec4> {
    let shells = ((0.2 * (points as f64).sqrt()).round() as usize).max(3);
    let per = (points / shells).max(1);
    let mut out = vec![Vec4::zeros()];
    for s in 1..shells {
        let r = radius * s as f64 / (shells - 1) as f64;
        for j in 0..per {
            out.push(halton_point(1 + s * per + j) * r);
        }
    }
    out
}

/// Largest area of `φ_a ∘ Cl_{b_t}` over sampled `a` with `|a| ≤ radius`.
pub fn max_area_over_ball(t: f64, sampling: &BallSampling) -> Result<BallMax> {
    let eval = sampling.family.area_evaluator(t)?;
    let scan = |n: usize| -> (f64, Vec4, usize) {
        let pts = ball_points(sampling.radius, n);
        let vals: Vec<f64> = pts.par_iter().map(&eval).collect();
        let (i, v) = vals.iter().enumerate().fold((0, f64::NEG_INFINITY), |b, (i, &v)| if v > b.1 { (i, v) } else { b });
        (v, pts[i], pts.len())
    };
    let (mut best, mut arg, mut evaluations) = scan(sampling.points);
    let mut n = sampling.points;
    let mut doublings = 0;
    while doublings < sampling.max_doublings {
        n *= 2;
        doublings += 1;
        let (v, a, e) = scan(n);
        evaluations += e;
        let moved = (v - best).abs() / best.abs();
        if v > best {
            best = v;
            arg = a;
        }
        if moved < sampling.tol {
            break;
        }
    }
    let mut step = sampling.radius / 8.0;
    for _ in 0..40 {
        let mut improved = false;
        for k in 0..4 {
            for s in [-1.0, 1.0] {
                let mut c = arg;
                c[k] += s * step;
                if c.norm() <= sampling.radius {
                    let v = eval(&c);
                    evaluations += 1;
                    if v > best {
                        best = v;
                        arg = c;
                        improved = true;
                    }
                }
            }
        }
        if !improved {
            step /= 2.0;
            if step < 1e-6 {
                break;
            }
        }
    }
    Ok(BallMax { t, max: best, argmax: [arg[0], arg[1], arg[2], arg[3]], evaluations, doublings })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeRow {
    pub t: f64,
    pub envelope: f64,
    pub sampled: f64,
    pub relative_error: f64,
}

/// Sampled maxima against the envelope on a `t` grid.
pub fn envelope_table(ts: &[f64], sampling: &BallSampling) -> Result<Vec<EnvelopeRow>> {
    ts.iter()
        .map(|&t| {
            let e = bryant_envelope(t)?;
            let s = max_area_over_ball(t, sampling)?.max;
            Ok(EnvelopeRow { t, envelope: e, sampled: s, relative_error: (s - e).abs() / e })
        })
        .collect()
}

pub fn write_envelope_csv<W: Write>(rows: &[EnvelopeRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "bryant_envelope", "sampled_max"]).map_err(crate::sample::csv_err)?;
    for r in rows {
        w.write_record([r.t, r.envelope, r.sampled].map(crate::sample::fmt)).map_err(crate::sample::csv_err)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FamilySup {
    /// Supremum of the envelope over `t ∈ (−1,1)`.
    pub sup: f64,
    pub t_at_sup: f64,
    /// The bound `8π²/(3√2)` for comparison.
    pub claimed: f64,
    pub value_at_case_boundary: f64,
    pub below_8pi: bool,
}

pub fn family_sup() -> FamilySup {
    let f = |t: f64| bryant_envelope(t).unwrap_or(f64::NEG_INFINITY);
    let n = 20_000;
    let (mut bt, mut bv) = (0.0, f64::NEG_INFINITY);
    for i in 1..n {
        let t = -1.0 + 2.0 * i as f64 / n as f64;
        let v = f(t);
        if v > bv {
            bt = t;
            bv = v;
        }
    }
    let h = 2.0 / n as f64;
    let (t, v) = golden_max(f, bt - h, bt + h);
    let (t, v) = if v >= bv { (t, v) } else { (bt, bv) };
    FamilySup {
        sup: v,
        t_at_sup: t,
        claimed: 8.0 * PI * PI / (3.0 * 2f64.sqrt()),
        value_at_case_boundary: f(case_boundary()),
        below_8pi: v < 8.0 * PI,
    }
}

/// Unit normal of the great sphere with spherical coordinates `(φ, ψ, θ)`.
pub fn rotated_geodesic_sphere(phi: f64, psi: f64, theta: f64) -> Vec4 {
    let (ct, st) = (theta.cos(), theta.sin());
    Vec4::new(ct * psi.cos() * phi.cos(), ct * psi.cos() * phi.sin(), st, ct * psi.sin())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RotatedSphereDegree {
    /// Degree over `(φ, ψ, θ) ∈ [0,2π] × [−π/2,π/2] × [−π/2,π/2]`.
    pub degree: DegreeReport,
    /// Degree over the literal box `[0,2π] × [0,π] × [−π/2,π/2]`.
    pub literal_box_degree: i64,
}

/// Degree of `(φ, ψ, θ) ↦ normal ∈ S³ ≅ 𝒮`.
pub fn rotated_sphere_degree(opts: &DegreeOptions) -> Result<RotatedSphereDegree> {
    let f = |p: &[f64]| {
        let n = rotated_geodesic_sphere(p[0], p[1], p[2]);
        vec![n[0], n[1], n[2], n[3]]
    };
    let degree = box_map_degree(&f, &[0.0, -FRAC_PI_2, -FRAC_PI_2], &[2.0 * PI, FRAC_PI_2, FRAC_PI_2], opts)?;
    let literal = box_map_degree(&f, &[0.0, 0.0, -FRAC_PI_2], &[2.0 * PI, PI, FRAC_PI_2], opts)?;
    Ok(RotatedSphereDegree { degree, literal_box_degree: literal.degree })
}

/// The round circle `{x ∈ S² : x·center = offset}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircleOnSphere {
    pub center: [f64; 3],
    pub offset: f64,
    /// `+1` when oriented as the boundary of the cap containing `center`.
    pub orientation: i8,
}

/// Circles with `|offset| ≥ 1 − DEGENERATE` carry no mass.
pub const DEGENERATE: f64 = 1e-9;

impl CircleOnSphere {
    pub fn new(center: [f64; 3], offset: f64) -> Result<Self> {
        let n = (center[0] * center[0] + center[1] * center[1] + center[2] * center[2]).sqrt();
        if (n - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidConfig(format!("circle center has norm {n}")));
        }
        if !(offset.abs() <= 1.0) {
            return Err(Error::OutOfRange(offset));
        }
        Ok(CircleOnSphere { center, offset, orientation: 1 })
    }

    pub fn is_degenerate(&self) -> bool {
        self.offset.abs() >= 1.0 - DEGENERATE
    }

    pub fn length(&self) -> f64 {
        if self.is_degenerate() {
            0.0
        } else {
            2.0 * PI * (1.0 - self.offset * self.offset).sqrt()
        }
    }

    /// Point at angle `s` along the circle.
    pub fn point(&self, s: f64) -> [f64; 3] {
        let c = Vec4::new(self.center[0], self.center[1], self.center[2], 0.0);
        let f = crate::chart::frame_with_first(&c);
        let r = (1.0 - self.offset * self.offset).max(0.0).sqrt();
        let sign = self.orientation as f64;
        let p = c * self.offset + (f.column(1) * s.cos() + f.column(2) * (sign * s).sin()) * r;
        [p[0], p[1], p[2]]
    }
}

fn rotate_z(p: [f64; 3], phi: f64) -> [f64; 3] {
    let (c, s) = (phi.cos(), phi.sin());
    [c * p[0] - s * p[1], s * p[0] + c * p[1], p[2]]
}

/// Axially symmetric pair of circles parametrized by the closed unit ball.
pub fn sp2_circle_family(p: [f64; 3]) -> Result<[CircleOnSphere; 2]> {
    let r = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
    if r > 1.0 + 1e-12 {
        return Err(Error::OutOfRange(r));
    }
    let r = r.min(1.0);
    let phi = p[1].atan2(p[0]);
    let theta = if r > 0.0 { (p[2] / r).clamp(-1.0, 1.0).asin() } else { 0.0 };
    let pair = if r < 0.5 {
        let tr = (1.0 - 2.0 * r) * FRAC_PI_2 + 2.0 * r * theta.abs();
        [([tr.cos(), 0.0, tr.sin()], -0.5), ([tr.cos(), 0.0, -tr.sin()], -0.5)]
    } else {
        [([theta.cos(), 0.0, theta.sin()], -r), ([theta.cos(), 0.0, -theta.sin()], -1.0 + r)]
    };
    Ok(pair.map(|(c, t)| CircleOnSphere { center: rotate_z(c, phi), offset: t, orientation: 1 }))
}

/// Lexicographic order of `(center, offset)`, for serialization.
pub fn canonical_pair(pair: [CircleOnSphere; 2]) -> [CircleOnSphere; 2] {
    let key = |c: &CircleOnSphere| [c.center[0], c.center[1], c.center[2], c.offset];
    let [a, b] = pair;
    if key(&a).partial_cmp(&key(&b)) == Some(std::cmp::Ordering::Greater) {
        [b, a]
    } else {
        [a, b]
    }
}

/// Degree of `σ ∈ S² = ∂B³ ↦` center of the great circle of the boundary pair.
pub fn sp2_boundary_degree(opts: &DegreeOptions) -> Result<DegreeReport> {
    let f = |x: &[f64]| {
        let pair = sp2_circle_family([x[0], x[1], x[2]]).expect("boundary point lies in the ball");
        let g = if pair[0].offset.abs() < pair[1].offset.abs() { pair[0] } else { pair[1] };
        g.center.to_vec()
    };
    sphere_map_degree(&f, 2, opts)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Catenoid {
    pub lambda: f64,
    pub residual: f64,
    /// `2π Λ⁻²`.
    pub width: f64,
}

/// Root of `Λ tanh Λ = 1` on `[1, 1.5]` by bisection.
pub fn critical_catenoid_width() -> Catenoid {
    let f = |x: f64| x * x.tanh() - 1.0;
    let (mut a, mut b) = (1.0f64, 1.5f64);
    while b - a > 1e-15 {
        let m = 0.5 * (a + b);
        if f(m) > 0.0 {
            b = m;
        } else {
            a = m;
        }
    }
    let l = 0.5 * (a + b);
    Catenoid { lambda: l, residual: f(l).abs(), width: 2.0 * PI / (l * l) }
}

/// Largest `|g₁₂|/g₁₁` and `|g₁₁ − g₂₂|/g₁₁` of `φ_a ∘ Cl₁`.
pub fn conformality_defect(a: &Vec4, grid: (usize, usize)) -> Result<f64> {
    let c = MobiusChart { inner: CliffordChart::new(1.0)?, a: *a };
    let s = sample_immersion(&c, grid, AmbientManifold::S3)?;
    Ok(s
        .nodes
        .iter()
        .map(|n| (n.g[1].abs() / n.g[0]).max((n.g[0] - n.g[2]).abs() / n.g[0]))
        .fold(0.0, f64::max))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct S3Options {
    pub sampling: BallSampling,
    pub volume: SweptVolumeOptions,
    pub degree: DegreeOptions,
    pub envelope_ts: [f64; 7],
}

impl Default for S3Options {
    fn default() -> Self {
        let ts = case_boundary();
        S3Options {
            sampling: BallSampling::default(),
            volume: SweptVolumeOptions::default(),
            degree: DegreeOptions { resolution: 24, ..Default::default() },
            envelope_ts: [-0.5, -0.2, -ts, 0.0, ts, 0.2, 0.5],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct S3Report {
    pub checks: Vec<Check>,
    pub envelope: Vec<EnvelopeRow>,
    pub family_sup: FamilySup,
    pub rotated_degree: RotatedSphereDegree,
    pub sp2_degree: DegreeReport,
    pub catenoid: Catenoid,
}

/// Every S³ width and conformal-volume verification.
pub fn s3_report(opts: &S3Options) -> Result<S3Report> {
    let pi2 = PI * PI;
    let geo = geodesic_sphere_sweep();
    let w1 = sweep_max_area(&geo, 200)?;
    let half = swept_volume(&geo, 0.0, &opts.volume)?;
    let total = swept_volume(&geo, 1.0, &opts.volume)?;
    let cl_total = swept_volume(&clifford_sweep(), 1.0, &opts.volume)?;
    let cl1 = area(&sample_immersion(&CliffordChart::new(1.0)?, (64, 64), AmbientManifold::S3)?);
    let envelope = envelope_table(&opts.envelope_ts, &opts.sampling)?;
    let sup = family_sup();
    let rotated = rotated_sphere_degree(&opts.degree)?;
    let sp2 = sp2_boundary_degree(&opts.degree)?;
    let cat = critical_catenoid_width();
    let (e0, e1) = geo.endpoint_areas(1e-3)?;
    let mut checks = vec![
        Check::absolute("W1 = max area of geodesic sweep", 4.0 * PI, w1.area, 1e-6),
        Check::absolute("swept volume at r = pi/2", pi2, half, 1e-4),
        Check::absolute("total swept volume of geodesic sweep", 2.0 * pi2, total, 1e-4),
        Check::absolute("total swept volume of Clifford sweep", 2.0 * pi2, cl_total.abs(), 1e-3),
        Check::below("geodesic sweep end areas", 1e-2, e0.max(e1)),
        Check::absolute("area of Cl_1", 2.0 * pi2, cl1, 1e-6),
    ];
    for r in &envelope {
        checks.push(Check::relative(&format!("max area over ball at t = {:.5}", r.t), r.envelope, r.sampled, 1e-2));
    }
    checks.push(Check::relative("family sup", sup.claimed, sup.sup, 5e-3));
    checks.push(Check::below("family sup below 8 pi", 8.0 * PI, sup.sup));
    checks.push(Check::predicate(
        "hierarchy 4 pi < 2 pi^2 < 8 pi from computed values",
        w1.area < cl1 && cl1 < 8.0 * PI && sup.sup < 8.0 * PI,
    ));
    checks.push(Check::absolute("rotated geodesic sphere degree", 1.0, rotated.degree.degree.abs() as f64, 0.0));
    checks.push(Check::absolute("SP2 boundary degree", 1.0, sp2.degree.abs() as f64, 0.0));
    checks.push(Check::below("Lambda tanh Lambda residual", 1e-12 + f64::EPSILON, cat.residual));
    checks.push(Check::absolute("critical catenoid width 2 pi / Lambda^2", 4.3658, cat.width, 1e-3));
    Ok(S3Report { checks, envelope, family_sup: sup, rotated_degree: rotated, sp2_degree: sp2, catenoid: cat })
}
