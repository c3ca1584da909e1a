//! Parametrized charts with derivative jets.

use crate::ambient::{Mat4, Vec4};
use crate::quadrature::{Grid, Rule, RuleKind};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Topology {
    Sphere,
    Torus,
    Annulus,
}

impl Topology {
    pub fn is_closed(&self) -> bool {
        !matches!(self, Topology::Annulus)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum DerivativeMode {
    Analytic,
    CentralDifference(f64),
}

/// Position and partial derivatives up to order two; `dd = [∂11, ∂12, ∂22]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub pos: Vec4,
    pub d: [Vec4; 2],
    pub dd: [Vec4; 3],
}

/// Third partials `[∂111, ∂112, ∂122, ∂222]`.
pub type Third = [Vec4; 4];

/// Index into `dd` for the pair `(i, j)`.
#[inline]
pub fn sym(i: usize, j: usize) -> usize {
    i + j
}

/// Index into a [`Third`] for the triple `(i, j, k)`.
#[inline]
pub fn sym3(i: usize, j: usize, k: usize) -> usize {
    i + j + k
}

pub trait Chart: Sync {
    fn topology(&self) -> Topology;

    fn jet(&self, u: [f64; 2]) -> Jet;

    /// Analytic third partials when available.
    fn third(&self, _u: [f64; 2]) -> Option<Third> {
        None
    }

    fn derivative_mode(&self) -> DerivativeMode {
        DerivativeMode::Analytic
    }

    /// Parameter rectangle.
    fn domain(&self) -> [(f64, f64); 2] {
        match self.topology() {
            Topology::Sphere => [(0.0, PI), (0.0, 2.0 * PI)],
            Topology::Torus => [(0.0, 2.0 * PI), (0.0, 2.0 * PI)],
            Topology::Annulus => [(0.0, 1.0), (0.0, 2.0 * PI)],
        }
    }

    fn periodic(&self) -> [bool; 2] {
        match self.topology() {
            Topology::Sphere | Topology::Annulus => [false, true],
            Topology::Torus => [true, true],
        }
    }

    fn rules(&self) -> [RuleKind; 2] {
        match self.topology() {
            Topology::Sphere => [RuleKind::Polar, RuleKind::Periodic],
            Topology::Torus => [RuleKind::Periodic, RuleKind::Periodic],
            Topology::Annulus => [RuleKind::GaussLegendre, RuleKind::Periodic],
        }
    }
}

impl<C: Chart + ?Sized> Chart for &C {
    fn topology(&self) -> Topology {
        (**self).topology()
    }
    fn jet(&self, u: [f64; 2]) -> Jet {
        (**self).jet(u)
    }
    fn third(&self, u: [f64; 2]) -> Option<Third> {
        (**self).third(u)
    }
    fn derivative_mode(&self) -> DerivativeMode {
        (**self).derivative_mode()
    }
    fn domain(&self) -> [(f64, f64); 2] {
        (**self).domain()
    }
    fn periodic(&self) -> [bool; 2] {
        (**self).periodic()
    }
    fn rules(&self) -> [RuleKind; 2] {
        (**self).rules()
    }
}

impl<C: Chart + ?Sized + Send> Chart for Box<C> {
    fn topology(&self) -> Topology {
        (**self).topology()
    }
    fn jet(&self, u: [f64; 2]) -> Jet {
        (**self).jet(u)
    }
    fn third(&self, u: [f64; 2]) -> Option<Third> {
        (**self).third(u)
    }
    fn derivative_mode(&self) -> DerivativeMode {
        (**self).derivative_mode()
    }
    fn domain(&self) -> [(f64, f64); 2] {
        (**self).domain()
    }
    fn periodic(&self) -> [bool; 2] {
        (**self).periodic()
    }
    fn rules(&self) -> [RuleKind; 2] {
        (**self).rules()
    }
}

/// Quadrature grid of resolution `n1 × n2` for a chart.
pub fn chart_grid(chart: &dyn Chart, n1: usize, n2: usize) -> Grid {
    let dom = chart.domain();
    let rules = chart.rules();
    let make = |kind: RuleKind, n: usize, (a, b): (f64, f64)| match kind {
        RuleKind::Periodic => Rule::periodic(n, a, b),
        RuleKind::GaussLegendre => Rule::gauss_legendre(n, a, b),
        RuleKind::Polar => Rule::polar(n),
    };
    Grid::new(make(rules[0], n1, dom[0]), make(rules[1], n2, dom[1]))
}

/// `n`-th derivative of `sin` at `x`.
#[inline]
pub fn dsin(n: usize, x: f64) -> f64 {
    match n % 4 {
        0 => x.sin(),
        1 => x.cos(),
        2 => -x.sin(),
        _ => -x.cos(),
    }
}

/// `n`-th derivative of `cos` at `x`.
#[inline]
pub fn dcos(n: usize, x: f64) -> f64 {
    match n % 4 {
        0 => x.cos(),
        1 => -x.sin(),
        2 => -x.cos(),
        _ => x.sin(),
    }
}

/// Derivatives `∂θ^a ∂φ^b` of the unit sphere map `(sinθ cosφ, sinθ sinφ, cosθ)`.
fn unit_sphere_partial(a: usize, b: usize, th: f64, ph: f64) -> [f64; 3] {
    [
        dsin(a, th) * dcos(b, ph),
        dsin(a, th) * dsin(b, ph),
        if b == 0 { dcos(a, th) } else { 0.0 },
    ]
}

const ORDERS2: [(usize, usize); 6] = [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)];
const ORDERS3: [(usize, usize); 4] = [(3, 0), (2, 1), (1, 2), (0, 3)];

fn jet_from(f: impl Fn(usize, usize) -> Vec4) -> Jet {
    let v: Vec<Vec4> = ORDERS2.iter().map(|&(a, b)| f(a, b)).collect();
    Jet {
        pos: v[0],
        d: [v[1], v[2]],
        dd: [v[3], v[4], v[5]],
    }
}

fn third_from(f: impl Fn(usize, usize) -> Vec4) -> Third {
    let v: Vec<Vec4> = ORDERS3.iter().map(|&(a, b)| f(a, b)).collect();
    [v[0], v[1], v[2], v[3]]
}

/// Ellipsoid `center + (a sinθ cosφ, b sinθ sinφ, c cosθ)` in ℝ³.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipsoidChart {
    pub center: [f64; 3],
    pub axes: [f64; 3],
}

impl EllipsoidChart {
    pub fn new(a: f64, b: f64, c: f64) -> Self {
        EllipsoidChart { center: [0.0; 3], axes: [a, b, c] }
    }

    /// Round sphere of radius `r`.
    pub fn sphere(r: f64) -> Self {
        Self::new(r, r, r)
    }

    fn partial(&self, a: usize, b: usize, u: [f64; 2]) -> Vec4 {
        let s = unit_sphere_partial(a, b, u[0], u[1]);
        let c = if a + b == 0 { self.center } else { [0.0; 3] };
        Vec4::new(
            c[0] + self.axes[0] * s[0],
            c[1] + self.axes[1] * s[1],
            c[2] + self.axes[2] * s[2],
            0.0,
        )
    }
}

impl Chart for EllipsoidChart {
    fn topology(&self) -> Topology {
        Topology::Sphere
    }
    fn jet(&self, u: [f64; 2]) -> Jet {
        jet_from(|a, b| self.partial(a, b, u))
    }
    fn third(&self, u: [f64; 2]) -> Option<Third> {
        Some(third_from(|a, b| self.partial(a, b, u)))
    }
}

/// Geodesic sphere of radius `r` in `S³` about `frame[:,0]`, parametrized through the
/// orthonormal frame columns 1..3.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeodesicSphereChart {
    pub frame: Mat4,
    pub radius: f64,
}

impl GeodesicSphereChart {
    /// Sphere about `e0` in the standard frame.
    pub fn new(radius: f64) -> Self {
        GeodesicSphereChart { frame: Mat4::identity(), radius }
    }

    /// Great sphere orthogonal to the unit vector `n`.
    pub fn great(n: &Vec4) -> Self {
        GeodesicSphereChart { frame: frame_with_first(n), radius: PI / 2.0 }
    }

    fn partial(&self, a: usize, b: usize, u: [f64; 2]) -> Vec4 {
        let s = unit_sphere_partial(a, b, u[0], u[1]);
        let (cr, sr) = (self.radius.cos(), self.radius.sin());
        let local = Vec4::new(
            if a + b == 0 { cr } else { 0.0 },
            sr * s[0],
            sr * s[1],
            sr * s[2],
        );
        self.frame * local
    }
}

impl Chart for GeodesicSphereChart {
    fn topology(&self) -> Topology {
        Topology::Sphere
    }
    fn jet(&self, u: [f64; 2]) -> Jet {
        jet_from(|a, b| self.partial(a, b, u))
    }
    fn third(&self, u: [f64; 2]) -> Option<Third> {
        Some(third_from(|a, b| self.partial(a, b, u)))
    }
}

/// Positively oriented orthonormal frame whose first column is `n / |n|`.
pub fn frame_with_first(n: &Vec4) -> Mat4 {
    let n = n.normalize();
    let mut cols = vec![n];
    for k in 0..4 {
        let mut e = Vec4::zeros();
        e[k] = 1.0;
        for c in &cols {
            e -= c * c.dot(&e);
        }
        if e.norm() > 0.3 {
            cols.push(e.normalize());
        }
        if cols.len() == 4 {
            break;
        }
    }
    let mut m = Mat4::from_columns(&cols);
    if m.determinant() < 0.0 {
        let c = -m.column(3);
        m.set_column(3, &c);
    }
    m
}

/// Clifford torus `(1/√(1+b²)) (e^{iθ}, b e^{iφ})` in `S³`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CliffordChart {
    pub b: f64,
}

impl CliffordChart {
    pub fn new(b: f64) -> crate::Result<Self> {
        if !(b > 0.0) || !b.is_finite() {
            return Err(crate::Error::NonpositiveB(b));
        }
        Ok(CliffordChart { b })
    }

    fn partial(&self, a: usize, b: usize, u: [f64; 2]) -> Vec4 {
        let ca = 1.0 / (1.0 + self.b * self.b).sqrt();
        let sa = self.b * ca;
        let first = if b == 0 { ca } else { 0.0 };
        let second = if a == 0 { sa } else { 0.0 };
        Vec4::new(
            first * dcos(a, u[0]),
            first * dsin(a, u[0]),
            second * dcos(b, u[1]),
            second * dsin(b, u[1]),
        )
    }
}

impl Chart for CliffordChart {
    fn topology(&self) -> Topology {
        Topology::Torus
    }
    fn jet(&self, u: [f64; 2]) -> Jet {
        jet_from(|a, b| self.partial(a, b, u))
    }
    fn third(&self, u: [f64; 2]) -> Option<Third> {
        Some(third_from(|a, b| self.partial(a, b, u)))
    }
}

/// Flat annulus `(r cosφ, r sinφ, 0)` in ℝ³ with `r ∈ [r0, r1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlatAnnulusChart {
    pub r0: f64,
    pub r1: f64,
}

impl Chart for FlatAnnulusChart {
    fn topology(&self) -> Topology {
        Topology::Annulus
    }
    fn domain(&self) -> [(f64, f64); 2] {
        [(self.r0, self.r1), (0.0, 2.0 * PI)]
    }
    fn jet(&self, u: [f64; 2]) -> Jet {
        let (r, p) = (u[0], u[1]);
        jet_from(|a, b| {
            let rr = match a {
                0 => r,
                1 => 1.0,
                _ => 0.0,
            };
            Vec4::new(rr * dcos(b, p), rr * dsin(b, p), 0.0, 0.0)
        })
    }
}

/// Image of a chart under a fixed linear map of ℝ⁴.
#[derive(Debug, Clone)]
pub struct LinearImage<C> {
    pub inner: C,
    pub matrix: Mat4,
}

impl<C: Chart> Chart for LinearImage<C> {
    fn topology(&self) -> Topology {
        self.inner.topology()
    }
    fn domain(&self) -> [(f64, f64); 2] {
        self.inner.domain()
    }
    fn rules(&self) -> [RuleKind; 2] {
        self.inner.rules()
    }
    fn periodic(&self) -> [bool; 2] {
        self.inner.periodic()
    }
    fn jet(&self, u: [f64; 2]) -> Jet {
        let j = self.inner.jet(u);
        let m = &self.matrix;
        Jet {
            pos: m * j.pos,
            d: [m * j.d[0], m * j.d[1]],
            dd: [m * j.dd[0], m * j.dd[1], m * j.dd[2]],
        }
    }
    fn third(&self, u: [f64; 2]) -> Option<Third> {
        self.inner.third(u).map(|t| t.map(|v| self.matrix * v))
    }
}

/// Möbius transformation `φ_a(z) = (1−|a|²)(z−a)/|z−a|² − a` of `S³`.
pub fn mobius_point(a: &Vec4, z: &Vec4) -> crate::Result<Vec4> {
    let y = z - a;
    let rho = y.norm_squared();
    if rho.sqrt() < 1e-12 {
        return Err(crate::Error::PoleHit(rho.sqrt()));
    }
    Ok((1.0 - a.norm_squared()) * y / rho - a)
}

/// Image of a chart under `φ_a`.
#[derive(Debug, Clone)]
pub struct MobiusChart<C> {
    pub inner: C,
    pub a: Vec4,
}

impl<C: Chart> Chart for MobiusChart<C> {
    fn topology(&self) -> Topology {
        self.inner.topology()
    }
    fn domain(&self) -> [(f64, f64); 2] {
        self.inner.domain()
    }
    fn rules(&self) -> [RuleKind; 2] {
        self.inner.rules()
    }
    fn periodic(&self) -> [bool; 2] {
        self.inner.periodic()
    }
    fn jet(&self, u: [f64; 2]) -> Jet {
        let j = self.inner.jet(u);
        let s = 1.0 - self.a.norm_squared();
        let y = j.pos - self.a;
        let rho = y.norm_squared();
        let d1 = |v: &Vec4| s * (v / rho - 2.0 * y.dot(v) * y / (rho * rho));
        let d2 = |v: &Vec4, w: &Vec4| {
            s * (-2.0 * (y.dot(w) * v + y.dot(v) * w + v.dot(w) * y) / (rho * rho)
                + 8.0 * y.dot(v) * y.dot(w) * y / (rho * rho * rho))
        };
        Jet {
            pos: s * y / rho - self.a,
            d: [d1(&j.d[0]), d1(&j.d[1])],
            dd: [
                d1(&j.dd[0]) + d2(&j.d[0], &j.d[0]),
                d1(&j.dd[1]) + d2(&j.d[0], &j.d[1]),
                d1(&j.dd[2]) + d2(&j.d[1], &j.d[1]),
            ],
        }
    }
}

/// Chart given by a position map only; derivatives by central differences.
pub struct PositionChart<F> {
    pub map: F,
    pub topology: Topology,
    pub domain: [(f64, f64); 2],
    pub step: f64,
}

impl<F: Fn([f64; 2]) -> Vec4 + Sync> Chart for PositionChart<F> {
    fn topology(&self) -> Topology {
        self.topology
    }
    fn domain(&self) -> [(f64, f64); 2] {
        self.domain
    }
    fn derivative_mode(&self) -> DerivativeMode {
        DerivativeMode::CentralDifference(self.step)
    }
    fn jet(&self, u: [f64; 2]) -> Jet {
        let h = self.step;
        let f = |a: f64, b: f64| (self.map)([u[0] + a * h, u[1] + b * h]);
        let c = f(0.0, 0.0);
        let (p1, m1) = (f(1.0, 0.0), f(-1.0, 0.0));
        let (p2, m2) = (f(0.0, 1.0), f(0.0, -1.0));
        Jet {
            pos: c,
            d: [(p1 - m1) / (2.0 * h), (p2 - m2) / (2.0 * h)],
            dd: [
                (p1 - 2.0 * c + m1) / (h * h),
                (f(1.0, 1.0) - f(1.0, -1.0) - f(-1.0, 1.0) + f(-1.0, -1.0)) / (4.0 * h * h),
                (p2 - 2.0 * c + m2) / (h * h),
            ],
        }
    }
}

/// Central-difference wrapper around any chart's position map.
pub struct CentralDifference<C> {
    pub inner: C,
    pub step: f64,
}

impl<C: Chart> Chart for CentralDifference<C> {
    fn topology(&self) -> Topology {
        self.inner.topology()
    }
    fn domain(&self) -> [(f64, f64); 2] {
        self.inner.domain()
    }
    fn rules(&self) -> [RuleKind; 2] {
        self.inner.rules()
    }
    fn derivative_mode(&self) -> DerivativeMode {
        DerivativeMode::CentralDifference(self.step)
    }
    fn jet(&self, u: [f64; 2]) -> Jet {
        let pc = PositionChart {
            map: |v: [f64; 2]| self.inner.jet(v).pos,
            topology: self.inner.topology(),
            domain: self.inner.domain(),
            step: self.step,
        };
        pc.jet(u)
    }
}
