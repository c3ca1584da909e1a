//! Quadrature samples of immersions: frames, metric, second fundamental form.

use crate::ambient::{cross2, cross3, AmbientManifold, Vec4};
use crate::chart::{chart_grid, sym, sym3, Chart, Jet, Third, Topology};
use crate::{Error, Result};
use rayon::prelude::*;
use std::io::Write;

/// Unit normal of the surface inside `M` with its first and second partials.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalJet {
    pub nu: Vec4,
    pub d: [Vec4; 2],
    pub dd: [Vec4; 3],
}

/// Geometry at one quadrature node.
#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub u: [f64; 2],
    /// Parameter-space quadrature weight.
    pub weight: f64,
    pub pos: Vec4,
    pub d: [Vec4; 2],
    pub dd: [Vec4; 3],
    /// Metric `[g11, g12, g22]`.
    pub g: [f64; 3],
    /// Inverse metric `[g^11, g^12, g^22]`.
    pub ginv: [f64; 3],
    pub sqrt_det: f64,
    /// Second fundamental form inside `M`, `[𝕀11, 𝕀12, 𝕀22]`.
    pub ii: [Vec4; 3],
    pub ii_norm2: f64,
    pub normal: Option<NormalJet>,
}

impl Node {
    #[inline]
    pub fn gi(&self, i: usize, j: usize) -> f64 {
        self.ginv[sym(i, j)]
    }

    /// Area weight `weight · √det g`.
    #[inline]
    pub fn dvol(&self) -> f64 {
        self.weight * self.sqrt_det
    }

    /// Tangential projection `π_T v`.
    pub fn tangential(&self, v: &Vec4) -> Vec4 {
        let c = [self.d[0].dot(v), self.d[1].dot(v)];
        let mut out = Vec4::zeros();
        for r in 0..2 {
            for s in 0..2 {
                out += self.gi(r, s) * c[r] * self.d[s];
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImmersionSample {
    pub ambient: AmbientManifold,
    pub topology: Topology,
    pub shape: (usize, usize),
    pub nodes: Vec<Node>,
}

/// Bilinear or trilinear vector product whose value is the unnormalized normal.
fn normal_product(ambient: AmbientManifold) -> Option<bool> {
    match ambient {
        AmbientManifold::Euclidean(3) => Some(false),
        AmbientManifold::RoundSphere(3) => Some(true),
        _ => None,
    }
}

/// Unnormalized normal `N` and its first partials.
fn normal_raw(trilinear: bool, j: &Jet) -> (Vec4, [Vec4; 2]) {
    let (a, b, c) = (j.pos, j.d[0], j.d[1]);
    if trilinear {
        let n = cross3(&a, &b, &c);
        let dn = [0, 1].map(|i| {
            cross3(&j.d[i], &b, &c) + cross3(&a, &j.dd[sym(0, i)], &c) + cross3(&a, &b, &j.dd[sym(1, i)])
        });
        (n, dn)
    } else {
        let n = cross2(&b, &c);
        let dn = [0, 1].map(|i| cross2(&j.dd[sym(0, i)], &c) + cross2(&b, &j.dd[sym(1, i)]));
        (n, dn)
    }
}

fn normal_second(trilinear: bool, j: &Jet, t: &Third) -> [Vec4; 3] {
    let (a, b, c) = (j.pos, j.d[0], j.d[1]);
    let ai = |i: usize| j.d[i];
    let bi = |i: usize| j.dd[sym(0, i)];
    let ci = |i: usize| j.dd[sym(1, i)];
    let aij = |i: usize, k: usize| j.dd[sym(i, k)];
    let bij = |i: usize, k: usize| t[sym3(0, i, k)];
    let cij = |i: usize, k: usize| t[sym3(1, i, k)];
    let pairs = [(0, 0), (0, 1), (1, 1)];
    pairs.map(|(i, k)| {
        if trilinear {
            cross3(&aij(i, k), &b, &c)
                + cross3(&a, &bij(i, k), &c)
                + cross3(&a, &b, &cij(i, k))
                + cross3(&ai(i), &bi(k), &c)
                + cross3(&ai(k), &bi(i), &c)
                + cross3(&ai(i), &b, &ci(k))
                + cross3(&ai(k), &b, &ci(i))
                + cross3(&a, &bi(i), &ci(k))
                + cross3(&a, &bi(k), &ci(i))
        } else {
            cross2(&bij(i, k), &c) + cross2(&b, &cij(i, k)) + cross2(&bi(i), &ci(k)) + cross2(&bi(k), &ci(i))
        }
    })
}

/// Unit normal and its first partials from a jet.
fn normal_first(trilinear: bool, j: &Jet) -> (Vec4, [Vec4; 2], Vec4, [Vec4; 2], f64) {
    let (n, dn) = normal_raw(trilinear, j);
    let len = n.norm();
    let nu = n / len;
    let dnu = dn.map(|x| (x - nu * nu.dot(&x)) / len);
    (nu, dnu, n, dn, len)
}

/// Relative step for finite differences of the normal.
const NORMAL_STEP: f64 = 1e-4;

fn normal_jet(trilinear: bool, chart: &dyn Chart, u: [f64; 2], j: &Jet) -> NormalJet {
    let (nu, dnu, _n, dn, len) = normal_first(trilinear, j);
    let dd = match chart.third(u) {
        Some(t) => {
            let ddn = normal_second(trilinear, j, &t);
            let ni = [nu.dot(&dn[0]), nu.dot(&dn[1])];
            [(0, 0), (0, 1), (1, 1)].map(|(i, k)| {
                let nik = ddn[sym(i, k)];
                (nik - dnu[k] * ni[i] - nu * (dnu[k].dot(&dn[i]) + nu.dot(&nik)) - dnu[i] * ni[k]) / len
            })
        }
        None => {
            let h = NORMAL_STEP;
            let at = |k: usize, s: f64| {
                let mut v = u;
                v[k] += s * h;
                normal_first(trilinear, &chart.jet(v)).1
            };
            let (p0, m0, p1, m1) = (at(0, 1.0), at(0, -1.0), at(1, 1.0), at(1, -1.0));
            let d0 = [(p0[0] - m0[0]) / (2.0 * h), (p0[1] - m0[1]) / (2.0 * h)];
            let d1 = [(p1[0] - m1[0]) / (2.0 * h), (p1[1] - m1[1]) / (2.0 * h)];
            [d0[0], 0.5 * (d0[1] + d1[0]), d1[1]]
        }
    };
    NormalJet { nu, d: dnu, dd }
}

/// Unit normal jet of `chart` at `u` inside a 3-dimensional ambient manifold.
pub fn normal_jet_at(ambient: AmbientManifold, chart: &dyn Chart, u: [f64; 2], jet: &Jet) -> Option<NormalJet> {
    normal_product(ambient).map(|t| normal_jet(t, chart, u, jet))
}

/// Metric, inverse metric and area element from first partials.
pub fn metric(d: &[Vec4; 2]) -> ([f64; 3], [f64; 3], f64) {
    let g = [d[0].dot(&d[0]), d[0].dot(&d[1]), d[1].dot(&d[1])];
    let det = g[0] * g[2] - g[1] * g[1];
    (g, [g[2] / det, -g[1] / det, g[0] / det], det)
}

/// Build node geometry from a jet that already lies on `M`.
pub fn node_from_jet(
    ambient: AmbientManifold,
    index: usize,
    u: [f64; 2],
    weight: f64,
    jet: Jet,
    normal: Option<NormalJet>,
) -> Result<Node> {
    let (g, ginv, det) = metric(&jet.d);
    let scale = g[0] * g[2];
    if !(det > 1e-14 * scale) || !det.is_finite() {
        return Err(Error::DegenerateJacobian { node: index, det });
    }
    let mut node = Node {
        u,
        weight,
        pos: jet.pos,
        d: jet.d,
        dd: jet.dd,
        g,
        ginv,
        sqrt_det: det.sqrt(),
        ii: [Vec4::zeros(); 3],
        ii_norm2: 0.0,
        normal,
    };
    for (k, (i, j)) in [(0, 0), (0, 1), (1, 1)].into_iter().enumerate() {
        let h = jet.dd[k];
        node.ii[k] = h - node.tangential(&h) - ambient.ambient_second_fundamental_form(&jet.pos, &jet.d[i], &jet.d[j]);
    }
    node.ii_norm2 = ii_norm2(&node.ginv, &node.ii);
    Ok(node)
}

/// `|𝕀|²_g = g^{ik} g^{jl} 𝕀_ij · 𝕀_kl`.
pub fn ii_norm2(ginv: &[f64; 3], ii: &[Vec4; 3]) -> f64 {
    let mut s = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    s += ginv[sym(i, k)] * ginv[sym(j, l)] * ii[sym(i, j)].dot(&ii[sym(k, l)]);
                }
            }
        }
    }
    s
}

/// Sample a chart on an `n1 × n2` grid.
pub fn sample_immersion(chart: &dyn Chart, grid: (usize, usize), ambient: AmbientManifold) -> Result<ImmersionSample> {
    let (n1, n2) = grid;
    if n1 < 8 || n2 < 8 {
        return Err(Error::GridTooSmall(n1, n2));
    }
    let g = chart_grid(chart, n1, n2);
    let tri = normal_product(ambient);
    let nodes: Vec<Result<Node>> = (0..g.len())
        .into_par_iter()
        .map(|k| {
            let (u, w) = g.node(k);
            let mut jet = chart.jet(u);
            let dist = ambient.distance(&jet.pos);
            if dist > 1e-6 {
                return Err(Error::OffManifold { node: k, distance: dist });
            }
            jet.pos = ambient.projection(&jet.pos);
            let normal = tri.map(|t| normal_jet(t, chart, u, &jet));
            node_from_jet(ambient, k, u, w, jet, normal)
        })
        .collect();
    let nodes = nodes.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(ImmersionSample { ambient, topology: chart.topology(), shape: (n1, n2), nodes })
}

impl ImmersionSample {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn has_normal(&self) -> bool {
        self.nodes.first().is_some_and(|n| n.normal.is_some())
    }

    /// Columnar CSV: node, u1, u2, Φ coordinates, √det g, |𝕀|².
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let q = self.ambient.embedding_dim();
        let mut w = csv_writer(out);
        let mut header = vec!["node".to_string(), "u1".into(), "u2".into()];
        header.extend((0..q).map(|i| format!("x{i}")));
        header.push("sqrt_det_g".into());
        header.push("ii_norm2".into());
        w.write_record(&header).map_err(csv_err)?;
        for (k, n) in self.nodes.iter().enumerate() {
            let mut rec = vec![k.to_string(), fmt(n.u[0]), fmt(n.u[1])];
            rec.extend((0..q).map(|i| fmt(n.pos[i])));
            rec.push(fmt(n.sqrt_det));
            rec.push(fmt(n.ii_norm2));
            w.write_record(&rec).map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }
}

pub(crate) fn csv_writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().from_writer(out)
}

pub(crate) fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

/// Shortest round-trip decimal representation.
pub(crate) fn fmt(x: f64) -> String {
    format!("{x:?}")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::{CliffordChart, EllipsoidChart, GeodesicSphereChart, MobiusChart, PositionChart};
    use std::f64::consts::PI;

    #[test]
    fn sphere_area_element_is_sin_theta() {
        let s = sample_immersion(&EllipsoidChart::sphere(1.0), (12, 16), AmbientManifold::R3).unwrap();
        for n in &s.nodes {
            assert!((n.sqrt_det - n.u[0].sin()).abs() < 1e-14);
            assert!((n.ii_norm2 - 2.0).abs() < 1e-12);
            let nu = n.normal.unwrap().nu;
            assert!((nu - n.pos).norm() < 1e-14, "outward normal");
        }
    }

    #[test]
    fn clifford_metric_is_half_identity() {
        let s = sample_immersion(&CliffordChart::new(1.0).unwrap(), (16, 16), AmbientManifold::S3).unwrap();
        for n in &s.nodes {
            assert!((n.g[0] - 0.5).abs() < 1e-15 && n.g[1].abs() < 1e-15 && (n.g[2] - 0.5).abs() < 1e-15);
            assert!((n.ii_norm2 - 2.0).abs() < 1e-12);
            let nj = n.normal.unwrap();
            for k in 0..3 {
                assert!(n.ii[k].dot(&n.d[0]).abs() < 1e-12);
                assert!(n.ii[k].dot(&n.d[1]).abs() < 1e-12);
                assert!(n.ii[k].dot(&n.pos).abs() < 1e-12);
                assert!((n.ii[k] - nj.nu * nj.nu.dot(&n.ii[k])).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn collapsed_direction_is_degenerate() {
        let c = PositionChart {
            map: |u: [f64; 2]| Vec4::new(u[0].cos(), u[0].sin(), 0.0, 0.0),
            topology: Topology::Torus,
            domain: [(0.0, 2.0 * PI), (0.0, 2.0 * PI)],
            step: 1e-4,
        };
        let r = sample_immersion(&c, (8, 8), AmbientManifold::R3);
        assert!(matches!(r, Err(Error::DegenerateJacobian { .. })));
    }

    #[test]
    fn off_manifold_and_small_grid() {
        let r = sample_immersion(&EllipsoidChart::sphere(1.1), (8, 8), AmbientManifold::S3);
        assert!(matches!(r, Err(Error::OffManifold { .. })));
        let r = sample_immersion(&EllipsoidChart::sphere(1.0), (4, 8), AmbientManifold::R3);
        assert!(matches!(r, Err(Error::GridTooSmall(4, 8))));
    }

    #[test]
    fn analytic_and_difference_normal_jets_agree() {
        let a = Vec4::new(0.1, 0.2, -0.15, 0.05);
        let m = MobiusChart { inner: GeodesicSphereChart::new(1.1), a };
        let s = sample_immersion(&m, (8, 8), AmbientManifold::S3).unwrap();
        let base = sample_immersion(&GeodesicSphereChart::new(1.1), (8, 8), AmbientManifold::S3).unwrap();
        let e = sample_immersion(&EllipsoidChart::new(1.0, 1.5, 0.7), (8, 8), AmbientManifold::R3).unwrap();
        for smp in [&s, &base, &e] {
            for n in &smp.nodes {
                let nj = n.normal.unwrap();
                assert!((nj.nu.norm() - 1.0).abs() < 1e-14);
                assert!(nj.nu.dot(&n.d[0]).abs() < 1e-13);
            }
        }
        let fd = GeodesicSphereJetFd(GeodesicSphereChart::new(1.1));
        let sf = sample_immersion(&fd, (8, 8), AmbientManifold::S3).unwrap();
        for (x, y) in sf.nodes.iter().zip(&base.nodes) {
            let (a, b) = (x.normal.unwrap(), y.normal.unwrap());
            for k in 0..3 {
                assert!((a.dd[k] - b.dd[k]).norm() < 1e-6);
            }
        }
    }

    struct GeodesicSphereJetFd(GeodesicSphereChart);

    impl Chart for GeodesicSphereJetFd {
        fn topology(&self) -> Topology {
            Topology::Sphere
        }
        fn jet(&self, u: [f64; 2]) -> Jet {
            self.0.jet(u)
        }
    }

    #[test]
    fn csv_has_header_and_rows() {
        let s = sample_immersion(&CliffordChart::new(1.0).unwrap(), (8, 8), AmbientManifold::S3).unwrap();
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("node,u1,u2,x0,x1,x2,x3,sqrt_det_g,ii_norm2"));
        assert_eq!(text.lines().count(), 65);
    }
}
