//! Background simplicial 3-complexes, their chains, the simplicial flat norm and
//! rasterization of closed sampled surfaces.

use crate::ambient::Vec4;
use crate::chart::{frame_with_first, Topology};
use crate::lp::{Cmp, LinearProgram, Sense};
use crate::sample::ImmersionSample;
use crate::{Error, Result};
use nalgebra::{DMatrix, Matrix3};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ComplexKind {
    /// Triangulated box in `ℝ³` (fourth coordinate zero).
    Box,
    /// Triangulated round `S³ ⊂ ℝ⁴`.
    Sphere,
}

/// Oriented simplicial 3-complex with its 2- and 1-skeleta.
#[derive(Debug, Clone)]
pub struct Complex3 {
    pub kind: ComplexKind,
    pub vertices: Vec<Vec4>,
    /// Tetrahedra listed with positive ambient orientation.
    pub tets: Vec<[usize; 4]>,
    /// Sorted vertex triples.
    pub faces: Vec<[usize; 3]>,
    /// Sorted vertex pairs.
    pub edges: Vec<[usize; 2]>,
    /// `∂τ = Σ sign · face`.
    pub tet_faces: Vec<[(usize, f64); 4]>,
    /// `∂f = Σ sign · edge`.
    pub face_edges: Vec<[(usize, f64); 3]>,
    pub volumes: Vec<f64>,
    pub areas: Vec<f64>,
    /// Barycenters, on `S³` for sphere complexes.
    pub centers: Vec<Vec4>,
    /// Whether the box is a periodic 3-torus.
    pub periodic: bool,
    /// Cube grid resolution and box, when built by [`cube_complex`].
    pub grid: Option<([f64; 3], [f64; 3], [usize; 3])>,
}

fn simplex_measure(points: &[Vec4]) -> f64 {
    let k = points.len() - 1;
    let g = DMatrix::from_fn(k, k, |i, j| (points[i + 1] - points[0]).dot(&(points[j + 1] - points[0])));
    let f: f64 = (1..=k).map(|i| i as f64).product();
    g.determinant().max(0.0).sqrt() / f
}

fn sort_sign<const N: usize>(mut v: [usize; N]) -> ([usize; N], f64) {
    let mut sign = 1.0;
    for i in 0..N {
        for j in 0..N - 1 - i {
            if v[j] > v[j + 1] {
                v.swap(j, j + 1);
                sign = -sign;
            }
        }
    }
    (v, sign)
}

impl Complex3 {
    /// `points[k]` are the unwrapped vertex positions of tetrahedron `k`.
    fn from_tets(kind: ComplexKind, vertices: Vec<Vec4>, raw: Vec<[usize; 4]>, mut points: Vec<[Vec4; 4]>) -> Result<Complex3> {
        let mut tets = Vec::with_capacity(raw.len());
        for (t, p) in raw.into_iter().zip(points.iter_mut()) {
            let det = match kind {
                ComplexKind::Box => {
                    Matrix3::from_fn(|r, c| p[c + 1][r] - p[0][r]).determinant()
                }
                ComplexKind::Sphere => crate::ambient::Mat4::from_columns(&p[..]).determinant(),
            };
            if det.abs() < 1e-15 {
                return Err(Error::BadMesh("degenerate tetrahedron".into()));
            }
            if det > 0.0 {
                tets.push(t);
            } else {
                tets.push([t[1], t[0], t[2], t[3]]);
                p.swap(0, 1);
            }
        }
        let mut face_points: Vec<[Vec4; 3]> = Vec::new();
        let mut face_index: HashMap<[usize; 3], usize> = HashMap::new();
        let mut faces = Vec::new();
        let mut tet_faces = Vec::with_capacity(tets.len());
        for (t, p) in tets.iter().zip(&points) {
            let mut tf = [(0, 0.0); 4];
            for (i, slot) in tf.iter_mut().enumerate() {
                let raw: Vec<usize> = (0..4).filter(|&k| k != i).map(|k| t[k]).collect();
                let (f, s) = sort_sign([raw[0], raw[1], raw[2]]);
                let sign = if i % 2 == 0 { s } else { -s };
                let id = *face_index.entry(f).or_insert_with(|| {
                    faces.push(f);
                    let q: Vec<Vec4> = (0..4).filter(|&k| k != i).map(|k| p[k]).collect();
                    face_points.push([q[0], q[1], q[2]]);
                    faces.len() - 1
                });
                *slot = (id, sign);
            }
            tet_faces.push(tf);
        }
        let mut edge_index: HashMap<[usize; 2], usize> = HashMap::new();
        let mut edges = Vec::new();
        let face_edges = faces
            .iter()
            .map(|f| {
                let mut fe = [(0, 0.0); 3];
                for (i, slot) in fe.iter_mut().enumerate() {
                    let raw: Vec<usize> = (0..3).filter(|&k| k != i).map(|k| f[k]).collect();
                    let e = [raw[0], raw[1]];
                    let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
                    let id = *edge_index.entry(e).or_insert_with(|| {
                        edges.push(e);
                        edges.len() - 1
                    });
                    *slot = (id, sign);
                }
                fe
            })
            .collect();
        let volumes = points.par_iter().map(|p| simplex_measure(p)).collect();
        let areas = face_points.par_iter().map(|p| simplex_measure(p)).collect();
        let centers = points
            .iter()
            .map(|p| {
                let b = p.iter().sum::<Vec4>() / 4.0;
                if kind == ComplexKind::Sphere { b.normalize() } else { b }
            })
            .collect();
        Ok(Complex3 { kind, vertices, tets, faces, edges, tet_faces, face_edges, volumes, areas, centers, periodic: false, grid: None })
    }

    pub fn cells(&self) -> usize {
        self.tets.len() + self.faces.len() + self.edges.len() + self.vertices.len()
    }

    /// `∂S` of a 3-chain.
    pub fn boundary3(&self, s: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.faces.len()];
        for (t, c) in self.tet_faces.iter().zip(s) {
            if *c != 0.0 {
                for &(f, sign) in t {
                    out[f] += sign * c;
                }
            }
        }
        out
    }

    /// `∂T` of a 2-chain.
    pub fn boundary2(&self, t: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.edges.len()];
        for (f, c) in self.face_edges.iter().zip(t) {
            if *c != 0.0 {
                for &(e, sign) in f {
                    out[e] += sign * c;
                }
            }
        }
        out
    }

    pub fn mass2(&self, t: &[f64]) -> f64 {
        t.iter().zip(&self.areas).map(|(c, a)| c.abs() * a).sum()
    }

    pub fn mass3(&self, s: &[f64]) -> f64 {
        s.iter().zip(&self.volumes).map(|(c, v)| c.abs() * v).sum()
    }

    pub fn barycenter(&self, t: usize) -> Vec4 {
        self.centers[t]
    }

    /// Tetrahedron of a cube complex containing `x`, if inside the box.
    pub fn locate(&self, x: &Vec4) -> Option<usize> {
        let (lo, hi, n) = self.grid?;
        let mut cell = [0usize; 3];
        let mut frac = [0.0; 3];
        for a in 0..3 {
            let s = (x[a] - lo[a]) / (hi[a] - lo[a]) * n[a] as f64;
            if !(0.0..=n[a] as f64).contains(&s) {
                return None;
            }
            let c = (s.floor() as usize).min(n[a] - 1);
            cell[a] = c;
            frac[a] = s - c as f64;
        }
        let mut order = [0usize, 1, 2];
        order.sort_by(|&a, &b| frac[b].total_cmp(&frac[a]));
        let perm = PERMS3.iter().position(|p| *p == order).expect("permutation");
        Some(((cell[2] * n[1] + cell[1]) * n[0] + cell[0]) * 6 + perm)
    }
}

const PERMS3: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];

/// Freudenthal triangulation of the box `[lo, hi]` with `n` cubes per axis, six
/// tetrahedra per cube.
pub fn cube_complex(lo: [f64; 3], hi: [f64; 3], n: [usize; 3]) -> Result<Complex3> {
    grid_complex(lo, hi, n, false)
}

/// Freudenthal triangulation of the flat 3-torus `[lo, hi]` with opposite faces
/// identified; at least three cubes per axis.
pub fn torus_complex(lo: [f64; 3], hi: [f64; 3], n: [usize; 3]) -> Result<Complex3> {
    if n.iter().any(|&k| k < 3) {
        return Err(Error::BadMesh("periodic grids need three cubes per axis".into()));
    }
    grid_complex(lo, hi, n, true)
}

fn grid_complex(lo: [f64; 3], hi: [f64; 3], n: [usize; 3], periodic: bool) -> Result<Complex3> {
    if n.iter().any(|&k| k == 0) || (0..3).any(|a| !(hi[a] > lo[a])) {
        return Err(Error::BadMesh("empty box".into()));
    }
    let m = if periodic { n } else { [n[0] + 1, n[1] + 1, n[2] + 1] };
    let vid = |i: usize, j: usize, k: usize| ((k % m[2]) * m[1] + j % m[1]) * m[0] + i % m[0];
    let coord = |c: [usize; 3]| {
        let p: Vec<f64> = (0..3).map(|a| lo[a] + (hi[a] - lo[a]) * c[a] as f64 / n[a] as f64).collect();
        Vec4::new(p[0], p[1], p[2], 0.0)
    };
    let mut vertices = Vec::with_capacity(m[0] * m[1] * m[2]);
    for k in 0..m[2] {
        for j in 0..m[1] {
            for i in 0..m[0] {
                vertices.push(coord([i, j, k]));
            }
        }
    }
    let mut tets = Vec::with_capacity(6 * n[0] * n[1] * n[2]);
    let mut points = Vec::with_capacity(6 * n[0] * n[1] * n[2]);
    for k in 0..n[2] {
        for j in 0..n[1] {
            for i in 0..n[0] {
                for p in &PERMS3 {
                    let mut c = [i, j, k];
                    let mut t = [vid(c[0], c[1], c[2]); 4];
                    let mut q = [coord(c); 4];
                    for (s, &a) in p.iter().enumerate() {
                        c[a] += 1;
                        t[s + 1] = vid(c[0], c[1], c[2]);
                        q[s + 1] = coord(c);
                    }
                    tets.push(t);
                    points.push(q);
                }
            }
        }
    }
    let mut cx = Complex3::from_tets(ComplexKind::Box, vertices, tets, points)?;
    cx.periodic = periodic;
    cx.grid = Some((lo, hi, n));
    Ok(cx)
}

/// Radial projection to `S³` of the Freudenthal-triangulated boundary of `[−1,1]⁴`,
/// `m` cubes per edge of each of the eight facets.
pub fn s3_complex(m: usize) -> Result<Complex3> {
    if m == 0 {
        return Err(Error::BadMesh("zero resolution".into()));
    }
    let mut index: HashMap<[usize; 4], usize> = HashMap::new();
    let mut vertices = Vec::new();
    let mut id = |c: [usize; 4], vertices: &mut Vec<Vec4>| {
        *index.entry(c).or_insert_with(|| {
            let v = Vec4::from_fn(|a, _| -1.0 + c[a] as f64 / m as f64);
            vertices.push(v.normalize());
            vertices.len() - 1
        })
    };
    let mut tets = Vec::new();
    for axis in 0..4 {
        let free: Vec<usize> = (0..4).filter(|&a| a != axis).collect();
        for side in [0, 2 * m] {
            for cell in 0..(2 * m).pow(3) {
                let base = [cell % (2 * m), (cell / (2 * m)) % (2 * m), cell / (4 * m * m)];
                for p in &PERMS3 {
                    let mut c = [0usize; 4];
                    c[axis] = side;
                    for (k, &a) in free.iter().enumerate() {
                        c[a] = base[k];
                    }
                    let mut t = [id(c, &mut vertices); 4];
                    for (s, &k) in p.iter().enumerate() {
                        c[free[k]] += 1;
                        t[s + 1] = id(c, &mut vertices);
                    }
                    tets.push(t);
                }
            }
        }
    }
    let points = tets.iter().map(|t: &[usize; 4]| t.map(|i| vertices[i])).collect();
    Complex3::from_tets(ComplexKind::Sphere, vertices, tets, points)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlatNorm {
    pub value: f64,
    /// `M(T − ∂S)` at the optimum.
    pub residual_mass: f64,
    /// `M(S)` at the optimum.
    pub filling_mass: f64,
    /// Optimal 3-chain `S`.
    pub filling: Vec<f64>,
}

/// Largest boundary coefficient relative to the largest chain coefficient.
pub fn cycle_residual(cx: &Complex3, t: &[f64]) -> f64 {
    let scale = t.iter().fold(0.0f64, |m, c| m.max(c.abs())).max(1e-300);
    cx.boundary2(t).iter().fold(0.0f64, |m, c| m.max(c.abs())) / scale
}

/// `min_S M(T − ∂S) + M(S)` as a linear program: `S = s⁺ − s⁻`, `T − ∂S = r⁺ − r⁻`.
pub fn flat_norm_lp(cx: &Complex3, t: &[f64]) -> LinearProgram {
    let mut lp = LinearProgram::new(Sense::Minimize);
    let nt = cx.tets.len();
    for &v in &cx.volumes {
        lp.add_var(v, (0.0, f64::INFINITY));
    }
    for &v in &cx.volumes {
        lp.add_var(v, (0.0, f64::INFINITY));
    }
    let nf = cx.faces.len();
    for &a in &cx.areas {
        lp.add_var(a, (0.0, f64::INFINITY));
    }
    for &a in &cx.areas {
        lp.add_var(a, (0.0, f64::INFINITY));
    }
    let mut rows: Vec<Vec<(usize, f64)>> = (0..nf).map(|f| vec![(2 * nt + f, 1.0), (2 * nt + nf + f, -1.0)]).collect();
    for (k, tf) in cx.tet_faces.iter().enumerate() {
        for &(f, s) in tf {
            rows[f].push((k, s));
            rows[f].push((nt + k, -s));
        }
    }
    for (f, r) in rows.into_iter().enumerate() {
        lp.add_row(r, Cmp::Eq, t[f]);
    }
    lp
}

/// Simplicial flat norm of a 2-cycle on the complex.
pub fn flat_norm(cx: &Complex3, t: &[f64]) -> Result<FlatNorm> {
    if t.len() != cx.faces.len() {
        return Err(Error::InvalidConfig(format!("chain has {} coefficients, complex has {} faces", t.len(), cx.faces.len())));
    }
    let res = cycle_residual(cx, t);
    if res > 1e-9 {
        return Err(Error::NotACycle(res));
    }
    if t.iter().all(|&c| c == 0.0) {
        return Ok(FlatNorm { value: 0.0, residual_mass: 0.0, filling_mass: 0.0, filling: vec![0.0; cx.tets.len()] });
    }
    let sol = flat_norm_lp(cx, t).solve()?;
    let nt = cx.tets.len();
    let filling: Vec<f64> = (0..nt).map(|k| sol.values[k] - sol.values[nt + k]).collect();
    let d = cx.boundary3(&filling);
    let resid: Vec<f64> = t.iter().zip(&d).map(|(a, b)| a - b).collect();
    Ok(FlatNorm { value: sol.objective, residual_mass: cx.mass2(&resid), filling_mass: cx.mass3(&filling), filling })
}

/// Solid angle subtended at the origin by the triangle `(a, b, c)`.
fn solid_angle(a: [f64; 3], b: [f64; 3], c: [f64; 3]) -> f64 {
    let dot = |x: [f64; 3], y: [f64; 3]| x[0] * y[0] + x[1] * y[1] + x[2] * y[2];
    let norm = |x: [f64; 3]| dot(x, x).sqrt();
    let cross = [b[1] * c[2] - b[2] * c[1], b[2] * c[0] - b[0] * c[2], b[0] * c[1] - b[1] * c[0]];
    let num = dot(a, cross);
    let (la, lb, lc) = (norm(a), norm(b), norm(c));
    let den = la * lb * lc + dot(a, b) * lc + dot(a, c) * lb + dot(b, c) * la;
    2.0 * num.atan2(den)
}

/// Closed triangle mesh through the sample nodes; sphere grids are capped at the
/// poles by the centroids of the first and last rings.
pub fn surface_triangles(sample: &ImmersionSample) -> Result<Vec<[Vec4; 3]>> {
    let (n1, n2) = sample.shape;
    let p = |i: usize, j: usize| sample.nodes[i * n2 + j].pos;
    let mut tris = Vec::new();
    let rows = match sample.topology {
        Topology::Torus => n1,
        Topology::Sphere => n1 - 1,
        Topology::Annulus => return Err(Error::OpenTopology),
    };
    for i in 0..rows {
        let i1 = (i + 1) % n1;
        for j in 0..n2 {
            let j1 = (j + 1) % n2;
            tris.push([p(i, j), p(i1, j), p(i1, j1)]);
            tris.push([p(i, j), p(i1, j1), p(i, j1)]);
        }
    }
    if sample.topology == Topology::Sphere {
        let north = (0..n2).map(|j| p(0, j)).sum::<Vec4>() / n2 as f64;
        let south = (0..n2).map(|j| p(n1 - 1, j)).sum::<Vec4>() / n2 as f64;
        for j in 0..n2 {
            let j1 = (j + 1) % n2;
            tris.push([north, p(0, j), p(0, j1)]);
            tris.push([south, p(n1 - 1, j1), p(n1 - 1, j)]);
        }
    }
    Ok(tris)
}

/// Maps points of the complex's ambient space into `ℝ³` for winding numbers: the
/// identity for boxes, stereographic projection from the pole farthest from the
/// surface for `S³`.
fn projector(cx: &Complex3, tris: &[[Vec4; 3]]) -> impl Fn(&Vec4) -> [f64; 3] + Sync {
    let pole = match cx.kind {
        ComplexKind::Box => None,
        ComplexKind::Sphere => {
            let candidates: Vec<Vec4> = (0..256).map(|i| crate::s3::halton_point(i + 1)).collect();
            let score = |c: &Vec4| tris.iter().flatten().map(|x| (x - c).norm()).fold(f64::INFINITY, f64::min);
            let best = candidates.iter().copied().max_by(|a, b| score(a).total_cmp(&score(b))).expect("candidates");
            Some((best, frame_with_first(&best)))
        }
    };
    move |x: &Vec4| match &pole {
        None => [x[0], x[1], x[2]],
        Some((p, f)) => {
            let s = 1.0 - x.dot(p);
            [f.column(1).dot(x) / s, f.column(2).dot(x) / s, f.column(3).dot(x) / s]
        }
    }
}

/// Rounded generalized winding number of the surface about each tetrahedron's barycenter.
pub fn winding_indicator(sample: &ImmersionSample, cx: &Complex3) -> Result<Vec<f64>> {
    let tris = surface_triangles(sample)?;
    let proj = projector(cx, &tris);
    let flat: Vec<[[f64; 3]; 3]> = tris.iter().map(|t| t.map(|v| proj(&v))).collect();
    Ok((0..cx.tets.len())
        .into_par_iter()
        .map(|k| {
            let q = proj(&cx.barycenter(k));
            let w: f64 = flat
                .iter()
                .map(|t| {
                    let s = t.map(|v| [v[0] - q[0], v[1] - q[1], v[2] - q[2]]);
                    solid_angle(s[0], s[1], s[2])
                })
                .sum();
            (w / (4.0 * PI)).round()
        })
        .collect())
}

/// Rasterized 2-cycle `∂χ` of the winding-number indicator `χ`.
pub fn rasterize(sample: &ImmersionSample, cx: &Complex3) -> Result<Vec<f64>> {
    Ok(cx.boundary3(&winding_indicator(sample, cx)?))
}
