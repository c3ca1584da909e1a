//! Discrete Dirichlet energies `E(u) = ∫|du|²` on closed curves and surfaces.

use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use sprs::{CsMat, TriMat};
use std::collections::HashMap;
use std::f64::consts::PI;

/// Closed domain to discretize.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Domain {
    /// Circle of length `2π` with `n` equispaced nodes.
    Circle { n: usize },
    /// Flat unit-square torus with an `n × n` grid.
    Torus { n: usize },
    /// Unit icosphere after `subdivisions` midpoint refinements.
    Icosphere { subdivisions: u32 },
    /// Arbitrary closed oriented triangle mesh.
    Mesh { vertices: Vec<[f64; 3]>, faces: Vec<[usize; 3]> },
}

impl Domain {
    pub fn describe(&self) -> String {
        match self {
            Domain::Circle { n } => format!("circle N={n}"),
            Domain::Torus { n } => format!("torus {n}x{n}"),
            Domain::Icosphere { subdivisions } => format!("icosphere subdivision {subdivisions}"),
            Domain::Mesh { vertices, faces } => format!("mesh V={} F={}", vertices.len(), faces.len()),
        }
    }
}

/// Stiffness `K` and lumped mass `M` with `E(u) = uᵀKu` and `‖u‖² = uᵀMu`.
#[derive(Debug, Clone)]
pub struct DiscreteLaplacian {
    pub stiffness: CsMat<f64>,
    pub mass: Vec<f64>,
    pub domain: Domain,
}

impl DiscreteLaplacian {
    pub fn dim(&self) -> usize {
        self.mass.len()
    }

    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; u.len()];
        for (i, row) in self.stiffness.outer_iterator().enumerate() {
            out[i] = row.iter().map(|(j, v)| v * u[j]).sum();
        }
        out
    }

    pub fn energy(&self, u: &[f64]) -> f64 {
        self.apply(u).iter().zip(u).map(|(a, b)| a * b).sum()
    }

    pub fn inner(&self, u: &[f64], v: &[f64]) -> f64 {
        u.iter().zip(v).zip(&self.mass).map(|((a, b), m)| a * b * m).sum()
    }

    pub fn norm(&self, u: &[f64]) -> f64 {
        self.inner(u, u).sqrt()
    }

    /// `E(u)/‖u‖²`.
    pub fn rayleigh(&self, u: &[f64]) -> f64 {
        self.energy(u) / self.inner(u, u)
    }

    /// Largest `|K_ij − K_ji|`.
    pub fn asymmetry(&self) -> f64 {
        let t = self.stiffness.transpose_view().to_csr();
        let mut worst = 0.0f64;
        for (i, row) in self.stiffness.outer_iterator().enumerate() {
            for (j, v) in row.iter() {
                worst = worst.max((v - t.get(i, j).copied().unwrap_or(0.0)).abs());
            }
        }
        worst
    }

    /// Largest absolute row sum of `K`.
    pub fn max_row_sum(&self) -> f64 {
        self.stiffness.outer_iterator().map(|r| r.iter().map(|(_, v)| *v).sum::<f64>().abs()).fold(0.0, f64::max)
    }

    /// Dense copy of `K`.
    pub fn dense_stiffness(&self) -> nalgebra::DMatrix<f64> {
        let n = self.dim();
        let mut d = nalgebra::DMatrix::zeros(n, n);
        for (i, row) in self.stiffness.outer_iterator().enumerate() {
            for (j, v) in row.iter() {
                d[(i, j)] += *v;
            }
        }
        d
    }
}

pub fn build_laplacian(domain: &Domain) -> Result<DiscreteLaplacian> {
    match domain {
        Domain::Circle { n } => circle(*n, domain),
        Domain::Torus { n } => torus(*n, domain),
        Domain::Icosphere { subdivisions } => {
            let (v, f) = icosphere(*subdivisions);
            let mut l = mesh(&v, &f)?;
            l.domain = domain.clone();
            Ok(l)
        }
        Domain::Mesh { vertices, faces } => mesh(vertices, faces),
    }
}

fn circle(n: usize, domain: &Domain) -> Result<DiscreteLaplacian> {
    if n < 16 {
        return Err(Error::BadMesh(format!("circle needs at least 16 nodes, got {n}")));
    }
    let h = 2.0 * PI / n as f64;
    let mut t = TriMat::new((n, n));
    for i in 0..n {
        t.add_triplet(i, i, 2.0 / h);
        t.add_triplet(i, (i + 1) % n, -1.0 / h);
        t.add_triplet(i, (i + n - 1) % n, -1.0 / h);
    }
    Ok(DiscreteLaplacian { stiffness: t.to_csr(), mass: vec![h; n], domain: domain.clone() })
}

fn torus(n: usize, domain: &Domain) -> Result<DiscreteLaplacian> {
    if n < 16 {
        return Err(Error::BadMesh(format!("torus needs at least 16 nodes per side, got {n}")));
    }
    let h = 1.0 / n as f64;
    let idx = |i: usize, j: usize| (i % n) * n + (j % n);
    let mut t = TriMat::new((n * n, n * n));
    for i in 0..n {
        for j in 0..n {
            let k = idx(i, j);
            t.add_triplet(k, k, 4.0);
            for (a, b) in [(i + 1, j), (i + n - 1, j), (i, j + 1), (i, j + n - 1)] {
                t.add_triplet(k, idx(a, b), -1.0);
            }
        }
    }
    Ok(DiscreteLaplacian { stiffness: t.to_csr(), mass: vec![h * h; n * n], domain: domain.clone() })
}

fn sub(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

/// Cotangent stiffness with barycentric lumped mass on a closed triangle mesh.
fn mesh(vertices: &[[f64; 3]], faces: &[[usize; 3]]) -> Result<DiscreteLaplacian> {
    let n = vertices.len();
    if n < 16 {
        return Err(Error::BadMesh(format!("mesh needs at least 16 vertices, got {n}")));
    }
    let mut edges: HashMap<(usize, usize), i32> = HashMap::new();
    let mut t = TriMat::new((n, n));
    let mut mass = vec![0.0; n];
    for (fi, f) in faces.iter().enumerate() {
        if f.iter().any(|&v| v >= n) || f[0] == f[1] || f[1] == f[2] || f[0] == f[2] {
            return Err(Error::BadMesh(format!("face {fi} has invalid vertex indices")));
        }
        let p = [vertices[f[0]], vertices[f[1]], vertices[f[2]]];
        let area2 = {
            let c = cross(&sub(&p[1], &p[0]), &sub(&p[2], &p[0]));
            dot(&c, &c).sqrt()
        };
        if !(area2 > 1e-14) {
            return Err(Error::BadMesh(format!("face {fi} is degenerate")));
        }
        for k in 0..3 {
            mass[f[k]] += area2 / 6.0;
            let (i, j, o) = (f[(k + 1) % 3], f[(k + 2) % 3], k);
            let a = sub(&p[(o + 1) % 3], &p[o]);
            let b = sub(&p[(o + 2) % 3], &p[o]);
            let w = 0.5 * dot(&a, &b) / area2;
            t.add_triplet(i, j, -w);
            t.add_triplet(j, i, -w);
            t.add_triplet(i, i, w);
            t.add_triplet(j, j, w);
            *edges.entry((i.min(j), i.max(j))).or_insert(0) += if i < j { 1 } else { -1 };
        }
    }
    if let Some((e, c)) = edges.iter().find(|(_, &c)| c != 0) {
        return Err(Error::BadMesh(format!("edge {e:?} is not shared by two consistently oriented faces ({c})")));
    }
    let mut count: HashMap<(usize, usize), usize> = HashMap::new();
    for f in faces {
        for k in 0..3 {
            let (i, j) = (f[k], f[(k + 1) % 3]);
            *count.entry((i.min(j), i.max(j))).or_insert(0) += 1;
        }
    }
    if count.values().any(|&c| c != 2) {
        return Err(Error::BadMesh("mesh is not a closed manifold".into()));
    }
    if let Some(v) = mass.iter().position(|&m| m <= 0.0) {
        return Err(Error::BadMesh(format!("vertex {v} belongs to no face")));
    }
    Ok(DiscreteLaplacian {
        stiffness: t.to_csr(),
        mass,
        domain: Domain::Mesh { vertices: vertices.to_vec(), faces: faces.to_vec() },
    })
}

/// Icosahedron refined by midpoint subdivision, vertices on the unit sphere.
pub fn icosphere(subdivisions: u32) -> (Vec<[f64; 3]>, Vec<[usize; 3]>) {
    let g = (1.0 + 5f64.sqrt()) / 2.0;
    let raw = [
        [-1.0, g, 0.0],
        [1.0, g, 0.0],
        [-1.0, -g, 0.0],
        [1.0, -g, 0.0],
        [0.0, -1.0, g],
        [0.0, 1.0, g],
        [0.0, -1.0, -g],
        [0.0, 1.0, -g],
        [g, 0.0, -1.0],
        [g, 0.0, 1.0],
        [-g, 0.0, -1.0],
        [-g, 0.0, 1.0],
    ];
    let unit = |p: [f64; 3]| {
        let r = dot(&p, &p).sqrt();
        [p[0] / r, p[1] / r, p[2] / r]
    };
    let mut v: Vec<[f64; 3]> = raw.iter().map(|&p| unit(p)).collect();
    let mut f: Vec<[usize; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    for _ in 0..subdivisions {
        let mut mid: HashMap<(usize, usize), usize> = HashMap::new();
        let mut next = Vec::with_capacity(f.len() * 4);
        let mut midpoint = |a: usize, b: usize, v: &mut Vec<[f64; 3]>| {
            *mid.entry((a.min(b), a.max(b))).or_insert_with(|| {
                let p = [(v[a][0] + v[b][0]) / 2.0, (v[a][1] + v[b][1]) / 2.0, (v[a][2] + v[b][2]) / 2.0];
                v.push(unit(p));
                v.len() - 1
            })
        };
        for t in &f {
            let a = midpoint(t[0], t[1], &mut v);
            let b = midpoint(t[1], t[2], &mut v);
            let c = midpoint(t[2], t[0], &mut v);
            next.extend([[t[0], a, c], [t[1], b, a], [t[2], c, b], [a, b, c]]);
        }
        f = next;
    }
    (v, f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_domains_rejected() {
        assert!(matches!(build_laplacian(&Domain::Circle { n: 8 }), Err(Error::BadMesh(_))));
        assert!(matches!(build_laplacian(&Domain::Torus { n: 15 }), Err(Error::BadMesh(_))));
        let (v, mut f) = icosphere(1);
        f.pop();
        assert!(matches!(build_laplacian(&Domain::Mesh { vertices: v, faces: f }), Err(Error::BadMesh(_))));
    }

    #[test]
    fn icosphere_counts_and_orientation() {
        let (v, f) = icosphere(4);
        assert_eq!((v.len(), f.len()), (2562, 5120));
        for t in &f {
            let c = cross(&sub(&v[t[1]], &v[t[0]]), &sub(&v[t[2]], &v[t[0]]));
            assert!(dot(&c, &v[t[0]]) > 0.0);
        }
    }

    #[test]
    fn structural_invariants() {
        for d in [Domain::Circle { n: 32 }, Domain::Torus { n: 16 }, Domain::Icosphere { subdivisions: 2 }] {
            let l = build_laplacian(&d).unwrap();
            assert!(l.asymmetry() < 1e-14);
            assert!(l.max_row_sum() < 1e-12);
            assert!(l.mass.iter().all(|&m| m > 0.0));
        }
    }
}
