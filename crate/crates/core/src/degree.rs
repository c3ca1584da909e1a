//! Brouwer degree of sampled maps into `Sⁿ` by signed preimage counts.
//!
//! A domain simplex contributes when the target lies in the open positive cone of its
//! image vertices; the sign is the image orientation times the domain orientation.

use crate::{Error, Result};
use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DegreeOptions {
    /// Subdivisions per side of each cube face or box axis.
    pub resolution: usize,
    /// Largest geodesic jump allowed along a domain edge.
    pub continuity: f64,
    pub attempts: usize,
    pub seed: u64,
}

impl Default for DegreeOptions {
    fn default() -> Self {
        DegreeOptions { resolution: 16, continuity: FRAC_PI_4, attempts: 5, seed: 3 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegreeReport {
    pub degree: i64,
    pub target: Vec<f64>,
    /// Targets tried, including the successful one.
    pub attempts: usize,
    pub simplices: usize,
    /// Preimage count before cancellation.
    pub preimages: usize,
}

/// Simplex given by vertex indices into a list of image points, with domain orientation.
struct Simplex {
    vertices: Vec<usize>,
    sign: f64,
}

fn normalize(v: &mut [f64]) {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    for x in v.iter_mut() {
        *x /= n;
    }
}

fn geodesic(a: &[f64], b: &[f64]) -> f64 {
    let d: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    d.clamp(-1.0, 1.0).acos()
}

/// Permutations of `0..d` with their signs.
fn permutations(d: usize) -> Vec<(Vec<usize>, f64)> {
    if d == 0 {
        return vec![(vec![], 1.0)];
    }
    let mut out = Vec::new();
    for (p, s) in permutations(d - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, d - 1);
            let sign = if (p.len() - pos) % 2 == 0 { s } else { -s };
            out.push((q, sign));
        }
    }
    out
}

/// Kuhn triangulation of `{0..=m}^d`: for each cell and permutation, the simplex
/// `v₀ = cell, v_{i+1} = v_i + e_{π(i)}`.
fn kuhn(d: usize, m: usize) -> Vec<(Vec<Vec<usize>>, f64)> {
    let perms = permutations(d);
    let cells = m.pow(d as u32);
    let mut out = Vec::with_capacity(cells * perms.len());
    for c in 0..cells {
        let mut base = vec![0; d];
        let mut r = c;
        for b in base.iter_mut() {
            *b = r % m;
            r /= m;
        }
        for (p, s) in &perms {
            let mut v = base.clone();
            let mut verts = vec![v.clone()];
            for &axis in p {
                v[axis] += 1;
                verts.push(v.clone());
            }
            out.push((verts, *s));
        }
    }
    out
}

fn count(images: &[Vec<f64>], simplices: &[Simplex], opts: &DegreeOptions, dim: usize) -> Result<DegreeReport> {
    for s in simplices {
        for (i, &a) in s.vertices.iter().enumerate() {
            for &b in &s.vertices[i + 1..] {
                let g = geodesic(&images[a], &images[b]);
                if g > opts.continuity {
                    return Err(Error::NotContinuous(g));
                }
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    for attempt in 1..=opts.attempts {
        let mut p: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect();
        normalize(&mut p);
        let pv = DVector::from_column_slice(&p);
        let hits: Vec<Option<f64>> = simplices
            .par_iter()
            .map(|s| {
                let y = DMatrix::from_fn(dim, dim, |r, c| images[s.vertices[c]][r]);
                if s.vertices.iter().all(|&v| images[v].iter().zip(&p).map(|(a, b)| a * b).sum::<f64>() <= 0.0) {
                    return Some(0.0);
                }
                let det = y.determinant();
                if det.abs() < 1e-12 {
                    return Some(0.0);
                }
                let c = match y.lu().solve(&pv) {
                    Some(c) => c,
                    None => return None,
                };
                let scale = c.amax().max(1e-300);
                if c.iter().all(|&x| x > 1e-10 * scale) {
                    Some(det.signum() * s.sign)
                } else if c.iter().all(|&x| x > -1e-10 * scale) {
                    None
                } else {
                    Some(0.0)
                }
            })
            .collect();
        if hits.iter().any(|h| h.is_none()) {
            continue;
        }
        let signs: Vec<f64> = hits.into_iter().flatten().collect();
        let degree = signs.iter().sum::<f64>().round() as i64;
        let preimages = signs.iter().filter(|&&s| s != 0.0).count();
        return Ok(DegreeReport { degree, target: p, attempts: attempt, simplices: simplices.len(), preimages });
    }
    Err(Error::NotRegularValue(opts.attempts))
}

/// Degree of `f : Sⁿ → Sⁿ` for `n ∈ {1,2,3}`, sampled on the radial projection of a
/// triangulated `∂[−1,1]^{n+1}`.
pub fn sphere_map_degree(f: &(dyn Fn(&[f64]) -> Vec<f64> + Sync), n: usize, opts: &DegreeOptions) -> Result<DegreeReport> {
    if !(1..=3).contains(&n) {
        return Err(Error::InvalidConfig(format!("sphere dimension must be 1, 2 or 3, got {n}")));
    }
    let dim = n + 1;
    let m = opts.resolution.max(1);
    let mut points: Vec<Vec<f64>> = Vec::new();
    let mut simplices = Vec::new();
    let face = kuhn(n, m);
    for axis in 0..dim {
        for side in [-1.0, 1.0] {
            let offset = points.len();
            let grid = (m + 1).pow(n as u32);
            for g in 0..grid {
                let mut r = g;
                let mut x = vec![0.0; dim];
                let mut free = (0..dim).filter(|&a| a != axis);
                for _ in 0..n {
                    let a = free.next().unwrap();
                    x[a] = -1.0 + 2.0 * (r % (m + 1)) as f64 / m as f64;
                    r /= m + 1;
                }
                x[axis] = side;
                points.push(x);
            }
            for (verts, _) in &face {
                let ids: Vec<usize> = verts
                    .iter()
                    .map(|v| offset + v.iter().rev().fold(0, |acc, &i| acc * (m + 1) + i))
                    .collect();
                let x = DMatrix::from_fn(dim, dim, |r, c| points[ids[c]][r]);
                simplices.push(Simplex { vertices: ids, sign: x.determinant().signum() });
            }
        }
    }
    let images: Vec<Vec<f64>> = points
        .par_iter()
        .map(|x| {
            let mut u = x.clone();
            normalize(&mut u);
            let mut y = f(&u);
            normalize(&mut y);
            y
        })
        .collect();
    count(&images, &simplices, opts, dim)
}

/// Degree of a map from the box `∏[lo_i, hi_i] ⊂ ℝⁿ` to `Sⁿ` that factors through a
/// closed oriented quotient of the box (boundary faces identified or collapsed),
/// with the box orientation of increasing coordinates.
pub fn box_map_degree(
    f: &(dyn Fn(&[f64]) -> Vec<f64> + Sync),
    lo: &[f64],
    hi: &[f64],
    opts: &DegreeOptions,
) -> Result<DegreeReport> {
    let n = lo.len();
    if n == 0 || hi.len() != n {
        return Err(Error::InvalidConfig("box bounds must have equal positive length".into()));
    }
    let m = opts.resolution.max(1);
    let grid = (m + 1).pow(n as u32);
    let points: Vec<Vec<f64>> = (0..grid)
        .map(|g| {
            let mut r = g;
            (0..n)
                .map(|a| {
                    let i = r % (m + 1);
                    r /= m + 1;
                    lo[a] + (hi[a] - lo[a]) * i as f64 / m as f64
                })
                .collect()
        })
        .collect();
    let orient: f64 = lo.iter().zip(hi).map(|(a, b)| (b - a).signum()).product();
    let simplices: Vec<Simplex> = kuhn(n, m)
        .into_iter()
        .map(|(verts, s)| Simplex {
            vertices: verts.iter().map(|v| v.iter().rev().fold(0, |acc, &i| acc * (m + 1) + i)).collect(),
            sign: s * orient,
        })
        .collect();
    let images: Vec<Vec<f64>> = points
        .par_iter()
        .map(|x| {
            let mut y = f(x);
            normalize(&mut y);
            y
        })
        .collect();
    count(&images, &simplices, opts, n + 1)
}
