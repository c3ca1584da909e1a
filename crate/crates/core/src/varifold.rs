//! Oriented varifolds of sampled immersions, the bounded-Lipschitz distance between
//! them, the combined `𝐅`-distance and projection onto catalogs of critical surfaces.

use crate::ambient::{AmbientManifold, Mat4, Vec4};
use crate::chart::{frame_with_first, Chart, CliffordChart, GeodesicSphereChart, LinearImage};
use crate::complex::{flat_norm, rasterize, Complex3, FlatNorm};
use crate::energy::energy_f;
use crate::lp::{Cmp, LinearProgram, Sense};
use crate::sample::{csv_err, fmt, sample_immersion, ImmersionSample};
use crate::spectrum::{assemble, default_basis, gradient_sup, EnergyMode};
use crate::{Error, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::Write;

/// Point mass at a position carrying a unit simple 2-vector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub pos: [f64; 4],
    /// Components on `e01, e02, e03, e12, e13, e23`.
    pub plane: [f64; 6],
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarifoldMeasure {
    pub atoms: Vec<Atom>,
    pub mass: f64,
}

/// `n` atoms with uniform positions in `[-1,1]⁴`, random unit planes and weights in `[0.1, 1)`.
pub fn random_measure<R: rand::Rng>(rng: &mut R, n: usize) -> VarifoldMeasure {
    let atoms: Vec<Atom> = (0..n)
        .map(|_| {
            let a = Vec4::from_fn(|_, _| rng.gen_range(-1.0..1.0));
            let b = Vec4::from_fn(|_, _| rng.gen_range(-1.0..1.0));
            let mut plane = wedge(&a, &b);
            let s = plane.iter().map(|x| x * x).sum::<f64>().sqrt();
            plane.iter_mut().for_each(|x| *x /= s);
            Atom { pos: std::array::from_fn(|_| rng.gen_range(-1.0..1.0)), plane, weight: rng.gen_range(0.1..1.0) }
        })
        .collect();
    let mass = atoms.iter().map(|a| a.weight).sum();
    VarifoldMeasure { atoms, mass }
}

/// `a ∧ b` on the basis `e01, e02, e03, e12, e13, e23`.
pub fn wedge(a: &Vec4, b: &Vec4) -> [f64; 6] {
    let w = |i: usize, j: usize| a[i] * b[j] - a[j] * b[i];
    [w(0, 1), w(0, 2), w(0, 3), w(1, 2), w(1, 3), w(2, 3)]
}

/// Plücker residual `|p01 p23 − p02 p13 + p03 p12|`; zero exactly for simple 2-vectors.
pub fn decomposability_residual(p: &[f64; 6]) -> f64 {
    (p[0] * p[5] - p[1] * p[4] + p[2] * p[3]).abs()
}

/// Angle between unit 2-vectors.
pub fn plane_distance(p: &[f64; 6], q: &[f64; 6]) -> f64 {
    let d: f64 = p.iter().zip(q).map(|(a, b)| a * b).sum();
    d.clamp(-1.0, 1.0).acos()
}

/// Chordal distance of positions plus the plane angle.
pub fn atom_distance(a: &Atom, b: &Atom) -> f64 {
    let d: f64 = a.pos.iter().zip(&b.pos).map(|(x, y)| (x - y) * (x - y)).sum();
    d.sqrt() + plane_distance(&a.plane, &b.plane)
}

/// One atom per node with plane `∂₁Φ ∧ ∂₂Φ / |∂₁Φ ∧ ∂₂Φ|` and weight `w √det g`.
pub fn varifold_of(sample: &ImmersionSample) -> VarifoldMeasure {
    let atoms: Vec<Atom> = sample
        .nodes
        .par_iter()
        .map(|n| {
            let mut plane = wedge(&n.d[0], &n.d[1]);
            let norm = plane.iter().map(|x| x * x).sum::<f64>().sqrt();
            for x in plane.iter_mut() {
                *x /= norm;
            }
            Atom { pos: [n.pos[0], n.pos[1], n.pos[2], n.pos[3]], plane, weight: n.dvol() }
        })
        .collect();
    let mass = atoms.iter().map(|a| a.weight).sum();
    VarifoldMeasure { atoms, mass }
}

impl VarifoldMeasure {
    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn max_decomposability_residual(&self) -> f64 {
        self.atoms.iter().map(|a| decomposability_residual(&a.plane)).fold(0.0, f64::max)
    }

    /// Rows `x0..x3, p01..p23, weight`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["x0", "x1", "x2", "x3", "p01", "p02", "p03", "p12", "p13", "p23", "weight"]).map_err(csv_err)?;
        for a in &self.atoms {
            let row: Vec<String> = a.pos.iter().chain(&a.plane).chain([&a.weight]).map(|&v| fmt(v)).collect();
            w.write_record(&row).map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlOptions {
    /// Neighbors per atom in the constraint graph.
    pub knn: usize,
    /// Up to this many merged atoms every pair is constrained.
    pub exact_limit: usize,
    /// Atom count guard per measure.
    pub max_atoms: usize,
}

impl Default for BlOptions {
    fn default() -> Self {
        BlOptions { knn: 16, exact_limit: 200, max_atoms: 5000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlDistance {
    pub value: f64,
    pub atoms: usize,
    pub constraints: usize,
    /// Whether all pairwise constraints were present.
    pub exact: bool,
}

/// Atoms of both measures merged in a canonical order with signed weights.
fn merged(v1: &VarifoldMeasure, v2: &VarifoldMeasure) -> Vec<Atom> {
    let mut all: Vec<Atom> = v1.atoms.iter().copied().chain(v2.atoms.iter().map(|a| Atom { weight: -a.weight, ..*a })).collect();
    let key = |a: &Atom| a.pos.into_iter().chain(a.plane).collect::<Vec<f64>>();
    all.sort_by(|a, b| {
        key(a).iter().zip(key(b).iter()).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal)
    });
    let mut out: Vec<Atom> = Vec::with_capacity(all.len());
    for a in all {
        match out.last_mut() {
            Some(l) if l.pos == a.pos && l.plane == a.plane => l.weight += a.weight,
            _ => out.push(a),
        }
    }
    out.retain(|a| a.weight != 0.0);
    out
}

/// Constraint edges `(i, j, d_ij)` with `d_ij < 2`. In exact mode an edge implied by a
/// strictly shorter two-step path is dropped.
fn constraint_edges(atoms: &[Atom], opts: &BlOptions) -> (Vec<(usize, usize, f64)>, bool) {
    let n = atoms.len();
    let dist: Vec<Vec<f64>> = (0..n).into_par_iter().map(|i| (0..n).map(|j| atom_distance(&atoms[i], &atoms[j])).collect()).collect();
    if n <= opts.exact_limit {
        let edges: Vec<(usize, usize, f64)> = (0..n)
            .into_par_iter()
            .flat_map_iter(|i| {
                let dist = &dist;
                (i + 1..n).filter_map(move |j| {
                    let d = dist[i][j];
                    if d >= 2.0 || (0..n).any(|k| k != i && k != j && dist[i][k] + dist[k][j] < d - 1e-12) {
                        None
                    } else {
                        Some((i, j, d))
                    }
                })
            })
            .collect();
        (edges, true)
    } else {
        let mut set = std::collections::BTreeSet::new();
        for (i, row) in dist.iter().enumerate() {
            let mut order: Vec<usize> = (0..n).filter(|&j| j != i && row[j] < 2.0).collect();
            order.sort_by(|&a, &b| row[a].total_cmp(&row[b]));
            for &j in order.iter().take(opts.knn) {
                set.insert((i.min(j), i.max(j)));
            }
        }
        (set.into_iter().map(|(i, j)| (i, j, dist[i][j])).collect(), false)
    }
}

/// Dual bounded-Lipschitz program `max Σ c_i φ_i`, `|φ| ≤ 1`, `|φ_i − φ_j| ≤ d_ij` on the graph.
fn bl_program(atoms: &[Atom], edges: &[(usize, usize, f64)], sign: f64) -> LinearProgram {
    let mut lp = LinearProgram::new(Sense::Maximize);
    for a in atoms {
        lp.add_var(sign * a.weight, (-1.0, 1.0));
    }
    for &(i, j, d) in edges {
        lp.add_row(vec![(i, 1.0), (j, -1.0)], Cmp::Le, d);
        lp.add_row(vec![(i, 1.0), (j, -1.0)], Cmp::Ge, -d);
    }
    lp
}

fn guard(v1: &VarifoldMeasure, v2: &VarifoldMeasure, opts: &BlOptions) -> Result<()> {
    for v in [v1, v2] {
        if v.len() > opts.max_atoms {
            return Err(Error::TooManyAtoms(v.len(), opts.max_atoms));
        }
    }
    Ok(())
}

/// The program solved by [`bl_distance`], for external audit.
pub fn bl_lp(v1: &VarifoldMeasure, v2: &VarifoldMeasure, opts: &BlOptions) -> Result<LinearProgram> {
    guard(v1, v2, opts)?;
    let atoms = merged(v1, v2);
    let (edges, _) = constraint_edges(&atoms, opts);
    Ok(bl_program(&atoms, &edges, 1.0))
}

pub fn bl_distance(v1: &VarifoldMeasure, v2: &VarifoldMeasure) -> Result<f64> {
    Ok(bl_distance_with(v1, v2, &BlOptions::default())?.value)
}

/// `sup { ∫φ dV₁ − ∫φ dV₂ : |φ| ≤ 1, Lip φ ≤ 1 }`, maximized over both signs.
pub fn bl_distance_with(v1: &VarifoldMeasure, v2: &VarifoldMeasure, opts: &BlOptions) -> Result<BlDistance> {
    guard(v1, v2, opts)?;
    let atoms = merged(v1, v2);
    if atoms.is_empty() {
        return Ok(BlDistance { value: 0.0, atoms: 0, constraints: 0, exact: true });
    }
    let (edges, exact) = constraint_edges(&atoms, opts);
    let plus = bl_program(&atoms, &edges, 1.0).solve()?.objective;
    let minus = bl_program(&atoms, &edges, -1.0).solve()?.objective;
    Ok(BlDistance { value: plus.max(minus).max(0.0), atoms: atoms.len(), constraints: 2 * edges.len(), exact })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FDistance {
    pub bl: f64,
    pub flat: f64,
    /// `bl + flat`.
    pub total: f64,
    pub area_gap: f64,
    /// `|F(Φ) − F(Ψ)|`, reported beside the distance.
    pub energy_gap: f64,
}

/// Bounded-Lipschitz distance of the varifolds plus the flat norm of the rasterized
/// current difference on the shared complex.
pub fn f_distance(phi: &ImmersionSample, psi: &ImmersionSample, cx: &Complex3) -> Result<FDistance> {
    let (v1, v2) = (varifold_of(phi), varifold_of(psi));
    let bl = bl_distance(&v1, &v2)?;
    let (t1, t2) = (rasterize(phi, cx)?, rasterize(psi, cx)?);
    let diff: Vec<f64> = t1.iter().zip(&t2).map(|(a, b)| a - b).collect();
    let FlatNorm { value: flat, .. } = flat_norm(cx, &diff)?;
    Ok(FDistance {
        bl,
        flat,
        total: bl + flat,
        area_gap: (v1.mass - v2.mass).abs(),
        energy_gap: (energy_f(phi) - energy_f(psi)).abs(),
    })
}

/// Parametric families of minimal surfaces of `S³`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum CriticalCatalog {
    /// Great spheres, indexed by their unit normal in `S³`.
    GeodesicSpheres { grid: (usize, usize) },
    /// Clifford tori, indexed by `(p, q) ∈ S² × S²`, the self-dual and anti-self-dual
    /// parts of the oriented plane `P` with torus `{|x_P| = |x_{P⊥}|}`.
    CliffordTori { grid: (usize, usize) },
}

/// Self-dual and anti-self-dual bases of `Λ²ℝ⁴`, each of norm `√2`.
fn dual_bases() -> ([[f64; 6]; 3], [[f64; 6]; 3]) {
    (
        [[1., 0., 0., 0., 0., 1.], [0., 1., 0., 0., -1., 0.], [0., 0., 1., 1., 0., 0.]],
        [[1., 0., 0., 0., 0., -1.], [0., 1., 0., 0., 1., 0.], [0., 0., 1., -1., 0., 0.]],
    )
}

/// Unit simple 2-vector `(Σ pᵢ sᵢ + Σ qᵢ aᵢ)/2`.
pub fn plane_from_pair(p: &[f64; 3], q: &[f64; 3]) -> [f64; 6] {
    let (s, a) = dual_bases();
    let mut w = [0.0; 6];
    for i in 0..3 {
        for k in 0..6 {
            w[k] += 0.5 * (p[i] * s[i][k] + q[i] * a[i][k]);
        }
    }
    w
}

fn skew(w: &[f64; 6]) -> Mat4 {
    let mut a = Mat4::zeros();
    let idx = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];
    for (k, &(i, j)) in idx.iter().enumerate() {
        a[(i, j)] = w[k];
        a[(j, i)] = -w[k];
    }
    a
}

/// Rotation in `exp(Λ²±)` carrying `(1,0,0)` to `target` on the chosen half of `Λ²ℝ⁴`.
fn half_rotation(basis: &[[f64; 6]; 3], target: &[f64; 3], self_dual: bool) -> Mat4 {
    let e = nalgebra::Vector3::x();
    let t = nalgebra::Vector3::new(target[0], target[1], target[2]);
    let angle = e.dot(&t).clamp(-1.0, 1.0).acos();
    if angle < 1e-15 {
        return Mat4::identity();
    }
    let axis = e.cross(&t);
    let axis = if axis.norm() < 1e-12 { nalgebra::Vector3::z() } else { axis.normalize() };
    let gen = |sign: f64| {
        let mut w = [0.0; 6];
        for i in 0..3 {
            for k in 0..6 {
                w[k] += sign * 0.5 * angle * axis[i] * basis[i][k];
            }
        }
        skew(&w).exp()
    };
    let (s, a) = dual_bases();
    let half = if self_dual { s } else { a };
    let check = |r: &Mat4| {
        let w = wedge(&r.column(0).into_owned(), &r.column(1).into_owned());
        let c: Vec<f64> = half.iter().map(|b| b.iter().zip(&w).map(|(x, y)| x * y).sum::<f64>()).collect();
        (c[0] - t[0]).powi(2) + (c[1] - t[1]).powi(2) + (c[2] - t[2]).powi(2)
    };
    let (plus, minus) = (gen(1.0), gen(-1.0));
    if check(&plus) <= check(&minus) {
        plus
    } else {
        minus
    }
}

/// Rotation of `S³` carrying `Cl₁` to the Clifford torus with parameter `(p, q)`;
/// the identity at `p = q = (1,0,0)`.
pub fn clifford_frame(p: &[f64; 3], q: &[f64; 3]) -> Mat4 {
    let (s, a) = dual_bases();
    half_rotation(&s, p, true) * half_rotation(&a, q, false)
}

fn unit3(v: &[f64]) -> [f64; 3] {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    [v[0] / n, v[1] / n, v[2] / n]
}

impl CriticalCatalog {
    pub fn name(&self) -> &'static str {
        match self {
            CriticalCatalog::GeodesicSpheres { .. } => "geodesic spheres",
            CriticalCatalog::CliffordTori { .. } => "Clifford tori",
        }
    }

    pub fn grid(&self) -> (usize, usize) {
        match *self {
            CriticalCatalog::GeodesicSpheres { grid } | CriticalCatalog::CliffordTori { grid } => grid,
        }
    }

    pub fn param_dim(&self) -> usize {
        match self {
            CriticalCatalog::GeodesicSpheres { .. } => 4,
            CriticalCatalog::CliffordTori { .. } => 6,
        }
    }

    /// Renormalizes a parameter onto `S³` or `S² × S²`.
    pub fn normalize(&self, p: &[f64]) -> Vec<f64> {
        match self {
            CriticalCatalog::GeodesicSpheres { .. } => {
                let n = p.iter().map(|x| x * x).sum::<f64>().sqrt();
                p.iter().map(|x| x / n).collect()
            }
            CriticalCatalog::CliffordTori { .. } => unit3(&p[..3]).into_iter().chain(unit3(&p[3..])).collect(),
        }
    }

    pub fn chart(&self, param: &[f64]) -> Result<Box<dyn Chart + Send>> {
        if param.len() != self.param_dim() {
            return Err(Error::InvalidConfig(format!("{} parameter has {} entries", self.name(), param.len())));
        }
        let p = self.normalize(param);
        Ok(match self {
            CriticalCatalog::GeodesicSpheres { .. } => Box::new(GeodesicSphereChart::great(&Vec4::new(p[0], p[1], p[2], p[3]))),
            CriticalCatalog::CliffordTori { .. } => {
                let matrix = clifford_frame(&[p[0], p[1], p[2]], &[p[3], p[4], p[5]]);
                Box::new(LinearImage { inner: CliffordChart::new(1.0)?, matrix })
            }
        })
    }

    pub fn sample(&self, param: &[f64]) -> Result<ImmersionSample> {
        sample_immersion(self.chart(param)?.as_ref(), self.grid(), AmbientManifold::S3)
    }

    pub fn measure(&self, param: &[f64]) -> Result<VarifoldMeasure> {
        Ok(varifold_of(&self.sample(param)?))
    }

    /// Sup-norm of the area gradient of the element, sampled on at least a `32 × 32` grid.
    pub fn gradient_norm(&self, param: &[f64]) -> Result<f64> {
        let (g1, g2) = self.grid();
        let s = sample_immersion(self.chart(param)?.as_ref(), (g1.max(32), g2.max(32)), AmbientManifold::S3)?;
        let basis = default_basis(s.topology)?;
        gradient_sup(&assemble(&s, EnergyMode::AreaOnly, basis.as_ref())?)
    }

    /// Coarse parameter grid.
    pub fn candidates(&self, count: usize) -> Vec<Vec<f64>> {
        match self {
            CriticalCatalog::GeodesicSpheres { .. } => (1..=count)
                .map(|i| {
                    let h = crate::s3::halton_point(i);
                    vec![h[0], h[1], h[2], h[3]]
                })
                .collect(),
            CriticalCatalog::CliffordTori { .. } => {
                let m = ((count as f64).sqrt().ceil() as usize).max(2);
                let pts = fibonacci_sphere(m);
                pts.iter().flat_map(|p| pts.iter().map(move |q| p.iter().chain(q).copied().collect())).collect()
            }
        }
    }

    /// Parameters read off the second moments of the atom positions: the normal of the
    /// best-fit hyperplane for spheres, the trace-free quadric `xᵀ(2Π − I)x = 0` for
    /// tori. Each sign ambiguity yields one seed.
    pub fn moment_seeds(&self, v: &VarifoldMeasure) -> Vec<Vec<f64>> {
        match self {
            CriticalCatalog::GeodesicSpheres { .. } => {
                let mut m = Mat4::zeros();
                for a in &v.atoms {
                    let x = Vec4::from(a.pos);
                    m += a.weight * x * x.transpose();
                }
                let e = m.symmetric_eigen();
                let k = e.eigenvalues.imin();
                let n: Vec<f64> = e.eigenvectors.column(k).iter().copied().collect();
                vec![n.clone(), n.iter().map(|x| -x).collect()]
            }
            CriticalCatalog::CliffordTori { .. } => {
                let idx = [(0, 0), (1, 1), (2, 2), (3, 3), (0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];
                let mut g = nalgebra::DMatrix::<f64>::zeros(10, 10);
                for a in &v.atoms {
                    let f = nalgebra::DVector::from_iterator(
                        10,
                        idx.iter().map(|&(i, j)| if i == j { a.pos[i] * a.pos[i] } else { 2.0 * a.pos[i] * a.pos[j] }),
                    );
                    g += a.weight * &f * f.transpose();
                }
                let e = g.symmetric_eigen();
                let k = e.eigenvalues.imin();
                let mut q = Mat4::zeros();
                for (c, &(i, j)) in idx.iter().enumerate() {
                    q[(i, j)] = e.eigenvectors[(c, k)];
                    q[(j, i)] = e.eigenvectors[(c, k)];
                }
                let qe = q.symmetric_eigen();
                let mut order: Vec<usize> = (0..4).collect();
                order.sort_by(|&a, &b| qe.eigenvalues[b].total_cmp(&qe.eigenvalues[a]));
                let w = wedge(&qe.eigenvectors.column(order[0]).into_owned(), &qe.eigenvectors.column(order[1]).into_owned());
                let (sd, asd) = dual_bases();
                let dot = |b: &[f64; 6]| b.iter().zip(&w).map(|(x, y)| x * y).sum::<f64>();
                let p: Vec<f64> = sd.iter().map(dot).collect();
                let q: Vec<f64> = asd.iter().map(dot).collect();
                [(1.0, 1.0), (-1.0, -1.0), (1.0, -1.0), (-1.0, 1.0)]
                    .iter()
                    .map(|(a, b)| self.normalize(&p.iter().map(|x| a * x).chain(q.iter().map(|x| b * x)).collect::<Vec<_>>()))
                    .collect()
            }
        }
    }

    /// Orthonormal tangent directions at a parameter.
    fn tangents(&self, p: &[f64]) -> Vec<Vec<f64>> {
        match self {
            CriticalCatalog::GeodesicSpheres { .. } => {
                let f = frame_with_first(&Vec4::new(p[0], p[1], p[2], p[3]));
                (1..4).map(|k| f.column(k).iter().copied().collect()).collect()
            }
            CriticalCatalog::CliffordTori { .. } => {
                let mut out = Vec::new();
                for half in 0..2 {
                    let v = nalgebra::Vector3::new(p[3 * half], p[3 * half + 1], p[3 * half + 2]);
                    let e = if v.x.abs() < 0.9 { nalgebra::Vector3::x() } else { nalgebra::Vector3::y() };
                    let t1 = (e - v * v.dot(&e)).normalize();
                    let t2 = v.cross(&t1);
                    for t in [t1, t2] {
                        let mut d = vec![0.0; 6];
                        for k in 0..3 {
                            d[3 * half + k] = t[k];
                        }
                        out.push(d);
                    }
                }
                out
            }
        }
    }
}

/// Nearly uniform points on `S²`.
pub fn fibonacci_sphere(n: usize) -> Vec<[f64; 3]> {
    let g = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|i| {
            let z = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
            let r = (1.0 - z * z).sqrt();
            let t = g * i as f64;
            [r * t.cos(), r * t.sin(), z]
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProjectionOptions {
    /// Neighborhood radius.
    pub radius: f64,
    pub candidates: usize,
    pub initial_step: f64,
    pub min_step: f64,
    /// Distance at which the search stops early.
    pub exact: f64,
    pub bl: BlOptions,
}

impl Default for ProjectionOptions {
    fn default() -> Self {
        ProjectionOptions { radius: 6.0, candidates: 32, initial_step: 0.2, min_step: 1e-4, exact: 1e-10, bl: BlOptions::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Projection {
    pub param: Vec<f64>,
    pub distance: f64,
    pub evaluations: usize,
}

/// Nearest catalog element in the bounded-Lipschitz distance: coarse grid search plus
/// moment seeds, then pattern search along tangent directions of the parameter manifold.
pub fn project_to_catalog(v: &VarifoldMeasure, catalog: &CriticalCatalog, opts: &ProjectionOptions) -> Result<Projection> {
    let dist = |p: &[f64]| -> Result<f64> { Ok(bl_distance_with(v, &catalog.measure(p)?, &opts.bl)?.value) };
    let mut cands = catalog.moment_seeds(v);
    cands.extend(catalog.candidates(opts.candidates));
    let scores: Vec<f64> = cands.par_iter().map(|c| dist(c)).collect::<Result<_>>()?;
    let mut evaluations = cands.len();
    let (i, _) = scores.iter().enumerate().fold((0, f64::INFINITY), |b, (i, &s)| if s < b.1 { (i, s) } else { b });
    let mut best = cands[i].clone();
    let mut best_d = scores[i];
    let mut step = opts.initial_step;
    while step >= opts.min_step && best_d > opts.exact {
        let trials: Vec<Vec<f64>> = catalog
            .tangents(&best)
            .into_iter()
            .flat_map(|t| [1.0, -1.0].map(|s| catalog.normalize(&best.iter().zip(&t).map(|(p, d)| p + s * step * d).collect::<Vec<_>>())))
            .collect();
        let scores: Vec<f64> = trials.par_iter().map(|c| dist(c)).collect::<Result<_>>()?;
        evaluations += trials.len();
        let (k, d) = scores.iter().enumerate().fold((0, f64::INFINITY), |b, (i, &s)| if s < b.1 { (i, s) } else { b });
        if d < best_d {
            best = trials[k].clone();
            best_d = d;
        } else {
            step /= 2.0;
        }
    }
    if best_d > opts.radius {
        return Err(Error::OutsideNeighborhood { distance: best_d, radius: opts.radius });
    }
    Ok(Projection { param: best, distance: best_d, evaluations })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pair_planes_are_unit_and_simple() {
        assert_eq!(clifford_frame(&[1.0, 0.0, 0.0], &[1.0, 0.0, 0.0]), Mat4::identity());
        for (p, q) in [([1.0, 0.0, 0.0], [0.0, 0.6, 0.8]), ([0.0, 0.0, 1.0], [0.0, 0.0, -1.0]), ([-1.0, 0.0, 0.0], [0.6, -0.8, 0.0])] {
            let w = plane_from_pair(&p, &q);
            assert!((w.iter().map(|x| x * x).sum::<f64>() - 1.0).abs() < 1e-14);
            assert!(decomposability_residual(&w) < 1e-14);
            let f = clifford_frame(&p, &q);
            let back = wedge(&f.column(0).into_owned(), &f.column(1).into_owned());
            assert!(back.iter().zip(&w).all(|(a, b)| (a - b).abs() < 1e-12), "{back:?} {w:?}");
            assert!((f.determinant() - 1.0).abs() < 1e-12);
            assert!((f.transpose() * f - Mat4::identity()).norm() < 1e-12);
        }
    }
}
