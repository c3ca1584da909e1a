//! Variation fields and the first and second variations of Area and `F`.
//!
//! Second variations on a round sphere are taken along the projected path
//! `Φ_t = (Φ + t w)/|Φ + t w|`, whose acceleration is `−|w|² Φ`.

use crate::ambient::{AmbientManifold, Mat4, Vec4};
use crate::chart::{sym, Chart, Jet};
use crate::sample::{node_from_jet, ImmersionSample, Node};
use crate::{Error, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Value and parameter derivatives of a vector field along the immersion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldJet {
    pub w: Vec4,
    pub d: [Vec4; 2],
    pub dd: [Vec4; 3],
}

impl FieldJet {
    pub fn zero() -> Self {
        FieldJet { w: Vec4::zeros(), d: [Vec4::zeros(); 2], dd: [Vec4::zeros(); 3] }
    }

    pub fn add(&self, o: &FieldJet, s: f64) -> FieldJet {
        FieldJet {
            w: self.w + s * o.w,
            d: [self.d[0] + s * o.d[0], self.d[1] + s * o.d[1]],
            dd: [self.dd[0] + s * o.dd[0], self.dd[1] + s * o.dd[1], self.dd[2] + s * o.dd[2]],
        }
    }

    pub fn scale(&self, s: f64) -> FieldJet {
        FieldJet::zero().add(self, s)
    }
}

/// Scalar function jet `(f, ∂f, ∂²f)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ScalarJet {
    pub f: f64,
    pub d: [f64; 2],
    pub dd: [f64; 3],
}

impl ScalarJet {
    pub fn constant(c: f64) -> Self {
        ScalarJet { f: c, d: [0.0; 2], dd: [0.0; 3] }
    }
}

/// A vector field along a sampled immersion, one jet per node.
#[derive(Debug, Clone, PartialEq)]
pub struct VariationField {
    pub jets: Vec<FieldJet>,
    /// Whether `dd` carries true second derivatives.
    pub has_second: bool,
}

impl VariationField {
    pub fn combine(&self, other: &VariationField, s: f64) -> VariationField {
        VariationField {
            jets: self.jets.iter().zip(&other.jets).map(|(a, b)| a.add(b, s)).collect(),
            has_second: self.has_second && other.has_second,
        }
    }

    pub fn scale(&self, s: f64) -> VariationField {
        VariationField { jets: self.jets.iter().map(|a| a.scale(s)).collect(), has_second: self.has_second }
    }

    /// Field `v(Φ)` for an ambient vector field `v`.
    pub fn from_ambient(sample: &ImmersionSample, v: &dyn AmbientField) -> Result<VariationField> {
        let jets: Vec<Result<FieldJet>> = sample
            .nodes
            .par_iter()
            .map(|n| {
                let x = n.pos;
                let w = v.value(&x);
                let dv = v.jacobian(&x);
                let d = [dv * n.d[0], dv * n.d[1]];
                let dd = [(0, 0), (0, 1), (1, 1)].map(|(i, j)| v.hessian(&x, &n.d[i], &n.d[j]) + dv * n.dd[sym(i, j)]);
                let ok = w.iter().chain(d.iter().flat_map(|a| a.iter())).chain(dd.iter().flat_map(|a| a.iter())).all(|c| c.is_finite());
                if ok {
                    Ok(FieldJet { w, d, dd })
                } else {
                    Err(Error::NonSmoothField([x[0], x[1], x[2], x[3]]))
                }
            })
            .collect();
        Ok(VariationField { jets: jets.into_iter().collect::<Result<_>>()?, has_second: true })
    }

    /// Normal field `f ν` from scalar jets at each node.
    pub fn normal(sample: &ImmersionSample, f: &[ScalarJet]) -> Result<VariationField> {
        let jets = sample
            .nodes
            .iter()
            .zip(f)
            .map(|(n, s)| n.normal.as_ref().map(|nj| normal_jet(nj, s)).ok_or(Error::NoNormal))
            .collect::<Result<Vec<_>>>()?;
        Ok(VariationField { jets, has_second: true })
    }

    /// Normal field `f(u) ν` for a scalar function given with its derivatives.
    pub fn normal_fn(sample: &ImmersionSample, f: impl Fn([f64; 2]) -> ScalarJet) -> Result<VariationField> {
        let s: Vec<ScalarJet> = sample.nodes.iter().map(|n| f(n.u)).collect();
        Self::normal(sample, &s)
    }

    /// Tangential field `dΦ · X` for a parameter-space vector field `X`.
    ///
    /// Second derivatives need third partials of the chart; these are taken
    /// analytically when available and by central differences otherwise.
    pub fn tangential(sample: &ImmersionSample, chart: &dyn Chart, x: impl Fn([f64; 2]) -> [ScalarJet; 2]) -> VariationField {
        let h = 1e-4;
        let jets = sample
            .nodes
            .iter()
            .map(|n| {
                let xs = x(n.u);
                let third = chart.third(n.u).unwrap_or_else(|| {
                    let at = |k: usize, s: f64| {
                        let mut v = n.u;
                        v[k] += s * h;
                        chart.jet(v).dd
                    };
                    let (p0, m0, p1, m1) = (at(0, 1.0), at(0, -1.0), at(1, 1.0), at(1, -1.0));
                    let c = |p: &[Vec4; 3], m: &[Vec4; 3], k: usize| (p[k] - m[k]) / (2.0 * h);
                    [c(&p0, &m0, 0), c(&p0, &m0, 1), c(&p0, &m0, 2), c(&p1, &m1, 2)]
                });
                let mut fj = FieldJet::zero();
                for a in 0..2 {
                    let xa = &xs[a];
                    fj.w += xa.f * n.d[a];
                    for i in 0..2 {
                        fj.d[i] += xa.d[i] * n.d[a] + xa.f * n.dd[sym(a, i)];
                    }
                    for (k, (i, j)) in [(0, 0), (0, 1), (1, 1)].into_iter().enumerate() {
                        fj.dd[k] += xa.dd[k] * n.d[a]
                            + xa.d[i] * n.dd[sym(a, j)]
                            + xa.d[j] * n.dd[sym(a, i)]
                            + xa.f * third[a + i + j];
                    }
                }
                fj
            })
            .collect();
        VariationField { jets, has_second: true }
    }

    /// Largest tangency residual `|w − π_{TM} w|` relative to `max(1, |w|)`.
    pub fn tangency_residual(&self, sample: &ImmersionSample) -> (usize, f64) {
        let mut worst = (0, 0.0);
        for (k, (n, j)) in sample.nodes.iter().zip(&self.jets).enumerate() {
            let r = (j.w - sample.ambient.project_tangent(&n.pos, &j.w)).norm() / j.w.norm().max(1.0);
            if r > worst.1 {
                worst = (k, r);
            }
        }
        worst
    }

    fn check(&self, sample: &ImmersionSample) -> Result<()> {
        let (node, residual) = self.tangency_residual(sample);
        if residual > 1e-10 {
            return Err(Error::TangencyViolation { node, residual });
        }
        Ok(())
    }
}

/// Jet of `f ν` from the normal jet and the scalar jet.
pub fn normal_jet(nj: &crate::sample::NormalJet, s: &ScalarJet) -> FieldJet {
    let mut fj = FieldJet { w: s.f * nj.nu, d: [Vec4::zeros(); 2], dd: [Vec4::zeros(); 3] };
    for i in 0..2 {
        fj.d[i] = s.d[i] * nj.nu + s.f * nj.d[i];
    }
    for (k, (i, j)) in [(0, 0), (0, 1), (1, 1)].into_iter().enumerate() {
        fj.dd[k] = s.dd[k] * nj.nu + s.d[i] * nj.d[j] + s.d[j] * nj.d[i] + s.f * nj.dd[k];
    }
    fj
}

/// Smooth vector field on a neighborhood of `M` in ℝ⁴.
pub trait AmbientField: Sync {
    fn value(&self, x: &Vec4) -> Vec4;

    fn jacobian(&self, x: &Vec4) -> Mat4 {
        let h = 1e-5;
        let mut m = Mat4::zeros();
        for k in 0..4 {
            let mut e = Vec4::zeros();
            e[k] = h;
            m.set_column(k, &((self.value(&(x + e)) - self.value(&(x - e))) / (2.0 * h)));
        }
        m
    }

    /// `D²v(x)[a, b]`.
    fn hessian(&self, x: &Vec4, a: &Vec4, b: &Vec4) -> Vec4 {
        let h = 1e-4;
        (self.jacobian(&(x + h * b)) - self.jacobian(&(x - h * b))) * a / (2.0 * h)
    }
}

/// `v(x) = c + A x + ½ (xᵀ T_k x)_k`, with each `T_k` symmetric.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticField {
    pub c: Vec4,
    pub a: Mat4,
    pub t: [Mat4; 4],
}

impl QuadraticField {
    pub fn translation(c: Vec4) -> Self {
        QuadraticField { c, a: Mat4::zeros(), t: [Mat4::zeros(); 4] }
    }

    pub fn linear(a: Mat4) -> Self {
        QuadraticField { c: Vec4::zeros(), a, t: [Mat4::zeros(); 4] }
    }

    /// Dilation `v(x) = x`.
    pub fn dilation() -> Self {
        Self::linear(Mat4::identity())
    }

    /// Random field with entries uniform in `[-s, s]`, restricted to the first `q` coordinates.
    pub fn random<R: rand::Rng>(rng: &mut R, q: usize, s: f64) -> Self {
        let mut f = QuadraticField { c: Vec4::zeros(), a: Mat4::zeros(), t: [Mat4::zeros(); 4] };
        for i in 0..q {
            f.c[i] = rng.gen_range(-s..s);
            for j in 0..q {
                f.a[(i, j)] = rng.gen_range(-s..s);
                for k in j..q {
                    let v = rng.gen_range(-s..s);
                    f.t[i][(j, k)] = v;
                    f.t[i][(k, j)] = v;
                }
            }
        }
        f
    }
}

impl AmbientField for QuadraticField {
    fn value(&self, x: &Vec4) -> Vec4 {
        let mut v = self.c + self.a * x;
        for k in 0..4 {
            v[k] += 0.5 * x.dot(&(self.t[k] * x));
        }
        v
    }

    fn jacobian(&self, x: &Vec4) -> Mat4 {
        let mut m = self.a;
        for k in 0..4 {
            let r = self.t[k] * x;
            for j in 0..4 {
                m[(k, j)] += r[j];
            }
        }
        m
    }

    fn hessian(&self, _x: &Vec4, a: &Vec4, b: &Vec4) -> Vec4 {
        Vec4::from_fn(|k, _| a.dot(&(self.t[k] * b)))
    }
}

/// Tangential part `v − (x·v) x` of a field, tangent to the unit sphere on it.
#[derive(Debug, Clone)]
pub struct SphereTangent<F>(pub F);

impl<F: AmbientField> AmbientField for SphereTangent<F> {
    fn value(&self, x: &Vec4) -> Vec4 {
        let v = self.0.value(x);
        v - x.dot(&v) * x
    }

    fn jacobian(&self, x: &Vec4) -> Mat4 {
        let v = self.0.value(x);
        let dv = self.0.jacobian(x);
        let mut m = Mat4::zeros();
        for k in 0..4 {
            let mut e = Vec4::zeros();
            e[k] = 1.0;
            let dk = dv * e;
            m.set_column(k, &(dk - (e.dot(&v) + x.dot(&dk)) * x - x.dot(&v) * e));
        }
        m
    }

    fn hessian(&self, x: &Vec4, a: &Vec4, b: &Vec4) -> Vec4 {
        let v = self.0.value(x);
        let dv = self.0.jacobian(x);
        let (da, db) = (dv * a, dv * b);
        let hab = self.0.hessian(x, a, b);
        hab - (a.dot(&db) + b.dot(&da) + x.dot(&hab)) * x - (a.dot(&v) + x.dot(&da)) * b - (b.dot(&v) + x.dot(&db)) * a
    }
}

#[inline]
fn g2(a: &[f64; 3]) -> [[f64; 2]; 2] {
    [[a[0], a[1]], [a[1], a[2]]]
}

#[inline]
fn mm(a: &[[f64; 2]; 2], b: &[[f64; 2]; 2]) -> [[f64; 2]; 2] {
    let mut c = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    c
}

#[inline]
fn tr(a: &[[f64; 2]; 2], b: &[[f64; 2]; 2]) -> f64 {
    let mut s = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            s += a[i][j] * b[i][j];
        }
    }
    s
}

/// Euclidean second fundamental form `π_n ∂²Φ` in ℝ^Q.
fn ii_euclid(ambient: AmbientManifold, n: &Node) -> [Vec4; 3] {
    [(0, 0), (0, 1), (1, 1)].map(|(i, j)| n.ii[sym(i, j)] + ambient.ambient_second_fundamental_form(&n.pos, &n.d[i], &n.d[j]))
}

/// Energy density shift: `1 + |𝕀_M|² = |𝕀_ℝ|² + c`.
fn density_shift(ambient: AmbientManifold) -> f64 {
    if ambient.is_sphere() {
        -1.0
    } else {
        1.0
    }
}

/// `DArea(w)` density at a node (per unit parameter weight).
pub fn d_area_density(n: &Node, j: &FieldJet) -> f64 {
    let mut s = 0.0;
    for i in 0..2 {
        for k in 0..2 {
            s += n.gi(i, k) * n.d[i].dot(&j.d[k]);
        }
    }
    s * n.sqrt_det
}

/// `DF(w)` density at a node along the linear path, in the assembled tensor form
/// `4e[⟨𝕀, D^g dw⟩ − 2 (g ⊗ dΦ⊗̇_S dw) ⌟ 𝕀⊗̇𝕀] + e² ⟨dΦ; dw⟩`.
pub fn d_f_density(ambient: AmbientManifold, n: &Node, j: &FieldJet) -> f64 {
    let ii = ii_euclid(ambient, n);
    let e = 1.0 + n.ii_norm2;
    let g = g2(&n.ginv);
    let mut dgdw = [Vec4::zeros(); 3];
    for (k, (a, b)) in [(0, 0), (0, 1), (1, 1)].into_iter().enumerate() {
        let h = &n.dd[sym(a, b)];
        let mut v = j.dd[k];
        for r in 0..2 {
            for s in 0..2 {
                v -= g[r][s] * n.d[r].dot(h) * j.d[s];
            }
        }
        dgdw[k] = v;
    }
    let mut s_up = [[0.0; 2]; 2];
    for i in 0..2 {
        for l in 0..2 {
            let mut acc = 0.0;
            for k in 0..2 {
                for m in 0..2 {
                    acc += g[i][k] * g[l][m] * (n.d[k].dot(&j.d[m]) + j.d[k].dot(&n.d[m]));
                }
            }
            s_up[i][l] = 0.5 * acc;
        }
    }
    let mut pair = 0.0;
    let mut contr = 0.0;
    let mut a = 0.0;
    for i in 0..2 {
        for jj in 0..2 {
            a += g[i][jj] * n.d[i].dot(&j.d[jj]);
            for k in 0..2 {
                for l in 0..2 {
                    pair += g[i][k] * g[jj][l] * ii[sym(i, jj)].dot(&dgdw[sym(k, l)]);
                    contr += s_up[i][k] * g[jj][l] * ii[sym(i, jj)].dot(&ii[sym(k, l)]);
                }
            }
        }
    }
    (4.0 * e * (pair - 2.0 * contr) + e * e * a) * n.sqrt_det
}

/// Derivatives of the area and `F` densities along the linear path `Φ + t w`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathDerivatives {
    pub vol1: f64,
    pub vol2: f64,
    /// `d/dt |𝕀_ℝ|²`.
    pub n1: f64,
    pub n2: f64,
    pub f1: f64,
    pub f2: f64,
}

/// Exact first and second `t`-derivatives of `√det g` and `(|𝕀_ℝ|² + c)² √det g`.
pub fn path_derivatives(ambient: AmbientManifold, n: &Node, j: &FieldJet) -> PathDerivatives {
    let p = &n.d;
    let h = &n.dd;
    let (w, k) = (&j.d, &j.dd);
    let g = g2(&n.ginv);
    let mut gam = [[0.0; 2]; 2];
    let mut om = [[0.0; 2]; 2];
    for a in 0..2 {
        for b in 0..2 {
            gam[a][b] = p[a].dot(&w[b]) + w[a].dot(&p[b]);
            om[a][b] = w[a].dot(&w[b]);
        }
    }
    let gg = mm(&mm(&g, &gam), &g);
    let g1 = gg.map(|r| r.map(|x| -x));
    let gog = mm(&mm(&g, &om), &g);
    let ggg = mm(&mm(&gg, &gam), &g);
    let mut g2m = [[0.0; 2]; 2];
    for a in 0..2 {
        for b in 0..2 {
            g2m[a][b] = 2.0 * ggg[a][b] - 2.0 * gog[a][b];
        }
    }
    let mut c0 = [[0.0; 3]; 2];
    let mut c1 = [[0.0; 3]; 2];
    let mut c2 = [[0.0; 3]; 2];
    for r in 0..2 {
        for q in 0..3 {
            c0[r][q] = p[r].dot(&h[q]);
            c1[r][q] = w[r].dot(&h[q]) + p[r].dot(&k[q]);
            c2[r][q] = 2.0 * w[r].dot(&k[q]);
        }
    }
    let mut m0 = [[0.0; 3]; 3];
    let mut m1 = [[0.0; 3]; 3];
    let mut m2 = [[0.0; 3]; 3];
    for q in 0..3 {
        for s in 0..3 {
            let (mut x0, mut x1, mut x2) = (0.0, 0.0, 0.0);
            for r in 0..2 {
                for t in 0..2 {
                    let cc = c0[r][q] * c0[t][s];
                    let cc1 = c1[r][q] * c0[t][s] + c0[r][q] * c1[t][s];
                    let cc2 = c2[r][q] * c0[t][s] + 2.0 * c1[r][q] * c1[t][s] + c0[r][q] * c2[t][s];
                    x0 += g[r][t] * cc;
                    x1 += g1[r][t] * cc + g[r][t] * cc1;
                    x2 += g2m[r][t] * cc + 2.0 * g1[r][t] * cc1 + g[r][t] * cc2;
                }
            }
            m0[q][s] = h[q].dot(&h[s]) - x0;
            m1[q][s] = k[q].dot(&h[s]) + h[q].dot(&k[s]) - x1;
            m2[q][s] = 2.0 * k[q].dot(&k[s]) - x2;
        }
    }
    let (mut nn, mut n1, mut n2) = (0.0, 0.0, 0.0);
    for a in 0..2 {
        for b in 0..2 {
            for c in 0..2 {
                for d in 0..2 {
                    let (q, s) = (sym(a, b), sym(c, d));
                    let p0 = g[a][c] * g[b][d];
                    let p1 = g1[a][c] * g[b][d] + g[a][c] * g1[b][d];
                    let p2 = g2m[a][c] * g[b][d] + 2.0 * g1[a][c] * g1[b][d] + g[a][c] * g2m[b][d];
                    nn += p0 * m0[q][s];
                    n1 += p1 * m0[q][s] + p0 * m1[q][s];
                    n2 += p2 * m0[q][s] + 2.0 * p1 * m1[q][s] + p0 * m2[q][s];
                }
            }
        }
    }
    let vol = n.sqrt_det;
    let a = 0.5 * tr(&g, &gam);
    let a1 = 0.5 * (tr(&g1, &gam) + 2.0 * tr(&g, &om));
    let vol1 = a * vol;
    let vol2 = (a1 + a * a) * vol;
    let e = nn + density_shift(ambient);
    PathDerivatives {
        vol1,
        vol2,
        n1,
        n2,
        f1: 2.0 * e * n1 * vol + e * e * vol1,
        f2: 2.0 * n1 * n1 * vol + 2.0 * e * n2 * vol + 4.0 * e * n1 * vol1 + e * e * vol2,
    }
}

/// Second derivative of the area density along the linear path in the classical form
/// `⟨dw; dw⟩ + ⟨dΦ; dw⟩² − ½ |dΦ⊗̇dw + dw⊗̇dΦ|²`.
pub fn d2_area_linear_density(n: &Node, j: &FieldJet) -> f64 {
    let g = g2(&n.ginv);
    let mut gam = [[0.0; 2]; 2];
    let (mut dwdw, mut a) = (0.0, 0.0);
    for i in 0..2 {
        for k in 0..2 {
            gam[i][k] = n.d[i].dot(&j.d[k]) + j.d[i].dot(&n.d[k]);
            dwdw += g[i][k] * j.d[i].dot(&j.d[k]);
            a += g[i][k] * n.d[i].dot(&j.d[k]);
        }
    }
    let gg = mm(&mm(&g, &gam), &g);
    (dwdw + a * a - 0.5 * tr(&gg, &gam)) * n.sqrt_det
}

/// Acceleration term `−(w₁·w₂) Φ` of the projected path, with its jets.
fn accel_jet(n: &Node, a: &FieldJet, b: &FieldJet) -> FieldJet {
    let s = a.w.dot(&b.w);
    let si = [0, 1].map(|i| a.d[i].dot(&b.w) + a.w.dot(&b.d[i]));
    let mut z = FieldJet { w: -s * n.pos, d: [Vec4::zeros(); 2], dd: [Vec4::zeros(); 3] };
    for i in 0..2 {
        z.d[i] = -si[i] * n.pos - s * n.d[i];
    }
    for (k, (i, j)) in [(0, 0), (0, 1), (1, 1)].into_iter().enumerate() {
        let sij = a.dd[k].dot(&b.w) + a.d[i].dot(&b.d[j]) + a.d[j].dot(&b.d[i]) + a.w.dot(&b.dd[k]);
        z.dd[k] = -sij * n.pos - si[i] * n.d[j] - si[j] * n.d[i] - s * n.dd[k];
    }
    z
}

/// Quadratic densities `D²Area(w,w)` and `D²F(w,w)` along the projected path.
pub fn quadratic_densities(ambient: AmbientManifold, n: &Node, j: &FieldJet, with_f: bool) -> (f64, f64) {
    let mut qa = d2_area_linear_density(n, j);
    let mut qf = if with_f { path_derivatives(ambient, n, j).f2 } else { 0.0 };
    if ambient.is_sphere() {
        let z = accel_jet(n, j, j);
        qa += d_area_density(n, &z);
        if with_f {
            qf += d_f_density(ambient, n, &z);
        }
    }
    (qa, qf)
}

/// Bilinear densities via polarization.
pub fn bilinear_densities(ambient: AmbientManifold, n: &Node, a: &FieldJet, b: &FieldJet, with_f: bool) -> (f64, f64) {
    let p = quadratic_densities(ambient, n, &a.add(b, 1.0), with_f);
    let m = quadratic_densities(ambient, n, &a.add(b, -1.0), with_f);
    (0.25 * (p.0 - m.0), 0.25 * (p.1 - m.1))
}

fn ensure_len(sample: &ImmersionSample, w: &VariationField) -> Result<()> {
    if w.jets.len() != sample.nodes.len() {
        return Err(Error::InvalidConfig(format!(
            "field has {} jets for {} nodes",
            w.jets.len(),
            sample.nodes.len()
        )));
    }
    Ok(())
}

fn sum_nodes(sample: &ImmersionSample, f: impl Fn(usize, &Node) -> f64 + Sync) -> f64 {
    let v: Vec<f64> = sample.nodes.par_iter().enumerate().map(|(k, n)| n.weight * f(k, n)).collect();
    v.iter().sum()
}

/// `DArea(Φ)·w = ∫ ⟨dΦ; dw⟩_g dvol`.
pub fn first_variation_area(sample: &ImmersionSample, w: &VariationField) -> Result<f64> {
    ensure_len(sample, w)?;
    w.check(sample)?;
    Ok(sum_nodes(sample, |k, n| d_area_density(n, &w.jets[k])))
}

/// `D²Area(Φ)(w₁, w₂)`.
pub fn second_variation_area(sample: &ImmersionSample, w1: &VariationField, w2: &VariationField) -> Result<f64> {
    ensure_len(sample, w1)?;
    ensure_len(sample, w2)?;
    w1.check(sample)?;
    w2.check(sample)?;
    let amb = sample.ambient;
    Ok(sum_nodes(sample, |k, n| bilinear_densities(amb, n, &w1.jets[k], &w2.jets[k], false).0))
}

/// `DF(Φ)·w`.
pub fn first_variation_f(sample: &ImmersionSample, w: &VariationField) -> Result<f64> {
    ensure_len(sample, w)?;
    w.check(sample)?;
    if !w.has_second {
        return Err(Error::MissingSecondJets);
    }
    let amb = sample.ambient;
    Ok(sum_nodes(sample, |k, n| d_f_density(amb, n, &w.jets[k])))
}

/// `D²F(Φ)(w₁, w₂)`.
pub fn second_variation_f(sample: &ImmersionSample, w1: &VariationField, w2: &VariationField) -> Result<f64> {
    ensure_len(sample, w1)?;
    ensure_len(sample, w2)?;
    w1.check(sample)?;
    w2.check(sample)?;
    if !w1.has_second || !w2.has_second {
        return Err(Error::MissingSecondJets);
    }
    let amb = sample.ambient;
    Ok(sum_nodes(sample, |k, n| bilinear_densities(amb, n, &w1.jets[k], &w2.jets[k], true).1))
}

/// `DF(Φ)(v(Φ))`.
pub fn first_variation_f_field(sample: &ImmersionSample, v: &dyn AmbientField) -> Result<f64> {
    first_variation_f(sample, &VariationField::from_ambient(sample, v)?)
}

/// `D²F(Φ)(v(Φ), v(Φ))`.
pub fn second_variation_f_field(sample: &ImmersionSample, v: &dyn AmbientField) -> Result<f64> {
    let w = VariationField::from_ambient(sample, v)?;
    second_variation_f(sample, &w, &w)
}

/// Right-hand sides of the magnitude bounds for `DF(v(Φ))` and `D²F(v(Φ),v(Φ))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub df: f64,
    pub d2f: f64,
    pub rhs1: f64,
    pub rhs2: f64,
    pub ratio1: f64,
    pub ratio2: f64,
}

/// Evaluate `|DF|`, `|D²F|` against
/// `∫(1+|𝕀|²)[(1+|𝕀|²)|∂v| + |𝕀||∂²v|]` and `∫(1+|𝕀|²)[(1+|𝕀|²)|∂v|² + |∂²v|²]`.
pub fn bound_check(sample: &ImmersionSample, v: &dyn AmbientField) -> Result<BoundCheck> {
    let w = VariationField::from_ambient(sample, v)?;
    let df = first_variation_f(sample, &w)?;
    let d2f = second_variation_f(sample, &w, &w)?;
    let q = sample.ambient.embedding_dim();
    let terms: Vec<(f64, f64)> = sample
        .nodes
        .par_iter()
        .map(|n| {
            let jac = v.jacobian(&n.pos);
            let mut dv2 = 0.0;
            let mut ddv2 = 0.0;
            for a in 0..q {
                for b in 0..q {
                    dv2 += jac[(a, b)] * jac[(a, b)];
                    let mut ea = Vec4::zeros();
                    let mut eb = Vec4::zeros();
                    ea[a] = 1.0;
                    eb[b] = 1.0;
                    ddv2 += v.hessian(&n.pos, &ea, &eb).norm_squared();
                }
            }
            let e = 1.0 + n.ii_norm2;
            let r1 = e * (e * dv2.sqrt() + n.ii_norm2.sqrt() * ddv2.sqrt());
            let r2 = e * (e * dv2 + ddv2);
            (n.dvol() * r1, n.dvol() * r2)
        })
        .collect();
    let rhs1: f64 = terms.iter().map(|t| t.0).sum();
    let rhs2: f64 = terms.iter().map(|t| t.1).sum();
    Ok(BoundCheck { df, d2f, rhs1, rhs2, ratio1: df.abs() / rhs1, ratio2: d2f.abs() / rhs2 })
}

/// Jet of `x / |x|`.
pub fn normalize_jet(j: &Jet) -> Jet {
    let len = j.pos.norm();
    let y = j.pos / len;
    let ri = [y.dot(&j.d[0]), y.dot(&j.d[1])];
    let yi = [0, 1].map(|i| (j.d[i] - y * ri[i]) / len);
    let dd = [(0, 0), (0, 1), (1, 1)].map(|(i, k)| {
        let xik = j.dd[sym(i, k)];
        let rik = yi[k].dot(&j.d[i]) + y.dot(&xik);
        (xik - yi[k] * ri[i] - y * rik - yi[i] * ri[k]) / len
    });
    Jet { pos: y, d: yi, dd }
}

/// Jet of `DN(x)[v]` for `N(x) = x / |x|`, the derivative of [`normalize_jet`] along `v`.
pub fn normalize_jet_tangent(j: &Jet, v: &FieldJet) -> FieldJet {
    let len = j.pos.norm();
    let y = j.pos / len;
    let dlen = y.dot(&v.w);
    let dy = (v.w - y * dlen) / len;
    let ri = [y.dot(&j.d[0]), y.dot(&j.d[1])];
    let dri = [0, 1].map(|i| dy.dot(&j.d[i]) + y.dot(&v.d[i]));
    let yi = [0, 1].map(|i| (j.d[i] - y * ri[i]) / len);
    let dyi = [0, 1].map(|i| (v.d[i] - dy * ri[i] - y * dri[i]) / len - yi[i] * (dlen / len));
    let dd = [(0, 0), (0, 1), (1, 1)].map(|(i, k)| {
        let xik = j.dd[sym(i, k)];
        let dxik = v.dd[sym(i, k)];
        let rik = yi[k].dot(&j.d[i]) + y.dot(&xik);
        let drik = dyi[k].dot(&j.d[i]) + yi[k].dot(&v.d[i]) + dy.dot(&xik) + y.dot(&dxik);
        let out = (xik - yi[k] * ri[i] - y * rik - yi[i] * ri[k]) / len;
        (dxik - dyi[k] * ri[i] - yi[k] * dri[i] - dy * rik - y * drik - dyi[i] * ri[k] - yi[i] * dri[k]) / len
            - out * (dlen / len)
    });
    FieldJet { w: dy, d: dyi, dd }
}

/// Sample of `projection(Φ + t w)` built from node jets; normals are omitted.
pub fn perturbed_sample(sample: &ImmersionSample, w: &VariationField, t: f64) -> Result<ImmersionSample> {
    let amb = sample.ambient;
    let nodes = sample
        .nodes
        .iter()
        .zip(&w.jets)
        .enumerate()
        .map(|(k, (n, j))| {
            let mut jet = Jet {
                pos: n.pos + t * j.w,
                d: [n.d[0] + t * j.d[0], n.d[1] + t * j.d[1]],
                dd: [n.dd[0] + t * j.dd[0], n.dd[1] + t * j.dd[1], n.dd[2] + t * j.dd[2]],
            };
            if amb.is_sphere() {
                jet = normalize_jet(&jet);
            }
            node_from_jet(amb, k, n.u, n.weight, jet, None)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ImmersionSample { ambient: amb, topology: sample.topology, shape: sample.shape, nodes })
}

/// Worst deviations over a batch of random (chart, field) pairs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VariationSuite {
    pub cases: usize,
    /// Largest relative error of `DA`, `DF` against central differences.
    pub first_error: f64,
    /// Largest relative error of `D²A`, `D²F` against second differences.
    pub second_error: f64,
    /// Largest relative Hessian asymmetry for two independent fields.
    pub asymmetry: f64,
    /// Single constant `C` with `|DF| ≤ C·rhs1` and `|D²F| ≤ C·rhs2` in every case.
    pub bound_constant: f64,
}

fn random_rotation<R: rand::Rng>(rng: &mut R) -> Mat4 {
    let m = Mat4::from_fn(|_, _| rng.gen_range(-1.0..1.0));
    let q = m.qr().q();
    if q.determinant() < 0.0 {
        -q
    } else {
        q
    }
}

/// Random (sample, field) pair cycling through ellipsoids, rotated Clifford tori,
/// Möbius images of `Cl₁` and rotated geodesic spheres.
pub fn random_variation_case<R: rand::Rng>(rng: &mut R, k: usize, grid: (usize, usize)) -> Result<(ImmersionSample, Box<dyn AmbientField>)> {
    use crate::chart::{CliffordChart, EllipsoidChart, GeodesicSphereChart, LinearImage, MobiusChart};
    use crate::sample::sample_immersion;
    let tangent = |rng: &mut R| -> Box<dyn AmbientField> { Box::new(SphereTangent(QuadraticField::random(rng, 4, 0.5))) };
    Ok(match k % 4 {
        0 => {
            let e = EllipsoidChart::new(rng.gen_range(0.7..1.5), rng.gen_range(0.7..1.5), rng.gen_range(0.7..1.5));
            let s = sample_immersion(&e, grid, AmbientManifold::R3)?;
            (s, Box::new(QuadraticField::random(rng, 3, 0.5)))
        }
        1 => {
            let b = rng.gen_range(0.6..1.8);
            let c = LinearImage { inner: CliffordChart::new(b)?, matrix: random_rotation(rng) };
            (sample_immersion(&c, grid, AmbientManifold::S3)?, tangent(rng))
        }
        2 => {
            let a = Vec4::from_fn(|_, _| rng.gen_range(-0.25..0.25));
            let c = MobiusChart { inner: CliffordChart::new(1.0)?, a };
            (sample_immersion(&c, grid, AmbientManifold::S3)?, tangent(rng))
        }
        _ => {
            let r = rng.gen_range(0.6..1.4);
            let c = LinearImage { inner: GeodesicSphereChart::new(r), matrix: random_rotation(rng) };
            (sample_immersion(&c, grid, AmbientManifold::S3)?, tangent(rng))
        }
    })
}

fn rel_error(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

/// Compares analytic variations with finite differences of the perturbed samples.
pub fn variation_suite(seed: u64, cases: usize, grid: (usize, usize)) -> Result<VariationSuite> {
    use crate::energy::{area, energy_f};
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut out = VariationSuite { cases, first_error: 0.0, second_error: 0.0, asymmetry: 0.0, bound_constant: 0.0 };
    for k in 0..cases {
        let (s, v) = random_variation_case(&mut rng, k, grid)?;
        let w = VariationField::from_ambient(&s, v.as_ref())?;
        let ev = |t: f64| -> Result<(f64, f64)> {
            let p = perturbed_sample(&s, &w, t)?;
            Ok((area(&p), energy_f(&p)))
        };
        let h1 = 1e-4;
        let (ap, fp) = ev(h1)?;
        let (am, fm) = ev(-h1)?;
        let da = first_variation_area(&s, &w)?;
        let df = first_variation_f(&s, &w)?;
        out.first_error = out
            .first_error
            .max(rel_error(da, (ap - am) / (2.0 * h1)))
            .max(rel_error(df, (fp - fm) / (2.0 * h1)));
        let h2 = 1e-3;
        let (a0, f0) = ev(0.0)?;
        let (ap, fp) = ev(h2)?;
        let (am, fm) = ev(-h2)?;
        let d2a = second_variation_area(&s, &w, &w)?;
        let d2f = second_variation_f(&s, &w, &w)?;
        out.second_error = out
            .second_error
            .max(rel_error(d2a, (ap - 2.0 * a0 + am) / (h2 * h2)))
            .max(rel_error(d2f, (fp - 2.0 * f0 + fm) / (h2 * h2)));
        let b = bound_check(&s, v.as_ref())?;
        out.bound_constant = out.bound_constant.max(b.ratio1).max(b.ratio2);
        let other: Box<dyn AmbientField> = if s.ambient.is_sphere() {
            Box::new(SphereTangent(QuadraticField::random(&mut rng, 4, 0.5)))
        } else {
            Box::new(QuadraticField::random(&mut rng, 3, 0.5))
        };
        let w2 = VariationField::from_ambient(&s, other.as_ref())?;
        let a12 = second_variation_area(&s, &w, &w2)?;
        let a21 = second_variation_area(&s, &w2, &w)?;
        let f12 = second_variation_f(&s, &w, &w2)?;
        let f21 = second_variation_f(&s, &w2, &w)?;
        out.asymmetry = out
            .asymmetry
            .max((a12 - a21).abs() / a12.abs().max(1.0))
            .max((f12 - f21).abs() / f12.abs().max(1.0));
    }
    Ok(out)
}
