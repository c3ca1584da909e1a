//! Explicit sweep families realizing the Rayleigh-quotient hierarchy.
//!
//! At level `k` the family is
//! `u(t, R) = cos(πt_k/2) u_k + sin(πt_k/2)(cos(πt_{k−1}/2) R_{k−1}u_{k−1} + sin(πt_{k−1}/2)(⋯(cos(πt₂/2) R₂u₂ + sin(πt₂/2) u₁)))`
//! with `t ∈ [−1,1]^k` and `R_l ∈ SO(F_l)`. The first parameter `t₁` does not enter the formula.

use crate::degree::{sphere_map_degree, DegreeOptions, DegreeReport};
use crate::eigenbasis::EigenBasis;
use crate::laplacian::DiscreteLaplacian;
use crate::{Error, Result};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::io::Write;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    /// Odd number of `t` samples per active parameter, including `0` and `±1`.
    pub t_points: usize,
    /// Target number of samples of each `SO(F_l)`.
    pub rotation_samples: usize,
    pub seed: u64,
}

impl Default for SweepGrid {
    fn default() -> Self {
        SweepGrid { t_points: 9, rotation_samples: 6, seed: 0 }
    }
}

/// A parameter point: `t` has length `k`, `rotations[l−2]` indexes the sample of `SO(F_l)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub t: Vec<f64>,
    pub rotations: Vec<usize>,
}

/// Samples of `SO(n)`: angle grids for `n ≤ 3`, seeded Haar-random rotations above.
pub fn sample_rotations(n: usize, samples: usize, rng: &mut ChaCha8Rng) -> Vec<DMatrix<f64>> {
    match n {
        0 | 1 => vec![DMatrix::identity(n, n)],
        2 => (0..samples.max(1))
            .map(|j| {
                let a = 2.0 * PI * j as f64 / samples.max(1) as f64;
                DMatrix::from_row_slice(2, 2, &[a.cos(), -a.sin(), a.sin(), a.cos()])
            })
            .collect(),
        3 => {
            let m = ((samples.max(1) as f64).cbrt().round() as usize).max(2);
            let rz = |a: f64| DMatrix::from_row_slice(3, 3, &[a.cos(), -a.sin(), 0.0, a.sin(), a.cos(), 0.0, 0.0, 0.0, 1.0]);
            let ry = |a: f64| DMatrix::from_row_slice(3, 3, &[a.cos(), 0.0, a.sin(), 0.0, 1.0, 0.0, -a.sin(), 0.0, a.cos()]);
            let mut out = Vec::new();
            for i in 0..m {
                for j in 0..m {
                    for l in 0..m {
                        let (a, b, c) = (2.0 * PI * i as f64 / m as f64, PI * j as f64 / (m - 1) as f64, 2.0 * PI * l as f64 / m as f64);
                        out.push(rz(a) * ry(b) * rz(c));
                    }
                }
            }
            out
        }
        _ => (0..samples.max(1)).map(|_| haar_rotation(n, rng)).collect(),
    }
}

/// Haar-distributed element of `SO(n)`.
pub fn haar_rotation(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let g = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    if q.determinant() < 0.0 {
        q.column_mut(0).neg_mut();
    }
    q
}

#[derive(Debug, Clone)]
pub struct LinearSweepFamily {
    pub k: usize,
    pub lambdas: Vec<f64>,
    pub multiplicities: Vec<usize>,
    /// Chosen representative `u_l` per level (first basis vector of `F_l`).
    pub reps: Vec<DVector<f64>>,
    pub spaces: Vec<DMatrix<f64>>,
    /// `rotations[l−2]` samples `SO(F_l)` for `2 ≤ l ≤ k−1`.
    pub rotations: Vec<Vec<DMatrix<f64>>>,
    pub t_grid: Vec<f64>,
    pub grid: SweepGrid,
    pub laplacian: DiscreteLaplacian,
}

pub fn hierarchy_sweep(basis: &EigenBasis, laplacian: &DiscreteLaplacian, k: usize, grid: SweepGrid) -> Result<LinearSweepFamily> {
    if k == 0 || k > basis.levels.len() {
        return Err(Error::LevelOutOfRange { level: k, available: basis.levels.len() });
    }
    if grid.t_points < 3 || grid.t_points % 2 == 0 {
        return Err(Error::InvalidConfig(format!("t_points must be odd and at least 3, got {}", grid.t_points)));
    }
    let levels = &basis.levels[..k];
    let mut rng = ChaCha8Rng::seed_from_u64(grid.seed);
    let rotations = (2..k).map(|l| sample_rotations(levels[l - 1].multiplicity, grid.rotation_samples, &mut rng)).collect();
    let m = grid.t_points;
    Ok(LinearSweepFamily {
        k,
        lambdas: levels.iter().map(|l| l.lambda).collect(),
        multiplicities: levels.iter().map(|l| l.multiplicity).collect(),
        reps: levels.iter().map(|l| l.vectors.column(0).into_owned()).collect(),
        spaces: levels.iter().map(|l| l.vectors.clone()).collect(),
        rotations,
        t_grid: (0..m).map(|i| -1.0 + 2.0 * i as f64 / (m - 1) as f64).collect(),
        grid,
        laplacian: laplacian.clone(),
    })
}

/// Mixed-radix index to digit vector.
fn digits(mut idx: usize, radix: &[usize]) -> Vec<usize> {
    radix
        .iter()
        .map(|&r| {
            let d = idx % r;
            idx /= r;
            d
        })
        .collect()
}

impl LinearSweepFamily {
    /// Number of samples of each rotation factor.
    pub fn rotation_counts(&self) -> Vec<usize> {
        self.rotations.iter().map(|r| r.len()).collect()
    }

    pub fn rotation_combinations(&self) -> usize {
        self.rotation_counts().iter().product()
    }

    /// Columns `[u₁, R₂u₂, …, R_{k−1}u_{k−1}, u_k]`.
    pub fn columns(&self, rotations: &[usize]) -> Vec<DVector<f64>> {
        let mats: Vec<&DMatrix<f64>> = rotations.iter().enumerate().map(|(i, &r)| &self.rotations[i][r]).collect();
        self.columns_with(&mats)
    }

    /// Columns for explicit rotation matrices `R₂, …, R_{k−1}`.
    pub fn columns_with(&self, rotations: &[&DMatrix<f64>]) -> Vec<DVector<f64>> {
        (1..=self.k)
            .map(|l| {
                if l == 1 || l == self.k {
                    self.reps[l - 1].clone()
                } else {
                    &self.spaces[l - 1] * rotations[l - 2].column(0)
                }
            })
            .collect()
    }

    /// Coefficients of `u(t)` on the columns.
    pub fn coefficients(&self, t: &[f64]) -> Vec<f64> {
        let mut c = vec![0.0; self.k];
        let mut carry = 1.0;
        for l in (2..=self.k).rev() {
            let a = PI * t[l - 1] / 2.0;
            c[l - 1] = carry * a.cos();
            carry *= a.sin();
        }
        c[0] = carry;
        c
    }

    /// Evaluate the nested formula.
    pub fn eval(&self, p: &SweepPoint) -> Vec<f64> {
        self.eval_columns(&p.t, &self.columns(&p.rotations))
    }

    pub fn eval_columns(&self, t: &[f64], cols: &[DVector<f64>]) -> Vec<f64> {
        let mut inner = cols[0].clone();
        for l in 2..=self.k {
            let a = PI * t[l - 1] / 2.0;
            inner = &cols[l - 1] * a.cos() + inner * a.sin();
        }
        inner.iter().copied().collect()
    }

    /// Stiffness and mass Gram matrices of the columns plus optional extra vectors.
    pub fn gram(&self, rotations: &[usize], extra: &[DVector<f64>]) -> (DMatrix<f64>, DMatrix<f64>) {
        let mut cols = self.columns(rotations);
        cols.extend(extra.iter().cloned());
        let l = &self.laplacian;
        let kc: Vec<Vec<f64>> = cols.iter().map(|c| l.apply(c.as_slice())).collect();
        let n = cols.len();
        let gk = DMatrix::from_fn(n, n, |i, j| kc[i].iter().zip(cols[j].iter()).map(|(a, b)| a * b).sum());
        let gm = DMatrix::from_fn(n, n, |i, j| l.inner(cols[i].as_slice(), cols[j].as_slice()));
        (0.5 * (&gk + gk.transpose()), 0.5 * (&gm + gm.transpose()))
    }

    /// All `t` points of the grid (`t₁` fixed at `0`).
    pub fn t_points(&self) -> Vec<Vec<f64>> {
        let active = self.k.saturating_sub(1);
        let m = self.t_grid.len();
        let total = m.pow(active as u32);
        (0..total)
            .map(|idx| {
                let d = digits(idx, &vec![m; active]);
                let mut t = vec![0.0];
                t.extend(d.iter().map(|&i| self.t_grid[i]));
                t
            })
            .collect()
    }
}

fn quad(g: &DMatrix<f64>, c: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..c.len() {
        for j in 0..c.len() {
            s += c[i] * g[(i, j)] * c[j];
        }
    }
    s
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WidthReport {
    pub level: usize,
    pub lambda: f64,
    pub mu: f64,
    /// `μ_k − λ_k`.
    pub gap: f64,
    pub multiplicity: usize,
    pub grid: SweepGrid,
    pub argmax: SweepPoint,
    /// Largest `|‖u‖_M − 1|` over the sampled points.
    pub norm_error: f64,
    pub evaluations: usize,
}

/// Maximum of the Rayleigh quotient over the sampled parameter grid.
pub fn minmax_width(family: &LinearSweepFamily) -> WidthReport {
    let counts = family.rotation_counts();
    let combos = family.rotation_combinations();
    let tpts = family.t_points();
    let results: Vec<(f64, usize, f64)> = (0..combos)
        .into_par_iter()
        .map(|r| {
            let rot = digits(r, &counts);
            let (gk, gm) = family.gram(&rot, &[]);
            let mut best = (f64::NEG_INFINITY, 0usize);
            let mut norm_err = 0.0f64;
            for (i, t) in tpts.iter().enumerate() {
                let c = family.coefficients(t);
                let m = quad(&gm, &c);
                norm_err = norm_err.max((m.sqrt() - 1.0).abs());
                let e = quad(&gk, &c) / m;
                if e > best.0 {
                    best = (e, i);
                }
            }
            (best.0, best.1, norm_err)
        })
        .collect();
    let mut best = (f64::NEG_INFINITY, 0, 0);
    let mut norm_error = 0.0f64;
    for (r, &(e, i, ne)) in results.iter().enumerate() {
        norm_error = norm_error.max(ne);
        if e > best.0 {
            best = (e, r, i);
        }
    }
    let lambda = family.lambdas[family.k - 1];
    WidthReport {
        level: family.k,
        lambda,
        mu: best.0,
        gap: best.0 - lambda,
        multiplicity: family.multiplicities[family.k - 1],
        grid: family.grid,
        argmax: SweepPoint { t: tpts[best.2].clone(), rotations: digits(best.1, &counts) },
        norm_error,
        evaluations: combos * tpts.len(),
    }
}

/// Write `(t₁…t_k, rotation indices, Rayleigh quotient)` rows for the first `max_combinations` rotation samples.
pub fn write_family_csv<W: Write>(family: &LinearSweepFamily, out: W, max_combinations: usize) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = (1..=family.k).map(|l| format!("t{l}")).collect();
    header.extend((2..family.k).map(|l| format!("rotation{l}")));
    header.push("rayleigh".into());
    w.write_record(&header).map_err(crate::sample::csv_err)?;
    let counts = family.rotation_counts();
    for r in 0..family.rotation_combinations().min(max_combinations) {
        let rot = digits(r, &counts);
        let (gk, gm) = family.gram(&rot, &[]);
        for t in family.t_points() {
            let c = family.coefficients(&t);
            let mut row: Vec<String> = t.iter().map(|x| crate::sample::fmt(*x)).collect();
            row.extend(rot.iter().map(|x| x.to_string()));
            row.push(crate::sample::fmt(quad(&gk, &c) / quad(&gm, &c)));
            w.write_record(&row).map_err(crate::sample::csv_err)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Random mass-unit vector.
pub fn random_unit(l: &DiscreteLaplacian, rng: &mut ChaCha8Rng) -> DVector<f64> {
    let v: Vec<f64> = (0..l.dim()).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
    let n = l.norm(&v);
    DVector::from_iterator(v.len(), v.into_iter().map(|x| x / n))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerturbationOptions {
    pub trials: usize,
    /// Largest perturbation amplitude.
    pub epsilon: f64,
    /// Reported acceptance tolerance on `λ_k − max`.
    pub tol: f64,
    pub seed: u64,
}

impl Default for PerturbationOptions {
    fn default() -> Self {
        PerturbationOptions { trials: 50, epsilon: 0.3, tol: 1e-6, seed: 17 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialReport {
    pub level: usize,
    pub lambda: f64,
    pub maxima: Vec<f64>,
    /// `λ_k − min(maxima)`; positive means some trial stayed below `λ_k`.
    pub worst_deficit: f64,
    pub tol: f64,
    pub pass: bool,
}

/// Perturbed families `normalize(u(t,R) + ε b(t) ξ)` with `b` vanishing on the boundary of the `t`-box.
pub fn perturbation_trials(family: &LinearSweepFamily, opts: &PerturbationOptions) -> TrialReport {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let counts = family.rotation_counts();
    let plans: Vec<(usize, f64, Vec<f64>, DVector<f64>)> = (0..opts.trials)
        .map(|_| {
            let r = rng.gen_range(0..family.rotation_combinations());
            let eps = opts.epsilon * rng.gen_range(0.05..1.0);
            let wobble: Vec<f64> = (0..family.k).map(|_| rng.gen_range(-0.5..0.5)).collect();
            (r, eps, wobble, random_unit(&family.laplacian, &mut rng))
        })
        .collect();
    let tpts = family.t_points();
    let maxima: Vec<f64> = plans
        .par_iter()
        .map(|(r, eps, wobble, xi)| {
            let rot = digits(*r, &counts);
            let (gk, gm) = family.gram(&rot, std::slice::from_ref(xi));
            let energy = |t: &[f64]| {
                let mut c = family.coefficients(t);
                let mut amp = *eps;
                let mut phase = 1.0;
                for l in 2..=family.k {
                    amp *= 1.0 - t[l - 1] * t[l - 1];
                    phase += wobble[l - 1] * (PI * t[l - 1]).sin();
                }
                if family.k == 1 {
                    amp = *eps;
                }
                c.push(amp * phase);
                quad(&gk, &c) / quad(&gm, &c)
            };
            let mut best = (f64::NEG_INFINITY, 0);
            for (i, t) in tpts.iter().enumerate() {
                let e = energy(t);
                if e > best.0 {
                    best = (e, i);
                }
            }
            let mut t = tpts[best.1].clone();
            let mut value = best.0;
            let h0 = 2.0 / (family.t_grid.len() - 1) as f64;
            for _ in 0..4 {
                for a in 1..family.k {
                    let f = |x: f64| {
                        let mut s = t.clone();
                        s[a] = x;
                        energy(&s)
                    };
                    let (x, v) = golden_max(f, (t[a] - h0).max(-1.0), (t[a] + h0).min(1.0));
                    if v > value {
                        value = v;
                        t[a] = x;
                    }
                }
            }
            value
        })
        .collect();
    let lambda = family.lambdas[family.k - 1];
    let worst = maxima.iter().fold(f64::INFINITY, |a, &b| a.min(b));
    TrialReport {
        level: family.k,
        lambda,
        worst_deficit: lambda - worst,
        pass: worst >= lambda - opts.tol,
        maxima,
        tol: opts.tol,
    }
}

/// Golden-section search for a maximum of a unimodal function on `[a, b]`.
pub fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..80 {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = f(x1);
        }
        if b - a < 1e-13 {
            break;
        }
    }
    if f1 > f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossingReport {
    pub t_cross: f64,
    pub energy_at_crossing: f64,
    pub max_energy: f64,
    pub lambda2: f64,
    pub samples: usize,
    pub tol: f64,
    pub pass: bool,
}

/// Locate `⟨u(t),u₁⟩_M = 0` along a path from `−u₁` to `u₁` and compare the energy there with `λ₂`.
pub fn path_crossing_check(
    laplacian: &DiscreteLaplacian,
    path: &(dyn Fn(f64) -> Vec<f64> + Sync),
    u1: &[f64],
    lambda2: f64,
    samples: usize,
    tol: f64,
) -> Result<CrossingReport> {
    let l = laplacian;
    let dist = |a: &[f64], b: &[f64], s: f64| {
        let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - s * y).collect();
        l.norm(&d)
    };
    let start = path(-1.0);
    let end = path(1.0);
    let (d0, d1) = (dist(&start, u1, -1.0), dist(&end, u1, 1.0));
    if d0 > 1e-8 || d1 > 1e-8 {
        return Err(Error::PathEndpoints(d0, d1));
    }
    let ts: Vec<f64> = (0..samples).map(|i| -1.0 + 2.0 * i as f64 / (samples - 1) as f64).collect();
    let us: Vec<Vec<f64>> = ts.par_iter().map(|&t| path(t)).collect();
    for (u, t) in us.iter().zip(&ts) {
        if (l.norm(u) - 1.0).abs() > 1e-8 {
            return Err(Error::InvalidConfig(format!("path leaves the unit sphere at t = {t}")));
        }
    }
    let jump = us.windows(2).map(|w| dist(&w[0], &w[1], 1.0)).fold(0.0, f64::max);
    if jump > 0.5 {
        return Err(Error::PathDiscontinuous(jump));
    }
    let ip: Vec<f64> = us.iter().map(|u| l.inner(u, u1)).collect();
    let max_energy = us.iter().map(|u| l.rayleigh(u)).fold(f64::NEG_INFINITY, f64::max);
    let i = ip.windows(2).position(|w| w[0] <= 0.0 && w[1] > 0.0 || w[0] < 0.0 && w[1] >= 0.0).ok_or(Error::NoCrossing)?;
    let (mut a, mut b) = (ts[i], ts[i + 1]);
    let g = |t: f64| l.inner(&path(t), u1);
    let mut ga = ip[i];
    if ga == 0.0 {
        b = a;
    }
    for _ in 0..80 {
        if b - a < 1e-15 {
            break;
        }
        let m = 0.5 * (a + b);
        let gm = g(m);
        if (gm <= 0.0) == (ga <= 0.0) {
            a = m;
            ga = gm;
        } else {
            b = m;
        }
    }
    let t_cross = 0.5 * (a + b);
    let e = l.rayleigh(&path(t_cross));
    Ok(CrossingReport {
        t_cross,
        energy_at_crossing: e,
        max_energy: max_energy.max(e),
        lambda2,
        samples,
        tol,
        pass: e >= lambda2 - tol,
    })
}

/// Random Fourier perturbation of the level-2 path `cos(πt/2) u₂ + sin(πt/2) u₁`, renormalized.
pub fn random_admissible_path(
    laplacian: &DiscreteLaplacian,
    u1: &DVector<f64>,
    u2: &DVector<f64>,
    modes: usize,
    amplitude: f64,
    rng: &mut ChaCha8Rng,
) -> impl Fn(f64) -> Vec<f64> + Sync {
    let terms: Vec<(f64, DVector<f64>)> =
        (1..=modes).map(|m| (amplitude * rng.gen_range(-1.0..1.0) / m as f64, random_unit(laplacian, rng))).collect();
    let (u1, u2) = (u1.clone(), u2.clone());
    let mass = laplacian.mass.clone();
    move |t: f64| {
        let a = PI * t / 2.0;
        let mut v = &u2 * a.cos() + &u1 * a.sin();
        for (m, (c, xi)) in terms.iter().enumerate() {
            v += xi * (c * ((m + 1) as f64 * PI * (t + 1.0) / 2.0).sin());
        }
        let n = v.iter().zip(&mass).map(|(x, m)| x * x * m).sum::<f64>().sqrt();
        v.iter().map(|x| x / n).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HierarchyReport {
    pub domain: String,
    pub widths: Vec<WidthReport>,
    pub trials: Vec<TrialReport>,
    /// `μ₁ < μ₂ < …`.
    pub strictly_increasing: bool,
    pub max_gap: f64,
    /// Relative gaps between computed eigenvalues, for cluster diagnostics.
    pub cluster_gaps: Vec<f64>,
}

/// Widths and perturbation trials for levels `1..=levels`.
pub fn hierarchy_report(
    basis: &EigenBasis,
    laplacian: &DiscreteLaplacian,
    levels: usize,
    grid: SweepGrid,
    trials: &PerturbationOptions,
) -> Result<HierarchyReport> {
    let mut widths = Vec::new();
    let mut reports = Vec::new();
    for k in 1..=levels {
        let fam = hierarchy_sweep(basis, laplacian, k, grid)?;
        widths.push(minmax_width(&fam));
        reports.push(perturbation_trials(&fam, &PerturbationOptions { seed: trials.seed.wrapping_add(k as u64), ..*trials }));
    }
    let strictly_increasing = widths.windows(2).all(|w| w[0].mu < w[1].mu);
    let max_gap = widths.iter().map(|w| w.gap.abs()).fold(0.0, f64::max);
    Ok(HierarchyReport {
        domain: laplacian.domain.describe(),
        widths,
        trials: reports,
        strictly_increasing,
        max_gap,
        cluster_gaps: basis.gaps.iter().take(4 * levels).copied().collect(),
    })
}

/// Rotation in `SO(n)` whose first column is the unit vector `x`.
pub fn rotation_with_first(x: &DVector<f64>) -> DMatrix<f64> {
    let n = x.len();
    let mut e1 = DVector::zeros(n);
    e1[0] = 1.0;
    let v = &e1 - x;
    let mut h = if v.norm() < 1e-14 {
        DMatrix::identity(n, n)
    } else {
        DMatrix::identity(n, n) - (&v * v.transpose()) * (2.0 / v.norm_squared())
    };
    if h.determinant() < 0.0 && n > 1 {
        h.column_mut(n - 1).neg_mut();
    }
    h
}

/// Degree of the boundary map `S^{n_{k−1}−1} → 𝒞_{k−1}`, `x ↦ u(t_{k−1}=0, t_k=1, R_{k−1}x)`,
/// read in the coordinates of the mass-orthonormal basis of `F_{k−1}`.
pub fn boundary_degree(family: &LinearSweepFamily, opts: &DegreeOptions) -> Result<DegreeReport> {
    let k = family.k;
    if k < 3 {
        return Err(Error::LevelOutOfRange { level: k, available: family.k });
    }
    let l = k - 1;
    let n = family.multiplicities[l - 1];
    if !(2..=4).contains(&n) {
        return Err(Error::InvalidConfig(format!("boundary sphere S^{} is outside the supported dimensions", n - 1)));
    }
    let mut t = vec![0.0; k];
    t[k - 1] = 1.0;
    let base: Vec<DMatrix<f64>> = family.rotations.iter().map(|r| r[0].clone()).collect();
    let space = &family.spaces[l - 1];
    let lap = &family.laplacian;
    let map = |x: &[f64]| -> Vec<f64> {
        let r = rotation_with_first(&DVector::from_column_slice(x));
        let mut mats: Vec<&DMatrix<f64>> = base.iter().collect();
        mats[l - 2] = &r;
        let u = family.eval_columns(&t, &family.columns_with(&mats));
        (0..n).map(|j| lap.inner(space.column(j).as_slice(), &u)).collect()
    };
    sphere_map_degree(&map, n - 1, opts)
}
