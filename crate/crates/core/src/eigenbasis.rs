//! Clustered eigenspaces of discrete Laplacians.

use crate::laplacian::DiscreteLaplacian;
use crate::{Error, Result};
use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenOptions {
    /// Consecutive eigenvalues closer than `rel_gap · max(|λ|, 1)` share an eigenspace.
    pub rel_gap: f64,
    /// Gaps within a factor `band` of the threshold are ambiguous.
    pub band: f64,
    /// Matrices up to this dimension are diagonalized densely.
    pub dense_limit: usize,
    /// Extra iteration vectors beyond the requested count.
    pub guard: usize,
    pub max_iterations: usize,
    pub residual_tol: f64,
    pub seed: u64,
}

impl Default for EigenOptions {
    fn default() -> Self {
        EigenOptions {
            rel_gap: 1e-6,
            band: 10.0,
            dense_limit: 512,
            guard: 12,
            max_iterations: 2000,
            residual_tol: 1e-10,
            seed: 1,
        }
    }
}

/// One distinct eigenvalue with a mass-orthonormal basis of its eigenspace.
#[derive(Debug, Clone)]
pub struct Level {
    pub lambda: f64,
    pub multiplicity: usize,
    /// `N_k = n₁ + … + n_k`.
    pub cumulative: usize,
    /// Columns form a mass-orthonormal basis of `F_k`.
    pub vectors: DMatrix<f64>,
}

#[derive(Debug, Clone)]
pub struct EigenBasis {
    pub levels: Vec<Level>,
    /// All computed eigenvalues in ascending order.
    pub eigenvalues: Vec<f64>,
    /// Relative gaps between consecutive computed eigenvalues.
    pub gaps: Vec<f64>,
    /// Largest `‖Ku − λMu‖` over the retained eigenvectors.
    pub residual: f64,
    /// Largest `|⟨u_i,u_j⟩_M − δ_ij|` over the retained eigenvectors.
    pub orthonormality: f64,
    pub options: EigenOptions,
}

impl EigenBasis {
    /// `λ_k`, 1-based.
    pub fn lambda(&self, k: usize) -> Result<f64> {
        self.level(k).map(|l| l.lambda)
    }

    pub fn level(&self, k: usize) -> Result<&Level> {
        if k == 0 || k > self.levels.len() {
            return Err(Error::LevelOutOfRange { level: k, available: self.levels.len() });
        }
        Ok(&self.levels[k - 1])
    }

    pub fn multiplicities(&self) -> Vec<usize> {
        self.levels.iter().map(|l| l.multiplicity).collect()
    }
}

/// Lowest `count` eigenpairs of `K u = λ M u`, grouped into eigenspaces.
pub fn eigenbasis(l: &DiscreteLaplacian, count: usize) -> Result<EigenBasis> {
    eigenbasis_with(l, count, &EigenOptions::default())
}

/// Smallest eigenbasis containing at least `levels` complete eigenspaces.
pub fn eigenbasis_levels(l: &DiscreteLaplacian, levels: usize, opts: &EigenOptions) -> Result<EigenBasis> {
    let mut count = (2 * levels).max(8);
    loop {
        let b = eigenbasis_with(l, count.min(l.dim()), opts)?;
        if b.levels.len() >= levels || count >= l.dim() {
            return Ok(b);
        }
        count *= 2;
    }
}

pub fn eigenbasis_with(l: &DiscreteLaplacian, count: usize, opts: &EigenOptions) -> Result<EigenBasis> {
    let n = l.dim();
    if count > n {
        return Err(Error::CountTooLarge { requested: count, dim: n });
    }
    let s: Vec<f64> = l.mass.iter().map(|m| 1.0 / m.sqrt()).collect();
    let (values, vectors) = if n <= opts.dense_limit || count + opts.guard >= n / 2 {
        let mut a = l.dense_stiffness();
        for i in 0..n {
            for j in 0..n {
                a[(i, j)] *= s[i] * s[j];
            }
        }
        let a = 0.5 * (&a + a.transpose());
        sorted_eigen(a)
    } else {
        subspace_iteration(l, &s, (count + opts.guard.max(count)).min(n), count, opts)?
    };
    let computed = values.len();
    let mut u = vectors;
    for i in 0..n {
        for j in 0..u.ncols() {
            u[(i, j)] *= s[i];
        }
    }
    let scale = |x: f64| x.abs().max(1.0);
    let gaps: Vec<f64> = values.windows(2).map(|w| (w[1] - w[0]) / scale(w[0])).collect();
    let mut groups: Vec<(usize, usize)> = Vec::new();
    let mut start = 0;
    for (i, &g) in gaps.iter().enumerate() {
        if g > opts.rel_gap / opts.band && g < opts.rel_gap * opts.band && i < count {
            return Err(Error::ClusterAmbiguity { index: i + 1, gap: g });
        }
        if g >= opts.rel_gap {
            groups.push((start, i + 1));
            start = i + 1;
        }
    }
    let closed = computed == n;
    if closed {
        groups.push((start, computed));
    }
    let mut levels = Vec::new();
    let mut cumulative = 0;
    for (a, b) in groups {
        if a >= count {
            break;
        }
        let m = b - a;
        cumulative += m;
        let lambda = values[a..b].iter().sum::<f64>() / m as f64;
        levels.push(Level { lambda, multiplicity: m, cumulative, vectors: u.columns(a, m).into_owned() });
    }
    let kept = cumulative;
    let mut residual = 0.0f64;
    let mut orthonormality = 0.0f64;
    for i in 0..kept {
        let ui: Vec<f64> = u.column(i).iter().copied().collect();
        let ku = l.apply(&ui);
        let r: f64 = ku.iter().zip(&ui).zip(&l.mass).map(|((k, x), m)| (k - values[i] * m * x).powi(2)).sum();
        residual = residual.max(r.sqrt());
    }
    let mu = {
        let mut mu = u.columns(0, kept).into_owned();
        for i in 0..n {
            for j in 0..kept {
                mu[(i, j)] *= l.mass[i];
            }
        }
        mu
    };
    let gram = u.columns(0, kept).transpose() * mu;
    for i in 0..kept {
        for j in 0..kept {
            let d = if i == j { 1.0 } else { 0.0 };
            orthonormality = orthonormality.max((gram[(i, j)] - d).abs());
        }
    }
    Ok(EigenBasis { levels, eigenvalues: values, gaps, residual, orthonormality, options: *opts })
}

fn sorted_eigen(a: DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let e = SymmetricEigen::new(a);
    let mut order: Vec<usize> = (0..e.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| e.eigenvalues[i].partial_cmp(&e.eigenvalues[j]).unwrap());
    let values = order.iter().map(|&i| e.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(e.eigenvectors.nrows(), order.len(), |r, c| e.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// Lower band Cholesky factor of a symmetric positive-definite band matrix.
struct BandCholesky {
    n: usize,
    w: usize,
    /// `l[i*(w+1) + (i-j)]` holds `L_ij` for `i-w ≤ j ≤ i`.
    l: Vec<f64>,
}

impl BandCholesky {
    fn factor(n: usize, w: usize, entry: impl Fn(usize, usize) -> f64) -> Result<Self> {
        let stride = w + 1;
        let mut l = vec![0.0; n * stride];
        for i in 0..n {
            let j0 = i.saturating_sub(w);
            for j in j0..=i {
                let mut s = entry(i, j);
                let k0 = j0.max(j.saturating_sub(w));
                for k in k0..j {
                    s -= l[i * stride + (i - k)] * l[j * stride + (j - k)];
                }
                if i == j {
                    if !(s > 0.0) {
                        return Err(Error::InvalidConfig("shifted operator is not positive definite".into()));
                    }
                    l[i * stride] = s.sqrt();
                } else {
                    l[i * stride + (i - j)] = s / l[j * stride];
                }
            }
        }
        Ok(BandCholesky { n, w, l })
    }

    fn solve(&self, b: &mut [f64]) {
        let (n, w, s) = (self.n, self.w, self.w + 1);
        for i in 0..n {
            let mut v = b[i];
            for k in i.saturating_sub(w)..i {
                v -= self.l[i * s + (i - k)] * b[k];
            }
            b[i] = v / self.l[i * s];
        }
        for i in (0..n).rev() {
            let mut v = b[i];
            for k in (i + 1)..n.min(i + w + 1) {
                v -= self.l[k * s + (k - i)] * b[k];
            }
            b[i] = v / self.l[i * s];
        }
    }
}

/// Block inverse iteration on `A = M^{-1/2} K M^{-1/2} + shift` with Rayleigh–Ritz.
fn subspace_iteration(
    l: &DiscreteLaplacian,
    s: &[f64],
    block: usize,
    wanted: usize,
    opts: &EigenOptions,
) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let n = l.dim();
    let perm = sprs::linalg::reverse_cuthill_mckee(l.stiffness.view()).perm;
    let old_of_new: Vec<usize> = perm.vec();
    let mut new_of_old = vec![0; n];
    for (new, &old) in old_of_new.iter().enumerate() {
        new_of_old[old] = new;
    }
    let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    let mut width = 0;
    let mut diag_sum = 0.0;
    for (i, row) in l.stiffness.outer_iterator().enumerate() {
        for (j, v) in row.iter() {
            let (a, b) = (new_of_old[i], new_of_old[j]);
            let val = v * s[i] * s[j];
            rows[a].push((b, val));
            width = width.max(a.abs_diff(b));
            if i == j {
                diag_sum += val;
            }
        }
    }
    let shift = 1e-3 * diag_sum / n as f64;
    let mut band = vec![0.0; n * (width + 1)];
    for (a, r) in rows.iter().enumerate() {
        for &(b, v) in r {
            if b <= a {
                band[a * (width + 1) + (a - b)] += v;
            }
        }
        band[a * (width + 1)] += shift;
    }
    let chol = BandCholesky::factor(n, width, |i, j| band[i * (width + 1) + (i - j)])?;
    let apply = |x: &[f64]| -> Vec<f64> { rows.iter().map(|r| r.iter().map(|&(j, v)| v * x[j]).sum()).collect() };

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut x = DMatrix::from_fn(n, block, |_, _| rng.gen_range(-1.0..1.0));
    let mut values = vec![0.0; block];
    for _ in 0..opts.max_iterations {
        let cols: Vec<Vec<f64>> = (0..block)
            .map(|c| {
                let mut v: Vec<f64> = x.column(c).iter().copied().collect();
                chol.solve(&mut v);
                v
            })
            .collect();
        let y = DMatrix::from_fn(n, block, |r, c| cols[c][r]);
        let q = y.qr().q();
        let aq: Vec<Vec<f64>> = (0..block).map(|c| apply(q.column(c).as_slice())).collect();
        let aq = DMatrix::from_fn(n, block, |r, c| aq[c][r]);
        let h = q.transpose() * &aq;
        let h = 0.5 * (&h + h.transpose());
        let (theta, v) = sorted_eigen(h);
        x = &q * &v;
        let ax = &aq * &v;
        values = theta;
        let mut upto = wanted;
        while upto < block - 1 && (values[upto] - values[upto - 1]) / values[upto - 1].abs().max(1.0) < opts.rel_gap * opts.band {
            upto += 1;
        }
        let mut worst = 0.0f64;
        for c in 0..upto {
            let r = ax.column(c) - x.column(c) * values[c];
            worst = worst.max(r.norm() / values[c].abs().max(shift));
        }
        if worst < opts.residual_tol {
            let out = DMatrix::from_fn(n, block, |r, c| x[(new_of_old[r], c)]);
            return Ok((values, out));
        }
    }
    Err(Error::InvalidConfig(format!(
        "subspace iteration did not converge in {} iterations (lowest {:?})",
        opts.max_iterations,
        &values[..3.min(values.len())]
    )))
}
