//! Jacobi spectra of Area and `A^σ` on scalar normal variations.

use crate::basis::{ScalarBasis, SpherePolyBasis, TrigBasis};
use crate::chart::Topology;
use crate::sample::{ImmersionSample, Node};
use crate::variation::{
    d_area_density, d_f_density, normal_jet, quadratic_densities, FieldJet, ScalarJet,
};
use crate::{Error, Result};
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum EnergyMode {
    AreaOnly,
    ASigma(f64),
}

impl EnergyMode {
    fn sigma2(&self) -> f64 {
        match *self {
            EnergyMode::AreaOnly => 0.0,
            EnergyMode::ASigma(s) => s * s,
        }
    }

    fn uses_f(&self) -> bool {
        matches!(self, EnergyMode::ASigma(s) if *s > 0.0)
    }

    pub fn describe(&self) -> String {
        match *self {
            EnergyMode::AreaOnly => "D2 Area on normal variations".into(),
            EnergyMode::ASigma(s) => format!("D2 (Area + {s:e}^2 F) on normal variations"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JacobiOptions {
    /// Sup-norm threshold on the discrete gradient.
    pub crit_tol: f64,
    /// Eigenvalues below `−index_tol` count towards the index.
    pub index_tol: f64,
}

impl Default for JacobiOptions {
    fn default() -> Self {
        JacobiOptions { crit_tol: 1e-6, index_tol: 1e-8 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralReport {
    pub eigenvalues: Vec<f64>,
    pub morse_index: usize,
    /// Eigenvalues with `|λ| ≤ index_tol`.
    pub nullity: usize,
    pub index_tolerance: f64,
    pub gradient_sup: f64,
    pub grid: (usize, usize),
    pub basis_size: usize,
    pub operator: String,
}

impl SpectralReport {
    pub fn index_at(&self, tol: f64) -> usize {
        self.eigenvalues.iter().filter(|&&l| l < -tol).count()
    }

    pub fn write_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Default Galerkin basis for a closed chart topology.
pub fn default_basis(topology: Topology) -> Result<Box<dyn ScalarBasis>> {
    match topology {
        Topology::Torus => Ok(Box::new(TrigBasis::full(6))),
        Topology::Sphere => Ok(Box::new(SpherePolyBasis::new(6))),
        Topology::Annulus => Err(Error::OpenTopology),
    }
}

fn unit_jet(p: usize) -> ScalarJet {
    let mut s = ScalarJet::default();
    match p {
        0 => s.f = 1.0,
        1 | 2 => s.d[p - 1] = 1.0,
        _ => s.dd[p - 3] = 1.0,
    }
    s
}

fn component(s: &ScalarJet, p: usize) -> f64 {
    match p {
        0 => s.f,
        1 | 2 => s.d[p - 1],
        _ => s.dd[p - 3],
    }
}

/// Per-node gradient vector and quadratic form in the scalar jet coordinates.
fn node_forms(sample: &ImmersionSample, n: &Node, mode: EnergyMode, np: usize) -> (Vec<f64>, Vec<f64>) {
    let amb = sample.ambient;
    let nj = n.normal.as_ref().expect("normal checked");
    let units: Vec<FieldJet> = (0..np).map(|p| normal_jet(nj, &unit_jet(p))).collect();
    let s2 = mode.sigma2();
    let with_f = mode.uses_f();
    let q = |w: &FieldJet| {
        let (a, f) = quadratic_densities(amb, n, w, with_f);
        a + s2 * f
    };
    let mut grad = vec![0.0; np];
    for p in 0..np {
        let mut g = d_area_density(n, &units[p]);
        if with_f {
            g += s2 * d_f_density(amb, n, &units[p]);
        }
        grad[p] = n.weight * g;
    }
    let mut a = vec![0.0; np * np];
    for p in 0..np {
        a[p * np + p] = n.weight * q(&units[p]);
        for r in (p + 1)..np {
            let v = 0.25 * n.weight * (q(&units[p].add(&units[r], 1.0)) - q(&units[p].add(&units[r], -1.0)));
            a[p * np + r] = v;
            a[r * np + p] = v;
        }
    }
    (grad, a)
}

/// Galerkin mass matrix, stiffness (Hessian) matrix and gradient load vector.
pub struct Assembled {
    pub mass: DMatrix<f64>,
    pub hessian: DMatrix<f64>,
    pub gradient: DVector<f64>,
    /// Basis values at nodes (`n_nodes × n_basis`).
    pub values: DMatrix<f64>,
}

/// Assemble the second variation of the chosen energy on `span{ψ_a ν}`.
pub fn assemble(sample: &ImmersionSample, mode: EnergyMode, basis: &dyn ScalarBasis) -> Result<Assembled> {
    if !sample.has_normal() {
        return Err(Error::NoNormal);
    }
    let nb = basis.len();
    let np = if mode.uses_f() { 6 } else { 3 };
    let chunk = 1024;
    let starts: Vec<usize> = (0..sample.nodes.len()).step_by(chunk).collect();
    let parts: Vec<(DMatrix<f64>, DMatrix<f64>, DVector<f64>, DMatrix<f64>)> = starts
        .par_iter()
        .map(|&s0| {
            let nodes = &sample.nodes[s0..(s0 + chunk).min(sample.nodes.len())];
            let m = nodes.len();
            let mut jp: Vec<DMatrix<f64>> = (0..np).map(|_| DMatrix::zeros(m, nb)).collect();
            let mut forms = Vec::with_capacity(m);
            for (r, n) in nodes.iter().enumerate() {
                let b = basis.eval(n.u);
                for (a, sj) in b.iter().enumerate() {
                    for (p, jm) in jp.iter_mut().enumerate() {
                        jm[(r, a)] = component(sj, p);
                    }
                }
                forms.push(node_forms(sample, n, mode, np));
            }
            let mut mass_w = jp[0].clone();
            for (r, n) in nodes.iter().enumerate() {
                let w = n.dvol();
                for a in 0..nb {
                    mass_w[(r, a)] *= w;
                }
            }
            let mass = jp[0].transpose() * &mass_w;
            let mut hess = DMatrix::zeros(nb, nb);
            let mut grad = DVector::zeros(nb);
            for p in 0..np {
                let mut bp = DMatrix::zeros(m, nb);
                for r in 0..m {
                    let (g, a) = &forms[r];
                    for q in 0..np {
                        let c = a[p * np + q];
                        if c != 0.0 {
                            for k in 0..nb {
                                bp[(r, k)] += c * jp[q][(r, k)];
                            }
                        }
                    }
                    for k in 0..nb {
                        grad[k] += g[p] * jp[p][(r, k)];
                    }
                }
                hess += jp[p].transpose() * bp;
            }
            (mass, hess, grad, jp.swap_remove(0))
        })
        .collect();
    let mut mass = DMatrix::zeros(nb, nb);
    let mut hessian = DMatrix::zeros(nb, nb);
    let mut gradient = DVector::zeros(nb);
    let mut blocks = Vec::with_capacity(parts.len());
    for (m, h, g, v) in parts {
        mass += m;
        hessian += h;
        gradient += g;
        blocks.push(v);
    }
    let mut values = DMatrix::zeros(sample.nodes.len(), nb);
    let mut row = 0;
    for b in blocks {
        values.view_mut((row, 0), (b.nrows(), nb)).copy_from(&b);
        row += b.nrows();
    }
    let hessian = 0.5 * (&hessian + hessian.transpose());
    Ok(Assembled { mass, hessian, gradient, values })
}

/// Sup-norm over nodes of the `L²` gradient projected onto the basis.
pub fn gradient_sup(a: &Assembled) -> Result<f64> {
    let chol = a.mass.clone().cholesky().ok_or_else(|| Error::InvalidConfig("basis mass matrix is singular".into()))?;
    let g = chol.solve(&a.gradient);
    Ok((&a.values * g).amax())
}

/// Spectrum of the second variation on scalar normal fields with the default basis.
pub fn jacobi_spectrum(sample: &ImmersionSample, mode: EnergyMode) -> Result<SpectralReport> {
    let basis = default_basis(sample.topology)?;
    jacobi_spectrum_with(sample, mode, basis.as_ref(), &JacobiOptions::default())
}

pub fn jacobi_spectrum_with(
    sample: &ImmersionSample,
    mode: EnergyMode,
    basis: &dyn ScalarBasis,
    opts: &JacobiOptions,
) -> Result<SpectralReport> {
    let a = assemble(sample, mode, basis)?;
    let sup = gradient_sup(&a)?;
    if !(sup <= opts.crit_tol) {
        return Err(Error::NotCritical(sup));
    }
    let eigenvalues = generalized_eigenvalues(&a.hessian, &a.mass)?;
    let tol = opts.index_tol;
    Ok(SpectralReport {
        morse_index: eigenvalues.iter().filter(|&&l| l < -tol).count(),
        nullity: eigenvalues.iter().filter(|&&l| l.abs() <= tol).count(),
        eigenvalues,
        index_tolerance: tol,
        gradient_sup: sup,
        grid: sample.shape,
        basis_size: basis.len(),
        operator: mode.describe(),
    })
}

/// Ascending eigenvalues of `Q x = λ M x` with `M` positive definite.
pub fn generalized_eigenvalues(q: &DMatrix<f64>, m: &DMatrix<f64>) -> Result<Vec<f64>> {
    let chol = m.clone().cholesky().ok_or_else(|| Error::InvalidConfig("mass matrix is not positive definite".into()))?;
    let l = chol.l();
    let y = l.solve_lower_triangular(q).expect("triangular solve");
    let c = l.solve_lower_triangular(&y.transpose()).expect("triangular solve");
    let c = 0.5 * (&c + c.transpose());
    let mut ev: Vec<f64> = SymmetricEigen::new(c).eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(ev)
}
