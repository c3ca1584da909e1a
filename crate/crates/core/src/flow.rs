//! Cut-off pseudo-gradient descent of `A^σ` on normal graphs, entropy monitoring,
//! σ-continuation of sweep widths and the index semicontinuity experiment.
//!
//! A state is a coefficient vector `c` for a normal graph
//! `Φ_c = P(Φ₀ + (Σ c_a ψ_a) ν₀)` over a fixed base chart, where `P` is the
//! nearest-point projection onto the ambient manifold.

use crate::ambient::AmbientManifold;
use crate::basis::{ScalarBasis, SpherePolyBasis, TrigBasis};
use crate::chart::{Chart, CliffordChart, GeodesicSphereChart, Jet, Topology};
use crate::energy::{energies, Energies};
use crate::quadrature::RuleKind;
use crate::s3::SweepOut1D;
use crate::sample::{csv_err, csv_writer, fmt, node_from_jet, normal_jet_at, sample_immersion, ImmersionSample};
use crate::spectrum::{default_basis, jacobi_spectrum_with, EnergyMode, JacobiOptions};
use crate::variation::{
    d_area_density, d_f_density, first_variation_area, first_variation_f, normal_jet, normalize_jet,
    normalize_jet_tangent, FieldJet, ScalarJet, VariationField,
};
use crate::{Error, Result};
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::io::Write;

/// Sufficient-decrease constant of the line search.
pub const ARMIJO: f64 = 0.25;
/// Smallest admissible line-search step.
pub const MIN_STEP: f64 = 1e-14;
/// Relative tolerance of the pseudo-gradient contract.
pub const CONTRACT_TOL: f64 = 1e-10;
/// Threshold on `last/first` of the entropy sequence.
pub const ENTROPY_THRESHOLD: f64 = 1e-3;

/// Normal graphs over a fixed base chart with coefficients in a scalar basis.
pub struct GraphSpace {
    pub ambient: AmbientManifold,
    pub grid: (usize, usize),
    base: Box<dyn Chart + Send>,
    basis: Box<dyn ScalarBasis + Send>,
    sample: ImmersionSample,
    psi: Vec<Vec<ScalarJet>>,
}

impl std::fmt::Debug for GraphSpace {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GraphSpace")
            .field("ambient", &self.ambient)
            .field("grid", &self.grid)
            .field("dim", &self.dim())
            .finish()
    }
}

impl GraphSpace {
    pub fn new(
        base: Box<dyn Chart + Send>,
        basis: Box<dyn ScalarBasis + Send>,
        ambient: AmbientManifold,
        grid: (usize, usize),
    ) -> Result<Self> {
        let sample = sample_immersion(base.as_ref(), grid, ambient)?;
        if !sample.has_normal() {
            return Err(Error::NoNormal);
        }
        let psi = sample.nodes.iter().map(|n| basis.eval(n.u)).collect();
        Ok(GraphSpace { ambient, grid, base, basis, sample, psi })
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn topology(&self) -> Topology {
        self.sample.topology
    }

    pub fn base_sample(&self) -> &ImmersionSample {
        &self.sample
    }

    fn check(&self, c: &[f64]) -> Result<()> {
        if c.len() != self.dim() {
            return Err(Error::InvalidConfig(format!("expected {} coefficients, got {}", self.dim(), c.len())));
        }
        if c.iter().any(|x| !x.is_finite()) {
            return Err(Error::NaNGradient);
        }
        Ok(())
    }

    /// Jet of `Φ₀ + f ν₀` at node `k` before projection.
    fn raw_jet(&self, k: usize, c: &[f64]) -> Jet {
        let n = &self.sample.nodes[k];
        let f = combine(&self.psi[k], c);
        let w = normal_jet(n.normal.as_ref().expect("normal checked"), &f);
        Jet {
            pos: n.pos + w.w,
            d: [n.d[0] + w.d[0], n.d[1] + w.d[1]],
            dd: [n.dd[0] + w.dd[0], n.dd[1] + w.dd[1], n.dd[2] + w.dd[2]],
        }
    }

    fn project(&self, raw: &Jet) -> Jet {
        if self.ambient.is_sphere() {
            normalize_jet(raw)
        } else {
            *raw
        }
    }

    fn build(&self, raw: &[Jet]) -> Result<ImmersionSample> {
        let nodes = raw
            .par_iter()
            .enumerate()
            .map(|(k, j)| {
                let n = &self.sample.nodes[k];
                node_from_jet(self.ambient, k, n.u, n.weight, self.project(j), None)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ImmersionSample { ambient: self.ambient, topology: self.sample.topology, shape: self.sample.shape, nodes })
    }

    /// Quadrature sample of `Φ_c` on the flow grid; normals are omitted.
    pub fn surface(&self, c: &[f64]) -> Result<ImmersionSample> {
        self.check(c)?;
        let raw: Vec<Jet> = (0..self.sample.nodes.len()).into_par_iter().map(|k| self.raw_jet(k, c)).collect();
        self.build(&raw)
    }

    pub fn energies(&self, c: &[f64], sigma: f64) -> Result<Energies> {
        energies(&self.surface(c)?, sigma)
    }

    /// Jets of `∂Φ_c/∂c_a` at node `k`.
    fn directions(&self, k: usize, raw: &Jet) -> Vec<FieldJet> {
        let nj = self.sample.nodes[k].normal.as_ref().expect("normal checked");
        self.psi[k]
            .iter()
            .map(|p| {
                let v = normal_jet(nj, p);
                if self.ambient.is_sphere() {
                    normalize_jet_tangent(raw, &v)
                } else {
                    v
                }
            })
            .collect()
    }

    pub fn chart<'a>(&'a self, c: &'a [f64]) -> GraphChart<'a> {
        GraphChart { space: self, coeffs: c }
    }

    /// Sample of `Φ_c` with normals on an arbitrary grid.
    pub fn sample_with_normals(&self, c: &[f64], grid: (usize, usize)) -> Result<ImmersionSample> {
        self.check(c)?;
        sample_immersion(&self.chart(c), grid, self.ambient)
    }
}

fn combine(psi: &[ScalarJet], c: &[f64]) -> ScalarJet {
    let mut f = ScalarJet::default();
    for (p, &x) in psi.iter().zip(c) {
        f.f += x * p.f;
        for i in 0..2 {
            f.d[i] += x * p.d[i];
        }
        for i in 0..3 {
            f.dd[i] += x * p.dd[i];
        }
    }
    f
}

/// `Φ_c` as a chart evaluated at arbitrary parameters.
pub struct GraphChart<'a> {
    space: &'a GraphSpace,
    coeffs: &'a [f64],
}

impl Chart for GraphChart<'_> {
    fn topology(&self) -> Topology {
        self.space.base.topology()
    }

    fn jet(&self, u: [f64; 2]) -> Jet {
        let base = self.space.base.as_ref();
        let j0 = base.jet(u);
        let nj = normal_jet_at(self.space.ambient, base, u, &j0).expect("normal checked");
        let f = combine(&self.space.basis.eval(u), self.coeffs);
        let w = normal_jet(&nj, &f);
        let raw = Jet {
            pos: j0.pos + w.w,
            d: [j0.d[0] + w.d[0], j0.d[1] + w.d[1]],
            dd: [j0.dd[0] + w.dd[0], j0.dd[1] + w.dd[1], j0.dd[2] + w.dd[2]],
        };
        self.space.project(&raw)
    }

    fn domain(&self) -> [(f64, f64); 2] {
        self.space.base.domain()
    }

    fn periodic(&self) -> [bool; 2] {
        self.space.base.periodic()
    }

    fn rules(&self) -> [RuleKind; 2] {
        self.space.base.rules()
    }
}

/// `L²` metric gradient of `A^σ` restricted to the graph directions.
#[derive(Debug, Clone)]
pub struct PseudoGradient {
    pub field: VariationField,
    /// Velocity of the coefficients, `G⁻¹ g`.
    pub coeffs: Vec<f64>,
    /// Differential `g_a = DA^σ(∂Φ/∂c_a)`.
    pub differential: Vec<f64>,
    /// Dual norm `‖DA^σ‖ = (gᵀ G⁻¹ g)^{1/2}`.
    pub norm: f64,
    /// `‖X‖` measured directly on the field.
    pub field_norm: f64,
    /// `⟨X, DA^σ⟩ / ‖DA^σ‖²`.
    pub contract: f64,
    pub energies: Energies,
}

pub fn pseudo_gradient(space: &GraphSpace, c: &[f64], sigma: f64) -> Result<PseudoGradient> {
    if !(sigma >= 0.0) {
        return Err(Error::NegativeSigma(sigma));
    }
    space.check(c)?;
    let nn = space.sample.nodes.len();
    let raw: Vec<Jet> = (0..nn).into_par_iter().map(|k| space.raw_jet(k, c)).collect();
    let surf = space.build(&raw)?;
    let en = energies(&surf, sigma)?;
    let amb = space.ambient;
    let s2 = sigma * sigma;
    let nb = space.dim();
    let chunk = 256;
    let starts: Vec<usize> = (0..nn).step_by(chunk).collect();
    let parts: Vec<(DVector<f64>, DMatrix<f64>)> = starts
        .par_iter()
        .map(|&s0| {
            let mut g = DVector::zeros(nb);
            let mut gram = DMatrix::zeros(nb, nb);
            for k in s0..(s0 + chunk).min(nn) {
                let n = &surf.nodes[k];
                let dirs = space.directions(k, &raw[k]);
                for (a, w) in dirs.iter().enumerate() {
                    let mut d = d_area_density(n, w);
                    if sigma > 0.0 {
                        d += s2 * d_f_density(amb, n, w);
                    }
                    g[a] += n.weight * d;
                    for b in a..nb {
                        let v = n.dvol() * w.w.dot(&dirs[b].w);
                        gram[(a, b)] += v;
                        if b != a {
                            gram[(b, a)] += v;
                        }
                    }
                }
            }
            (g, gram)
        })
        .collect();
    let mut g = DVector::zeros(nb);
    let mut gram = DMatrix::zeros(nb, nb);
    for (pg, pm) in parts {
        g += pg;
        gram += pm;
    }
    if g.iter().chain(gram.iter()).any(|x| !x.is_finite()) {
        return Err(Error::NaNGradient);
    }
    let chol = gram
        .clone()
        .cholesky()
        .ok_or_else(|| Error::InvalidConfig("graph directions are linearly dependent".into()))?;
    let x = chol.solve(&g);
    let dual2 = g.dot(&x);
    let jets: Vec<FieldJet> = (0..nn)
        .into_par_iter()
        .map(|k| {
            let mut acc = FieldJet::zero();
            for (w, &xa) in space.directions(k, &raw[k]).iter().zip(x.iter()) {
                acc = acc.add(w, xa);
            }
            acc
        })
        .collect();
    let field = VariationField { jets, has_second: true };
    let mut de_x = first_variation_area(&surf, &field)?;
    if sigma > 0.0 {
        de_x += s2 * first_variation_f(&surf, &field)?;
    }
    let norm2: f64 = surf.nodes.iter().zip(&field.jets).map(|(n, j)| n.dvol() * j.w.norm_squared()).sum();
    if !de_x.is_finite() || !norm2.is_finite() || !dual2.is_finite() {
        return Err(Error::NaNGradient);
    }
    let magnitude: f64 = surf
        .nodes
        .par_iter()
        .zip(&field.jets)
        .map(|(n, j)| {
            let geo = (1.0 + n.ginv.iter().map(|x| x.abs()).sum::<f64>()) * (1.0 + n.d[0].norm() + n.d[1].norm()).powi(2);
            let e = 1.0 + n.ii_norm2;
            let jet = j.w.norm() + j.d.iter().chain(&j.dd).map(|v| v.norm()).sum::<f64>();
            n.dvol() * geo * (1.0 + s2 * e * e * geo) * jet
        })
        .collect::<Vec<f64>>()
        .iter()
        .sum::<f64>()
        + g.iter().zip(x.iter()).map(|(a, b)| (a * b).abs()).sum::<f64>();
    let slack = CONTRACT_TOL * dual2 + 1e3 * f64::EPSILON * magnitude;
    let contract = if dual2 > 0.0 { de_x / dual2 } else { 1.0 };
    if (de_x - dual2).abs() > slack || (norm2 - dual2).abs() > slack {
        return Err(Error::ContractViolation(contract));
    }
    Ok(PseudoGradient {
        field,
        coeffs: x.iter().copied().collect(),
        differential: g.iter().copied().collect(),
        norm: dual2.max(0.0).sqrt(),
        field_norm: norm2.sqrt(),
        contract,
        energies: en,
    })
}

/// Energy window of the cut-off: frozen at or below `lower`, full speed above `lower + band`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cutoff {
    pub lower: f64,
    pub band: f64,
}

impl Cutoff {
    /// A cut-off that never engages.
    pub fn inactive() -> Self {
        Cutoff { lower: f64::NEG_INFINITY, band: 1.0 }
    }
}

/// Smooth monotone ramp `χ((E − L₋)/band)` with `χ = 0` on `(−∞,0]` and `χ = 1` on `[1,∞)`.
pub fn cutoff_factor(energy: f64, cutoff: &Cutoff) -> f64 {
    let x = (energy - cutoff.lower) / cutoff.band;
    if !(x > 0.0) {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let a = (-1.0 / x).exp();
    let b = (-1.0 / (1.0 - x)).exp();
    a / (a + b)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FinslerNorm {
    /// `‖w‖² = ∫ |w|² dvol`.
    L2,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IndexOptions {
    pub grid: (usize, usize),
    pub index_tol: f64,
    pub crit_tol: f64,
}

impl Default for IndexOptions {
    fn default() -> Self {
        IndexOptions { grid: (32, 32), index_tol: 1e-4, crit_tol: 1e-4 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowConfig {
    /// Strictly decreasing, nonnegative.
    pub sigmas: Vec<f64>,
    pub initial_step: f64,
    /// Step reduction factor in `(0,1)`.
    pub backtrack: f64,
    /// Accepted steps per σ stage.
    pub max_steps: usize,
    pub cutoff: Cutoff,
    pub norm: FinslerNorm,
    /// Stop when `‖DA^σ‖ ≤ grad_tol`.
    pub grad_tol: f64,
    /// Morse index of each terminal stage state.
    pub index: Option<IndexOptions>,
}

impl Default for FlowConfig {
    fn default() -> Self {
        FlowConfig {
            sigmas: vec![0.1, 0.01, 0.001],
            initial_step: 0.25,
            backtrack: 0.5,
            max_steps: 200,
            cutoff: Cutoff::inactive(),
            norm: FinslerNorm::L2,
            grad_tol: 1e-6,
            index: None,
        }
    }
}

impl FlowConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.into()));
        if self.sigmas.is_empty() {
            return bad("sigma schedule is empty");
        }
        if self.sigmas.iter().any(|s| !(s.is_finite() && *s >= 0.0)) {
            return bad("sigma values must be finite and nonnegative");
        }
        if self.sigmas.windows(2).any(|w| !(w[1] < w[0])) {
            return bad("sigma schedule must be strictly decreasing");
        }
        if !(self.initial_step > 0.0) {
            return bad("initial step must be positive");
        }
        if !(self.backtrack > 0.0 && self.backtrack < 1.0) {
            return bad("backtracking ratio must lie in (0,1)");
        }
        if !(self.cutoff.band > 0.0) {
            return bad("cut-off band must be positive");
        }
        if !(self.grad_tol > 0.0) {
            return bad("gradient tolerance must be positive");
        }
        if let Some(ix) = &self.index {
            if !(ix.index_tol > 0.0 && ix.crit_tol > 0.0) {
                return bad("index tolerances must be positive");
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub stage: usize,
    pub step: usize,
    /// Accumulated pseudo-time.
    pub t: f64,
    pub a_sigma: f64,
    pub area: f64,
    pub f: f64,
    pub grad_norm: f64,
    pub step_size: f64,
    /// Accumulated Finsler length.
    pub path_len: f64,
    pub sigma: f64,
    pub cutoff: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StopReason {
    Converged,
    /// The cut-off vanished.
    Frozen,
    MaxSteps,
    /// The predicted decrease fell below the resolution of the energy.
    Resolution,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageIndex {
    pub morse_index: usize,
    pub nullity: usize,
    pub index_half_tol: usize,
    pub index_double_grid: usize,
    pub stable: bool,
    pub gradient_sup: f64,
    pub lowest_eigenvalues: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageSummary {
    pub sigma: f64,
    pub steps: usize,
    pub reason: StopReason,
    pub energies: Energies,
    pub grad_norm: f64,
    /// `σ² F log(1/σ)`.
    pub entropy: f64,
    pub index: Option<StageIndex>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FlowTrace {
    pub rows: Vec<TraceRow>,
    pub stages: Vec<StageSummary>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PalaisCheck {
    pub pairs: usize,
    /// `min (2√Δt √ΔE − Δlength)` over recorded pairs within a stage.
    pub worst_slack: f64,
    pub holds: bool,
}

impl FlowTrace {
    /// CSV with columns `step, t, A_sigma, area, F, grad_norm, path_len, sigma`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv_writer(out);
        w.write_record(["step", "t", "A_sigma", "area", "F", "grad_norm", "path_len", "sigma"]).map_err(csv_err)?;
        for r in &self.rows {
            w.write_record([
                r.step.to_string(),
                fmt(r.t),
                fmt(r.a_sigma),
                fmt(r.area),
                fmt(r.f),
                fmt(r.grad_norm),
                fmt(r.path_len),
                fmt(r.sigma),
            ])
            .map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }

    fn stage_rows(&self, stage: usize) -> Vec<&TraceRow> {
        self.rows.iter().filter(|r| r.stage == stage).collect()
    }

    /// `A^σ` is nonincreasing along every stage.
    pub fn is_monotone(&self) -> bool {
        (0..self.stages.len()).all(|s| self.stage_rows(s).windows(2).all(|w| w[1].a_sigma <= w[0].a_sigma))
    }

    /// `length(t₁,t₂) ≤ 2√(t₂−t₁)·(E(t₁)−E(t₂))^{1/2} + 1e-8` for all recorded pairs.
    pub fn palais_check(&self) -> PalaisCheck {
        let mut pairs = 0;
        let mut worst = f64::INFINITY;
        for s in 0..self.stages.len() {
            let rows = self.stage_rows(s);
            for i in 0..rows.len() {
                for j in (i + 1)..rows.len() {
                    let (a, b) = (rows[i], rows[j]);
                    let rhs = 2.0 * (b.t - a.t).max(0.0).sqrt() * (a.a_sigma - b.a_sigma).max(0.0).sqrt();
                    worst = worst.min(rhs - (b.path_len - a.path_len));
                    pairs += 1;
                }
            }
        }
        if pairs == 0 {
            worst = 0.0;
        }
        PalaisCheck { pairs, worst_slack: worst, holds: worst >= -1e-8 }
    }
}

pub fn entropy_quantity(sigma: f64, f: f64) -> f64 {
    if sigma > 0.0 {
        sigma * sigma * f * (1.0 / sigma).ln()
    } else {
        0.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyReport {
    pub sigmas: Vec<f64>,
    pub values: Vec<f64>,
    pub decreasing: bool,
    /// `last / first`.
    pub relative_last: f64,
    pub pass: bool,
}

/// Entropy sequence `σ_k² F_k log(1/σ_k)` with the verdict "strictly decreasing and
/// `last/first ≤ 1e-3`".
pub fn entropy_sequence(sigmas: &[f64], fs: &[f64]) -> EntropyReport {
    let values: Vec<f64> = sigmas.iter().zip(fs).map(|(&s, &f)| entropy_quantity(s, f)).collect();
    let decreasing = values.len() >= 2 && values.windows(2).all(|w| w[1] < w[0]);
    let relative_last = match (values.first(), values.last()) {
        (Some(&a), Some(&b)) if a > 0.0 => b / a,
        _ => f64::NAN,
    };
    let pass = decreasing && relative_last <= ENTROPY_THRESHOLD;
    EntropyReport { sigmas: sigmas.to_vec(), values, decreasing, relative_last, pass }
}

pub fn entropy_monitor(trace: &FlowTrace) -> EntropyReport {
    let sigmas: Vec<f64> = trace.stages.iter().map(|s| s.sigma).collect();
    let fs: Vec<f64> = trace.stages.iter().map(|s| s.energies.f).collect();
    entropy_sequence(&sigmas, &fs)
}

/// Morse index of `A^σ` (Area when `σ = 0`) at `Φ_c`, with the halved-tolerance and doubled-grid repeats.
pub fn stage_index(space: &GraphSpace, c: &[f64], sigma: f64, opts: &IndexOptions) -> Result<StageIndex> {
    let mode = if sigma > 0.0 { EnergyMode::ASigma(sigma) } else { EnergyMode::AreaOnly };
    let basis = default_basis(space.topology())?;
    let jo = JacobiOptions { crit_tol: opts.crit_tol, index_tol: opts.index_tol };
    let s1 = space.sample_with_normals(c, opts.grid)?;
    let r1 = jacobi_spectrum_with(&s1, mode, basis.as_ref(), &jo)?;
    let s2 = space.sample_with_normals(c, (2 * opts.grid.0, 2 * opts.grid.1))?;
    let r2 = jacobi_spectrum_with(&s2, mode, basis.as_ref(), &jo)?;
    let half = r1.index_at(0.5 * opts.index_tol);
    Ok(StageIndex {
        morse_index: r1.morse_index,
        nullity: r1.nullity,
        index_half_tol: half,
        index_double_grid: r2.morse_index,
        stable: half == r1.morse_index && r2.morse_index == r1.morse_index,
        gradient_sup: r1.gradient_sup,
        lowest_eigenvalues: r1.eigenvalues.iter().take(12).copied().collect(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowResult {
    pub trace: FlowTrace,
    pub state: Vec<f64>,
}

fn trace_row(stage: usize, step: usize, t: f64, sigma: f64, pg: &PseudoGradient, h: f64, path: f64, chi: f64) -> TraceRow {
    TraceRow {
        stage,
        step,
        t,
        a_sigma: pg.energies.a_sigma,
        area: pg.energies.area,
        f: pg.energies.f,
        grad_norm: pg.norm,
        step_size: h,
        path_len: path,
        sigma,
        cutoff: chi,
    }
}

/// Backtracking descent `c ← c − h χ(A^σ) X` through the σ schedule, warm-starting each stage.
pub fn flow(space: &GraphSpace, c0: &[f64], config: &FlowConfig) -> Result<FlowResult> {
    config.validate()?;
    space.check(c0)?;
    let mut c = c0.to_vec();
    let mut trace = FlowTrace::default();
    let (mut t, mut path, mut step) = (0.0, 0.0, 0usize);
    for (si, &sigma) in config.sigmas.iter().enumerate() {
        let mut pg = pseudo_gradient(space, &c, sigma)?;
        let mut chi = cutoff_factor(pg.energies.a_sigma, &config.cutoff);
        trace.rows.push(trace_row(si, step, t, sigma, &pg, 0.0, path, chi));
        let mut h = config.initial_step;
        let mut taken = 0;
        let reason = 'stage: loop {
            if pg.norm <= config.grad_tol {
                break StopReason::Converged;
            }
            if chi == 0.0 {
                break StopReason::Frozen;
            }
            if taken == config.max_steps {
                break StopReason::MaxSteps;
            }
            let e0 = pg.energies.a_sigma;
            let slope = chi * pg.norm * pg.norm;
            let resolution = 16.0 * f64::EPSILON * e0.abs().max(1.0);
            let trial = loop {
                if ARMIJO * h * slope < resolution {
                    break 'stage StopReason::Resolution;
                }
                let trial: Vec<f64> = c.iter().zip(&pg.coeffs).map(|(a, x)| a - h * chi * x).collect();
                if let Ok(e) = space.energies(&trial, sigma) {
                    if e.a_sigma <= e0 - ARMIJO * h * slope {
                        break trial;
                    }
                }
                h *= config.backtrack;
                if h < MIN_STEP {
                    return Err(Error::StepCollapse(h));
                }
            };
            t += h;
            path += h * chi * pg.field_norm;
            step += 1;
            taken += 1;
            c = trial;
            pg = pseudo_gradient(space, &c, sigma)?;
            chi = cutoff_factor(pg.energies.a_sigma, &config.cutoff);
            trace.rows.push(trace_row(si, step, t, sigma, &pg, h, path, chi));
            h = (h / config.backtrack).min(config.initial_step);
        };
        let index = match &config.index {
            Some(opts) => Some(stage_index(space, &c, sigma, opts)?),
            None => None,
        };
        trace.stages.push(StageSummary {
            sigma,
            steps: taken,
            reason,
            energies: pg.energies,
            grad_norm: pg.norm,
            entropy: entropy_quantity(sigma, pg.energies.f),
            index,
        });
    }
    Ok(FlowResult { trace, state: c })
}

/// Slices of a one-parameter sweep-out at finitely many parameters, each a graph space.
#[derive(Debug)]
pub struct SweepFamily {
    pub params: Vec<f64>,
    pub slices: Vec<GraphSpace>,
}

impl SweepFamily {
    /// Graph spaces over the slices of `sweep`, with polynomial or trigonometric
    /// coefficients up to `degree`.
    pub fn from_sweep(sweep: &SweepOut1D, params: &[f64], degree: u32) -> Result<Self> {
        let slices = params
            .iter()
            .map(|&t| {
                let chart = sweep.chart(t)?;
                let basis: Box<dyn ScalarBasis + Send> = match chart.topology() {
                    Topology::Sphere => Box::new(SpherePolyBasis::new(degree)),
                    _ => Box::new(TrigBasis::full(degree)),
                };
                GraphSpace::new(chart, basis, AmbientManifold::S3, sweep.grid)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(SweepFamily { params: params.to_vec(), slices })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WidthRow {
    pub sigma: f64,
    /// Max of `A^σ` over the deformed family.
    pub width: f64,
    pub argmax: f64,
    /// Max of `A^σ` over the undeformed family.
    pub initial_max: f64,
    pub initial: Vec<f64>,
    pub deformed: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WidthTable {
    pub rows: Vec<WidthRow>,
    /// Nondecreasing in σ.
    pub monotone: bool,
    /// Intercept of the least-squares fit `W^σ ≈ W⁰ + b σ²`.
    pub extrapolated: f64,
}

/// `W^σ` of a sweep family: every slice is flowed at fixed σ and the max of `A^σ` is taken.
pub fn sigma_width_continuation(family: &SweepFamily, sigmas: &[f64], config: &FlowConfig) -> Result<WidthTable> {
    let mut rows = Vec::with_capacity(sigmas.len());
    for &sigma in sigmas {
        let cfg = FlowConfig { sigmas: vec![sigma], index: None, ..config.clone() };
        cfg.validate()?;
        let results: Vec<(f64, f64)> = family
            .slices
            .par_iter()
            .map(|space| {
                let c0 = vec![0.0; space.dim()];
                let r = flow(space, &c0, &cfg)?;
                let first = r.trace.rows.first().map(|r| r.a_sigma).unwrap_or(f64::NAN);
                let last = r.trace.rows.last().map(|r| r.a_sigma).unwrap_or(f64::NAN);
                Ok((first, last))
            })
            .collect::<Result<Vec<_>>>()?;
        let initial: Vec<f64> = results.iter().map(|r| r.0).collect();
        let deformed: Vec<f64> = results.iter().map(|r| r.1).collect();
        let (mut k, mut width) = (0, f64::NEG_INFINITY);
        for (i, &d) in deformed.iter().enumerate() {
            if d > width {
                width = d;
                k = i;
            }
        }
        let initial_max = initial.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        rows.push(WidthRow { sigma, width, argmax: family.params[k], initial_max, initial, deformed });
    }
    let mut sorted: Vec<&WidthRow> = rows.iter().collect();
    sorted.sort_by(|a, b| a.sigma.total_cmp(&b.sigma));
    let monotone = sorted.windows(2).all(|w| w[1].width >= w[0].width);
    let extrapolated = fit_intercept(&sorted.iter().map(|r| (r.sigma * r.sigma, r.width)).collect::<Vec<_>>());
    Ok(WidthTable { rows, monotone, extrapolated })
}

fn fit_intercept(pts: &[(f64, f64)]) -> f64 {
    if pts.len() < 2 {
        return pts.first().map(|p| p.1).unwrap_or(f64::NAN);
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    if sxx == 0.0 {
        return my;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    my - sxy / sxx * mx
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SemicontinuityVerdict {
    /// Minimum stage index over the last half of the stages.
    pub tail_min: usize,
    pub holds: bool,
    pub strict: bool,
}

/// `limit ≤ min` over the last `⌈n/2⌉` stage indices.
pub fn semicontinuity_verdict(stage_indices: &[usize], limit: usize) -> SemicontinuityVerdict {
    let n = stage_indices.len();
    let tail_min = stage_indices[n / 2..].iter().copied().min().unwrap_or(usize::MAX);
    SemicontinuityVerdict { tail_min, holds: limit <= tail_min, strict: limit < tail_min }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexExperiment {
    pub sigmas: Vec<f64>,
    pub stage_indices: Vec<usize>,
    pub stage_areas: Vec<f64>,
    pub stages_stable: bool,
    /// Area index of the terminal surface.
    pub limit: StageIndex,
    pub verdict: SemicontinuityVerdict,
    pub limsup_area: f64,
    /// `limsup Area < 8π`.
    pub multiplicity_one: bool,
    pub entropy: EntropyReport,
    pub trace: FlowTrace,
    pub state: Vec<f64>,
}

impl IndexExperiment {
    /// Verdict after adding one negative direction to every stage from `from` on.
    pub fn injected(&self, from: usize) -> SemicontinuityVerdict {
        let idx: Vec<usize> =
            self.stage_indices.iter().enumerate().map(|(k, &i)| if k >= from { i + 1 } else { i }).collect();
        semicontinuity_verdict(&idx, self.limit.morse_index)
    }
}

/// Staged flow through the σ schedule followed by Morse indices of `A^σ` per stage
/// and the Area index of the terminal surface.
pub fn index_semicontinuity_experiment(space: &GraphSpace, c0: &[f64], config: &FlowConfig) -> Result<IndexExperiment> {
    let opts = config.index.ok_or_else(|| Error::InvalidConfig("index options are required".into()))?;
    let r = flow(space, c0, config)?;
    let stage_indices: Vec<usize> =
        r.trace.stages.iter().map(|s| s.index.as_ref().map(|i| i.morse_index).unwrap_or(0)).collect();
    let stage_areas: Vec<f64> = r.trace.stages.iter().map(|s| s.energies.area).collect();
    let stages_stable = r.trace.stages.iter().all(|s| s.index.as_ref().is_some_and(|i| i.stable));
    let limit = stage_index(space, &r.state, 0.0, &opts)?;
    let verdict = semicontinuity_verdict(&stage_indices, limit.morse_index);
    let n = stage_areas.len();
    let limsup_area = stage_areas[n / 2..].iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(IndexExperiment {
        sigmas: config.sigmas.clone(),
        stage_indices,
        stage_areas,
        stages_stable: stages_stable && limit.stable,
        limit,
        verdict,
        limsup_area,
        multiplicity_one: limsup_area < 8.0 * PI,
        entropy: entropy_monitor(&r.trace),
        trace: r.trace,
        state: r.state,
    })
}

/// Graphs over `Cl₁` invariant under the swap with normal flip and the half-period shifts.
pub fn clifford_space(grid: (usize, usize)) -> Result<GraphSpace> {
    GraphSpace::new(
        Box::new(CliffordChart::new(1.0)?),
        Box::new(TrigBasis::swap_antisymmetric_even(2)),
        AmbientManifold::S3,
        grid,
    )
}

/// Graphs over the great sphere `x₀ = 0` spanned by the harmonics `xy, xz, yz`.
pub fn geodesic_space(grid: (usize, usize)) -> Result<GraphSpace> {
    GraphSpace::new(
        Box::new(GeodesicSphereChart::new(PI / 2.0)),
        Box::new(SpherePolyBasis::from_exponents(vec![[1, 1, 0], [1, 0, 1], [0, 1, 1]])),
        AmbientManifold::S3,
        grid,
    )
}
