//! Experiment configuration read from TOML and overridden by command-line flags.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::{Path, PathBuf};

/// Experiment group to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    #[default]
    All,
    Eigen,
    S3,
    Flow,
    Dist,
}

impl Kind {
    pub fn parse(s: &str) -> Option<Kind> {
        match s {
            "all" => Some(Kind::All),
            "eigen" => Some(Kind::Eigen),
            "s3" => Some(Kind::S3),
            "flow" => Some(Kind::Flow),
            "dist" => Some(Kind::Dist),
            _ => None,
        }
    }

    pub fn includes(self, other: Kind) -> bool {
        self == Kind::All || self == other
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DomainKind {
    Circle,
    Torus,
    Icosphere,
}

/// Discretized domain; `n` is the node count per side, or the subdivision depth of an icosphere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSpec {
    pub kind: DomainKind,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EigenConfig {
    pub domains: Vec<DomainSpec>,
    pub levels: usize,
    /// Allowed `|μ_k − λ_k| / max(λ_k, 1)`.
    pub tol: f64,
    /// Allowed amount by which a perturbed family may undercut `λ_k`.
    pub trial_tol: f64,
    pub trials: usize,
    pub epsilon: f64,
    pub t_points: usize,
    pub rotation_samples: usize,
}

impl Default for EigenConfig {
    fn default() -> Self {
        EigenConfig {
            domains: vec![DomainSpec { kind: DomainKind::Circle, n: 256 }, DomainSpec { kind: DomainKind::Torus, n: 64 }],
            levels: 5,
            tol: 1e-8,
            trial_tol: 1e-6,
            trials: 50,
            epsilon: 0.3,
            t_points: 9,
            rotation_samples: 6,
        }
    }
}

/// Subset of the `S³` checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum S3Check {
    #[default]
    All,
    Widths,
    Envelope,
    Index,
    Degrees,
}

impl S3Check {
    pub fn parse(s: &str) -> Option<S3Check> {
        match s {
            "all" => Some(S3Check::All),
            "widths" => Some(S3Check::Widths),
            "envelope" => Some(S3Check::Envelope),
            "index" => Some(S3Check::Index),
            "degrees" => Some(S3Check::Degrees),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct S3Config {
    pub check: S3Check,
    /// Absolute tolerance on the width and area identities.
    pub width_tol: f64,
    pub volume_tol: f64,
    /// Relative tolerance of the sampled envelope.
    pub envelope_tol: f64,
    pub family_tol: f64,
    /// Jacobi spectra are computed at this grid and at twice it.
    pub index_grid: usize,
    pub ball_points: usize,
    pub ball_radius: f64,
    pub degree_resolution: usize,
}

impl Default for S3Config {
    fn default() -> Self {
        S3Config {
            check: S3Check::All,
            width_tol: 1e-6,
            volume_tol: 1e-4,
            envelope_tol: 1e-2,
            family_tol: 5e-3,
            index_grid: 64,
            ball_points: 10_000,
            ball_radius: 0.9,
            degree_resolution: 24,
        }
    }
}

/// Initial critical surface of a flow run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Start {
    #[default]
    Both,
    Clifford,
    Geodesic,
}

impl Start {
    pub fn parse(s: &str) -> Option<Start> {
        match s {
            "both" => Some(Start::Both),
            "clifford" => Some(Start::Clifford),
            "geodesic" => Some(Start::Geodesic),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FlowSection {
    pub start: Start,
    pub sigmas: Vec<f64>,
    /// Clifford runs use `grid × grid`, geodesic runs `grid/2 × grid`.
    pub grid: usize,
    pub grad_tol: f64,
    pub max_steps: usize,
    pub initial_step: f64,
    pub backtrack: f64,
    pub index_tol: f64,
    pub crit_tol: f64,
    pub clifford_start: Vec<f64>,
    pub geodesic_start: Vec<f64>,
    pub width: bool,
    pub width_sigmas: Vec<f64>,
    pub width_params: usize,
    pub variation_cases: usize,
    pub variation_grid: usize,
}

impl Default for FlowSection {
    fn default() -> Self {
        FlowSection {
            start: Start::Both,
            sigmas: vec![0.1, 0.01, 0.001],
            grid: 32,
            grad_tol: 1e-6,
            max_steps: 200,
            initial_step: 0.25,
            backtrack: 0.5,
            index_tol: 1e-4,
            crit_tol: 1e-4,
            clifford_start: vec![0.02, -0.01, 0.015],
            geodesic_start: vec![0.02, 0.01, -0.015],
            width: true,
            width_sigmas: vec![0.1, 0.05, 0.0],
            width_params: 9,
            variation_cases: 20,
            variation_grid: 64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DistConfig {
    pub triples: usize,
    pub min_atoms: usize,
    pub max_atoms: usize,
    pub axiom_tol: f64,
    /// Cubes per side of the flat-norm complex on `[-0.5, 1.5]³`.
    pub flat_grid: usize,
    pub flat_tol: f64,
    /// Refinement of the `S³` complex used by the `𝐅`-distance.
    pub s3_complex: usize,
}

impl Default for DistConfig {
    fn default() -> Self {
        DistConfig { triples: 50, min_atoms: 5, max_atoms: 20, axiom_tol: 1e-8, flat_grid: 8, flat_tol: 2e-2, s3_complex: 3 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub experiment: Kind,
    pub seed: u64,
    pub out: PathBuf,
    pub eigen: EigenConfig,
    pub s3: S3Config,
    pub flow: FlowSection,
    pub dist: DistConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            experiment: Kind::All,
            seed: 0,
            out: PathBuf::from("minmax-out"),
            eigen: EigenConfig::default(),
            s3: S3Config::default(),
            flow: FlowSection::default(),
            dist: DistConfig::default(),
        }
    }
}

/// Malformed configuration file or flag.
#[derive(Debug, Clone, PartialEq)]
pub enum ConfigError {
    Io { path: PathBuf, message: String },
    Parse { path: PathBuf, line: Option<usize>, column: Option<usize>, message: String },
    Invalid { field: String, message: String },
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Io { path, message } => write!(f, "{}: {message}", path.display()),
            ConfigError::Parse { path, line, column, message } => match (line, column) {
                (Some(l), Some(c)) => write!(f, "{}:{l}:{c}: {message}", path.display()),
                _ => write!(f, "{}: {message}", path.display()),
            },
            ConfigError::Invalid { field, message } => write!(f, "invalid `{field}`: {message}"),
        }
    }
}

impl std::error::Error for ConfigError {}

fn line_column(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
    (line, column)
}

impl ExperimentConfig {
    /// Parses TOML text; `path` only labels diagnostics.
    pub fn from_toml(text: &str, path: &Path) -> Result<ExperimentConfig, ConfigError> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| {
            let pos = e.span().map(|s| line_column(text, s.start));
            ConfigError::Parse {
                path: path.to_path_buf(),
                line: pos.map(|p| p.0),
                column: pos.map(|p| p.1),
                message: e.message().to_string(),
            }
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<ExperimentConfig, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io { path: path.to_path_buf(), message: e.to_string() })?;
        ExperimentConfig::from_toml(&text, path)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |field: &str, message: &str| Err(ConfigError::Invalid { field: field.into(), message: message.into() });
        let tolerances = [
            ("eigen.tol", self.eigen.tol),
            ("eigen.trial_tol", self.eigen.trial_tol),
            ("eigen.epsilon", self.eigen.epsilon),
            ("s3.width_tol", self.s3.width_tol),
            ("s3.volume_tol", self.s3.volume_tol),
            ("s3.envelope_tol", self.s3.envelope_tol),
            ("s3.family_tol", self.s3.family_tol),
            ("flow.grad_tol", self.flow.grad_tol),
            ("flow.initial_step", self.flow.initial_step),
            ("flow.index_tol", self.flow.index_tol),
            ("flow.crit_tol", self.flow.crit_tol),
            ("dist.axiom_tol", self.dist.axiom_tol),
            ("dist.flat_tol", self.dist.flat_tol),
        ];
        for (field, v) in tolerances {
            if !(v.is_finite() && v > 0.0) {
                return invalid(field, "must be positive");
            }
        }
        if self.eigen.domains.is_empty() {
            return invalid("eigen.domains", "needs at least one domain");
        }
        for d in &self.eigen.domains {
            let ok = match d.kind {
                DomainKind::Circle => d.n >= 3,
                DomainKind::Torus => d.n >= 3,
                DomainKind::Icosphere => d.n <= 6,
            };
            if !ok {
                return invalid("eigen.domains.n", "circle and torus need n ≥ 3, icosphere n ≤ 6");
            }
        }
        if self.eigen.levels == 0 {
            return invalid("eigen.levels", "must be at least 1");
        }
        if self.eigen.t_points < 2 || self.eigen.rotation_samples == 0 {
            return invalid("eigen.t_points", "needs t_points ≥ 2 and rotation_samples ≥ 1");
        }
        if !(self.s3.ball_radius > 0.0 && self.s3.ball_radius < 1.0) {
            return invalid("s3.ball_radius", "must lie in (0, 1)");
        }
        if self.s3.index_grid < 8 || self.s3.ball_points == 0 || self.s3.degree_resolution < 2 {
            return invalid("s3.index_grid", "needs index_grid ≥ 8, ball_points ≥ 1, degree_resolution ≥ 2");
        }
        let f = &self.flow;
        if f.sigmas.is_empty() || f.sigmas.iter().any(|s| !(s.is_finite() && *s >= 0.0)) || f.sigmas.windows(2).any(|w| w[1] >= w[0]) {
            return invalid("flow.sigmas", "must be a nonempty strictly decreasing list of nonnegative numbers");
        }
        if f.width_sigmas.iter().any(|s| !(s.is_finite() && *s >= 0.0)) {
            return invalid("flow.width_sigmas", "must be nonnegative");
        }
        if !(f.backtrack > 0.0 && f.backtrack < 1.0) {
            return invalid("flow.backtrack", "must lie in (0, 1)");
        }
        if f.grid < 8 || f.max_steps == 0 || f.width_params < 2 || f.variation_grid < 8 {
            return invalid("flow.grid", "needs grid ≥ 8, max_steps ≥ 1, width_params ≥ 2, variation_grid ≥ 8");
        }
        if f.clifford_start.len() != 3 || f.geodesic_start.len() != 3 {
            return invalid("flow.clifford_start", "initial coefficient vectors have three entries");
        }
        let d = &self.dist;
        if d.min_atoms == 0 || d.max_atoms < d.min_atoms {
            return invalid("dist.max_atoms", "needs 1 ≤ min_atoms ≤ max_atoms");
        }
        if d.flat_grid < 2 || d.s3_complex == 0 {
            return invalid("dist.flat_grid", "needs flat_grid ≥ 2 and s3_complex ≥ 1");
        }
        Ok(())
    }
}

/// Command-line overrides applied on top of a configuration.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub grid: Option<usize>,
    pub sigma: Option<Vec<f64>>,
    pub tol: Option<f64>,
    pub levels: Option<usize>,
    pub domain: Option<DomainKind>,
    pub n: Option<usize>,
    pub check: Option<S3Check>,
    pub start: Option<Start>,
}

impl ExperimentConfig {
    /// Applies flag overrides and revalidates.
    pub fn apply(&mut self, o: &Overrides) -> Result<(), ConfigError> {
        if let Some(p) = &o.out {
            self.out = p.clone();
        }
        if let Some(s) = o.seed {
            self.seed = s;
        }
        if let Some(g) = o.grid {
            let k = self.experiment;
            if k.includes(Kind::S3) {
                self.s3.index_grid = g;
            }
            if k.includes(Kind::Flow) {
                self.flow.grid = g;
            }
            if k == Kind::Dist {
                self.dist.flat_grid = g;
            }
        }
        if let Some(s) = &o.sigma {
            self.flow.sigmas = s.clone();
        }
        if let Some(t) = o.tol {
            self.eigen.tol = t;
            self.s3.width_tol = t;
            self.flow.grad_tol = t;
            self.dist.axiom_tol = t;
        }
        if let Some(l) = o.levels {
            self.eigen.levels = l;
        }
        match (o.domain, o.n) {
            (Some(kind), n) => {
                let n = n.unwrap_or_else(|| match kind {
                    DomainKind::Circle => 256,
                    DomainKind::Torus => 64,
                    DomainKind::Icosphere => 3,
                });
                self.eigen.domains = vec![DomainSpec { kind, n }];
            }
            (None, Some(n)) => self.eigen.domains.iter_mut().for_each(|d| d.n = n),
            (None, None) => {}
        }
        if let Some(c) = o.check {
            self.s3.check = c;
        }
        if let Some(s) = o.start {
            self.flow.start = s;
        }
        self.validate()
    }
}
