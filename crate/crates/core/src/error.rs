use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("degenerate jacobian at node {node}: det g = {det:e}")]
    DegenerateJacobian { node: usize, det: f64 },
    #[error("point at node {node} lies {distance:e} away from the ambient manifold")]
    OffManifold { node: usize, distance: f64 },
    #[error("grid {0}x{1} is below the 8x8 minimum")]
    GridTooSmall(usize, usize),
    #[error("sigma must be nonnegative, got {0}")]
    NegativeSigma(f64),
    #[error("variation field leaves the tangent space at node {node} (residual {residual:e})")]
    TangencyViolation { node: usize, residual: f64 },
    #[error("ambient field is not smooth near {0:?}")]
    NonSmoothField([f64; 4]),
    #[error("sample is not critical: discrete gradient sup-norm {0:e}")]
    NotCritical(f64),
    #[error("surface has no normal line inside the ambient manifold")]
    NoNormal,
    #[error("second normal derivatives are unavailable for this sample")]
    MissingSecondJets,
    #[error("Gauss-Bonnet quadrature {0} is not within 0.1 of an integer")]
    RoundingAmbiguous(f64),
    #[error("topology is not closed")]
    OpenTopology,
    #[error("bad mesh: {0}")]
    BadMesh(String),
    #[error("eigenvalue gap {gap:e} at index {index} falls inside the clustering threshold band")]
    ClusterAmbiguity { index: usize, gap: f64 },
    #[error("requested {requested} eigenpairs from an operator of dimension {dim}")]
    CountTooLarge { requested: usize, dim: usize },
    #[error("level {level} out of range (available {available})")]
    LevelOutOfRange { level: usize, available: usize },
    #[error("path endpoints are not -u1 and +u1 (distances {0:e}, {1:e})")]
    PathEndpoints(f64, f64),
    #[error("path is not continuous on its sampling grid (jump {0:e})")]
    PathDiscontinuous(f64),
    #[error("no sign change of <u, u1> along the sampled path")]
    NoCrossing,
    #[error("sampled map is not continuous (adjacent jump {0:e})")]
    NotContinuous(f64),
    #[error("no regular value found after {0} attempts")]
    NotRegularValue(usize),
    #[error("b must be positive, got {0}")]
    NonpositiveB(f64),
    #[error("parameter {0} outside (-1, 1)")]
    OutOfRange(f64),
    #[error("point hits the Moebius pole (|z - a| = {0:e})")]
    PoleHit(f64),
    #[error("normal field cannot be oriented continuously")]
    NonOrientable,
    #[error("too many atoms: {0} (limit {1})")]
    TooManyAtoms(usize, usize),
    #[error("linear program failed: {0}")]
    LpFailure(String),
    #[error("chain is not a cycle (boundary residual {0:e})")]
    NotACycle(f64),
    #[error("distance {distance:e} to the catalog exceeds the neighborhood radius {radius:e}")]
    OutsideNeighborhood { distance: f64, radius: f64 },
    #[error("gradient contains NaN")]
    NaNGradient,
    #[error("pseudo-gradient contract ratio {0} differs from 1")]
    ContractViolation(f64),
    #[error("line search step collapsed below {0:e}")]
    StepCollapse(f64),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
