use thiserror::Error;

/// Errors raised by the solvers and containers of this crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("insufficient resolution: {0}")]
    InsufficientResolution(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("unknown boundary selector `{0}`")]
    UnknownSelector(String),
    #[error("map leaves the planar domain: {0}")]
    OutsideDomain(String),
    #[error("singular discrete system: {0}")]
    Singular(String),
    #[error("A not invertible (|det A| = {0:e})")]
    NotInvertible(f64),
    #[error("Theta must exceed 4 (got {0})")]
    ThetaTooSmall(f64),
    #[error("perturbation too large: {0}")]
    PerturbationTooLarge(String),
    #[error("outside contraction regime: factors {0:?}")]
    OutsideContraction(Vec<f64>),
    #[error("foliation not invertible at resolution: {0}")]
    FoliationNotInvertible(String),
    #[error("integrability violated: mean of pulled-back form {0:e}")]
    IntegrabilityViolated(f64),
    #[error("metric degenerate: min g = {0:e}")]
    MetricDegenerate(f64),
    #[error("left the Kähler cone: {0}")]
    LeftKahlerCone(String),
    #[error("input does not vanish on t=0,1 (max {0:e})")]
    NotVanishing(f64),
    #[error("Theta too small at this resolution: contraction factor {0}")]
    NoContraction(f64),
    #[error("Neumann series did not converge in {0} terms")]
    NeumannDiverged(usize),
    #[error("invalid indices: {0}")]
    InvalidIndices(String),
    #[error("schedule infeasible: {0}")]
    Schedule(String),
    #[error("left N^b: |f|_b = {norm:e} > eps = {eps:e} at step {step}")]
    LeftNeighborhood { step: usize, norm: f64, eps: f64 },
    #[error("oracle invalid: methods differ by {diff:e}, allowed {allowed:e}")]
    OracleInvalid { diff: f64, allowed: f64 },
    #[error("endpoint mismatch: {0:e}")]
    EndpointMismatch(f64),
    #[error("conformal map: {0}")]
    ConformalMap(String),
    #[error("did not converge: {0}")]
    NoConvergence(String),
    #[error("lambda = {lambda}: {source}")]
    AtLambda {
        lambda: f64,
        #[source]
        source: Box<Error>,
    },
    #[error("snapshot: {0}")]
    Snapshot(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
