use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("axis needs at least {min} nodes, got {got}")]
    TooFewNodes { min: usize, got: usize },

    #[error("product manifolds are limited to total dimension 2, got {0}")]
    DimensionTooLarge(usize),

    #[error("operands live on different base manifolds")]
    BaseMismatch,

    #[error("bundle mismatch: {0}")]
    BundleMismatch(String),

    #[error("node {node} out of range (manifold has {count} nodes)")]
    NodeOutOfRange { node: usize, count: usize },

    #[error("derivative of order {order} at node {node} reaches into the boundary layer")]
    BoundaryViolation { node: usize, order: u8 },

    #[error("derivative order {0} not supported (max 2)")]
    InvalidOrder(u8),

    #[error("derivative point masses require a one-dimensional base")]
    DerivativeOnProduct,

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("test density does not vanish on the boundary layers (node {0})")]
    SupportViolation(usize),

    #[error("invalid projector field: {0}")]
    InvalidProjector(String),

    #[error("section value leaves the fiber at node {node} (deviation {deviation:.3e})")]
    NotInFiber { node: usize, deviation: f64 },

    #[error("morphism does not respect fibers at node {node} (deviation {deviation:.3e})")]
    NotFiberPreserving { node: usize, deviation: f64 },

    #[error("kernel is not a section of E*⊠F at node {node} (deviation {deviation:.3e})")]
    KernelNotInFiber { node: usize, deviation: f64 },

    #[error("{what}: limit is {limit}, got {got}")]
    TooMany { what: &'static str, limit: usize, got: usize },

    #[error("mollifier width {eps} is below the resolvable minimum {min}")]
    EpsTooSmall { eps: f64, min: f64 },

    #[error("mollifier needs a periodic base")]
    NotPeriodic,

    #[error("unknown {kind} `{name}`")]
    UnknownStrategy { kind: &'static str, name: String },

    #[error("scene: {0}")]
    Scene(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
