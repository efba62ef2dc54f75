use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("unsupported group: {0}")]
    InvalidGroup(String),

    #[error("ball of radius {radius} exceeds the vertex budget of {budget}")]
    VertexBudget { radius: usize, budget: usize },

    #[error("vertex {vertex} lies on the ball's outer sphere; its neighbourhood is not decidable within the ball")]
    BoundaryUndecidable { vertex: usize },

    #[error("neighbour of vertex {vertex} along generator {generator} is outside the ball and no tail rule resolves it")]
    Unresolvable { vertex: usize, generator: usize },

    #[error("functions live on different balls")]
    DomainMismatch,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("non-finite value at vertex {0}")]
    NonFinite(usize),

    #[error("negative value {value} at vertex {vertex}")]
    NegativeValue { vertex: usize, value: f64 },

    #[error("ball has no interior vertices")]
    EmptyInterior,

    #[error("missing boundary value for vertex {0}")]
    MissingBoundaryValue(usize),

    #[error("radius {have} too small: need at least {need}")]
    RadiusTooSmall { need: usize, have: usize },

    #[error("operator norm estimate {0} is not below 1; the Neumann series is undefined (amenable group)")]
    NotContracting(f64),

    #[error("group {0} is amenable; the construction needs a nonamenable group")]
    Amenable(String),
}
