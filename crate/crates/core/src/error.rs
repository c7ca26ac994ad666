use crate::domain::NodeId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("rank point {0} is outside (0, 1]")]
    RankOutOfRange(f64),
    #[error("invalid slice boundaries: {0}")]
    InvalidSlices(String),
    #[error("duplicate node id {0}")]
    DuplicateId(NodeId),
    #[error("node {0} is not in the view")]
    NotInView(NodeId),
    #[error("{0} is not defined for this protocol")]
    NotApplicable(&'static str),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("rank estimate lies exactly on a slice boundary")]
    OnBoundary,
}
