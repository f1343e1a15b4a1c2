use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    MalformedLine { line: usize, message: String },

    #[error("graph has no nodes")]
    EmptyGraph,

    #[error("node {node} out of range for graph with {n} nodes")]
    NodeOutOfRange { node: usize, n: usize },

    #[error("self-loop on node {0}")]
    SelfLoop(usize),

    #[error("node set is empty")]
    EmptyNodeSet,

    #[error("no nodes remain after the degree filter")]
    EmptyCore,

    #[error("nodes must be distinct (got {0} twice)")]
    SameNode(usize),

    #[error("probability {name} = {value} outside [0, 1]")]
    InvalidProbability { name: &'static str, value: f64 },

    #[error("value is undefined: {0}")]
    Undefined(&'static str),

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("{n} nodes exceeds the dense cap of {cap}")]
    TooLarge { n: usize, cap: usize },

    #[error("graph needs at least {need} nodes, has {got}")]
    TooSmall { need: usize, got: usize },

    #[error("matrix is not symmetric (max deviation {0:e})")]
    NotSymmetric(f64),

    #[error("requested {k} eigenpairs from an operator of dimension {n}")]
    TooManyEigenpairs { k: usize, n: usize },

    #[error("eigensolver did not converge after {matvecs} operator applications (worst residual {worst_residual:e})")]
    NotConverged {
        matvecs: usize,
        worst_residual: f64,
        residuals: Vec<f64>,
    },

    #[error("too few eigenvalues ({0}) for the eigengap heuristic")]
    TooFewEigenvalues(usize),

    #[error("embedding vector has a single sign; no bipartition")]
    OneSigned { embedding: Vec<f64> },

    #[error("k = {k} is not valid for {n} points")]
    InvalidK { k: usize, n: usize },

    #[error("graph carries no mutuality tendency structure (zero tendency Laplacian)")]
    NoTendencyStructure,

    #[error("graph is not strongly connected")]
    NotStronglyConnected,

    #[error("stationary distribution did not converge")]
    StationaryNotConverged,

    #[error("infeasible synthetic spec: {0}")]
    Infeasible(String),

    #[error("sampling gave up after {attempts} attempts")]
    SamplingFailed { attempts: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Stable machine-readable identifier, used by the CLI error JSON.
    pub fn code(&self) -> &'static str {
        match self {
            Error::MalformedLine { .. } => "malformed_line",
            Error::EmptyGraph => "empty_graph",
            Error::NodeOutOfRange { .. } => "node_out_of_range",
            Error::SelfLoop(_) => "self_loop",
            Error::EmptyNodeSet => "empty_node_set",
            Error::EmptyCore => "empty_core",
            Error::SameNode(_) => "same_node",
            Error::InvalidProbability { .. } => "invalid_probability",
            Error::Undefined(_) => "undefined",
            Error::InvalidPartition(_) => "invalid_partition",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::TooLarge { .. } => "too_large",
            Error::TooSmall { .. } => "too_small",
            Error::NotSymmetric(_) => "not_symmetric",
            Error::TooManyEigenpairs { .. } => "too_many_eigenpairs",
            Error::NotConverged { .. } => "not_converged",
            Error::TooFewEigenvalues(_) => "too_few_eigenvalues",
            Error::OneSigned { .. } => "one_signed",
            Error::InvalidK { .. } => "invalid_k",
            Error::NoTendencyStructure => "no_tendency_structure",
            Error::NotStronglyConnected => "not_strongly_connected",
            Error::StationaryNotConverged => "stationary_not_converged",
            Error::Infeasible(_) => "infeasible",
            Error::SamplingFailed { .. } => "sampling_failed",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
        }
    }
}
