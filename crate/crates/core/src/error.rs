use thiserror::Error;

/// Why an edge-list line was rejected.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LineErrorKind {
    Malformed(String),
    NonPositiveWeight,
    SelfLoop,
    DuplicateEdge,
    NodeOutOfRange,
    MissingHeader,
}

impl std::fmt::Display for LineErrorKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LineErrorKind::Malformed(why) => write!(f, "malformed line ({why})"),
            LineErrorKind::NonPositiveWeight => f.write_str("non-positive weight"),
            LineErrorKind::SelfLoop => f.write_str("self-loop"),
            LineErrorKind::DuplicateEdge => f.write_str("duplicate edge"),
            LineErrorKind::NodeOutOfRange => f.write_str("node index out of range"),
            LineErrorKind::MissingHeader => f.write_str("missing node count"),
        }
    }
}

/// A directed pair `(i, j)` that breaks the balance `m_i w_ij = m_j w_ji`.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct PairViolation {
    pub from: usize,
    pub to: usize,
    /// `None` when the reverse edge `j -> i` is missing.
    pub reverse_weight: Option<f64>,
    pub relative_imbalance: f64,
}

impl std::fmt::Display for PairViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.reverse_weight {
            None => write!(f, "({}, {}): reverse edge missing", self.from, self.to),
            Some(_) => write!(
                f,
                "({}, {}): relative imbalance {:.3e}",
                self.from, self.to, self.relative_imbalance
            ),
        }
    }
}

/// Coarse classification used to pick process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Usage,
    Model,
    Numeric,
    Io,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {kind}")]
    Parse { line: usize, kind: LineErrorKind },

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("graph is not strongly connected ({0})")]
    NotStronglyConnected(String),

    #[error("graph is not symmetrizable; violating pairs: {}", format_pairs(.0))]
    NotSymmetrizable(Vec<PairViolation>),

    #[error("scaled Laplacian asymmetry {residual:.3e} exceeds tolerance {tolerance:.3e}")]
    SymmetryResidual { residual: f64, tolerance: f64 },

    #[error("node {node} out of range for a graph with {n} nodes")]
    NodeOutOfRange { node: usize, n: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("stationary amplitude of mode {mode} diverges at omega = {omega}")]
    Divergent { mode: usize, omega: f64 },

    #[error("no nonzero eigenfrequency at or below omega = {omega} (smallest is {smallest})")]
    NoTargetMode { omega: f64, smallest: f64 },

    #[error("mode {mode} is overdamped (omega_mu = {omega_mu}, gamma = {gamma})")]
    Overdamped { mode: usize, omega_mu: f64, gamma: f64 },

    #[error("time step {dt} is unstable: dt * omega_max = {product:.3} >= 2")]
    UnstableStep { dt: f64, product: f64 },

    #[error("non-finite state at t = {time}")]
    NonFinite { time: f64 },

    #[error("eigensolver failed: {0}")]
    Eigen(String),

    #[error("series too short: {len} samples, need at least {needed}")]
    SeriesTooShort { len: usize, needed: usize },

    #[error("moving-average window {window} exceeds series length {len}")]
    WindowTooLarge { window: usize, len: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

fn format_pairs(pairs: &[PairViolation]) -> String {
    pairs
        .iter()
        .map(|p| p.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Parse { .. }
            | Error::InvalidGraph(_)
            | Error::NodeOutOfRange { .. }
            | Error::InvalidParameter(_)
            | Error::WindowTooLarge { .. }
            | Error::SeriesTooShort { .. } => ErrorClass::Usage,
            Error::NotStronglyConnected(_)
            | Error::NotSymmetrizable(_)
            | Error::SymmetryResidual { .. }
            | Error::NoTargetMode { .. }
            | Error::Overdamped { .. } => ErrorClass::Model,
            Error::Divergent { .. }
            | Error::UnstableStep { .. }
            | Error::NonFinite { .. }
            | Error::Eigen(_) => ErrorClass::Numeric,
            Error::Io(_) | Error::Json(_) | Error::Csv(_) => ErrorClass::Io,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
