use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: malformed record: {reason}")]
    MalformedRecord { line: usize, reason: String },

    #[error("line {line}: {record} references missing id `{missing}`")]
    DanglingReference {
        line: usize,
        record: String,
        missing: String,
    },

    #[error("line {line}: duplicate content id `{id}`")]
    DuplicateContentId { line: usize, id: String },

    #[error("line {line}: {reason}")]
    InvalidTarget { line: usize, reason: String },

    #[error("corpus has no nonempty document")]
    EmptyCorpus,

    #[error("topic has no usable words after preprocessing")]
    EmptyTopic,

    #[error("relevance must be non-negative, got {0}")]
    NegativeRelevance(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("graph has no nodes")]
    EmptyGraph,

    #[error("{method} did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence {
        method: String,
        iterations: usize,
        residual: f64,
    },

    #[error("graph has no edges; eigenvector is the zero vector")]
    ZeroVector,

    #[error("unknown user `{0}`")]
    UnknownUser(String),

    #[error("unsupported format `{0}`")]
    UnsupportedFormat(String),

    #[error("unknown method `{0}`")]
    UnknownMethod(String),

    #[error("budget infeasible: {required} influencers needed for targeted sub-groups, budget is {budget}")]
    BudgetInfeasible {
        required: usize,
        budget: usize,
        partial: Box<crate::campaign::CampaignPlan>,
    },

    #[error("series have different lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),

    #[error("series has zero variance")]
    ZeroVariance,

    #[error("no relevant users in labels")]
    NoRelevantUsers,

    #[error("{context}: {reason}")]
    Parse { context: String, reason: String },

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn parse(context: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Parse {
            context: context.into(),
            reason: reason.into(),
        }
    }
}
