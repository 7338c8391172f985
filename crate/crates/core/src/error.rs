use iap_ilp::IlpError;

#[derive(Debug, thiserror::Error)]
pub enum IapError {
    #[error("the model needs at least one action")]
    NoActions,
    #[error("the model needs at least one register")]
    NoRegisters,
    #[error("duplicate name `{0}`")]
    DuplicateName(String),
    #[error("unknown action `{0}`")]
    UnknownAction(String),
    #[error("unknown register `{0}`")]
    UnknownRegister(String),
    #[error("action `{action}` is statically inapplicable: lower bound above upper bound on `{register}`")]
    EmptyBounds { action: String, register: String },
    #[error("goal action `{0}` must have zero effects")]
    GoalHasEffects(String),
    #[error("situation has {got} values, the model has {expected} registers")]
    SituationSize { expected: usize, got: usize },
    #[error("integer overflow: {0}")]
    Overflow(String),
    #[error("invalid plan: {0}")]
    InvalidPlan(String),
    #[error("invalid multi-set: {0}")]
    InvalidMultiSet(String),
    #[error("matrix is {rows}x{cols} but there are {copies} copies")]
    DimensionMismatch {
        rows: usize,
        cols: usize,
        copies: usize,
    },
    #[error("MvPOP axiom violated: {0}")]
    Axiom(String),
    #[error("more than {limit} linearizations (at least {found} found)")]
    EnumerationLimit { limit: usize, found: usize },
    #[error("encoding error: {0}")]
    Encoding(String),
    #[error("objective with defaults is unbounded; add hard preconditions that bound it")]
    UnboundedDefaults,
    #[error("{0}")]
    Precondition(String),
    #[error("soundness failure: {0}")]
    Soundness(String),
    #[error("malformed problem file at line {line}, column {column}: {message}")]
    Json {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("problem file: {0}")]
    Schema(String),
    #[error(transparent)]
    Ilp(#[from] IlpError),
}

pub type Result<T> = std::result::Result<T, IapError>;
