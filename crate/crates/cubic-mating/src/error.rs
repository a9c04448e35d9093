use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("degenerate parameter: {0}")]
    Degenerate(String),
    #[error("point not in basin: {0}")]
    NotInBasin(String),
    #[error("branch ambiguity: {0}")]
    BranchAmbiguity(String),
    #[error("unresolved Newton basin labeling: {0}")]
    UnresolvedLabeling(String),
    #[error("graph construction failed: {0}")]
    GraphConstruction(String),
    #[error("itinerary ambiguity overflow at step {step}: {labels} labels")]
    AmbiguityOverflow { step: usize, labels: usize },
    #[error("branch selection failed at depth {depth}: {msg}")]
    BranchSelection { depth: usize, msg: String },
    #[error("source membership failed: {0}")]
    SourceMembership(String),
    #[error("insufficient samples: {landed} of {drawn} rays landed")]
    InsufficientSamples { landed: usize, drawn: usize },
    #[error("not in component: {0}")]
    NotInComponent(String),
    #[error("continuation failed at r = {last_r}: {msg}")]
    ContinuationFailure { last_r: f64, msg: String },
    #[error("root found in wrong copy: {0}")]
    WrongBasin(String),
    #[error("no convergence: {0}")]
    NoConvergence(String),
    #[error("unsupported parameter: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
