use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("malformed graph (line {line}): {reason}")]
    MalformedGraph { line: usize, reason: String },

    #[error("invalid player set: {0}")]
    InvalidPlayerSet(String),

    #[error("regex syntax error at position {position}: {message}")]
    RegexSyntax { position: usize, message: String },

    #[error("symbol `{0}` is not in the alphabet")]
    AlphabetMismatch(String),

    #[error("query syntax error: {0}")]
    QuerySyntax(String),

    #[error("invalid binding: {0}")]
    InvalidBinding(String),

    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),

    #[error("unknown player `{0}`")]
    UnknownPlayer(String),

    #[error("enumeration exceeded the configured cap of {cap}")]
    EnumerationOverflow { cap: usize },

    #[error("search exceeded the node budget of {budget}")]
    BudgetExceeded { budget: u64 },

    #[error("{needed} samples needed, above the limit of {limit}")]
    TooManySamples { needed: u64, limit: u64 },

    #[error("the game has no players")]
    NoPlayers,

    #[error("non-disjoint matching structure: {0}")]
    NonDisjointStructure(String),

    #[error(
        "multiplicative approximation requires finite atom languages; atom {atom} is infinite"
    )]
    InfiniteLanguage { atom: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("method {method} is not applicable: {reason}")]
    NotApplicable {
        method: &'static str,
        reason: String,
    },
}
