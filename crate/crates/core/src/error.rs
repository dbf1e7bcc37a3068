use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("symbol `{0}` is defined twice")]
    DuplicateSymbol(String),
    #[error("permutation {0:?} is not a bijection of the alphabet")]
    NotBijective(Vec<usize>),
    #[error("symbol `{name}` has {found} sections, expected {expected}")]
    SectionCount {
        name: String,
        expected: usize,
        found: usize,
    },
    #[error("alphabet degree {0} is below 2")]
    DegreeTooSmall(usize),
    #[error("letter {letter} is outside the alphabet of degree {degree}")]
    LetterOutOfRange { letter: usize, degree: usize },
    #[error("alphabet degree {degree} exceeds the permutation enumeration cap {cap}")]
    DegreeTooLarge { degree: usize, cap: usize },
    #[error("depth {depth} exceeds the truncation cap for degree {degree}")]
    DepthTooLarge { depth: usize, degree: usize },
    #[error("element is not bounded: {0}")]
    NotBounded(String),
    #[error("tuple lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("conjugator graph has no surviving root vertex")]
    NoRoot,
    #[error("element is not finite-state within the budget of {0}")]
    ExceededCap(usize),
}
