use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("rational arithmetic overflowed the 128-bit range")]
    Overflow,
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("invalid number `{0}`")]
    InvalidNumber(String),
    #[error("invalid die configuration ({0}, {1}, {2}): pair counts must sum to 3")]
    InvalidConfig(u8, u8, u8),
    #[error("depth {depth} out of range 1..={max}")]
    DepthOutOfRange { depth: usize, max: usize },
    #[error("probability {0} outside the open interval (0, 1)")]
    DegenerateProbability(f64),
    #[error("probability {0} outside [0, 1]")]
    InvalidProbability(String),
    #[error("sequence is empty")]
    EmptySequence,
    #[error("invalid symbol {symbol:?} at position {position} (line {line}, column {column})")]
    InvalidSymbol {
        symbol: char,
        position: usize,
        line: usize,
        column: usize,
    },
    #[error("unknown scenario {0}; expected 1, 2 or 3")]
    InvalidScenario(u8),
    #[error("unknown mutation rule `{0}`; expected none, copy or increment")]
    InvalidRule(String),
    #[error("class {0} is not closed")]
    ClassNotClosed(usize),
    #[error("class index {0} out of range")]
    NoSuchClass(usize),
    #[error("chain has no closed class")]
    NoClosedClass,
    #[error("singular linear system")]
    SingularSystem,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
