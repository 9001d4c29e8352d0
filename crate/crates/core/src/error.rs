use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("poset has {n} elements, exceeding the cap of {cap}")]
    TooLarge { n: usize, cap: usize },

    #[error("invalid poset: {0}")]
    InvalidPoset(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("prime map is not a bijection on 0..{n}: {detail}")]
    NotBijective { n: usize, detail: String },

    #[error("not a lattice: {0}")]
    NotALattice(String),

    #[error("map `{map}` is not monotone: {x} <= {y} but image({x}) !<= image({y})")]
    NotMonotone { map: String, x: usize, y: usize },

    #[error("map `{map}` is not additive: {detail}")]
    NotAdditive { map: String, detail: String },

    #[error("negative rate {rate} for map `{map}`")]
    NegativeRate { map: String, rate: String },

    #[error("generator invalid: {0}")]
    InvalidGenerator(String),

    #[error("kernel is not stochastic: {0}")]
    NotStochastic(String),

    #[error("tolerance {tol:e} unreachable within {cap} terms")]
    ToleranceUnreachable { tol: f64, cap: usize },

    #[error("closure exceeded the cap of {cap} states")]
    ClosureTooLarge { cap: usize },

    #[error("enumeration budget exceeded: {needed} candidates > {budget}")]
    BudgetExceeded { needed: u128, budget: u128 },

    #[error("time {t} outside horizon [{s}, {u}]")]
    Horizon { t: f64, s: f64, u: f64 },

    #[error("M-set violates the closure property at ({i}, {j}) -> ({k}, {l})")]
    MSetProperty { i: usize, j: usize, k: usize, l: usize },

    #[error("function is not monotone: f({x}) > f({y}) with {x} <= {y}")]
    FunctionNotMonotone { x: usize, y: usize },

    #[error("spin system is not attractive: {0}")]
    NotAttractive(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
