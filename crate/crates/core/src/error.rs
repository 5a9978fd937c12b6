use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("capacity exceeded: {0}")]
    Capacity(String),
    #[error("memory budget exceeded: need {needed} bytes, budget is {budget} bytes")]
    MemoryBudget { needed: u64, budget: u64 },
    #[error(
        "mean contraction rate is zero; e_n is undefined, bin n*Lambda_n with the raw axis instead"
    )]
    ZeroMeanLambda,
    #[error("insufficient negative fluctuations: no p > 0 has both +p and -p cells admissible")]
    InsufficientNegativeFluctuations,
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),
    #[error(
        "observable is not odd under {scheme}: phi({region}) = {value}, phi(Q{region}) = {image}"
    )]
    NotOdd {
        scheme: String,
        region: String,
        value: f64,
        image: f64,
    },
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
