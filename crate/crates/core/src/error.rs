use thiserror::Error;

use crate::model::ParamName;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter {name}: {value} ({reason})")]
    InvalidParameter {
        name: ParamName,
        value: f64,
        reason: &'static str,
    },

    #[error("unknown parameter name `{0}`")]
    UnknownParameter(String),

    /// The Jacobian contains S^(r-1) and cannot be evaluated at S = 0.
    #[error("Jacobian is singular at S = 0; the equilibrium cannot be analysed by linearisation")]
    SingularJacobian,

    #[error("equilibrium {0} is not feasible")]
    InfeasibleEquilibrium(String),

    #[error("invalid initial condition: {0}")]
    InvalidInitialCondition(String),

    #[error("invalid options: {0}")]
    InvalidOptions(String),

    #[error("step size underflow at t = {t}")]
    StepUnderflow { t: f64 },

    #[error("empty parameter range [{lo}, {hi}]")]
    EmptyRange { lo: f64, hi: f64 },

    #[error("not a Hopf point: {0}")]
    NotAHopfPoint(String),

    #[error("degenerate eigenvector (norm {0:e})")]
    DegenerateEigenvector(f64),

    #[error("seed is not on a codimension-one locus: {0}")]
    SeedNotOnLocus(String),

    #[error("Newton iteration diverged: {0}")]
    NewtonDivergence(String),

    #[error("no imaginary eigenvalue pair: -C12*C21 = {0}")]
    NoImaginaryPair(f64),

    #[error("config error: {0}")]
    Config(String),
}

impl Error {
    /// Numerical failures map to CLI exit code 2, everything else to 1.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::SingularJacobian
                | Error::StepUnderflow { .. }
                | Error::NotAHopfPoint(_)
                | Error::DegenerateEigenvector(_)
                | Error::SeedNotOnLocus(_)
                | Error::NewtonDivergence(_)
                | Error::NoImaginaryPair(_)
        )
    }
}
