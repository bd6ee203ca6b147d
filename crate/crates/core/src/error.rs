use alloc::string::String;

/// Which end of a bracket a one-sided minimization ran into.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BracketSide {
    Lower,
    Upper,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("{op}: argument outside domain: {detail}")]
    Domain { op: &'static str, detail: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("quadrature did not converge (value {value:e}, error estimate {err_est:e}, {subdivisions} subdivisions)")]
    Quadrature { value: f64, err_est: f64, subdivisions: usize },

    #[error("no interior minimum in bracket: objective monotone towards the {side:?} end")]
    NoInteriorMinimum { side: BracketSide, x: f64 },

    #[error("{op}: {detail}")]
    Numerical { op: &'static str, detail: String },

    #[error("{op}: estimator degenerate ({detail})")]
    Degenerate { op: &'static str, detail: String },
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn domain(op: &'static str, detail: impl Into<String>) -> Error {
    Error::Domain {
        op,
        detail: detail.into(),
    }
}

pub(crate) fn numerical(op: &'static str, detail: impl Into<String>) -> Error {
    Error::Numerical {
        op,
        detail: detail.into(),
    }
}
