use thiserror::Error;

/// Errors raised by the steppers, solvers and diagnostics.
#[derive(Error, Debug, Clone, PartialEq)]
pub enum NsfdError {
    #[error("state component {index} is not strictly positive ({value})")]
    NonPositiveState { index: usize, value: f64 },

    #[error("non-finite value produced in component {index}")]
    NonFiniteStep { index: usize },

    #[error("correction term {which}[{index}] is negative ({value}); the splitting is outside its valid domain")]
    NegativeCorrection {
        which: &'static str,
        index: usize,
        value: f64,
    },

    #[error("nonlinear solve did not converge after {iterations} iterations (residual {residual})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("time span {span} is not an integer multiple of dt = {dt}")]
    NonIntegerStepCount { span: f64, dt: f64 },

    #[error("step {step} failed: {source}")]
    Step {
        step: usize,
        #[source]
        source: Box<NsfdError>,
    },

    #[error("condition undefined: F[{component}] vanishes at the sample point")]
    ConditionUndefined { component: usize },

    #[error("split identity violated: max residual {residual}")]
    SplitInconsistent { residual: f64 },

    #[error("decomposition produced a negative production term f[{component}] = {value}")]
    NegativeProduction { component: usize, value: f64 },

    #[error("parameter out of range: {0}")]
    ParamOutOfRange(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("trajectory left the positive orthant at t = {time}")]
    DomainExit { time: f64 },

    #[error("shooting residuals at the bracket ends have the same sign ({lo}, {hi})")]
    NoBracket { lo: f64, hi: f64 },
}

impl NsfdError {
    /// Wraps the error with the index of the step that produced it.
    pub fn at_step(self, step: usize) -> Self {
        NsfdError::Step {
            step,
            source: Box::new(self),
        }
    }

    /// Innermost error, with step wrappers removed.
    pub fn root(&self) -> &NsfdError {
        match self {
            NsfdError::Step { source, .. } => source.root(),
            other => other,
        }
    }
}

pub type Result<T, E = NsfdError> = std::result::Result<T, E>;
