use thiserror::Error;

/// Contract violations raised anywhere in the pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("operator is not Hermitian (max residual {residual:.3e})")]
    NotHermitian { residual: f64 },

    #[error("operator is not unitary (max residual {residual:.3e})")]
    NotUnitary { residual: f64 },

    #[error("sharpness eta = {0} is outside [0, 1]")]
    EtaOutOfRange(f64),

    #[error("axis is not a unit vector (norm {norm})")]
    NonUnitAxis { norm: f64 },

    #[error("axis has y-component {y}; joint parameters are only defined for axes in the z-x plane")]
    AxisOutOfPlane { y: f64 },

    #[error("negative radicand {radicand:.3e} at eta = {eta}: pair is outside the compatibility window")]
    NegativeRadicand { eta: f64, radicand: f64 },

    #[error("effect {label} has eigenvalues ({min:.3e}, {max:.3e}) outside [0, 1]")]
    EffectInvalid { label: String, min: f64, max: f64 },

    #[error("joint POVMs do not share a common eta ({0:?})")]
    EtaMismatch(Vec<f64>),

    #[error("effect is not rank-1 (smaller eigenvalue {smaller:.3e})")]
    NotRank1 { smaller: f64 },

    #[error("effect is zero and has no rank-1 form")]
    ZeroEffect,

    #[error("stage {stage} requires chi = {chi} > 1; ordering is infeasible")]
    ChiOutOfRange { stage: usize, chi: f64 },

    #[error("pass-through operator before stage {stage} is ill-conditioned (inverse norm {norm:.3e})")]
    IllConditioned { stage: usize, norm: f64 },

    #[error("invalid qubit state: {0}")]
    InvalidState(String),

    #[error("invalid sweep range: {0}")]
    InvalidSweep(String),

    #[error("sigma must be positive (got {0})")]
    NonPositiveSigma(f64),

    #[error("shot count must be at least 1")]
    ZeroShots,

    #[error("wave-plate solver did not converge (residual {residual:.3e})")]
    SolverFailed { residual: f64 },

    #[error("contract `{contract}` failed: {detail}")]
    ContractFailed { contract: &'static str, detail: String },

    #[error("configuration error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
