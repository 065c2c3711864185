use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (‖M − M*‖ = {residual:.3e})")]
    NotHermitian { residual: f64 },
    #[error("matrix is not positive semidefinite (eigenvalue {eigenvalue:.3e} below {limit:.3e})")]
    NotPsd { eigenvalue: f64, limit: f64 },
    #[error("matrix is numerically singular (σ_min/σ_max = {ratio:.3e})")]
    Singular { ratio: f64 },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("non-finite entry in {0}")]
    NonFinite(&'static str),
    #[error("NotCommuting: ‖A1·A2 − A2·A1‖ = {residual:.3e} exceeds {limit:.1e}")]
    NotCommuting { residual: f64, limit: f64 },
    #[error("NotContraction: {0}")]
    NotContraction(String),
    #[error("defect injectivity flags disagree (D_A injective: {defect}, D_A* injective: {defect_star})")]
    InjectivityMismatch { defect: bool, defect_star: bool },
    #[error("Koszul complex property violated: ‖B1·B0‖ = {residual:.3e}")]
    ComplexPropertyViolated { residual: f64 },
    #[error("simultaneous triangularization failed after all retries and the staircase fallback")]
    TriangularizationFailed,
    #[error("resolvent is singular at the requested point")]
    ResolventSingular,
    #[error("hypothesis violated: {0}")]
    HypothesisViolated(&'static str),
    #[error("point lies outside the open unit ball (|z|² = {0})")]
    OutsideBall(f64),
    #[error("bad lambda: {0}")]
    BadLambda(String),
    #[error("validation failed: {0}")]
    ValidationFailed(String),
    #[error("defect operator is singular")]
    DefectSingular,
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
