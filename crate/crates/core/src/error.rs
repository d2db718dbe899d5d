use num_complex::Complex64;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("quadrature did not converge (estimated error {residual:e})")]
    Quadrature { residual: f64 },

    #[error("turning points reach radius {bound:.3}, too close to the matching radius {radius:.3}")]
    TurningPoint { radius: f64, bound: f64 },

    #[error("asymptotic seed error {estimate:e} above tolerance at radius {radius:.3}")]
    SeedAccuracy { radius: f64, estimate: f64 },

    #[error("step budget of {steps} exhausted at t = {t}")]
    StepBudget { steps: usize, t: f64 },

    #[error("non-finite state at t = {t} (matching radius {radius})")]
    NonFinite { t: f64, radius: f64 },

    #[error("matching radius did not settle: last change {change:e} at radius {radius:.3}")]
    RadiusLoop { radius: f64, change: f64 },

    #[error("f0 = {value:e} is too small at lambda = {at}; use the Wronskian path")]
    NearZeroF0 { at: Complex64, value: f64 },

    #[error("unit-coefficient residual {residual:e} above tolerance {tol:e}")]
    Normalization { residual: f64, tol: f64 },

    #[error("contour pinched: |value| = {value:e} near {at}")]
    ContourPinched { at: Complex64, value: f64 },

    #[error("winding sum {sum} is not close to an integer")]
    PhaseJump { sum: f64 },

    #[error("imaginary residue {residue:e} of -iC at lambda = {at} breaks the reality symmetry")]
    BrokenSymmetry { at: f64, residue: f64 },

    #[error("certification failed: {0}")]
    Certification(String),

    #[error("zero left the search window near lambda = {at}")]
    WindowExit { at: f64 },
}
