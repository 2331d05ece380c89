use thiserror::Error;

/// Crate-wide error type. Variants mirror the failure modes of the geometry,
/// discretization, solver and stability layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("boundary radius r(θ) = 1 + ε·ρ(θ) is not positive everywhere (min r = {min_r})")]
    NonStarShaped { min_r: f64 },

    #[error("shape has ε = {epsilon} > 0 but no Fourier modes")]
    EmptyShape { epsilon: f64 },

    #[error("point ({x}, {y}) is not strictly inside the domain")]
    NotInterior { x: f64, y: f64 },

    #[error("Newton refinement stalled; dense-scan value {fallback} used")]
    NewtonStall { fallback: f64 },

    #[error("derivative order ({i},{j}) exceeds the supported total order 4")]
    OrderTooHigh { i: usize, j: usize },

    #[error("field has {got} values but the grid has {expected} nodes")]
    GridMismatch { got: usize, expected: usize },

    #[error("L^p norm needs p ≥ 1, got {p}")]
    InvalidP { p: f64 },

    #[error("collocation system is numerically singular: {0}")]
    SingularSystem(String),

    #[error("solve did not meet residual tolerance: {what} = {value:e} > {tol:e}")]
    Unconverged { what: String, value: f64, tol: f64 },

    #[error("argmax of v lies on the boundary; shape is outside the admissible regime")]
    MaxOnBoundary,

    #[error("inequality `{name}` violated: lhs = {lhs:e}, rhs = {rhs:e}")]
    InequalityViolated { name: &'static str, lhs: f64, rhs: f64 },

    #[error("weighted Hessian integral {value:e} below {floor:e}; trace ratio undefined")]
    DegenerateDenominator { value: f64, floor: f64 },

    #[error("positivity certificate failed: min(u − c_Ω ψ²) = {min_w:e}")]
    CertificateViolated { min_w: f64 },

    #[error("only {kept} of {total} sweep points survive the noise floor (need ≥ 3)")]
    NoiseFloor { kept: usize, total: usize },

    #[error("dimension n = {n} is not supported (need n ≥ 2)")]
    BadDimension { n: i64 },

    #[error("invalid shape or config input: {0}")]
    BadInput(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
