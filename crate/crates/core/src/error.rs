use num_complex::Complex64;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error(
        "box half-width T = {box_half_width} is below the dealiasing bound {required:.6} for {form} kernels (R = {radius})"
    )]
    Aliasing {
        box_half_width: f64,
        required: f64,
        radius: f64,
        form: &'static str,
    },

    #[error("mode count {0} is even; apply the even-N reduction first")]
    EvenModes(usize),

    #[error("size mismatch: expected {expected} entries, found {found}")]
    SizeMismatch { expected: usize, found: usize },

    #[error("Hermitian symmetry violated: relative imaginary residue {0:e}")]
    HermitianViolation(f64),

    #[error("filter index {beta} outside [-{n}, {n}]")]
    FilterIndex { n: i64, beta: i64 },

    #[error("invalid kernel: {0}")]
    InvalidKernel(String),

    #[error("operation requires a low-rank factored kernel")]
    NotFactored,

    #[error("grid too large for the brute-force oracle: {0}")]
    OracleTooLarge(String),

    #[error("non-finite value in Runge-Kutta stage {stage} at t = {time}")]
    NonFinite {
        time: f64,
        stage: usize,
        state: Box<Vec<Complex64>>,
    },

    #[error("positivity error is undefined for an all-zero state")]
    ZeroState,

    #[error("reference norm is zero")]
    ZeroNorm,

    #[error("convergence table: {0}")]
    Convergence(String),

    #[error("projection quadrature did not converge: {0}")]
    Projection(String),

    #[error("invalid setup: {0}")]
    Setup(String),

    #[error("kernel cache: {0}")]
    Cache(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
