use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("grid size {0} is not a power of two >= 4")]
    GridSize(usize),

    #[error("domain length must be positive and finite, got {0}")]
    GridLength(f64),

    #[error("field has {got} samples, grid expects {expected}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("multiplier `{name}` is not finite at wavenumber {xi}")]
    InvalidMultiplier { name: String, xi: f64 },

    #[error("band {band} needs |xi| up to {needed:.3} but the grid resolves {resolved:.3}")]
    Resolution { band: i32, needed: f64, resolved: f64 },

    #[error("need at least {needed} snapshots, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("curve does not close: horizontal period ratio {ratio:.4}")]
    NonClosingCurve { ratio: f64 },

    #[error("curve nearly self-intersects: min separation {separation:.3e}")]
    CurveDegeneracy { separation: f64 },

    #[error("{solver} did not converge after {iterations} iterations, residual {residual:.3e}")]
    SolverDivergence { solver: &'static str, iterations: usize, residual: f64 },

    #[error("antiderivative input has mean {mean:.3e} (norm {norm:.3e})")]
    Antiderivative { mean: f64, norm: f64 },

    #[error("simulation blew up at t = {t}")]
    Blowup { t: f64 },

    #[error("time step {dt:.3e} exceeds the stability cap {cap:.3e}")]
    StepTooLarge { dt: f64, cap: f64 },

    #[error("characteristic flow degenerates: Jacobian {jacobian:.3e} at t = {t:.4e}")]
    FlowDegeneracy { jacobian: f64, t: f64 },

    #[error("phase assembly residual {residual:.3e} exceeds tolerance {tolerance:.1e}")]
    PhaseAssembly { residual: f64, tolerance: f64 },

    #[error("Neumann series ratio {ratio:.3} does not contract; band too low")]
    BandTooLow { ratio: f64 },

    #[error("oscillatory quadrature did not converge: last change {change:.3e}")]
    Quadrature { change: f64 },

    #[error("observer failed: {0}")]
    Observer(String),

    #[error("i/o failure: {0}")]
    Io(String),

    #[error("window or band mismatch: {0}")]
    WindowMismatch(String),

    #[error("requested time {t} lies outside [{t0}, {t1}]")]
    TimeOutOfRange { t: f64, t0: f64, t1: f64 },
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
