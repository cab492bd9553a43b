use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("lattice with {points} points per axis cannot resolve truncation order {order} (need at least {need})")]
    Aliasing {
        points: usize,
        order: usize,
        need: usize,
    },

    #[error("s = {s} lies outside the history domain [-{tau}, 0]")]
    OutOfDomain { s: f64, tau: f64 },

    #[error("unsupported order {0}: only orders 0 through 2 are implemented")]
    UnsupportedOrder(usize),

    #[error("normal solve for mode {mode:?} is ill-conditioned (condition number {cond:.3e}); L is not hyperbolic enough")]
    IllConditioned { mode: Vec<i32>, cond: f64 },

    #[error("invalid parameters: {0}")]
    InvalidParameters(String),

    #[error("no sign change of the eigenvalue in [{lo}, {hi}]")]
    NoBracket { lo: f64, hi: f64 },

    #[error("delay {tau} is not an integer multiple of the step {h}")]
    StepAlignment { tau: f64, h: f64 },

    #[error("integration diverged at t = {t}: |z| = {modulus}")]
    Diverged { t: f64, modulus: f64 },

    #[error("phase undefined at t = {t}: |z| = {modulus}")]
    PhaseUndefined { t: f64, modulus: f64 },

    #[error("time {t} lies outside the recorded trajectory [{start}, {end}]")]
    OutsideTrajectory { t: f64, start: f64, end: f64 },

    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization: {0}")]
    Serde(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
