use crate::solver::SimState;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("non-finite sample at index {0}")]
    NonFinite(usize),

    #[error("{name} = {value} is outside {range}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("blow-up at t = {time}: {reason}")]
    BlowUp {
        time: f64,
        reason: String,
        last_good: Box<SimState>,
    },

    #[error("trajectory: {0}")]
    Trajectory(String),

    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("invalid argument: {0}")]
    Invalid(String),

    #[error("format: {0}")]
    Format(String),

    #[error("config: {0}")]
    Config(String),

    #[error("no bundle at {}", .0.display())]
    NoBundle(std::path::PathBuf),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_range(
    name: &'static str,
    value: f64,
    range: &'static str,
    ok: bool,
) -> Result<()> {
    if ok && value.is_finite() {
        Ok(())
    } else {
        Err(Error::OutOfRange { name, value, range })
    }
}
