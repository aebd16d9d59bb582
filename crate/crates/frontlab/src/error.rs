use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("kernel narrower than one cell: scale {scale} < dx/2 = {half_dx}")]
    Resolution { scale: f64, half_dx: f64 },

    #[error("inconsistent discretization: kernel dx {kernel_dx} != field dx {field_dx}")]
    InconsistentDiscretization { kernel_dx: f64, field_dx: f64 },

    #[error("resource limit: {0}")]
    Resource(String),

    #[error("domain error: u = {u} outside [-1, 2]")]
    Domain { u: f64 },

    #[error("stiffness: step size underflow at t = {t}")]
    Stiffness { t: f64 },

    #[error("configuration error: {0}")]
    Configuration(String),

    #[error("config violations:\n{}", .0.join("\n"))]
    ConfigViolations(Vec<String>),

    #[error("tracking lost: level {level} not crossed")]
    TrackingLost { level: f64 },

    #[error("ill-conditioned speed: |u_x| = {slope} below floor {floor} at level {level}")]
    IllConditionedSpeed { slope: f64, floor: f64, level: f64 },

    #[error("fit window error: {0}")]
    FitWindow(String),

    #[error("non-convergence: {what} (trailing change {trailing:e} after t = {t})")]
    Convergence { what: String, trailing: f64, t: f64 },

    #[error("NaN detected at t = {t}, node {node}; diagnostic dump at {dump}")]
    NanAbort { t: f64, node: usize, dump: String },

    #[error("shift bracket not found: {0}")]
    WindowTooSmall(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
