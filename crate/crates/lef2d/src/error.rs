use std::fmt;

/// Errors produced by the solver suite.
#[derive(Debug)]
pub enum Error {
    /// Expression or coefficient-definition syntax error, with byte position.
    Parse {
        position: usize,
        message: String,
    },
    /// A coefficient evaluated to a negative value.
    NegativeCoefficient {
        r: f64,
        theta: f64,
        value: f64,
    },
    /// A coefficient evaluated to NaN or infinity.
    NonFiniteCoefficient {
        r: f64,
        theta: f64,
    },
    /// The weighted tail integral diverges; the integrability hypothesis fails.
    NonIntegrable {
        context: String,
    },
    /// The semi-infinite quadrature ran out of panels before converging.
    QuadratureStalled {
        context: String,
    },
    /// Doubling search failed to bracket the threshold.
    BracketingFailure {
        context: String,
    },
    /// An iteration reached its cap without meeting its tolerance.
    NoConvergence {
        context: String,
        iterations: usize,
        last_update: f64,
    },
    /// The relaxation solver did not reach the requested residual.
    LinearSolveFailure {
        sweeps: usize,
        residual: f64,
    },
    /// A monotone iterate decreased beyond tolerance; grid too coarse.
    MaxPrincipleViolation {
        defect: f64,
    },
    /// Input violated a documented contract (e.g. iterates outside the box).
    ContractBreach {
        message: String,
    },
    /// Deviations in the requested fit window sit below the noise floor.
    WindowTooFar {
        max_deviation: f64,
        noise_floor: f64,
    },
    /// A computed solution violated a bound it must satisfy.
    BoundViolation {
        message: String,
    },
    /// A parameter is outside its documented range.
    InvalidParameter {
        message: String,
    },
    /// Config-file error with 1-based line number.
    Config {
        line: usize,
        message: String,
    },
    Io(std::io::Error),
}

impl Error {
    pub fn invalid(message: impl Into<String>) -> Self {
        Error::InvalidParameter {
            message: message.into(),
        }
    }

    /// Machine-readable category, used in the CLI error JSON.
    pub fn category(&self) -> &'static str {
        match self {
            Error::Parse { .. } => "parse",
            Error::NegativeCoefficient { .. } => "negative_coefficient",
            Error::NonFiniteCoefficient { .. } => "non_finite_coefficient",
            Error::NonIntegrable { .. } => "non_integrable",
            Error::QuadratureStalled { .. } => "quadrature_stalled",
            Error::BracketingFailure { .. } => "bracketing_failure",
            Error::NoConvergence { .. } => "no_convergence",
            Error::LinearSolveFailure { .. } => "linear_solve_failure",
            Error::MaxPrincipleViolation { .. } => "max_principle_violation",
            Error::ContractBreach { .. } => "contract_breach",
            Error::WindowTooFar { .. } => "window_too_far",
            Error::BoundViolation { .. } => "bound_violation",
            Error::InvalidParameter { .. } => "invalid_parameter",
            Error::Config { .. } => "config",
            Error::Io(_) => "io",
        }
    }

    /// Process exit status for the CLI: 2 config/input, 3 non-integrable,
    /// 4 convergence failure, 5 verification failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse { .. }
            | Error::Config { .. }
            | Error::InvalidParameter { .. }
            | Error::NegativeCoefficient { .. }
            | Error::NonFiniteCoefficient { .. }
            | Error::WindowTooFar { .. }
            | Error::Io(_) => 2,
            Error::NonIntegrable { .. } | Error::QuadratureStalled { .. } => 3,
            Error::NoConvergence { .. }
            | Error::LinearSolveFailure { .. }
            | Error::BracketingFailure { .. } => 4,
            Error::MaxPrincipleViolation { .. }
            | Error::ContractBreach { .. }
            | Error::BoundViolation { .. } => 5,
        }
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Parse { position, message } => {
                write!(f, "parse error at byte {position}: {message}")
            }
            Error::NegativeCoefficient { r, theta, value } => write!(
                f,
                "coefficient is negative at r = {r}, theta = {theta}: {value}"
            ),
            Error::NonFiniteCoefficient { r, theta } => {
                write!(f, "coefficient is not finite at r = {r}, theta = {theta}")
            }
            Error::NonIntegrable { context } => {
                write!(f, "tail integral diverges: {context}")
            }
            Error::QuadratureStalled { context } => {
                write!(f, "quadrature did not converge: {context}")
            }
            Error::BracketingFailure { context } => {
                write!(f, "failed to bracket threshold: {context}")
            }
            Error::NoConvergence {
                context,
                iterations,
                last_update,
            } => write!(
                f,
                "{context}: no convergence after {iterations} iterations \
                 (last update {last_update:e})"
            ),
            Error::LinearSolveFailure { sweeps, residual } => write!(
                f,
                "linear solve stalled after {sweeps} sweeps (residual {residual:e})"
            ),
            Error::MaxPrincipleViolation { defect } => write!(
                f,
                "monotone iterate decreased by {defect:e}; refine the grid"
            ),
            Error::ContractBreach { message } => write!(f, "contract breach: {message}"),
            Error::WindowTooFar {
                max_deviation,
                noise_floor,
            } => write!(
                f,
                "fit window deviations ({max_deviation:e}) sit below the noise \
                 floor ({noise_floor:e}); choose smaller radii"
            ),
            Error::BoundViolation { message } => write!(f, "bound violation: {message}"),
            Error::InvalidParameter { message } => write!(f, "invalid parameter: {message}"),
            Error::Config { line, message } => write!(f, "config line {line}: {message}"),
            Error::Io(e) => write!(f, "io error: {e}"),
        }
    }
}

impl std::error::Error for Error {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            Error::Io(e) => Some(e),
            _ => None,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e)
    }
}

pub type Result<T> = std::result::Result<T, Error>;
