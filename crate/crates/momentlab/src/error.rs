use thiserror::Error;

/// Errors raised by calculus, connection and flow operations.
#[derive(Debug, Error)]
pub enum Error {
    #[error("top-degree form: exterior derivative of a degree-{degree} form on a {dims}-dimensional torus")]
    TopDegree { degree: usize, dims: usize },

    #[error("degree overflow: {lhs} + {rhs} exceeds the torus dimension {dims}")]
    DegreeOverflow { lhs: usize, rhs: usize, dims: usize },

    #[error("expected a degree-{expected} form, got degree {got}")]
    DegreeMismatch { expected: usize, got: usize },

    #[error("fields live on different grids: {0} vs {1}")]
    GridMismatch(String, String),

    #[error("form is not exact: closedness residual {closedness:.3e}, harmonic coefficients {harmonic:?}")]
    NotExact {
        closedness: f64,
        /// Offending constant Fourier coefficients, keyed by 1-based multi-index.
        harmonic: Vec<(Vec<usize>, f64)>,
    },

    #[error("2-form is not closed: d-residual {residual:.3e}")]
    NotClosed { residual: f64 },

    #[error("connection left the symplectic cone: positivity margin {margin:.3e}")]
    NotSymplectic { margin: f64 },

    #[error("curvatures differ by {residual:.3e} in sup norm; connections live on different fibres")]
    CurvatureMismatch { residual: f64 },

    #[error("2-form is not tangent to the fixed-volume locus: trace residual {residual:.3e}")]
    NotTangent { residual: f64 },

    #[error("identical connections: separation witness needs a ≠ a′")]
    IdenticalConnections,

    #[error("potential left the Kähler cone: density margin {margin:.3e}{}", advice_for_step(*.during_step))]
    LeftKahlerCone { margin: f64, during_step: bool },

    #[error("affine path t·φ exits the Kähler cone at t = {t} (margin {margin:.3e})")]
    PathLeftCone { t: f64, margin: f64 },

    #[error("flow did not reach residual {tol:.3e} by t = {max_t} (last residual {last_residual:.3e} after {steps} steps)")]
    NonConvergence {
        tol: f64,
        max_t: f64,
        last_residual: f64,
        steps: usize,
        trace: Vec<(f64, f64, f64)>,
    },

    #[error("prescribed density leaves the n = 1 Kähler cone (margin {margin:.3e}): θ too far from flat")]
    OracleOutOfCone { margin: f64 },

    #[error("vector is not tangent to S³: radial component {residual:.3e}")]
    NotTangentSphere { residual: f64 },

    #[error("non-scalar time-1 map — increase substeps (cross-sample variance {variance:.3e})")]
    NonScalarHolonomy { variance: f64 },

    #[error("holonomy did not stabilize after {doublings} substep doublings; trace: {trace:?}")]
    NoStabilization {
        doublings: usize,
        trace: Vec<(usize, f64, f64)>,
    },

    #[error("substeps {substeps} below the floor {floor} for {turns} turns")]
    TooFewSubsteps {
        substeps: usize,
        floor: usize,
        turns: i64,
    },

    #[error("column {name:?} not found; available columns: {available:?}")]
    MissingColumn {
        name: String,
        available: Vec<String>,
    },

    #[error("CSV has no data rows")]
    EmptyCsv,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn advice_for_step(during_step: bool) -> &'static str {
    if during_step {
        "; retry with a smaller dt"
    } else {
        ""
    }
}

pub type Result<T> = std::result::Result<T, Error>;
