//! Error type shared by all solver and transform modules.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Error, Debug)]
pub enum Error {
    #[error("grid too small: axis {axis} has {len} points, need at least {min}")]
    GridTooSmall {
        axis: &'static str,
        len: usize,
        min: usize,
    },

    #[error("CFL margin violated: dt = {dt:.6e} exceeds {limit:.6e} (safety {safety})")]
    CflViolation { dt: f64, limit: f64, safety: f64 },

    #[error("potential term too stiff for explicit stepping: dt^2 * max|a| = {value:.3e} >= 2")]
    StiffPotential { value: f64 },

    #[error("shape mismatch: expected {expected}, got {got}")]
    ShapeMismatch { expected: String, got: String },

    #[error("non-finite value detected at time step {step}")]
    NanDetected { step: usize },

    #[error("solution diverged at step {step}: growth factor {factor:.3e}")]
    Diverged { step: usize, factor: f64 },

    #[error("invalid boundary side token: {0}")]
    InvalidSide(String),

    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),

    #[error("bad field file: {0}")]
    BadFieldFile(String),

    #[error("field shape overflow: {0} values")]
    ShapeOverflow(u64),

    #[error(
        "flux remainder evaluated outside validity radius at (k={k}, j={j}, i={i}): |q| = {norm:.3e} > {radius:.3e}"
    )]
    ValidityRadius {
        k: usize,
        j: usize,
        i: usize,
        norm: f64,
        radius: f64,
    },

    #[error("epsilon {eps} exceeds the configured maximum {max}")]
    EpsilonTooLarge { eps: f64, max: f64 },

    #[error("fixed-point iteration not contracting; iterate distances: {history:?}")]
    NonContraction { history: Vec<f64> },

    #[error("fixed-point iteration exhausted {max_iter} iterations; last distance {last:.3e}")]
    MaxIterExhausted { max_iter: usize, last: f64 },

    #[error("semiclassical exponent overflow: |t + x.w|/h = {exponent:.1} exceeds {max:.1}")]
    ExponentOverflow { exponent: f64, max: f64 },

    #[error("semiclassical step unstable: need h > dt, got h = {h:.3e}, dt = {dt:.3e}")]
    SemiclassicalStep { h: f64, dt: f64 },

    #[error("wkb frequency unresolved: lambda * max(dx,dy) = {value:.3} > 0.5")]
    UnresolvedFrequency { value: f64 },

    #[error("characteristic exits the padded halo at distance {distance:.3} (pad {pad:.3})")]
    CharacteristicExit { distance: f64, pad: f64 },

    #[error("point ({t:.3}, {x:.3}, {y:.3}) lies outside the grid")]
    PointOutsideGrid { t: f64, x: f64, y: f64 },

    #[error("direction vector must be unit length, |w| = {norm}")]
    NotUnitDirection { norm: f64 },

    #[error("vector {0:?} is not orthogonal to (1,w): inner product {1:.3e}")]
    NotSpacelikeSlice([f64; 3], f64),

    #[error("least squares underdetermined: {measurements} measurements for {unknowns} unknowns and no ridge term")]
    Underdetermined {
        measurements: usize,
        unknowns: usize,
    },

    #[error("all recovery points masked by the condition-number cap {cap:.1e}")]
    AllPointsMasked { cap: f64 },

    #[error("slope fit needs positive values, got {0}")]
    NonPositiveValue(f64),

    #[error("slope fit needs at least {need} pairs, got {got}")]
    TooFewPairs { need: usize, got: usize },

    #[error("incompatible data: {0}")]
    IncompatibleData(String),

    #[error("grids do not match: {0}")]
    GridMismatch(String),

    #[error("{stage} stage failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Wrap an error with the pipeline stage it occurred in.
    pub fn in_stage(self, stage: &'static str) -> Error {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }
}
