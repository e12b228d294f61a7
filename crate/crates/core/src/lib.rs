//! Numerical laboratory for a quadratically nonlinear wave equation on a
//! 2D rectangle: forward solvers, the small-amplitude expansion, the
//! input-output map, semiclassical and WKB probe families, the light-ray
//! transform, and the coefficient-recovery pipeline that ties them together.

pub mod coeffs;
pub mod error;
pub mod expansion;
pub mod field;
pub mod grid;
pub mod iomap;
pub mod lightray;
pub mod linear;
pub mod nlwf;
pub mod nonlinear;
pub mod norms;
pub mod ops;
pub mod probes;
pub mod recovery;

pub use coeffs::{
    BumpProfile, CoefficientSet, ConstantPotential, LinearPotential, MediumParams, Potential,
    RemainderSpec, SinSinPotential, TimeWindow,
};
pub use error::{Error, Result};
pub use field::{BoundaryRecord, SpaceTimeScalarField, SpaceTimeVectorField, SpatialField};
pub use grid::{Side, SpaceTimeGrid};
pub use iomap::IOData;
pub use linear::InitialBoundaryData;
pub use nonlinear::{Scheme, SolverOptions};
