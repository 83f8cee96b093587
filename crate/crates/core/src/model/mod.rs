//! Model parameterization, grid-sampled fields, and the variable
//! transformations that take the chemotaxis model to its conservation-law
//! form.

mod compat;
mod field;
mod params;
mod transform;

pub use compat::{check_compatibility, CompatibilityReport, DEFAULT_COMPATIBILITY_TOL};
pub use field::{Field, SpatialGrid, State};
pub use params::{nondimensionalize, Interval, ModelParams, PhysicalParams, ScaleFactor, ScalingReport, TheoryFlag, Variant};
pub use transform::{cole_hopf_forward, cole_hopf_inverse};
