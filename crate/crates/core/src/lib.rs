//! Numerical laboratory for the one-dimensional chemotaxis-growth system with
//! logarithmic sensitivity, in its parabolic-parabolic form
//!
//! ```text
//! u_t - (u v)_x = u_xx + u(1 - u)
//! v_t - (u^γ)_x = v_xx + (v²)_x
//! ```
//!
//! and its parabolic-hyperbolic form (no diffusion or boundary condition on
//! `v`), both driven by time-dependent Dirichlet data.
//!
//! The crate is organized bottom-up:
//!
//! * [`model`]: parameters, grids, fields, variable transformations.
//! * [`profiles`]: boundary signals, reference profiles, forcing budgets.
//! * [`solver`]: IMEX method-of-lines steppers and the run loop.
//! * [`diagnostics`]: deviation norms, entropies, dissipation, Grönwall ledger.
//! * [`lemmas`]: elementary inequality residuals and a deterministic fuzzer.
//! * [`harness`]: scenario configs, persistence, convergence studies, sweeps.

// `!(x > y)` is how NaN-rejecting checks are spelled throughout.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diagnostics;
pub mod error;
pub mod harness;
pub mod lemmas;
pub mod model;
pub mod profiles;
pub mod solver;
pub mod stencil;

pub use error::{Error, Result};
pub use model::{Field, Interval, ModelParams, SpatialGrid, State, Variant};
pub use profiles::{BoundaryData, BoundarySignal, ReferenceProfileSample};
pub use solver::{NumericsConfig, RunResult, RunStatus};
