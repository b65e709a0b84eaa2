//! Finite-truncation verification toolkit for graded seminorm systems on
//! Fréchet sequence spaces.
//!
//! Every statement checked here concerns a finite box of coordinates and is
//! decided by exact rational arithmetic (or binary64 with documented
//! tolerances). The main entry points are:
//!
//! * [`seminorm`]: seminorm systems, including the weighted system built
//!   from a `ρ`-table on `ℕ³`;
//! * [`operator`] and [`pelczynski`]: splitting an approximating family of
//!   finite-rank operators into a rank-one schedule, and the basis space,
//!   embedding and projection built from it;
//! * [`vogt`]: nuclearity, norm positivity and approximation-failure
//!   witnesses for the `ρ`-weighted space;
//! * [`normability`]: sequential diagnostics for injective extensions and
//!   countable normability.

pub mod error;
pub mod instances;
pub mod linalg;
pub mod normability;
pub mod operator;
pub mod pelczynski;
pub mod polyhedral;
pub mod sampling;
pub mod scalar;
pub mod seminorm;
pub mod space;
pub mod vogt;

pub use error::{Error, Result};
pub use num_rational::BigRational;
pub use scalar::{Scalar, ScalarMode};
