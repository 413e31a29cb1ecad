//! Numerical toolkit for symplectic dynamics: Robbin–Salamon indices of
//! symplectic paths, Reeb and Hamiltonian flows with linearization, return
//! maps on global hypersurfaces of section, convexity and index-growth
//! certificates, Hamiltonian extensions of twist maps, and the closed-form
//! Brieskorn/Katok model flows.
//!
//! The crate is organized around the pipeline
//! `flow -> linearize -> reduce to a contact frame -> index`,
//! with independent closed-form oracles next to every numerical route.
//!
//! Heavy batch work (Monte-Carlo volumes, path batteries, orbit scans) is
//! data-parallel via `rayon` when the `parallel` feature is enabled
//! (default). Disable it for a fully sequential build:
//! `cargo build --no-default-features`.

pub mod certify;
pub mod error;
pub mod flow;
pub mod half;
pub mod katok;
pub mod linalg;
pub mod par;
pub mod section;
pub mod sympl;
pub mod twist;

pub use error::{Error, Result};
pub use half::HalfInt;

/// Coefficient of the primitive `lambda = LIOUVILLE_COEFF * sum(x dy - y dx)`
/// used for all flows, actions, periods and volumes on `R^4`. Every report
/// echoes this constant so numbers can be rescaled to other conventions.
pub const LIOUVILLE_COEFF: f64 = 0.5;

/// Human-readable tag for the convention constant, embedded in reports.
pub const LIOUVILLE_CONVENTION: &str = "lambda = 1/2 sum(x_j dy_j - y_j dx_j)";
