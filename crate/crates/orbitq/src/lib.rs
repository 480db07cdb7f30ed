//! Geometric quantization data of coadjoint orbits of hyperbolic elements in
//! matrix reductive Lie algebras.
//!
//! The crate computes, for an orbit G·η of a hyperbolic functional η:
//! the grading element X₀ and the ad(X₀)-grading, the polarization u and its
//! Levi factor l, the characters δ and φ, Hamiltonians and Kirillov forms,
//! a principal-bundle connection with its curvature and moment map, the
//! infinitesimal character of the attached representation through an
//! enveloping-algebra projection, and the holonomy scalar κ by three
//! independent routes (direct evaluation, fixed-point transport ODE, and an
//! action integral over a sweep 2-chain), cross-validating everything
//! numerically.
//!
//! Start with the runnable examples:
//!
//! ```text
//! cargo run --example orbit_grading
//! cargo run --example infinitesimal_character
//! cargo run --example kappa_routes
//! cargo run --example action_integral_convergence
//! cargo run --example compact_character
//! cargo run --example sections_and_transport
//! cargo run --example curvature_check
//! cargo run --example custom_algebra
//! ```
//!
//! or with the bundled CLI:
//!
//! ```text
//! orbitq <orbit|infchar|kappa|character|verify> --config cfg.json [--out report.json]
//! ```

pub mod error;
pub mod numerics;
pub mod liealg;
pub mod orbit;
pub mod uea;
pub mod flows;
pub mod config;
pub mod report;
pub mod verify;
pub mod cli;

pub use error::{OrbitqError, Result};
