//! Upper and lower bounds for the constrained maximum-entropy sampling
//! problem (CMESP):
//!
//! ```text
//! z = max { ldet C[S,S] : |S| = s, A·x(S) ≤ b }
//! ```
//!
//! The crate computes certified upper bounds from the linx and factorization
//! (DDFact) relaxations under a general positive scaling vector Υ, evaluates
//! the BQP relaxation objective and its curvature in log Υ, tunes Υ in log
//! space, builds heuristic lower bounds, and fixes variables by probing.
//!
//! Everything here is pure computation on dense `f64` data, so the crate is
//! `no_std` and only needs `alloc`. File formats, random instance
//! generation and the command-line tools live in the `mesp` crate.
#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod bqp;
pub mod ddfact;
pub mod error;
pub mod fixing;
pub mod frank_wolfe;
pub mod heuristics;
pub mod instance;
pub mod linalg;
pub mod linx;
mod math;
pub mod oracle;
pub mod polytope;
pub mod relax;
pub mod scaling;
mod simplex;
pub mod tol;

pub use error::{Error, Result};
pub use instance::{Constraints, Instance, ScalingVector};
pub use linalg::{EigDecomp, Matrix, SymMatrix};
pub use polytope::{Pin, Polytope};
pub use relax::{BoundReport, Method, SolveOptions};
