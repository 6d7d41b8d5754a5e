//! Cyclic linear cocycles: overflow-safe period products, Lyapunov graphs,
//! exterior powers, principal angles and dominated splittings.
//!
//! A cocycle here is a finite sequence of invertible matrices composed around
//! a periodic orbit. Spectral data of the period product are always taken from
//! per-phase orthonormal frames ([`schur::PeriodicSchur`]), never from an
//! explicitly multiplied product.

pub mod angle;
pub mod cocycle;
pub mod domination;
pub mod error;
pub mod exterior;
pub mod graph;
pub mod io;
pub mod linalg;
pub mod product;
pub mod schur;

pub use angle::{principal_angle, quotient_angle, Subspace};
pub use cocycle::CyclicCocycle;
pub use domination::{
    candidate_splitting, check_domination, extend_over, finest_splitting, restrict_and_quotient, Block,
    DominationReport, InvariantSplitting, SplittingFrames,
};
pub use error::{CoreError, Result};
pub use exterior::exterior_power;
pub use graph::{finite_time_graph, lyapunov_graph, LyapunovGraph};
pub use linalg::Matrix;
pub use product::{period_product, StabilizedProduct};
pub use schur::PeriodicSchur;
