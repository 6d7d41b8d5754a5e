//! Perturbation paths that move Lyapunov graphs of cyclic cocycles.
//!
//! Raising goes through [`raise_graph`]: complex pairs are removed, a zigzag
//! plan of single-coordinate moves is realized by mixing neighbouring
//! exponents, and a diagonal adjustment lands on the target. Lowering goes
//! through [`separate_exponents`] and [`realize_graph`].

mod adjust;
mod band;
pub mod error;
pub mod finite_order;
mod mix;
pub mod path;
mod raise;
pub mod realify;
pub mod separation;

pub use adjust::adjust_spectrum;
pub use error::{PerturbError, Result};
pub use finite_order::{finite_order_perturbation, FiniteOrder};
pub use mix::{mix_two_exponents, mix_with, radius_shrink, MixOptions, RadiusShrink};
pub use path::{EngineSchedule, PathAudit, PerturbationPath};
pub use raise::{raise_graph, RaiseOptions, REACH_TOL, TARGET_TOL};
pub use realify::make_eigenvalues_real;
pub use separation::{
    align_flags, norm_to_radius, realize_graph, separate_exponents, two_jacobians, z_scores, AlignOptions,
    FlagAlignment, JacobianCheck, RadiusAlignment, Realization, RealizeOptions, SeparateOptions, Separation,
    ZScoreTable,
};
