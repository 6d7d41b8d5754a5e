//! The combinatorial layer on convex Lyapunov graphs: the majorization
//! order, graph indices, admissible index intervals and zigzag paths of
//! single-coordinate Robin Hood moves.

pub mod error;
pub mod order;
pub mod zigzag;

pub use error::{MajorizationError, Result};
pub use order::{admissible_indices, graph_index, majorization_cmp, nearly_affine_bound, GraphIndex, Majorization};
pub use zigzag::{area_between, step_bound, zigzag_path, GraphPathPlan};
