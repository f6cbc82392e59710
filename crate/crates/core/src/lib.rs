//! Hierarchical synthesis of sampled-time feedback controllers for
//! continuously differentiable control systems under LTL specifications.
//!
//! The problem is decomposed into three layers:
//!
//! 1. [`ltl`] solves the LTL planning problem on a small transition system
//!    over the regions of interest only, producing a prefix-suffix accepting
//!    path.
//! 2. [`grid`] connects each pair of consecutive regions by a discrete plan
//!    in the partitioned workspace, avoiding obstacles.
//! 3. [`refine`] synthesizes a controller per plan by abstraction
//!    refinement, with transitions over-approximated by the mixed-monotone
//!    embedding in [`reach`].
//!
//! [`pipeline`] ties the layers together from a scenario configuration and
//! [`simulate`] closes the loop on the continuous model.

pub mod error;
pub mod export;
pub mod grid;
pub mod interval;
pub mod ltl;
pub mod pipeline;
pub mod reach;
pub mod refine;
pub mod scenario;
pub mod simulate;

pub use error::PipelineError;
pub use interval::{GridPartition, IntervalBox};
pub use reach::{over_approximate, ReachResult, SystemModel};
