//! Planning with learned object importance.
//!
//! A relational graph network scores every object of a planning problem;
//! the incremental planner then plans on the objects scoring above a
//! geometrically decreasing threshold until the plan it finds also solves
//! the original problem.

pub mod benchgen;
#[cfg(not(target_arch = "wasm32"))]
pub mod experiment;
pub mod importance;
pub mod labeling;
pub mod planner;
pub mod reduction;
pub mod runtime;
pub mod strips;
