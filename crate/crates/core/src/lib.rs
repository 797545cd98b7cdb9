//! Finite models of metric trees and Gromov–Hausdorff estimates between them.
//!
//! The crate is organised bottom-up:
//!
//! - [`metric`]: finite metric spaces, Hausdorff distance, four-point defect.
//! - [`tree`]: weighted trees with cached path metrics, balls, wedge sums,
//!   edge replacement, subdivision and degree-≤2 decomposition.
//! - [`families`]: comb trees, star trees and their parameter spaces.
//! - [`gh`]: exact Gromov–Hausdorff distance for small spaces and certified
//!   intervals for trees.
//! - [`lab`]: the wedge-sum embedding of a parameter grid into trees, with
//!   fingerprinting and continuity/injectivity scans.
//! - [`io`]: JSON tree documents and CSV matrices.

#![forbid(unsafe_code)]
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod error;
pub mod families;
pub mod gh;
pub mod io;
pub mod lab;
pub mod metric;
pub mod tree;

pub use error::{Error, Result};
pub use families::{CombParams, StarParams};
pub use gh::{Correspondence, GhInterval};
pub use metric::{FiniteMetricSpace, ValidationReport};
pub use tree::{Deg2Component, Edge, MetricTree, ReplacementEntry, ReplacementPlan, Vertex};

/// Default comparison tolerance for metric identities.
pub const DEFAULT_TOL: f64 = 1e-9;
