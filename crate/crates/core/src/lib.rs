//! Similarity measures on weighted undirected graphs and checks of their
//! metric and proximity properties.
//!
//! The usual flow is: load a [`WeightedGraph`], build its [`GraphMatrices`],
//! compute a measure with [`kernels::compute`], map it to a distance with
//! [`transforms`], and check it with [`properties`]. [`audit::run_audit`]
//! does all of this for a list of measures and checks.
//!
//! ```
//! use graphsim::{build_matrices, path4, kernels, properties};
//!
//! let gm = build_matrices(&path4());
//! let k = kernels::communicability(&gm, 1.0).unwrap();
//! let report = properties::check_proximity(&k.matrix, 1e-9).unwrap();
//! assert!(!report.holds);
//! assert_eq!(report.witness.unwrap().vertices, vec![2, 1, 3]);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod audit;
pub mod error;
pub mod graph;
pub mod kernels;
pub mod linalg;
pub mod properties;
pub mod transforms;

pub use audit::{
    export_embedding, find_threshold, run_audit, AuditOptions, AuditReport, Embedding, MeasureSpec,
    ThresholdResult,
};
pub use error::{Error, Result};
pub use graph::{build_matrices, load_graph, named_graph, path4, path5, Edge, GraphMatrices, WeightedGraph};
pub use kernels::{AbsorptionRates, KernelResult, Measure, ParamDomain};
pub use linalg::SquareMatrix;
pub use properties::{Property, PropertyReport, Triple, Witness, DEFAULT_TOL};
pub use transforms::{DistanceKind, DistanceMatrix, ProximityMatrix};
