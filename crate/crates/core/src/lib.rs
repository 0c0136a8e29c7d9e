//! Markov chains indexed by rooted `d`-trees: period structure, the nonlinear
//! transfer operator, Hausdorff dimension of Markov hom tree-shifts, large
//! deviations of tree sample means, reproducible sampling and exact oracles.
//!
//! Matrices are always indexed `(child, parent)`.

pub mod alphabet_graph;
pub mod dimension;
pub mod error;
pub mod fixtures;
pub mod model_file;
pub mod numeric;
pub mod optimize;
pub mod oracle;
pub mod rate_function;
pub mod stochastic;
pub mod transfer_op;
pub mod tree_core;
pub mod weights;

pub use alphabet_graph::{AdjacencyModel, PeriodStructure, ReachabilityReport};
pub use dimension::{DimensionReport, Method, OptimalMeasure, Ratios, SearchOptions, SimplexPoint};
pub use error::{Error, ErrorKind, Result};
pub use model_file::ModelFile;
pub use oracle::{MeanDistribution, TypeClass};
pub use rate_function::{PressureResult, RateCurve, RateOptions, WeightedChainModel};
pub use stochastic::{ExperimentReport, RootSpec, SampleConfig};
pub use transfer_op::{EigenOptions, EigenPair, ExponentVector, Rotation};
pub use tree_core::{EmpiricalPair, LabeledTree, TreeShape};
pub use weights::{LogVector, WeightMatrix};
