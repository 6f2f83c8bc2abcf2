//! Supervised feature aggregation: greedy partitions of the inputs into
//! clusters that are replaced by one aggregated column each.

pub mod baselines;
pub mod error;
pub mod estimators;
pub mod experiment;
pub mod genlin;
pub mod io;
pub mod model;
pub mod nonlin;
pub mod scan;
pub mod synth;
pub mod theory;

pub use error::{Error, Result};
pub use estimators::FitResult;
pub use experiment::{Algorithm, ExperimentConfig, ExperimentReport, Scaling};
pub use model::{
    column, AggregationSpec, CenteringStats, Dataset, ExponentialFamily, FamilyKind, Form, GenerativeSpec, Matrix,
    Partition, PartitionFile, ReductionConfig, Registry, Task, TransformSpec,
};
