//! Causal structure discovery for linear Gaussian structural equation models
//! whose error variances are equal within blocks of a known partition.
//!
//! * [`graph`]: DAGs, CPDAG-style mixed graphs, partitions, d-separation, treks.
//! * [`sem`]: implied covariances, conditional variances and model membership.
//! * [`equivalence`]: model equivalence of DAGs and CPDAG construction.
//! * [`learning`]: maximum likelihood, BIC and greedy DAG search.
//! * [`simulation`]: random models and the simulation study harness.

pub mod equivalence;
pub mod error;
pub mod graph;
pub mod learning;
pub mod sem;
pub mod simulation;

pub use error::{Error, Result};
pub use graph::{Dag, NodeId, NodeSet, Partition, Pdag, Trek};
pub use sem::{Covariance, SemParams};
