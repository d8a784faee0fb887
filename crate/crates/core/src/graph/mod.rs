//! Graph primitives: DAGs, partially directed graphs, variance partitions and treks.
//!
//! Nodes are dense indices `0..p`. Node sets passed into queries are plain
//! slices; node sets returned from queries are [`BTreeSet`]s so they compare
//! and print in a stable order.

mod dag;
mod partition;
mod pdag;
mod trek;

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap};

pub use dag::{Dag, Relatives};
pub use partition::Partition;
pub use pdag::Pdag;
pub use trek::{Trek, DEFAULT_TREK_CAP};

use crate::error::{Error, Result};

pub type NodeId = usize;
pub type NodeSet = BTreeSet<NodeId>;

/// Kahn's algorithm over an explicit edge list. Among ready nodes the
/// smallest index is emitted first, so the order is deterministic.
pub fn topological_sort(p: usize, edges: &[(NodeId, NodeId)]) -> Result<Vec<NodeId>> {
    let mut indegree = vec![0usize; p];
    let mut out: Vec<Vec<NodeId>> = vec![Vec::new(); p];
    for &(i, j) in edges {
        check_node(i, p)?;
        check_node(j, p)?;
        out[i].push(j);
        indegree[j] += 1;
    }
    let mut ready: BinaryHeap<Reverse<NodeId>> = (0..p).filter(|&v| indegree[v] == 0).map(Reverse).collect();
    let mut order = Vec::with_capacity(p);
    while let Some(Reverse(v)) = ready.pop() {
        order.push(v);
        for &w in &out[v] {
            indegree[w] -= 1;
            if indegree[w] == 0 {
                ready.push(Reverse(w));
            }
        }
    }
    if order.len() == p {
        Ok(order)
    } else {
        Err(Error::CyclicGraph)
    }
}

pub(crate) fn check_node(node: NodeId, p: usize) -> Result<()> {
    if node < p {
        Ok(())
    } else {
        Err(Error::NodeOutOfRange { node, p })
    }
}
