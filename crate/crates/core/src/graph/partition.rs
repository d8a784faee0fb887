use std::collections::HashMap;

use super::NodeId;
use crate::error::{Error, Result};

/// Partition of the nodes into blocks of equal error variance.
///
/// Blocks are stored canonically: each block sorted, blocks ordered by their
/// smallest member. Two partitions describing the same grouping compare equal.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Partition {
    block_of: Vec<usize>,
    blocks: Vec<Vec<NodeId>>,
}

impl Partition {
    pub fn new(p: usize, blocks: Vec<Vec<NodeId>>) -> Result<Self> {
        let mut block_of = vec![usize::MAX; p];
        for (k, block) in blocks.iter().enumerate() {
            if block.is_empty() {
                return Err(Error::InvalidPartition(format!("block {k} is empty")));
            }
            for &v in block {
                if v >= p {
                    return Err(Error::InvalidPartition(format!("node {v} out of range for {p} nodes")));
                }
                if block_of[v] != usize::MAX {
                    return Err(Error::InvalidPartition(format!(
                        "node {v} appears in more than one block"
                    )));
                }
                block_of[v] = k;
            }
        }
        if let Some(v) = block_of.iter().position(|&b| b == usize::MAX) {
            return Err(Error::InvalidPartition(format!(
                "node {v} is not assigned to any block"
            )));
        }
        Ok(Self::from_assignment(&block_of))
    }

    /// Build from a label sequence where `labels[i]` names the block of node
    /// `i`. Labels are arbitrary; only equality matters.
    pub fn from_labels<L>(labels: &[L]) -> Self
    where
        L: Eq + std::hash::Hash,
    {
        let mut ids: HashMap<&L, usize> = HashMap::new();
        let assignment: Vec<usize> = labels
            .iter()
            .map(|l| {
                let next = ids.len();
                *ids.entry(l).or_insert(next)
            })
            .collect();
        Self::from_assignment(&assignment)
    }

    fn from_assignment(assignment: &[usize]) -> Self {
        // relabel blocks by first occurrence so block order follows smallest member
        let mut remap: HashMap<usize, usize> = HashMap::new();
        let mut blocks: Vec<Vec<NodeId>> = Vec::new();
        let mut block_of = Vec::with_capacity(assignment.len());
        for (v, &raw) in assignment.iter().enumerate() {
            let k = *remap.entry(raw).or_insert_with(|| {
                blocks.push(Vec::new());
                blocks.len() - 1
            });
            blocks[k].push(v);
            block_of.push(k);
        }
        Self { block_of, blocks }
    }

    /// Every node in its own block: unrestricted error variances.
    pub fn finest(p: usize) -> Self {
        Self::from_assignment(&(0..p).collect::<Vec<_>>())
    }

    /// One block: all error variances equal.
    pub fn coarsest(p: usize) -> Self {
        Self::from_assignment(&vec![0; p])
    }

    pub fn p(&self) -> usize {
        self.block_of.len()
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn blocks(&self) -> &[Vec<NodeId>] {
        &self.blocks
    }

    pub fn block_of(&self, v: NodeId) -> usize {
        self.block_of[v]
    }

    pub fn same_block(&self, a: NodeId, b: NodeId) -> bool {
        self.block_of[a] == self.block_of[b]
    }

    pub fn block_size_of(&self, v: NodeId) -> usize {
        self.blocks[self.block_of[v]].len()
    }

    /// Whether `v` shares its error variance with at least one other node.
    pub fn is_constrained(&self, v: NodeId) -> bool {
        self.block_size_of(v) >= 2
    }

    /// Whether every block of `self` lies inside a block of `coarser`.
    pub fn refines(&self, coarser: &Partition) -> bool {
        self.p() == coarser.p()
            && self
                .blocks
                .iter()
                .all(|b| b.iter().all(|&v| coarser.same_block(v, b[0])))
    }
}
