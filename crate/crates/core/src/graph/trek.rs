use super::{check_node, Dag, NodeId};
use crate::error::{Error, Result};

pub const DEFAULT_TREK_CAP: usize = 1_000_000;

/// A pair of directed paths leaving a common top node.
///
/// Both sides start at the top; `left` ends at the first endpoint and `right`
/// at the second. A side consisting of the top alone is a trivial path.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Trek {
    pub left: Vec<NodeId>,
    pub right: Vec<NodeId>,
}

impl Trek {
    pub fn top(&self) -> NodeId {
        self.left[0]
    }

    /// Every edge on both sides; an edge used by both sides appears twice.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.left.windows(2).chain(self.right.windows(2)).map(|w| (w[0], w[1]))
    }
}

impl Dag {
    /// All treks between `i` and `j` (`i == j` allowed), sorted.
    ///
    /// Intended for small graphs; fails with [`Error::BudgetExceeded`] once
    /// more than `cap` treks (or directed paths) are produced.
    pub fn enumerate_treks(&self, i: NodeId, j: NodeId, cap: usize) -> Result<Vec<Trek>> {
        check_node(i, self.p())?;
        check_node(j, self.p())?;
        let to_i = self.paths_into(i, cap)?;
        let to_j = if i == j { to_i.clone() } else { self.paths_into(j, cap)? };
        let mut out = Vec::new();
        for top in 0..self.p() {
            for left in &to_i[top] {
                for right in &to_j[top] {
                    if out.len() == cap {
                        return Err(Error::BudgetExceeded { cap });
                    }
                    out.push(Trek {
                        left: left.clone(),
                        right: right.clone(),
                    });
                }
            }
        }
        out.sort();
        Ok(out)
    }

    /// `paths[k]` holds every directed path from `k` to `target`.
    fn paths_into(&self, target: NodeId, cap: usize) -> Result<Vec<Vec<Vec<NodeId>>>> {
        let mut paths: Vec<Vec<Vec<NodeId>>> = vec![Vec::new(); self.p()];
        paths[target].push(vec![target]);
        let mut total = 1usize;
        // reverse topological order: children are finished before parents
        for &v in self.topological_order().iter().rev() {
            if v == target {
                continue;
            }
            let mut mine = Vec::new();
            for &c in self.children(v) {
                for tail in &paths[c] {
                    total += 1;
                    if total > cap {
                        return Err(Error::BudgetExceeded { cap });
                    }
                    let mut path = Vec::with_capacity(tail.len() + 1);
                    path.push(v);
                    path.extend_from_slice(tail);
                    mine.push(path);
                }
            }
            paths[v] = mine;
        }
        Ok(paths)
    }
}
