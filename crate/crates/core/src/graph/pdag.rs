use super::{check_node, Dag, NodeId};
use crate::error::{Error, Result};

/// Mixed graph with directed and undirected edges, used to represent CPDAGs.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Pdag {
    p: usize,
    // directed[i * p + j]: i -> j
    directed: Vec<bool>,
    // symmetric
    undirected: Vec<bool>,
}

impl Pdag {
    pub fn new(p: usize, directed: &[(NodeId, NodeId)], undirected: &[(NodeId, NodeId)]) -> Result<Self> {
        let mut g = Self::empty(p);
        for &(i, j) in directed {
            g.check_new_pair(i, j)?;
            g.directed[i * p + j] = true;
        }
        for &(i, j) in undirected {
            g.check_new_pair(i, j)?;
            g.undirected[i * p + j] = true;
            g.undirected[j * p + i] = true;
        }
        Ok(g)
    }

    fn check_new_pair(&self, i: NodeId, j: NodeId) -> Result<()> {
        check_node(i, self.p)?;
        check_node(j, self.p)?;
        if i == j {
            return Err(Error::InvalidEdge {
                from: i,
                to: j,
                reason: "self-loop",
            });
        }
        if self.is_adjacent(i, j) {
            return Err(Error::InvalidEdge {
                from: i,
                to: j,
                reason: "pair listed more than once",
            });
        }
        Ok(())
    }

    pub fn empty(p: usize) -> Self {
        Self {
            p,
            directed: vec![false; p * p],
            undirected: vec![false; p * p],
        }
    }

    pub fn from_dag(g: &Dag) -> Self {
        let mut out = Self::empty(g.p());
        for (i, j) in g.edges() {
            out.directed[i * g.p() + j] = true;
        }
        out
    }

    /// Edge union of a collection of DAGs on the same nodes: a pair oriented
    /// both ways across the collection becomes undirected.
    pub fn edge_union<'a, I>(p: usize, dags: I) -> Result<Self>
    where
        I: IntoIterator<Item = &'a Dag>,
    {
        let mut seen = vec![false; p * p];
        for g in dags {
            if g.p() != p {
                return Err(Error::DimensionMismatch {
                    expected: p,
                    found: g.p(),
                });
            }
            for (i, j) in g.edges() {
                seen[i * p + j] = true;
            }
        }
        let mut out = Self::empty(p);
        for i in 0..p {
            for j in 0..p {
                if !seen[i * p + j] {
                    continue;
                }
                if seen[j * p + i] {
                    out.undirected[i * p + j] = true;
                } else {
                    out.directed[i * p + j] = true;
                }
            }
        }
        Ok(out)
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn has_directed(&self, from: NodeId, to: NodeId) -> bool {
        self.directed[from * self.p + to]
    }

    pub fn has_undirected(&self, a: NodeId, b: NodeId) -> bool {
        self.undirected[a * self.p + b]
    }

    pub fn is_adjacent(&self, a: NodeId, b: NodeId) -> bool {
        self.has_directed(a, b) || self.has_directed(b, a) || self.has_undirected(a, b)
    }

    /// Directed edges in lexicographic order.
    pub fn directed_edges(&self) -> Vec<(NodeId, NodeId)> {
        self.pairs(|i, j| self.has_directed(i, j))
    }

    /// Undirected edges as `(min, max)` pairs in lexicographic order.
    pub fn undirected_edges(&self) -> Vec<(NodeId, NodeId)> {
        self.pairs(|i, j| i < j && self.has_undirected(i, j))
    }

    fn pairs<F: Fn(NodeId, NodeId) -> bool>(&self, keep: F) -> Vec<(NodeId, NodeId)> {
        let mut out = Vec::new();
        for i in 0..self.p {
            for j in 0..self.p {
                if keep(i, j) {
                    out.push((i, j));
                }
            }
        }
        out
    }

    pub fn num_adjacencies(&self) -> usize {
        self.directed_edges().len() + self.undirected_edges().len()
    }

    /// Nodes joined to `v` by an undirected edge.
    pub fn undirected_neighbors(&self, v: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.p).filter(move |&w| self.has_undirected(v, w))
    }

    pub fn directed_parents(&self, v: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.p).filter(move |&w| self.has_directed(w, v))
    }

    /// Replace the undirected edge `from - to` by `from -> to`.
    pub(crate) fn orient(&mut self, from: NodeId, to: NodeId) {
        debug_assert!(self.has_undirected(from, to));
        self.undirected[from * self.p + to] = false;
        self.undirected[to * self.p + from] = false;
        self.directed[from * self.p + to] = true;
    }

    /// Whether every edge is directed.
    pub fn is_fully_directed(&self) -> bool {
        !self.undirected.iter().any(|&u| u)
    }

    /// The DAG formed by the directed edges, if there are no undirected
    /// edges and the directed part is acyclic.
    pub fn to_dag(&self) -> Option<Dag> {
        if !self.is_fully_directed() {
            return None;
        }
        Dag::new(self.p, self.directed_edges()).ok()
    }
}
