use std::collections::{BTreeSet, VecDeque};

use super::{check_node, topological_sort, NodeId, NodeSet};
use crate::error::{Error, Result};

/// A directed acyclic graph on nodes `0..p`.
///
/// Acyclicity is checked on construction and every edit returns a new graph,
/// so a `Dag` value is always well formed.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Dag {
    p: usize,
    parents: Vec<Vec<NodeId>>,
    children: Vec<Vec<NodeId>>,
    adj: Vec<bool>,
}

/// Parents, children, ancestors and descendants of one node.
///
/// A node is never its own ancestor but always its own descendant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Relatives {
    pub parents: NodeSet,
    pub children: NodeSet,
    pub ancestors: NodeSet,
    pub descendants: NodeSet,
}

impl Dag {
    pub fn new<I>(p: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (NodeId, NodeId)>,
    {
        if p == 0 {
            return Err(Error::InvalidQuery("a graph needs at least one node".into()));
        }
        let mut adj = vec![false; p * p];
        let mut list = Vec::new();
        for (i, j) in edges {
            check_node(i, p)?;
            check_node(j, p)?;
            if i == j {
                return Err(Error::InvalidEdge {
                    from: i,
                    to: j,
                    reason: "self-loop",
                });
            }
            if adj[j * p + i] {
                return Err(Error::InvalidEdge {
                    from: i,
                    to: j,
                    reason: "edge present in both orientations",
                });
            }
            if !adj[i * p + j] {
                adj[i * p + j] = true;
                list.push((i, j));
            }
        }
        topological_sort(p, &list)?;
        Ok(Self::from_adjacency(p, adj))
    }

    pub fn empty(p: usize) -> Self {
        assert!(p >= 1, "a graph needs at least one node");
        Self::from_adjacency(p, vec![false; p * p])
    }

    fn from_adjacency(p: usize, adj: Vec<bool>) -> Self {
        let mut parents = vec![Vec::new(); p];
        let mut children = vec![Vec::new(); p];
        for i in 0..p {
            for j in 0..p {
                if adj[i * p + j] {
                    children[i].push(j);
                    parents[j].push(i);
                }
            }
        }
        Self {
            p,
            parents,
            children,
            adj,
        }
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn num_edges(&self) -> usize {
        self.parents.iter().map(Vec::len).sum()
    }

    /// Edges `(from, to)` in lexicographic order.
    pub fn edges(&self) -> Vec<(NodeId, NodeId)> {
        (0..self.p)
            .flat_map(|i| self.children[i].iter().map(move |&j| (i, j)))
            .collect()
    }

    pub fn has_edge(&self, from: NodeId, to: NodeId) -> bool {
        from < self.p && to < self.p && self.adj[from * self.p + to]
    }

    pub fn is_adjacent(&self, a: NodeId, b: NodeId) -> bool {
        self.has_edge(a, b) || self.has_edge(b, a)
    }

    /// Sorted parent list.
    pub fn parents(&self, i: NodeId) -> &[NodeId] {
        &self.parents[i]
    }

    /// Sorted child list.
    pub fn children(&self, i: NodeId) -> &[NodeId] {
        &self.children[i]
    }

    pub fn topological_order(&self) -> Vec<NodeId> {
        topological_sort(self.p, &self.edges()).expect("Dag is acyclic by construction")
    }

    /// Descendants of `i`, including `i` itself.
    pub fn descendants(&self, i: NodeId) -> NodeSet {
        self.closure(i, |v| &self.children[v])
    }

    /// Ancestors of `i`, excluding `i` itself.
    pub fn ancestors(&self, i: NodeId) -> NodeSet {
        let mut an = self.closure(i, |v| &self.parents[v]);
        an.remove(&i);
        an
    }

    fn closure<'a, F>(&'a self, start: NodeId, next: F) -> NodeSet
    where
        F: Fn(NodeId) -> &'a [NodeId],
    {
        let mut seen = vec![false; self.p];
        let mut stack = vec![start];
        seen[start] = true;
        while let Some(v) = stack.pop() {
            for &w in next(v) {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        (0..self.p).filter(|&v| seen[v]).collect()
    }

    pub fn relatives(&self, i: NodeId) -> Result<Relatives> {
        check_node(i, self.p)?;
        Ok(Relatives {
            parents: self.parents[i].iter().copied().collect(),
            children: self.children[i].iter().copied().collect(),
            ancestors: self.ancestors(i),
            descendants: self.descendants(i),
        })
    }

    /// Unordered adjacencies as `(min, max)` pairs.
    pub fn skeleton(&self) -> BTreeSet<(NodeId, NodeId)> {
        self.edges().into_iter().map(|(i, j)| (i.min(j), i.max(j))).collect()
    }

    /// All `i -> j <- k` with `i < k` and `i`, `k` non-adjacent.
    pub fn unshielded_colliders(&self) -> BTreeSet<(NodeId, NodeId, NodeId)> {
        let mut out = BTreeSet::new();
        for j in 0..self.p {
            let pa = &self.parents[j];
            for (x, &i) in pa.iter().enumerate() {
                for &k in &pa[x + 1..] {
                    if !self.is_adjacent(i, k) {
                        out.insert((i, j, k));
                    }
                }
            }
        }
        out
    }

    /// Whether `i` and `j` are d-separated by `s`.
    ///
    /// Reachability over (node, direction-of-arrival) states: a walk may pass
    /// a non-collider outside `s`, and a collider that is in `s` or has a
    /// descendant in `s`. Runs in O(p + |E|).
    pub fn d_separated(&self, i: NodeId, j: NodeId, s: &[NodeId]) -> Result<bool> {
        check_node(i, self.p)?;
        check_node(j, self.p)?;
        for &v in s {
            check_node(v, self.p)?;
        }
        if i == j || s.contains(&i) || s.contains(&j) {
            return Err(Error::InvalidQuery(
                "d-separation needs distinct endpoints outside the conditioning set".into(),
            ));
        }
        let mut in_s = vec![false; self.p];
        for &v in s {
            in_s[v] = true;
        }
        // nodes that are in s or have a descendant in s
        let mut opens_collider = in_s.clone();
        let mut stack: Vec<NodeId> = s.to_vec();
        while let Some(v) = stack.pop() {
            for &u in &self.parents[v] {
                if !opens_collider[u] {
                    opens_collider[u] = true;
                    stack.push(u);
                }
            }
        }

        // visited[2v] : reached v from a child (moving against an edge)
        // visited[2v+1]: reached v from a parent (moving along an edge)
        let mut visited = vec![false; 2 * self.p];
        let mut queue = VecDeque::new();
        queue.push_back((i, false));
        visited[2 * i] = true;
        while let Some((v, from_parent)) = queue.pop_front() {
            if v == j {
                return Ok(false);
            }
            let mut push = |w: NodeId, along: bool, q: &mut VecDeque<(NodeId, bool)>| {
                let idx = 2 * w + usize::from(along);
                if !visited[idx] {
                    visited[idx] = true;
                    q.push_back((w, along));
                }
            };
            if !from_parent {
                if !in_s[v] {
                    for &u in &self.parents[v] {
                        push(u, false, &mut queue);
                    }
                    for &c in &self.children[v] {
                        push(c, true, &mut queue);
                    }
                }
            } else {
                if !in_s[v] {
                    for &c in &self.children[v] {
                        push(c, true, &mut queue);
                    }
                }
                if opens_collider[v] {
                    for &u in &self.parents[v] {
                        push(u, false, &mut queue);
                    }
                }
            }
        }
        Ok(true)
    }

    pub fn with_edge_added(&self, from: NodeId, to: NodeId) -> Result<Dag> {
        check_node(from, self.p)?;
        check_node(to, self.p)?;
        if self.is_adjacent(from, to) {
            return Err(Error::InvalidEdge {
                from,
                to,
                reason: "nodes already adjacent",
            });
        }
        let mut edges = self.edges();
        edges.push((from, to));
        Dag::new(self.p, edges)
    }

    pub fn with_edge_removed(&self, from: NodeId, to: NodeId) -> Result<Dag> {
        if !self.has_edge(from, to) {
            return Err(Error::InvalidEdge {
                from,
                to,
                reason: "edge not present",
            });
        }
        let mut adj = self.adj.clone();
        adj[from * self.p + to] = false;
        Ok(Self::from_adjacency(self.p, adj))
    }

    pub fn with_edge_reversed(&self, from: NodeId, to: NodeId) -> Result<Dag> {
        if !self.has_edge(from, to) {
            return Err(Error::InvalidEdge {
                from,
                to,
                reason: "edge not present",
            });
        }
        let edges = self
            .edges()
            .into_iter()
            .map(|e| if e == (from, to) { (to, from) } else { e });
        Dag::new(self.p, edges)
    }

    /// Whether `to` can be reached from `from` by a directed path that does
    /// not use the edge `from -> to` itself.
    pub(crate) fn has_indirect_path(&self, from: NodeId, to: NodeId) -> bool {
        let mut seen = vec![false; self.p];
        let mut stack: Vec<NodeId> = self.children[from].iter().copied().filter(|&c| c != to).collect();
        for &c in &stack {
            seen[c] = true;
        }
        while let Some(v) = stack.pop() {
            if v == to {
                return true;
            }
            for &w in &self.children[v] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        false
    }

    /// Relabel nodes: node `v` becomes `perm[v]`.
    pub fn relabel(&self, perm: &[NodeId]) -> Result<Dag> {
        if perm.len() != self.p {
            return Err(Error::DimensionMismatch {
                expected: self.p,
                found: perm.len(),
            });
        }
        let mut seen = vec![false; self.p];
        for &v in perm {
            check_node(v, self.p)?;
            if std::mem::replace(&mut seen[v], true) {
                return Err(Error::InvalidQuery("relabeling is not a permutation".into()));
            }
        }
        Dag::new(self.p, self.edges().into_iter().map(|(i, j)| (perm[i], perm[j])))
    }
}
