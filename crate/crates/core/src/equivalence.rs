//! Model equivalence of DAGs under a variance partition, and construction of
//! the class representative (CPDAG) by orientation propagation.
//!
//! Two DAGs give the same model under a partition iff they are Markov
//! equivalent and every node that shares its block with another node has the
//! same parents in both. The CPDAG directs an edge iff every DAG in the class
//! agrees on its orientation.

use crate::error::{Error, Result};
use crate::graph::{Dag, NodeId, Partition, Pdag};

/// Upper bound on the number of skeleton orientations tried by
/// [`enumerate_pi_class`].
pub const DEFAULT_CLASS_CAP: usize = 1 << 22;

/// The four orientation propagation rules.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MeekRule {
    /// `c -> a - b`, `c` and `b` non-adjacent: orient `a -> b`.
    R1,
    /// `a -> c -> b` and `a - b`: orient `a -> b`.
    R2,
    /// `a - c -> b`, `a - d -> b`, `c` and `d` non-adjacent, `a - b`:
    /// orient `a -> b`.
    R3,
    /// `a - c -> d -> b`, `c` and `b` non-adjacent, `a` adjacent to `d`,
    /// `a - b`: orient `a -> b`.
    R4,
}

impl MeekRule {
    pub const ALL: [MeekRule; 4] = [MeekRule::R1, MeekRule::R2, MeekRule::R3, MeekRule::R4];

    fn index(self) -> usize {
        self as usize
    }

    /// Whether this rule orients the undirected edge `a - b` as `a -> b`.
    pub fn applies(self, g: &Pdag, a: NodeId, b: NodeId) -> bool {
        if !g.has_undirected(a, b) {
            return false;
        }
        let p = g.p();
        match self {
            MeekRule::R1 => g.directed_parents(a).any(|c| c != b && !g.is_adjacent(c, b)),
            MeekRule::R2 => (0..p).any(|c| g.has_directed(a, c) && g.has_directed(c, b)),
            MeekRule::R3 => {
                let mids: Vec<NodeId> = g
                    .undirected_neighbors(a)
                    .filter(|&c| c != b && g.has_directed(c, b))
                    .collect();
                mids.iter()
                    .enumerate()
                    .any(|(x, &c)| mids[x + 1..].iter().any(|&d| !g.is_adjacent(c, d)))
            }
            MeekRule::R4 => g.undirected_neighbors(a).any(|c| {
                c != b
                    && !g.is_adjacent(c, b)
                    && (0..p).any(|d| d != a && g.has_directed(c, d) && g.has_directed(d, b) && g.is_adjacent(a, d))
            }),
        }
    }
}

/// How often each rule oriented an edge during a closure.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RuleCounts([usize; 4]);

impl RuleCounts {
    pub fn get(&self, rule: MeekRule) -> usize {
        self.0[rule.index()]
    }

    pub fn total(&self) -> usize {
        self.0.iter().sum()
    }
}

/// Skeleton plus unshielded colliders, with identical skeletons required.
pub fn markov_equivalent(g1: &Dag, g2: &Dag) -> Result<bool> {
    if g1.p() != g2.p() {
        return Err(Error::DimensionMismatch {
            expected: g1.p(),
            found: g2.p(),
        });
    }
    Ok(g1.skeleton() == g2.skeleton() && g1.unshielded_colliders() == g2.unshielded_colliders())
}

/// Markov equivalence plus equal parent sets at every node in a block of
/// size at least two.
pub fn pi_equivalent(g1: &Dag, g2: &Dag, pi: &Partition) -> Result<bool> {
    if pi.p() != g1.p() {
        return Err(Error::DimensionMismatch {
            expected: g1.p(),
            found: pi.p(),
        });
    }
    if !markov_equivalent(g1, g2)? {
        return Ok(false);
    }
    Ok((0..g1.p())
        .filter(|&i| pi.is_constrained(i))
        .all(|i| g1.parents(i) == g2.parents(i)))
}

/// Close `pdag` under the enabled rules.
pub fn apply_meek(pdag: &Pdag, rules: &[MeekRule]) -> Pdag {
    apply_meek_counted(pdag, rules).0
}

/// As [`apply_meek`], also reporting how many edges each rule oriented.
///
/// Each pass tries the enabled rules in id order, and for each rule the
/// undirected edges in lexicographic order (both orientations). Passes repeat
/// until one makes no change.
pub fn apply_meek_counted(pdag: &Pdag, rules: &[MeekRule]) -> (Pdag, RuleCounts) {
    let mut enabled = rules.to_vec();
    enabled.sort();
    enabled.dedup();
    let mut g = pdag.clone();
    let mut counts = RuleCounts::default();
    loop {
        let mut changed = false;
        for &rule in &enabled {
            for (a, b) in g.undirected_edges() {
                if !g.has_undirected(a, b) {
                    continue;
                }
                if rule.applies(&g, a, b) {
                    g.orient(a, b);
                } else if rule.applies(&g, b, a) {
                    g.orient(b, a);
                } else {
                    continue;
                }
                counts.0[rule.index()] += 1;
                changed = true;
            }
        }
        if !changed {
            return (g, counts);
        }
    }
}

/// Rule activity recorded while building a CPDAG.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CpdagTrace {
    /// Closure of the collider pattern (R1-R3).
    pub markov_phase: RuleCounts,
    /// Closure after copying orientations at constrained nodes.
    pub partition_phase: RuleCounts,
}

/// CPDAG of the class of `g` under `pi`.
pub fn cpdag(g: &Dag, pi: &Partition) -> Result<Pdag> {
    Ok(cpdag_traced(g, pi, &[MeekRule::R1, MeekRule::R2])?.0)
}

/// CPDAG construction with a configurable rule set for the final closure.
///
/// 1. Skeleton of `g` with only the unshielded collider edges directed.
/// 2. Close under R1, R2, R3.
/// 3. At each node whose block has two or more members, copy the orientation
///    of every incident edge from `g`.
/// 4. Close under `final_rules` (R1, R2 in [`cpdag`]).
pub fn cpdag_traced(g: &Dag, pi: &Partition, final_rules: &[MeekRule]) -> Result<(Pdag, CpdagTrace)> {
    if pi.p() != g.p() {
        return Err(Error::DimensionMismatch {
            expected: g.p(),
            found: pi.p(),
        });
    }
    let p = g.p();
    let colliders = g.unshielded_colliders();
    let mut directed: Vec<(NodeId, NodeId)> = colliders.iter().flat_map(|&(i, j, k)| [(i, j), (k, j)]).collect();
    directed.sort();
    directed.dedup();
    let undirected: Vec<(NodeId, NodeId)> = g
        .edges()
        .into_iter()
        .filter(|e| directed.binary_search(e).is_err())
        .collect();
    let pattern = Pdag::new(p, &directed, &undirected)?;

    let (mut work, markov_phase) = apply_meek_counted(&pattern, &[MeekRule::R1, MeekRule::R2, MeekRule::R3]);

    for i in (0..p).filter(|&i| pi.is_constrained(i)) {
        let incident = g
            .parents(i)
            .iter()
            .map(|&u| (u, i))
            .chain(g.children(i).iter().map(|&c| (i, c)));
        for (a, b) in incident {
            if work.has_directed(b, a) {
                return Err(Error::InternalInconsistency(format!(
                    "copying {a} -> {b} contradicts an orientation already forced"
                )));
            }
            if work.has_undirected(a, b) {
                work.orient(a, b);
            }
        }
    }

    let (out, partition_phase) = apply_meek_counted(&work, final_rules);
    Ok((
        out,
        CpdagTrace {
            markov_phase,
            partition_phase,
        },
    ))
}

/// Every DAG equivalent to `g` under `pi`, by brute force over orientations
/// of `g`'s skeleton. `cap` bounds the number of orientations tried.
pub fn enumerate_pi_class(g: &Dag, pi: &Partition, cap: usize) -> Result<Vec<Dag>> {
    let pairs: Vec<(NodeId, NodeId)> = g.skeleton().into_iter().collect();
    let m = pairs.len();
    if m >= usize::BITS as usize - 1 || (1usize << m) > cap {
        return Err(Error::BudgetExceeded { cap });
    }
    let mut out = Vec::new();
    for mask in 0..(1usize << m) {
        let edges = pairs
            .iter()
            .enumerate()
            .map(|(x, &(a, b))| if mask >> x & 1 == 0 { (a, b) } else { (b, a) });
        let Ok(h) = Dag::new(g.p(), edges) else { continue };
        if pi_equivalent(g, &h, pi)? {
            out.push(h);
        }
    }
    Ok(out)
}
