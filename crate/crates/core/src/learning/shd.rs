use crate::error::{Error, Result};
use crate::graph::{NodeId, Pdag};

#[derive(Clone, Copy, PartialEq, Eq)]
enum Mark {
    Absent,
    Forward,
    Backward,
    Undirected,
}

fn mark(g: &Pdag, a: NodeId, b: NodeId) -> Mark {
    if g.has_directed(a, b) {
        Mark::Forward
    } else if g.has_directed(b, a) {
        Mark::Backward
    } else if g.has_undirected(a, b) {
        Mark::Undirected
    } else {
        Mark::Absent
    }
}

/// Structural Hamming distance between mixed graphs, counting a reversed
/// edge as 2 and every other single-pair disagreement as 1.
pub fn shd(a: &Pdag, b: &Pdag) -> Result<usize> {
    if a.p() != b.p() {
        return Err(Error::DimensionMismatch {
            expected: a.p(),
            found: b.p(),
        });
    }
    let p = a.p();
    let mut total = 0;
    for i in 0..p {
        for j in i + 1..p {
            total += match (mark(a, i, j), mark(b, i, j)) {
                (x, y) if x == y => 0,
                (Mark::Forward, Mark::Backward) | (Mark::Backward, Mark::Forward) => 2,
                _ => 1,
            };
        }
    }
    Ok(total)
}
