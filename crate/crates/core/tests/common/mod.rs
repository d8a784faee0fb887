#![allow(dead_code)]

use eqvar::simulation::{random_dag, random_sem, Regime};
use eqvar::{Dag, Partition, SemParams};
use rand::Rng;

/// Every DAG on `p` labeled nodes.
pub fn all_dags(p: usize) -> Vec<Dag> {
    let pairs: Vec<(usize, usize)> = (0..p).flat_map(|i| (i + 1..p).map(move |j| (i, j))).collect();
    let total = 3usize.pow(pairs.len() as u32);
    let mut out = Vec::new();
    for mut code in 0..total {
        let mut edges = Vec::new();
        for &(i, j) in &pairs {
            match code % 3 {
                1 => edges.push((i, j)),
                2 => edges.push((j, i)),
                _ => {}
            }
            code /= 3;
        }
        if let Ok(g) = Dag::new(p, edges) {
            out.push(g);
        }
    }
    out
}

/// Every set partition of `0..p`, via restricted growth strings.
pub fn all_partitions(p: usize) -> Vec<Partition> {
    fn grow(labels: &mut Vec<usize>, p: usize, out: &mut Vec<Partition>) {
        if labels.len() == p {
            out.push(Partition::from_labels(labels));
            return;
        }
        let next = labels.iter().max().map_or(0, |m| m + 1);
        for l in 0..=next {
            labels.push(l);
            grow(labels, p, out);
            labels.pop();
        }
    }
    let mut out = Vec::new();
    grow(&mut Vec::new(), p, &mut out);
    out
}

pub fn random_partition<R: Rng>(p: usize, rng: &mut R) -> Partition {
    let k = rng.random_range(1..=p);
    let labels: Vec<usize> = (0..p).map(|_| rng.random_range(0..k)).collect();
    Partition::from_labels(&labels)
}

pub fn random_regime<R: Rng>(rng: &mut R) -> Regime {
    if rng.random_bool(0.5) {
        Regime::Sparse
    } else {
        Regime::Dense
    }
}

/// Random DAG, partition, and partition-respecting parameters.
pub fn random_model<R: Rng>(p: usize, rng: &mut R) -> (Dag, Partition, SemParams) {
    let regime = random_regime(rng);
    let g = random_dag(p, regime, rng);
    let pi = random_partition(p, rng);
    let params = random_sem(&g, &pi, rng).unwrap();
    (g, pi, params)
}

/// Subsets of `pool`, as sorted vectors.
pub fn subsets(pool: &[usize]) -> Vec<Vec<usize>> {
    (0..1usize << pool.len())
        .map(|mask| {
            pool.iter()
                .enumerate()
                .filter(|(x, _)| mask >> x & 1 == 1)
                .map(|(_, &v)| v)
                .collect()
        })
        .collect()
}
