mod common;

use std::collections::HashMap;

use common::{all_dags, all_partitions, random_partition, random_regime};
use eqvar::equivalence::{
    apply_meek, cpdag, cpdag_traced, enumerate_pi_class, markov_equivalent, pi_equivalent, MeekRule, DEFAULT_CLASS_CAP,
};
use eqvar::sem::{implied_covariance, is_member};
use eqvar::simulation::{random_dag, random_sem, Regime};
use eqvar::{Dag, Partition, Pdag};
use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn class_union(g: &Dag, pi: &Partition) -> Pdag {
    let class = enumerate_pi_class(g, pi, DEFAULT_CLASS_CAP).unwrap();
    assert!(class.contains(g));
    Pdag::edge_union(g.p(), &class).unwrap()
}

#[test]
fn cpdag_is_class_union_for_all_small_graphs() {
    for p in 1..=4 {
        let partitions = all_partitions(p);
        for g in all_dags(p) {
            for pi in &partitions {
                assert_eq!(cpdag(&g, pi).unwrap(), class_union(&g, pi), "{g:?} {pi:?}");
            }
        }
    }
}

#[test]
fn cpdag_is_class_union_for_random_graphs() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..200 {
        let p = rng.random_range(5..=6);
        let g = random_dag(p, random_regime(&mut rng), &mut rng);
        let pi = random_partition(p, &mut rng);
        assert_eq!(cpdag(&g, &pi).unwrap(), class_union(&g, &pi), "{g:?} {pi:?}");
    }
}

#[test]
fn pi_equivalence_is_an_equivalence_relation_with_canonical_cpdags() {
    for p in 2..=4 {
        let dags = all_dags(p);
        for pi in all_partitions(p) {
            // group by CPDAG; pi_equivalent must agree with the grouping,
            // which also gives reflexivity, symmetry and transitivity
            let keys: Vec<Pdag> = dags.iter().map(|g| cpdag(g, &pi).unwrap()).collect();
            let mut index: HashMap<&Pdag, usize> = HashMap::new();
            for k in &keys {
                let next = index.len();
                index.entry(k).or_insert(next);
            }
            for (a, g1) in dags.iter().enumerate() {
                for (b, g2) in dags.iter().enumerate() {
                    let eq = pi_equivalent(g1, g2, &pi).unwrap();
                    assert_eq!(eq, index[&keys[a]] == index[&keys[b]], "{g1:?} {g2:?} {pi:?}");
                    assert_eq!(eq, pi_equivalent(g2, g1, &pi).unwrap());
                }
            }
        }
    }
}

#[test]
fn classical_cpdag_at_finest_partition() {
    for p in 2..=4 {
        let dags = all_dags(p);
        let fine = Partition::finest(p);
        for g in &dags {
            let mec: Vec<&Dag> = dags.iter().filter(|h| markov_equivalent(g, h).unwrap()).collect();
            let union = Pdag::edge_union(p, mec.iter().copied()).unwrap();
            assert_eq!(cpdag(g, &fine).unwrap(), union);
        }
    }
}

#[test]
fn coarser_partitions_direct_more_edges() {
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    for _ in 0..300 {
        let p = rng.random_range(3..=7);
        let g = random_dag(p, random_regime(&mut rng), &mut rng);
        let fine = random_partition(p, &mut rng);
        // merge two random blocks to get a coarser partition
        let mut labels: Vec<usize> = (0..p).map(|v| fine.block_of(v)).collect();
        let k = fine.num_blocks();
        let (a, b) = (rng.random_range(0..k), rng.random_range(0..k));
        for l in labels.iter_mut() {
            if *l == b {
                *l = a;
            }
        }
        let coarse = Partition::from_labels(&labels);
        assert!(fine.refines(&coarse));
        let df = cpdag(&g, &fine).unwrap().directed_edges();
        let dc = cpdag(&g, &coarse).unwrap().directed_edges();
        assert!(df.iter().all(|e| dc.contains(e)), "{g:?} {fine:?} {coarse:?}");
    }
}

#[test]
fn final_closure_never_needs_r3_or_r4() {
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    for _ in 0..1000 {
        let p = rng.random_range(3..=8);
        let g = random_dag(p, random_regime(&mut rng), &mut rng);
        let pi = random_partition(p, &mut rng);
        let (two, _) = cpdag_traced(&g, &pi, &[MeekRule::R1, MeekRule::R2]).unwrap();
        let (four, trace) = cpdag_traced(&g, &pi, &MeekRule::ALL).unwrap();
        assert_eq!(two, four);
        assert_eq!(trace.partition_phase.get(MeekRule::R3), 0);
        assert_eq!(trace.partition_phase.get(MeekRule::R4), 0);
    }
}

/// Close under the rules by orienting one randomly chosen applicable edge at
/// a time.
fn random_order_closure(g: &Pdag, rules: &[MeekRule], rng: &mut ChaCha8Rng) -> Pdag {
    let mut g = g.clone();
    loop {
        let mut moves = Vec::new();
        for &rule in rules {
            for (a, b) in g.undirected_edges() {
                if rule.applies(&g, a, b) {
                    moves.push((a, b));
                }
                if rule.applies(&g, b, a) {
                    moves.push((b, a));
                }
            }
        }
        let Some(&(a, b)) = moves.choose(rng) else { return g };
        // orient via a one-edge Pdag rebuild
        let mut directed = g.directed_edges();
        directed.push((a, b));
        let undirected: Vec<_> = g
            .undirected_edges()
            .into_iter()
            .filter(|&e| e != (a.min(b), a.max(b)))
            .collect();
        g = Pdag::new(g.p(), &directed, &undirected).unwrap();
    }
}

#[test]
fn meek_closure_is_order_independent() {
    let mut rng = ChaCha8Rng::seed_from_u64(34);
    for _ in 0..300 {
        let p = rng.random_range(3..=7);
        let g = random_dag(p, Regime::Dense, &mut rng);
        let pi = random_partition(p, &mut rng);
        // start from the collider pattern plus the copied orientations
        let target = cpdag(&g, &pi).unwrap();
        let mut directed: Vec<(usize, usize)> = g
            .unshielded_colliders()
            .iter()
            .flat_map(|&(i, j, k)| [(i, j), (k, j)])
            .collect();
        for (a, b) in g.edges() {
            if pi.is_constrained(a) || pi.is_constrained(b) {
                directed.push((a, b));
            }
        }
        directed.sort();
        directed.dedup();
        let undirected: Vec<_> = g
            .edges()
            .into_iter()
            .filter(|e| directed.binary_search(e).is_err())
            .map(|(a, b)| (a.min(b), a.max(b)))
            .collect();
        let start = Pdag::new(p, &directed, &undirected).unwrap();
        let fixed = apply_meek(&start, &MeekRule::ALL);
        for _ in 0..3 {
            let mut rules = MeekRule::ALL.to_vec();
            rules.shuffle(&mut rng);
            assert_eq!(random_order_closure(&start, &rules, &mut rng), fixed);
        }
        assert_eq!(fixed, target, "{g:?} {pi:?}");
    }
}

#[test]
fn model_membership_agrees_with_pi_equivalence() {
    let mut rng = ChaCha8Rng::seed_from_u64(35);
    let check = |g1: &Dag, g2: &Dag, pi: &Partition, draws: usize, rng: &mut ChaCha8Rng| {
        let expect = pi_equivalent(g1, g2, pi).unwrap();
        let mut all_pass = true;
        for (a, b) in [(g1, g2), (g2, g1)] {
            for _ in 0..draws {
                let sigma = implied_covariance(a, &random_sem(a, pi, rng).unwrap()).unwrap();
                if !is_member(&sigma, b, pi, 1e-9).unwrap() {
                    all_pass = false;
                    break;
                }
            }
        }
        assert_eq!(all_pass, expect, "{g1:?} {g2:?} {pi:?}");
    };

    let dags3 = all_dags(3);
    for pi in all_partitions(3) {
        for g1 in &dags3 {
            for g2 in &dags3 {
                check(g1, g2, &pi, 100, &mut rng);
            }
        }
    }

    let dags4 = all_dags(4);
    let parts4 = all_partitions(4);
    for _ in 0..1500 {
        let g1 = dags4.choose(&mut rng).unwrap();
        let pi = parts4.choose(&mut rng).unwrap();
        // half of the pairs drawn from g1's own Markov class so equivalent
        // pairs are well represented
        let g2 = if rng.random_bool(0.5) {
            let mec: Vec<&Dag> = dags4.iter().filter(|h| markov_equivalent(g1, h).unwrap()).collect();
            *mec.choose(&mut rng).unwrap()
        } else {
            dags4.choose(&mut rng).unwrap()
        };
        check(g1, g2, pi, 100, &mut rng);
    }
}

#[test]
fn equivalent_dags_share_their_cpdag() {
    let mut rng = ChaCha8Rng::seed_from_u64(36);
    for _ in 0..200 {
        let p = rng.random_range(3..=6);
        let g = random_dag(p, random_regime(&mut rng), &mut rng);
        let pi = random_partition(p, &mut rng);
        let c = cpdag(&g, &pi).unwrap();
        for h in enumerate_pi_class(&g, &pi, DEFAULT_CLASS_CAP).unwrap() {
            assert_eq!(cpdag(&h, &pi).unwrap(), c);
        }
    }
}
