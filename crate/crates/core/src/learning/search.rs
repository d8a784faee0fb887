//! Greedy hill climbing over DAGs with random restarts.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::mle::{Scorer, DEFAULT_SINGULAR_TOL};
use super::{sample_covariance, Dataset, SampleCov};
use crate::equivalence::cpdag;
use crate::error::{Error, Result};
use crate::graph::{Dag, NodeId, Partition, Pdag};
use crate::simulation::{random_dag, Regime};

/// Absolute slack for "strictly better" score comparisons.
const SCORE_SLACK: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EditKind {
    Remove,
    Add,
    Reverse,
}

/// A single-edge change. The derived order (kind, then endpoints) is the
/// tie-breaking order of the search.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Edit {
    pub kind: EditKind,
    pub from: NodeId,
    pub to: NodeId,
}

impl Edit {
    pub fn apply(&self, g: &Dag) -> Result<Dag> {
        match self.kind {
            EditKind::Remove => g.with_edge_removed(self.from, self.to),
            EditKind::Add => g.with_edge_added(self.from, self.to),
            EditKind::Reverse => g.with_edge_reversed(self.from, self.to),
        }
    }
}

/// Acyclic single-edge edits of `g` that leave its equivalence class under
/// `pi`, in canonical order.
///
/// A reversal of `i -> j` stays inside the class exactly when the edge is
/// covered (`pa(j) = pa(i) ∪ {i}`) and neither endpoint shares a block with
/// another node, so those reversals are dropped. When more than `cap` edits
/// remain, a uniform subset of size `cap` is kept.
pub fn neighborhood<R: Rng + ?Sized>(g: &Dag, pi: &Partition, cap: usize, rng: &mut R) -> Vec<Edit> {
    let p = g.p();
    let mut edits = Vec::new();
    for (from, to) in g.edges() {
        edits.push(Edit {
            kind: EditKind::Remove,
            from,
            to,
        });
    }
    let descendants: Vec<_> = (0..p).map(|v| g.descendants(v)).collect();
    for from in 0..p {
        for (to, below) in descendants.iter().enumerate() {
            if from != to && !g.is_adjacent(from, to) && !below.contains(&from) {
                edits.push(Edit {
                    kind: EditKind::Add,
                    from,
                    to,
                });
            }
        }
    }
    for (from, to) in g.edges() {
        if g.has_indirect_path(from, to) {
            continue;
        }
        let covered = {
            let mut expected = g.parents(from).to_vec();
            expected.push(from);
            expected.sort_unstable();
            expected == g.parents(to)
        };
        if covered && !pi.is_constrained(from) && !pi.is_constrained(to) {
            continue;
        }
        edits.push(Edit {
            kind: EditKind::Reverse,
            from,
            to,
        });
    }
    edits.sort();
    if edits.len() > cap {
        let mut keep = index::sample(rng, edits.len(), cap).into_vec();
        keep.sort_unstable();
        edits = keep.into_iter().map(|x| edits[x]).collect();
    }
    edits
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchConfig {
    pub restarts: usize,
    pub neighborhood_cap: usize,
    pub seed: u64,
    /// Per restart.
    pub max_iters: usize,
    pub singular_tol: f64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            restarts: 5,
            neighborhood_cap: 300,
            seed: 0,
            max_iters: 500,
            singular_tol: DEFAULT_SINGULAR_TOL,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 {
            return Err(Error::InvalidQuery("restarts must be at least 1".into()));
        }
        if self.neighborhood_cap == 0 {
            return Err(Error::InvalidQuery("neighborhood cap must be at least 1".into()));
        }
        Ok(())
    }
}

/// One accepted move; iteration 0 of each restart records the start graph.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraceStep {
    pub restart: usize,
    pub iteration: usize,
    pub edit: Option<Edit>,
    pub score: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SearchResult {
    pub best: Dag,
    pub cpdag: Pdag,
    pub score: f64,
    pub restart_scores: Vec<f64>,
    pub trace: Vec<TraceStep>,
}

pub fn greedy_search(data: &Dataset, pi: &Partition, cfg: &SearchConfig) -> Result<SearchResult> {
    let s = sample_covariance(data)?;
    greedy_search_cov(&s, pi, cfg)
}

/// Greedy search on a precomputed sample covariance.
///
/// Restart 0 starts from the empty graph, later restarts from random sparse
/// DAGs. Every restart draws from its own stream of `cfg.seed`, so results do
/// not depend on how restarts are scheduled across threads.
pub fn greedy_search_cov(s: &SampleCov, pi: &Partition, cfg: &SearchConfig) -> Result<SearchResult> {
    cfg.validate()?;
    if pi.p() != s.p() {
        return Err(Error::DimensionMismatch {
            expected: s.p(),
            found: pi.p(),
        });
    }
    let scorer = Scorer::new(s).with_singular_tol(cfg.singular_tol);
    let runs: Vec<(Dag, f64, Vec<TraceStep>)> = (0..cfg.restarts)
        .into_par_iter()
        .map(|r| climb(&scorer, pi, cfg, r))
        .collect();

    let mut best_idx = 0;
    for (r, run) in runs.iter().enumerate().skip(1) {
        if run.1 > runs[best_idx].1 + SCORE_SLACK {
            best_idx = r;
        }
    }
    let restart_scores = runs.iter().map(|run| run.1).collect();
    let mut trace = Vec::new();
    let mut best = None;
    for (r, (dag, score, steps)) in runs.into_iter().enumerate() {
        trace.extend(steps);
        if r == best_idx {
            best = Some((dag, score));
        }
    }
    let (best, score) = best.expect("at least one restart");
    let cpdag = cpdag(&best, pi)?;
    Ok(SearchResult {
        best,
        cpdag,
        score,
        restart_scores,
        trace,
    })
}

fn restart_rng(seed: u64, restart: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(restart as u64);
    rng
}

fn climb(scorer: &Scorer<'_>, pi: &Partition, cfg: &SearchConfig, restart: usize) -> (Dag, f64, Vec<TraceStep>) {
    let p = pi.p();
    let mut rng = restart_rng(cfg.seed, restart);
    let mut g = if restart == 0 || p < 2 {
        Dag::empty(p)
    } else {
        random_dag(p, Regime::Sparse, &mut rng)
    };
    let rv_of = |g: &Dag, v: NodeId| scorer.residual_variance(v, g.parents(v)).unwrap_or(f64::NAN);
    let mut rv: Vec<f64> = (0..p).map(|v| rv_of(&g, v)).collect();
    let mut score = scorer.bic_from_residuals(pi, &rv, g.num_edges());
    let mut trace = vec![TraceStep {
        restart,
        iteration: 0,
        edit: None,
        score,
    }];

    for iteration in 1..=cfg.max_iters {
        let mut best: Option<(Edit, f64, Dag, Vec<f64>)> = None;
        for edit in neighborhood(&g, pi, cfg.neighborhood_cap, &mut rng) {
            let Ok(next) = edit.apply(&g) else { continue };
            let mut next_rv = rv.clone();
            next_rv[edit.to] = rv_of(&next, edit.to);
            if edit.kind == EditKind::Reverse {
                next_rv[edit.from] = rv_of(&next, edit.from);
            }
            let next_score = scorer.bic_from_residuals(pi, &next_rv, next.num_edges());
            let bar = best.as_ref().map_or(score, |b| b.1);
            if next_score > bar + SCORE_SLACK {
                best = Some((edit, next_score, next, next_rv));
            }
        }
        let Some((edit, next_score, next, next_rv)) = best else {
            break;
        };
        g = next;
        rv = next_rv;
        score = next_score;
        trace.push(TraceStep {
            restart,
            iteration,
            edit: Some(edit),
            score,
        });
    }
    (g, score, trace)
}
