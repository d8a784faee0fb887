//! Random models and the simulation study harness.
//!
//! Truth graphs are Erdős–Rényi DAGs over a random node order, edge weights
//! are uniform on `[-1, -0.3] ∪ [0.3, 1]`, and each variance block gets one
//! error variance uniform on `[0.3, 1]`. Every trial is scored by the SHD
//! between the true CPDAG and the CPDAG returned by greedy search, once with
//! the true partition and once with the finest partition.

use std::time::Instant;

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::equivalence::cpdag;
use crate::error::{Error, Result};
use crate::graph::{Dag, Partition, Pdag};
use crate::learning::{greedy_search, shd, Dataset, SearchConfig};
use crate::sem::{total_effects, SemParams};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Sparse,
    Dense,
}

impl Regime {
    /// Probability of each forward edge: `3 / (2p − 2)` (capped at 1) when
    /// sparse, `0.3` when dense.
    pub fn edge_probability(self, p: usize) -> f64 {
        match self {
            Regime::Sparse if p >= 2 => (3.0 / (2.0 * p as f64 - 2.0)).min(1.0),
            Regime::Sparse => 0.0,
            Regime::Dense => 0.3,
        }
    }
}

/// How nodes are grouped into equal-variance blocks.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockRecipe {
    /// Sizes `⌈p/2⌉` and `⌊p/2⌋`.
    TwoBlocks,
    /// `⌈p/3⌉ + 1` blocks of near-equal size.
    #[serde(rename = "p_over_3_plus_1")]
    POver3Plus1,
    Custom(Vec<Vec<usize>>),
}

impl BlockRecipe {
    /// Built-in recipes use contiguous index ranges, larger blocks first.
    /// Truth graphs are drawn over a random node order, so contiguity carries
    /// no structural information.
    pub fn partition(&self, p: usize) -> Result<Partition> {
        let k = match self {
            BlockRecipe::TwoBlocks => 2,
            BlockRecipe::POver3Plus1 => p.div_ceil(3) + 1,
            BlockRecipe::Custom(blocks) => return Partition::new(p, blocks.clone()),
        };
        Ok(contiguous_blocks(p, k.clamp(1, p.max(1))))
    }
}

fn contiguous_blocks(p: usize, k: usize) -> Partition {
    let (base, extra) = (p / k, p % k);
    let labels: Vec<usize> = (0..k)
        .flat_map(|b| std::iter::repeat_n(b, base + usize::from(b < extra)))
        .collect();
    Partition::from_labels(&labels)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub p: usize,
    pub n: usize,
    pub regime: Regime,
    pub blocks: BlockRecipe,
    #[serde(default = "default_replicates")]
    pub replicates: usize,
    #[serde(default)]
    pub seed: u64,
    /// Search settings; the seed inside is replaced per trial.
    #[serde(default)]
    pub search: SearchConfig,
}

fn default_replicates() -> usize {
    1
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.p < 2 {
            return Err(Error::InvalidQuery(format!("p must be at least 2, found {}", self.p)));
        }
        if self.n < 2 {
            return Err(Error::InvalidQuery(format!("n must be at least 2, found {}", self.n)));
        }
        if self.replicates == 0 {
            return Err(Error::InvalidQuery("replicates must be at least 1".into()));
        }
        self.blocks.partition(self.p)?;
        self.search.validate()
    }
}

/// Independent random streams of one replicate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stream {
    Graph = 0,
    Weights = 1,
    Noise = 2,
    Search = 3,
}

pub fn substream(seed: u64, replicate: usize, stream: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replicate as u64 * 4 + stream as u64);
    rng
}

/// Erdős–Rényi DAG: each pair `i < j` gets `i -> j` independently, then
/// the labels are permuted uniformly at random.
pub fn random_dag<R: Rng + ?Sized>(p: usize, regime: Regime, rng: &mut R) -> Dag {
    let prob = regime.edge_probability(p);
    let mut edges = Vec::new();
    for i in 0..p {
        for j in i + 1..p {
            if rng.random_bool(prob) {
                edges.push((i, j));
            }
        }
    }
    let mut perm: Vec<usize> = (0..p).collect();
    perm.shuffle(rng);
    Dag::new(p, edges.into_iter().map(|(i, j)| (perm[i], perm[j]))).expect("forward edges are acyclic")
}

/// Edge weights uniform on `[-1, -0.3] ∪ [0.3, 1]`, one variance uniform on
/// `[0.3, 1]` per block.
pub fn random_sem<R: Rng + ?Sized>(g: &Dag, pi: &Partition, rng: &mut R) -> Result<SemParams> {
    if pi.p() != g.p() {
        return Err(Error::DimensionMismatch {
            expected: g.p(),
            found: pi.p(),
        });
    }
    let weights: Vec<_> = g
        .edges()
        .into_iter()
        .map(|e| {
            let magnitude = rng.random_range(0.3..=1.0);
            let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            (e, sign * magnitude)
        })
        .collect();
    let block_var: Vec<f64> = (0..pi.num_blocks()).map(|_| rng.random_range(0.3..=1.0)).collect();
    let omega = (0..g.p()).map(|v| block_var[pi.block_of(v)]).collect();
    SemParams::for_dag(g, weights, omega)
}

/// `n` draws of `X = (I − Λ)^{-T} ε` with `ε ~ N(0, diag(ω))`.
pub fn sample_data<R: Rng + ?Sized>(g: &Dag, params: &SemParams, n: usize, rng: &mut R) -> Result<Dataset> {
    params.check_support(g)?;
    let p = g.p();
    let t = total_effects(g, params);
    let sd: Vec<f64> = params.omega().iter().map(|w| w.sqrt()).collect();
    let mut x = DMatrix::zeros(n, p);
    let mut eps = vec![0.0; p];
    for r in 0..n {
        for (e, s) in eps.iter_mut().zip(&sd) {
            let z: f64 = rng.sample(StandardNormal);
            *e = s * z;
        }
        for i in 0..p {
            x[(r, i)] = (0..p).map(|k| t[(i, k)] * eps[k]).sum();
        }
    }
    Dataset::new(x)
}

/// Ground truth and data of one replicate.
#[derive(Clone, Debug)]
pub struct Trial {
    pub truth: Dag,
    pub partition: Partition,
    pub params: SemParams,
    pub data: Dataset,
}

pub fn draw_trial(cfg: &SimConfig, replicate: usize) -> Result<Trial> {
    cfg.validate()?;
    let partition = cfg.blocks.partition(cfg.p)?;
    let truth = random_dag(cfg.p, cfg.regime, &mut substream(cfg.seed, replicate, Stream::Graph));
    let params = random_sem(&truth, &partition, &mut substream(cfg.seed, replicate, Stream::Weights))?;
    let data = sample_data(
        &truth,
        &params,
        cfg.n,
        &mut substream(cfg.seed, replicate, Stream::Noise),
    )?;
    Ok(Trial {
        truth,
        partition,
        params,
        data,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrialResult {
    pub replicate: usize,
    pub truth: Dag,
    /// CPDAG learned with the true partition.
    pub estimate: Option<Pdag>,
    /// CPDAG learned with the finest partition.
    pub estimate_pi_min: Option<Pdag>,
    pub shd_gev: Option<usize>,
    pub shd_baseline_pi_min: Option<usize>,
    pub runtime_secs: f64,
    pub error: Option<String>,
}

pub fn run_trial(cfg: &SimConfig, replicate: usize) -> Result<TrialResult> {
    let trial = draw_trial(cfg, replicate)?;
    let search = SearchConfig {
        seed: substream(cfg.seed, replicate, Stream::Search).next_u64(),
        ..cfg.search.clone()
    };
    let start = Instant::now();
    let outcome = (|| -> Result<_> {
        let target = cpdag(&trial.truth, &trial.partition)?;
        let informed = greedy_search(&trial.data, &trial.partition, &search)?.cpdag;
        let baseline = greedy_search(&trial.data, &Partition::finest(cfg.p), &search)?.cpdag;
        // the finest-partition run is compared against the same target
        let shd_gev = shd(&target, &informed)?;
        let shd_base = shd(&target, &baseline)?;
        Ok((informed, baseline, shd_gev, shd_base))
    })();
    let runtime_secs = start.elapsed().as_secs_f64();
    Ok(match outcome {
        Ok((informed, baseline, shd_gev, shd_base)) => TrialResult {
            replicate,
            truth: trial.truth,
            estimate: Some(informed),
            estimate_pi_min: Some(baseline),
            shd_gev: Some(shd_gev),
            shd_baseline_pi_min: Some(shd_base),
            runtime_secs,
            error: None,
        },
        Err(e) => TrialResult {
            replicate,
            truth: trial.truth,
            estimate: None,
            estimate_pi_min: None,
            shd_gev: None,
            shd_baseline_pi_min: None,
            runtime_secs,
            error: Some(e.to_string()),
        },
    })
}

/// All replicates of `cfg`, ordered by replicate index.
pub fn run_experiment(cfg: &SimConfig) -> Result<Vec<TrialResult>> {
    cfg.validate()?;
    (0..cfg.replicates).into_par_iter().map(|r| run_trial(cfg, r)).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Quantiles {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    pub mean: f64,
}

impl Quantiles {
    /// Linear interpolation between order statistics. `None` when empty.
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let at = |q: f64| {
            let pos = q * (v.len() - 1) as f64;
            let lo = pos.floor() as usize;
            let hi = pos.ceil() as usize;
            v[lo] + (v[hi] - v[lo]) * (pos - lo as f64)
        };
        Some(Self {
            min: v[0],
            q1: at(0.25),
            median: at(0.5),
            q3: at(0.75),
            max: v[v.len() - 1],
            mean: v.iter().sum::<f64>() / v.len() as f64,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentSummary {
    pub p: usize,
    pub n: usize,
    pub regime: Regime,
    pub blocks: BlockRecipe,
    pub replicates: usize,
    pub failures: usize,
    pub shd_gev: Option<Quantiles>,
    pub shd_baseline_pi_min: Option<Quantiles>,
    /// Fraction of successful trials with SHD 0.
    pub exact_recovery_gev: f64,
    pub exact_recovery_baseline_pi_min: f64,
}

pub fn summarize(cfg: &SimConfig, trials: &[TrialResult]) -> ExperimentSummary {
    let gev: Vec<f64> = trials.iter().filter_map(|t| t.shd_gev).map(|s| s as f64).collect();
    let base: Vec<f64> = trials
        .iter()
        .filter_map(|t| t.shd_baseline_pi_min)
        .map(|s| s as f64)
        .collect();
    let exact = |v: &[f64]| {
        if v.is_empty() {
            0.0
        } else {
            v.iter().filter(|&&s| s == 0.0).count() as f64 / v.len() as f64
        }
    };
    ExperimentSummary {
        p: cfg.p,
        n: cfg.n,
        regime: cfg.regime,
        blocks: cfg.blocks.clone(),
        replicates: trials.len(),
        failures: trials.iter().filter(|t| t.error.is_some()).count(),
        shd_gev: Quantiles::of(&gev),
        shd_baseline_pi_min: Quantiles::of(&base),
        exact_recovery_gev: exact(&gev),
        exact_recovery_baseline_pi_min: exact(&base),
    }
}
