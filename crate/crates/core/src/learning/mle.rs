use nalgebra::{DMatrix, DVector};

use super::SampleCov;
use crate::error::{Error, Result};
use crate::graph::{Dag, NodeId, Partition};

/// Relative pivot threshold below which a parent Gram matrix counts as singular.
pub const DEFAULT_SINGULAR_TOL: f64 = 1e-10;

/// Maximum likelihood fit of `(G, Π)`.
#[derive(Clone, Debug, PartialEq)]
pub struct FitResult {
    /// `lambda_hat[(k, i)]` is the fitted weight of `k -> i`.
    pub lambda_hat: DMatrix<f64>,
    /// One error variance per block, in the partition's block order.
    pub omega_hat: DVector<f64>,
    pub loglik: f64,
    pub bic: f64,
}

/// Per-node least squares on a sample covariance.
#[derive(Clone, Copy, Debug)]
pub struct Scorer<'a> {
    s: &'a SampleCov,
    singular_tol: f64,
}

impl<'a> Scorer<'a> {
    pub fn new(s: &'a SampleCov) -> Self {
        Self {
            s,
            singular_tol: DEFAULT_SINGULAR_TOL,
        }
    }

    pub fn with_singular_tol(mut self, tol: f64) -> Self {
        self.singular_tol = tol;
        self
    }

    pub fn sample_cov(&self) -> &SampleCov {
        self.s
    }

    /// Regression of node `i` on `parents`: coefficients and residual
    /// variance `‖X_i − βᵀX_pa‖² / n`.
    pub fn regress(&self, i: NodeId, parents: &[NodeId]) -> Result<(DVector<f64>, f64)> {
        let s = self.s.matrix();
        if parents.is_empty() {
            return Ok((DVector::zeros(0), s[(i, i)]));
        }
        let spp = s.select_rows(parents).select_columns(parents);
        let spi = DVector::from_iterator(parents.len(), parents.iter().map(|&k| s[(k, i)]));
        let chol = spp.clone().cholesky().ok_or(Error::SingularRegression { node: i })?;
        // each squared pivot is the residual variance of one parent given the
        // previous ones
        let l = chol.l();
        for (x, &k) in parents.iter().enumerate() {
            if l[(x, x)].powi(2) <= self.singular_tol * s[(k, k)] {
                return Err(Error::SingularRegression { node: i });
            }
        }
        let beta = chol.solve(&spi);
        let rv = s[(i, i)] - spi.dot(&beta);
        Ok((beta, rv))
    }

    pub fn residual_variance(&self, i: NodeId, parents: &[NodeId]) -> Result<f64> {
        Ok(self.regress(i, parents)?.1)
    }

    /// BIC from per-node residual variances: pooled within each block, then
    /// `½ Σ_k (−|π_k| log ω̂_k − |π_k|) − log(n)/(2n) · |E|`.
    ///
    /// Any non-finite residual variance, or a non-positive block variance,
    /// scores `−∞`.
    pub fn bic_from_residuals(&self, pi: &Partition, rv: &[f64], num_edges: usize) -> f64 {
        match block_variances(pi, rv) {
            Some(omega) => {
                let n = self.s.n() as f64;
                loglik_per_sample(pi, &omega) - n.ln() / (2.0 * n) * num_edges as f64
            }
            None => f64::NEG_INFINITY,
        }
    }
}

fn block_variances(pi: &Partition, rv: &[f64]) -> Option<Vec<f64>> {
    pi.blocks()
        .iter()
        .map(|block| {
            let w = block.iter().map(|&v| rv[v]).sum::<f64>() / block.len() as f64;
            (w.is_finite() && w > 0.0).then_some(w)
        })
        .collect()
}

/// Maximized log-likelihood divided by `n`.
fn loglik_per_sample(pi: &Partition, omega: &[f64]) -> f64 {
    pi.blocks()
        .iter()
        .zip(omega)
        .map(|(block, w)| {
            let size = block.len() as f64;
            0.5 * (-size * w.ln() - size)
        })
        .sum()
}

fn check_dims(g: &Dag, pi: &Partition, s: &SampleCov) -> Result<()> {
    if g.p() != s.p() {
        return Err(Error::DimensionMismatch {
            expected: s.p(),
            found: g.p(),
        });
    }
    if pi.p() != s.p() {
        return Err(Error::DimensionMismatch {
            expected: s.p(),
            found: pi.p(),
        });
    }
    Ok(())
}

pub fn fit_mle(g: &Dag, pi: &Partition, s: &SampleCov) -> Result<FitResult> {
    fit_with(&Scorer::new(s), g, pi)
}

impl Scorer<'_> {
    /// Maximum likelihood fit of `(G, Π)` using this scorer's tolerance.
    pub fn fit(&self, g: &Dag, pi: &Partition) -> Result<FitResult> {
        fit_with(self, g, pi)
    }
}

pub(crate) fn fit_with(scorer: &Scorer<'_>, g: &Dag, pi: &Partition) -> Result<FitResult> {
    let s = scorer.sample_cov();
    check_dims(g, pi, s)?;
    let p = g.p();
    let mut lambda_hat = DMatrix::zeros(p, p);
    let mut rv = vec![0.0; p];
    for i in 0..p {
        let pa = g.parents(i);
        let (beta, r) = scorer.regress(i, pa)?;
        for (x, &k) in pa.iter().enumerate() {
            lambda_hat[(k, i)] = beta[x];
        }
        rv[i] = r;
    }
    let omega = block_variances(pi, &rv).ok_or_else(|| {
        let node = (0..p).find(|&v| rv[v].is_nan() || rv[v] <= 0.0).unwrap_or(0);
        Error::SingularRegression { node }
    })?;
    let n = s.n() as f64;
    let per_sample = loglik_per_sample(pi, &omega);
    let bic = per_sample - n.ln() / (2.0 * n) * g.num_edges() as f64;
    Ok(FitResult {
        lambda_hat,
        omega_hat: DVector::from_vec(omega),
        loglik: n * per_sample,
        bic,
    })
}

/// BIC score of `(G, Π)` on `s`, normalized by `n` (higher is better).
pub fn bic_score(g: &Dag, pi: &Partition, s: &SampleCov) -> Result<f64> {
    Ok(fit_mle(g, pi, s)?.bic)
}
