//! Likelihood inference and structure search from observational data.

mod mle;
mod search;
mod shd;

use nalgebra::DMatrix;

pub use mle::{bic_score, fit_mle, FitResult, Scorer, DEFAULT_SINGULAR_TOL};
pub use search::{
    greedy_search, greedy_search_cov, neighborhood, Edit, EditKind, SearchConfig, SearchResult, TraceStep,
};
pub use shd::shd;

use crate::error::{Error, Result};
use crate::sem::Covariance;

/// Observations, one row per sample and one column per variable.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    x: DMatrix<f64>,
}

impl Dataset {
    pub fn new(x: DMatrix<f64>) -> Result<Self> {
        if x.nrows() == 0 || x.ncols() == 0 {
            return Err(Error::DegenerateData("empty data matrix".into()));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::DegenerateData("non-finite observation".into()));
        }
        Ok(Self { x })
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.x
    }
}

/// Sample covariance with divisor `n`, together with the sample size.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleCov {
    s: DMatrix<f64>,
    n: usize,
}

impl SampleCov {
    /// Wrap an already-formed covariance matrix, for example a population
    /// covariance standing in for data.
    pub fn new(s: DMatrix<f64>, n: usize) -> Result<Self> {
        if s.nrows() != s.ncols() {
            return Err(Error::DimensionMismatch {
                expected: s.nrows(),
                found: s.ncols(),
            });
        }
        if n == 0 {
            return Err(Error::DegenerateData("sample size must be positive".into()));
        }
        Ok(Self { s, n })
    }

    pub fn from_covariance(sigma: &Covariance, n: usize) -> Result<Self> {
        Self::new(sigma.matrix().clone(), n)
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.s
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.s.nrows()
    }
}

/// Column-centered `XᵀX / n`.
pub fn sample_covariance(data: &Dataset) -> Result<SampleCov> {
    let n = data.n();
    if n < 2 {
        return Err(Error::DegenerateData(format!("need at least 2 samples, found {n}")));
    }
    let mut xc = data.matrix().clone();
    for (j, mut col) in xc.column_iter_mut().enumerate() {
        let mean = col.mean();
        let scale = col.amax();
        col.add_scalar_mut(-mean);
        let var = col.norm_squared() / n as f64;
        if var <= (1e-12 * scale).powi(2) {
            return Err(Error::DegenerateData(format!("column {j} has zero variance")));
        }
    }
    let s = xc.tr_mul(&xc) / n as f64;
    SampleCov::new((&s + s.transpose()) * 0.5, n)
}
