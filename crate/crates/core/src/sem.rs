//! Covariance algebra of linear Gaussian SEMs with groupwise equal error variances.
//!
//! The model on a DAG `G` sets `X = Λᵀ X + ε` with `ε ~ N(0, diag(ω))`, so
//! `Σ = (I − Λ)^{-T} diag(ω) (I − Λ)^{-1}`. A partition adds the constraint
//! that nodes in the same block share one error variance.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::graph::{check_node, Dag, NodeId, NodeSet, Partition};

/// Default threshold for the normalized determinant in [`ci_holds`].
pub const DEFAULT_CI_TOL: f64 = 1e-9;
/// Default relative threshold for [`equal_variance_holds`].
pub const DEFAULT_VARIANCE_TOL: f64 = 1e-8;

/// Edge weights and error variances of a linear SEM.
#[derive(Clone, Debug, PartialEq)]
pub struct SemParams {
    lambda: DMatrix<f64>,
    omega: DVector<f64>,
}

impl SemParams {
    pub fn new(lambda: DMatrix<f64>, omega: DVector<f64>) -> Result<Self> {
        let p = omega.len();
        if lambda.nrows() != p || lambda.ncols() != p {
            return Err(Error::DimensionMismatch {
                expected: p,
                found: lambda.nrows(),
            });
        }
        if let Some(w) = omega.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
            return Err(Error::InvalidParameters(format!(
                "error variances must be finite and positive, found {w}"
            )));
        }
        if lambda.iter().any(|l| !l.is_finite()) {
            return Err(Error::InvalidParameters("edge weights must be finite".into()));
        }
        Ok(Self { lambda, omega })
    }

    /// Weights given per edge of `g`; everything off the edge set is zero.
    pub fn for_dag<I>(g: &Dag, weights: I, omega: Vec<f64>) -> Result<Self>
    where
        I: IntoIterator<Item = ((NodeId, NodeId), f64)>,
    {
        let p = g.p();
        if omega.len() != p {
            return Err(Error::DimensionMismatch {
                expected: p,
                found: omega.len(),
            });
        }
        let mut lambda = DMatrix::zeros(p, p);
        for ((i, j), w) in weights {
            if !g.has_edge(i, j) {
                return Err(Error::SupportViolation { from: i, to: j });
            }
            lambda[(i, j)] = w;
        }
        Self::new(lambda, DVector::from_vec(omega))
    }

    pub fn p(&self) -> usize {
        self.omega.len()
    }

    /// `lambda[(i, j)]` is the weight of the edge `i -> j`.
    pub fn lambda(&self) -> &DMatrix<f64> {
        &self.lambda
    }

    pub fn omega(&self) -> &DVector<f64> {
        &self.omega
    }

    pub fn check_support(&self, g: &Dag) -> Result<()> {
        if g.p() != self.p() {
            return Err(Error::DimensionMismatch {
                expected: g.p(),
                found: self.p(),
            });
        }
        for i in 0..self.p() {
            for j in 0..self.p() {
                if self.lambda[(i, j)] != 0.0 && !g.has_edge(i, j) {
                    return Err(Error::SupportViolation { from: i, to: j });
                }
            }
        }
        Ok(())
    }

    /// Whether nodes in a common block carry the same error variance, up to
    /// `rel_tol` relative to the block's first member.
    pub fn respects_partition(&self, pi: &Partition, rel_tol: f64) -> bool {
        pi.p() == self.p()
            && pi.blocks().iter().all(|block| {
                let first = self.omega[block[0]];
                block.iter().all(|&v| (self.omega[v] - first).abs() <= rel_tol * first)
            })
    }
}

/// A symmetric positive definite matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Covariance {
    sigma: DMatrix<f64>,
}

impl Covariance {
    /// Validates squareness, symmetry (relative to the largest entry) and
    /// positive definiteness; the stored matrix is exactly symmetrized.
    pub fn new(sigma: DMatrix<f64>) -> Result<Self> {
        if sigma.nrows() != sigma.ncols() {
            return Err(Error::DimensionMismatch {
                expected: sigma.nrows(),
                found: sigma.ncols(),
            });
        }
        if sigma.iter().any(|x| !x.is_finite()) {
            return Err(Error::NotCovariance("non-finite entry".into()));
        }
        let scale = sigma.amax().max(f64::MIN_POSITIVE);
        let asym = (&sigma - sigma.transpose()).amax();
        if asym > 1e-9 * scale {
            return Err(Error::NotCovariance(format!("asymmetry {asym:e}")));
        }
        let sym = (&sigma + sigma.transpose()) * 0.5;
        if sym.clone().cholesky().is_none() {
            return Err(Error::NotCovariance("not positive definite".into()));
        }
        Ok(Self { sigma: sym })
    }

    pub fn identity(p: usize) -> Self {
        Self {
            sigma: DMatrix::identity(p, p),
        }
    }

    pub fn p(&self) -> usize {
        self.sigma.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.sigma
    }

    pub fn get(&self, i: NodeId, j: NodeId) -> f64 {
        self.sigma[(i, j)]
    }
}

/// `(I − Λ)^{-T}`, built row by row in topological order:
/// row `i` is `e_i + Σ_{k ∈ pa(i)} λ_ki · row_k`.
pub(crate) fn total_effects(g: &Dag, params: &SemParams) -> DMatrix<f64> {
    let p = g.p();
    let mut t = DMatrix::<f64>::identity(p, p);
    for i in g.topological_order() {
        for &k in g.parents(i) {
            let w = params.lambda[(k, i)];
            if w != 0.0 {
                for c in 0..p {
                    t[(i, c)] += w * t[(k, c)];
                }
            }
        }
    }
    t
}

/// `Σ = (I − Λ)^{-T} diag(ω) (I − Λ)^{-1}` via triangular propagation.
pub fn implied_covariance(g: &Dag, params: &SemParams) -> Result<Covariance> {
    params.check_support(g)?;
    let t = total_effects(g, params);
    let scaled = DMatrix::from_fn(t.nrows(), t.ncols(), |r, c| t[(r, c)] * params.omega[c]);
    Covariance::new(&scaled * t.transpose())
}

/// Covariance by the trek rule: `σ_ij` sums, over all treks between `i` and
/// `j`, the error variance at the top times the product of edge weights.
pub fn trek_covariance(g: &Dag, params: &SemParams, cap: usize) -> Result<Covariance> {
    params.check_support(g)?;
    let p = g.p();
    let mut sigma = DMatrix::zeros(p, p);
    for i in 0..p {
        for j in i..p {
            let total: f64 = g
                .enumerate_treks(i, j, cap)?
                .iter()
                .map(|t| params.omega[t.top()] * t.edges().map(|(a, b)| params.lambda[(a, b)]).product::<f64>())
                .sum();
            sigma[(i, j)] = total;
            sigma[(j, i)] = total;
        }
    }
    Covariance::new(sigma)
}

fn check_query(sigma: &Covariance, i: NodeId, a: &[NodeId]) -> Result<()> {
    check_node(i, sigma.p())?;
    for &v in a {
        check_node(v, sigma.p())?;
    }
    if a.contains(&i) {
        return Err(Error::InvalidQuery(format!("node {i} is in its own conditioning set")));
    }
    Ok(())
}

/// Residual variance of `X_i` given `X_A`: `σ_ii − Σ_{i,A} Σ_{A,A}^{-1} Σ_{A,i}`,
/// evaluated through a Cholesky factor of `Σ_{A,A}`.
pub fn conditional_variance(sigma: &Covariance, i: NodeId, a: &[NodeId]) -> Result<f64> {
    check_query(sigma, i, a)?;
    let s = sigma.matrix();
    if a.is_empty() {
        return Ok(s[(i, i)]);
    }
    let saa = s.select_rows(a).select_columns(a);
    let sai = DVector::from_iterator(a.len(), a.iter().map(|&k| s[(k, i)]));
    let chol = saa
        .cholesky()
        .ok_or_else(|| Error::NotCovariance("conditioning block not positive definite".into()))?;
    let y = chol
        .l()
        .solve_lower_triangular(&sai)
        .ok_or_else(|| Error::NotCovariance("singular conditioning block".into()))?;
    Ok(s[(i, i)] - y.norm_squared())
}

/// Sets `A` that recover `ω_ii` as a conditional variance: `lower ⊆ A ⊆ upper`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConditioningBounds {
    /// `pa(i)`
    pub lower: NodeSet,
    /// `V ∖ de(i)`
    pub upper: NodeSet,
}

impl ConditioningBounds {
    pub fn admits(&self, a: &[NodeId]) -> bool {
        let a: NodeSet = a.iter().copied().collect();
        self.lower.is_subset(&a) && a.is_subset(&self.upper)
    }
}

pub fn conditioning_bounds(g: &Dag, i: NodeId) -> Result<ConditioningBounds> {
    let rel = g.relatives(i)?;
    let upper = (0..g.p()).filter(|v| !rel.descendants.contains(v)).collect();
    Ok(ConditioningBounds {
        lower: rel.parents,
        upper,
    })
}

/// Error variance of node `i` recovered from `Σ` by conditioning on `a`.
/// Fails unless `pa(i) ⊆ a ⊆ V ∖ de(i)`.
pub fn recover_error_variance(g: &Dag, sigma: &Covariance, i: NodeId, a: &[NodeId]) -> Result<f64> {
    if g.p() != sigma.p() {
        return Err(Error::DimensionMismatch {
            expected: g.p(),
            found: sigma.p(),
        });
    }
    if !conditioning_bounds(g, i)?.admits(a) {
        return Err(Error::InvalidConditioningSet { node: i });
    }
    conditional_variance(sigma, i, a)
}

/// Tests `X_i ⊥ X_j | X_S` by vanishing of `det Σ_{iS, jS}`.
///
/// The determinant is divided by the product of the Euclidean row norms of
/// the submatrix (its Hadamard bound), giving a value in `[0, 1]` that is
/// compared against `tol`.
pub fn ci_holds(sigma: &Covariance, i: NodeId, j: NodeId, s: &[NodeId], tol: f64) -> Result<bool> {
    check_query(sigma, i, s)?;
    check_query(sigma, j, s)?;
    if i == j {
        return Err(Error::InvalidQuery("independence of a node with itself".into()));
    }
    let rows: Vec<NodeId> = std::iter::once(i).chain(s.iter().copied()).collect();
    let cols: Vec<NodeId> = std::iter::once(j).chain(s.iter().copied()).collect();
    let m = sigma.matrix().select_rows(&rows).select_columns(&cols);
    let bound: f64 = m.row_iter().map(|r| r.norm()).product();
    if bound == 0.0 {
        return Ok(true);
    }
    Ok((m.determinant() / bound).abs() <= tol)
}

/// Whether `Var(X_i | X_{A_i}) = Var(X_j | X_{A_j})` within `tol` relative
/// to the mean of the two sides.
pub fn equal_variance_holds(
    sigma: &Covariance,
    i: NodeId,
    a_i: &[NodeId],
    j: NodeId,
    a_j: &[NodeId],
    tol: f64,
) -> Result<bool> {
    let vi = conditional_variance(sigma, i, a_i)?;
    let vj = conditional_variance(sigma, j, a_j)?;
    Ok((vi - vj).abs() <= tol * 0.5 * (vi + vj))
}

/// Whether `Σ` lies in the model of `(G, Π)`.
///
/// Checks the local Markov constraints `X_i ⊥ X_j | X_pa(i)` for every
/// non-descendant `j` that is not a parent, then the equal variance
/// constraints `Var(X_i | X_pa(i)) = Var(X_j | X_pa(j))` for every pair in a
/// common block. Both kinds of test use `tol`.
pub fn is_member(sigma: &Covariance, g: &Dag, pi: &Partition, tol: f64) -> Result<bool> {
    if g.p() != sigma.p() {
        return Err(Error::DimensionMismatch {
            expected: g.p(),
            found: sigma.p(),
        });
    }
    if pi.p() != sigma.p() {
        return Err(Error::DimensionMismatch {
            expected: sigma.p(),
            found: pi.p(),
        });
    }
    for i in 0..g.p() {
        let de = g.descendants(i);
        let pa = g.parents(i);
        for j in 0..g.p() {
            if de.contains(&j) || pa.contains(&j) {
                continue;
            }
            if !ci_holds(sigma, i, j, pa, tol)? {
                return Ok(false);
            }
        }
    }
    for block in pi.blocks() {
        for (x, &i) in block.iter().enumerate() {
            for &j in &block[x + 1..] {
                if !equal_variance_holds(sigma, i, g.parents(i), j, g.parents(j), tol)? {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}
