//! Linear regression with single-coordinate steps.
//!
//! A step changes one coefficient of `beta`. A path of length `K` is an index
//! sequence `i_1..i_K` plus the values `delta_1..delta_K` added to those
//! coordinates. For a fixed index sequence the best values come from a convex
//! quadratic problem ([`inner_solve`]); choosing the indices is combinatorial
//! ([`exact_path_search`], [`local_improvement`]).

mod baselines;
mod chain;
mod inner;
mod search;

use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::path::CostSequence;

pub use baselines::{
    direct_path, direct_path_from, feature_order_path, greedy_path, FeatureOrder,
    FeatureOrderResult,
};
pub use chain::{chain_solve, ChainQuadratic};
pub use inner::{inner_solve, inner_solve_weighted, InnerSolution};
pub use search::{
    exact_path_search, exact_path_search_below, exact_path_search_with, local_improvement,
    ExactOptions, DEFAULT_NODE_BUDGET,
};

/// Multiplier applied to the mean squared error.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CostScale {
    /// `(1/n) ||X beta - y||^2`
    #[default]
    Mse,
    /// `(1/2n) ||X beta - y||^2`
    HalfMse,
}

impl CostScale {
    pub fn factor(self) -> f64 {
        match self {
            CostScale::Mse => 1.0,
            CostScale::HalfMse => 0.5,
        }
    }
}

/// A least-squares problem reduced to its second moments.
///
/// The cost of `beta` is `scale * (beta' G beta - 2 g' beta + y_ss)` with
/// `G = X'X / n`, `g = X'y / n` and `y_ss = y'y / n`.
#[derive(Debug, Clone)]
pub struct RegressionInstance {
    n: usize,
    d: usize,
    x: Vec<f64>,
    y: Vec<f64>,
    feature_names: Vec<String>,
    target_name: String,
    gram: Vec<f64>,
    moment: Vec<f64>,
    y_ss: f64,
    scale: CostScale,
}

impl RegressionInstance {
    /// Builds an instance from row-major data (`x.len() == n * d`).
    pub fn new(
        x: Vec<f64>,
        y: Vec<f64>,
        feature_names: Vec<String>,
        target_name: impl Into<String>,
    ) -> Result<Self> {
        let n = y.len();
        let d = feature_names.len();
        if n == 0 || d == 0 {
            return Err(Error::InvalidData(format!(
                "regression needs n >= 1 and d >= 1, got n = {n}, d = {d}"
            )));
        }
        if x.len() != n * d {
            return Err(Error::DimensionMismatch {
                expected: n * d,
                actual: x.len(),
            });
        }
        if x.iter().chain(&y).any(|v| !v.is_finite()) {
            return Err(Error::InvalidData("non-finite value in data".into()));
        }
        let nf = n as f64;
        let mut gram = vec![0.0; d * d];
        let mut moment = vec![0.0; d];
        for r in 0..n {
            let row = &x[r * d..(r + 1) * d];
            for a in 0..d {
                moment[a] += row[a] * y[r];
                for b in a..d {
                    gram[a * d + b] += row[a] * row[b];
                }
            }
        }
        for a in 0..d {
            moment[a] /= nf;
            for b in a..d {
                gram[a * d + b] /= nf;
                gram[b * d + a] = gram[a * d + b];
            }
        }
        let y_ss = y.iter().map(|v| v * v).sum::<f64>() / nf;
        Ok(Self {
            n,
            d,
            x,
            y,
            feature_names,
            target_name: target_name.into(),
            gram,
            moment,
            y_ss,
            scale: CostScale::Mse,
        })
    }

    pub fn with_cost_scale(mut self, scale: CostScale) -> Self {
        self.scale = scale;
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Row-major `n x d` feature matrix.
    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn target_name(&self) -> &str {
        &self.target_name
    }

    pub fn gram(&self) -> &[f64] {
        &self.gram
    }

    pub fn moment(&self) -> &[f64] {
        &self.moment
    }

    pub fn y_ss(&self) -> f64 {
        self.y_ss
    }

    pub fn cost_scale(&self) -> CostScale {
        self.scale
    }

    pub(crate) fn scale_factor(&self) -> f64 {
        self.scale.factor()
    }

    pub fn feature_index(&self, name: &str) -> Option<usize> {
        self.feature_names.iter().position(|f| f == name)
    }

    /// Cost of `beta` without the dimension check.
    pub(crate) fn cost_unchecked(&self, beta: &[f64]) -> f64 {
        let gb = linalg::mat_vec(&self.gram, self.d, beta);
        let q = linalg::dot(beta, &gb) - 2.0 * linalg::dot(&self.moment, beta) + self.y_ss;
        (self.scale.factor() * q).max(0.0)
    }

    /// `g - G beta`, the (halved, unscaled) negative gradient of the cost.
    pub(crate) fn residual_moment(&self, beta: &[f64]) -> Vec<f64> {
        let gb = linalg::mat_vec(&self.gram, self.d, beta);
        self.moment.iter().zip(gb).map(|(g, v)| g - v).collect()
    }

    /// Unconstrained least-squares coefficients.
    pub fn ols(&self) -> Result<Vec<f64>> {
        Ok(linalg::solve_psd(&self.gram, self.d, &self.moment)?.0)
    }

    /// Least-squares coefficients restricted to `support`; zero elsewhere.
    pub fn restricted_ols(&self, support: &[usize]) -> Result<Vec<f64>> {
        let m = support.len();
        let mut beta = vec![0.0; self.d];
        if m == 0 {
            return Ok(beta);
        }
        let mut sub = vec![0.0; m * m];
        for (a, &ia) in support.iter().enumerate() {
            for (b, &ib) in support.iter().enumerate() {
                sub[a * m + b] = self.gram[ia * self.d + ib];
            }
        }
        let rhs: Vec<f64> = support.iter().map(|&i| self.moment[i]).collect();
        let (coef, _) = linalg::solve_psd(&sub, m, &rhs)?;
        for (&i, c) in support.iter().zip(coef) {
            beta[i] = c;
        }
        Ok(beta)
    }

    pub(crate) fn check_beta(&self, beta: &[f64]) -> Result<()> {
        if beta.len() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                actual: beta.len(),
            });
        }
        Ok(())
    }

    pub(crate) fn check_indices(&self, indices: &[usize]) -> Result<()> {
        match indices.iter().find(|&&i| i >= self.d) {
            Some(&index) => Err(Error::IndexOutOfRange { index, dim: self.d }),
            None => Ok(()),
        }
    }
}

/// Mean squared error (times the instance's cost scale) of `beta`.
pub fn mse_cost(inst: &RegressionInstance, beta: &[f64]) -> Result<f64> {
    inst.check_beta(beta)?;
    Ok(inst.cost_unchecked(beta))
}

/// A path of single-coordinate changes starting at `beta0`.
///
/// Indices are zero-based feature positions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoordinatePath {
    pub beta0: Vec<f64>,
    pub indices: Vec<usize>,
    pub deltas: Vec<f64>,
}

impl CoordinatePath {
    pub fn new(beta0: Vec<f64>, indices: Vec<usize>, deltas: Vec<f64>) -> Result<Self> {
        if indices.len() != deltas.len() {
            return Err(Error::DimensionMismatch {
                expected: indices.len(),
                actual: deltas.len(),
            });
        }
        if let Some(&index) = indices.iter().find(|&&i| i >= beta0.len()) {
            return Err(Error::IndexOutOfRange {
                index,
                dim: beta0.len(),
            });
        }
        Ok(Self {
            beta0,
            indices,
            deltas,
        })
    }

    pub fn empty(beta0: Vec<f64>) -> Self {
        Self {
            beta0,
            indices: Vec::new(),
            deltas: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// `beta_1, ..., beta_K` (the start model is not included).
    pub fn models(&self) -> Vec<Vec<f64>> {
        let mut beta = self.beta0.clone();
        self.indices
            .iter()
            .zip(&self.deltas)
            .map(|(&i, &delta)| {
                beta[i] += delta;
                beta.clone()
            })
            .collect()
    }

    pub fn final_model(&self) -> Vec<f64> {
        let mut beta = self.beta0.clone();
        for (&i, &delta) in self.indices.iter().zip(&self.deltas) {
            beta[i] += delta;
        }
        beta
    }

    /// Costs `c(beta_1), ..., c(beta_K)` as a validated sequence.
    pub fn cost_sequence(&self, inst: &RegressionInstance) -> Result<CostSequence> {
        inst.check_beta(&self.beta0)?;
        inst.check_indices(&self.indices)?;
        CostSequence::new(
            self.models()
                .iter()
                .map(|b| inst.cost_unchecked(b))
                .collect(),
        )
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SolverStats {
    pub candidates_evaluated: u64,
    #[serde(with = "duration_secs")]
    pub wall_time: Duration,
    pub iterations: u64,
}

mod duration_secs {
    use std::time::Duration;

    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(d.as_secs_f64())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        Ok(Duration::from_secs_f64(f64::deserialize(d)?))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathSolveResult {
    pub path: CoordinatePath,
    pub cost_sequence: CostSequence,
    /// Weighted loss `sum_k alpha_k c(beta_k)` that the solver minimized.
    pub objective: f64,
    pub stats: SolverStats,
    /// Incumbent objective after each iteration (local improvement only).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub objective_trace: Vec<f64>,
}

impl PathSolveResult {
    pub(crate) fn from_path(
        inst: &RegressionInstance,
        path: CoordinatePath,
        objective: f64,
        stats: SolverStats,
    ) -> Result<Self> {
        let cost_sequence = path.cost_sequence(inst)?;
        Ok(Self {
            path,
            cost_sequence,
            objective,
            stats,
            objective_trace: Vec::new(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> RegressionInstance {
        // x = [[1, 0], [0, 1], [1, 1]], y = [1, 2, 3]
        RegressionInstance::new(
            vec![1.0, 0.0, 0.0, 1.0, 1.0, 1.0],
            vec![1.0, 2.0, 3.0],
            vec!["a".into(), "b".into()],
            "y",
        )
        .unwrap()
    }

    fn direct_mse(inst: &RegressionInstance, beta: &[f64]) -> f64 {
        let d = inst.d();
        let mut s = 0.0;
        for r in 0..inst.n() {
            let pred: f64 = (0..d).map(|j| inst.x()[r * d + j] * beta[j]).sum();
            s += (pred - inst.y()[r]).powi(2);
        }
        s / inst.n() as f64
    }

    #[test]
    fn quadratic_form_matches_residual_sum() {
        let inst = tiny();
        for beta in [[0.0, 0.0], [1.0, 2.0], [-0.3, 0.7]] {
            let c = mse_cost(&inst, &beta).unwrap();
            assert!((c - direct_mse(&inst, &beta)).abs() < 1e-12);
        }
    }

    #[test]
    fn half_mse_scales_cost() {
        let inst = tiny().with_cost_scale(CostScale::HalfMse);
        let c = mse_cost(&inst, &[0.0, 0.0]).unwrap();
        assert!((c - 0.5 * direct_mse(&inst, &[0.0, 0.0])).abs() < 1e-12);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        assert!(matches!(
            mse_cost(&tiny(), &[1.0]),
            Err(Error::DimensionMismatch {
                expected: 2,
                actual: 1
            })
        ));
    }

    #[test]
    fn ols_zeroes_the_gradient() {
        let inst = tiny();
        let beta = inst.ols().unwrap();
        for r in inst.residual_moment(&beta) {
            assert!(r.abs() < 1e-12);
        }
    }

    #[test]
    fn path_models_accumulate_deltas() {
        let p = CoordinatePath::new(vec![0.0, 0.0], vec![0, 1, 0], vec![1.0, 2.0, -0.5]).unwrap();
        assert_eq!(
            p.models(),
            vec![vec![1.0, 0.0], vec![1.0, 2.0], vec![0.5, 2.0]]
        );
        assert_eq!(p.final_model(), vec![0.5, 2.0]);
        assert!(CoordinatePath::new(vec![0.0], vec![1], vec![1.0]).is_err());
        assert!(CoordinatePath::new(vec![0.0], vec![0], vec![]).is_err());
    }
}
