//! Tradeoff between the cost of a model and the interpretability loss of the
//! best path reaching it.
//!
//! [`sweep`] minimizes `c(m_K) + lambda * L_alpha` over paths of every length
//! in range for each `lambda` on a grid. That recovers the convex part of the
//! front. [`enumerate_front`] walks every step sequence of bounded length on
//! small instances and also finds the non-convex parts.

use std::fmt::Debug;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linreg::{
    exact_path_search_below, greedy_path, inner_solve_weighted, local_improvement, mse_cost,
    CoordinatePath, ExactOptions, RegressionInstance, DEFAULT_NODE_BUDGET,
};
use crate::path::PathWeights;
use crate::tree::{self, LabeledDataset2C, TreeStep, DEFAULT_TREE_BUDGET};

/// Floor used for `c_min` when the best attainable cost is zero.
pub const FALLBACK_COST_FLOOR: f64 = 1e-6;

/// Relative tolerance for dominance and duplicate checks.
const FRONT_TOL: f64 = 1e-9;

/// One point of a tradeoff curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParetoPoint<P> {
    /// Weight that produced the point; `None` for enumerated points that do
    /// not come from a weighted sum.
    pub lambda: Option<f64>,
    #[serde(rename = "K")]
    pub k: usize,
    pub cost: f64,
    pub interpretability_loss: f64,
    pub path: P,
}

/// Outcome of a fixed-length solve: the path and its costs `c_1..c_K`.
#[derive(Debug, Clone, PartialEq)]
pub struct FixedLength<P> {
    pub path: P,
    pub costs: Vec<f64>,
    pub objective: f64,
}

/// A model class that can find optimal paths of a given length.
pub trait PathProblem {
    type Path: Clone + Debug + PartialEq;

    /// Cost of the start model.
    fn empty_cost(&self) -> f64;
    fn empty_path(&self) -> Self::Path;
    /// Lowest attainable cost (zero is allowed).
    fn optimal_cost(&self) -> Result<f64>;
    /// Longest path considered when no bound applies.
    fn default_k_cap(&self) -> usize;
    /// Path of length `alpha.len()` minimizing `sum_k alpha_k c_k`.
    fn solve_fixed_length(&self, alpha: &[f64]) -> Result<FixedLength<Self::Path>>;
    /// Like [`PathProblem::solve_fixed_length`], but `None` when no path
    /// beats `cutoff`. Exact solvers use the cutoff to prune.
    fn solve_fixed_length_below(
        &self,
        alpha: &[f64],
        cutoff: f64,
    ) -> Result<Option<FixedLength<Self::Path>>> {
        let sol = self.solve_fixed_length(alpha)?;
        Ok((sol.objective < cutoff - FRONT_TOL * cutoff.abs().max(1e-300)).then_some(sol))
    }
    /// For every step sequence of length `k`, the points its step values can
    /// reach when minimizing `sum_k coef_k c_k` for each coefficient vector
    /// in `scalarizations`.
    fn trace_sequences(
        &self,
        k: usize,
        scalarizations: &[Vec<f64>],
        budget: u64,
    ) -> Result<Vec<FixedLength<Self::Path>>>;
}

/// Upper bound on useful path length under geometric weights `gamma >= 1`:
/// longer paths cannot beat the empty path in `c + lambda * L`.
pub fn kmax(gamma: f64, lambda: f64, c_min: f64, c_max: f64) -> Result<usize> {
    if gamma.is_nan() || gamma < 1.0 || !gamma.is_finite() {
        return Err(Error::InapplicableBound(format!(
            "the length bound needs gamma >= 1, got {gamma}"
        )));
    }
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "lambda must be positive, got {lambda}"
        )));
    }
    if !(c_min > 0.0 && c_max >= c_min && c_max.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "need 0 < c_min <= c_max, got c_min = {c_min}, c_max = {c_max}"
        )));
    }
    let raw = if gamma == 1.0 {
        c_max / (lambda * c_min)
    } else {
        (1.0 + (gamma - 1.0) * c_max / (lambda * gamma * c_min)).ln() / gamma.ln()
    };
    // ceil of a value that rounding nudged just above an integer
    let rounded = raw.round();
    let k = if (raw - rounded).abs() <= 1e-12 * raw.max(1.0) {
        rounded
    } else {
        raw.ceil()
    };
    Ok(if k >= usize::MAX as f64 {
        usize::MAX
    } else {
        k as usize
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub lambda_grid: Vec<f64>,
    pub weights: PathWeights,
    /// Longest path tried when the length bound is unavailable or larger;
    /// `None` uses the problem default.
    pub k_cap: Option<usize>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            lambda_grid: log_grid(1e-3, 1e3, 61),
            weights: PathWeights::Geometric(1.0),
            k_cap: None,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        self.weights.validate()?;
        if self
            .lambda_grid
            .iter()
            .any(|l| !(*l > 0.0 && l.is_finite()))
        {
            return Err(Error::InvalidConfig(
                "lambda grid values must be positive".into(),
            ));
        }
        if self.lambda_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidConfig(
                "lambda grid must be strictly increasing".into(),
            ));
        }
        Ok(())
    }
}

/// `count` log-spaced values from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            (0..count)
                .map(|i| {
                    if i + 1 == count {
                        hi
                    } else {
                        (a + (b - a) * i as f64 / (count - 1) as f64).exp()
                    }
                })
                .collect()
        }
    }
}

/// `c_min` for the length bound: the optimal cost, or a small floor when
/// that is zero.
pub fn cost_floor<P: PathProblem + ?Sized>(problem: &P) -> Result<f64> {
    let c = problem.optimal_cost()?;
    if c > 0.0 {
        Ok(c)
    } else {
        log::warn!("optimal cost is zero; using {FALLBACK_COST_FLOOR} as the cost floor");
        Ok(FALLBACK_COST_FLOOR)
    }
}

/// Largest path length tried at `lambda`.
pub fn k_limit<P: PathProblem + ?Sized>(
    problem: &P,
    weights: &PathWeights,
    lambda: f64,
    k_cap: Option<usize>,
) -> Result<usize> {
    let cap = k_cap.unwrap_or_else(|| problem.default_k_cap());
    let gamma = match weights {
        PathWeights::Geometric(g) if *g >= 1.0 => *g,
        _ => return Ok(cap),
    };
    let c_max = problem.empty_cost();
    let c_min = cost_floor(problem)?;
    if c_max <= c_min {
        return Ok(0);
    }
    let bound = kmax(gamma, lambda, c_min, c_max)?;
    if bound > cap {
        log::info!("length bound {bound} at lambda {lambda} truncated to {cap}");
    }
    Ok(bound.min(cap))
}

/// Step coefficients whose weighted sum equals `c_K + lambda * L_alpha`.
pub fn scalarized_weights(alpha: &[f64], lambda: f64) -> Vec<f64> {
    let mut coef: Vec<f64> = alpha.iter().map(|a| lambda * a).collect();
    if let Some(last) = coef.last_mut() {
        *last += 1.0;
    }
    coef
}

fn point_from<P>(
    lambda: Option<f64>,
    empty_cost: f64,
    alpha: &[f64],
    sol: FixedLength<P>,
) -> ParetoPoint<P> {
    let loss = alpha.iter().zip(&sol.costs).map(|(a, c)| a * c).sum();
    ParetoPoint {
        lambda,
        k: sol.costs.len(),
        cost: sol.costs.last().copied().unwrap_or(empty_cost),
        interpretability_loss: loss,
        path: sol.path,
    }
}

/// Minimizer of `c + lambda * L` over path lengths `0..=k_max`; ties go to
/// the shorter path.
pub fn weighted_sum_point<P: PathProblem + ?Sized>(
    problem: &P,
    lambda: f64,
    weights: &PathWeights,
    k_max: usize,
) -> Result<ParetoPoint<P::Path>> {
    weights.validate()?;
    let mut best = ParetoPoint {
        lambda: Some(lambda),
        k: 0,
        cost: problem.empty_cost(),
        interpretability_loss: 0.0,
        path: problem.empty_path(),
    };
    let mut best_val = best.cost;
    for k in 1..=k_max {
        let alpha = weights.first(k);
        let coef = scalarized_weights(&alpha, lambda);
        let found = problem
            .solve_fixed_length_below(&coef, best_val)
            .map_err(|e| Error::AtLambda {
                lambda,
                source: Box::new(e),
            })?;
        let Some(sol) = found else { continue };
        let point = point_from(Some(lambda), problem.empty_cost(), &alpha, sol);
        let val = point.cost + lambda * point.interpretability_loss;
        if val < best_val - FRONT_TOL * best_val.abs().max(1e-300) {
            best_val = val;
            best = point;
        }
    }
    Ok(best)
}

/// One weighted-sum point per grid value, merged, sorted by cost and
/// filtered to the non-dominated set.
pub fn sweep<P: PathProblem + ?Sized>(
    problem: &P,
    cfg: &SweepConfig,
) -> Result<Vec<ParetoPoint<P::Path>>> {
    cfg.validate()?;
    let mut points: Vec<ParetoPoint<P::Path>> = Vec::new();
    for &lambda in &cfg.lambda_grid {
        let k_max = k_limit(problem, &cfg.weights, lambda, cfg.k_cap)?;
        let p = weighted_sum_point(problem, lambda, &cfg.weights, k_max)?;
        if !points.iter().any(|q| q.k == p.k && q.path == p.path) {
            points.push(p);
        }
    }
    Ok(non_dominated(points))
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= FRONT_TOL * a.abs().max(b.abs()).max(1.0)
}

/// True when `a` is at least as good as `b` in both coordinates and
/// strictly better in one, beyond rounding.
pub fn point_dominates<P>(a: &ParetoPoint<P>, b: &ParetoPoint<P>) -> bool {
    let le = |x: f64, y: f64| x <= y || close(x, y);
    le(a.cost, b.cost)
        && le(a.interpretability_loss, b.interpretability_loss)
        && !(close(a.cost, b.cost) && close(a.interpretability_loss, b.interpretability_loss))
}

/// Keeps points no other point dominates; among coincident points the
/// earliest survives. Output is sorted by cost, then loss.
pub fn non_dominated<P>(points: Vec<ParetoPoint<P>>) -> Vec<ParetoPoint<P>> {
    let keep: Vec<bool> = points
        .iter()
        .enumerate()
        .map(|(i, p)| {
            !points.iter().enumerate().any(|(j, q)| {
                point_dominates(q, p)
                    || (j < i
                        && close(q.cost, p.cost)
                        && close(q.interpretability_loss, p.interpretability_loss))
            })
        })
        .collect();
    let mut kept: Vec<ParetoPoint<P>> = points
        .into_iter()
        .zip(keep)
        .filter_map(|(p, k)| k.then_some(p))
        .collect();
    kept.sort_by(|a, b| {
        a.cost
            .total_cmp(&b.cost)
            .then(a.interpretability_loss.total_cmp(&b.interpretability_loss))
    });
    kept
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontOptions {
    /// Weights used to trace each sequence's convex front.
    pub mu_grid: Vec<f64>,
    /// Cap on the number of (sequence, weight) solves.
    pub budget: u64,
}

impl Default for FrontOptions {
    fn default() -> Self {
        let mut mu_grid = log_grid(1e-3, 1e3, 61);
        mu_grid.extend(log_grid(1e-4, 1e4, 241));
        mu_grid.sort_by(f64::total_cmp);
        mu_grid.dedup();
        Self {
            mu_grid,
            budget: DEFAULT_NODE_BUDGET,
        }
    }
}

/// Non-dominated points among all step sequences of length `0..=k_limit`.
///
/// For each sequence, its own (convex) front is traced by weighted sums over
/// `mu_grid`; the union is then filtered. A point that is only optimal for
/// one sequence can still be Pareto optimal overall, which is how the
/// non-convex parts of the front appear.
pub fn enumerate_front<P: PathProblem + ?Sized>(
    problem: &P,
    k_limit: usize,
    weights: &PathWeights,
) -> Result<Vec<ParetoPoint<P::Path>>> {
    enumerate_front_with(problem, k_limit, weights, &FrontOptions::default())
}

pub fn enumerate_front_with<P: PathProblem + ?Sized>(
    problem: &P,
    k_limit: usize,
    weights: &PathWeights,
    opts: &FrontOptions,
) -> Result<Vec<ParetoPoint<P::Path>>> {
    weights.validate()?;
    let mut points = vec![ParetoPoint {
        lambda: None,
        k: 0,
        cost: problem.empty_cost(),
        interpretability_loss: 0.0,
        path: problem.empty_path(),
    }];
    let mut spent = 0u64;
    for k in 1..=k_limit {
        let alpha = weights.first(k);
        let scal: Vec<Vec<f64>> = opts
            .mu_grid
            .iter()
            .map(|&mu| scalarized_weights(&alpha, mu))
            .collect();
        let remaining = opts.budget.saturating_sub(spent);
        let sols = problem.trace_sequences(k, &scal, remaining)?;
        spent += sols.len() as u64;
        points.extend(
            sols.into_iter()
                .map(|s| point_from(None, problem.empty_cost(), &alpha, s)),
        );
        points = non_dominated(points);
    }
    Ok(points)
}

/// Which fixed-length solver a regression sweep uses.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum RegressionSolver {
    Exact,
    /// Local improvement from the greedy index sequence.
    Local {
        q: usize,
        iterations: usize,
        seed: u64,
    },
    /// Exact search, falling back to local improvement (q = 2) over budget.
    Auto {
        iterations: usize,
        seed: u64,
    },
}

impl Default for RegressionSolver {
    fn default() -> Self {
        RegressionSolver::Auto {
            iterations: 200,
            seed: 0,
        }
    }
}

/// Linear regression from a fixed start model.
#[derive(Debug, Clone)]
pub struct RegressionProblem<'a> {
    pub inst: &'a RegressionInstance,
    pub beta0: Vec<f64>,
    pub solver: RegressionSolver,
    pub node_budget: u64,
}

impl<'a> RegressionProblem<'a> {
    pub fn new(inst: &'a RegressionInstance, beta0: Vec<f64>) -> Result<Self> {
        mse_cost(inst, &beta0)?;
        Ok(Self {
            inst,
            beta0,
            solver: RegressionSolver::default(),
            node_budget: DEFAULT_NODE_BUDGET,
        })
    }

    pub fn with_solver(mut self, solver: RegressionSolver) -> Self {
        self.solver = solver;
        self
    }

    pub fn with_budget(mut self, budget: u64) -> Self {
        self.node_budget = budget;
        self
    }

    fn local(
        &self,
        alpha: &[f64],
        q: usize,
        iterations: usize,
        seed: u64,
    ) -> Result<FixedLength<CoordinatePath>> {
        let k = alpha.len();
        let start = greedy_path(self.inst, &self.beta0, k)?.path.indices;
        let r = local_improvement(
            self.inst,
            &self.beta0,
            &start,
            &PathWeights::Explicit(alpha.to_vec()),
            q.min(k),
            iterations,
            seed,
        )?;
        Ok(self.fixed(r.path, r.objective))
    }

    fn fixed(&self, path: CoordinatePath, objective: f64) -> FixedLength<CoordinatePath> {
        let costs = path
            .models()
            .iter()
            .map(|b| mse_cost(self.inst, b).unwrap_or(f64::NAN))
            .collect();
        FixedLength {
            path,
            costs,
            objective,
        }
    }
}

impl PathProblem for RegressionProblem<'_> {
    type Path = CoordinatePath;

    fn empty_cost(&self) -> f64 {
        mse_cost(self.inst, &self.beta0).unwrap_or(f64::NAN)
    }

    fn empty_path(&self) -> CoordinatePath {
        CoordinatePath::empty(self.beta0.clone())
    }

    fn optimal_cost(&self) -> Result<f64> {
        mse_cost(self.inst, &self.inst.ols()?)
    }

    fn default_k_cap(&self) -> usize {
        3 * self.inst.d()
    }

    fn solve_fixed_length(&self, alpha: &[f64]) -> Result<FixedLength<CoordinatePath>> {
        let sol = self.solve_fixed_length_below(alpha, f64::INFINITY)?;
        Ok(sol.expect("an infinite cutoff always admits a path"))
    }

    fn solve_fixed_length_below(
        &self,
        alpha: &[f64],
        cutoff: f64,
    ) -> Result<Option<FixedLength<CoordinatePath>>> {
        let opts = ExactOptions {
            node_budget: self.node_budget,
        };
        let exact = || exact_path_search_below(self.inst, &self.beta0, alpha, &opts, cutoff);
        let below = |sol: FixedLength<CoordinatePath>| {
            (sol.objective < cutoff - FRONT_TOL * cutoff.abs().max(1e-300)).then_some(sol)
        };
        match self.solver {
            RegressionSolver::Exact => Ok(exact()?.map(|r| self.fixed(r.path, r.objective))),
            RegressionSolver::Local {
                q,
                iterations,
                seed,
            } => Ok(below(self.local(alpha, q, iterations, seed)?)),
            RegressionSolver::Auto { iterations, seed } => match exact() {
                Ok(r) => Ok(r.map(|r| self.fixed(r.path, r.objective))),
                Err(Error::BudgetExceeded { .. }) => {
                    log::warn!(
                        "exact search over budget for K = {}; using local improvement",
                        alpha.len()
                    );
                    Ok(below(self.local(alpha, 2, iterations, seed)?))
                }
                Err(e) => Err(e),
            },
        }
    }

    fn trace_sequences(
        &self,
        k: usize,
        scalarizations: &[Vec<f64>],
        budget: u64,
    ) -> Result<Vec<FixedLength<CoordinatePath>>> {
        let d = self.inst.d();
        let sequences = (d as u128).saturating_pow(k as u32);
        let required = sequences.saturating_mul(scalarizations.len() as u128);
        if required > budget as u128 {
            return Err(Error::BudgetExceeded {
                required,
                budget,
                hint: "lower the path length limit for front enumeration",
            });
        }
        let mut out = Vec::with_capacity(required as usize);
        let mut indices = vec![0usize; k];
        loop {
            for coef in scalarizations {
                let sol = inner_solve_weighted(self.inst, &self.beta0, &indices, coef)?;
                let path = CoordinatePath::new(self.beta0.clone(), indices.clone(), sol.deltas)?;
                out.push(self.fixed(path, sol.objective));
            }
            // next index sequence in lexicographic order
            let mut pos = k;
            loop {
                if pos == 0 {
                    return Ok(out);
                }
                pos -= 1;
                indices[pos] += 1;
                if indices[pos] < d {
                    break;
                }
                indices[pos] = 0;
            }
        }
    }
}

/// Two-class trees of bounded depth, grown from a single leaf.
#[derive(Debug, Clone)]
pub struct TreeProblem<'a> {
    pub data: &'a LabeledDataset2C,
    pub max_depth: usize,
    pub budget: u64,
}

impl<'a> TreeProblem<'a> {
    pub fn new(data: &'a LabeledDataset2C, max_depth: usize) -> Self {
        Self {
            data,
            max_depth,
            budget: DEFAULT_TREE_BUDGET,
        }
    }
}

impl PathProblem for TreeProblem<'_> {
    type Path = Vec<TreeStep>;

    fn empty_cost(&self) -> f64 {
        let ones = self.data.labels().iter().filter(|&&l| l == 1).count();
        ones.min(self.data.n() - ones) as f64
    }

    fn empty_path(&self) -> Vec<TreeStep> {
        Vec::new()
    }

    fn optimal_cost(&self) -> Result<f64> {
        Ok(tree::optimal_tree_cost(self.data, self.max_depth) as f64)
    }

    fn default_k_cap(&self) -> usize {
        (1usize << self.max_depth.min(tree::MAX_DEPTH)) - 1
    }

    fn solve_fixed_length(&self, alpha: &[f64]) -> Result<FixedLength<Vec<TreeStep>>> {
        let sol = self.solve_fixed_length_below(alpha, f64::INFINITY)?;
        sol.ok_or_else(|| {
            Error::InvalidData(format!(
                "no nested path of length {} exists (too few distinct points)",
                alpha.len()
            ))
        })
    }

    fn solve_fixed_length_below(
        &self,
        alpha: &[f64],
        cutoff: f64,
    ) -> Result<Option<FixedLength<Vec<TreeStep>>>> {
        let found = tree::search_nested(self.data, self.max_depth, alpha, self.budget, cutoff)?;
        Ok(found.map(|(steps, costs, objective, _)| FixedLength {
            path: steps,
            costs: costs.into_iter().map(|c| c as f64).collect(),
            objective,
        }))
    }

    fn trace_sequences(
        &self,
        k: usize,
        scalarizations: &[Vec<f64>],
        budget: u64,
    ) -> Result<Vec<FixedLength<Vec<TreeStep>>>> {
        // a tree path has no continuous parameters; every weighting sees the
        // same costs, so one point per path
        let coef = scalarizations
            .first()
            .cloned()
            .unwrap_or_else(|| vec![1.0; k]);
        let mut out = Vec::new();
        tree::for_each_nested_path(self.data, self.max_depth, k, budget, |steps, costs| {
            let objective = coef.iter().zip(costs).map(|(a, &c)| a * c as f64).sum();
            out.push(FixedLength {
                path: steps.to_vec(),
                costs: costs.iter().map(|&c| c as f64).collect(),
                objective,
            });
        })?;
        Ok(out)
    }
}
