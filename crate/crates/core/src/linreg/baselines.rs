use std::collections::HashMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::path::{CostSequence, PathWeights};

use super::{CoordinatePath, PathSolveResult, RegressionInstance, SolverStats};

/// Subset-DP state cap for [`FeatureOrder::Best`]; above it the ordering is
/// built greedily.
const MAX_ORDER_STATES: u128 = 1_000_000;

/// Gains within this relative margin count as ties.
const GAIN_TOL: f64 = 1e-12;

/// Greedy step choice: coordinate and value that lower the cost the most.
fn greedy_step(inst: &RegressionInstance, beta: &[f64]) -> (usize, f64) {
    let d = inst.d();
    let gram = inst.gram();
    let resid = inst.residual_moment(beta);
    let mut best = (0, 0.0, 0.0);
    for j in 0..d {
        let gjj = gram[j * d + j];
        let (gain, delta) = if gjj > 0.0 {
            (resid[j] * resid[j] / gjj, resid[j] / gjj)
        } else {
            (0.0, 0.0)
        };
        if j == 0 || gain > best.2 + GAIN_TOL * best.2 {
            best = (j, delta, gain);
        }
    }
    (best.0, best.1)
}

pub(crate) fn greedy_indices(inst: &RegressionInstance, beta0: &[f64], k: usize) -> Vec<usize> {
    let mut beta = beta0.to_vec();
    (0..k)
        .map(|_| {
            let (j, delta) = greedy_step(inst, &beta);
            beta[j] += delta;
            j
        })
        .collect()
}

/// Path that takes the cost-minimizing single-coordinate step `k` times.
/// The reported objective is the unweighted sum of step costs.
pub fn greedy_path(inst: &RegressionInstance, beta0: &[f64], k: usize) -> Result<PathSolveResult> {
    let start = Instant::now();
    inst.check_beta(beta0)?;
    let mut beta = beta0.to_vec();
    let mut indices = Vec::with_capacity(k);
    let mut deltas = Vec::with_capacity(k);
    for _ in 0..k {
        let (j, delta) = greedy_step(inst, &beta);
        beta[j] += delta;
        indices.push(j);
        deltas.push(delta);
    }
    finish(
        inst,
        CoordinatePath::new(beta0.to_vec(), indices, deltas)?,
        start,
        k as u64 * inst.d() as u64,
    )
}

/// [`direct_path_from`] starting at the zero model.
pub fn direct_path(inst: &RegressionInstance, k: usize) -> Result<PathSolveResult> {
    direct_path_from(inst, &vec![0.0; inst.d()], k)
}

/// Path that sets coordinates to their least-squares values one at a time,
/// always inserting the coordinate that gives the lowest immediate cost.
pub fn direct_path_from(
    inst: &RegressionInstance,
    beta0: &[f64],
    k: usize,
) -> Result<PathSolveResult> {
    let start = Instant::now();
    inst.check_beta(beta0)?;
    let d = inst.d();
    if k > d {
        return Err(Error::InvalidConfig(format!(
            "direct path has at most d = {d} steps, got K = {k}"
        )));
    }
    let target = inst.ols()?;
    let mut beta = beta0.to_vec();
    let mut remaining: Vec<usize> = (0..d).collect();
    let mut indices = Vec::with_capacity(k);
    let mut deltas = Vec::with_capacity(k);
    let mut evaluated = 0u64;
    for _ in 0..k {
        let mut best: Option<(usize, f64)> = None;
        for (pos, &j) in remaining.iter().enumerate() {
            let old = beta[j];
            beta[j] = target[j];
            let c = inst.cost_unchecked(&beta);
            beta[j] = old;
            evaluated += 1;
            if best.is_none_or(|(_, bc)| c < bc) {
                best = Some((pos, c));
            }
        }
        let (pos, _) = best.expect("remaining is nonempty while k <= d");
        let j = remaining.remove(pos);
        indices.push(j);
        deltas.push(target[j] - beta[j]);
        beta[j] = target[j];
    }
    finish(
        inst,
        CoordinatePath::new(beta0.to_vec(), indices, deltas)?,
        start,
        evaluated,
    )
}

fn finish(
    inst: &RegressionInstance,
    path: CoordinatePath,
    start: Instant,
    evaluated: u64,
) -> Result<PathSolveResult> {
    let objective = path.models().iter().map(|b| inst.cost_unchecked(b)).sum();
    let stats = SolverStats {
        candidates_evaluated: evaluated,
        wall_time: start.elapsed(),
        iterations: path.len() as u64,
    };
    PathSolveResult::from_path(inst, path, objective, stats)
}

/// How [`feature_order_path`] picks the order in which features enter.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureOrder {
    /// Use this order; only the first `K` entries matter.
    Given(Vec<usize>),
    /// Order minimizing the weighted path loss.
    Best,
}

/// A path where step `k` is the least-squares model on the first `k` features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureOrderResult {
    pub order: Vec<usize>,
    pub models: Vec<Vec<f64>>,
    pub cost_sequence: CostSequence,
    pub objective: f64,
}

pub fn feature_order_path(
    inst: &RegressionInstance,
    k: usize,
    weights: &PathWeights,
    mode: FeatureOrder,
) -> Result<FeatureOrderResult> {
    weights.validate()?;
    let d = inst.d();
    if k > d {
        return Err(Error::InvalidOrder(format!(
            "K = {k} exceeds the number of features {d}"
        )));
    }
    let alpha = weights.first(k);
    let mut cache = SupportCosts::new(inst);
    let order = match mode {
        FeatureOrder::Given(order) => {
            check_order(&order, d, k)?;
            order[..k].to_vec()
        }
        FeatureOrder::Best => {
            if d < 64 && subset_states(d, k) <= MAX_ORDER_STATES {
                best_order(&mut cache, d, &alpha)?
            } else {
                log::warn!("too many feature subsets for an exact order; using the greedy order");
                greedy_order(&mut cache, d, k)?
            }
        }
    };
    let mut models = Vec::with_capacity(k);
    let mut costs = Vec::with_capacity(k);
    for m in 1..=k {
        let beta = inst.restricted_ols(&order[..m])?;
        costs.push(inst.cost_unchecked(&beta));
        models.push(beta);
    }
    let objective = alpha.iter().zip(&costs).map(|(a, c)| a * c).sum();
    Ok(FeatureOrderResult {
        order,
        models,
        cost_sequence: CostSequence::new(costs)?,
        objective,
    })
}

fn check_order(order: &[usize], d: usize, k: usize) -> Result<()> {
    if order.len() < k {
        return Err(Error::InvalidOrder(format!(
            "order has {} entries but K = {k}",
            order.len()
        )));
    }
    let mut seen = vec![false; d];
    for &j in order {
        if j >= d {
            return Err(Error::InvalidOrder(format!(
                "feature {j} out of range 0..{d}"
            )));
        }
        if std::mem::replace(&mut seen[j], true) {
            return Err(Error::InvalidOrder(format!("feature {j} repeated")));
        }
    }
    Ok(())
}

fn subset_states(d: usize, k: usize) -> u128 {
    let mut total = 0u128;
    let mut binom = 1u128;
    for m in 0..=k {
        total = total.saturating_add(binom);
        binom = binom.saturating_mul((d - m) as u128) / (m as u128 + 1);
    }
    total
}

/// Restricted least-squares cost per support bitmask, memoized.
struct SupportCosts<'a> {
    inst: &'a RegressionInstance,
    memo: HashMap<u64, f64>,
}

impl<'a> SupportCosts<'a> {
    fn new(inst: &'a RegressionInstance) -> Self {
        Self {
            inst,
            memo: HashMap::new(),
        }
    }

    fn cost(&mut self, mask: u64) -> Result<f64> {
        if let Some(&c) = self.memo.get(&mask) {
            return Ok(c);
        }
        let support: Vec<usize> = (0..self.inst.d()).filter(|&j| mask >> j & 1 == 1).collect();
        let c = self
            .inst
            .cost_unchecked(&self.inst.restricted_ols(&support)?);
        self.memo.insert(mask, c);
        Ok(c)
    }
}

/// Exact order by dynamic programming over supports. `value[S]` is the best
/// weighted cost of the remaining steps once the support `S` is active.
fn best_order(cache: &mut SupportCosts<'_>, d: usize, alpha: &[f64]) -> Result<Vec<usize>> {
    let k = alpha.len();
    let mut value: HashMap<u64, f64> = HashMap::new();
    let best = go(cache, d, alpha, 0, 0, &mut value)?;

    // forward pass picking the smallest feature that attains the optimum
    let mut mask = 0u64;
    let mut order = Vec::with_capacity(k);
    let mut remaining = best;
    for m in 0..k {
        let tol = 1e-10 * remaining.abs().max(1e-300);
        let mut chosen = None;
        for j in (0..d).filter(|&j| mask >> j & 1 == 0) {
            let next = mask | 1 << j;
            let v = alpha[m] * cache.cost(next)? + go(cache, d, alpha, m + 1, next, &mut value)?;
            if v <= remaining + tol {
                chosen = Some((j, v - alpha[m] * cache.cost(next)?));
                break;
            }
        }
        let (j, rest) = chosen.ok_or_else(|| {
            Error::NumericalFailure("feature order reconstruction lost the optimum".into())
        })?;
        order.push(j);
        mask |= 1 << j;
        remaining = rest;
    }
    Ok(order)
}

fn go(
    cache: &mut SupportCosts<'_>,
    d: usize,
    alpha: &[f64],
    m: usize,
    mask: u64,
    value: &mut HashMap<u64, f64>,
) -> Result<f64> {
    if m == alpha.len() {
        return Ok(0.0);
    }
    if let Some(&v) = value.get(&mask) {
        return Ok(v);
    }
    let mut best = f64::INFINITY;
    for j in (0..d).filter(|&j| mask >> j & 1 == 0) {
        let next = mask | 1 << j;
        let v = alpha[m] * cache.cost(next)? + go(cache, d, alpha, m + 1, next, value)?;
        best = best.min(v);
    }
    value.insert(mask, best);
    Ok(best)
}

fn greedy_order(cache: &mut SupportCosts<'_>, d: usize, k: usize) -> Result<Vec<usize>> {
    let mut mask = 0u64;
    let mut order = Vec::with_capacity(k);
    for _ in 0..k {
        let mut best: Option<(usize, f64)> = None;
        for j in (0..d).filter(|&j| mask >> j & 1 == 0) {
            let c = cache.cost(mask | 1 << j)?;
            if best.is_none_or(|(_, bc)| c < bc) {
                best = Some((j, c));
            }
        }
        let (j, _) = best.expect("k <= d leaves a candidate");
        order.push(j);
        mask |= 1 << j;
    }
    Ok(order)
}
