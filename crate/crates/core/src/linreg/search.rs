use std::time::Instant;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::path::PathWeights;

use super::baselines::greedy_indices;
use super::chain::ChainQuadratic;
use super::inner::inner_solve_weighted;
use super::{CoordinatePath, PathSolveResult, RegressionInstance, SolverStats};

/// Default cap on prefix evaluations in [`exact_path_search`].
pub const DEFAULT_NODE_BUDGET: u64 = 10_000_000;

/// Relative tolerance under which two objectives count as tied.
const TIE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExactOptions {
    /// Maximum number of index prefixes evaluated before giving up.
    pub node_budget: u64,
}

impl Default for ExactOptions {
    fn default() -> Self {
        Self {
            node_budget: DEFAULT_NODE_BUDGET,
        }
    }
}

/// Globally optimal index sequence of length `k` for the weighted path loss.
///
/// Ties are broken toward the lexicographically smallest index sequence.
pub fn exact_path_search(
    inst: &RegressionInstance,
    beta0: &[f64],
    k: usize,
    weights: &PathWeights,
) -> Result<PathSolveResult> {
    weights.validate()?;
    exact_path_search_with(inst, beta0, &weights.first(k), &ExactOptions::default())
}

/// [`exact_path_search`] on raw step weights `alpha_1..alpha_K`; `K` is the
/// length of `alpha`.
///
/// Depth-first branch and bound over index prefixes in lexicographic order.
/// A prefix of length `p` is bounded below by its own optimal weighted cost
/// plus `c_min * sum_{j > p} alpha_j`, where `c_min` is the least-squares cost.
pub fn exact_path_search_with(
    inst: &RegressionInstance,
    beta0: &[f64],
    alpha: &[f64],
    opts: &ExactOptions,
) -> Result<PathSolveResult> {
    let found = exact_path_search_below(inst, beta0, alpha, opts, f64::INFINITY)?;
    Ok(found.expect("an infinite cutoff always admits a path"))
}

/// Optimal path of length `alpha.len()` if its objective is below `cutoff`
/// by more than rounding, otherwise `None`.
///
/// A finite cutoff lets callers that compare several path lengths skip
/// lengths that provably cannot win.
pub fn exact_path_search_below(
    inst: &RegressionInstance,
    beta0: &[f64],
    alpha: &[f64],
    opts: &ExactOptions,
    cutoff: f64,
) -> Result<Option<PathSolveResult>> {
    let start = Instant::now();
    inst.check_beta(beta0)?;
    check_alpha(alpha)?;
    let k = alpha.len();
    if k == 0 {
        if !beats(0.0, cutoff) {
            return Ok(None);
        }
        let stats = SolverStats {
            wall_time: start.elapsed(),
            ..Default::default()
        };
        let path = CoordinatePath::empty(beta0.to_vec());
        return PathSolveResult::from_path(inst, path, 0.0, stats).map(Some);
    }

    let c_ols = inst.cost_unchecked(&inst.ols()?);
    // slack well below the tie tolerance so exact ties still prune
    let floor = c_ols * (1.0 - 1e-12);
    let mut suffix = vec![0.0; k + 1];
    for j in (0..k).rev() {
        suffix[j] = suffix[j + 1] + alpha[j];
    }
    if !beats(floor * suffix[0], cutoff) {
        return Ok(None);
    }

    // incumbent: greedy indices polished by single-position swaps
    let seed = greedy_indices(inst, beta0, k);
    let (inc, inc_val, polish_evals) = polish(inst, beta0, alpha, seed)?;
    let (best, best_val) = if beats(inc_val, cutoff) {
        (Some(inc), inc_val)
    } else {
        (None, cutoff)
    };

    let mut bb = BranchAndBound {
        alpha,
        suffix: &suffix,
        floor,
        d: inst.d(),
        budget: opts.node_budget,
        nodes: polish_evals,
        best,
        best_val,
        prefix: Vec::with_capacity(k),
    };
    let root = ChainQuadratic::new(inst, beta0)?;
    bb.descend(&root)?;

    let nodes = bb.nodes;
    let Some(indices) = bb.best else {
        return Ok(None);
    };
    let sol = inner_solve_weighted(inst, beta0, &indices, alpha)?;
    let path = CoordinatePath::new(beta0.to_vec(), indices, sol.deltas)?;
    let stats = SolverStats {
        candidates_evaluated: nodes,
        wall_time: start.elapsed(),
        iterations: 1,
    };
    PathSolveResult::from_path(inst, path, sol.objective, stats).map(Some)
}

/// `value` is below `best` by more than the tie tolerance.
fn beats(value: f64, best: f64) -> bool {
    best == f64::INFINITY || (value < best && !tied(value, best))
}

fn check_alpha(alpha: &[f64]) -> Result<()> {
    if alpha.iter().any(|a| !a.is_finite() || *a < 0.0) {
        return Err(Error::InvalidWeights(
            "step weights must be finite and nonnegative".into(),
        ));
    }
    if !alpha.is_empty() && alpha.iter().all(|&a| a == 0.0) {
        return Err(Error::InvalidWeights(
            "at least one step weight must be positive".into(),
        ));
    }
    Ok(())
}

fn chain_value(
    inst: &RegressionInstance,
    beta0: &[f64],
    indices: &[usize],
    alpha: &[f64],
) -> Result<f64> {
    let mut chain = ChainQuadratic::new(inst, beta0)?;
    for (&i, &a) in indices.iter().zip(alpha) {
        chain.push(i, a);
    }
    chain.min_value()
}

fn tied(a: f64, b: f64) -> bool {
    (a - b).abs() <= TIE_TOL * a.abs().max(b.abs())
}

/// Deterministic first-improvement over single-position changes.
fn polish(
    inst: &RegressionInstance,
    beta0: &[f64],
    alpha: &[f64],
    mut indices: Vec<usize>,
) -> Result<(Vec<usize>, f64, u64)> {
    let mut best = chain_value(inst, beta0, &indices, alpha)?;
    let mut evals = 1;
    for _ in 0..indices.len().max(4) {
        let mut improved = false;
        for p in 0..indices.len() {
            for j in 0..inst.d() {
                if j == indices[p] {
                    continue;
                }
                let old = indices[p];
                indices[p] = j;
                let v = chain_value(inst, beta0, &indices, alpha)?;
                evals += 1;
                if v < best && !tied(v, best) {
                    best = v;
                    improved = true;
                } else {
                    indices[p] = old;
                }
            }
        }
        if !improved {
            break;
        }
    }
    Ok((indices, best, evals))
}

struct BranchAndBound<'a> {
    alpha: &'a [f64],
    suffix: &'a [f64],
    floor: f64,
    d: usize,
    budget: u64,
    nodes: u64,
    /// Best sequence so far; `None` while only the caller's cutoff is known.
    best: Option<Vec<usize>>,
    best_val: f64,
    prefix: Vec<usize>,
}

impl BranchAndBound<'_> {
    fn descend(&mut self, state: &ChainQuadratic<'_>) -> Result<()> {
        let depth = self.prefix.len();
        let k = self.alpha.len();
        for j in 0..self.d {
            self.nodes += 1;
            if self.nodes > self.budget {
                return Err(Error::BudgetExceeded {
                    required: (self.d as u128).saturating_pow(k as u32),
                    budget: self.budget,
                    hint: "use local_improvement for instances of this size",
                });
            }
            let mut child = state.clone();
            child.push(j, self.alpha[depth]);
            self.prefix.push(j);
            let value = child.min_value()?;
            if depth + 1 == k {
                let accept = match &self.best {
                    Some(best) => {
                        beats(value, self.best_val)
                            || (tied(value, self.best_val) && self.prefix < *best)
                    }
                    None => beats(value, self.best_val),
                };
                if accept {
                    self.best_val = value;
                    self.best = Some(self.prefix.clone());
                }
            } else {
                let bound = value + self.floor * self.suffix[depth + 1];
                // a tie can only win if its sequence comes first
                let tie_may_win = match &self.best {
                    Some(best) => self.prefix[..] <= best[..=depth],
                    None => false,
                };
                let prune =
                    !beats(bound, self.best_val) && (!tied(bound, self.best_val) || !tie_may_win);
                if !prune {
                    self.descend(&child)?;
                }
            }
            self.prefix.pop();
        }
        Ok(())
    }
}

/// Local improvement over index sequences.
///
/// Each iteration samples `q` step positions uniformly without replacement,
/// tries all `d^q` reassignments of those positions and keeps the best
/// candidate if it strictly lowers the objective.
pub fn local_improvement(
    inst: &RegressionInstance,
    beta0: &[f64],
    initial: &[usize],
    weights: &PathWeights,
    q: usize,
    iterations: usize,
    seed: u64,
) -> Result<PathSolveResult> {
    let start = Instant::now();
    weights.validate()?;
    inst.check_beta(beta0)?;
    inst.check_indices(initial)?;
    if q == 0 || iterations == 0 {
        return Err(Error::InvalidConfig(
            "local improvement needs q >= 1 and T >= 1".into(),
        ));
    }
    let k = initial.len();
    let alpha = weights.first(k);
    check_alpha(&alpha)?;
    let q = if q > k {
        if k > 0 {
            log::warn!("q = {q} exceeds the path length {k}; using q = {k}");
        }
        k
    } else {
        q
    };

    let d = inst.d();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut incumbent = initial.to_vec();
    let mut best = chain_value(inst, beta0, &incumbent, &alpha)?;
    let mut evaluated = 1u64;
    let mut trace = Vec::with_capacity(iterations);

    if q > 0 {
        for _ in 0..iterations {
            let mut positions = sample(&mut rng, k, q).into_vec();
            positions.sort_unstable();
            let mut candidate = incumbent.clone();
            let mut choice = vec![0usize; q];
            let mut iter_best = incumbent.clone();
            let mut iter_val = best;
            loop {
                for (p, &pos) in positions.iter().enumerate() {
                    candidate[pos] = choice[p];
                }
                let v = chain_value(inst, beta0, &candidate, &alpha)?;
                evaluated += 1;
                if v < iter_val && !tied(v, iter_val) {
                    iter_val = v;
                    iter_best.clone_from(&candidate);
                }
                if !odometer(&mut choice, d) {
                    break;
                }
            }
            if iter_val < best {
                best = iter_val;
                incumbent = iter_best;
            }
            trace.push(best);
        }
    }

    let sol = inner_solve_weighted(inst, beta0, &incumbent, &alpha)?;
    let path = CoordinatePath::new(beta0.to_vec(), incumbent, sol.deltas)?;
    let stats = SolverStats {
        candidates_evaluated: evaluated,
        wall_time: start.elapsed(),
        iterations: trace.len() as u64,
    };
    let mut result = PathSolveResult::from_path(inst, path, sol.objective, stats)?;
    result.objective_trace = trace;
    Ok(result)
}

/// Advances a base-`d` counter; returns false after the last value.
fn odometer(digits: &mut [usize], d: usize) -> bool {
    for digit in digits.iter_mut().rev() {
        *digit += 1;
        if *digit < d {
            return true;
        }
        *digit = 0;
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{toy_dataset, ToySpec};

    fn toy() -> RegressionInstance {
        toy_dataset(&ToySpec::height_weight(), 0).unwrap()
    }

    #[test]
    fn last_step_weight_reaches_least_squares_with_smallest_indices() {
        let r = exact_path_search(
            &toy(),
            &[0.0, 0.0],
            2,
            &PathWeights::Explicit(vec![0.0, 1.0]),
        )
        .unwrap();
        assert_eq!(r.path.indices, vec![0, 1]);
        assert!((r.objective - 0.25).abs() < 1e-9);
    }

    #[test]
    fn single_step_optimum_is_greedy() {
        let r =
            exact_path_search(&toy(), &[0.0, 0.0], 1, &PathWeights::Explicit(vec![1.0])).unwrap();
        assert_eq!(r.path.indices, vec![0]);
        assert!((r.objective - 0.417884).abs() < 1e-5);
    }

    #[test]
    fn cutoff_skips_lengths_that_cannot_win() {
        let inst = toy();
        let alpha = [1.0];
        let opts = ExactOptions::default();
        let full = exact_path_search_with(&inst, &[0.0, 0.0], &alpha, &opts).unwrap();
        let above =
            exact_path_search_below(&inst, &[0.0, 0.0], &alpha, &opts, full.objective + 1e-3)
                .unwrap()
                .unwrap();
        assert_eq!(above.path.indices, full.path.indices);
        assert!(
            exact_path_search_below(&inst, &[0.0, 0.0], &alpha, &opts, full.objective)
                .unwrap()
                .is_none()
        );
        assert!(
            exact_path_search_below(&inst, &[0.0, 0.0], &[1.0; 50], &opts, 1.0)
                .unwrap()
                .is_none()
        );
    }

    #[test]
    fn zero_length_search() {
        let r = exact_path_search(&toy(), &[0.0, 0.0], 0, &PathWeights::Geometric(1.0)).unwrap();
        assert!(r.path.is_empty());
        assert_eq!(r.objective, 0.0);
    }

    #[test]
    fn budget_is_enforced() {
        let err = exact_path_search_with(
            &toy(),
            &[0.0, 0.0],
            &[1.0; 12],
            &ExactOptions { node_budget: 10 },
        )
        .unwrap_err();
        assert!(matches!(err, Error::BudgetExceeded { budget: 10, .. }));
    }

    #[test]
    fn local_improvement_repairs_a_bad_start() {
        let r = local_improvement(
            &toy(),
            &[0.0, 0.0],
            &[1, 1],
            &PathWeights::Explicit(vec![0.0, 1.0]),
            1,
            50,
            0,
        )
        .unwrap();
        assert!((r.objective - 0.25).abs() < 1e-9);
        assert_eq!(r.objective_trace.len(), 50);
        assert!(r.objective_trace.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn local_improvement_clamps_q() {
        let r = local_improvement(
            &toy(),
            &[0.0, 0.0],
            &[0],
            &PathWeights::Geometric(1.0),
            3,
            5,
            1,
        )
        .unwrap();
        assert_eq!(r.path.indices, vec![0]);
        assert!(local_improvement(
            &toy(),
            &[0.0, 0.0],
            &[0],
            &PathWeights::Geometric(1.0),
            0,
            5,
            1
        )
        .is_err());
    }

    #[test]
    fn odometer_enumerates_all() {
        let mut digits = vec![0, 0];
        let mut n = 1;
        while odometer(&mut digits, 3) {
            n += 1;
        }
        assert_eq!(n, 9);
    }
}
