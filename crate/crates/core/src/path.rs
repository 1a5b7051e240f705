//! Cost sequences and the weighted interpretability losses defined on them.
//!
//! A path `m_0 -> m_1 -> ... -> m_K` is summarised by its cost sequence
//! `(c(m_1), ..., c(m_K), 0, 0, ...)`. Every loss in this module depends on a
//! path only through that sequence, so the model class never appears here.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Costs at or below this value are rejected as non-positive.
pub const MIN_STEP_COST: f64 = 1e-12;

/// Per-step costs of a path. Entries past the stored prefix are zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct CostSequence(Vec<f64>);

impl CostSequence {
    pub fn new(costs: Vec<f64>) -> Result<Self> {
        for (step, &value) in costs.iter().enumerate() {
            if !value.is_finite() || value <= MIN_STEP_COST {
                return Err(Error::InvalidCost {
                    step: step + 1,
                    value,
                });
            }
        }
        Ok(Self(costs))
    }

    pub fn empty() -> Self {
        Self(Vec::new())
    }

    /// Cost of step `k` (1-based); zero past the end of the path.
    pub fn step(&self, k: usize) -> f64 {
        if k == 0 {
            return 0.0;
        }
        self.0.get(k - 1).copied().unwrap_or(0.0)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    /// Cost of the last model of the path, if the path has any step.
    pub fn final_cost(&self) -> Option<f64> {
        self.0.last().copied()
    }

    /// The same path with its last `n` steps removed.
    pub fn truncated(&self, n: usize) -> Self {
        let keep = self.0.len().saturating_sub(n);
        Self(self.0[..keep].to_vec())
    }
}

impl TryFrom<Vec<f64>> for CostSequence {
    type Error = Error;

    fn try_from(costs: Vec<f64>) -> Result<Self> {
        Self::new(costs)
    }
}

impl From<CostSequence> for Vec<f64> {
    fn from(seq: CostSequence) -> Self {
        seq.0
    }
}

/// The weights `alpha_k` of a weighted path loss.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathWeights {
    /// Finitely many weights; steps past the end get weight zero.
    Explicit(Vec<f64>),
    /// `alpha_k = gamma^k`.
    Geometric(f64),
}

impl PathWeights {
    pub fn validate(&self) -> Result<()> {
        match self {
            PathWeights::Explicit(alpha) => {
                if let Some((k, a)) = alpha
                    .iter()
                    .enumerate()
                    .find(|(_, a)| !a.is_finite() || **a < 0.0)
                {
                    return Err(Error::InvalidWeights(format!(
                        "weight alpha_{} = {a} must be finite and nonnegative",
                        k + 1
                    )));
                }
            }
            PathWeights::Geometric(gamma) => {
                if !gamma.is_finite() || *gamma <= 0.0 {
                    return Err(Error::InvalidWeights(format!(
                        "gamma = {gamma} must be finite and positive"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Weight of step `k` (1-based).
    pub fn weight(&self, k: usize) -> f64 {
        match self {
            PathWeights::Explicit(alpha) => {
                if k == 0 {
                    0.0
                } else {
                    alpha.get(k - 1).copied().unwrap_or(0.0)
                }
            }
            PathWeights::Geometric(gamma) => gamma.powi(k as i32),
        }
    }

    /// `(alpha_1, ..., alpha_k)`, zero-padded.
    pub fn first(&self, k: usize) -> Vec<f64> {
        (1..=k).map(|j| self.weight(j)).collect()
    }

    /// Gamma when the weights are geometric.
    pub fn gamma(&self) -> Option<f64> {
        match self {
            PathWeights::Geometric(g) => Some(*g),
            PathWeights::Explicit(_) => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepContribution {
    pub step: usize,
    pub weight: f64,
    pub cost: f64,
    pub contribution: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathLossReport {
    pub loss: f64,
    /// Number of steps in the path.
    pub complexity: usize,
    pub per_step: Vec<StepContribution>,
}

/// Weighted path loss `sum_k alpha_k c_k`.
pub fn path_loss(costs: &CostSequence, weights: &PathWeights) -> Result<PathLossReport> {
    weights.validate()?;
    let per_step: Vec<StepContribution> = costs
        .as_slice()
        .iter()
        .enumerate()
        .map(|(i, &cost)| {
            let weight = weights.weight(i + 1);
            StepContribution {
                step: i + 1,
                weight,
                cost,
                contribution: weight * cost,
            }
        })
        .collect();
    let loss = per_step.iter().map(|s| s.contribution).sum();
    Ok(PathLossReport {
        loss,
        complexity: complexity(costs),
        per_step,
    })
}

/// Path complexity: the number of steps.
pub fn complexity(costs: &CostSequence) -> usize {
    costs.len()
}

/// Weak Pareto dominance: `a_k <= b_k` for every `k`, zero tails included.
pub fn dominates(a: &CostSequence, b: &CostSequence) -> bool {
    let n = a.len().max(b.len());
    (1..=n).all(|k| a.step(k) <= b.step(k))
}

/// Lexicographic order on the zero-padded sequences.
pub fn lex_compare(a: &CostSequence, b: &CostSequence) -> Ordering {
    let n = a.len().max(b.len());
    for k in 1..=n {
        match a.step(k).total_cmp(&b.step(k)) {
            Ordering::Equal => continue,
            other => return other,
        }
    }
    Ordering::Equal
}
