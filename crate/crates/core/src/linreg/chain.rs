//! Step-by-step elimination for the path objective.
//!
//! `F_k(u)` is the smallest weighted cost of the first `k` steps of a path
//! whose `k`-th model is `beta0 + u`. It is a quadratic in `u`, supported on
//! the coordinates touched so far, and obeys
//!
//! ```text
//! F_k(u) = alpha_k c(beta0 + u) + min_t F_{k-1}(u - t e_{i_k})
//! ```
//!
//! The inner minimum is a Schur complement on coordinate `i_k` (or nothing if
//! `i_k` is touched for the first time). Each step costs `O(d^2)`, so the
//! searches can extend a prefix by one index without re-solving the whole
//! `K x K` normal system.

use crate::error::Result;
use crate::linalg;

use super::inner::weighted_objective;
use super::{InnerSolution, RegressionInstance};

/// Diagonal entries at or below this (relative to the largest) count as zero.
const ELIM_TOL: f64 = 1e-13;

/// Quadratic `u' M u - 2 v' u + k` describing a partial path.
#[derive(Debug, Clone)]
pub struct ChainQuadratic<'a> {
    inst: &'a RegressionInstance,
    scale: f64,
    base_cost: f64,
    resid: std::rc::Rc<Vec<f64>>,
    m: Vec<f64>,
    v: Vec<f64>,
    k: f64,
    touched: Vec<bool>,
    len: usize,
}

/// What is needed to undo one step during back-substitution.
#[derive(Debug, Clone)]
enum Elimination {
    /// The coordinate was untouched before the step.
    Fresh(usize),
    /// The earlier cost did not depend on the coordinate.
    Free(usize),
    /// Schur complement with `(M[i, :], v_i, M_ii)` taken before the step.
    Schur(usize, Vec<f64>, f64, f64),
}

impl<'a> ChainQuadratic<'a> {
    pub fn new(inst: &'a RegressionInstance, beta0: &[f64]) -> Result<Self> {
        inst.check_beta(beta0)?;
        let d = inst.d();
        Ok(Self {
            inst,
            scale: inst.scale_factor(),
            base_cost: inst.cost_unchecked(beta0),
            resid: std::rc::Rc::new(inst.residual_moment(beta0)),
            m: vec![0.0; d * d],
            v: vec![0.0; d],
            k: 0.0,
            touched: vec![false; d],
            len: 0,
        })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Appends a step on coordinate `index` with weight `alpha`.
    pub fn push(&mut self, index: usize, alpha: f64) {
        self.push_recorded(index, alpha);
    }

    fn push_recorded(&mut self, index: usize, alpha: f64) -> Elimination {
        let d = self.inst.d();
        let record = if self.touched[index] {
            self.eliminate(index)
        } else {
            Elimination::Fresh(index)
        };
        self.touched[index] = true;
        self.len += 1;
        if alpha != 0.0 {
            let w = alpha * self.scale;
            let gram = self.inst.gram();
            for a in 0..d {
                if !self.touched[a] {
                    continue;
                }
                self.v[a] += w * self.resid[a];
                for b in 0..d {
                    if self.touched[b] {
                        self.m[a * d + b] += w * gram[a * d + b];
                    }
                }
            }
            self.k += alpha * self.base_cost;
        }
        record
    }

    /// Minimizes out coordinate `i`.
    fn eliminate(&mut self, i: usize) -> Elimination {
        let d = self.inst.d();
        let row: Vec<f64> = self.m[i * d..(i + 1) * d].to_vec();
        let vi = self.v[i];
        let mii = row[i];
        let max_diag = (0..d).map(|j| self.m[j * d + j]).fold(0.0, f64::max);
        let schur = mii > ELIM_TOL * max_diag && mii > 0.0;
        if schur {
            for a in 0..d {
                if a == i || row[a] == 0.0 {
                    continue;
                }
                let ra = row[a] / mii;
                for (b, &rb) in row.iter().enumerate() {
                    if b != i {
                        self.m[a * d + b] -= ra * rb;
                    }
                }
                self.v[a] -= ra * vi;
            }
            self.k -= vi * vi / mii;
        }
        for j in 0..d {
            self.m[i * d + j] = 0.0;
            self.m[j * d + i] = 0.0;
        }
        self.v[i] = 0.0;
        if schur {
            Elimination::Schur(i, row, vi, mii)
        } else {
            Elimination::Free(i)
        }
    }

    /// Minimizer `u` of the current quadratic and its value.
    pub fn minimize(&self) -> Result<(Vec<f64>, f64)> {
        let d = self.inst.d();
        let support: Vec<usize> = (0..d).filter(|&j| self.touched[j]).collect();
        let s = support.len();
        let mut u = vec![0.0; d];
        if s == 0 {
            return Ok((u, self.k));
        }
        let mut sub = vec![0.0; s * s];
        for (a, &ia) in support.iter().enumerate() {
            for (b, &ib) in support.iter().enumerate() {
                sub[a * s + b] = self.m[ia * d + ib];
            }
        }
        let rhs: Vec<f64> = support.iter().map(|&j| self.v[j]).collect();
        let (sol, _) = linalg::solve_psd(&sub, s, &rhs)?;
        let value = self.k - linalg::dot(&rhs, &sol);
        for (&j, x) in support.iter().zip(sol) {
            u[j] = x;
        }
        Ok((u, value.max(0.0)))
    }

    /// Optimal weighted cost of the partial path.
    pub fn min_value(&self) -> Result<f64> {
        Ok(self.minimize()?.1)
    }
}

/// Solves the inner problem by forward elimination and back-substitution.
///
/// Independent of the normal-equation route in [`super::inner_solve`]; both
/// must agree on the objective.
pub fn chain_solve(
    inst: &RegressionInstance,
    beta0: &[f64],
    indices: &[usize],
    weights: &[f64],
) -> Result<InnerSolution> {
    inst.check_indices(indices)?;
    let mut chain = ChainQuadratic::new(inst, beta0)?;
    let mut log = Vec::with_capacity(indices.len());
    for (j, &i) in indices.iter().enumerate() {
        log.push(chain.push_recorded(i, weights.get(j).copied().unwrap_or(0.0)));
    }
    let (mut u, _) = chain.minimize()?;
    let d = inst.d();
    let mut deltas = vec![0.0; indices.len()];
    for (j, e) in log.iter().enumerate().rev() {
        let (i, prev) = match e {
            Elimination::Fresh(i) => (*i, 0.0),
            Elimination::Free(i) => (*i, u[*i]),
            Elimination::Schur(i, row, vi, mii) => {
                let s: f64 = (0..d).filter(|a| a != i).map(|a| row[a] * u[a]).sum();
                (*i, (vi - s) / mii)
            }
        };
        deltas[j] = u[i] - prev;
        u[i] = prev;
    }
    let objective = weighted_objective(inst, beta0, indices, &deltas, weights);
    Ok(InnerSolution {
        deltas,
        objective,
        ridge_used: false,
    })
}
