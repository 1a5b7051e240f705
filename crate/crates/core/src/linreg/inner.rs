use crate::error::{Error, Result};
use crate::linalg;
use crate::path::PathWeights;

use super::RegressionInstance;

#[derive(Debug, Clone, PartialEq)]
pub struct InnerSolution {
    pub deltas: Vec<f64>,
    /// `C(i, delta) = sum_k alpha_k c(beta_k)` at the returned deltas.
    pub objective: f64,
    /// True when the normal system was singular and had to be regularized.
    pub ridge_used: bool,
}

/// Optimal step values for a fixed index sequence.
pub fn inner_solve(
    inst: &RegressionInstance,
    beta0: &[f64],
    indices: &[usize],
    weights: &PathWeights,
) -> Result<InnerSolution> {
    weights.validate()?;
    inner_solve_weighted(inst, beta0, indices, &weights.first(indices.len()))
}

/// [`inner_solve`] with the weights of steps `1..=K` given explicitly.
/// Missing trailing weights count as zero.
///
/// With `A_j = sum_{k >= j} alpha_k`, the objective is a quadratic in `delta`
/// whose normal system is `H delta = b` where
/// `H[j][l] = A_max(j,l) G[i_j][i_l]` and `b[j] = A_j (g - G beta0)[i_j]`.
pub fn inner_solve_weighted(
    inst: &RegressionInstance,
    beta0: &[f64],
    indices: &[usize],
    weights: &[f64],
) -> Result<InnerSolution> {
    inst.check_beta(beta0)?;
    inst.check_indices(indices)?;
    let k = indices.len();
    if k == 0 {
        return Ok(InnerSolution {
            deltas: Vec::new(),
            objective: 0.0,
            ridge_used: false,
        });
    }
    let alpha: Vec<f64> = (0..k)
        .map(|j| weights.get(j).copied().unwrap_or(0.0))
        .collect();
    if alpha.iter().any(|a| !a.is_finite() || *a < 0.0) {
        return Err(Error::InvalidWeights(
            "step weights must be finite and nonnegative".into(),
        ));
    }
    if alpha.iter().all(|&a| a == 0.0) {
        return Err(Error::InvalidWeights(format!(
            "all weights of the first {k} steps are zero"
        )));
    }

    let mut tail = vec![0.0; k];
    let mut acc = 0.0;
    for j in (0..k).rev() {
        acc += alpha[j];
        tail[j] = acc;
    }

    let d = inst.d();
    let gram = inst.gram();
    let resid = inst.residual_moment(beta0);
    let mut h = vec![0.0; k * k];
    let mut b = vec![0.0; k];
    for j in 0..k {
        b[j] = tail[j] * resid[indices[j]];
        for l in 0..=j {
            let v = tail[j] * gram[indices[j] * d + indices[l]];
            h[j * k + l] = v;
            h[l * k + j] = v;
        }
    }
    let (deltas, ridge_used) = linalg::solve_psd(&h, k, &b)?;
    let objective = weighted_objective(inst, beta0, indices, &deltas, &alpha);
    Ok(InnerSolution {
        deltas,
        objective,
        ridge_used,
    })
}

/// `sum_k alpha_k c(beta_k)` evaluated by walking the path.
pub(crate) fn weighted_objective(
    inst: &RegressionInstance,
    beta0: &[f64],
    indices: &[usize],
    deltas: &[f64],
    alpha: &[f64],
) -> f64 {
    let mut beta = beta0.to_vec();
    let mut total = 0.0;
    for (j, (&i, &delta)) in indices.iter().zip(deltas).enumerate() {
        beta[i] += delta;
        let a = alpha.get(j).copied().unwrap_or(0.0);
        if a != 0.0 {
            total += a * inst.cost_unchecked(&beta);
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{toy_dataset, ToySpec};

    fn toy() -> RegressionInstance {
        toy_dataset(&ToySpec::height_weight(), 0).unwrap()
    }

    #[test]
    fn last_step_only_reaches_least_squares() {
        let inst = toy();
        let s = inner_solve(
            &inst,
            &[0.0, 0.0],
            &[0, 1],
            &PathWeights::Explicit(vec![0.0, 1.0]),
        )
        .unwrap();
        assert!((s.deltas[0] - 2.12).abs() < 1e-9);
        assert!((s.deltas[1] + 0.94).abs() < 1e-9);
        assert!((s.objective - 0.25).abs() < 1e-9);
    }

    #[test]
    fn single_step_matches_line_search() {
        let inst = toy();
        let s = inner_solve(&inst, &[0.0, 0.0], &[0], &PathWeights::Explicit(vec![1.0])).unwrap();
        // delta = g_1 / G_11 = 2.12 - 0.9 * 0.94
        assert!((s.deltas[0] - 1.274).abs() < 1e-9);
        assert!((s.objective - 0.417884).abs() < 1e-5);

        // golden-section search on the one-dimensional cost
        let f = |t: f64| inst.cost_unchecked(&[t, 0.0]);
        let (mut lo, mut hi) = (-10.0, 10.0);
        let phi = (5f64.sqrt() - 1.0) / 2.0;
        for _ in 0..200 {
            let a = hi - phi * (hi - lo);
            let b = lo + phi * (hi - lo);
            if f(a) < f(b) {
                hi = b;
            } else {
                lo = a;
            }
        }
        assert!((0.5 * (lo + hi) - s.deltas[0]).abs() < 1e-6);
    }

    #[test]
    fn empty_index_sequence() {
        let s = inner_solve(&toy(), &[0.0, 0.0], &[], &PathWeights::Geometric(1.0)).unwrap();
        assert!(s.deltas.is_empty());
        assert_eq!(s.objective, 0.0);
    }

    #[test]
    fn all_zero_weights_are_rejected() {
        let err =
            inner_solve(&toy(), &[0.0, 0.0], &[0], &PathWeights::Explicit(vec![0.0])).unwrap_err();
        assert!(matches!(err, Error::InvalidWeights(_)));
    }

    #[test]
    fn repeated_index_with_zero_prefix_weight_uses_ridge() {
        let s = inner_solve(
            &toy(),
            &[0.0, 0.0],
            &[0, 0],
            &PathWeights::Explicit(vec![0.0, 1.0]),
        )
        .unwrap();
        assert!(s.ridge_used);
        assert!((s.objective - 0.417884).abs() < 1e-5);
    }

    #[test]
    fn out_of_range_index() {
        assert!(matches!(
            inner_solve(&toy(), &[0.0, 0.0], &[2], &PathWeights::Geometric(1.0)),
            Err(Error::IndexOutOfRange { index: 2, dim: 2 })
        ));
    }
}
