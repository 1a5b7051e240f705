//! Reference implementations used by the integration tests. They share no
//! code with the library beyond data access: costs come from raw residuals,
//! inner problems from finite-difference quadratics, and tree searches from
//! plain enumeration.

#![allow(dead_code)]

use std::collections::HashMap;

use interpretable_paths::linreg::RegressionInstance;
use interpretable_paths::tree::LabeledDataset2C;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// `c(beta)` straight from the rows.
pub fn raw_cost(inst: &RegressionInstance, beta: &[f64]) -> f64 {
    let d = inst.d();
    let sse: f64 = (0..inst.n())
        .map(|r| {
            let fit: f64 = inst.x()[r * d..(r + 1) * d]
                .iter()
                .zip(beta)
                .map(|(a, b)| a * b)
                .sum();
            (inst.y()[r] - fit).powi(2)
        })
        .sum();
    inst.cost_scale().factor() * sse / inst.n() as f64
}

/// Weighted path objective for explicit step values.
pub fn path_objective(
    inst: &RegressionInstance,
    beta0: &[f64],
    indices: &[usize],
    deltas: &[f64],
    alpha: &[f64],
) -> f64 {
    let mut beta = beta0.to_vec();
    let mut total = 0.0;
    for (k, (&i, &dv)) in indices.iter().zip(deltas).enumerate() {
        beta[i] += dv;
        total += alpha.get(k).copied().unwrap_or(0.0) * raw_cost(inst, &beta);
    }
    total
}

/// Minimum of the inner quadratic. Gradient and Hessian come from unit
/// finite differences, which are exact for a quadratic; the stationary
/// system is solved by pivoted elimination with free directions set to 0.
pub fn oracle_inner(
    inst: &RegressionInstance,
    beta0: &[f64],
    indices: &[usize],
    alpha: &[f64],
) -> (Vec<f64>, f64) {
    let k = indices.len();
    let f = |delta: &[f64]| path_objective(inst, beta0, indices, delta, alpha);
    let unit = |j: usize, s: f64| {
        let mut v = vec![0.0; k];
        v[j] = s;
        v
    };
    let f0 = f(&vec![0.0; k]);
    let grad: Vec<f64> = (0..k)
        .map(|j| (f(&unit(j, 1.0)) - f(&unit(j, -1.0))) / 2.0)
        .collect();
    let mut hess = vec![vec![0.0; k]; k];
    for a in 0..k {
        for b in 0..k {
            let mut e = vec![0.0; k];
            e[a] += 1.0;
            e[b] += 1.0;
            hess[a][b] = f(&e) - f(&unit(a, 1.0)) - f(&unit(b, 1.0)) + f0;
        }
    }
    let rhs: Vec<f64> = grad.iter().map(|g| -g).collect();
    let delta = pivoted_solve(hess, rhs);
    let value = f(&delta);
    (delta, value)
}

fn pivoted_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    let scale = a
        .iter()
        .flatten()
        .fold(0.0f64, |m, v| m.max(v.abs()))
        .max(1e-300);
    let mut pivot_col = vec![usize::MAX; n];
    let mut row = 0;
    for col in 0..n {
        let Some(p) = (row..n).max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs())) else {
            break;
        };
        if a[p][col].abs() <= 1e-11 * scale {
            continue;
        }
        a.swap(row, p);
        b.swap(row, p);
        for r in 0..n {
            if r != row {
                let m = a[r][col] / a[row][col];
                if m != 0.0 {
                    let pivot_row = a[row].clone();
                    for (x, p) in a[r][col..].iter_mut().zip(&pivot_row[col..]) {
                        *x -= m * p;
                    }
                    b[r] -= m * b[row];
                }
            }
        }
        pivot_col[row] = col;
        row += 1;
    }
    let mut x = vec![0.0; n];
    for r in 0..row {
        x[pivot_col[r]] = b[r] / a[r][pivot_col[r]];
    }
    x
}

/// Best objective over all `d^K` index sequences.
pub fn oracle_best_path(
    inst: &RegressionInstance,
    beta0: &[f64],
    alpha: &[f64],
) -> (Vec<usize>, f64) {
    let k = alpha.len();
    let d = inst.d();
    let mut idx = vec![0usize; k];
    let mut best = (Vec::new(), f64::INFINITY);
    loop {
        let (_, v) = oracle_inner(inst, beta0, &idx, alpha);
        if v < best.1 * (1.0 - 1e-12) {
            best = (idx.clone(), v);
        }
        let mut p = k;
        loop {
            if p == 0 {
                return best;
            }
            p -= 1;
            idx[p] += 1;
            if idx[p] < d {
                break;
            }
            idx[p] = 0;
        }
    }
}

/// Gaussian design with pairwise correlation `rho` and noisy linear target.
pub fn random_instance(seed: u64, n: usize, d: usize, rho: f64) -> RegressionInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let beta: Vec<f64> = (0..d).map(|_| rng.random_range(-2.0..2.0)).collect();
    let mut x = Vec::with_capacity(n * d);
    let mut y = Vec::with_capacity(n);
    for _ in 0..n {
        let common: f64 = rng.sample(StandardNormal);
        let row: Vec<f64> = (0..d)
            .map(|_| {
                let own: f64 = rng.sample(StandardNormal);
                rho.sqrt() * common + (1.0 - rho).sqrt() * own
            })
            .collect();
        let noise: f64 = rng.sample(StandardNormal);
        y.push(row.iter().zip(&beta).map(|(a, b)| a * b).sum::<f64>() + 0.5 * noise);
        x.extend(row);
    }
    let names = (0..d).map(|j| format!("f{j}")).collect();
    RegressionInstance::new(x, y, names, "y").unwrap()
}

/// Random two-class points on a coarse grid, so ties in coordinates occur.
pub fn random_labeled(seed: u64, n: usize, d: usize) -> LabeledDataset2C {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            (0..d)
                .map(|_| rng.random_range(0..8) as f64 / 2.0)
                .collect()
        })
        .collect();
    let labels: Vec<u8> = (0..n).map(|_| rng.random_range(0..2)).collect();
    let names = (0..d).map(|j| format!("x{j}")).collect();
    LabeledDataset2C::new(points, labels, vec!["a".into(), "b".into()], names).unwrap()
}

/// Tree as a map from branch node to (feature, threshold); children of
/// node `t` are `2t+1` (feature <= threshold) and `2t+2`.
pub type OracleTree = HashMap<usize, (usize, f64)>;

fn route(tree: &OracleTree, x: &[f64]) -> usize {
    let mut t = 0;
    while let Some(&(f, thr)) = tree.get(&t) {
        t = if x[f] <= thr { 2 * t + 1 } else { 2 * t + 2 };
    }
    t
}

pub fn oracle_tree_cost(data: &LabeledDataset2C, tree: &OracleTree) -> usize {
    let mut counts: HashMap<usize, [usize; 2]> = HashMap::new();
    for i in 0..data.n() {
        counts.entry(route(tree, data.point(i))).or_default()[data.labels()[i] as usize] += 1;
    }
    counts.values().map(|c| c[0].min(c[1])).sum()
}

fn global_midpoints(data: &LabeledDataset2C, f: usize) -> Vec<f64> {
    let mut v: Vec<f64> = (0..data.n()).map(|i| data.point(i)[f]).collect();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v.windows(2).map(|w| (w[0] + w[1]) / 2.0).collect()
}

fn leaves(tree: &OracleTree, depth: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut stack = vec![0usize];
    while let Some(t) = stack.pop() {
        if tree.contains_key(&t) {
            stack.push(2 * t + 1);
            stack.push(2 * t + 2);
        } else if t < (1 << depth) - 1 {
            out.push(t);
        }
    }
    out
}

/// Splits of `leaf` that send points to both children.
fn useful_splits(data: &LabeledDataset2C, tree: &OracleTree, leaf: usize) -> Vec<(usize, f64)> {
    let inside: Vec<usize> = (0..data.n())
        .filter(|&i| route(tree, data.point(i)) == leaf)
        .collect();
    let mut out = Vec::new();
    for f in 0..data.d() {
        for thr in global_midpoints(data, f) {
            let left = inside.iter().filter(|&&i| data.point(i)[f] <= thr).count();
            if left > 0 && left < inside.len() {
                out.push((f, thr));
            }
        }
    }
    out
}

/// Lowest and highest loss over every nested path of length `alpha.len()`,
/// optionally only over paths whose last tree has cost `final_filter`.
pub fn oracle_nested(
    data: &LabeledDataset2C,
    depth: usize,
    alpha: &[f64],
    final_filter: Option<usize>,
) -> Option<(f64, f64)> {
    let mut tree = OracleTree::new();
    let mut acc: Option<(f64, f64)> = None;
    walk(data, depth, alpha, &mut tree, 0.0, final_filter, &mut acc);
    acc
}

fn walk(
    data: &LabeledDataset2C,
    depth: usize,
    alpha: &[f64],
    tree: &mut OracleTree,
    loss: f64,
    final_filter: Option<usize>,
    acc: &mut Option<(f64, f64)>,
) {
    let step = tree.len();
    if step == alpha.len() {
        let keep = final_filter.is_none_or(|c| oracle_tree_cost(data, tree) == c);
        if keep {
            let (lo, hi) = acc.unwrap_or((f64::INFINITY, f64::NEG_INFINITY));
            *acc = Some((lo.min(loss), hi.max(loss)));
        }
        return;
    }
    for leaf in leaves(tree, depth) {
        for split in useful_splits(data, tree, leaf) {
            tree.insert(leaf, split);
            let c = oracle_tree_cost(data, tree) as f64;
            walk(
                data,
                depth,
                alpha,
                tree,
                loss + alpha[step] * c,
                final_filter,
                acc,
            );
            tree.remove(&leaf);
        }
    }
}

/// Lowest error of any depth-2 tree with three splits, chosen jointly.
pub fn oracle_best_three_split(data: &LabeledDataset2C) -> Option<usize> {
    let mut best: Option<usize> = None;
    let mut tree = OracleTree::new();
    for root in useful_splits(data, &tree, 0) {
        tree.insert(0, root);
        for l in useful_splits(data, &tree, 1) {
            tree.insert(1, l);
            for r in useful_splits(data, &tree, 2) {
                tree.insert(2, r);
                let c = oracle_tree_cost(data, &tree);
                best = Some(best.map_or(c, |b| b.min(c)));
                tree.remove(&2);
            }
            tree.remove(&1);
        }
        tree.remove(&0);
    }
    best
}
