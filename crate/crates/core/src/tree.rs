//! Shallow axis-aligned classification trees grown one leaf split at a time.
//!
//! Trees live in a complete binary array: node `t` has children `2t + 1`
//! (left, `x[feature] <= threshold`) and `2t + 2`. A node below the depth
//! bound either holds a split or is a leaf; nodes at the depth bound are
//! always leaves.

use std::time::Instant;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::path::{CostSequence, PathWeights};

/// Largest supported depth bound.
pub const MAX_DEPTH: usize = 12;

/// Default cap on candidate evaluations in [`best_nested_path`].
pub const DEFAULT_TREE_BUDGET: u64 = 50_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledDataset2C {
    points: Vec<Vec<f64>>,
    labels: Vec<u8>,
    class_names: Vec<String>,
    feature_names: Vec<String>,
}

impl LabeledDataset2C {
    pub fn new(
        points: Vec<Vec<f64>>,
        labels: Vec<u8>,
        class_names: Vec<String>,
        feature_names: Vec<String>,
    ) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::TooFewRows {
                required: 1,
                found: 0,
            });
        }
        if labels.len() != points.len() {
            return Err(Error::DimensionMismatch {
                expected: points.len(),
                actual: labels.len(),
            });
        }
        let d = feature_names.len();
        if let Some(p) = points.iter().find(|p| p.len() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                actual: p.len(),
            });
        }
        if points.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidData("non-finite feature value".into()));
        }
        if labels.iter().any(|&l| l > 1) {
            return Err(Error::InvalidData("labels must be 0 or 1".into()));
        }
        if class_names.is_empty() || class_names.len() > 2 {
            return Err(Error::InvalidData(format!(
                "expected one or two class names, got {}",
                class_names.len()
            )));
        }
        Ok(Self {
            points,
            labels,
            class_names,
            feature_names,
        })
    }

    pub fn n(&self) -> usize {
        self.points.len()
    }

    pub fn d(&self) -> usize {
        self.feature_names.len()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i]
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    /// Rescales each feature to `[0, 1]`; constant features become 0.
    pub fn normalized(mut self) -> Self {
        for j in 0..self.d() {
            let lo = self
                .points
                .iter()
                .map(|p| p[j])
                .fold(f64::INFINITY, f64::min);
            let hi = self
                .points
                .iter()
                .map(|p| p[j])
                .fold(f64::NEG_INFINITY, f64::max);
            let span = hi - lo;
            for p in &mut self.points {
                p[j] = if span > 0.0 { (p[j] - lo) / span } else { 0.0 };
            }
        }
        self
    }

    /// `m` points drawn uniformly without replacement, kept in file order.
    pub fn subsample(&self, m: usize, seed: u64) -> Result<Self> {
        if m == 0 || m > self.n() {
            return Err(Error::InvalidConfig(format!(
                "subsample size {m} must be in 1..={}",
                self.n()
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut idx = sample(&mut rng, self.n(), m).into_vec();
        idx.sort_unstable();
        Ok(Self {
            points: idx.iter().map(|&i| self.points[i].clone()).collect(),
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
            class_names: self.class_names.clone(),
            feature_names: self.feature_names.clone(),
        })
    }
}

/// Midpoints between consecutive distinct values of `feature`.
pub fn candidate_splits(data: &LabeledDataset2C, feature: usize) -> Result<Vec<f64>> {
    if feature >= data.d() {
        return Err(Error::IndexOutOfRange {
            index: feature,
            dim: data.d(),
        });
    }
    let mut v: Vec<f64> = data.points.iter().map(|p| p[feature]).collect();
    Ok(midpoints(&mut v))
}

fn midpoints(v: &mut [f64]) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v.windows(2)
        .filter(|w| w[0] < w[1])
        .map(|w| 0.5 * (w[0] + w[1]))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Split {
    pub feature: usize,
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisTree {
    max_depth: usize,
    /// Branch slots `0..2^max_depth - 1`; `None` marks a leaf.
    nodes: Vec<Option<Split>>,
}

fn node_depth(t: usize) -> usize {
    (usize::BITS - (t + 1).leading_zeros() - 1) as usize
}

impl AxisTree {
    /// Single-leaf tree.
    pub fn new(max_depth: usize) -> Result<Self> {
        if max_depth > MAX_DEPTH {
            return Err(Error::InvalidConfig(format!(
                "depth bound {max_depth} exceeds the supported maximum {MAX_DEPTH}"
            )));
        }
        Ok(Self {
            max_depth,
            nodes: vec![None; (1 << max_depth) - 1],
        })
    }

    pub fn max_depth(&self) -> usize {
        self.max_depth
    }

    pub fn split_count(&self) -> usize {
        self.nodes.iter().filter(|n| n.is_some()).count()
    }

    /// Depth of the deepest leaf.
    pub fn depth(&self) -> usize {
        self.leaves().into_iter().map(node_depth).max().unwrap_or(0)
    }

    pub fn split_at(&self, node: usize) -> Option<Split> {
        self.nodes.get(node).copied().flatten()
    }

    /// Branch nodes with their splits, in node order.
    pub fn branches(&self) -> Vec<(usize, Split)> {
        self.nodes
            .iter()
            .enumerate()
            .filter_map(|(t, s)| s.map(|s| (t, s)))
            .collect()
    }

    /// Leaf node ids from left to right.
    pub fn leaves(&self) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = vec![0];
        while let Some(t) = stack.pop() {
            match self.split_at(t) {
                Some(_) => {
                    stack.push(2 * t + 2);
                    stack.push(2 * t + 1);
                }
                None => out.push(t),
            }
        }
        out
    }

    pub fn is_leaf(&self, node: usize) -> bool {
        if self.split_at(node).is_some() {
            return false;
        }
        // reachable iff every ancestor is a branch
        let mut t = node;
        while t > 0 {
            t = (t - 1) / 2;
            if self.split_at(t).is_none() {
                return false;
            }
        }
        node < 2 * self.nodes.len() + 1
    }

    /// Converts `leaf` into a branch.
    pub fn split_leaf(&self, leaf: usize, split: Split) -> Result<Self> {
        if !self.is_leaf(leaf) {
            return Err(Error::InvalidConfig(format!("node {leaf} is not a leaf")));
        }
        if leaf >= self.nodes.len() {
            return Err(Error::InvalidConfig(format!(
                "leaf {leaf} is at the depth bound {}",
                self.max_depth
            )));
        }
        if !split.threshold.is_finite() {
            return Err(Error::InvalidConfig(
                "split threshold must be finite".into(),
            ));
        }
        let mut next = self.clone();
        next.nodes[leaf] = Some(split);
        Ok(next)
    }

    /// Leaf reached by `x`.
    pub fn route(&self, x: &[f64]) -> usize {
        let mut t = 0;
        while let Some(s) = self.split_at(t) {
            t = if x[s.feature] <= s.threshold {
                2 * t + 1
            } else {
                2 * t + 2
            };
        }
        t
    }

    fn check_features(&self, d: usize) -> Result<()> {
        match self.branches().into_iter().find(|(_, s)| s.feature >= d) {
            Some((_, s)) => Err(Error::IndexOutOfRange {
                index: s.feature,
                dim: d,
            }),
            None => Ok(()),
        }
    }

    /// Majority training class per leaf (ties and empty leaves go to class 0),
    /// as `(leaf, class)` pairs from left to right.
    pub fn leaf_classes(&self, data: &LabeledDataset2C) -> Result<Vec<(usize, u8)>> {
        self.check_features(data.d())?;
        let counts = self.leaf_counts(data);
        Ok(self
            .leaves()
            .into_iter()
            .map(|leaf| {
                let [c0, c1] = counts.get(&leaf).copied().unwrap_or([0, 0]);
                (leaf, u8::from(c1 > c0))
            })
            .collect())
    }

    fn leaf_counts(&self, data: &LabeledDataset2C) -> std::collections::HashMap<usize, [usize; 2]> {
        let mut counts = std::collections::HashMap::new();
        for (p, &y) in data.points.iter().zip(&data.labels) {
            counts.entry(self.route(p)).or_insert([0, 0])[y as usize] += 1;
        }
        counts
    }
}

/// Number of training points misclassified by the majority-vote leaves.
pub fn tree_cost(data: &LabeledDataset2C, tree: &AxisTree) -> Result<usize> {
    tree.check_features(data.d())?;
    Ok(tree
        .leaf_counts(data)
        .values()
        .map(|c| c[0].min(c[1]))
        .sum())
}

/// One step of a tree path: the leaf that was split and how.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreeStep {
    pub leaf: usize,
    pub split: Split,
}

/// Trees with `1, 2, ..., K` splits, each extending its predecessor by one
/// leaf split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreePath {
    trees: Vec<AxisTree>,
}

impl TreePath {
    pub fn new(trees: Vec<AxisTree>) -> Result<Self> {
        let mut prev = match trees.first() {
            Some(t) => AxisTree::new(t.max_depth)?,
            None => return Ok(Self { trees }),
        };
        for (k, tree) in trees.iter().enumerate() {
            if tree.max_depth != prev.max_depth {
                return Err(Error::InvalidConfig(
                    "trees in a path must share the depth bound".into(),
                ));
            }
            if tree.split_count() != k + 1 {
                return Err(Error::InvalidConfig(format!(
                    "tree {} has {} splits",
                    k + 1,
                    tree.split_count()
                )));
            }
            let added: Vec<usize> = (0..tree.nodes.len())
                .filter(|&t| tree.nodes[t] != prev.nodes[t])
                .collect();
            let nested =
                added.len() == 1 && prev.nodes[added[0]].is_none() && prev.is_leaf(added[0]);
            if !nested {
                return Err(Error::InvalidConfig(format!(
                    "tree {} does not extend its predecessor by one leaf split",
                    k + 1
                )));
            }
            prev = tree.clone();
        }
        Ok(Self { trees })
    }

    pub fn from_steps(max_depth: usize, steps: &[TreeStep]) -> Result<Self> {
        let mut tree = AxisTree::new(max_depth)?;
        let mut trees = Vec::with_capacity(steps.len());
        for s in steps {
            tree = tree.split_leaf(s.leaf, s.split)?;
            trees.push(tree.clone());
        }
        Ok(Self { trees })
    }

    pub fn trees(&self) -> &[AxisTree] {
        &self.trees
    }

    pub fn len(&self) -> usize {
        self.trees.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trees.is_empty()
    }

    pub fn steps(&self) -> Vec<TreeStep> {
        let mut prev: Option<&AxisTree> = None;
        self.trees
            .iter()
            .map(|tree| {
                let leaf = (0..tree.nodes.len())
                    .find(|&t| prev.is_none_or(|p| p.nodes[t].is_none()) && tree.nodes[t].is_some())
                    .expect("nested trees differ by one split");
                prev = Some(tree);
                TreeStep {
                    leaf,
                    split: tree.nodes[leaf].expect("found above"),
                }
            })
            .collect()
    }

    /// Misclassification counts of the trees, in order.
    pub fn costs(&self, data: &LabeledDataset2C) -> Result<Vec<usize>> {
        self.trees.iter().map(|t| tree_cost(data, t)).collect()
    }

    pub fn cost_sequence(&self, data: &LabeledDataset2C) -> Result<CostSequence> {
        CostSequence::new(self.costs(data)?.into_iter().map(|c| c as f64).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreePathResult {
    pub path: TreePath,
    pub costs: Vec<usize>,
    /// `None` once some tree makes no errors; zero is not a valid sequence
    /// entry.
    pub cost_sequence: Option<CostSequence>,
    pub objective: f64,
    pub nodes_evaluated: u64,
    pub wall_time_secs: f64,
}

/// Errors of the majority leaf for class counts `c`.
fn leaf_error(c: [usize; 2]) -> usize {
    c[0].min(c[1])
}

/// Every way to split the points of one leaf: `(feature, threshold, left
/// errors + right errors)`. Thresholds are midpoints between consecutive
/// distinct values inside the leaf, so both children are nonempty.
fn leaf_splits(data: &LabeledDataset2C, members: &[usize]) -> Vec<(usize, f64, usize)> {
    let mut out = Vec::new();
    let mut total = [0usize; 2];
    for &i in members {
        total[data.labels[i] as usize] += 1;
    }
    let mut order = members.to_vec();
    for f in 0..data.d() {
        order.sort_by(|&a, &b| data.points[a][f].total_cmp(&data.points[b][f]));
        let mut left = [0usize; 2];
        for w in 0..order.len().saturating_sub(1) {
            left[data.labels[order[w]] as usize] += 1;
            let (lo, hi) = (data.points[order[w]][f], data.points[order[w + 1]][f]);
            if lo < hi {
                let right = [total[0] - left[0], total[1] - left[1]];
                out.push((f, 0.5 * (lo + hi), leaf_error(left) + leaf_error(right)));
            }
        }
    }
    out
}

fn partition(data: &LabeledDataset2C, members: &[usize], s: Split) -> (Vec<usize>, Vec<usize>) {
    members
        .iter()
        .partition(|&&i| data.points[i][s.feature] <= s.threshold)
}

/// Fewest misclassifications of any tree of depth at most `depth` on
/// `members`, regardless of split count.
fn best_tree_error(data: &LabeledDataset2C, members: &[usize], depth: usize) -> usize {
    let mut c = [0usize; 2];
    for &i in members {
        c[data.labels[i] as usize] += 1;
    }
    let here = leaf_error(c);
    if depth == 0 || here == 0 {
        return here;
    }
    let mut best = here;
    for (f, th, err) in leaf_splits(data, members) {
        if depth == 1 {
            best = best.min(err);
            continue;
        }
        let (l, r) = partition(
            data,
            members,
            Split {
                feature: f,
                threshold: th,
            },
        );
        let lb = best_tree_error(data, &l, depth - 1);
        if lb >= best {
            continue;
        }
        best = best.min(lb + best_tree_error(data, &r, depth - 1));
    }
    best
}

/// Lowest misclassification count reachable with depth at most `max_depth`.
pub fn optimal_tree_cost(data: &LabeledDataset2C, max_depth: usize) -> usize {
    let all: Vec<usize> = (0..data.n()).collect();
    best_tree_error(data, &all, max_depth)
}

/// Globally best nested tree path of length `k` under the weighted loss.
///
/// Moves are explored in order of (feature, threshold, leftmost leaf), so
/// among optimal paths the first in that order is returned.
pub fn best_nested_path(
    data: &LabeledDataset2C,
    k: usize,
    max_depth: usize,
    weights: &PathWeights,
) -> Result<TreePathResult> {
    weights.validate()?;
    best_nested_path_with(data, max_depth, &weights.first(k), DEFAULT_TREE_BUDGET)
}

/// [`best_nested_path`] on explicit step weights; `K = alpha.len()`.
pub fn best_nested_path_with(
    data: &LabeledDataset2C,
    max_depth: usize,
    alpha: &[f64],
    budget: u64,
) -> Result<TreePathResult> {
    let start = Instant::now();
    let (steps, _, objective, nodes) =
        search_nested(data, max_depth, alpha, budget, f64::INFINITY)?.ok_or_else(|| {
            Error::InvalidData(format!(
                "no nested path of length {} exists (too few distinct points)",
                alpha.len()
            ))
        })?;
    let path = TreePath::from_steps(max_depth, &steps)?;
    let costs = path.costs(data)?;
    let cost_sequence = path.cost_sequence(data).ok();
    Ok(TreePathResult {
        path,
        costs,
        cost_sequence,
        objective,
        nodes_evaluated: nodes,
        wall_time_secs: start.elapsed().as_secs_f64(),
    })
}

fn check_request(data: &LabeledDataset2C, max_depth: usize, k: usize) -> Result<AxisTree> {
    let root = AxisTree::new(max_depth)?;
    let max_splits = (1usize << max_depth) - 1;
    if k > max_splits {
        return Err(Error::InvalidConfig(format!(
            "a depth-{max_depth} tree has at most {max_splits} splits, K = {k} requested"
        )));
    }
    root.check_features(data.d())?;
    Ok(root)
}

/// Steps, their costs, the objective and the number of moves evaluated.
pub(crate) type NestedSearch = (Vec<TreeStep>, Vec<usize>, f64, u64);

/// Branch and bound behind [`best_nested_path`]. Zero step costs are allowed
/// here. Returns the steps, their costs, the objective and the number of
/// moves evaluated, or `None` if no path beats `cutoff`.
pub(crate) fn search_nested(
    data: &LabeledDataset2C,
    max_depth: usize,
    alpha: &[f64],
    budget: u64,
    cutoff: f64,
) -> Result<Option<NestedSearch>> {
    if alpha.iter().any(|a| !a.is_finite() || *a < 0.0) {
        return Err(Error::InvalidWeights(
            "step weights must be finite and nonnegative".into(),
        ));
    }
    let k = alpha.len();
    let root = check_request(data, max_depth, k)?;
    let mut suffix = vec![0.0; k + 1];
    for j in (0..k).rev() {
        suffix[j] = suffix[j + 1] + alpha[j];
    }
    let floor = optimal_tree_cost(data, max_depth) as f64;

    let mut members = vec![Vec::new(); 2 * root.nodes.len() + 1];
    members[0] = (0..data.n()).collect();
    let root_cost = tree_cost(data, &root)?;
    let mut search = TreeSearch {
        data,
        alpha,
        suffix: &suffix,
        floor,
        budget,
        nodes: 0,
        best: None,
        best_val: cutoff,
        steps: Vec::with_capacity(k),
        costs: Vec::with_capacity(k),
    };
    search.descend(&root, &mut members, root_cost, 0.0)?;
    Ok(search
        .best
        .map(|(steps, costs)| (steps, costs, search.best_val, search.nodes)))
}

/// Calls `visit` with the steps and costs of every nested path of length `k`.
pub(crate) fn for_each_nested_path(
    data: &LabeledDataset2C,
    max_depth: usize,
    k: usize,
    budget: u64,
    mut visit: impl FnMut(&[TreeStep], &[usize]),
) -> Result<()> {
    let root = check_request(data, max_depth, k)?;
    let mut members = vec![Vec::new(); 2 * root.nodes.len() + 1];
    members[0] = (0..data.n()).collect();
    let mut steps = Vec::with_capacity(k);
    let mut costs = Vec::with_capacity(k);
    let mut count = 0u64;
    let cost = tree_cost(data, &root)?;
    walk_all(
        data,
        &root,
        &mut members,
        cost,
        k,
        budget,
        &mut count,
        &mut steps,
        &mut costs,
        &mut visit,
    )
}

#[allow(clippy::too_many_arguments)]
fn walk_all(
    data: &LabeledDataset2C,
    tree: &AxisTree,
    members: &mut Vec<Vec<usize>>,
    cost: usize,
    k: usize,
    budget: u64,
    count: &mut u64,
    steps: &mut Vec<TreeStep>,
    costs: &mut Vec<usize>,
    visit: &mut impl FnMut(&[TreeStep], &[usize]),
) -> Result<()> {
    if steps.len() == k {
        visit(steps, costs);
        return Ok(());
    }
    for (feature, threshold, leaf, new_cost) in ordered_moves(data, tree, members, cost) {
        *count += 1;
        if *count > budget {
            return Err(Error::BudgetExceeded {
                required: *count as u128,
                budget,
                hint: "lower the path length limit for front enumeration",
            });
        }
        let split = Split { feature, threshold };
        let next = tree.split_leaf(leaf, split)?;
        let saved = apply_split(data, members, leaf, split);
        steps.push(TreeStep { leaf, split });
        costs.push(new_cost);
        walk_all(
            data, &next, members, new_cost, k, budget, count, steps, costs, visit,
        )?;
        steps.pop();
        costs.pop();
        undo_split(members, leaf, saved);
    }
    Ok(())
}

/// Legal moves `(feature, threshold, leaf, new tree cost)` in tie-break
/// order: feature, then threshold, then leaf from the left.
fn ordered_moves(
    data: &LabeledDataset2C,
    tree: &AxisTree,
    members: &[Vec<usize>],
    cost: usize,
) -> Vec<(usize, f64, usize, usize)> {
    let mut moves = Vec::new();
    for leaf in tree.leaves() {
        if leaf >= tree.nodes.len() {
            continue;
        }
        let mut c = [0usize; 2];
        for &i in &members[leaf] {
            c[data.labels[i] as usize] += 1;
        }
        let here = leaf_error(c);
        for (f, th, err) in leaf_splits(data, &members[leaf]) {
            moves.push((
                f,
                th,
                leaf_key(leaf, tree.max_depth),
                leaf,
                cost - here + err,
            ));
        }
    }
    moves.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)).then(a.2.cmp(&b.2)));
    moves
        .into_iter()
        .map(|(f, th, _, leaf, c)| (f, th, leaf, c))
        .collect()
}

fn apply_split(
    data: &LabeledDataset2C,
    members: &mut [Vec<usize>],
    leaf: usize,
    s: Split,
) -> Vec<usize> {
    let (l, r) = partition(data, &members[leaf], s);
    members[2 * leaf + 1] = l;
    members[2 * leaf + 2] = r;
    std::mem::take(&mut members[leaf])
}

fn undo_split(members: &mut [Vec<usize>], leaf: usize, saved: Vec<usize>) {
    members[2 * leaf + 1].clear();
    members[2 * leaf + 2].clear();
    members[leaf] = saved;
}

struct TreeSearch<'a> {
    data: &'a LabeledDataset2C,
    alpha: &'a [f64],
    suffix: &'a [f64],
    floor: f64,
    budget: u64,
    nodes: u64,
    best: Option<(Vec<TreeStep>, Vec<usize>)>,
    best_val: f64,
    steps: Vec<TreeStep>,
    costs: Vec<usize>,
}

impl TreeSearch<'_> {
    fn descend(
        &mut self,
        tree: &AxisTree,
        members: &mut Vec<Vec<usize>>,
        cost: usize,
        partial: f64,
    ) -> Result<()> {
        let depth = self.steps.len();
        if depth == self.alpha.len() {
            if improves(partial, self.best_val) {
                self.best_val = partial;
                self.best = Some((self.steps.clone(), self.costs.clone()));
            }
            return Ok(());
        }
        let w = self.alpha[depth];
        for (feature, threshold, leaf, new_cost) in ordered_moves(self.data, tree, members, cost) {
            self.nodes += 1;
            if self.nodes > self.budget {
                return Err(Error::BudgetExceeded {
                    required: self.nodes as u128,
                    budget: self.budget,
                    hint: "lower K or the depth bound, or subsample the data",
                });
            }
            let value = partial + w * new_cost as f64;
            let bound = value + self.floor * self.suffix[depth + 1];
            // the incumbent came first in move order, so ties cannot replace it
            if !improves(bound, self.best_val) {
                continue;
            }
            let split = Split { feature, threshold };
            let next = tree.split_leaf(leaf, split)?;
            let saved = apply_split(self.data, members, leaf, split);
            self.steps.push(TreeStep { leaf, split });
            self.costs.push(new_cost);
            self.descend(&next, members, new_cost, value)?;
            self.steps.pop();
            self.costs.pop();
            undo_split(members, leaf, saved);
        }
        Ok(())
    }
}

/// True when `value` beats `best` by more than rounding.
fn improves(value: f64, best: f64) -> bool {
    best.is_infinite() || value < best - 1e-9 * best.abs().max(1.0)
}

/// Left-to-right position of a node's span among depth-`max_depth` slots.
fn leaf_key(node: usize, max_depth: usize) -> usize {
    let h = node_depth(node);
    (node + 1 - (1 << h)) << (max_depth - h)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ds(points: &[[f64; 2]], labels: &[u8]) -> LabeledDataset2C {
        LabeledDataset2C::new(
            points.iter().map(|p| p.to_vec()).collect(),
            labels.to_vec(),
            vec!["a".into(), "b".into()],
            vec!["u".into(), "v".into()],
        )
        .unwrap()
    }

    #[test]
    fn midpoint_examples() {
        let d = ds(&[[1.0, 5.0], [2.0, 5.0], [4.0, 5.0]], &[0, 1, 0]);
        assert_eq!(candidate_splits(&d, 0).unwrap(), vec![1.5, 3.0]);
        assert!(candidate_splits(&d, 1).unwrap().is_empty());
        let d = ds(&[[0.0, 0.0], [1.0, 0.0]], &[0, 1]);
        assert_eq!(candidate_splits(&d, 0).unwrap(), vec![0.5]);
        assert!(candidate_splits(&d, 2).is_err());
    }

    #[test]
    fn costs_of_simple_trees() {
        let pts: Vec<[f64; 2]> = (0..50).map(|i| [i as f64, 0.0]).collect();
        let labels: Vec<u8> = (0..50).map(|i| u8::from(i >= 25)).collect();
        let d = ds(&pts, &labels);
        let t0 = AxisTree::new(2).unwrap();
        assert_eq!(tree_cost(&d, &t0).unwrap(), 25);
        let t1 = t0
            .split_leaf(
                0,
                Split {
                    feature: 0,
                    threshold: 24.5,
                },
            )
            .unwrap();
        assert_eq!(tree_cost(&d, &t1).unwrap(), 0);
    }

    #[test]
    fn leaves_are_left_to_right() {
        let t = AxisTree::new(2)
            .unwrap()
            .split_leaf(
                0,
                Split {
                    feature: 0,
                    threshold: 0.5,
                },
            )
            .unwrap()
            .split_leaf(
                2,
                Split {
                    feature: 1,
                    threshold: 0.5,
                },
            )
            .unwrap();
        assert_eq!(t.leaves(), vec![1, 5, 6]);
        assert!(t
            .split_leaf(
                5,
                Split {
                    feature: 0,
                    threshold: 0.1
                }
            )
            .is_err());
        assert!(t
            .split_leaf(
                3,
                Split {
                    feature: 0,
                    threshold: 0.1
                }
            )
            .is_err());
        assert!(leaf_key(1, 2) < leaf_key(5, 2) && leaf_key(5, 2) < leaf_key(6, 2));
        assert_eq!(t.depth(), 2);
    }

    #[test]
    fn nestedness_is_checked() {
        let a = AxisTree::new(2)
            .unwrap()
            .split_leaf(
                0,
                Split {
                    feature: 0,
                    threshold: 1.0,
                },
            )
            .unwrap();
        let b = a
            .split_leaf(
                1,
                Split {
                    feature: 1,
                    threshold: 2.0,
                },
            )
            .unwrap();
        assert!(TreePath::new(vec![a.clone(), b.clone()]).is_ok());
        assert!(TreePath::new(vec![b.clone()]).is_err());
        let other = AxisTree::new(2)
            .unwrap()
            .split_leaf(
                0,
                Split {
                    feature: 0,
                    threshold: 3.0,
                },
            )
            .unwrap();
        let c = other
            .split_leaf(
                1,
                Split {
                    feature: 1,
                    threshold: 2.0,
                },
            )
            .unwrap();
        assert!(TreePath::new(vec![a, c]).is_err());
    }

    #[test]
    fn one_step_path_is_the_best_stump() {
        let pts = [
            [0.1, 0.9],
            [0.2, 0.1],
            [0.3, 0.8],
            [0.6, 0.2],
            [0.7, 0.7],
            [0.9, 0.3],
        ];
        let d = ds(&pts, &[0, 0, 1, 1, 1, 0]);
        let r = best_nested_path(&d, 1, 2, &PathWeights::Geometric(1.0)).unwrap();
        let mut best = usize::MAX;
        for f in 0..2 {
            for th in candidate_splits(&d, f).unwrap() {
                let t = AxisTree::new(1)
                    .unwrap()
                    .split_leaf(
                        0,
                        Split {
                            feature: f,
                            threshold: th,
                        },
                    )
                    .unwrap();
                best = best.min(tree_cost(&d, &t).unwrap());
            }
        }
        assert_eq!(r.costs, vec![best]);
        let steps = r.path.steps();
        assert_eq!(TreePath::from_steps(2, &steps).unwrap(), r.path);
    }

    #[test]
    fn subsample_is_seeded() {
        let pts: Vec<[f64; 2]> = (0..20).map(|i| [i as f64, 0.0]).collect();
        let d = ds(&pts, &[0; 20]);
        assert_eq!(d.subsample(5, 3).unwrap(), d.subsample(5, 3).unwrap());
        assert!(d.subsample(21, 0).is_err());
    }
}
