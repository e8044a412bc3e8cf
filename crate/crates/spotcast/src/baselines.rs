//! Baseline classifiers trained on the same feature vectors as the
//! neural model: Gaussian naive Bayes, logistic regression, and a
//! Gini-impurity decision tree.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BaselineError {
    #[error("empty training set")]
    EmptyTrainingSet,
    #[error("degenerate dataset: fewer than two classes present")]
    DegenerateDataset,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimMismatch { expected: usize, got: usize },
}

/// Common interface over the baseline models.
pub trait Classifier {
    /// Unnormalized class scores; argmax gives the prediction.
    fn scores(&self, x: &[f64]) -> Result<Vec<f64>, BaselineError>;

    fn predict(&self, x: &[f64]) -> Result<usize, BaselineError> {
        let s = self.scores(x)?;
        Ok(argmax(&s))
    }

    /// Classes ranked by descending score, ties by ascending index.
    fn rank(&self, x: &[f64]) -> Result<Vec<usize>, BaselineError> {
        let s = self.scores(x)?;
        let mut order: Vec<usize> = (0..s.len()).collect();
        order.sort_by(|&a, &b| s[b].partial_cmp(&s[a]).unwrap().then(a.cmp(&b)));
        Ok(order)
    }
}

fn argmax(scores: &[f64]) -> usize {
    scores
        .iter()
        .enumerate()
        .max_by(|(ia, a), (ib, b)| a.partial_cmp(b).unwrap().then(ib.cmp(ia)))
        .map(|(i, _)| i)
        .expect("non-empty scores")
}

fn check_dataset(dataset: &[(Vec<f64>, usize)]) -> Result<(usize, usize), BaselineError> {
    let first = dataset.first().ok_or(BaselineError::EmptyTrainingSet)?;
    let dim = first.0.len();
    let mut classes = std::collections::BTreeSet::new();
    let mut max_label = 0;
    for (x, y) in dataset {
        if x.len() != dim {
            return Err(BaselineError::DimMismatch { expected: dim, got: x.len() });
        }
        classes.insert(*y);
        max_label = max_label.max(*y);
    }
    if classes.len() < 2 {
        return Err(BaselineError::DegenerateDataset);
    }
    Ok((dim, max_label + 1))
}

const VAR_FLOOR: f64 = 1e-9;

/// Gaussian naive Bayes with a per-feature variance floor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianNb {
    pub input_dim: usize,
    pub n_classes: usize,
    pub log_priors: Vec<f64>,
    pub means: Vec<Vec<f64>>,
    pub variances: Vec<Vec<f64>>,
}

impl GaussianNb {
    pub fn fit(dataset: &[(Vec<f64>, usize)]) -> Result<Self, BaselineError> {
        let (dim, n_classes) = check_dataset(dataset)?;
        let mut counts = vec![0usize; n_classes];
        let mut means = vec![vec![0.0; dim]; n_classes];
        for (x, y) in dataset {
            counts[*y] += 1;
            for (m, xi) in means[*y].iter_mut().zip(x) {
                *m += xi;
            }
        }
        for (c, mean) in means.iter_mut().enumerate() {
            if counts[c] > 0 {
                mean.iter_mut().for_each(|m| *m /= counts[c] as f64);
            }
        }
        let mut variances = vec![vec![0.0; dim]; n_classes];
        for (x, y) in dataset {
            for ((v, m), xi) in variances[*y].iter_mut().zip(&means[*y]).zip(x) {
                *v += (xi - m) * (xi - m);
            }
        }
        for (c, var) in variances.iter_mut().enumerate() {
            for v in var.iter_mut() {
                if counts[c] > 0 {
                    *v /= counts[c] as f64;
                }
                *v = v.max(VAR_FLOOR);
            }
        }
        let n = dataset.len() as f64;
        let log_priors = counts
            .iter()
            .map(|&c| if c > 0 { (c as f64 / n).ln() } else { f64::NEG_INFINITY })
            .collect();
        Ok(GaussianNb { input_dim: dim, n_classes, log_priors, means, variances })
    }
}

impl Classifier for GaussianNb {
    fn scores(&self, x: &[f64]) -> Result<Vec<f64>, BaselineError> {
        if x.len() != self.input_dim {
            return Err(BaselineError::DimMismatch { expected: self.input_dim, got: x.len() });
        }
        let ln_2pi = (2.0 * std::f64::consts::PI).ln();
        Ok((0..self.n_classes)
            .map(|c| {
                if self.log_priors[c] == f64::NEG_INFINITY {
                    return f64::NEG_INFINITY;
                }
                let mut ll = self.log_priors[c];
                for ((&xi, &m), &v) in x.iter().zip(&self.means[c]).zip(&self.variances[c]) {
                    ll += -0.5 * (ln_2pi + v.ln()) - (xi - m) * (xi - m) / (2.0 * v);
                }
                ll
            })
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogRegConfig {
    pub learning_rate: f64,
    pub l2: f64,
    pub max_iters: usize,
    pub grad_tolerance: f64,
}

impl Default for LogRegConfig {
    fn default() -> Self {
        LogRegConfig { learning_rate: 0.1, l2: 1e-4, max_iters: 1000, grad_tolerance: 1e-6 }
    }
}

/// Multinomial logistic regression trained with full-batch gradient
/// descent and L2 regularization on the weights (not the biases).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticRegression {
    pub input_dim: usize,
    pub n_classes: usize,
    /// Row-major `(n_classes, input_dim)`.
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
}

impl LogisticRegression {
    fn logits(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n_classes)
            .map(|c| {
                let row = &self.weights[c * self.input_dim..(c + 1) * self.input_dim];
                self.biases[c] + row.iter().zip(x).map(|(w, xi)| w * xi).sum::<f64>()
            })
            .collect()
    }

    pub fn fit(dataset: &[(Vec<f64>, usize)], cfg: &LogRegConfig) -> Result<Self, BaselineError> {
        let (dim, n_classes) = check_dataset(dataset)?;
        let mut model = LogisticRegression {
            input_dim: dim,
            n_classes,
            weights: vec![0.0; n_classes * dim],
            biases: vec![0.0; n_classes],
        };
        let n = dataset.len() as f64;
        for _ in 0..cfg.max_iters {
            let mut gw = vec![0.0; n_classes * dim];
            let mut gb = vec![0.0; n_classes];
            for (x, y) in dataset {
                let logits = model.logits(x);
                let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let exps: Vec<f64> = logits.iter().map(|&l| (l - max).exp()).collect();
                let sum: f64 = exps.iter().sum();
                for c in 0..n_classes {
                    let d = (exps[c] / sum - f64::from(c == *y)) / n;
                    gb[c] += d;
                    let row = &mut gw[c * dim..(c + 1) * dim];
                    for (g, &xi) in row.iter_mut().zip(x) {
                        *g += d * xi;
                    }
                }
            }
            for (g, w) in gw.iter_mut().zip(&model.weights) {
                *g += cfg.l2 * w;
            }
            let norm = gw
                .iter()
                .chain(gb.iter())
                .map(|g| g * g)
                .sum::<f64>()
                .sqrt();
            if norm < cfg.grad_tolerance {
                break;
            }
            for (w, g) in model.weights.iter_mut().zip(&gw) {
                *w -= cfg.learning_rate * g;
            }
            for (b, g) in model.biases.iter_mut().zip(&gb) {
                *b -= cfg.learning_rate * g;
            }
        }
        Ok(model)
    }
}

impl Classifier for LogisticRegression {
    fn scores(&self, x: &[f64]) -> Result<Vec<f64>, BaselineError> {
        if x.len() != self.input_dim {
            return Err(BaselineError::DimMismatch { expected: self.input_dim, got: x.len() });
        }
        Ok(self.logits(x))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeConfig {
    pub max_depth: usize,
    pub min_leaf: usize,
}

impl Default for TreeConfig {
    fn default() -> Self {
        TreeConfig { max_depth: 12, min_leaf: 2 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TreeNode {
    Leaf {
        /// Class frequencies at this leaf, normalized.
        distribution: Vec<f64>,
    },
    Split {
        feature: usize,
        /// `x[feature] <= threshold` goes left.
        threshold: f64,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
}

/// CART-style decision tree splitting on Gini impurity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub input_dim: usize,
    pub n_classes: usize,
    pub root: TreeNode,
}

fn gini(counts: &[usize], total: usize) -> f64 {
    if total == 0 {
        return 0.0;
    }
    let t = total as f64;
    1.0 - counts.iter().map(|&c| (c as f64 / t) * (c as f64 / t)).sum::<f64>()
}

/// Best `(feature, threshold, weighted_gini)` over all midpoint
/// candidates, or None when no split satisfies `min_leaf`. Ties break to
/// the lowest feature index, then the lowest threshold.
fn best_split(
    dataset: &[(Vec<f64>, usize)],
    indices: &[usize],
    n_classes: usize,
    min_leaf: usize,
) -> Option<(usize, f64, f64)> {
    let dim = dataset[indices[0]].0.len();
    let mut best: Option<(usize, f64, f64)> = None;
    for feature in 0..dim {
        let mut order: Vec<usize> = indices.to_vec();
        order.sort_by(|&a, &b| {
            dataset[a].0[feature].partial_cmp(&dataset[b].0[feature]).unwrap()
        });
        let total = order.len();
        let mut right_counts = vec![0usize; n_classes];
        for &i in &order {
            right_counts[dataset[i].1] += 1;
        }
        let mut left_counts = vec![0usize; n_classes];
        for split_at in 1..total {
            let moved = order[split_at - 1];
            left_counts[dataset[moved].1] += 1;
            right_counts[dataset[moved].1] -= 1;
            let lo = dataset[order[split_at - 1]].0[feature];
            let hi = dataset[order[split_at]].0[feature];
            if lo == hi {
                continue;
            }
            if split_at < min_leaf || total - split_at < min_leaf {
                continue;
            }
            let threshold = (lo + hi) / 2.0;
            let w = split_at as f64 / total as f64;
            let score = w * gini(&left_counts, split_at)
                + (1.0 - w) * gini(&right_counts, total - split_at);
            let better = match best {
                None => true,
                Some((_, _, s)) => score < s - 1e-12,
            };
            if better {
                best = Some((feature, threshold, score));
            }
        }
    }
    best
}

fn build_node(
    dataset: &[(Vec<f64>, usize)],
    indices: &[usize],
    n_classes: usize,
    cfg: &TreeConfig,
    depth: usize,
) -> TreeNode {
    let mut counts = vec![0usize; n_classes];
    for &i in indices {
        counts[dataset[i].1] += 1;
    }
    let total = indices.len();
    let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
    let leaf = || {
        let distribution = counts.iter().map(|&c| c as f64 / total as f64).collect();
        TreeNode::Leaf { distribution }
    };
    if pure || depth >= cfg.max_depth || total < 2 * cfg.min_leaf {
        return leaf();
    }
    let Some((feature, threshold, _)) = best_split(dataset, indices, n_classes, cfg.min_leaf)
    else {
        return leaf();
    };
    let (left, right): (Vec<usize>, Vec<usize>) =
        indices.iter().partition(|&&i| dataset[i].0[feature] <= threshold);
    TreeNode::Split {
        feature,
        threshold,
        left: Box::new(build_node(dataset, &left, n_classes, cfg, depth + 1)),
        right: Box::new(build_node(dataset, &right, n_classes, cfg, depth + 1)),
    }
}

impl DecisionTree {
    pub fn fit(dataset: &[(Vec<f64>, usize)], cfg: &TreeConfig) -> Result<Self, BaselineError> {
        let (dim, n_classes) = check_dataset(dataset)?;
        let indices: Vec<usize> = (0..dataset.len()).collect();
        let root = build_node(dataset, &indices, n_classes, cfg, 0);
        Ok(DecisionTree { input_dim: dim, n_classes, root })
    }
}

impl Classifier for DecisionTree {
    fn scores(&self, x: &[f64]) -> Result<Vec<f64>, BaselineError> {
        if x.len() != self.input_dim {
            return Err(BaselineError::DimMismatch { expected: self.input_dim, got: x.len() });
        }
        let mut node = &self.root;
        loop {
            match node {
                TreeNode::Leaf { distribution } => return Ok(distribution.clone()),
                TreeNode::Split { feature, threshold, left, right } => {
                    node = if x[*feature] <= *threshold { left } else { right };
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::blob_dataset;

    fn xor_ish() -> Vec<(Vec<f64>, usize)> {
        vec![
            (vec![0.0, 0.0], 0),
            (vec![0.1, 0.2], 0),
            (vec![1.0, 1.0], 0),
            (vec![0.9, 0.8], 0),
            (vec![0.0, 1.0], 1),
            (vec![0.1, 0.9], 1),
            (vec![1.0, 0.0], 1),
            (vec![0.9, 0.1], 1),
        ]
    }

    #[test]
    fn empty_and_degenerate_guards() {
        assert_eq!(GaussianNb::fit(&[]), Err(BaselineError::EmptyTrainingSet));
        let one_class = vec![(vec![1.0], 0), (vec![2.0], 0)];
        assert_eq!(GaussianNb::fit(&one_class), Err(BaselineError::DegenerateDataset));
        assert_eq!(
            LogisticRegression::fit(&one_class, &LogRegConfig::default()),
            Err(BaselineError::DegenerateDataset)
        );
        assert_eq!(
            DecisionTree::fit(&one_class, &TreeConfig::default()),
            Err(BaselineError::DegenerateDataset)
        );
        let ragged = vec![(vec![1.0], 0), (vec![1.0, 2.0], 1)];
        assert!(matches!(GaussianNb::fit(&ragged), Err(BaselineError::DimMismatch { .. })));
    }

    #[test]
    fn nb_matches_hand_bayes_oracle() {
        // two 1-d classes with known means/variances
        let data = vec![
            (vec![1.0], 0),
            (vec![2.0], 0),
            (vec![3.0], 0),
            (vec![10.0], 1),
            (vec![12.0], 1),
        ];
        let nb = GaussianNb::fit(&data).unwrap();
        assert!((nb.means[0][0] - 2.0).abs() < 1e-12);
        assert!((nb.variances[0][0] - 2.0 / 3.0).abs() < 1e-12);
        assert!((nb.means[1][0] - 11.0).abs() < 1e-12);
        assert!((nb.variances[1][0] - 1.0).abs() < 1e-12);
        let x = 4.0;
        let hand = |mean: f64, var: f64, prior: f64| {
            prior.ln()
                - 0.5 * (2.0 * std::f64::consts::PI * var).ln()
                - (x - mean) * (x - mean) / (2.0 * var)
        };
        let scores = nb.scores(&[x]).unwrap();
        assert!((scores[0] - hand(2.0, 2.0 / 3.0, 0.6)).abs() < 1e-12);
        assert!((scores[1] - hand(11.0, 1.0, 0.4)).abs() < 1e-12);
        assert_eq!(nb.predict(&[x]).unwrap(), 0);
        assert_eq!(nb.predict(&[9.0]).unwrap(), 1);
    }

    #[test]
    fn nb_variance_floor_on_constant_feature() {
        let data = vec![
            (vec![5.0, 1.0], 0),
            (vec![5.0, 2.0], 0),
            (vec![5.0, 9.0], 1),
            (vec![5.0, 8.0], 1),
        ];
        let nb = GaussianNb::fit(&data).unwrap();
        assert_eq!(nb.variances[0][0], VAR_FLOOR);
        assert!(nb.scores(&[5.0, 1.5]).unwrap().iter().all(|s| s.is_finite()));
        assert_eq!(nb.predict(&[5.0, 1.5]).unwrap(), 0);
    }

    #[test]
    fn logreg_separable_blobs() {
        let data = blob_dataset(150, 6, 11);
        let lr = LogisticRegression::fit(&data, &LogRegConfig::default()).unwrap();
        let correct = data.iter().filter(|(x, y)| lr.predict(x).unwrap() == *y).count();
        assert_eq!(correct, data.len());
    }

    #[test]
    fn logreg_l2_shrinks_weights() {
        let data = blob_dataset(90, 4, 2);
        let norms: Vec<f64> = [0.0, 0.1, 1.0]
            .iter()
            .map(|&l2| {
                let cfg = LogRegConfig { l2, max_iters: 400, ..LogRegConfig::default() };
                let lr = LogisticRegression::fit(&data, &cfg).unwrap();
                lr.weights.iter().map(|w| w * w).sum::<f64>().sqrt()
            })
            .collect();
        assert!(norms[0] > norms[1] && norms[1] > norms[2], "{norms:?}");
    }

    #[test]
    fn logreg_deterministic() {
        let data = blob_dataset(60, 4, 5);
        let a = LogisticRegression::fit(&data, &LogRegConfig::default()).unwrap();
        let b = LogisticRegression::fit(&data, &LogRegConfig::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn tree_fits_xor_pattern() {
        let data = xor_ish();
        let cfg = TreeConfig { max_depth: 4, min_leaf: 1 };
        let tree = DecisionTree::fit(&data, &cfg).unwrap();
        for (x, y) in &data {
            assert_eq!(tree.predict(x).unwrap(), *y);
        }
    }

    #[test]
    fn tree_root_split_matches_brute_force_oracle() {
        let data = vec![
            (vec![1.0, 7.0], 0),
            (vec![2.0, 6.5], 0),
            (vec![2.5, 1.0], 1),
            (vec![3.5, 2.0], 1),
            (vec![4.0, 8.0], 0),
            (vec![5.0, 1.5], 1),
        ];
        let indices: Vec<usize> = (0..data.len()).collect();
        let got = best_split(&data, &indices, 2, 1).unwrap();

        // exhaustive search over every feature and midpoint
        let mut oracle: Option<(usize, f64, f64)> = None;
        for feature in 0..2 {
            let mut vals: Vec<f64> = data.iter().map(|(x, _)| x[feature]).collect();
            vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
            for w in vals.windows(2) {
                if w[0] == w[1] {
                    continue;
                }
                let threshold = (w[0] + w[1]) / 2.0;
                let left: Vec<usize> =
                    (0..data.len()).filter(|&i| data[i].0[feature] <= threshold).collect();
                let right: Vec<usize> =
                    (0..data.len()).filter(|&i| data[i].0[feature] > threshold).collect();
                let count = |idx: &[usize]| {
                    let mut c = [0usize; 2];
                    for &i in idx {
                        c[data[i].1] += 1;
                    }
                    c
                };
                let w_l = left.len() as f64 / data.len() as f64;
                let score = w_l * gini(&count(&left), left.len())
                    + (1.0 - w_l) * gini(&count(&right), right.len());
                if oracle.map_or(true, |(_, _, s)| score < s - 1e-12) {
                    oracle = Some((feature, threshold, score));
                }
            }
        }
        let oracle = oracle.unwrap();
        assert_eq!(got.0, oracle.0);
        assert!((got.1 - oracle.1).abs() < 1e-12);
        assert!((got.2 - oracle.2).abs() < 1e-12);
    }

    #[test]
    fn tree_min_leaf_respected() {
        let data = xor_ish();
        let cfg = TreeConfig { max_depth: 10, min_leaf: 3 };
        let tree = DecisionTree::fit(&data, &cfg).unwrap();
        // replay the splits and count samples reaching each leaf
        fn leaf_sizes(node: &TreeNode, rows: Vec<&Vec<f64>>, out: &mut Vec<usize>) {
            match node {
                TreeNode::Leaf { .. } => out.push(rows.len()),
                TreeNode::Split { feature, threshold, left, right } => {
                    let (l, r): (Vec<&Vec<f64>>, Vec<&Vec<f64>>) =
                        rows.into_iter().partition(|x| x[*feature] <= *threshold);
                    leaf_sizes(left, l, out);
                    leaf_sizes(right, r, out);
                }
            }
        }
        let mut sizes = Vec::new();
        leaf_sizes(&tree.root, data.iter().map(|(x, _)| x).collect(), &mut sizes);
        assert!(sizes.iter().all(|&s| s >= cfg.min_leaf), "{sizes:?}");
    }

    #[test]
    fn all_baselines_agree_on_blobs() {
        let data = blob_dataset(120, 5, 9);
        let nb = GaussianNb::fit(&data).unwrap();
        let lr = LogisticRegression::fit(&data, &LogRegConfig::default()).unwrap();
        let tree = DecisionTree::fit(&data, &TreeConfig::default()).unwrap();
        for (x, y) in &data {
            assert_eq!(nb.predict(x).unwrap(), *y);
            assert_eq!(lr.predict(x).unwrap(), *y);
            assert_eq!(tree.predict(x).unwrap(), *y);
        }
    }

    #[test]
    fn rank_orders_by_score() {
        let data = blob_dataset(90, 4, 1);
        let nb = GaussianNb::fit(&data).unwrap();
        let x = &data[0].0;
        let ranking = nb.rank(x).unwrap();
        let scores = nb.scores(x).unwrap();
        assert_eq!(ranking.len(), scores.len());
        for w in ranking.windows(2) {
            assert!(scores[w[0]] >= scores[w[1]]);
        }
        assert_eq!(ranking[0], nb.predict(x).unwrap());
    }

    #[test]
    fn json_roundtrip() {
        let data = xor_ish();
        let tree = DecisionTree::fit(&data, &TreeConfig { max_depth: 4, min_leaf: 1 }).unwrap();
        let back: DecisionTree =
            serde_json::from_str(&serde_json::to_string(&tree).unwrap()).unwrap();
        assert_eq!(tree, back);
        let nb = GaussianNb::fit(&blob_dataset(30, 3, 4)).unwrap();
        let back: GaussianNb = serde_json::from_str(&serde_json::to_string(&nb).unwrap()).unwrap();
        assert_eq!(nb, back);
    }
}
