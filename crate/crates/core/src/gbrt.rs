use std::path::Path;

use crate::error::Error;
use crate::metrics::nrmse;
use crate::scalar::Real;

/// Estimator count fixed by the benchmarking protocol.
pub const DEFAULT_N_ESTIMATORS: usize = 300;

/// Cross-validation fold count of the protocol.
pub const DEFAULT_CV_FOLDS: usize = 3;

/// Half-decade learning-rate ladder from 1e-6 to 1.
pub fn default_lr_grid<F: Real>() -> Vec<F> {
    [
        1e-6, 3.1e-6, 1e-5, 3.1e-5, 1e-4, 3.1e-4, 1e-3, 3.1e-3, 1e-2, 3.1e-2, 1e-1, 3.1e-1, 1.0,
    ]
    .iter()
    .map(|&v| F::c(v))
    .collect()
}

/// Depth grid of the protocol.
pub fn default_depth_grid() -> Vec<usize> {
    vec![2, 4, 6, 8]
}

/// Boosting hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GbrtConfig<F> {
    pub learning_rate: F,
    pub n_estimators: usize,
    pub max_depth: usize,
    pub min_samples_leaf: usize,
}

impl<F: Real> GbrtConfig<F> {
    pub fn new(learning_rate: F, max_depth: usize) -> Self {
        GbrtConfig {
            learning_rate,
            n_estimators: DEFAULT_N_ESTIMATORS,
            max_depth,
            min_samples_leaf: 1,
        }
    }

    pub fn validate(&self) -> Result<(), Error> {
        if self.learning_rate <= F::zero() {
            return Err(Error::InvalidConfig("learning_rate must be > 0".into()));
        }
        if self.n_estimators == 0 || self.max_depth == 0 || self.min_samples_leaf == 0 {
            return Err(Error::InvalidConfig(
                "n_estimators, max_depth and min_samples_leaf must be >= 1".into(),
            ));
        }
        Ok(())
    }
}

/// Flat node of a regression tree; children index into the node arena.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Node<F> {
    Split {
        feature: usize,
        threshold: F,
        left: usize,
        right: usize,
    },
    Leaf {
        value: F,
    },
}

/// Depth-limited CART regression tree with exact greedy splits.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionTree<F> {
    pub nodes: Vec<Node<F>>,
}

impl<F: Real> RegressionTree<F> {
    pub fn predict_row(&self, row: &[F]) -> F {
        let mut idx = 0;
        loop {
            match self.nodes[idx] {
                Node::Leaf { value } => return value,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    idx = if row[feature] <= threshold { left } else { right };
                }
            }
        }
    }
}

/// Additive boosted model: `base_value + lr * sum(tree outputs)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GbrtModel<F> {
    pub base_value: F,
    pub learning_rate: F,
    pub trees: Vec<RegressionTree<F>>,
    pub n_features: usize,
    /// Training MSE after each boosting stage, for diagnostics.
    pub staged_train_mse: Vec<F>,
}

// Per-fit workspace: sample indices presorted by each feature column.
// Sorted order depends only on X, so trees reuse it across stages.
struct Presorted {
    by_feature: Vec<Vec<u32>>,
}

impl Presorted {
    fn build<F: Real>(x: &[Vec<F>], n_features: usize) -> Self {
        let by_feature = (0..n_features)
            .map(|f| {
                let mut idx: Vec<u32> = (0..x.len() as u32).collect();
                idx.sort_by(|&a, &b| {
                    x[a as usize][f]
                        .partial_cmp(&x[b as usize][f])
                        .unwrap_or(std::cmp::Ordering::Equal)
                        .then(a.cmp(&b))
                });
                idx
            })
            .collect();
        Presorted { by_feature }
    }
}

struct TreeBuilder<'a, F> {
    x: &'a [Vec<F>],
    residuals: &'a [F],
    max_depth: usize,
    min_samples_leaf: usize,
    nodes: Vec<Node<F>>,
    // leaf value applied to each training sample, filled during the build
    train_output: Vec<F>,
}

impl<'a, F: Real> TreeBuilder<'a, F> {
    // `sorted`: per-feature index lists, each a permutation of the node's
    // samples sorted by that feature. All lists cover the same sample set.
    fn build(&mut self, sorted: Vec<Vec<u32>>, depth: usize) -> usize {
        let samples = &sorted[0];
        let m = samples.len();
        let sum: F = samples
            .iter()
            .fold(F::zero(), |acc, &i| acc + self.residuals[i as usize]);
        let mean = sum / F::c(m as f64);

        let split = if depth < self.max_depth && m >= 2 * self.min_samples_leaf {
            self.best_split(&sorted, sum)
        } else {
            None
        };

        match split {
            None => {
                let node = self.nodes.len();
                self.nodes.push(Node::Leaf { value: mean });
                for &i in samples {
                    self.train_output[i as usize] = mean;
                }
                node
            }
            Some((feature, threshold)) => {
                // Stable partition of every presorted list on the chosen
                // split keeps per-feature ordering without re-sorting.
                let go_left: Vec<bool> = {
                    let mut flags = vec![false; self.x.len()];
                    for &i in samples {
                        flags[i as usize] = self.x[i as usize][feature] <= threshold;
                    }
                    flags
                };
                let mut left_lists = Vec::with_capacity(sorted.len());
                let mut right_lists = Vec::with_capacity(sorted.len());
                for list in &sorted {
                    let mut l = Vec::new();
                    let mut r = Vec::new();
                    for &i in list {
                        if go_left[i as usize] {
                            l.push(i);
                        } else {
                            r.push(i);
                        }
                    }
                    left_lists.push(l);
                    right_lists.push(r);
                }
                drop(sorted);
                let node = self.nodes.len();
                self.nodes.push(Node::Leaf { value: mean }); // placeholder
                let left = self.build(left_lists, depth + 1);
                let right = self.build(right_lists, depth + 1);
                self.nodes[node] = Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                };
                node
            }
        }
    }

    // Exact greedy search over all (feature, midpoint threshold) pairs,
    // maximizing the variance-reduction gain. Strict improvement keeps the
    // first optimum, so ties resolve to the lowest feature index and then
    // the lowest threshold.
    fn best_split(&self, sorted: &[Vec<u32>], total_sum: F) -> Option<(usize, F)> {
        let m = sorted[0].len();
        let m_f = F::c(m as f64);
        let parent_score = total_sum * total_sum / m_f;
        let mut best: Option<(usize, F)> = None;
        let mut best_gain = F::zero();
        for (feature, list) in sorted.iter().enumerate() {
            let mut left_sum = F::zero();
            for (pos, &i) in list[..m - 1].iter().enumerate() {
                left_sum = left_sum + self.residuals[i as usize];
                let n_left = pos + 1;
                let v_here = self.x[i as usize][feature];
                let v_next = self.x[list[pos + 1] as usize][feature];
                if v_here == v_next {
                    continue;
                }
                if n_left < self.min_samples_leaf || m - n_left < self.min_samples_leaf {
                    continue;
                }
                let right_sum = total_sum - left_sum;
                let gain = left_sum * left_sum / F::c(n_left as f64)
                    + right_sum * right_sum / F::c((m - n_left) as f64)
                    - parent_score;
                if gain > best_gain {
                    best_gain = gain;
                    best = Some((feature, (v_here + v_next) * F::c(0.5)));
                }
            }
        }
        best
    }
}

fn check_matrix<F: Real>(x: &[Vec<F>], y_len: usize) -> Result<usize, Error> {
    if x.is_empty() || y_len != x.len() {
        return Err(Error::EmptyInput("sample matrix"));
    }
    let n_features = x[0].len();
    if n_features == 0 || x.iter().any(|row| row.len() != n_features) {
        return Err(Error::SchemaMismatch("ragged sample matrix".into()));
    }
    Ok(n_features)
}

/// Fit a single depth-limited regression tree to the residual vector.
pub fn fit_regression_tree<F: Real>(
    x: &[Vec<F>],
    residuals: &[F],
    max_depth: usize,
    min_samples_leaf: usize,
) -> Result<RegressionTree<F>, Error> {
    let n_features = check_matrix(x, residuals.len())?;
    if max_depth == 0 || min_samples_leaf == 0 {
        return Err(Error::InvalidConfig(
            "max_depth and min_samples_leaf must be >= 1".into(),
        ));
    }
    let presorted = Presorted::build(x, n_features);
    let mut builder = TreeBuilder {
        x,
        residuals,
        max_depth,
        min_samples_leaf,
        nodes: Vec::new(),
        train_output: vec![F::zero(); x.len()],
    };
    builder.build(presorted.by_feature, 0);
    Ok(RegressionTree {
        nodes: builder.nodes,
    })
}

/// Fit the boosted ensemble with squared loss: stagewise trees on the
/// current residuals, shrunk by the learning rate.
pub fn fit_gbrt<F: Real>(x: &[Vec<F>], y: &[F], config: &GbrtConfig<F>) -> Result<GbrtModel<F>, Error> {
    config.validate()?;
    let n_features = check_matrix(x, y.len())?;
    if y.len() < 2 {
        return Err(Error::TooFewEntries {
            need: 2,
            got: y.len(),
        });
    }
    let n = y.len();
    let n_f = F::c(n as f64);
    let base = y.iter().fold(F::zero(), |a, &v| a + v) / n_f;

    let presorted = Presorted::build(x, n_features);
    let mut predictions = vec![base; n];
    let mut residuals = vec![F::zero(); n];
    let mut trees = Vec::with_capacity(config.n_estimators);
    let mut staged_train_mse = Vec::with_capacity(config.n_estimators);

    for _ in 0..config.n_estimators {
        for i in 0..n {
            residuals[i] = y[i] - predictions[i];
        }
        let mut builder = TreeBuilder {
            x,
            residuals: &residuals,
            max_depth: config.max_depth,
            min_samples_leaf: config.min_samples_leaf,
            nodes: Vec::new(),
            train_output: vec![F::zero(); n],
        };
        builder.build(presorted.by_feature.clone(), 0);
        for i in 0..n {
            predictions[i] = predictions[i] + config.learning_rate * builder.train_output[i];
        }
        trees.push(RegressionTree {
            nodes: builder.nodes,
        });
        let mse = y
            .iter()
            .zip(&predictions)
            .fold(F::zero(), |acc, (a, b)| {
                let d = *a - *b;
                acc + d * d
            })
            / n_f;
        staged_train_mse.push(mse);
    }

    Ok(GbrtModel {
        base_value: base,
        learning_rate: config.learning_rate,
        trees,
        n_features,
        staged_train_mse,
    })
}

/// Additive-form evaluation of the ensemble on a sample matrix.
pub fn predict<F: Real>(model: &GbrtModel<F>, x: &[Vec<F>]) -> Result<Vec<F>, Error> {
    let mut out = Vec::with_capacity(x.len());
    for row in x {
        if row.len() != model.n_features {
            return Err(Error::FeatureCountMismatch {
                expected: model.n_features,
                got: row.len(),
            });
        }
        let mut acc = model.base_value;
        for tree in &model.trees {
            acc = acc + model.learning_rate * tree.predict_row(row);
        }
        out.push(acc);
    }
    Ok(out)
}

/// Contiguous time-ordered k-fold grid search; returns the config with the
/// lowest mean validation nRMSE, ties broken by smaller learning rate then
/// smaller depth (grid iteration order).
pub fn grid_search_cv<F: Real>(
    x: &[Vec<F>],
    y: &[F],
    lr_grid: &[F],
    depth_grid: &[usize],
    k: usize,
) -> Result<GbrtConfig<F>, Error> {
    check_matrix(x, y.len())?;
    if k < 2 || y.len() < k {
        return Err(Error::TooFewEntries {
            need: k.max(2),
            got: y.len(),
        });
    }
    if lr_grid.is_empty() || depth_grid.is_empty() {
        return Err(Error::InvalidConfig("empty hyperparameter grid".into()));
    }
    let n = y.len();
    let bounds: Vec<(usize, usize)> = (0..k)
        .map(|i| (i * n / k, (i + 1) * n / k))
        .collect();

    let mut best: Option<(F, GbrtConfig<F>)> = None;
    for &lr in lr_grid {
        for &depth in depth_grid {
            let config = GbrtConfig::new(lr, depth);
            let mut score_sum = F::zero();
            for &(lo, hi) in &bounds {
                let (mut xt, mut yt) = (Vec::with_capacity(n - (hi - lo)), Vec::new());
                for i in (0..lo).chain(hi..n) {
                    xt.push(x[i].clone());
                    yt.push(y[i]);
                }
                let model = fit_gbrt(&xt, &yt, &config)?;
                let preds = predict(&model, &x[lo..hi])?;
                score_sum = score_sum + nrmse(&y[lo..hi], &preds)?;
            }
            let mean_score = score_sum / F::c(k as f64);
            if best
                .as_ref()
                .map(|(s, _)| mean_score < *s)
                .unwrap_or(true)
            {
                best = Some((mean_score, config));
            }
        }
    }
    Ok(best.unwrap().1)
}

/// Write the model as a versioned flat file: base value, learning rate,
/// then each tree as preorder `S feature threshold` / `L value` records.
pub fn save_model(model: &GbrtModel<f64>, path: &Path) -> Result<(), Error> {
    let mut out = String::from("powersynth-gbrt v1\n");
    out.push_str(&format!("n_features {}\n", model.n_features));
    out.push_str(&format!("base {:.16e}\n", model.base_value));
    out.push_str(&format!("learning_rate {:.16e}\n", model.learning_rate));
    out.push_str(&format!("n_trees {}\n", model.trees.len()));
    for tree in &model.trees {
        out.push_str(&format!("tree {}\n", tree.nodes.len()));
        write_preorder(tree, 0, &mut out);
    }
    std::fs::write(path, out).map_err(|e| Error::io(path.display().to_string(), e))
}

fn write_preorder(tree: &RegressionTree<f64>, idx: usize, out: &mut String) {
    match tree.nodes[idx] {
        Node::Leaf { value } => out.push_str(&format!("L {value:.16e}\n")),
        Node::Split {
            feature,
            threshold,
            left,
            right,
        } => {
            out.push_str(&format!("S {feature} {threshold:.16e}\n"));
            write_preorder(tree, left, out);
            write_preorder(tree, right, out);
        }
    }
}

/// Load a model written by [`save_model`].
pub fn load_model(path: &Path) -> Result<GbrtModel<f64>, Error> {
    let content =
        std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    let bad = |msg: &str| Error::InvalidModelFile(msg.to_string());
    let mut lines = content.lines();
    if lines.next() != Some("powersynth-gbrt v1") {
        return Err(bad("unknown header"));
    }
    let mut field = |name: &str| -> Result<String, Error> {
        let line = lines.next().ok_or_else(|| bad("truncated file"))?;
        line.strip_prefix(name)
            .and_then(|s| s.strip_prefix(' '))
            .map(str::to_string)
            .ok_or_else(|| bad(&format!("expected field {name}")))
    };
    let n_features: usize = field("n_features")?.parse().map_err(|_| bad("n_features"))?;
    let base_value: f64 = field("base")?.parse().map_err(|_| bad("base"))?;
    let learning_rate: f64 = field("learning_rate")?
        .parse()
        .map_err(|_| bad("learning_rate"))?;
    let n_trees: usize = field("n_trees")?.parse().map_err(|_| bad("n_trees"))?;
    let rest: Vec<&str> = lines.collect();
    let mut pos = 0usize;
    let mut trees = Vec::with_capacity(n_trees);
    for _ in 0..n_trees {
        let header = rest.get(pos).ok_or_else(|| bad("truncated tree"))?;
        let n_nodes: usize = header
            .strip_prefix("tree ")
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| bad("tree header"))?;
        pos += 1;
        let mut nodes = Vec::with_capacity(n_nodes);
        read_preorder(&rest, &mut pos, &mut nodes)?;
        if nodes.len() != n_nodes {
            return Err(bad("tree node count mismatch"));
        }
        trees.push(RegressionTree { nodes });
    }
    Ok(GbrtModel {
        base_value,
        learning_rate,
        trees,
        n_features,
        staged_train_mse: Vec::new(),
    })
}

fn read_preorder(
    lines: &[&str],
    pos: &mut usize,
    nodes: &mut Vec<Node<f64>>,
) -> Result<usize, Error> {
    let bad = |msg: &str| Error::InvalidModelFile(msg.to_string());
    let line = lines.get(*pos).ok_or_else(|| bad("truncated node list"))?;
    *pos += 1;
    let idx = nodes.len();
    if let Some(rest) = line.strip_prefix("L ") {
        let value: f64 = rest.parse().map_err(|_| bad("leaf value"))?;
        nodes.push(Node::Leaf { value });
        Ok(idx)
    } else if let Some(rest) = line.strip_prefix("S ") {
        let mut parts = rest.split(' ');
        let feature: usize = parts
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| bad("split feature"))?;
        let threshold: f64 = parts
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| bad("split threshold"))?;
        nodes.push(Node::Leaf { value: 0.0 }); // placeholder
        let left = read_preorder(lines, pos, nodes)?;
        let right = read_preorder(lines, pos, nodes)?;
        nodes[idx] = Node::Split {
            feature,
            threshold,
            left,
            right,
        };
        Ok(idx)
    } else {
        Err(bad("unknown node record"))
    }
}
