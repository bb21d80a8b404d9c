//! Gradient-boosted decision trees on the logistic loss.
//!
//! Regression trees are fit to the loss gradients each round with Newton
//! leaf values (second-order step, ridge-damped), exact greedy splits over
//! presorted feature orders, and a shrinkage factor. Training records the
//! loss after every round; it must never increase.

use serde::{Deserialize, Serialize};

use super::dataset::Matrix;
use crate::error::{Error, Result};
use crate::numeric::{logit, sigmoid};

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default)]
pub struct GbdtParams {
    pub trees: usize,
    pub max_depth: usize,
    pub learning_rate: f64,
    /// Ridge term on leaf values.
    pub lambda: f64,
    pub min_leaf: usize,
}

impl Default for GbdtParams {
    fn default() -> Self {
        GbdtParams {
            trees: 100,
            max_depth: 3,
            learning_rate: 0.1,
            lambda: 1.0,
            min_leaf: 2,
        }
    }
}

/// Flat tree arena. Leaves have `feature == usize::MAX`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeNode {
    pub feature: usize,
    pub threshold: f64,
    pub left: usize,
    pub right: usize,
    pub value: f64,
}

impl TreeNode {
    fn leaf(value: f64) -> TreeNode {
        TreeNode {
            feature: usize::MAX,
            threshold: 0.0,
            left: 0,
            right: 0,
            value,
        }
    }

    pub fn is_leaf(&self) -> bool {
        self.feature == usize::MAX
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<TreeNode>,
}

impl Tree {
    pub fn leaf_value(&self, row: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            let node = &self.nodes[i];
            if node.is_leaf() {
                return node.value;
            }
            i = if row[node.feature] <= node.threshold {
                node.left
            } else {
                node.right
            };
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbdtModel {
    pub base_score: f64,
    pub learning_rate: f64,
    pub trees: Vec<Tree>,
    /// Mean logistic loss after initialization and after every round.
    pub train_loss: Vec<f64>,
}

impl GbdtModel {
    pub fn predict_rows(&self, x: &Matrix) -> Vec<f64> {
        x.iter_rows()
            .map(|row| {
                let mut f = self.base_score;
                for tree in &self.trees {
                    f += self.learning_rate * tree.leaf_value(row);
                }
                sigmoid(f)
            })
            .collect()
    }
}

struct NodeAccumulator {
    g_left: f64,
    h_left: f64,
    n_left: usize,
    last_value: f64,
    seen: bool,
}

struct BestSplit {
    gain: f64,
    feature: usize,
    threshold: f64,
}

fn leaf_weight(g: f64, h: f64, lambda: f64) -> f64 {
    (-g / (h + lambda)).clamp(-4.0, 4.0)
}

fn split_score(g: f64, h: f64, lambda: f64) -> f64 {
    g * g / (h + lambda)
}

fn mean_logloss(scores: &[f64], targets: &[f64]) -> f64 {
    let mut total = 0.0;
    for (&f, &t) in scores.iter().zip(targets) {
        let p = sigmoid(f).clamp(1e-15, 1.0 - 1e-15);
        total -= t * p.ln() + (1.0 - t) * (1.0 - p).ln();
    }
    total / scores.len() as f64
}

pub fn train_gbdt(x: &Matrix, y: &[bool], params: &GbdtParams) -> Result<GbdtModel> {
    let n = x.rows();
    assert_eq!(n, y.len());
    if n == 0 {
        return Err(Error::invalid("gbdt: empty training set"));
    }
    let targets: Vec<f64> = y.iter().map(|&b| b as u8 as f64).collect();
    let positive_rate = targets.iter().sum::<f64>() / n as f64;
    let base_score = logit(positive_rate.clamp(1e-6, 1.0 - 1e-6));

    // Presorted per-feature sample orders, computed once.
    let sorted: Vec<Vec<u32>> = (0..x.cols())
        .map(|j| {
            let mut idx: Vec<u32> = (0..n as u32).collect();
            idx.sort_by(|&a, &b| {
                x.row(a as usize)[j]
                    .partial_cmp(&x.row(b as usize)[j])
                    .expect("finite feature values")
                    .then(a.cmp(&b))
            });
            idx
        })
        .collect();

    let mut scores = vec![base_score; n];
    let mut trees = Vec::with_capacity(params.trees);
    let mut train_loss = vec![mean_logloss(&scores, &targets)];

    for round in 0..params.trees {
        let mut grad = vec![0.0; n];
        let mut hess = vec![0.0; n];
        for i in 0..n {
            let p = sigmoid(scores[i]);
            grad[i] = p - targets[i];
            hess[i] = (p * (1.0 - p)).max(1e-12);
        }

        let tree = grow_tree(x, &sorted, &grad, &hess, params);
        // Apply shrunken leaf values.
        for i in 0..n {
            scores[i] += params.learning_rate * tree.leaf_value(x.row(i));
        }
        trees.push(tree);

        let loss = mean_logloss(&scores, &targets);
        if !loss.is_finite() {
            return Err(Error::invalid(format!(
                "gbdt: non-finite training loss at round {round}"
            )));
        }
        train_loss.push(loss);
    }
    Ok(GbdtModel {
        base_score,
        learning_rate: params.learning_rate,
        trees,
        train_loss,
    })
}

fn grow_tree(
    x: &Matrix,
    sorted: &[Vec<u32>],
    grad: &[f64],
    hess: &[f64],
    params: &GbdtParams,
) -> Tree {
    let n = x.rows();
    const NO_NODE: u32 = u32::MAX;

    // node_of[i]: current tree node of sample i.
    let mut node_of = vec![0u32; n];
    let mut nodes: Vec<TreeNode> = vec![TreeNode::leaf(0.0)];
    // Totals per node id.
    let mut totals: Vec<(f64, f64, usize)> = vec![{
        let g: f64 = grad.iter().sum();
        let h: f64 = hess.iter().sum();
        (g, h, n)
    }];
    let mut frontier: Vec<u32> = vec![0];

    for _depth in 0..params.max_depth {
        if frontier.is_empty() {
            break;
        }
        // Map node id -> slot in the per-level accumulator arrays.
        let slot_of: std::collections::HashMap<u32, usize> = frontier
            .iter()
            .enumerate()
            .map(|(slot, &id)| (id, slot))
            .collect();
        let mut best: Vec<Option<BestSplit>> = frontier.iter().map(|_| None).collect();

        for feature in 0..x.cols() {
            let mut accs: Vec<NodeAccumulator> = frontier
                .iter()
                .map(|_| NodeAccumulator {
                    g_left: 0.0,
                    h_left: 0.0,
                    n_left: 0,
                    last_value: 0.0,
                    seen: false,
                })
                .collect();
            for &i in &sorted[feature] {
                let i = i as usize;
                let nid = node_of[i];
                if nid == NO_NODE {
                    continue;
                }
                let Some(&slot) = slot_of.get(&nid) else {
                    continue;
                };
                let value = x.row(i)[feature];
                let acc = &mut accs[slot];
                if acc.seen && value > acc.last_value {
                    let (g_total, h_total, n_total) = totals[nid as usize];
                    let n_right = n_total - acc.n_left;
                    if acc.n_left >= params.min_leaf && n_right >= params.min_leaf {
                        let gain = split_score(acc.g_left, acc.h_left, params.lambda)
                            + split_score(
                                g_total - acc.g_left,
                                h_total - acc.h_left,
                                params.lambda,
                            )
                            - split_score(g_total, h_total, params.lambda);
                        let candidate_better = match &best[slot] {
                            Some(b) => gain > b.gain + 1e-12,
                            None => gain > 1e-12,
                        };
                        if candidate_better {
                            best[slot] = Some(BestSplit {
                                gain,
                                feature,
                                threshold: (acc.last_value + value) / 2.0,
                            });
                        }
                    }
                }
                acc.g_left += grad[i];
                acc.h_left += hess[i];
                acc.n_left += 1;
                acc.last_value = value;
                acc.seen = true;
            }
        }

        // Apply the chosen splits.
        let mut next_frontier = Vec::new();
        let mut split_applied = vec![false; frontier.len()];
        for (slot, &nid) in frontier.iter().enumerate() {
            let Some(split) = &best[slot] else { continue };
            let left = nodes.len();
            let right = nodes.len() + 1;
            nodes.push(TreeNode::leaf(0.0));
            nodes.push(TreeNode::leaf(0.0));
            nodes[nid as usize] = TreeNode {
                feature: split.feature,
                threshold: split.threshold,
                left,
                right,
                value: 0.0,
            };
            totals.push((0.0, 0.0, 0));
            totals.push((0.0, 0.0, 0));
            next_frontier.push(left as u32);
            next_frontier.push(right as u32);
            split_applied[slot] = true;
        }
        // Route samples to children and rebuild child totals.
        for i in 0..n {
            let nid = node_of[i];
            if nid == NO_NODE {
                continue;
            }
            let Some(&slot) = slot_of.get(&nid) else { continue };
            if !split_applied[slot] {
                // Finalize as leaf below; mark settled.
                continue;
            }
            let node = &nodes[nid as usize];
            let child = if x.row(i)[node.feature] <= node.threshold {
                node.left
            } else {
                node.right
            };
            node_of[i] = child as u32;
            let t = &mut totals[child];
            t.0 += grad[i];
            t.1 += hess[i];
            t.2 += 1;
        }
        // Nodes that did not split become leaves now.
        for (slot, &nid) in frontier.iter().enumerate() {
            if !split_applied[slot] {
                let (g, h, _) = totals[nid as usize];
                nodes[nid as usize] = TreeNode::leaf(leaf_weight(g, h, params.lambda));
                for own in node_of.iter_mut() {
                    if *own == nid {
                        *own = NO_NODE;
                    }
                }
            }
        }
        frontier = next_frontier;
    }

    // Depth limit reached: finalize remaining frontier nodes.
    for &nid in &frontier {
        let (g, h, _) = totals[nid as usize];
        nodes[nid as usize] = TreeNode::leaf(leaf_weight(g, h, params.lambda));
    }
    Tree { nodes }
}
