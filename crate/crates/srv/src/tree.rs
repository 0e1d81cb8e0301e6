//! CART training and prediction.
//!
//! Split selection is fully deterministic: candidate thresholds are the
//! midpoints between consecutive distinct sorted values, candidates are
//! scored by exact integer arithmetic (no float comparisons of weighted
//! impurities), and ties resolve to the lowest attribute, then the lowest
//! threshold. Two independent implementations of this procedure produce
//! byte-identical trees.

use vp_dialect::DialectId;

use crate::features::{StructureFeatures, FEATURE_COUNT};
use crate::SrvError;

/// Training controls. The defaults comfortably separate the built-in
/// dialect shapes (which need a tree of depth well under 16).
#[derive(Debug, Clone, Copy)]
pub struct TrainParams {
    pub max_depth: usize,
    pub min_samples_split: usize,
}

impl Default for TrainParams {
    fn default() -> Self {
        Self {
            max_depth: 16,
            min_samples_split: 2,
        }
    }
}

/// One tree node. Children are stored as indices into the node table and
/// always point forward (child index > parent index).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Node {
    Leaf {
        class: DialectId,
    },
    Split {
        attribute: u16,
        threshold: f32,
        left: u32,
        right: u32,
    },
}

/// A trained classifier over [`StructureFeatures`]. `nodes[0]` is the root.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionTree {
    pub(crate) nodes: Vec<Node>,
}

impl DecisionTree {
    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    /// Routes a feature vector to a leaf: strictly-less goes left.
    pub fn predict(&self, features: &StructureFeatures) -> DialectId {
        let mut index = 0usize;
        loop {
            match self.nodes[index] {
                Node::Leaf { class } => return class,
                Node::Split {
                    attribute,
                    threshold,
                    left,
                    right,
                } => {
                    index = if features.0[usize::from(attribute)] < threshold {
                        left as usize
                    } else {
                        right as usize
                    };
                }
            }
        }
    }
}

/// Fraction of rows the tree labels correctly.
pub fn accuracy(tree: &DecisionTree, rows: &[(StructureFeatures, DialectId)]) -> f64 {
    if rows.is_empty() {
        return 1.0;
    }
    let hits = rows
        .iter()
        .filter(|(features, label)| tree.predict(features) == *label)
        .count();
    hits as f64 / rows.len() as f64
}

/// Grows a tree on labeled feature vectors.
pub fn train_tree(
    rows: &[(StructureFeatures, DialectId)],
    params: &TrainParams,
) -> Result<DecisionTree, SrvError> {
    if rows.is_empty() {
        return Err(SrvError::EmptyDataset);
    }
    let num_classes = rows
        .iter()
        .map(|(_, label)| usize::from(label.get()))
        .max()
        .expect("non-empty");
    let mut builder = Builder {
        rows,
        num_classes,
        params: *params,
        nodes: Vec::new(),
    };
    let indices: Vec<u32> = (0..rows.len() as u32).collect();
    builder.build(indices, 0);
    Ok(DecisionTree {
        nodes: builder.nodes,
    })
}

struct Builder<'a> {
    rows: &'a [(StructureFeatures, DialectId)],
    num_classes: usize,
    params: TrainParams,
    nodes: Vec<Node>,
}

struct BestSplit {
    attribute: usize,
    threshold: f32,
    // Exact score components: Σ counts² and row count per side.
    left_sq: u64,
    left_n: u64,
    right_sq: u64,
    right_n: u64,
}

impl Builder<'_> {
    /// Appends the subtree for `indices`, returning its root index. Nodes
    /// are laid out parent-first, so children always point forward.
    fn build(&mut self, indices: Vec<u32>, depth: usize) -> u32 {
        let counts = self.histogram(&indices);
        let node_index = self.nodes.len() as u32;
        self.nodes.push(Node::Leaf {
            class: majority_class(&counts),
        });

        let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
        if pure
            || depth >= self.params.max_depth
            || indices.len() < self.params.min_samples_split
        {
            return node_index;
        }
        let Some(best) = self.best_split(&indices, &counts) else {
            return node_index;
        };

        let (left_rows, right_rows): (Vec<u32>, Vec<u32>) = indices.iter().partition(|&&i| {
            self.rows[i as usize].0 .0[best.attribute] < best.threshold
        });
        debug_assert!(!left_rows.is_empty() && !right_rows.is_empty());

        let left = self.build(left_rows, depth + 1);
        let right = self.build(right_rows, depth + 1);
        self.nodes[node_index as usize] = Node::Split {
            attribute: best.attribute as u16,
            threshold: best.threshold,
            left,
            right,
        };
        node_index
    }

    fn histogram(&self, indices: &[u32]) -> Vec<u64> {
        let mut counts = vec![0u64; self.num_classes];
        for &i in indices {
            counts[self.rows[i as usize].1.index()] += 1;
        }
        counts
    }

    /// Scans every attribute (ascending) and every midpoint threshold
    /// (ascending) and keeps the first candidate with the strictly best
    /// score. Only splits that strictly improve on the parent count.
    fn best_split(&self, indices: &[u32], parent_counts: &[u64]) -> Option<BestSplit> {
        let n = indices.len() as u64;
        let parent_sq: u64 = parent_counts.iter().map(|&c| c * c).sum();
        let mut best: Option<BestSplit> = None;

        let mut sorted: Vec<(f32, usize)> = Vec::with_capacity(indices.len());
        for attribute in 0..FEATURE_COUNT {
            sorted.clear();
            sorted.extend(indices.iter().map(|&i| {
                let row = &self.rows[i as usize];
                (row.0 .0[attribute], row.1.index())
            }));
            sorted.sort_by(|a, b| a.0.total_cmp(&b.0));

            let mut left_counts = vec![0u64; self.num_classes];
            let mut left_sq = 0u64;
            let mut right_counts = parent_counts.to_vec();
            let mut right_sq = parent_sq;

            // Row `window_at` has not moved left yet, so the left side
            // holds exactly `window_at` rows at the boundary check.
            for window_at in 0..sorted.len() {
                let (value, class) = sorted[window_at];
                if window_at > 0 {
                    let prev = sorted[window_at - 1].0;
                    if prev < value {
                        // Midpoint of two exactly-representable small values;
                        // skip if rounding collapsed it onto an endpoint.
                        let threshold = prev / 2.0 + value / 2.0;
                        if prev < threshold && threshold <= value {
                            let candidate = BestSplit {
                                attribute,
                                threshold,
                                left_sq,
                                left_n: window_at as u64,
                                right_sq,
                                right_n: n - window_at as u64,
                            };
                            if improves_parent(&candidate, parent_sq)
                                && best.as_ref().is_none_or(|b| score_gt(&candidate, b))
                            {
                                best = Some(candidate);
                            }
                        }
                    }
                }
                // Move this row to the left side for the next boundary.
                left_sq += 2 * left_counts[class] + 1;
                left_counts[class] += 1;
                right_sq -= 2 * right_counts[class] - 1;
                right_counts[class] -= 1;
                left_n += 1;
            }
        }
        best
    }
}

fn majority_class(counts: &[u64]) -> DialectId {
    let mut best_index = 0usize;
    for (index, &count) in counts.iter().enumerate() {
        if count > counts[best_index] {
            best_index = index;
        }
    }
    DialectId::from_index(best_index)
}

/// Split quality is `Σc_L²/n_L + Σc_R²/n_R` (maximizing it minimizes the
/// weighted Gini impurity). Comparisons cross-multiply in u128 so equal
/// scores are recognized exactly and ties break deterministically.
fn score_gt(a: &BestSplit, b: &BestSplit) -> bool {
    let lhs = (u128::from(a.left_sq) * u128::from(a.right_n)
        + u128::from(a.right_sq) * u128::from(a.left_n))
        * (u128::from(b.left_n) * u128::from(b.right_n));
    let rhs = (u128::from(b.left_sq) * u128::from(b.right_n)
        + u128::from(b.right_sq) * u128::from(b.left_n))
        * (u128::from(a.left_n) * u128::from(a.right_n));
    lhs > rhs
}

/// `score(split) > score(parent)`, i.e. the split strictly reduces the
/// weighted impurity. For left (A, n), right (B, m), parent `P = Σc²`
/// over N = n + m rows: `A/n + B/m > P/N ⟺ N·(A·m + B·n) > P·n·m`.
fn improves_parent(split: &BestSplit, parent_sq: u64) -> bool {
    let n = u128::from(split.left_n);
    let m = u128::from(split.right_n);
    let lhs = (n + m) * (u128::from(split.left_sq) * m + u128::from(split.right_sq) * n);
    let rhs = u128::from(parent_sq) * n * m;
    lhs > rhs
}
