//! Random forest of Gini-split decision trees.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{check_dimension, LabeledMatrix};
use crate::corpus::Label;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ForestParams {
    pub n_trees: usize,
    /// `None` grows until leaves are pure or unsplittable.
    pub max_depth: Option<usize>,
    /// `None` uses round(sqrt(d)), at least 1.
    pub features_per_split: Option<usize>,
    pub bootstrap: bool,
    pub seed: u64,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            n_trees: 100,
            max_depth: None,
            features_per_split: None,
            bootstrap: true,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Node {
    Split {
        feature: usize,
        threshold: f64,
        /// Index of the child for `x[feature] <= threshold`.
        left: usize,
        right: usize,
    },
    Leaf {
        accepted: usize,
        rejected: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    /// Node 0 is the root.
    pub nodes: Vec<Node>,
    pub seed: u64,
}

impl Tree {
    pub fn vote(&self, x: &[f64]) -> Label {
        let mut at = 0;
        loop {
            match self.nodes[at] {
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => at = if x[feature] <= threshold { left } else { right },
                Node::Leaf { accepted, rejected } => {
                    return if accepted > rejected { Label::Accepted } else { Label::Rejected };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], at: usize) -> usize {
            match nodes[at] {
                Node::Split { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
                Node::Leaf { .. } => 0,
            }
        }
        walk(&self.nodes, 0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub trees: Vec<Tree>,
    pub input_dim: usize,
    pub features_per_split: usize,
}

impl ForestModel {
    /// (accepted votes - rejected votes) / trees, in [-1, 1].
    pub fn decision_value(&self, x: &[f64]) -> Result<f64> {
        check_dimension(self.input_dim, x.len())?;
        let acc = self.trees.iter().filter(|t| t.vote(x) == Label::Accepted).count() as f64;
        let n = self.trees.len() as f64;
        Ok((2.0 * acc - n) / n)
    }
}

pub fn train_rfdt(data: &LabeledMatrix, params: &ForestParams) -> Result<ForestModel> {
    data.require_both_classes()?;
    if params.n_trees == 0 {
        return Err(Error::Training("forest needs at least one tree".into()));
    }
    let dim = data.dim();
    let per_split = params
        .features_per_split
        .unwrap_or_else(|| (dim as f64).sqrt().round() as usize)
        .clamp(1, dim.max(1));
    let mut master = ChaCha8Rng::seed_from_u64(params.seed);
    let seeds: Vec<u64> = (0..params.n_trees).map(|_| master.random()).collect();
    let trees = seeds
        .into_iter()
        .map(|seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let sample: Vec<usize> = if params.bootstrap {
                (0..data.len()).map(|_| rng.random_range(0..data.len())).collect()
            } else {
                (0..data.len()).collect()
            };
            let mut builder = Builder {
                data,
                per_split,
                max_depth: params.max_depth,
                rng,
                nodes: Vec::new(),
            };
            builder.grow(sample, 0);
            Tree {
                nodes: builder.nodes,
                seed,
            }
        })
        .collect();
    Ok(ForestModel {
        trees,
        input_dim: dim,
        features_per_split: per_split,
    })
}

fn gini(acc: usize, rej: usize) -> f64 {
    let n = (acc + rej) as f64;
    if n == 0.0 {
        return 0.0;
    }
    let p = acc as f64 / n;
    2.0 * p * (1.0 - p)
}

struct Builder<'a> {
    data: &'a LabeledMatrix,
    per_split: usize,
    max_depth: Option<usize>,
    rng: ChaCha8Rng,
    nodes: Vec<Node>,
}

impl Builder<'_> {
    fn counts(&self, sample: &[usize]) -> (usize, usize) {
        let acc = sample.iter().filter(|&&i| self.data.labels[i] == Label::Accepted).count();
        (acc, sample.len() - acc)
    }

    fn grow(&mut self, sample: Vec<usize>, depth: usize) -> usize {
        let at = self.nodes.len();
        let (acc, rej) = self.counts(&sample);
        self.nodes.push(Node::Leaf {
            accepted: acc,
            rejected: rej,
        });
        if acc == 0 || rej == 0 || self.max_depth.is_some_and(|d| depth >= d) {
            return at;
        }
        let Some((feature, threshold)) = self.best_split(&sample) else {
            return at;
        };
        let (l, r): (Vec<usize>, Vec<usize>) = sample
            .into_iter()
            .partition(|&i| self.data.rows[i][feature] <= threshold);
        let left = self.grow(l, depth + 1);
        let right = self.grow(r, depth + 1);
        self.nodes[at] = Node::Split {
            feature,
            threshold,
            left,
            right,
        };
        at
    }

    /// Lowest weighted Gini among `per_split` random features. Features that
    /// are constant on this node do not count toward the quota, so a split is
    /// found whenever any feature varies. Zero-gain splits are kept: a pure
    /// partition may only appear one level further down (as in XOR).
    fn best_split(&mut self, sample: &[usize]) -> Option<(usize, f64)> {
        let mut features: Vec<usize> = (0..self.data.dim()).collect();
        features.shuffle(&mut self.rng);
        let n = sample.len() as f64;
        let mut best: Option<(f64, usize, f64)> = None;
        let mut tried = 0;
        let mut values: Vec<(f64, Label)> = Vec::with_capacity(sample.len());
        for feature in features {
            if tried >= self.per_split && best.is_some() {
                break;
            }
            values.clear();
            values.extend(sample.iter().map(|&i| (self.data.rows[i][feature], self.data.labels[i])));
            values.sort_by(|a, b| a.0.total_cmp(&b.0));
            if values[0].0 == values[values.len() - 1].0 {
                continue;
            }
            tried += 1;
            let total_acc = values.iter().filter(|v| v.1 == Label::Accepted).count();
            let mut left_acc = 0;
            for k in 1..values.len() {
                if values[k - 1].1 == Label::Accepted {
                    left_acc += 1;
                }
                if values[k - 1].0 == values[k].0 {
                    continue;
                }
                let left_n = k;
                let right_n = values.len() - k;
                let score = (left_n as f64 * gini(left_acc, left_n - left_acc)
                    + right_n as f64 * gini(total_acc - left_acc, right_n - (total_acc - left_acc)))
                    / n;
                if best.is_none_or(|b| score < b.0) {
                    let mid = values[k - 1].0 + (values[k].0 - values[k - 1].0) / 2.0;
                    best = Some((score, feature, mid));
                }
            }
        }
        best.map(|(_, f, t)| (f, t))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_tree_memorizes_distinct_points() {
        let rows: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64, ((i * 7) % 10) as f64]).collect();
        let labels: Vec<Label> = [1, 0, 0, 1, 1, 0, 1, 0, 1, 0]
            .iter()
            .map(|&b| if b == 1 { Label::Accepted } else { Label::Rejected })
            .collect();
        let data = LabeledMatrix::new(rows, labels).unwrap();
        let params = ForestParams {
            n_trees: 1,
            bootstrap: false,
            ..Default::default()
        };
        let forest = train_rfdt(&data, &params).unwrap();
        for (row, label) in data.rows.iter().zip(&data.labels) {
            assert_eq!(Label::from_decision(forest.decision_value(row).unwrap()), *label);
        }
    }

    #[test]
    fn pure_node_is_a_leaf() {
        let data = LabeledMatrix::new(
            vec![vec![0.0], vec![1.0], vec![2.0], vec![3.0]],
            vec![Label::Rejected, Label::Rejected, Label::Accepted, Label::Accepted],
        )
        .unwrap();
        let params = ForestParams {
            n_trees: 1,
            bootstrap: false,
            ..Default::default()
        };
        let tree = &train_rfdt(&data, &params).unwrap().trees[0];
        assert_eq!(tree.nodes.len(), 3);
        assert!(matches!(tree.nodes[1], Node::Leaf { accepted: 0, rejected: 2 }));
        assert!(matches!(tree.nodes[2], Node::Leaf { accepted: 2, rejected: 0 }));
    }

    #[test]
    fn even_vote_split_is_rejected() {
        let accept = Tree {
            nodes: vec![Node::Leaf { accepted: 1, rejected: 0 }],
            seed: 0,
        };
        let reject = Tree {
            nodes: vec![Node::Leaf { accepted: 0, rejected: 1 }],
            seed: 1,
        };
        let forest = ForestModel {
            trees: vec![accept, reject],
            input_dim: 1,
            features_per_split: 1,
        };
        let v = forest.decision_value(&[0.0]).unwrap();
        assert_eq!(v, 0.0);
        assert_eq!(Label::from_decision(v), Label::Rejected);
    }

    #[test]
    fn leaf_tie_votes_rejected() {
        let t = Tree {
            nodes: vec![Node::Leaf { accepted: 2, rejected: 2 }],
            seed: 0,
        };
        assert_eq!(t.vote(&[1.0]), Label::Rejected);
    }
}
