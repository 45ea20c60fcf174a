//! Bagged Gini decision trees.
//!
//! Trees split on raw encoded values (categorical codes included). Each tree
//! sees a bootstrap sample represented by per-row multiplicities; the split
//! search walks per-feature presorted index lists that are stably partitioned
//! as nodes split, so no node ever re-sorts.

use rand::seq::SliceRandom;
use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureSubsample {
    /// `floor(sqrt(d))` candidate features per split.
    Sqrt,
    All,
    Count(usize),
}

impl FeatureSubsample {
    fn per_split(self, d: usize) -> usize {
        match self {
            FeatureSubsample::Sqrt => ((d as f64).sqrt().floor() as usize).max(1),
            FeatureSubsample::All => d,
            FeatureSubsample::Count(k) => k.clamp(1, d),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForestHyper {
    pub n_trees: usize,
    /// `None` grows until leaves are pure.
    pub max_depth: Option<usize>,
    pub min_leaf: usize,
    pub feature_subsample: FeatureSubsample,
    pub bootstrap: bool,
}

impl Default for ForestHyper {
    fn default() -> Self {
        ForestHyper {
            n_trees: 100,
            max_depth: Some(16),
            min_leaf: 1,
            feature_subsample: FeatureSubsample::Sqrt,
            bootstrap: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "t", rename_all = "lowercase")]
pub enum Node {
    Leaf {
        class: u8,
    },
    Split {
        feature: u32,
        threshold: f64,
        left: u32,
        right: u32,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub nodes: Vec<Node>,
}

impl DecisionTree {
    pub fn predict(&self, row: &[f64]) -> u8 {
        let mut at = 0usize;
        loop {
            match self.nodes[at] {
                Node::Leaf { class } => return class,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    at = if row[feature as usize] <= threshold {
                        left as usize
                    } else {
                        right as usize
                    };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], at: usize) -> usize {
            match nodes[at] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, left as usize).max(walk(nodes, right as usize)),
            }
        }
        walk(&self.nodes, 0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomForest {
    pub trees: Vec<DecisionTree>,
}

impl RandomForest {
    pub fn fit(train: &Dataset, hyper: &ForestHyper, seed_: u64) -> Result<RandomForest> {
        if hyper.n_trees == 0 {
            return Err(Error::argument("forest needs at least one tree"));
        }
        if train.is_empty() {
            return Err(Error::argument("cannot fit a forest on an empty dataset"));
        }
        let d = train.n_features();
        let presorted: Vec<Vec<u32>> = (0..d)
            .map(|f| {
                let mut idx: Vec<u32> = (0..train.n_rows() as u32).collect();
                idx.sort_by(|&a, &b| {
                    train.row(a as usize)[f]
                        .total_cmp(&train.row(b as usize)[f])
                        .then(a.cmp(&b))
                });
                idx
            })
            .collect();
        let trees = (0..hyper.n_trees)
            .into_par_iter()
            .map(|t| {
                let mut rng = seed::rng(seed::derive(seed_, "tree", t as u64));
                let n = train.n_rows();
                let mut weight = vec![0u32; n];
                if hyper.bootstrap {
                    for _ in 0..n {
                        weight[rng.gen_range(0..n)] += 1;
                    }
                } else {
                    weight.iter_mut().for_each(|w| *w = 1);
                }
                TreeBuilder::new(train, &presorted, weight, hyper).build(&mut rng)
            })
            .collect();
        Ok(RandomForest { trees })
    }

    /// Fraction of trees voting class 1.
    pub fn predict_proba(&self, row: &[f64]) -> f64 {
        let votes: usize = self.trees.iter().map(|t| usize::from(t.predict(row))).sum();
        votes as f64 / self.trees.len() as f64
    }
}

struct TreeBuilder<'a> {
    data: &'a Dataset,
    weight: Vec<u32>,
    /// Per feature, in-bag rows sorted by that feature; node segments align across features.
    order: Vec<Vec<u32>>,
    goes_left: Vec<bool>,
    scratch: Vec<u32>,
    hyper: &'a ForestHyper,
}

struct Candidate {
    feature: usize,
    /// Number of sorted entries going left.
    split_at: usize,
    threshold: f64,
    impurity: f64,
}

impl<'a> TreeBuilder<'a> {
    fn new(data: &'a Dataset, presorted: &[Vec<u32>], weight: Vec<u32>, hyper: &'a ForestHyper) -> Self {
        let order = presorted
            .iter()
            .map(|o| o.iter().copied().filter(|&i| weight[i as usize] > 0).collect())
            .collect();
        TreeBuilder {
            data,
            goes_left: vec![false; data.n_rows()],
            scratch: Vec::new(),
            weight,
            order,
            hyper,
        }
    }

    fn value(&self, row: u32, f: usize) -> f64 {
        self.data.row(row as usize)[f]
    }

    fn class_weights(&self, start: usize, end: usize) -> [f64; 2] {
        let mut w = [0.0; 2];
        for &i in &self.order[0][start..end] {
            w[self.data.labels()[i as usize] as usize] += f64::from(self.weight[i as usize]);
        }
        w
    }

    fn best_split_on(&self, f: usize, start: usize, end: usize, totals: [f64; 2]) -> Option<Candidate> {
        let seg = &self.order[f][start..end];
        let total = totals[0] + totals[1];
        let min_leaf = self.hyper.min_leaf as f64;
        let mut left = [0.0; 2];
        let mut best: Option<Candidate> = None;
        for k in 0..seg.len() - 1 {
            let i = seg[k];
            left[self.data.labels()[i as usize] as usize] += f64::from(self.weight[i as usize]);
            let (a, b) = (self.value(i, f), self.value(seg[k + 1], f));
            if a == b {
                continue;
            }
            let wl = left[0] + left[1];
            let wr = total - wl;
            if wl < min_leaf || wr < min_leaf {
                continue;
            }
            let right = [totals[0] - left[0], totals[1] - left[1]];
            let impurity = (wl - (left[0] * left[0] + left[1] * left[1]) / wl)
                + (wr - (right[0] * right[0] + right[1] * right[1]) / wr);
            if best.as_ref().is_none_or(|c| impurity < c.impurity) {
                let mid = a + (b - a) / 2.0;
                let threshold = if mid < b { mid } else { a };
                best = Some(Candidate {
                    feature: f,
                    split_at: k + 1,
                    threshold,
                    impurity,
                });
            }
        }
        best
    }

    fn build(mut self, rng: &mut seed::Rng) -> DecisionTree {
        let d = self.data.n_features();
        let per_split = self.hyper.feature_subsample.per_split(d);
        let mut nodes: Vec<Node> = vec![Node::Leaf { class: 0 }];
        let mut features: Vec<usize> = (0..d).collect();
        // (node id, start, end, depth)
        let mut stack = vec![(0usize, 0usize, self.order[0].len(), 0usize)];
        while let Some((id, start, end, depth)) = stack.pop() {
            let totals = self.class_weights(start, end);
            let majority = u8::from(totals[1] > totals[0]);
            let pure = totals[0] == 0.0 || totals[1] == 0.0;
            let depth_capped = self.hyper.max_depth.is_some_and(|m| depth >= m);
            if pure || depth_capped || end - start < 2 {
                nodes[id] = Node::Leaf { class: majority };
                continue;
            }
            features.shuffle(rng);
            let mut best: Option<Candidate> = None;
            for (tried, &f) in features.iter().enumerate() {
                if tried >= per_split && best.is_some() {
                    break;
                }
                if let Some(c) = self.best_split_on(f, start, end, totals) {
                    if best.as_ref().is_none_or(|b| c.impurity < b.impurity) {
                        best = Some(c);
                    }
                }
            }
            let Some(split) = best else {
                nodes[id] = Node::Leaf { class: majority };
                continue;
            };
            for (k, &i) in self.order[split.feature][start..end].iter().enumerate() {
                self.goes_left[i as usize] = k < split.split_at;
            }
            for f in 0..d {
                let seg = &mut self.order[f][start..end];
                self.scratch.clear();
                let mut w = 0;
                for k in 0..seg.len() {
                    let i = seg[k];
                    if self.goes_left[i as usize] {
                        seg[w] = i;
                        w += 1;
                    } else {
                        self.scratch.push(i);
                    }
                }
                seg[w..].copy_from_slice(&self.scratch);
            }
            let mid = start + split.split_at;
            let left = nodes.len();
            nodes.push(Node::Leaf { class: 0 });
            nodes.push(Node::Leaf { class: 0 });
            nodes[id] = Node::Split {
                feature: split.feature as u32,
                threshold: split.threshold,
                left: left as u32,
                right: (left + 1) as u32,
            };
            stack.push((left + 1, mid, end, depth + 1));
            stack.push((left, start, mid, depth + 1));
        }
        DecisionTree { nodes }
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::data::{Feature, FeatureSchema};

    fn xor_like(n: usize, seed_: u64) -> Dataset {
        let mut rng = seed::rng(seed_);
        let schema = Arc::new(
            FeatureSchema::new(
                vec![
                    Feature::numerical("a"),
                    Feature::numerical("b"),
                    Feature::numerical("noise"),
                ],
                "y",
                ["0".into(), "1".into()],
            )
            .unwrap(),
        );
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for _ in 0..n {
            let a: f64 = rng.gen_range(-1.0..1.0);
            let b: f64 = rng.gen_range(-1.0..1.0);
            rows.push(vec![a, b, rng.gen()]);
            labels.push(u8::from((a > 0.0) ^ (b > 0.0)));
        }
        Dataset::new(schema, rows, labels).unwrap()
    }

    #[test]
    fn single_full_tree_memorizes_training_data() {
        let d = xor_like(300, 1);
        let hyper = ForestHyper {
            n_trees: 1,
            max_depth: None,
            min_leaf: 1,
            feature_subsample: FeatureSubsample::All,
            bootstrap: false,
        };
        let f = RandomForest::fit(&d, &hyper, 0).unwrap();
        for (r, &y) in d.rows().zip(d.labels()) {
            assert_eq!(f.predict_proba(r), f64::from(y));
        }
    }

    #[test]
    fn depth_zero_is_majority_prior() {
        let d = xor_like(101, 2);
        let hyper = ForestHyper {
            max_depth: Some(0),
            n_trees: 3,
            ..Default::default()
        };
        let f = RandomForest::fit(&d, &hyper, 0).unwrap();
        assert!(f.trees.iter().all(|t| t.nodes.len() == 1));
    }

    #[test]
    fn depth_cap_respected_and_deterministic() {
        let d = xor_like(400, 3);
        let hyper = ForestHyper {
            n_trees: 10,
            max_depth: Some(3),
            ..Default::default()
        };
        let a = RandomForest::fit(&d, &hyper, 9).unwrap();
        let b = RandomForest::fit(&d, &hyper, 9).unwrap();
        assert_eq!(a, b);
        assert!(a.trees.iter().all(|t| t.depth() <= 3));
    }

    #[test]
    fn learns_xor_out_of_sample() {
        let train = xor_like(2000, 4);
        let test = xor_like(500, 5);
        let f = RandomForest::fit(
            &train,
            &ForestHyper {
                n_trees: 30,
                ..Default::default()
            },
            1,
        )
        .unwrap();
        let correct = test
            .rows()
            .zip(test.labels())
            .filter(|(r, &y)| u8::from(f.predict_proba(r) >= 0.5) == y)
            .count();
        assert!(correct as f64 / 500.0 > 0.9);
    }
}
