//! CART trees with Gini impurity, and the two randomised ensembles built
//! from them.

use rand::seq::SliceRandom;
use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::seed::{self, derive_seed};

/// How a node searches for its split.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Splitter {
    /// Best threshold over all midpoints of each candidate feature.
    Best,
    /// One uniform random cut-point per candidate feature.
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TreeParams {
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    /// Candidate features per node; `None` means all.
    pub max_features: Option<usize>,
    pub splitter: Splitter,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Node {
    Split {
        feature: usize,
        threshold: f64,
        left: u32,
        right: u32,
    },
    Leaf {
        /// Share of positive training rows in the leaf.
        positive: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    pub fn leaf_value(&self, row: &[f64]) -> f64 {
        let mut i = 0usize;
        loop {
            match self.nodes[i] {
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if row[feature] <= threshold { left } else { right } as usize,
                Node::Leaf { positive } => return positive,
            }
        }
    }

    /// Hard vote; an even leaf goes to the negative class.
    pub fn vote(&self, row: &[f64]) -> bool {
        self.leaf_value(row) > 0.5
    }

    pub fn depth(&self) -> usize {
        fn go(nodes: &[Node], i: usize) -> usize {
            match nodes[i] {
                Node::Split { left, right, .. } => 1 + go(nodes, left as usize).max(go(nodes, right as usize)),
                Node::Leaf { .. } => 0,
            }
        }
        go(&self.nodes, 0)
    }
}

fn gini(pos: usize, total: usize) -> f64 {
    if total == 0 {
        return 0.0;
    }
    let p = pos as f64 / total as f64;
    2.0 * p * (1.0 - p)
}

struct Builder<'a> {
    x: &'a [Vec<f64>],
    y: &'a [bool],
    params: TreeParams,
    rng: seed::Rng,
    nodes: Vec<Node>,
    n_features: usize,
    scratch: Vec<(f64, bool)>,
}

struct Split {
    feature: usize,
    threshold: f64,
    score: f64,
}

impl Builder<'_> {
    fn build(&mut self, rows: &mut [usize], depth: usize) -> u32 {
        let id = self.nodes.len() as u32;
        let pos = rows.iter().filter(|&&r| self.y[r]).count();
        self.nodes.push(Node::Leaf {
            positive: pos as f64 / rows.len() as f64,
        });
        let pure = pos == 0 || pos == rows.len();
        let depth_reached = self.params.max_depth.is_some_and(|d| depth >= d);
        if pure || depth_reached || rows.len() < self.params.min_samples_split {
            return id;
        }
        let Some(split) = self.find_split(rows, pos) else {
            return id;
        };
        let mid = partition(rows, |&r| self.x[r][split.feature] <= split.threshold);
        if mid == 0 || mid == rows.len() {
            return id;
        }
        let (l, r) = rows.split_at_mut(mid);
        let left = self.build(l, depth + 1);
        let right = self.build(r, depth + 1);
        self.nodes[id as usize] = Node::Split {
            feature: split.feature,
            threshold: split.threshold,
            left,
            right,
        };
        id
    }

    /// Features are visited in random order; constant features do not count
    /// towards `max_features`.
    fn find_split(&mut self, rows: &[usize], pos: usize) -> Option<Split> {
        let mut features: Vec<usize> = (0..self.n_features).collect();
        features.shuffle(&mut self.rng);
        let budget = self.params.max_features.unwrap_or(self.n_features).max(1);
        let mut visited = 0;
        let mut best: Option<Split> = None;
        for f in features {
            if visited >= budget {
                break;
            }
            let (lo, hi) = rows.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &r| {
                let v = self.x[r][f];
                (lo.min(v), hi.max(v))
            });
            if !(hi > lo) {
                continue;
            }
            visited += 1;
            let candidate = match self.params.splitter {
                Splitter::Best => self.best_threshold(rows, f, pos),
                Splitter::Random => {
                    let mut t = self.rng.gen_range(lo..hi);
                    if t >= hi {
                        t = lo;
                    }
                    Some(self.score_threshold(rows, f, t, pos))
                }
            };
            if let Some(c) = candidate {
                if best.as_ref().is_none_or(|b| c.score < b.score) {
                    best = Some(c);
                }
            }
        }
        best
    }

    fn score_threshold(&self, rows: &[usize], f: usize, t: f64, pos: usize) -> Split {
        let (mut nl, mut pl) = (0usize, 0usize);
        for &r in rows {
            if self.x[r][f] <= t {
                nl += 1;
                pl += self.y[r] as usize;
            }
        }
        let n = rows.len();
        let score = (nl as f64 * gini(pl, nl) + (n - nl) as f64 * gini(pos - pl, n - nl)) / n as f64;
        Split {
            feature: f,
            threshold: t,
            score,
        }
    }

    fn best_threshold(&mut self, rows: &[usize], f: usize, pos: usize) -> Option<Split> {
        self.scratch.clear();
        self.scratch.extend(rows.iter().map(|&r| (self.x[r][f], self.y[r])));
        self.scratch.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
        let n = rows.len();
        let (mut nl, mut pl) = (0usize, 0usize);
        let mut best: Option<(f64, usize)> = None;
        for i in 0..n - 1 {
            nl += 1;
            pl += self.scratch[i].1 as usize;
            if self.scratch[i].0 == self.scratch[i + 1].0 {
                continue;
            }
            let score = (nl as f64 * gini(pl, nl) + (n - nl) as f64 * gini(pos - pl, n - nl)) / n as f64;
            if best.is_none_or(|(s, _)| score < s) {
                best = Some((score, i));
            }
        }
        best.map(|(score, i)| {
            let (a, b) = (self.scratch[i].0, self.scratch[i + 1].0);
            let mut t = a + (b - a) / 2.0;
            if t >= b {
                t = a;
            }
            Split {
                feature: f,
                threshold: t,
                score,
            }
        })
    }
}

fn partition<T, F: Fn(&T) -> bool>(v: &mut [T], pred: F) -> usize {
    let mut mid = 0;
    for i in 0..v.len() {
        if pred(&v[i]) {
            v.swap(i, mid);
            mid += 1;
        }
    }
    mid
}

pub fn fit_tree(x: &[Vec<f64>], y: &[bool], rows: &[usize], params: TreeParams, seed_value: u64) -> Tree {
    let n_features = x.first().map_or(0, Vec::len);
    let mut b = Builder {
        x,
        y,
        params,
        rng: seed::rng(seed_value),
        nodes: Vec::new(),
        n_features,
        scratch: Vec::with_capacity(rows.len()),
    };
    let mut rows = rows.to_vec();
    b.build(&mut rows, 0);
    Tree { nodes: b.nodes }
}

/// Fit `n_trees` trees in parallel; tree `t` is seeded from `(seed, t)` so
/// the forest does not depend on scheduling.
pub fn fit_forest(x: &[Vec<f64>], y: &[bool], n_trees: usize, bootstrap: bool, params: TreeParams, seed_value: u64) -> Vec<Tree> {
    let n = y.len();
    (0..n_trees)
        .into_par_iter()
        .map(|t| {
            let tree_seed = derive_seed(seed_value, &[t as u64]);
            let rows: Vec<usize> = if bootstrap {
                let mut rng = seed::rng(derive_seed(tree_seed, &[crate::seed::tag("bootstrap")]));
                (0..n).map(|_| rng.gen_range(0..n)).collect()
            } else {
                (0..n).collect()
            };
            fit_tree(x, y, &rows, params, tree_seed)
        })
        .collect()
}

/// Share of trees voting positive.
pub fn forest_proba(trees: &[Tree], row: &[f64]) -> f64 {
    trees.iter().filter(|t| t.vote(row)).count() as f64 / trees.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(splitter: Splitter) -> TreeParams {
        TreeParams {
            max_depth: None,
            min_samples_split: 2,
            max_features: None,
            splitter,
        }
    }

    #[test]
    fn xor_is_fit_exactly() {
        let x = vec![vec![0.0, 0.0], vec![0.0, 1.0], vec![1.0, 0.0], vec![1.0, 1.0]];
        let y = vec![false, true, true, false];
        for seed in 0..10 {
            let t = fit_tree(&x, &y, &[0, 1, 2, 3], params(Splitter::Best), seed);
            for (row, &label) in x.iter().zip(&y) {
                assert_eq!(t.vote(row), label);
            }
            assert_eq!(t.depth(), 2);
        }
    }

    #[test]
    fn depth_limit() {
        let x: Vec<Vec<f64>> = (0..16).map(|i| vec![i as f64]).collect();
        let y: Vec<bool> = (0..16).map(|i| i % 2 == 0).collect();
        let p = TreeParams {
            max_depth: Some(1),
            ..params(Splitter::Best)
        };
        let rows: Vec<usize> = (0..16).collect();
        assert_eq!(fit_tree(&x, &y, &rows, p, 0).depth(), 1);
    }

    #[test]
    fn random_splitter_separates_clean_data() {
        let x: Vec<Vec<f64>> = (0..40).map(|i| vec![i as f64, 0.0]).collect();
        let y: Vec<bool> = (0..40).map(|i| i >= 20).collect();
        let rows: Vec<usize> = (0..40).collect();
        let t = fit_tree(&x, &y, &rows, params(Splitter::Random), 3);
        assert!(x.iter().zip(&y).all(|(r, &l)| t.vote(r) == l));
    }

    #[test]
    fn midpoint_threshold() {
        let x = vec![vec![1.0], vec![3.0]];
        let t = fit_tree(&x, &[false, true], &[0, 1], params(Splitter::Best), 0);
        assert!(matches!(t.nodes[0], Node::Split { threshold, .. } if threshold == 2.0));
    }
}
