//! CART trees (Gini, axis-aligned splits) and bagged random forests.

use std::cmp::Ordering;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::Features;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DtcParams {
    /// `None` grows until every leaf is pure or unsplittable.
    pub max_depth: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RfParams {
    pub trees: usize,
    /// Features examined per split before settling for the best found.
    pub max_features: usize,
}

impl Default for RfParams {
    fn default() -> Self {
        RfParams { trees: 100, max_features: 100 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum TreeNode {
    Leaf { counts: [u32; 2] },
    /// Samples with `x[feature] <= threshold` go left.
    Split { feature: usize, threshold: f64, left: usize, right: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<TreeNode>,
}

impl Tree {
    fn leaf(&self, x: &[f64]) -> [u32; 2] {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                TreeNode::Leaf { counts } => return *counts,
                TreeNode::Split { feature, threshold, left, right } => {
                    at = if x[*feature] <= *threshold { *left } else { *right };
                }
            }
        }
    }

    /// Class-1 fraction of the training samples in the reached leaf.
    pub fn probability(&self, x: &[f64]) -> f64 {
        let [c0, c1] = self.leaf(x);
        c1 as f64 / (c0 + c1) as f64
    }

    pub fn predict(&self, x: &[f64]) -> u8 {
        let [c0, c1] = self.leaf(x);
        u8::from(c1 > c0)
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[TreeNode], at: usize) -> usize {
            match &nodes[at] {
                TreeNode::Leaf { .. } => 0,
                TreeNode::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, 0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub trees: Vec<Tree>,
}

impl ForestModel {
    /// Fraction of trees voting for class 1.
    pub fn vote_fraction(&self, x: &[f64]) -> f64 {
        let ones = self.trees.iter().filter(|t| t.predict(x) == 1).count();
        ones as f64 / self.trees.len() as f64
    }
}

/// Per-feature argsort of the training rows (stable, so equal values keep
/// index order).
pub(crate) fn presort(x: &Features) -> Vec<Vec<u32>> {
    (0..x.d())
        .map(|f| {
            let mut idx: Vec<u32> = (0..x.n() as u32).collect();
            idx.sort_by(|&a, &b| x.get(a as usize, f).total_cmp(&x.get(b as usize, f)));
            idx
        })
        .collect()
}

/// Midpoint between two distinct consecutive values, never equal to the
/// upper one.
pub(crate) fn midpoint(lo: f64, hi: f64) -> f64 {
    let m = lo + (hi - lo) / 2.0;
    if m >= hi {
        lo
    } else {
        m
    }
}

/// Split quality `s0²/n_l + s1²/n_l + ...`, kept as an exact fraction.
/// Larger is better (lower weighted Gini impurity).
#[derive(Clone, Copy)]
struct Purity {
    num: u128,
    den: u128,
}

impl Purity {
    fn new(left: [u64; 2], right: [u64; 2]) -> Self {
        let nl = (left[0] + left[1]) as u128;
        let nr = (right[0] + right[1]) as u128;
        let sl = (left[0] as u128).pow(2) + (left[1] as u128).pow(2);
        let sr = (right[0] as u128).pow(2) + (right[1] as u128).pow(2);
        Purity { num: sl * nr + sr * nl, den: nl * nr }
    }

    fn cmp(&self, other: &Purity) -> Ordering {
        (self.num * other.den).cmp(&(other.num * self.den))
    }
}

struct Builder<'a> {
    x: &'a Features,
    y: &'a [u8],
    sorted: &'a [Vec<u32>],
    max_features: Option<usize>,
    max_depth: Option<usize>,
    nodes: Vec<TreeNode>,
}

impl Builder<'_> {
    fn counts(&self, mult: &[u32]) -> [u32; 2] {
        let mut c = [0u32; 2];
        for (i, &m) in mult.iter().enumerate() {
            c[self.y[i] as usize] += m;
        }
        c
    }

    fn best_split(&self, mult: &[u32], rng: &mut ChaCha8Rng) -> Option<(usize, f64)> {
        let total = self.counts(mult).map(u64::from);
        let mut order: Vec<usize> = (0..self.x.d()).collect();
        order.shuffle(rng);
        let mut best: Option<(Purity, usize, f64)> = None;
        for (examined, &f) in order.iter().enumerate() {
            if let Some(limit) = self.max_features {
                if examined >= limit && best.is_some() {
                    break;
                }
            }
            let mut left = [0u64; 2];
            let mut prev: Option<f64> = None;
            for &i in &self.sorted[f] {
                let i = i as usize;
                if mult[i] == 0 {
                    continue;
                }
                let v = self.x.get(i, f);
                if let Some(p) = prev {
                    if v > p {
                        let right = [total[0] - left[0], total[1] - left[1]];
                        let q = Purity::new(left, right);
                        if best.as_ref().is_none_or(|(b, _, _)| q.cmp(b) == Ordering::Greater) {
                            best = Some((q, f, midpoint(p, v)));
                        }
                    }
                }
                left[self.y[i] as usize] += mult[i] as u64;
                prev = Some(v);
            }
        }
        best.map(|(_, f, t)| (f, t))
    }

    fn grow(&mut self, mult: Vec<u32>, depth: usize, rng: &mut ChaCha8Rng) -> usize {
        let counts = self.counts(&mult);
        let id = self.nodes.len();
        self.nodes.push(TreeNode::Leaf { counts });
        let pure = counts[0] == 0 || counts[1] == 0;
        if pure || self.max_depth.is_some_and(|m| depth >= m) {
            return id;
        }
        let Some((feature, threshold)) = self.best_split(&mult, rng) else {
            return id;
        };
        let mut lm = vec![0u32; mult.len()];
        let mut rm = vec![0u32; mult.len()];
        for (i, &m) in mult.iter().enumerate() {
            if m > 0 {
                if self.x.get(i, feature) <= threshold {
                    lm[i] = m;
                } else {
                    rm[i] = m;
                }
            }
        }
        let left = self.grow(lm, depth + 1, rng);
        let right = self.grow(rm, depth + 1, rng);
        self.nodes[id] = TreeNode::Split { feature, threshold, left, right };
        id
    }
}

fn build(
    x: &Features,
    y: &[u8],
    sorted: &[Vec<u32>],
    mult: Vec<u32>,
    max_features: Option<usize>,
    max_depth: Option<usize>,
    rng: &mut ChaCha8Rng,
) -> Tree {
    let mut b = Builder { x, y, sorted, max_features, max_depth, nodes: Vec::new() };
    b.grow(mult, 0, rng);
    Tree { nodes: b.nodes }
}

pub(crate) fn fit_tree(x: &Features, y: &[u8], p: &DtcParams, seed: u64) -> Tree {
    let sorted = presort(x);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    build(x, y, &sorted, vec![1; x.n()], None, p.max_depth, &mut rng)
}

pub(crate) fn fit_forest(x: &Features, y: &[u8], p: &RfParams, seed: u64) -> ForestModel {
    let sorted = presort(x);
    let n = x.n();
    let trees = (0..p.trees)
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(t as u64);
            let mut mult = vec![0u32; n];
            for _ in 0..n {
                mult[rng.gen_range(0..n)] += 1;
            }
            build(x, y, &sorted, mult, Some(p.max_features), None, &mut rng)
        })
        .collect();
    ForestModel { trees }
}
