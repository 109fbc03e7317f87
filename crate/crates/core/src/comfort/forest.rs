//! Random forest of CART trees with Gini impurity.

use alloc::vec::Vec;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Node {
    Leaf { class: u16 },
    /// `x[feature] <= threshold` goes left.
    Split { feature: u16, threshold: f64, left: u32, right: u32 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    pub fn predict(&self, x: &[f64]) -> usize {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Leaf { class } => return class as usize,
                Node::Split { feature, threshold, left, right } => {
                    i = if x[feature as usize] <= threshold { left } else { right } as usize;
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Forest {
    pub n_classes: usize,
    pub trees: Vec<Tree>,
}

impl Forest {
    /// Majority vote over trees; lowest class index wins ties.
    pub fn predict(&self, x: &[f64]) -> usize {
        let mut votes = alloc::vec![0usize; self.n_classes];
        for t in &self.trees {
            votes[t.predict(x)] += 1;
        }
        argmax_lowest(&votes)
    }
}

pub(crate) fn argmax_lowest(counts: &[usize]) -> usize {
    let mut best = 0;
    for (i, &c) in counts.iter().enumerate() {
        if c > counts[best] {
            best = i;
        }
    }
    best
}

/// Smallest `m` with `m * m >= d`.
fn ceil_sqrt(d: usize) -> usize {
    let mut m = 0;
    while m * m < d {
        m += 1;
    }
    m.max(1)
}

fn gini(counts: &[usize], n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let n = n as f64;
    1.0 - counts.iter().map(|&c| (c as f64 / n) * (c as f64 / n)).sum::<f64>()
}

struct SplitCandidate {
    feature: usize,
    threshold: f64,
    score: f64,
}

fn best_split_on(x: &[Vec<f64>], y: &[usize], idx: &mut [usize], feature: usize, n_classes: usize, min_leaf: usize) -> Option<SplitCandidate> {
    idx.sort_by(|&a, &b| x[a][feature].total_cmp(&x[b][feature]).then(a.cmp(&b)));
    let n = idx.len();
    let mut total = alloc::vec![0usize; n_classes];
    for &i in idx.iter() {
        total[y[i]] += 1;
    }
    let mut left = alloc::vec![0usize; n_classes];
    let mut right = total;
    let mut best: Option<SplitCandidate> = None;
    for k in 0..n - 1 {
        left[y[idx[k]]] += 1;
        right[y[idx[k]]] -= 1;
        let (nl, nr) = (k + 1, n - k - 1);
        let (a, b) = (x[idx[k]][feature], x[idx[k + 1]][feature]);
        if nl < min_leaf || nr < min_leaf || a == b {
            continue;
        }
        let score = (nl as f64 * gini(&left, nl) + nr as f64 * gini(&right, nr)) / n as f64;
        if best.as_ref().is_none_or(|s| score < s.score) {
            let mid = a + (b - a) / 2.0;
            let threshold = if mid < b { mid } else { a };
            best = Some(SplitCandidate { feature, threshold, score });
        }
    }
    best
}

fn grow_tree(x: &[Vec<f64>], y: &[usize], sample: Vec<usize>, n_classes: usize, min_leaf: usize, rng: &mut ChaCha8Rng) -> Tree {
    let d = x.first().map_or(0, |r| r.len());
    let per_split = ceil_sqrt(d).min(d);
    let mut nodes = alloc::vec![Node::Leaf { class: 0 }];
    let mut stack = alloc::vec![(sample, 0usize)];
    let mut features: Vec<usize> = (0..d).collect();
    while let Some((mut idx, slot)) = stack.pop() {
        let mut counts = alloc::vec![0usize; n_classes];
        for &i in &idx {
            counts[y[i]] += 1;
        }
        let majority = argmax_lowest(&counts);
        let pure = counts[majority] == idx.len();
        let mut best: Option<SplitCandidate> = None;
        if !pure && idx.len() >= 2 * min_leaf {
            // partial Fisher-Yates: candidates are tried in shuffled order
            for k in 0..d {
                let j = rng.random_range(k..d);
                features.swap(k, j);
            }
            for (k, &f) in features.iter().enumerate() {
                if k >= per_split && best.is_some() {
                    break;
                }
                if let Some(c) = best_split_on(x, y, &mut idx, f, n_classes, min_leaf) {
                    if best.as_ref().is_none_or(|b| c.score < b.score) {
                        best = Some(c);
                    }
                }
            }
        }
        match best {
            None => nodes[slot] = Node::Leaf { class: majority as u16 },
            Some(s) => {
                let (l, r): (Vec<usize>, Vec<usize>) = idx.iter().partition(|&&i| x[i][s.feature] <= s.threshold);
                let at = nodes.len();
                nodes.push(Node::Leaf { class: 0 });
                nodes.push(Node::Leaf { class: 0 });
                nodes[slot] = Node::Split { feature: s.feature as u16, threshold: s.threshold, left: at as u32, right: at as u32 + 1 };
                stack.push((r, at + 1));
                stack.push((l, at));
            }
        }
    }
    Tree { nodes }
}

/// Bootstrap-aggregated CART trees. `y` holds class indices below
/// `n_classes`.
pub fn fit_forest(x: &[Vec<f64>], y: &[usize], n_classes: usize, n_trees: usize, min_leaf: usize, rng: &mut ChaCha8Rng) -> Forest {
    let n = x.len();
    let min_leaf = min_leaf.max(1);
    let trees = (0..n_trees)
        .map(|_| {
            let sample: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
            grow_tree(x, y, sample, n_classes, min_leaf, rng)
        })
        .collect();
    Forest { n_classes, trees }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn separable_clusters() {
        let x: Vec<Vec<f64>> = (0..100).map(|i| alloc::vec![if i < 50 { -1.0 } else { 1.0 } + (i % 5) as f64 * 0.01]).collect();
        let y: Vec<usize> = (0..100).map(|i| usize::from(i >= 50)).collect();
        let f = fit_forest(&x, &y, 2, 20, 2, &mut ChaCha8Rng::seed_from_u64(1));
        for (xi, &yi) in x.iter().zip(&y) {
            assert_eq!(f.predict(xi), yi);
        }
        assert_eq!(f.predict(&[-1.0]), 0);
    }

    #[test]
    fn constant_features_give_majority_leaf() {
        let x = alloc::vec![alloc::vec![0.0]; 5];
        let y = alloc::vec![1, 1, 0, 1, 0];
        let t = grow_tree(&x, &y, (0..5).collect(), 2, 2, &mut ChaCha8Rng::seed_from_u64(0));
        assert_eq!(t.nodes, alloc::vec![Node::Leaf { class: 1 }]);
    }

    #[test]
    fn helpers() {
        assert_eq!(ceil_sqrt(4), 2);
        assert_eq!(ceil_sqrt(5), 3);
        assert_eq!(ceil_sqrt(1), 1);
        assert_eq!(argmax_lowest(&[2, 3, 3]), 1);
        assert!((gini(&[5, 5], 10) - 0.5).abs() < 1e-12);
    }
}
