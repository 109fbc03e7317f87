//! One-vs-one RBF support vector machines trained with SMO using
//! second-order working-set selection.

use alloc::collections::VecDeque;
use alloc::vec::Vec;

#[derive(Debug, Clone, PartialEq)]
pub struct BinaryMachine {
    pub positive: usize,
    pub negative: usize,
    pub support: Vec<Vec<f64>>,
    /// `alpha_i * y_i` for each support vector.
    pub coef: Vec<f64>,
    pub rho: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Svm {
    pub n_classes: usize,
    pub gamma: f64,
    pub machines: Vec<BinaryMachine>,
}

fn rbf(gamma: f64, a: &[f64], b: &[f64]) -> f64 {
    libm::exp(-gamma * a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum::<f64>())
}

impl BinaryMachine {
    pub fn decision(&self, gamma: f64, x: &[f64]) -> f64 {
        self.support.iter().zip(&self.coef).map(|(s, c)| c * rbf(gamma, s, x)).sum::<f64>() - self.rho
    }
}

impl Svm {
    /// Pairwise votes; ties go to the class with the largest summed signed
    /// decision value, then the lowest index.
    pub fn predict(&self, x: &[f64]) -> usize {
        let mut votes = alloc::vec![0usize; self.n_classes];
        let mut margin = alloc::vec![0.0; self.n_classes];
        for m in &self.machines {
            let d = m.decision(self.gamma, x);
            if d > 0.0 {
                votes[m.positive] += 1;
            } else {
                votes[m.negative] += 1;
            }
            margin[m.positive] += d;
            margin[m.negative] -= d;
        }
        let mut best = 0;
        for c in 1..self.n_classes {
            if votes[c] > votes[best] || (votes[c] == votes[best] && margin[c] > margin[best]) {
                best = c;
            }
        }
        best
    }
}

/// Kernel rows computed on demand and kept under a fixed memory budget.
struct KernelCache<'a> {
    x: &'a [&'a [f64]],
    gamma: f64,
    rows: Vec<Option<Vec<f64>>>,
    order: VecDeque<usize>,
    capacity: usize,
}

const CACHE_BUDGET_ENTRIES: usize = 16 << 20;

impl<'a> KernelCache<'a> {
    fn new(x: &'a [&'a [f64]], gamma: f64) -> Self {
        let n = x.len().max(1);
        Self { x, gamma, rows: alloc::vec![None; x.len()], order: VecDeque::new(), capacity: (CACHE_BUDGET_ENTRIES / n).max(2) }
    }

    fn row(&mut self, i: usize) -> &[f64] {
        if self.rows[i].is_none() {
            if self.order.len() >= self.capacity {
                let old = self.order.pop_front().expect("cache is non-empty");
                self.rows[old] = None;
            }
            let xi = self.x[i];
            self.rows[i] = Some(self.x.iter().map(|xj| rbf(self.gamma, xi, xj)).collect());
            self.order.push_back(i);
        }
        self.rows[i].as_deref().expect("row just filled")
    }
}

const TAU: f64 = 1e-12;

/// Solves the C-SVC dual for labels `y` in {+1, -1}. Returns `(alpha, rho)`.
fn smo(x: &[&[f64]], y: &[f64], c: f64, gamma: f64, tol: f64) -> (Vec<f64>, f64) {
    let n = x.len();
    let mut alpha = alloc::vec![0.0; n];
    let mut grad = alloc::vec![-1.0; n];
    let mut cache = KernelCache::new(x, gamma);
    let max_iter = (100 * n).max(10_000_000);
    let up = |a: f64, yi: f64| (yi > 0.0 && a < c) || (yi < 0.0 && a > 0.0);
    let low = |a: f64, yi: f64| (yi > 0.0 && a > 0.0) || (yi < 0.0 && a < c);
    for _ in 0..max_iter {
        let mut g_max = f64::NEG_INFINITY;
        let mut i = usize::MAX;
        for t in 0..n {
            if up(alpha[t], y[t]) && -y[t] * grad[t] >= g_max {
                g_max = -y[t] * grad[t];
                i = t;
            }
        }
        if i == usize::MAX {
            break;
        }
        let ki: Vec<f64> = cache.row(i).to_vec();
        let mut g_min = f64::INFINITY;
        let mut j = usize::MAX;
        let mut best_obj = f64::INFINITY;
        for t in 0..n {
            if !low(alpha[t], y[t]) {
                continue;
            }
            let v = -y[t] * grad[t];
            g_min = g_min.min(v);
            let b = g_max - v;
            if b > 0.0 {
                let mut a = ki[i] + 1.0 - 2.0 * ki[t];
                if a <= 0.0 {
                    a = TAU;
                }
                let obj = -(b * b) / a;
                if obj <= best_obj {
                    best_obj = obj;
                    j = t;
                }
            }
        }
        if g_max - g_min < tol || j == usize::MAX {
            break;
        }
        let kj: Vec<f64> = cache.row(j).to_vec();
        let (old_i, old_j) = (alpha[i], alpha[j]);
        // Q_ij = y_i y_j K_ij and K_ii = 1 for the RBF kernel
        let qij = y[i] * y[j] * ki[j];
        if y[i] != y[j] {
            let mut quad = 2.0 + 2.0 * qij;
            if quad <= 0.0 {
                quad = TAU;
            }
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let mut quad = 2.0 - 2.0 * qij;
            if quad <= 0.0 {
                quad = TAU;
            }
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }
        let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
        for t in 0..n {
            grad[t] += y[t] * (y[i] * ki[t] * di + y[j] * kj[t] * dj);
        }
    }

    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut free_sum, mut n_free) = (0.0, 0usize);
    for t in 0..n {
        let yg = y[t] * grad[t];
        let at_upper = alpha[t] >= c;
        let at_lower = alpha[t] <= 0.0;
        if at_upper {
            if y[t] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if at_lower {
            if y[t] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            n_free += 1;
            free_sum += yg;
        }
    }
    let rho = if n_free > 0 { free_sum / n_free as f64 } else { (ub + lb) / 2.0 };
    (alpha, rho)
}

/// `gamma = 1 / (d * mean feature variance)` of `x`, falling back to `1/d`
/// for constant data.
pub fn default_gamma(x: &[Vec<f64>]) -> f64 {
    let d = x.first().map_or(1, |r| r.len()).max(1);
    let n = x.len().max(1) as f64;
    let mut total_var = 0.0;
    for f in 0..d {
        let m = x.iter().map(|r| r[f]).sum::<f64>() / n;
        total_var += x.iter().map(|r| (r[f] - m) * (r[f] - m)).sum::<f64>() / n;
    }
    let mean_var = total_var / d as f64;
    if mean_var > 0.0 {
        1.0 / (d as f64 * mean_var)
    } else {
        1.0 / d as f64
    }
}

/// Trains one machine per pair of classes present in `y`.
pub fn fit_svm(x: &[Vec<f64>], y: &[usize], n_classes: usize, c: f64, tol: f64) -> Svm {
    let gamma = default_gamma(x);
    let mut present = alloc::vec![false; n_classes];
    for &l in y {
        present[l] = true;
    }
    let mut machines = Vec::new();
    for a in 0..n_classes {
        for b in a + 1..n_classes {
            if !present[a] || !present[b] {
                continue;
            }
            let idx: Vec<usize> = (0..y.len()).filter(|&i| y[i] == a || y[i] == b).collect();
            let xs: Vec<&[f64]> = idx.iter().map(|&i| x[i].as_slice()).collect();
            let ys: Vec<f64> = idx.iter().map(|&i| if y[i] == a { 1.0 } else { -1.0 }).collect();
            let (alpha, rho) = smo(&xs, &ys, c, gamma, tol);
            let mut support = Vec::new();
            let mut coef = Vec::new();
            for (k, &al) in alpha.iter().enumerate() {
                if al > 0.0 {
                    support.push(xs[k].to_vec());
                    coef.push(al * ys[k]);
                }
            }
            machines.push(BinaryMachine { positive: a, negative: b, support, coef, rho });
        }
    }
    Svm { n_classes, gamma, machines }
}
