//! Small dense linear algebra and order statistics.
//!
//! Everything here works on plain slices so the crate stays free of a
//! matrix dependency. Matrices are row-major.

use alloc::vec;
use alloc::vec::Vec;

/// A point in continuous pixel coordinates: pixel `(i, j)` covers
/// `[i, i+1) x [j, j+1)` and its center is `(i + 0.5, j + 0.5)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(self, other: Point2) -> f64 {
        libm::hypot(self.x - other.x, self.y - other.y)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

pub type Mat3 = [[f64; 3]; 3];

pub fn mat3_mul(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut out = [[0.0; 3]; 3];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            *cell = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

pub fn mat3_det(m: &Mat3) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

pub fn mat3_inverse(m: &Mat3) -> Option<Mat3> {
    let det = mat3_det(m);
    if !det.is_finite() || det == 0.0 {
        return None;
    }
    let inv_det = 1.0 / det;
    let c = |r0: usize, c0: usize, r1: usize, c1: usize| m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0];
    Some([
        [c(1, 1, 2, 2) * inv_det, -c(0, 1, 2, 2) * inv_det, c(0, 1, 1, 2) * inv_det],
        [-c(1, 0, 2, 2) * inv_det, c(0, 0, 2, 2) * inv_det, -c(0, 0, 1, 2) * inv_det],
        [c(1, 0, 2, 1) * inv_det, -c(0, 0, 2, 1) * inv_det, c(0, 0, 1, 1) * inv_det],
    ])
}

/// Singular values and right singular vectors of a `rows x cols` matrix.
#[derive(Debug, Clone)]
pub struct Svd {
    /// Descending.
    pub singular_values: Vec<f64>,
    /// Column `k` of `v` (stored row-major, `cols x cols`) pairs with
    /// `singular_values[k]`.
    pub v: Vec<f64>,
    pub cols: usize,
}

impl Svd {
    pub fn right_vector(&self, k: usize) -> Vec<f64> {
        (0..self.cols).map(|r| self.v[r * self.cols + k]).collect()
    }
}

/// One-sided (Hestenes) Jacobi SVD. Works for any shape; only the right
/// singular vectors are accumulated.
pub fn jacobi_svd(a: &[f64], rows: usize, cols: usize) -> Svd {
    debug_assert_eq!(a.len(), rows * cols);
    let mut u = a.to_vec();
    let mut v = vec![0.0; cols * cols];
    for i in 0..cols {
        v[i * cols + i] = 1.0;
    }

    for _sweep in 0..80 {
        let mut rotated = false;
        for p in 0..cols {
            for q in (p + 1)..cols {
                let (mut alpha, mut beta, mut gamma) = (0.0, 0.0, 0.0);
                for r in 0..rows {
                    let up = u[r * cols + p];
                    let uq = u[r * cols + q];
                    alpha += up * up;
                    beta += uq * uq;
                    gamma += up * uq;
                }
                if gamma == 0.0 || gamma.abs() <= 1e-15 * libm::sqrt(alpha * beta) {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + libm::sqrt(1.0 + zeta * zeta));
                let t = if zeta == 0.0 { 1.0 } else { t };
                let c = 1.0 / libm::sqrt(1.0 + t * t);
                let s = c * t;
                for r in 0..rows {
                    let up = u[r * cols + p];
                    let uq = u[r * cols + q];
                    u[r * cols + p] = c * up - s * uq;
                    u[r * cols + q] = s * up + c * uq;
                }
                for r in 0..cols {
                    let vp = v[r * cols + p];
                    let vq = v[r * cols + q];
                    v[r * cols + p] = c * vp - s * vq;
                    v[r * cols + q] = s * vp + c * vq;
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let norms: Vec<f64> = (0..cols)
        .map(|k| libm::sqrt((0..rows).map(|r| u[r * cols + k] * u[r * cols + k]).sum()))
        .collect();
    let mut order: Vec<usize> = (0..cols).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]));

    let mut sorted_v = vec![0.0; cols * cols];
    for (new_k, &old_k) in order.iter().enumerate() {
        for r in 0..cols {
            sorted_v[r * cols + new_k] = v[r * cols + old_k];
        }
    }
    Svd {
        singular_values: order.iter().map(|&k| norms[k]).collect(),
        v: sorted_v,
        cols,
    }
}

/// Solves `a x = b` for symmetric positive definite `a` (`n x n`) by
/// Cholesky factorization. Returns `None` when `a` is not numerically
/// positive definite.
pub fn solve_spd(a: &[f64], b: &[f64], n: usize) -> Option<Vec<f64>> {
    let mut l = vec![0.0; n * n];
    let scale = (0..n).map(|i| a[i * n + i].abs()).fold(0.0, f64::max);
    for i in 0..n {
        for j in 0..=i {
            let mut sum = a[i * n + j];
            for k in 0..j {
                sum -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if sum <= 1e-13 * scale.max(f64::MIN_POSITIVE) {
                    return None;
                }
                l[i * n + i] = libm::sqrt(sum);
            } else {
                l[i * n + j] = sum / l[j * n + j];
            }
        }
    }
    let mut y = vec![0.0; n];
    for i in 0..n {
        let s: f64 = (0..i).map(|k| l[i * n + k] * y[k]).sum();
        y[i] = (b[i] - s) / l[i * n + i];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = ((i + 1)..n).map(|k| l[k * n + i] * x[k]).sum();
        x[i] = (y[i] - s) / l[i * n + i];
    }
    Some(x)
}

/// Median of a non-empty slice (mean of the two middle values for even
/// lengths).
pub fn median(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

pub fn rms(values: impl IntoIterator<Item = f64>) -> f64 {
    let (sum, n) = values.into_iter().fold((0.0, 0usize), |(s, n), v| (s + v * v, n + 1));
    if n == 0 {
        0.0
    } else {
        libm::sqrt(sum / n as f64)
    }
}

/// Nearest-rank percentile, `p` in `(0, 100]`.
pub fn percentile_nearest_rank(values: &[f64], p: f64) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let rank = libm::ceil(p / 100.0 * sorted.len() as f64) as usize;
    sorted[rank.clamp(1, sorted.len()) - 1]
}

/// Index of the entry in a sorted timestamp list closest to `t`; earlier
/// entry wins ties.
pub fn nearest_index(sorted: &[u64], t: u64) -> Option<usize> {
    if sorted.is_empty() {
        return None;
    }
    let pos = sorted.partition_point(|&s| s < t);
    if pos == 0 {
        return Some(0);
    }
    if pos == sorted.len() {
        return Some(pos - 1);
    }
    let before = t - sorted[pos - 1];
    let after = sorted[pos] - t;
    Some(if after < before { pos } else { pos - 1 })
}
