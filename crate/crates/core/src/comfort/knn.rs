use alloc::vec::Vec;

#[derive(Debug, Clone, PartialEq)]
pub struct Knn {
    pub k: usize,
    pub n_classes: usize,
    pub x: Vec<Vec<f64>>,
    pub y: Vec<usize>,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum()
}

impl Knn {
    /// Majority vote of the `k` nearest training points (earlier index on
    /// equal distance). Among tied classes, the one owning the closest
    /// neighbour wins.
    pub fn predict(&self, q: &[f64]) -> usize {
        let mut order: Vec<(f64, usize)> = self.x.iter().enumerate().map(|(i, p)| (sq_dist(p, q), i)).collect();
        let k = self.k.min(order.len()).max(1);
        order.select_nth_unstable_by(k - 1, |a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let nearest = &mut order[..k];
        nearest.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let mut votes = alloc::vec![0usize; self.n_classes];
        for &(_, i) in nearest.iter() {
            votes[self.y[i]] += 1;
        }
        let top = *votes.iter().max().expect("at least one class");
        nearest.iter().map(|&(_, i)| self.y[i]).find(|&c| votes[c] == top).expect("a voted class is among the neighbours")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn k1_returns_own_label() {
        let m = Knn { k: 1, n_classes: 3, x: alloc::vec![alloc::vec![0.0], alloc::vec![1.0], alloc::vec![2.0]], y: alloc::vec![2, 0, 1] };
        assert_eq!(m.predict(&[1.0]), 0);
        assert_eq!(m.predict(&[2.0]), 1);
    }

    #[test]
    fn tie_goes_to_nearest_neighbour_class() {
        let m = Knn {
            k: 4,
            n_classes: 2,
            x: alloc::vec![alloc::vec![0.0], alloc::vec![0.5], alloc::vec![-0.6], alloc::vec![0.7], alloc::vec![9.0]],
            y: alloc::vec![1, 0, 1, 0, 0],
        };
        assert_eq!(m.predict(&[0.0]), 1);
        assert_eq!(m.predict(&[0.45]), 0);
    }
}
