use alloc::vec::Vec;

use super::orb::Descriptor;

/// Nearest and second-nearest neighbour by Hamming distance; lowest index
/// wins ties.
fn two_nearest(query: &Descriptor, pool: &[Descriptor]) -> Option<(usize, u32, u32)> {
    let mut best: Option<(usize, u32)> = None;
    let mut second = u32::MAX;
    for (j, d) in pool.iter().enumerate() {
        let dist = query.hamming(d);
        match best {
            None => best = Some((j, dist)),
            Some((_, bd)) if dist < bd => {
                second = bd;
                best = Some((j, dist));
            }
            Some(_) => second = second.min(dist),
        }
    }
    best.map(|(j, d)| (j, d, second))
}

/// Ratio-test plus cross-check matching. A pair `(i, j)` is kept when
/// `d1 < ratio * d2` for `a[i]` (with `d2 = ∞` if `b` has a single
/// entry) and `a[i]` is also the nearest neighbour of `b[j]` in `a`.
pub fn match_descriptors(a: &[Descriptor], b: &[Descriptor], ratio: f64) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    if b.is_empty() {
        return out;
    }
    let back: Vec<Option<usize>> = b.iter().map(|d| two_nearest(d, a).map(|(i, _, _)| i)).collect();
    for (i, d) in a.iter().enumerate() {
        let Some((j, d1, d2)) = two_nearest(d, b) else { continue };
        let passes_ratio = d2 == u32::MAX || (d1 as f64) < ratio * d2 as f64;
        if passes_ratio && back[j] == Some(i) {
            out.push((i, j));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn desc(seed: u64) -> Descriptor {
        let mut s = seed;
        let mut next = || {
            s ^= s << 13;
            s ^= s >> 7;
            s ^= s << 17;
            s
        };
        Descriptor([next(), next(), next(), next()])
    }

    #[test]
    fn identical_sets_match_at_distance_zero() {
        let a: Vec<Descriptor> = (1..20).map(desc).collect();
        let m = match_descriptors(&a, &a, 0.8);
        assert_eq!(m.len(), a.len());
        for (i, j) in m {
            assert_eq!(i, j);
            assert_eq!(a[i].hamming(&a[j]), 0);
        }
    }

    #[test]
    fn empty_pool() {
        assert!(match_descriptors(&[desc(1)], &[], 0.8).is_empty());
        assert!(match_descriptors(&[], &[desc(1)], 0.8).is_empty());
    }

    #[test]
    fn hand_computed_hamming_case() {
        let mut one = Descriptor::ZERO;
        one.set(0);
        let a = [Descriptor::ZERO, Descriptor::ONES];
        assert_eq!(a[0].hamming(&one), 1);
        assert_eq!(a[1].hamming(&one), 255);
        assert_eq!(match_descriptors(&a, &[one], 0.8), alloc::vec![(0, 0)]);
    }

    #[test]
    fn ratio_test_rejects_ambiguous() {
        let base = desc(7);
        let mut near1 = base;
        near1.0[0] ^= 0b1;
        let mut near2 = base;
        near2.0[0] ^= 0b10;
        // d1 = d2 = 1 → 1 < 0.8 fails
        assert!(match_descriptors(&[base], &[near1, near2], 0.8).is_empty());
    }
}
