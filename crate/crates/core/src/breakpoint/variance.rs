use super::sweep::SortedColumn;
use super::{check_inputs, is_constant, SplitCandidate};
use crate::error::Result;

/// Sorts once by x and sweeps every distinct-value boundary with at least
/// `m` rows per side, returning the threshold of greatest weighted
/// variance reduction. `None` when no split reduces variance.
pub fn best_split_variance(x: &[f64], y: &[f64], m: usize) -> Result<Option<SplitCandidate>> {
    check_inputs(x, y)?;
    if y.len() < 2 * m.max(1) || is_constant(y) {
        return Ok(None);
    }
    let col = SortedColumn::new(x, y)?;
    let moments = col.moments();
    Ok(col
        .argmax(m, |k| moments.reduction(k))
        .filter(|&(_, r)| r > 0.0)
        .map(|(k, r)| SplitCandidate {
            feature_index: 0,
            threshold: col.threshold(k),
            score: r,
            reduction: r,
            left_count: k,
            right_count: col.len() - k,
        }))
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;

    // Direct definition: parent population variance minus the size-weighted
    // child variances, each computed from scratch.
    fn naive_reduction(x: &[f64], y: &[f64], c: f64) -> f64 {
        let var = |v: &[f64]| {
            let n = v.len() as f64;
            let mean = v.iter().sum::<f64>() / n;
            v.iter().map(|a| (a - mean) * (a - mean)).sum::<f64>() / n
        };
        let l: Vec<f64> = x.iter().zip(y).filter(|(a, _)| **a <= c).map(|(_, b)| *b).collect();
        let r: Vec<f64> = x.iter().zip(y).filter(|(a, _)| **a > c).map(|(_, b)| *b).collect();
        let n = y.len() as f64;
        var(y) - (l.len() as f64 / n * var(&l) + r.len() as f64 / n * var(&r))
    }

    fn brute_force(x: &[f64], y: &[f64], m: usize) -> Option<(f64, f64)> {
        let mut xs = x.to_vec();
        xs.sort_by(f64::total_cmp);
        xs.dedup();
        let mut best: Option<(f64, f64)> = None;
        for w in xs.windows(2) {
            let c = 0.5 * (w[0] + w[1]);
            let left = x.iter().filter(|&&v| v <= c).count();
            if left < m || x.len() - left < m {
                continue;
            }
            let r = naive_reduction(x, y, c);
            if best.is_none_or(|(_, b)| r > b) {
                best = Some((c, r));
            }
        }
        best
    }

    #[test]
    fn step_example() {
        let c = best_split_variance(&[1.0, 2.0, 3.0, 4.0], &[0.0, 0.0, 10.0, 10.0], 1)
            .unwrap()
            .unwrap();
        assert_eq!(c.threshold, 2.5);
        assert!((c.reduction - 25.0).abs() < 1e-12);
        assert_eq!((c.left_count, c.right_count), (2, 2));
    }

    #[test]
    fn constant_target_gives_none() {
        assert!(best_split_variance(&[1.0, 2.0, 3.0, 4.0], &[0.3; 4], 1).unwrap().is_none());
    }

    #[test]
    fn too_few_rows_gives_none() {
        assert!(best_split_variance(&[1.0, 2.0, 3.0], &[0.0, 1.0, 2.0], 2).unwrap().is_none());
    }

    #[test]
    fn matches_naive_rescan_on_10k_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let x: Vec<f64> = (0..10_000).map(|_| rng.random_range(0.0..100.0)).collect();
        let y: Vec<f64> = x.iter().map(|v| (v / 10.0).sin() + rng.random_range(-0.5..0.5)).collect();
        let got = best_split_variance(&x, &y, 100).unwrap().unwrap();
        let naive = naive_reduction(&x, &y, got.threshold);
        assert!((got.reduction - naive).abs() <= 1e-9 * naive);
        // The naive argmax over every midpoint agrees with the sweep.
        let mut xs = x.clone();
        xs.sort_by(f64::total_cmp);
        let mut best = (0.0, f64::NEG_INFINITY);
        for k in (100..=9_900).step_by(7).chain([got.left_count]) {
            let c = 0.5 * (xs[k - 1] + xs[k]);
            let r = naive_reduction(&x, &y, c);
            if r > best.1 {
                best = (c, r);
            }
        }
        assert!(got.reduction >= best.1 * (1.0 - 1e-9));
    }

    #[test]
    fn one_hot_threshold_is_half() {
        let x = [0.0, 1.0, 0.0, 1.0, 1.0, 0.0];
        let y = [1.0, 5.0, 1.2, 5.1, 4.9, 0.8];
        assert_eq!(best_split_variance(&x, &y, 2).unwrap().unwrap().threshold, 0.5);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn sweep_is_the_exhaustive_argmax(
            pts in prop::collection::vec((0u8..40, -100.0f64..100.0), 4..120),
            m in 1usize..5,
        ) {
            let x: Vec<f64> = pts.iter().map(|p| f64::from(p.0)).collect();
            let y: Vec<f64> = pts.iter().map(|p| p.1).collect();
            let got = best_split_variance(&x, &y, m).unwrap();
            match (got, brute_force(&x, &y, m)) {
                (Some(c), Some((_, r))) => {
                    prop_assert!((c.reduction - r).abs() <= 1e-9 * r.abs().max(1e-12));
                    prop_assert!(c.left_count >= m && c.right_count >= m);
                    let min = x.iter().copied().fold(f64::INFINITY, f64::min);
                    let max = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                    prop_assert!(c.threshold > min && c.threshold < max);
                }
                (None, Some((_, r))) => prop_assert!(r <= 1e-9),
                (Some(_), None) => prop_assert!(false, "sweep found a split brute force did not"),
                (None, None) => {}
            }
        }
    }
}
