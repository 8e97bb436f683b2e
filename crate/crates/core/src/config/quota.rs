//! Largest-remainder apportionment: turns probabilities into exact counts.

/// Splits `total` items across `weights` so each count is within one of
/// `total * w / sum(w)` and the counts add up to `total`. Ties in the fractional
/// remainders go to the earlier weight.
pub fn largest_remainder(weights: &[f64], total: usize) -> Vec<usize> {
    let sum: f64 = weights.iter().sum();
    if weights.is_empty() || sum <= 0.0 {
        return vec![0; weights.len()];
    }
    let exact: Vec<f64> = weights.iter().map(|w| w / sum * total as f64).collect();
    let mut counts: Vec<usize> = exact.iter().map(|e| e.floor() as usize).collect();
    let assigned: usize = counts.iter().sum();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = exact[a] - exact[a].floor();
        let rb = exact[b] - exact[b].floor();
        rb.partial_cmp(&ra).unwrap_or(std::cmp::Ordering::Equal).then(a.cmp(&b))
    });
    for &i in order.iter().take(total.saturating_sub(assigned)) {
        counts[i] += 1;
    }
    counts
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn seventy_thirty_split_and_ties() {
        assert_eq!(largest_remainder(&[0.7, 0.1, 0.1, 0.1], 1000), vec![700, 100, 100, 100]);
        assert_eq!(largest_remainder(&[1.0, 1.0, 1.0], 10), vec![4, 3, 3]);
        assert_eq!(largest_remainder(&[], 10), Vec::<usize>::new());
        assert_eq!(largest_remainder(&[0.0, 0.0], 3), vec![0, 0]);
    }

    proptest! {
        #[test]
        fn counts_sum_and_stay_within_one(weights in proptest::collection::vec(0.01f64..10.0, 1..8), total in 0usize..5000) {
            let counts = largest_remainder(&weights, total);
            prop_assert_eq!(counts.iter().sum::<usize>(), total);
            let sum: f64 = weights.iter().sum();
            for (c, w) in counts.iter().zip(&weights) {
                prop_assert!((*c as f64 - w / sum * total as f64).abs() < 1.0 + 1e-9);
            }
        }
    }
}
