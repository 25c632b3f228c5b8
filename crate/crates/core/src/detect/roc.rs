use crate::{Error, Result};

/// Area under the ROC curve by the rank statistic: the probability that a
/// positive score outranks a negative one, ties counted one half. Equivalent
/// to trapezoidal integration of the ROC curve.
pub fn roc_auc(scores_pos: &[f64], scores_neg: &[f64]) -> Result<f64> {
    if scores_pos.is_empty() || scores_neg.is_empty() {
        return Err(Error::EmptyInput("roc score set"));
    }
    // rank-sum over the merged sample
    let mut merged: Vec<(f64, bool)> = scores_pos
        .iter()
        .map(|&s| (s, true))
        .chain(scores_neg.iter().map(|&s| (s, false)))
        .collect();
    merged.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut rank_sum_pos = 0.0f64;
    let mut index = 0usize;
    while index < merged.len() {
        let mut end = index;
        while end < merged.len() && merged[end].0 == merged[index].0 {
            end += 1;
        }
        // average rank for the tie group, 1-based
        let avg_rank = (index + 1 + end) as f64 / 2.0;
        for item in &merged[index..end] {
            if item.1 {
                rank_sum_pos += avg_rank;
            }
        }
        index = end;
    }
    let np = scores_pos.len() as f64;
    let nn = scores_neg.len() as f64;
    let u = rank_sum_pos - np * (np + 1.0) / 2.0;
    Ok(u / (np * nn))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha12Rng;

    fn brute_force_auc(pos: &[f64], neg: &[f64]) -> f64 {
        let mut score = 0.0;
        for &p in pos {
            for &n in neg {
                score += if p > n {
                    1.0
                } else if p == n {
                    0.5
                } else {
                    0.0
                };
            }
        }
        score / (pos.len() * neg.len()) as f64
    }

    #[test]
    fn perfectly_separated_is_one() {
        let pos = [5.0, 6.0, 7.0];
        let neg = [1.0, 2.0, 3.0];
        assert_eq!(roc_auc(&pos, &neg).unwrap(), 1.0);
        assert_eq!(roc_auc(&neg, &pos).unwrap(), 0.0);
    }

    #[test]
    fn identical_scores_are_half() {
        let pos = [1.0, 1.0, 1.0];
        let neg = [1.0, 1.0];
        assert_eq!(roc_auc(&pos, &neg).unwrap(), 0.5);
    }

    #[test]
    fn matches_pairwise_oracle_on_shifted_set() {
        let mut rng = ChaCha12Rng::seed_from_u64(99);
        let neg: Vec<f64> = (0..200).map(|_| rng.random::<f64>()).collect();
        let pos: Vec<f64> = neg.iter().map(|v| v + 0.3).collect();
        let fast = roc_auc(&pos, &neg).unwrap();
        let slow = brute_force_auc(&pos, &neg);
        assert!((fast - slow).abs() < 1e-12, "{fast} vs {slow}");
    }

    #[test]
    fn matches_pairwise_oracle_with_ties() {
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        let pos: Vec<f64> = (0..150).map(|_| (rng.random_range(0..20)) as f64).collect();
        let neg: Vec<f64> = (0..130).map(|_| (rng.random_range(0..20)) as f64).collect();
        let fast = roc_auc(&pos, &neg).unwrap();
        let slow = brute_force_auc(&pos, &neg);
        assert!((fast - slow).abs() < 1e-12, "{fast} vs {slow}");
    }

    #[test]
    fn empty_input_rejected() {
        assert!(roc_auc(&[], &[1.0]).is_err());
        assert!(roc_auc(&[1.0], &[]).is_err());
    }
}
