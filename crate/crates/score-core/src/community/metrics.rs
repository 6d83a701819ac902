//! Clustering error minimized over label permutations.

use super::ClusterError;
use ndarray::Array2;

/// Mismatch count and rate between two labelings, minimized over all ways of
/// renaming the clusters.
///
/// Up to 10 clusters the permutations are enumerated outright; beyond that an
/// optimal assignment on the confusion matrix gives the same minimum.
pub fn hamming_error(labels: &[usize], truth: &[usize]) -> Result<(usize, f64), ClusterError> {
    if labels.len() != truth.len() {
        return Err(ClusterError::LengthMismatch(labels.len(), truth.len()));
    }
    let n = labels.len();
    if n == 0 {
        return Ok((0, 0.0));
    }
    let k = labels
        .iter()
        .chain(truth.iter())
        .max()
        .map(|&m| m + 1)
        .unwrap_or(1);
    if k > n {
        return Err(ClusterError::LabelOutOfRange {
            value: k - 1,
            n,
        });
    }
    let mut conf = Array2::<usize>::zeros((k, k));
    for (&l, &t) in labels.iter().zip(truth) {
        conf[[l, t]] += 1;
    }
    let agreement = if k <= 10 {
        let mut used = vec![false; k];
        let mut best = 0usize;
        best_agreement_exhaustive(0, &mut used, 0, &conf, &mut best);
        best
    } else {
        // minimize n - agreement via an optimal assignment
        let cost = conf.mapv(|c| -(c as f64));
        let assign = hungarian_min_cost(&cost);
        (0..k).map(|l| conf[[l, assign[l]]]).sum()
    };
    let count = n - agreement;
    Ok((count, count as f64 / n as f64))
}

fn best_agreement_exhaustive(
    l: usize,
    used: &mut [bool],
    acc: usize,
    conf: &Array2<usize>,
    best: &mut usize,
) {
    let k = conf.nrows();
    if l == k {
        *best = (*best).max(acc);
        return;
    }
    for t in 0..k {
        if !used[t] {
            used[t] = true;
            best_agreement_exhaustive(l + 1, used, acc + conf[[l, t]], conf, best);
            used[t] = false;
        }
    }
}

/// Minimum-cost perfect matching on a square cost matrix via alternating
/// paths with potentials, cubic in the size. Returns the matched column for
/// each row.
fn hungarian_min_cost(cost: &Array2<f64>) -> Vec<usize> {
    let n = cost.nrows();
    assert_eq!(n, cost.ncols());
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; n + 1];
    let mut matched = vec![0usize; n + 1]; // matched[j] = row of column j, 0 = free
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        matched[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = matched[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost[[i0 - 1, j - 1]] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[matched[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if matched[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            matched[j0] = matched[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut row_to_col = vec![0usize; n];
    for j in 1..=n {
        if matched[j] > 0 {
            row_to_col[matched[j] - 1] = j - 1;
        }
    }
    row_to_col
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn identical_labelings_have_zero_error() {
        let x = vec![0, 1, 2, 0, 1];
        assert_eq!(hamming_error(&x, &x).unwrap(), (0, 0.0));
    }

    #[test]
    fn cluster_renaming_is_absorbed() {
        let truth = vec![0, 0, 1, 1];
        let swapped = vec![1, 1, 0, 0];
        assert_eq!(hamming_error(&swapped, &truth).unwrap(), (0, 0.0));
    }

    #[test]
    fn single_flip_counts_once() {
        let truth = vec![0, 0, 1, 1];
        let labels = vec![0, 1, 1, 1];
        assert_eq!(hamming_error(&labels, &truth).unwrap(), (1, 0.25));
    }

    #[test]
    fn length_mismatch_is_rejected() {
        assert!(matches!(
            hamming_error(&[0, 1], &[0, 1, 1]),
            Err(ClusterError::LengthMismatch(2, 3))
        ));
    }

    #[test]
    fn assignment_path_matches_exhaustive_oracle() {
        let mut rng = crate::rng::rng_from_seed(2024);
        for k in 3..8usize {
            for _ in 0..20 {
                let n = 60;
                let labels: Vec<usize> = (0..n).map(|_| rng.gen_range(0..k)).collect();
                let truth: Vec<usize> = (0..n).map(|_| rng.gen_range(0..k)).collect();
                let mut conf = Array2::<usize>::zeros((k, k));
                for (&l, &t) in labels.iter().zip(&truth) {
                    conf[[l, t]] += 1;
                }
                let mut used = vec![false; k];
                let mut best = 0usize;
                best_agreement_exhaustive(0, &mut used, 0, &conf, &mut best);
                let assign = hungarian_min_cost(&conf.mapv(|c| -(c as f64)));
                let hung: usize = (0..k).map(|l| conf[[l, assign[l]]]).sum();
                assert_eq!(hung, best, "k={k}");
            }
        }
    }

    #[test]
    fn many_cluster_path_counts_planted_corruptions() {
        // 11 clusters forces the assignment path; a known permutation plus
        // 7 flips must cost exactly 7
        let k = 11usize;
        let per = 30usize;
        let mut truth = Vec::new();
        for c in 0..k {
            truth.extend(std::iter::repeat(c).take(per));
        }
        let sigma: Vec<usize> = (0..k).map(|c| (c + 3) % k).collect();
        let mut labels: Vec<usize> = truth.iter().map(|&c| sigma[c]).collect();
        for i in 0..7 {
            let pos = i * per + 5;
            labels[pos] = (labels[pos] + 1) % k;
        }
        let (count, rate) = hamming_error(&labels, &truth).unwrap();
        assert_eq!(count, 7);
        assert!((rate - 7.0 / (k * per) as f64).abs() < 1e-15);
    }

    proptest::proptest! {
        #[test]
        fn invariant_under_relabeling(
            raw in proptest::collection::vec(0usize..4, 12..40),
            perm_seed in 0u64..1000,
        ) {
            let truth: Vec<usize> = raw.iter().map(|&x| (x * 7 + 1) % 4).collect();
            let labels = raw;
            let mut sigma = [0usize, 1, 2, 3];
            let mut rng = crate::rng::rng_from_seed(perm_seed);
            for i in (1..4).rev() {
                let j = rng.gen_range(0..=i);
                sigma.swap(i, j);
            }
            let renamed: Vec<usize> = labels.iter().map(|&l| sigma[l]).collect();
            let a = hamming_error(&labels, &truth).unwrap();
            let b = hamming_error(&renamed, &truth).unwrap();
            proptest::prop_assert_eq!(a, b);
        }
    }
}
