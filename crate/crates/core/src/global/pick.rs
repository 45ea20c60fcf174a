use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Greedy weighted-coverage selection over an `n x d` row-major matrix of
/// absolute explanation coefficients.
///
/// Feature importance is `I_j = sqrt(sum_i |W_ij|)`. Each step adds the row
/// whose nonzero entries cover the largest total importance of still
/// uncovered features; ties go to the lowest row index. Once every feature is
/// covered all gains are zero and the remaining budget is filled in index
/// order. Returns rows in pick order.
pub fn submodular_pick<T: Scalar>(explanations: &[T], d: usize, budget: usize) -> Result<Vec<usize>> {
    if budget == 0 {
        return Err(Error::argument("pick budget must be at least 1"));
    }
    if d == 0 || !explanations.len().is_multiple_of(d) {
        return Err(Error::argument("explanation matrix shape is inconsistent"));
    }
    let n = explanations.len() / d;
    let importance: Vec<T> = (0..d)
        .map(|j| (0..n).map(|i| explanations[i * d + j].abs()).sum::<T>().sqrt())
        .collect();
    let mut covered = vec![false; d];
    let mut taken = vec![false; n];
    let mut picked = Vec::with_capacity(budget.min(n));
    while picked.len() < budget.min(n) {
        let mut best: Option<(usize, T)> = None;
        for i in (0..n).filter(|&i| !taken[i]) {
            let gain: T = (0..d)
                .filter(|&j| !covered[j] && explanations[i * d + j].abs() > T::zero())
                .map(|j| importance[j])
                .sum();
            if best.is_none_or(|(_, g)| gain > g) {
                best = Some((i, gain));
            }
        }
        let (i, _) = best.expect("an untaken row exists while below budget");
        taken[i] = true;
        for j in 0..d {
            if explanations[i * d + j].abs() > T::zero() {
                covered[j] = true;
            }
        }
        picked.push(i);
    }
    Ok(picked)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_candidate() {
        assert_eq!(submodular_pick(&[0.3, 0.0, 1.0], 3, 5).unwrap(), vec![0]);
    }

    #[test]
    fn coverage_drives_order() {
        // row 1 covers the heavy feature 0, row 2 then adds feature 2
        #[rustfmt::skip]
        let w = [
            0.0, 0.1, 0.0,
            5.0, 0.1, 0.0,
            0.0, 0.0, 0.5,
            0.0, 0.2, 0.0,
        ];
        assert_eq!(submodular_pick(&w, 3, 2).unwrap(), vec![1, 2]);
        assert_eq!(submodular_pick(&w, 3, 10).unwrap(), vec![1, 2, 0, 3]);
    }

    #[test]
    fn zero_budget_rejected() {
        assert!(submodular_pick(&[1.0], 1, 0).is_err());
    }

    fn trace_oracle(w: &[Vec<f64>], budget: usize) -> Vec<usize> {
        use std::collections::BTreeSet;
        let d = w[0].len();
        let imp: Vec<f64> = (0..d)
            .map(|j| w.iter().map(|r| r[j].abs()).sum::<f64>().sqrt())
            .collect();
        let mut covered = BTreeSet::new();
        let mut out: Vec<usize> = Vec::new();
        while out.len() < budget.min(w.len()) {
            let gains: Vec<(usize, f64)> = (0..w.len())
                .filter(|i| !out.contains(i))
                .map(|i| {
                    let g = (0..d)
                        .filter(|j| w[i][*j] != 0.0 && !covered.contains(j))
                        .map(|j| imp[j])
                        .sum();
                    (i, g)
                })
                .collect();
            let top = gains.iter().map(|g| g.1).fold(f64::NEG_INFINITY, f64::max);
            let i = gains.iter().find(|g| g.1 == top).unwrap().0;
            covered.extend((0..d).filter(|&j| w[i][j] != 0.0));
            out.push(i);
        }
        out
    }

    proptest::proptest! {
        #[test]
        fn matches_greedy_trace(
            cells in proptest::collection::vec((0u8..3, 0.0f64..2.0), 48),
            budget in 1usize..10,
        ) {
            let w: Vec<Vec<f64>> = cells
                .chunks(6)
                .map(|r| r.iter().map(|&(z, v)| if z == 0 { 0.0 } else { v }).collect())
                .collect();
            let flat: Vec<f64> = w.iter().flatten().copied().collect();
            proptest::prop_assert_eq!(submodular_pick(&flat, 6, budget).unwrap(), trace_oracle(&w, budget));
        }
    }

    #[test]
    fn f32_matrix() {
        let w = [0.0f32, 1.0, 1.0, 0.0];
        assert_eq!(submodular_pick(&w, 2, 2).unwrap(), vec![0, 1]);
    }
}
