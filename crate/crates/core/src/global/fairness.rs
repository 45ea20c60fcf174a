use serde::{Deserialize, Serialize};

use super::aggregate::GlobalExplanation;
use crate::scalar::Scalar;

pub const DEFAULT_TOP_K: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    /// No sensitive feature in the top k.
    Fair,
    /// Exactly one; reported but not repaired by default.
    SingleSensitive,
    /// Two or more.
    Unfair,
}

impl Verdict {
    pub fn from_count(n: usize) -> Verdict {
        match n {
            0 => Verdict::Fair,
            1 => Verdict::SingleSensitive,
            _ => Verdict::Unfair,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Fair => "fair",
            Verdict::SingleSensitive => "single-sensitive",
            Verdict::Unfair => "unfair",
        }
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FairnessVerdict {
    /// In ranking order.
    pub sensitive_in_top_k: Vec<String>,
    pub k: usize,
    pub verdict: Verdict,
}

/// Intersects the top `k` of the ranking with `sensitive`.
pub fn assess_fairness<T: Scalar, S: AsRef<str>>(
    g: &GlobalExplanation<T>,
    sensitive: &[S],
    k: usize,
) -> FairnessVerdict {
    let hits: Vec<String> = g
        .top_k(k)
        .iter()
        .filter(|f| sensitive.iter().any(|s| s.as_ref() == f.as_str()))
        .cloned()
        .collect();
    FairnessVerdict {
        verdict: Verdict::from_count(hits.len()),
        sensitive_in_top_k: hits,
        k,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::global::aggregate::tests::explanation;

    #[test]
    fn verdict_by_count() {
        let g = explanation(&[("a", 3.0), ("b", -2.0), ("c", 1.0), ("d", 0.5)]);
        assert_eq!(assess_fairness(&g, &["a", "b"], 2).verdict, Verdict::Unfair);
        assert_eq!(assess_fairness(&g, &["a", "d"], 2).verdict, Verdict::SingleSensitive);
        assert_eq!(assess_fairness(&g, &["d"], 3).verdict, Verdict::Fair);
        assert_eq!(assess_fairness::<f64, &str>(&g, &[], 4).verdict, Verdict::Fair);
    }

    #[test]
    fn hits_follow_ranking() {
        let g = explanation(&[("a", 0.1), ("b", -2.0), ("c", 1.0)]);
        let v = assess_fairness(&g, &["a", "c", "b"], 3);
        assert_eq!(v.sensitive_in_top_k, vec!["b", "c", "a"]);
    }

    #[test]
    fn monotone_in_k() {
        let g = explanation(&[("a", 0.1), ("b", -2.0), ("c", 1.0), ("d", 0.7), ("e", 0.0)]);
        let mut prev = 0;
        for k in 1..7 {
            let n = assess_fairness(&g, &["a", "d", "e"], k).sensitive_in_top_k.len();
            assert!(n >= prev);
            prev = n;
        }
    }
}
