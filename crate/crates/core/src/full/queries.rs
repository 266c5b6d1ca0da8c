use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryCounts {
    /// `r` setup queries plus two oracle calls per subroutine call.
    pub quantum: u64,
    /// The classical check of the measured `S`.
    pub classical: u64,
}

pub fn query_accounting(r: usize, t1: usize, t2: usize) -> QueryCounts {
    let r = r as u64;
    QueryCounts {
        quantum: r + 2 * t1 as u64 * t2 as u64,
        classical: r,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reduced::closed_steps;

    #[test]
    fn examples() {
        assert_eq!(
            query_accounting(4, 2, 2),
            QueryCounts {
                quantum: 12,
                classical: 4
            }
        );
        assert_eq!(query_accounting(37, 0, 9).quantum, 37);
    }

    #[test]
    fn closed_parameters_track_the_estimate() {
        for k in [2usize, 3, 4] {
            let estimate = 1.0 + std::f64::consts::PI.powi(2) / (4.0 * (k as f64).sqrt());
            for r in [400usize, 1000, 5000, 20_000] {
                let steps = closed_steps(r, k);
                let q = query_accounting(r, steps.t1, steps.t2).quantum as f64 / r as f64;
                assert!((q / estimate - 1.0).abs() < 0.05, "k={k} r={r} q={q}");
            }
        }
    }
}
