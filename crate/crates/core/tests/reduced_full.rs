use kdist_core::experiments::checks::reduced_full_diagram;
use kdist_core::full::{FullState, FullWalk};
use kdist_core::{Execution, KDistinctnessInstance, Operator, ProblemParams};
use num_complex::Complex64;
use proptest::prelude::*;
use proptest::sample::subsequence;

fn valid_params(n: usize, k: usize) -> impl Iterator<Item = ProblemParams> {
    (1..n).filter_map(move |r| {
        ProblemParams::with_r(n, k, r)
            .ok()
            .filter(ProblemParams::in_reduced_regime)
    })
}

#[test]
fn commuting_diagram_every_valid_r() {
    let mut cases = 0;
    for n in 5..=9 {
        for k in [2, 3] {
            for params in valid_params(n, k) {
                let positions: Vec<usize> = (0..k).map(|i| 1 + i * (n - 1) / k).collect();
                let inst = KDistinctnessInstance::with_collision(n, &positions).unwrap();
                let d = reduced_full_diagram(&params, &inst, 3, 2, Execution::default()).unwrap();
                assert!(
                    d.max_deviation < 1e-10,
                    "N={n} k={k} r={}: {}",
                    params.r(),
                    d.max_deviation
                );
                assert!(
                    d.max_residual < 1e-10,
                    "N={n} k={k} r={}: residual {}",
                    params.r(),
                    d.max_residual
                );
                assert!((d.p_full - d.p_reduced).abs() < 1e-10);
                cases += 1;
            }
        }
    }
    assert!(cases >= 15, "only {cases} regimes covered");
}

fn pseudo_random_state(len: usize, seed: u64) -> FullState {
    let mut x = seed
        .wrapping_mul(6364136223846793005)
        .wrapping_add(1442695040888963407);
    let mut next = || {
        x = x
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        (x >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    };
    let amps: Vec<Complex64> = (0..len).map(|_| Complex64::new(next(), next())).collect();
    let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    FullState::from_amplitudes(amps.into_iter().map(|a| a / norm).collect())
}

#[test]
fn full_operators_are_norm_preserving_involutions() {
    let params = ProblemParams::with_r(8, 3, 4).unwrap();
    let inst = KDistinctnessInstance::with_collision(8, &[2, 5, 7]).unwrap();
    for exec in [Execution::Sequential, Execution::Parallel] {
        let walk = FullWalk::new(&params, &inst).unwrap().with_execution(exec);
        let start = pseudo_random_state(walk.table().len(), 11);
        for op in [Operator::Alpha, Operator::Beta, Operator::PhaseFlip] {
            let mut s = start.clone();
            walk.apply(op, &mut s);
            assert!((s.norm() - 1.0).abs() < 1e-12);
            walk.apply(op, &mut s);
            assert!(
                s.max_deviation(&start) < 1e-12,
                "{op:?} twice is not the identity"
            );
        }
    }
}

fn marked_probability(n: usize, k: usize, r: usize, values: Vec<u64>) -> f64 {
    let params = ProblemParams::with_r(n, k, r).unwrap();
    let inst = KDistinctnessInstance::new(values, k).unwrap();
    FullWalk::new(&params, &inst)
        .unwrap()
        .run(2, 2)
        .unwrap()
        .marked_probability
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn diagram_holds_for_any_colliding_set(positions in subsequence((1..=7usize).collect::<Vec<_>>(), 2..=3)) {
        let k = positions.len();
        let params = ProblemParams::with_r(7, k, 3).unwrap();
        let inst = KDistinctnessInstance::with_collision(7, &positions).unwrap();
        let d = reduced_full_diagram(&params, &inst, 2, 2, Execution::Sequential).unwrap();
        prop_assert!(d.max_deviation < 1e-10);
    }

    /// Relabelling `[N]` moves the colliding set but not the probability.
    #[test]
    fn label_permutation_equivariance(perm in Just((0..8usize).collect::<Vec<_>>()).prop_shuffle(), k in 2usize..=3) {
        let base: Vec<u64> = (0..8).map(|i| if i < k { 1 } else { i as u64 + 10 }).collect();
        let permuted: Vec<u64> = perm.iter().map(|&p| base[p]).collect();
        let a = marked_probability(8, k, 4, base);
        let b = marked_probability(8, k, 4, permuted);
        prop_assert!((a - b).abs() < 1e-12, "{a} vs {b}");
    }

    /// Renaming the values themselves keeps the collision structure.
    #[test]
    fn value_relabelling_invariance(scale in 1u64..50, shift in 0u64..1000) {
        let values = vec![3, 9, 4, 3, 7, 1, 8];
        let renamed: Vec<u64> = values.iter().map(|v| v * scale + shift).collect();
        let a = marked_probability(7, 2, 3, values);
        let b = marked_probability(7, 2, 3, renamed);
        prop_assert!((a - b).abs() < 1e-12);
    }
}
