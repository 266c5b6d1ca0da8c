use kdist_core::experiments::checks::microsim_check;
use kdist_core::full::{sample_many, FullWalk, TwoRegisterSim};
use kdist_core::{Execution, KDistinctnessInstance, ProblemParams};

#[test]
fn two_register_marginal_matches_across_instances() {
    let cases: [(usize, usize, Vec<u64>, u64); 4] = [
        (5, 3, vec![2, 4, 1, 4, 3], 4),
        (5, 2, vec![5, 1, 5, 2, 3], 5),
        (5, 3, vec![1, 2, 3, 4, 1], 7),
        (6, 2, vec![3, 6, 1, 2, 6, 4], 6),
    ];
    for (n, r, values, m) in cases {
        let params = ProblemParams::with_r(n, 2, r).unwrap();
        let inst = KDistinctnessInstance::new(values.clone(), 2).unwrap();
        let check = microsim_check(&params, &inst, m, 2, 2, 1 << 26, Execution::default()).unwrap();
        assert!(
            check.max_marginal_deviation < 1e-10,
            "{values:?}: {}",
            check.max_marginal_deviation
        );
        assert_eq!(check.audit.violations, 0, "{values:?}");
        assert!(check.audit.terms_checked > 0);
    }
}

/// The marginal comparison is not vacuous: a different list changes it.
#[test]
fn marginal_check_detects_wrong_instance() {
    let params = ProblemParams::with_r(5, 2, 3).unwrap();
    let inst = KDistinctnessInstance::new(vec![2, 4, 1, 4, 3], 2).unwrap();
    let other = KDistinctnessInstance::new(vec![2, 4, 2, 1, 3], 2).unwrap();
    let run = TwoRegisterSim::new(&params, &inst, 4).unwrap().run(1, 2);
    let full = FullWalk::new(&params, &other).unwrap().run(1, 2).unwrap();
    let dev = run
        .marginal
        .iter()
        .zip(full.state.amplitudes())
        .map(|(p, a)| (p - a.norm_sqr()).abs())
        .fold(0.0, f64::max);
    assert!(dev > 1e-3, "deviation {dev}");
}

#[test]
fn microsim_rejects_out_of_range_values() {
    let params = ProblemParams::with_r(5, 2, 3).unwrap();
    let inst = KDistinctnessInstance::new(vec![2, 9, 1, 9, 3], 2).unwrap();
    assert!(TwoRegisterSim::new(&params, &inst, 4).unwrap_err().is_config());
}

#[test]
fn sampling_depends_only_on_seed() {
    let params = ProblemParams::with_r(9, 2, 4).unwrap();
    let inst = KDistinctnessInstance::with_collision(9, &[3, 8]).unwrap();
    let walk = FullWalk::new(&params, &inst).unwrap();
    let run = walk.run(2, 2).unwrap();
    let draw = |seed, exec| {
        sample_many(
            walk.table(),
            &run.state,
            &inst,
            run.marked_probability,
            30_000,
            seed,
            exec,
        )
    };
    let a = draw(5, Execution::Parallel);
    assert_eq!(a, draw(5, Execution::Sequential));
    assert_eq!(a, draw(5, Execution::Parallel));
    assert_ne!(a.successes, draw(6, Execution::Parallel).successes);
    assert!(a.z_score.abs() < 4.0, "z = {}", a.z_score);
}
