//! Simulation and verification toolkit for the element k-distinctness
//! staggered quantum walk.
//!
//! The crate has three layers:
//!
//! - [`combinatorics`]: problem parameters, class cardinalities and the
//!   classical collision check used after measurement.
//! - [`reduced`] and [`spectral`]: exact evolution inside the invariant
//!   `(2k+1)`-dimensional subspace together with the closed-form spectral
//!   quantities (eigenphases, overlaps, principal phase) that give the
//!   optimal step counts `t1`, `t2` and the success probability.
//! - [`full`]: a brute-force walk on the full vertex set `(S, y)` of the
//!   graph, plus a two-register variant that carries the oracle queries.
//!   It is the independent oracle for the reduced model at small `N`.
//!
//! [`experiments`] wires these into parameter reports, sweeps, convergence
//! ladders, a verification suite and sampling runs.
//!
//! Data-parallel loops (polygon reflections, sweeps, sampling) run on rayon
//! when the `parallel` feature is on; see [`Execution`].

pub mod combinatorics;
pub mod error;
pub mod exec;
pub mod experiments;
pub mod full;
pub mod numeric;
pub mod reduced;
pub mod spectral;

pub use combinatorics::{
    binomial, classical_k_collision, eta_cardinality, ln_binomial, nearest_r, vertex_count, EtaClass,
    KDistinctnessInstance, ProblemParams,
};
pub use error::{Error, Result};
pub use exec::Execution;
pub use reduced::{
    evolve_reduced, initial_reduced_state, step_parameters, success_probability, ReducedState, ReducedWalk,
    StepMode, StepParameters,
};
pub use spectral::{
    asymptotic_success, eigenphases, overlaps_k0, principal_phase_lambda, PrincipalPhase, SpectralData,
};

/// One operator of the algorithm's schedule.
///
/// A run is `t1` repetitions of `PhaseFlip` followed by `t2` walk steps,
/// each step being `Alpha` then `Beta`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Operator {
    PhaseFlip,
    Alpha,
    Beta,
}

/// The operator sequence `((U_beta U_alpha)^t2 R)^t1`, in application order.
pub fn schedule(t1: usize, t2: usize) -> impl Iterator<Item = Operator> {
    (0..t1).flat_map(move |_| {
        std::iter::once(Operator::PhaseFlip)
            .chain((0..t2).flat_map(|_| [Operator::Alpha, Operator::Beta].into_iter()))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedule_shape() {
        let ops: Vec<_> = schedule(2, 1).collect();
        assert_eq!(
            ops,
            vec![
                Operator::PhaseFlip,
                Operator::Alpha,
                Operator::Beta,
                Operator::PhaseFlip,
                Operator::Alpha,
                Operator::Beta
            ]
        );
        assert_eq!(schedule(0, 5).count(), 0);
        assert_eq!(schedule(3, 0).count(), 3);
    }
}
