//! Numerical cross-checks between independent routes to the same quantity.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::combinatorics::{nearest_r, KDistinctnessInstance, ProblemParams};
use crate::error::Result;
use crate::exec::Execution;
use crate::full::{edge_cover_defects, CorrespondenceAudit, FullWalk, TwoRegisterSim};
use crate::numeric;
use crate::reduced::{initial_reduced_state, ReducedWalk};
use crate::schedule;
use crate::spectral::{eigenphases, overlaps_k0};

/// `nearest_r(N, k)`, or `N - k - 1` when that leaves the reduced regime.
pub fn regime_r(n: usize, k: usize) -> Result<usize> {
    let r = nearest_r(n, k)?;
    let params = ProblemParams::with_r(n, k, r)?;
    if params.in_reduced_regime() || n < k + 2 {
        Ok(r)
    } else {
        Ok(n - k - 1)
    }
}

/// `max ||M^2 - I||` over the three reduced reflections.
pub fn involution_deviation(params: &ProblemParams) -> Result<f64> {
    let walk = ReducedWalk::new(params)?;
    let dim = params.reduced_dim();
    let id = nalgebra::DMatrix::<f64>::identity(dim, dim);
    Ok([walk.u_alpha(), walk.u_beta(), walk.phase_flip()]
        .iter()
        .map(|m| (*m * *m - &id).abs().max())
        .fold(0.0, f64::max))
}

/// Closed-form spectrum `{1} ∪ {e^{±i phi_n}}` of `u` against the numerical
/// eigenvalues, matched greedily by distance.
pub fn spectrum_deviation(params: &ProblemParams) -> Result<f64> {
    let walk = ReducedWalk::new(params)?;
    let mut numeric = numeric::eigenvalues(&walk.step());
    let mut closed = vec![Complex64::new(1.0, 0.0)];
    for phi in eigenphases(params)? {
        closed.push(Complex64::from_polar(1.0, phi));
        closed.push(Complex64::from_polar(1.0, -phi));
    }
    let mut worst = 0.0f64;
    for z in closed {
        let (idx, dist) = numeric
            .iter()
            .enumerate()
            .map(|(i, w)| (i, (w - z).norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("as many numeric eigenvalues as closed ones");
        worst = worst.max(dist);
        numeric.swap_remove(idx);
    }
    Ok(worst)
}

/// `|<k,0|psi>|` for each numerical eigenvector against the closed overlap
/// of the eigenphase it belongs to.
pub fn overlap_deviation(params: &ProblemParams) -> Result<f64> {
    let walk = ReducedWalk::new(params)?;
    let phis = eigenphases(params)?;
    let overlaps = overlaps_k0(params)?;
    let marked = params.reduced_dim() - 1;
    let mut worst = 0.0f64;
    for pair in numeric::eigenpairs(&walk.step())? {
        let phase = pair.phase().abs();
        let n = std::iter::once(0.0)
            .chain(phis.iter().copied())
            .enumerate()
            .min_by(|a, b| (a.1 - phase).abs().total_cmp(&(b.1 - phase).abs()))
            .map(|(n, _)| n)
            .expect("phase list is nonempty");
        worst = worst.max((pair.vector[marked].norm() - overlaps[n]).abs());
    }
    Ok(worst)
}

/// Result of running the full walk and the reduced walk side by side.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagramCheck {
    /// Largest `|P(full) - reduced|` over every operator of the schedule.
    pub max_deviation: f64,
    /// Largest norm of the full state outside the class span.
    pub max_residual: f64,
    pub p_full: f64,
    pub p_reduced: f64,
}

/// Applies each operator to both models and compares after every step.
pub fn reduced_full_diagram(
    params: &ProblemParams,
    instance: &KDistinctnessInstance,
    t1: usize,
    t2: usize,
    exec: Execution,
) -> Result<DiagramCheck> {
    let full = FullWalk::new(params, instance)?.with_execution(exec);
    let reduced = ReducedWalk::new(params)?;
    let mut state = full.uniform_state();
    let mut red = initial_reduced_state(params)?;
    let projection = full.project_onto_eta(&state)?;
    let mut max_deviation = projection.reduced.max_deviation(&red);
    let mut max_residual = projection.residual;
    for op in schedule(t1, t2) {
        full.apply(op, &mut state);
        reduced.apply(op, &mut red);
        let projection = full.project_onto_eta(&state)?;
        max_deviation = max_deviation.max(projection.reduced.max_deviation(&red));
        max_residual = max_residual.max(projection.residual);
    }
    Ok(DiagramCheck {
        max_deviation,
        max_residual,
        p_full: full.marked_probability(&state),
        p_reduced: red.marked_probability(),
    })
}

/// Two-register marginal against the one-register walk.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MicrosimCheck {
    pub dimension: usize,
    pub max_marginal_deviation: f64,
    pub p_two_register: f64,
    pub p_full: f64,
    pub audit: CorrespondenceAudit,
}

pub fn microsim_check(
    params: &ProblemParams,
    instance: &KDistinctnessInstance,
    m: u64,
    t1: usize,
    t2: usize,
    cap: u128,
    exec: Execution,
) -> Result<MicrosimCheck> {
    let sim = TwoRegisterSim::with_cap(params, instance, m, cap)?.with_execution(exec);
    let run = sim.run(t1, t2);
    let full = FullWalk::with_cap(params, instance, cap)?
        .with_execution(exec)
        .run(t1, t2)?;
    let max_marginal_deviation = run
        .marginal
        .iter()
        .zip(full.state.amplitudes())
        .map(|(p, a)| (p - a.norm_sqr()).abs())
        .fold(0.0, f64::max);
    Ok(MicrosimCheck {
        dimension: sim.dimension(),
        max_marginal_deviation,
        p_two_register: run.marked_probability,
        p_full: full.marked_probability,
        audit: run.audit,
    })
}

/// Number of graph edges not covered by the two tessellations.
pub fn edge_cover_check(params: &ProblemParams) -> Result<usize> {
    let instance = KDistinctnessInstance::with_collision(params.n(), &(1..=params.k()).collect::<Vec<_>>())?;
    let walk = FullWalk::new(params, &instance)?;
    Ok(edge_cover_defects(walk.table(), walk.cover()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn regime_r_falls_back() {
        assert_eq!(regime_r(5, 2).unwrap(), 2);
        assert_eq!(regime_r(8, 3).unwrap(), 4);
        assert_eq!(regime_r(8, 2).unwrap(), 4);
        assert_eq!(regime_r(10_000, 2).unwrap(), 464);
    }

    #[test]
    fn small_checks_are_tight() {
        let params = ProblemParams::with_r(8, 2, 4).unwrap();
        assert!(involution_deviation(&params).unwrap() < 1e-12);
        assert!(spectrum_deviation(&params).unwrap() < 1e-10);
        assert!(overlap_deviation(&params).unwrap() < 1e-9);
        assert_eq!(edge_cover_check(&params).unwrap(), 0);
    }

    #[test]
    fn diagram_and_microsim_agree() {
        let params = ProblemParams::with_r(6, 2, 3).unwrap();
        let inst = KDistinctnessInstance::with_collision(6, &[2, 5]).unwrap();
        let d = reduced_full_diagram(&params, &inst, 2, 2, Execution::Sequential).unwrap();
        assert!(d.max_deviation < 1e-10 && d.max_residual < 1e-10);
        let params = ProblemParams::with_r(5, 2, 3).unwrap();
        let inst = KDistinctnessInstance::new(vec![2, 4, 1, 4, 3], 2).unwrap();
        let m = microsim_check(&params, &inst, 4, 1, 2, 1 << 24, Execution::Sequential).unwrap();
        assert!(m.max_marginal_deviation < 1e-10);
        assert_eq!(m.audit.violations, 0);
    }
}
