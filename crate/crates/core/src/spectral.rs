//! Closed-form spectral quantities of the reduced walk.
//!
//! `u = u_beta u_alpha` has eigenvalue 1 (eigenvector `|psi_0>`) and the
//! conjugate pairs `e^{±i phi_n}`, `n = 1..k`, with
//! `cos phi_n = 1 - 2n(N-n+1) / ((r+1)(N-r))`. The overlaps `<k,0|psi_n>`
//! and the principal phase `lambda` of `u^t2 R` then fix the success
//! probability `p(t) ≈ sin^2(lambda t) / (4b)`.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::combinatorics::{binomial, ProblemParams};
use crate::error::{Error, Result};
use crate::numeric;
use crate::reduced::{closed_steps, initial_reduced_state, ReducedWalk};

/// `1 - cos(t2 phi_n)` below this is treated as a vanishing denominator.
pub const DENOMINATOR_FLOOR: f64 = 1e-14;

/// `cos phi_n` for `n = 1..=k`.
pub fn eigenphase_cosines(params: &ProblemParams) -> Result<Vec<f64>> {
    params.check_reduced_regime()?;
    let (n_list, r) = (params.n() as f64, params.r() as f64);
    (1..=params.k())
        .map(|n| {
            let nf = n as f64;
            let c = 1.0 - 2.0 * nf * (n_list - nf + 1.0) / ((r + 1.0) * (n_list - r));
            if (-1.0..=1.0).contains(&c) {
                Ok(c)
            } else {
                Err(Error::CosineOutOfRange { n, cos: c })
            }
        })
        .collect()
}

/// `phi_1 < ... < phi_k`, each in `(0, pi]`.
pub fn eigenphases(params: &ProblemParams) -> Result<Vec<f64>> {
    Ok(eigenphase_cosines(params)?.into_iter().map(f64::acos).collect())
}

/// `<k,0|psi_n>` for `n = 0..=k`, all positive.
pub fn overlaps_k0(params: &ProblemParams) -> Result<Vec<f64>> {
    params.check_reduced_regime()?;
    let (n_list, k, r) = (params.n() as f64, params.k(), params.r() as f64);
    let prod = |range: std::ops::Range<usize>, f: &dyn Fn(f64) -> f64| -> f64 {
        range.map(|i| f(i as f64)).product()
    };

    let mut out = Vec::with_capacity(k + 1);
    // n = 0: prod_{i<k} sqrt((r-i)/(N-i))
    out.push(prod(0..k, &|i| ((r - i) / (n_list - i)).sqrt()));
    for n in 1..k {
        let num = prod(0..n, &|i| n_list - r - i) * prod(n..k, &|i| r - i);
        let den = prod(n - 1..2 * n - 1, &|i| n_list - i) * prod(2 * n..k + n, &|i| n_list - i);
        let choose = binomial(k as u64, n as u64)? as f64;
        out.push(FRAC_1_SQRT_2 * choose.sqrt() * (num / den).sqrt());
    }
    let num = prod(0..k, &|i| n_list - r - i);
    let den = prod(k - 1..2 * k - 1, &|i| n_list - i);
    out.push(FRAC_1_SQRT_2 * (num / den).sqrt());
    Ok(out)
}

/// Closed-form principal phase for a given `t2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrincipalPhase {
    pub t2: usize,
    /// `lambda = <k,0|psi_0> / sqrt(b)`.
    pub lambda: f64,
    /// `b = sum_{n=1..k} <k,0|psi_n>^2 / (1 - cos(t2 phi_n))`.
    pub b: f64,
}

impl PrincipalPhase {
    /// `sin^2(lambda t) / (4b)`.
    pub fn probability_at(&self, t: usize) -> f64 {
        (self.lambda * t as f64).sin().powi(2) / (4.0 * self.b)
    }

    /// Peak value `1 / (4b)`, clamped to `[0, 1]`.
    pub fn peak_probability(&self) -> f64 {
        (0.25 / self.b).clamp(0.0, 1.0)
    }
}

pub fn principal_phase_lambda(params: &ProblemParams, t2: usize) -> Result<PrincipalPhase> {
    let phis = eigenphases(params)?;
    let overlaps = overlaps_k0(params)?;
    let mut b = 0.0;
    for (idx, phi) in phis.iter().enumerate() {
        let denom = 1.0 - (t2 as f64 * phi).cos();
        if denom < DENOMINATOR_FLOOR {
            return Err(Error::DegenerateDenominator {
                n: idx + 1,
                value: denom,
            });
        }
        b += overlaps[idx + 1].powi(2) / denom;
    }
    Ok(PrincipalPhase {
        t2,
        lambda: overlaps[0] / b.sqrt(),
        b,
    })
}

/// Principal phase of `u^t2 R` taken from its numerical diagonalization.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NumericPrincipalPhase {
    pub t2: usize,
    /// Smallest positive eigenphase among the complex eigenvalues.
    pub lambda: f64,
    /// `<k,0|lambda>`, made real and positive by the eigenvector's phase.
    pub k0_overlap: f64,
    /// `<psi_0|lambda>` under the same phase choice.
    pub psi0_overlap: Complex64,
    pub residual: f64,
}

pub fn numeric_principal_phase(params: &ProblemParams, t2: usize) -> Result<NumericPrincipalPhase> {
    let walk = ReducedWalk::new(params)?;
    let block = walk.block(t2);
    let mu = numeric::eigenvalues(&block)
        .into_iter()
        .filter(|z| z.im > 1e-12)
        .min_by(|a, b| a.arg().total_cmp(&b.arg()))
        .ok_or_else(|| Error::Numeric(format!("u^{t2} R has no complex eigenvalue pair")))?;
    let mut pair = numeric::eigenvector(&block, mu)?;
    let marked = params.reduced_dim() - 1;
    pair.align_to(marked);
    let psi0 = initial_reduced_state(params)?;
    let psi0_overlap = psi0
        .amplitudes()
        .iter()
        .zip(pair.vector.iter())
        .map(|(a, v)| a.conj() * v)
        .sum();
    Ok(NumericPrincipalPhase {
        t2,
        lambda: mu.arg(),
        k0_overlap: pair.vector[marked].re,
        psi0_overlap,
        residual: pair.residual,
    })
}

/// `round(pi / (2 lambda))` with the diagonalized principal phase.
pub fn optimal_t1(params: &ProblemParams, t2: usize) -> Result<usize> {
    let lambda = numeric_principal_phase(params, t2)?.lambda;
    Ok((PI / (2.0 * lambda)).round() as usize)
}

/// `k cot^2((pi/2) sqrt((k-1)/k))`, the limit of `r^(1/k) (1 - p_succ)`.
pub fn asymptotic_gap_constant(k: usize) -> f64 {
    let kf = k as f64;
    let arg = PI / 2.0 * ((kf - 1.0) / kf).sqrt();
    kf / arg.tan().powi(2)
}

/// `1 - (k / r^(1/k)) cot^2((pi/2) sqrt((k-1)/k))`, clamped to `[0, 1]`.
pub fn asymptotic_success(params: &ProblemParams) -> f64 {
    let k = params.k() as f64;
    let gap = asymptotic_gap_constant(params.k()) / (params.r() as f64).powf(1.0 / k);
    (1.0 - gap).clamp(0.0, 1.0)
}

/// Everything the spectral analysis says about one parameter set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralData {
    /// `phi_1..phi_k`.
    pub phis: Vec<f64>,
    /// `<k,0|psi_n>` for `n = 0..=k`.
    pub overlaps: Vec<f64>,
    pub t1_closed: usize,
    pub t2_closed: usize,
    pub t1_exact: usize,
    pub t2_exact: usize,
    /// Closed-form `lambda` and `b` at `t2_exact`.
    pub lambda: f64,
    pub b: f64,
    /// Diagonalized principal phase at `t2_exact`.
    pub lambda_numeric: f64,
    /// `1 / (4b)`.
    pub p_succ_predicted: f64,
    pub p_succ_asymptotic: f64,
    /// `lambda / (t2 phi_1)`; small when the Taylor expansion is valid.
    pub lambda_ratio: f64,
    /// `<k,0|psi_0>^2 + 2 sum_{n>=1} <k,0|psi_n>^2`, which must equal 1.
    pub completeness: f64,
}

impl SpectralData {
    pub fn compute(params: &ProblemParams) -> Result<Self> {
        let phis = eigenphases(params)?;
        let overlaps = overlaps_k0(params)?;
        let closed = closed_steps(params.r(), params.k());
        let t2_exact = (PI / phis[phis.len() - 1]).round() as usize;
        let principal = principal_phase_lambda(params, t2_exact)?;
        let numeric = numeric_principal_phase(params, t2_exact)?;
        let t1_exact = (PI / (2.0 * numeric.lambda)).round() as usize;
        let completeness = completeness_sum(&overlaps);
        Ok(Self {
            t1_closed: closed.t1,
            t2_closed: closed.t2,
            t1_exact,
            t2_exact,
            lambda: principal.lambda,
            b: principal.b,
            lambda_numeric: numeric.lambda,
            p_succ_predicted: principal.peak_probability(),
            p_succ_asymptotic: asymptotic_success(params),
            lambda_ratio: principal.lambda / (t2_exact as f64 * phis[0]),
            completeness,
            phis,
            overlaps,
        })
    }
}

/// `o_0^2 + 2 sum_{n>=1} o_n^2`; each `n >= 1` stands for a `±n` pair.
pub fn completeness_sum(overlaps: &[f64]) -> f64 {
    overlaps[0].powi(2) + 2.0 * overlaps[1..].iter().map(|o| o * o).sum::<f64>()
}
