//! Exact evolution in the invariant `(2k+1)`-dimensional subspace spanned by
//! the class vectors `|eta_l^j>`.
//!
//! Basis order is `(0,0), (0,1), (1,0), (1,1), ..., (k-1,1), (k,0)`; see
//! [`EtaClass::position`]. The walk product is `u = u_beta * u_alpha`
//! (alpha reflection first), matching the operator schedule of the full
//! simulator.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::combinatorics::{eta_weight, EtaClass, ProblemParams};
use crate::error::Result;
use crate::{schedule, spectral, Operator};

/// Amplitudes over the reduced basis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReducedState {
    k: usize,
    amplitudes: Vec<Complex64>,
}

impl ReducedState {
    pub fn from_amplitudes(k: usize, amplitudes: Vec<Complex64>) -> Self {
        assert_eq!(
            amplitudes.len(),
            2 * k + 1,
            "reduced state must have 2k+1 entries"
        );
        Self { k, amplitudes }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitude(&self, class: EtaClass) -> Complex64 {
        self.amplitudes[class.position()]
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `|<k,0|state>|^2`.
    pub fn marked_probability(&self) -> f64 {
        self.amplitudes[2 * self.k].norm_sqr()
    }

    /// Largest componentwise `|a_i - b_i|`.
    pub fn max_deviation(&self, other: &ReducedState) -> f64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    fn apply_real(&mut self, m: &DMatrix<f64>) {
        let old = self.amplitudes.clone();
        for (i, slot) in self.amplitudes.iter_mut().enumerate() {
            *slot = old.iter().enumerate().map(|(j, a)| a * m[(i, j)]).sum();
        }
    }
}

/// Reduced reflections `u_alpha`, `u_beta` and phase flip `R`.
#[derive(Clone, Debug, PartialEq)]
pub struct ReducedWalk {
    params: ProblemParams,
    u_alpha: DMatrix<f64>,
    u_beta: DMatrix<f64>,
    phase_flip: DMatrix<f64>,
}

impl ReducedWalk {
    /// Fills the two reflection matrices from their entry formulas.
    ///
    /// `u_alpha` couples `(l, j)` with `(l, 1-j)` using `p = (k-l)/(N-r)`;
    /// `u_beta` couples `(l, 0)` with `(l-1, 1)` using `q = (l+j)/(r+1)`.
    pub fn new(params: &ProblemParams) -> Result<Self> {
        params.check_reduced_regime()?;
        let (n, k, r) = (params.n() as f64, params.k(), params.r() as f64);
        let dim = params.reduced_dim();
        let mut u_alpha = DMatrix::zeros(dim, dim);
        let mut u_beta = DMatrix::zeros(dim, dim);
        for class in EtaClass::all(k) {
            let col = class.position();
            let sign = if class.y_marked { -1.0 } else { 1.0 };

            let p = (k - class.level) as f64 / (n - r);
            u_alpha[(col, col)] = sign * (1.0 - 2.0 * p);
            if class.level < k {
                let partner = EtaClass {
                    level: class.level,
                    y_marked: !class.y_marked,
                };
                u_alpha[(partner.position(), col)] = 2.0 * (p * (1.0 - p)).sqrt();
            }

            let q = (class.level + class.j()) as f64 / (r + 1.0);
            u_beta[(col, col)] = sign * (1.0 - 2.0 * q);
            let partner = if class.y_marked {
                Some(EtaClass {
                    level: class.level + 1,
                    y_marked: false,
                })
            } else if class.level > 0 {
                Some(EtaClass {
                    level: class.level - 1,
                    y_marked: true,
                })
            } else {
                None
            };
            if let Some(partner) = partner {
                u_beta[(partner.position(), col)] = 2.0 * (q * (1.0 - q)).sqrt();
            }
        }
        let mut phase_flip = DMatrix::identity(dim, dim);
        phase_flip[(dim - 1, dim - 1)] = -1.0;
        Ok(Self {
            params: *params,
            u_alpha,
            u_beta,
            phase_flip,
        })
    }

    pub fn params(&self) -> &ProblemParams {
        &self.params
    }

    pub fn u_alpha(&self) -> &DMatrix<f64> {
        &self.u_alpha
    }

    pub fn u_beta(&self) -> &DMatrix<f64> {
        &self.u_beta
    }

    pub fn phase_flip(&self) -> &DMatrix<f64> {
        &self.phase_flip
    }

    /// `u = u_beta * u_alpha`.
    pub fn step(&self) -> DMatrix<f64> {
        &self.u_beta * &self.u_alpha
    }

    /// `u^t2 * R`, one repetition of the main block.
    pub fn block(&self, t2: usize) -> DMatrix<f64> {
        let u = self.step();
        let mut acc = DMatrix::identity(u.nrows(), u.ncols());
        for _ in 0..t2 {
            acc = &u * acc;
        }
        acc * &self.phase_flip
    }

    pub fn matrix(&self, op: Operator) -> &DMatrix<f64> {
        match op {
            Operator::PhaseFlip => &self.phase_flip,
            Operator::Alpha => &self.u_alpha,
            Operator::Beta => &self.u_beta,
        }
    }

    pub fn apply(&self, op: Operator, state: &mut ReducedState) {
        state.apply_real(self.matrix(op));
    }

    /// Marked probability after each main-block repetition:
    /// element `t` is `p(t)` for `t = 0..=t1_max`.
    pub fn trajectory(&self, initial: &ReducedState, t2: usize, t1_max: usize) -> Vec<f64> {
        let block = self.block(t2);
        let mut state = initial.clone();
        let mut out = Vec::with_capacity(t1_max + 1);
        out.push(state.marked_probability());
        for _ in 0..t1_max {
            state.apply_real(&block);
            out.push(state.marked_probability());
        }
        out
    }
}

/// `|psi_0>`: amplitude `sqrt(|eta_l^j| / |V|)` on each class.
pub fn initial_reduced_state(params: &ProblemParams) -> Result<ReducedState> {
    let amplitudes = EtaClass::all(params.k())
        .map(|c| eta_weight(params, c).map(|w| Complex64::new(w.sqrt(), 0.0)))
        .collect::<Result<Vec<_>>>()?;
    Ok(ReducedState::from_amplitudes(params.k(), amplitudes))
}

/// `((u_beta u_alpha)^t2 R)^t1 |state>`, applied operator by operator.
pub fn evolve_reduced(walk: &ReducedWalk, state: &ReducedState, t1: usize, t2: usize) -> ReducedState {
    let mut out = state.clone();
    for op in schedule(t1, t2) {
        walk.apply(op, &mut out);
    }
    out
}

/// `p = |<k,0| (u^t2 R)^t1 |psi_0>|^2`.
pub fn success_probability(params: &ProblemParams, t1: usize, t2: usize) -> Result<f64> {
    let walk = ReducedWalk::new(params)?;
    let psi0 = initial_reduced_state(params)?;
    let block = walk.block(t2);
    let mut state = psi0;
    for _ in 0..t1 {
        state.apply_real(&block);
    }
    Ok(state.marked_probability())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StepMode {
    /// `t1 = round(pi sqrt(r) / 4)`, `t2 = round(pi sqrt(r) / (2 sqrt(k)))`.
    Closed,
    /// `t2 = round(pi / phi_k)`, then `t1 = round(pi / (2 lambda))` with the
    /// principal phase of `u^t2 R` obtained by diagonalization.
    Exact,
}

impl std::str::FromStr for StepMode {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "closed" => Ok(StepMode::Closed),
            "exact" => Ok(StepMode::Exact),
            other => Err(crate::Error::Config(format!(
                "unknown mode `{other}` (closed|exact)"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepParameters {
    pub t1: usize,
    pub t2: usize,
}

/// Closed-form step counts from `r` and `k` alone.
pub fn closed_steps(r: usize, k: usize) -> StepParameters {
    let root = (r as f64).sqrt();
    let pi = std::f64::consts::PI;
    StepParameters {
        t1: (pi * root / 4.0).round() as usize,
        t2: (pi * root / (2.0 * (k as f64).sqrt())).round() as usize,
    }
}

pub fn step_parameters(params: &ProblemParams, mode: StepMode) -> Result<StepParameters> {
    match mode {
        StepMode::Closed => Ok(closed_steps(params.r(), params.k())),
        StepMode::Exact => {
            let phis = spectral::eigenphases(params)?;
            let phi_k = *phis.last().expect("k >= 2 eigenphases");
            let t2 = (std::f64::consts::PI / phi_k).round() as usize;
            let t1 = spectral::optimal_t1(params, t2)?;
            Ok(StepParameters { t1, t2 })
        }
    }
}
