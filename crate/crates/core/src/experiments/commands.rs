use std::f64::consts::PI;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::checks::{
    edge_cover_check, involution_deviation, microsim_check, overlap_deviation, reduced_full_diagram,
    regime_r, spectrum_deviation,
};
use super::config::ExperimentConfig;
use super::report::{float_cell as f, CsvTable, Provenance, Report};
use crate::combinatorics::{KDistinctnessInstance, ProblemParams};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::full::{query_accounting, sample_many, FullState, FullWalk, QueryCounts, SampleSummary};
use crate::reduced::{
    closed_steps, initial_reduced_state, step_parameters, success_probability, ReducedWalk, StepMode,
    StepParameters,
};
use crate::schedule;
use crate::spectral::{asymptotic_gap_constant, eigenphase_cosines, numeric_principal_phase, SpectralData};

fn u<T: ToString>(x: T) -> String {
    x.to_string()
}

/// Regime-checked parameters for commands built on the reduced model.
fn reduced_params(config: &ExperimentConfig) -> Result<ProblemParams> {
    let params = config.params()?;
    params.check_reduced_regime()?;
    Ok(params)
}

/// Explicit `t1`/`t2` win; missing ones come from the configured mode.
fn resolve_steps(config: &ExperimentConfig, params: &ProblemParams) -> Result<StepParameters> {
    if let (Some(t1), Some(t2)) = (config.t1, config.t2) {
        return Ok(StepParameters { t1, t2 });
    }
    let mode = config.mode();
    let base = if mode == StepMode::Exact || params.in_reduced_regime() {
        step_parameters(params, mode)?
    } else {
        closed_steps(params.r(), params.k())
    };
    Ok(StepParameters {
        t1: config.t1.unwrap_or(base.t1),
        t2: config.t2.unwrap_or(base.t2),
    })
}

fn inclusive(range: [usize; 2], what: &str) -> Result<std::ops::RangeInclusive<usize>> {
    if range[0] > range[1] {
        return Err(Error::Config(format!(
            "{what} range [{}, {}] is empty",
            range[0], range[1]
        )));
    }
    Ok(range[0]..=range[1])
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralRow {
    pub n: usize,
    pub phi: f64,
    pub cos_phi: f64,
    pub overlap: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidityFlags {
    pub regime: bool,
    /// `lambda / (t2 phi_1) < 0.2`.
    pub taylor_expansion: bool,
    /// The asymptotic formula is only indicative below `r = 100`.
    pub asymptotic_reliable: bool,
    /// `|completeness - 1| < 1e-10`.
    pub completeness: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub provenance: Provenance,
    pub n: usize,
    pub k: usize,
    pub r: usize,
    pub closed: StepParameters,
    pub exact: StepParameters,
    pub p_closed: f64,
    pub p_exact: f64,
    /// `1 / (4b)` at the exact `t2`.
    pub p_predicted: f64,
    pub p_asymptotic: f64,
    pub lambda: f64,
    pub lambda_numeric: f64,
    pub b: f64,
    pub lambda_ratio: f64,
    pub completeness: f64,
    pub spectrum: Vec<SpectralRow>,
    pub queries_closed: QueryCounts,
    pub queries_exact: QueryCounts,
    pub flags: ValidityFlags,
    pub elapsed_ms: f64,
}

impl Report for RunReport {
    fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    /// Timing is left out so CSV output stays deterministic.
    fn table(&self) -> CsvTable {
        let mut t = CsvTable::new(&["quantity", "value"]);
        let ints = [
            ("n", self.n),
            ("k", self.k),
            ("r", self.r),
            ("t1_closed", self.closed.t1),
            ("t2_closed", self.closed.t2),
            ("t1_exact", self.exact.t1),
            ("t2_exact", self.exact.t2),
        ];
        for (name, v) in ints {
            t.push(vec![name.into(), u(v)]);
        }
        let floats = [
            ("p_closed", self.p_closed),
            ("p_exact", self.p_exact),
            ("p_predicted", self.p_predicted),
            ("p_asymptotic", self.p_asymptotic),
            ("lambda", self.lambda),
            ("lambda_numeric", self.lambda_numeric),
            ("b", self.b),
            ("lambda_ratio", self.lambda_ratio),
            ("completeness", self.completeness),
        ];
        for (name, v) in floats {
            t.push(vec![name.into(), f(v)]);
        }
        for row in &self.spectrum {
            t.push(vec![format!("phi_{}", row.n), f(row.phi)]);
            t.push(vec![format!("overlap_{}", row.n), f(row.overlap)]);
        }
        t.push(vec!["queries_closed".into(), u(self.queries_closed.quantum)]);
        t.push(vec!["queries_exact".into(), u(self.queries_exact.quantum)]);
        t.push(vec!["classical_queries".into(), u(self.queries_exact.classical)]);
        t
    }
}

pub fn params_report(config: &ExperimentConfig) -> Result<RunReport> {
    let start = Instant::now();
    let params = reduced_params(config)?;
    let data = SpectralData::compute(&params)?;
    let cosines = eigenphase_cosines(&params)?;
    let closed = StepParameters {
        t1: data.t1_closed,
        t2: data.t2_closed,
    };
    let exact = StepParameters {
        t1: data.t1_exact,
        t2: data.t2_exact,
    };
    let mut spectrum = vec![SpectralRow {
        n: 0,
        phi: 0.0,
        cos_phi: 1.0,
        overlap: data.overlaps[0],
    }];
    for (i, (&phi, &cos_phi)) in data.phis.iter().zip(&cosines).enumerate() {
        spectrum.push(SpectralRow {
            n: i + 1,
            phi,
            cos_phi,
            overlap: data.overlaps[i + 1],
        });
    }
    Ok(RunReport {
        provenance: Provenance::new(config),
        n: params.n(),
        k: params.k(),
        r: params.r(),
        p_closed: success_probability(&params, closed.t1, closed.t2)?,
        p_exact: success_probability(&params, exact.t1, exact.t2)?,
        p_predicted: data.p_succ_predicted,
        p_asymptotic: data.p_succ_asymptotic,
        lambda: data.lambda,
        lambda_numeric: data.lambda_numeric,
        b: data.b,
        lambda_ratio: data.lambda_ratio,
        completeness: data.completeness,
        spectrum,
        queries_closed: query_accounting(params.r(), closed.t1, closed.t2),
        queries_exact: query_accounting(params.r(), exact.t1, exact.t2),
        flags: ValidityFlags {
            regime: params.in_reduced_regime(),
            taylor_expansion: data.lambda_ratio < 0.2,
            asymptotic_reliable: params.r() >= 100,
            completeness: (data.completeness - 1.0).abs() < 1e-10,
        },
        closed,
        exact,
        elapsed_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRow {
    pub t1: usize,
    pub p_marked: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReducedSimulation {
    pub provenance: Provenance,
    pub n: usize,
    pub k: usize,
    pub r: usize,
    pub steps: StepParameters,
    pub p_final: f64,
    /// `(re, im)` of the final state in class order.
    pub final_amplitudes: Vec<[f64; 2]>,
    pub trajectory: Vec<TrajectoryRow>,
}

impl Report for ReducedSimulation {
    fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    fn table(&self) -> CsvTable {
        let mut t = CsvTable::new(&["t1", "p_marked"]);
        for row in &self.trajectory {
            t.push(vec![u(row.t1), f(row.p_marked)]);
        }
        t
    }
}

pub fn simulate_reduced(config: &ExperimentConfig) -> Result<ReducedSimulation> {
    let params = reduced_params(config)?;
    let steps = resolve_steps(config, &params)?;
    let walk = ReducedWalk::new(&params)?;
    let mut state = initial_reduced_state(&params)?;
    let mut trajectory = vec![TrajectoryRow {
        t1: 0,
        p_marked: state.marked_probability(),
    }];
    for t1 in 1..=steps.t1 {
        for op in schedule(1, steps.t2) {
            walk.apply(op, &mut state);
        }
        trajectory.push(TrajectoryRow {
            t1,
            p_marked: state.marked_probability(),
        });
    }
    Ok(ReducedSimulation {
        provenance: Provenance::new(config),
        n: params.n(),
        k: params.k(),
        r: params.r(),
        steps,
        p_final: state.marked_probability(),
        final_amplitudes: state.amplitudes().iter().map(|a| [a.re, a.im]).collect(),
        trajectory,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FullTrajectoryRow {
    pub t1: usize,
    pub p_full: f64,
    /// Absent outside the reduced regime.
    pub p_reduced: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FullSimulationReport {
    pub provenance: Provenance,
    pub n: usize,
    pub k: usize,
    pub r: usize,
    pub steps: StepParameters,
    pub dimension: usize,
    pub colliding_set: Vec<usize>,
    pub p_final: f64,
    pub norm: f64,
    /// Largest deviation of the projected full state from the reduced
    /// state over every operator; absent when no comparison is possible.
    pub max_projection_deviation: Option<f64>,
    pub max_projection_residual: Option<f64>,
    pub trajectory: Vec<FullTrajectoryRow>,
}

impl Report for FullSimulationReport {
    fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    fn table(&self) -> CsvTable {
        let mut t = CsvTable::new(&["t1", "p_full", "p_reduced", "deviation"]);
        for row in &self.trajectory {
            let (red, dev) = match row.p_reduced {
                Some(p) => (f(p), f((row.p_full - p).abs())),
                None => (String::new(), String::new()),
            };
            t.push(vec![u(row.t1), f(row.p_full), red, dev]);
        }
        t
    }
}

pub struct FullSimulation {
    pub report: FullSimulationReport,
    pub state: FullState,
}

pub fn simulate_full(config: &ExperimentConfig, exec: Execution) -> Result<FullSimulation> {
    let params = config.params()?;
    let instance = config.instance()?;
    let steps = resolve_steps(config, &params)?;
    if instance.colliding_set().is_none() {
        return Err(Error::Instance(format!(
            "no {}-collision in the list",
            params.k()
        )));
    }
    let walk = FullWalk::with_cap(&params, &instance, config.cap())?.with_execution(exec);
    let compare = params.in_reduced_regime() && instance.unique_collision().is_ok();
    let reduced = if compare {
        Some(ReducedWalk::new(&params)?)
    } else {
        None
    };
    let mut red = if compare {
        Some(initial_reduced_state(&params)?)
    } else {
        None
    };

    let mut state = walk.uniform_state();
    let mut trajectory = vec![FullTrajectoryRow {
        t1: 0,
        p_full: walk.marked_probability(&state),
        p_reduced: red.as_ref().map(|s| s.marked_probability()),
    }];
    let (mut max_dev, mut max_res) = (0.0f64, 0.0f64);
    if let Some(red) = &red {
        let proj = walk.project_onto_eta(&state)?;
        max_dev = proj.reduced.max_deviation(red);
        max_res = proj.residual;
    }
    let mut blocks_done = 0;
    let ops: Vec<_> = schedule(steps.t1, steps.t2).collect();
    for (i, &op) in ops.iter().enumerate() {
        walk.apply(op, &mut state);
        if let (Some(rw), Some(rs)) = (&reduced, red.as_mut()) {
            rw.apply(op, rs);
            let proj = walk.project_onto_eta(&state)?;
            max_dev = max_dev.max(proj.reduced.max_deviation(rs));
            max_res = max_res.max(proj.residual);
        }
        let block_ends = ops
            .get(i + 1)
            .is_none_or(|next| *next == crate::Operator::PhaseFlip);
        if block_ends {
            blocks_done += 1;
            trajectory.push(FullTrajectoryRow {
                t1: blocks_done,
                p_full: walk.marked_probability(&state),
                p_reduced: red.as_ref().map(|s| s.marked_probability()),
            });
        }
    }
    let report = FullSimulationReport {
        provenance: Provenance::new(config),
        n: params.n(),
        k: params.k(),
        r: params.r(),
        steps,
        dimension: state.len(),
        colliding_set: instance
            .colliding_set()
            .map(<[usize]>::to_vec)
            .unwrap_or_default(),
        p_final: walk.marked_probability(&state),
        norm: state.norm(),
        max_projection_deviation: compare.then_some(max_dev),
        max_projection_residual: compare.then_some(max_res),
        trajectory,
    };
    Ok(FullSimulation { report, state })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepT2Row {
    pub t2: usize,
    pub p_max: f64,
    pub t1_argmax: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepT2Report {
    pub provenance: Provenance,
    pub n: usize,
    pub k: usize,
    pub r: usize,
    pub t1_range: [usize; 2],
    /// `round(pi / phi_k)`.
    pub predicted_t2: usize,
    pub argmax_t2: usize,
    pub argmax_t1: usize,
    pub p_max: f64,
    pub matches_prediction: bool,
    pub rows: Vec<SweepT2Row>,
}

impl Report for SweepT2Report {
    fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    fn table(&self) -> CsvTable {
        let mut t = CsvTable::new(&["t2", "p_max", "t1_argmax"]);
        for row in &self.rows {
            t.push(vec![u(row.t2), f(row.p_max), u(row.t1_argmax)]);
        }
        t
    }
}

/// First index of the maximum (ties go to the earlier entry).
fn argmax(values: impl Iterator<Item = (usize, f64)>) -> Option<(usize, f64)> {
    values.fold(None, |best, (i, p)| match best {
        Some((_, bp)) if bp >= p => best,
        _ => Some((i, p)),
    })
}

/// For every `t2`, the best `t1` in the range. Defaults: `t2` in
/// `[1, 3 t2_closed]`, `t1` in `[1, 4 t1_closed]`.
pub fn sweep_t2(config: &ExperimentConfig, exec: Execution) -> Result<SweepT2Report> {
    let params = reduced_params(config)?;
    let closed = closed_steps(params.r(), params.k());
    let t2s: Vec<usize> = inclusive(config.t2_range.unwrap_or([1, 3 * closed.t2.max(1)]), "t2")?.collect();
    let t1_range = config.t1_range.unwrap_or([1, 4 * closed.t1.max(1)]);
    let t1s = inclusive(t1_range, "t1")?;
    let walk = ReducedWalk::new(&params)?;
    let initial = initial_reduced_state(&params)?;
    let rows = exec.map_slice(&t2s, |&t2| {
        let traj = walk.trajectory(&initial, t2, *t1s.end());
        let (t1_argmax, p_max) = argmax(t1s.clone().map(|t1| (t1, traj[t1]))).expect("nonempty t1 range");
        SweepT2Row { t2, p_max, t1_argmax }
    });
    let best = argmax(rows.iter().enumerate().map(|(i, r)| (i, r.p_max)))
        .expect("nonempty t2 range")
        .0;
    let phi_k = *crate::spectral::eigenphases(&params)?.last().expect("k >= 2");
    let predicted_t2 = (PI / phi_k).round() as usize;
    let argmax_t2 = rows[best].t2;
    Ok(SweepT2Report {
        provenance: Provenance::new(config),
        n: params.n(),
        k: params.k(),
        r: params.r(),
        t1_range,
        predicted_t2,
        argmax_t2,
        argmax_t1: rows[best].t1_argmax,
        p_max: rows[best].p_max,
        matches_prediction: argmax_t2.abs_diff(predicted_t2) <= 1,
        rows,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepT1Report {
    pub provenance: Provenance,
    pub n: usize,
    pub k: usize,
    pub r: usize,
    pub t2: usize,
    /// Diagonalized principal phase of `u^t2 R`.
    pub lambda: f64,
    /// `round(pi / (2 lambda))`.
    pub predicted_t1: usize,
    /// First local maximum of the range, the quarter-period peak.
    pub first_peak_t1: usize,
    pub first_peak_p: f64,
    pub argmax_t1: usize,
    pub p_max: f64,
    pub matches_prediction: bool,
    pub rows: Vec<TrajectoryRow>,
}

impl Report for SweepT1Report {
    fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    fn table(&self) -> CsvTable {
        let mut t = CsvTable::new(&["t1", "p_marked"]);
        for row in &self.rows {
            t.push(vec![u(row.t1), f(row.p_marked)]);
        }
        t
    }
}

/// Index into `values` of the first entry not smaller than either neighbour.
fn first_local_max(values: &[f64]) -> usize {
    (0..values.len())
        .find(|&i| {
            let left = i == 0 || values[i] >= values[i - 1];
            let right = i + 1 == values.len() || values[i] >= values[i + 1];
            left && right
        })
        .unwrap_or(0)
}

/// `p(t1)` at a fixed `t2` (default: the exact-mode `t2`).
pub fn sweep_t1(config: &ExperimentConfig) -> Result<SweepT1Report> {
    let params = reduced_params(config)?;
    let t2 = match config.t2 {
        Some(t2) => t2,
        None => step_parameters(&params, StepMode::Exact)?.t2,
    };
    let lambda = numeric_principal_phase(&params, t2)?.lambda;
    let predicted_t1 = (PI / (2.0 * lambda)).round() as usize;
    let closed = closed_steps(params.r(), params.k());
    let range = config
        .t1_range
        .unwrap_or([1, 4 * closed.t1.max(predicted_t1).max(1)]);
    let t1s = inclusive(range, "t1")?;
    let walk = ReducedWalk::new(&params)?;
    let traj = walk.trajectory(&initial_reduced_state(&params)?, t2, *t1s.end());
    let rows: Vec<TrajectoryRow> = t1s
        .map(|t1| TrajectoryRow {
            t1,
            p_marked: traj[t1],
        })
        .collect();
    let probs: Vec<f64> = rows.iter().map(|r| r.p_marked).collect();
    let first = first_local_max(&probs);
    let best = argmax(probs.iter().copied().enumerate())
        .expect("nonempty t1 range")
        .0;
    Ok(SweepT1Report {
        provenance: Provenance::new(config),
        n: params.n(),
        k: params.k(),
        r: params.r(),
        t2,
        lambda,
        predicted_t1,
        first_peak_t1: rows[first].t1,
        first_peak_p: rows[first].p_marked,
        argmax_t1: rows[best].t1,
        p_max: rows[best].p_marked,
        matches_prediction: rows[first].t1.abs_diff(predicted_t1) <= 1,
        rows,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub n: usize,
    pub r: usize,
    pub p_exact: f64,
    pub p_asymptotic: f64,
    /// `1 - p_exact`.
    pub gap: f64,
    /// `r^(1/k) (1 - p_exact)`.
    pub scaled_gap: f64,
    pub t1: usize,
    pub t2: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub provenance: Provenance,
    pub k: usize,
    pub mode: StepMode,
    /// `k cot^2((pi/2) sqrt((k-1)/k))`.
    pub theoretical_constant: f64,
    /// Scaled gap at the largest `N` of the ladder.
    pub fitted_constant: Option<f64>,
    pub relative_error: Option<f64>,
    pub gap_decreasing: bool,
    pub rows: Vec<ConvergenceRow>,
}

impl Report for ConvergenceReport {
    fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    fn table(&self) -> CsvTable {
        let mut t = CsvTable::new(&[
            "n",
            "r",
            "p_exact",
            "p_asymptotic",
            "gap",
            "scaled_gap",
            "t1",
            "t2",
        ]);
        for row in &self.rows {
            t.push(vec![
                u(row.n),
                u(row.r),
                f(row.p_exact),
                f(row.p_asymptotic),
                f(row.gap),
                f(row.scaled_gap),
                u(row.t1),
                u(row.t2),
            ]);
        }
        t
    }
}

pub const DEFAULT_LADDER: [usize; 4] = [1_000, 10_000, 100_000, 1_000_000];

/// Exact success probability along a ladder of `N` (default mode: exact).
pub fn convergence(config: &ExperimentConfig, exec: Execution) -> Result<ConvergenceReport> {
    let k = config.require_k()?;
    let mode = config.mode.unwrap_or(StepMode::Exact);
    let ladder = config.ladder.clone().unwrap_or_else(|| DEFAULT_LADDER.to_vec());
    let rows = exec
        .map_slice(&ladder, |&n| -> Result<ConvergenceRow> {
            let params = ProblemParams::new(n, k)?;
            params.check_reduced_regime()?;
            let steps = step_parameters(&params, mode)?;
            let p_exact = success_probability(&params, steps.t1, steps.t2)?;
            let gap = 1.0 - p_exact;
            Ok(ConvergenceRow {
                n,
                r: params.r(),
                p_exact,
                p_asymptotic: crate::spectral::asymptotic_success(&params),
                gap,
                scaled_gap: (params.r() as f64).powf(1.0 / k as f64) * gap,
                t1: steps.t1,
                t2: steps.t2,
            })
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let theoretical_constant = asymptotic_gap_constant(k);
    let fitted_constant = rows.iter().max_by_key(|r| r.n).map(|r| r.scaled_gap);
    let mut by_n: Vec<&ConvergenceRow> = rows.iter().collect();
    by_n.sort_by_key(|r| r.n);
    Ok(ConvergenceReport {
        provenance: Provenance::new(config),
        k,
        mode,
        theoretical_constant,
        relative_error: fitted_constant.map(|c| (c - theoretical_constant).abs() / theoretical_constant),
        fitted_constant,
        gap_decreasing: by_n.windows(2).all(|w| w[1].gap <= w[0].gap),
        rows,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub suite: String,
    pub name: String,
    pub tolerance: f64,
    pub measured: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub provenance: Provenance,
    pub skipped: Vec<String>,
    pub checks: Vec<CheckOutcome>,
    pub all_passed: bool,
}

impl Report for VerifyReport {
    fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    fn table(&self) -> CsvTable {
        let mut t = CsvTable::new(&["suite", "name", "tolerance", "measured", "passed"]);
        for c in &self.checks {
            t.push(vec![
                c.suite.clone(),
                c.name.clone(),
                f(c.tolerance),
                f(c.measured),
                u(c.passed),
            ]);
        }
        t
    }

    fn passed(&self) -> bool {
        self.all_passed
    }
}

pub const VERIFY_SUITES: [&str; 3] = ["reduced", "full", "microsim"];

struct Checks {
    override_tol: Option<f64>,
    out: Vec<CheckOutcome>,
}

impl Checks {
    fn record(&mut self, suite: &str, name: String, default_tol: f64, measured: f64) {
        let tolerance = self.override_tol.unwrap_or(default_tol);
        self.out.push(CheckOutcome {
            suite: suite.into(),
            name,
            tolerance,
            passed: measured <= tolerance,
            measured,
        });
    }
}

/// Runs the built-in cross-checks. `--tolerance` replaces every default
/// tolerance; skipped suites are listed in the report.
pub fn verify(config: &ExperimentConfig, exec: Execution) -> Result<VerifyReport> {
    if let Some(unknown) = config
        .skip
        .iter()
        .flatten()
        .find(|s| !VERIFY_SUITES.contains(&s.as_str()))
    {
        return Err(Error::Config(format!(
            "unknown suite `{unknown}` (reduced|full|microsim)"
        )));
    }
    let mut checks = Checks {
        override_tol: config.tolerance,
        out: Vec::new(),
    };

    if !config.skips("reduced") {
        for (n, k) in [(8, 2), (20, 3), (50, 4), (200, 2), (500, 3), (10_000, 2)] {
            let params = ProblemParams::with_r(n, k, regime_r(n, k)?)?;
            let tag = format!("N={n},k={k},r={}", params.r());
            checks.record(
                "reduced",
                format!("involution[{tag}]"),
                1e-12,
                involution_deviation(&params)?,
            );
            checks.record(
                "reduced",
                format!("spectrum[{tag}]"),
                1e-10,
                spectrum_deviation(&params)?,
            );
            checks.record(
                "reduced",
                format!("overlaps[{tag}]"),
                1e-9,
                overlap_deviation(&params)?,
            );
            let completeness = crate::spectral::completeness_sum(&crate::spectral::overlaps_k0(&params)?);
            checks.record(
                "reduced",
                format!("completeness[{tag}]"),
                1e-10,
                (completeness - 1.0).abs(),
            );
        }
        let small = ProblemParams::with_r(8, 2, 4)?;
        let cos = eigenphase_cosines(&small)?;
        let o = crate::spectral::overlaps_k0(&small)?;
        let expected = [
            cos[0] - 0.2,
            cos[1] + 0.4,
            o[0] - (3.0f64 / 14.0).sqrt(),
            o[1] - 0.5,
            o[2] - (1.0f64 / 7.0).sqrt(),
        ];
        checks.record(
            "reduced",
            "small_case[N=8,k=2,r=4]".into(),
            1e-12,
            expected.iter().fold(0.0, |m, d| m.max(d.abs())),
        );
    }

    if !config.skips("full") {
        for (n, k) in [(5, 2), (6, 2), (7, 2), (8, 2), (8, 3)] {
            let params = ProblemParams::with_r(n, k, regime_r(n, k)?)?;
            let tag = format!("N={n},k={k},r={}", params.r());
            let positions: Vec<usize> = (0..k).map(|i| n - 2 * i).collect();
            let instance = KDistinctnessInstance::with_collision(n, &positions)?;
            let d = reduced_full_diagram(&params, &instance, 2, 2, exec)?;
            checks.record(
                "full",
                format!("commuting_diagram[{tag}]"),
                1e-10,
                d.max_deviation,
            );
            checks.record("full", format!("eta_residual[{tag}]"), 1e-10, d.max_residual);
            checks.record(
                "full",
                format!("edge_cover_defects[{tag}]"),
                0.0,
                edge_cover_check(&params)? as f64,
            );
        }
    }

    if !config.skips("microsim") {
        let params = ProblemParams::with_r(5, 2, 3)?;
        let instance = KDistinctnessInstance::new(vec![2, 4, 1, 4, 3], 2)?;
        let m = microsim_check(&params, &instance, 4, 1, 2, config.cap().max(1 << 24), exec)?;
        checks.record(
            "microsim",
            "marginal[N=5,k=2,r=3,M=4]".into(),
            1e-10,
            m.max_marginal_deviation,
        );
        checks.record(
            "microsim",
            "slot_violations[N=5,k=2,r=3,M=4]".into(),
            0.0,
            m.audit.violations as f64,
        );
    }

    let all_passed = checks.out.iter().all(|c| c.passed);
    Ok(VerifyReport {
        provenance: Provenance::new(config),
        skipped: config.skip.clone().unwrap_or_default(),
        checks: checks.out,
        all_passed,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleReport {
    pub provenance: Provenance,
    pub n: usize,
    pub k: usize,
    pub r: usize,
    pub steps: StepParameters,
    pub seed: u64,
    pub colliding_set: Vec<usize>,
    /// Marked-vertex mass of the final state.
    pub exact: f64,
    /// Absent when no samples were requested.
    pub summary: Option<SampleSummary>,
    /// `|z| <= 3`, or true without samples.
    pub within_three_sigma: bool,
}

impl Report for SampleReport {
    fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    fn table(&self) -> CsvTable {
        let mut t = CsvTable::new(&[
            "n",
            "k",
            "r",
            "t1",
            "t2",
            "seed",
            "exact",
            "samples",
            "successes",
            "rate",
            "std_error",
            "z_score",
        ]);
        let s = self.summary.clone().unwrap_or(SampleSummary {
            samples: 0,
            successes: 0,
            rate: 0.0,
            std_error: 0.0,
            exact: self.exact,
            z_score: 0.0,
        });
        t.push(vec![
            u(self.n),
            u(self.k),
            u(self.r),
            u(self.steps.t1),
            u(self.steps.t2),
            u(self.seed),
            f(self.exact),
            u(s.samples),
            u(s.successes),
            f(s.rate),
            f(s.std_error),
            f(s.z_score),
        ]);
        t
    }
}

pub const DEFAULT_SAMPLES: usize = 1000;

/// Runs the full walk, then measures it `samples` times with the seed.
pub fn sample(config: &ExperimentConfig, exec: Execution) -> Result<SampleReport> {
    let params = config.params()?;
    let instance = config.instance()?;
    let steps = resolve_steps(config, &params)?;
    let walk = FullWalk::with_cap(&params, &instance, config.cap())?.with_execution(exec);
    let run = walk.run(steps.t1, steps.t2)?;
    let samples = config.samples.unwrap_or(DEFAULT_SAMPLES);
    let seed = config.seed();
    let summary = (samples > 0).then(|| {
        sample_many(
            walk.table(),
            &run.state,
            &instance,
            run.marked_probability,
            samples,
            seed,
            exec,
        )
    });
    Ok(SampleReport {
        provenance: Provenance::new(config),
        n: params.n(),
        k: params.k(),
        r: params.r(),
        steps,
        seed,
        colliding_set: instance
            .colliding_set()
            .map(<[usize]>::to_vec)
            .unwrap_or_default(),
        exact: run.marked_probability,
        within_three_sigma: summary.as_ref().is_none_or(|s| s.z_score.abs() <= 3.0),
        summary,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MicrosimReport {
    pub provenance: Provenance,
    pub n: usize,
    pub k: usize,
    pub r: usize,
    pub m: u64,
    pub steps: StepParameters,
    pub dimension: usize,
    pub p_two_register: f64,
    pub p_full: f64,
    pub max_marginal_deviation: f64,
    pub tolerance: f64,
    pub audit_terms: usize,
    pub audit_violations: usize,
    pub passed: bool,
}

impl Report for MicrosimReport {
    fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    fn table(&self) -> CsvTable {
        let mut t = CsvTable::new(&[
            "n",
            "k",
            "r",
            "m",
            "t1",
            "t2",
            "dimension",
            "p_two_register",
            "p_full",
            "max_marginal_deviation",
            "audit_terms",
            "audit_violations",
            "passed",
        ]);
        t.push(vec![
            u(self.n),
            u(self.k),
            u(self.r),
            u(self.m),
            u(self.steps.t1),
            u(self.steps.t2),
            u(self.dimension),
            f(self.p_two_register),
            f(self.p_full),
            f(self.max_marginal_deviation),
            u(self.audit_terms),
            u(self.audit_violations),
            u(self.passed),
        ]);
        t
    }

    fn passed(&self) -> bool {
        self.passed
    }
}

/// Two-register run compared against the one-register walk. `M` defaults
/// to the largest list value.
pub fn microsim(config: &ExperimentConfig, exec: Execution) -> Result<MicrosimReport> {
    let params = config.params()?;
    let instance = config.instance()?;
    let m = config.m.unwrap_or_else(|| instance.max_value());
    let steps = resolve_steps(config, &params)?;
    let check = microsim_check(&params, &instance, m, steps.t1, steps.t2, config.cap(), exec)?;
    let tolerance = config.tolerance.unwrap_or(1e-10);
    Ok(MicrosimReport {
        provenance: Provenance::new(config),
        n: params.n(),
        k: params.k(),
        r: params.r(),
        m,
        steps,
        dimension: check.dimension,
        p_two_register: check.p_two_register,
        p_full: check.p_full,
        max_marginal_deviation: check.max_marginal_deviation,
        tolerance,
        audit_terms: check.audit.terms_checked,
        audit_violations: check.audit.violations,
        passed: check.max_marginal_deviation <= tolerance && check.audit.violations == 0,
    })
}
