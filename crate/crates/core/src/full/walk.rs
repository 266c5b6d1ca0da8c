use num_complex::Complex64;

use super::state::FullState;
use super::tessellation::{build_tessellations, Partition, TessellationCover};
use super::vertex::{elements_of, mask_of, VertexTable};
use super::DEFAULT_CAP;
use crate::combinatorics::{KDistinctnessInstance, ProblemParams};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::reduced::ReducedState;
use crate::{schedule, Operator};

/// Reflection about the uniform vector of every polygon.
pub fn apply_polygon_reflection(state: &mut FullState, polygons: &Partition, exec: Execution) {
    polygons.reflect(state.amplitudes_mut(), exec);
}

/// Negates the amplitude of every `(S, y)` whose `S` holds a `k`-collision.
pub fn apply_phase_flip(state: &mut FullState, table: &VertexTable, instance: &KDistinctnessInstance) {
    let marked = marked_subsets(table, instance);
    let outside = table.outside();
    for (i, a) in state.amplitudes_mut().iter_mut().enumerate() {
        if marked[i / outside] {
            *a = -*a;
        }
    }
}

fn marked_subsets(table: &VertexTable, instance: &KDistinctnessInstance) -> Vec<bool> {
    (0..table.subset_count())
        .map(|rank| {
            let elems: Vec<usize> = elements_of(table.subset_mask(rank)).collect();
            instance.has_collision_within(&elems)
        })
        .collect()
}

/// The register-free walk on one instance.
#[derive(Clone, Debug)]
pub struct FullWalk {
    params: ProblemParams,
    instance: KDistinctnessInstance,
    table: VertexTable,
    cover: TessellationCover,
    marked: Vec<bool>,
    exec: Execution,
}

/// Final state and the probability mass on marked vertices.
#[derive(Clone, Debug)]
pub struct FullRun {
    pub state: FullState,
    pub marked_probability: f64,
}

/// Coordinates in the class basis plus the norm of what lies outside it.
#[derive(Clone, Debug)]
pub struct EtaProjection {
    pub reduced: ReducedState,
    pub residual: f64,
}

impl FullWalk {
    pub fn new(params: &ProblemParams, instance: &KDistinctnessInstance) -> Result<Self> {
        Self::with_cap(params, instance, DEFAULT_CAP)
    }

    pub fn with_cap(params: &ProblemParams, instance: &KDistinctnessInstance, cap: u128) -> Result<Self> {
        if instance.len() != params.n() {
            return Err(Error::Instance(format!(
                "list has {} entries but N = {}",
                instance.len(),
                params.n()
            )));
        }
        if instance.k() != params.k() {
            return Err(Error::Instance(format!(
                "instance searches for k = {} but params have k = {}",
                instance.k(),
                params.k()
            )));
        }
        let table = VertexTable::new(params, cap)?;
        let cover = build_tessellations(&table);
        let marked = marked_subsets(&table, instance);
        Ok(Self {
            params: *params,
            instance: instance.clone(),
            table,
            cover,
            marked,
            exec: Execution::default(),
        })
    }

    pub fn with_execution(mut self, exec: Execution) -> Self {
        self.exec = exec;
        self
    }

    pub fn params(&self) -> &ProblemParams {
        &self.params
    }

    pub fn instance(&self) -> &KDistinctnessInstance {
        &self.instance
    }

    pub fn table(&self) -> &VertexTable {
        &self.table
    }

    pub fn cover(&self) -> &TessellationCover {
        &self.cover
    }

    pub fn is_marked(&self, vertex: usize) -> bool {
        self.marked[vertex / self.table.outside()]
    }

    pub fn uniform_state(&self) -> FullState {
        FullState::uniform(self.table.len())
    }

    pub fn apply(&self, op: Operator, state: &mut FullState) {
        match op {
            Operator::Alpha => self.cover.alpha.reflect(state.amplitudes_mut(), self.exec),
            Operator::Beta => self.cover.beta.reflect(state.amplitudes_mut(), self.exec),
            Operator::PhaseFlip => {
                let outside = self.table.outside();
                let marked = &self.marked;
                self.exec.update_each(state.amplitudes_mut(), |i, a| {
                    if marked[i / outside] {
                        *a = -*a;
                    }
                });
            }
        }
    }

    pub fn marked_probability(&self, state: &FullState) -> f64 {
        let amps = state.amplitudes();
        self.exec.sum_range(amps.len(), |i| {
            if self.is_marked(i) {
                amps[i].norm_sqr()
            } else {
                0.0
            }
        })
    }

    /// Runs `((U_beta U_alpha)^t2 R)^t1` from the uniform state, calling
    /// `observe` after every operator.
    pub fn run_observed<F>(&self, t1: usize, t2: usize, mut observe: F) -> Result<FullRun>
    where
        F: FnMut(Operator, &FullState),
    {
        if self.instance.colliding_set().is_none() {
            return Err(Error::Instance(format!(
                "no {}-collision in the list; nothing to find",
                self.params.k()
            )));
        }
        let mut state = self.uniform_state();
        for op in schedule(t1, t2) {
            self.apply(op, &mut state);
            observe(op, &state);
        }
        let marked_probability = self.marked_probability(&state);
        Ok(FullRun {
            state,
            marked_probability,
        })
    }

    pub fn run(&self, t1: usize, t2: usize) -> Result<FullRun> {
        self.run_observed(t1, t2, |_, _| {})
    }

    /// `<eta_l^j|state>` for the unique colliding set `K`.
    pub fn project_onto_eta(&self, state: &FullState) -> Result<EtaProjection> {
        let kset = self.instance.unique_collision()?;
        let kmask = mask_of(kset);
        let k = self.params.k();
        let classes: Vec<usize> = (0..self.table.len())
            .map(|i| {
                let (s, y) = self.table.parts(i);
                2 * (s & kmask).count_ones() as usize + (kmask >> (y - 1) & 1) as usize
            })
            .collect();
        let mut sums = vec![Complex64::new(0.0, 0.0); 2 * k + 1];
        let mut counts = vec![0usize; 2 * k + 1];
        for (a, &c) in state.amplitudes().iter().zip(&classes) {
            sums[c] += a;
            counts[c] += 1;
        }
        let coords: Vec<Complex64> = sums
            .iter()
            .zip(&counts)
            .map(|(s, &c)| if c == 0 { *s } else { s / (c as f64).sqrt() })
            .collect();
        let residual = state
            .amplitudes()
            .iter()
            .zip(&classes)
            .map(|(a, &c)| (a - coords[c] / (counts[c] as f64).sqrt()).norm_sqr())
            .sum::<f64>()
            .sqrt();
        Ok(EtaProjection {
            reduced: ReducedState::from_amplitudes(k, coords),
            residual,
        })
    }
}

/// Builds the walk and runs it once.
pub fn run_full_algorithm(
    params: &ProblemParams,
    instance: &KDistinctnessInstance,
    t1: usize,
    t2: usize,
) -> Result<FullRun> {
    FullWalk::new(params, instance)?.run(t1, t2)
}

pub fn project_onto_eta(walk: &FullWalk, state: &FullState) -> Result<EtaProjection> {
    walk.project_onto_eta(state)
}
