//! Measuring the vertex register.
//!
//! Draws are split into fixed blocks of [`BLOCK`] samples; block `b` uses
//! the ChaCha8 stream `b` of the seed. Results are therefore identical for
//! sequential and parallel execution and for any thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::state::FullState;
use super::vertex::{elements_of, Vertex, VertexTable};
use crate::combinatorics::{classical_k_collision, KDistinctnessInstance};
use crate::exec::Execution;

const BLOCK: usize = 4096;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Measurement {
    pub index: usize,
    pub vertex: Vertex,
    /// Whether the classical check finds `k` equal values inside `S`.
    pub success: bool,
}

/// Cumulative distribution over vertex indices.
#[derive(Clone, Debug)]
pub struct MeasurementSampler {
    cumulative: Vec<f64>,
}

impl MeasurementSampler {
    pub fn new(state: &FullState) -> Self {
        let mut acc = 0.0;
        let cumulative = state
            .amplitudes()
            .iter()
            .map(|a| {
                acc += a.norm_sqr();
                acc
            })
            .collect();
        Self { cumulative }
    }

    pub fn draw<R: Rng>(&self, rng: &mut R) -> usize {
        let total = *self.cumulative.last().unwrap_or(&0.0);
        let u = rng.random::<f64>() * total;
        self.cumulative
            .partition_point(|&c| c <= u)
            .min(self.cumulative.len() - 1)
    }
}

fn block_rng(seed: u64, block: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(block as u64);
    rng
}

fn subset_succeeds(table: &VertexTable, index: usize, instance: &KDistinctnessInstance) -> bool {
    let (s, _) = table.parts(index);
    let values: Vec<u64> = elements_of(s).map(|e| instance.value(e)).collect();
    classical_k_collision(&values, instance.k()).is_some()
}

/// One seeded measurement followed by the classical check on `S`.
pub fn sample_measurement(
    table: &VertexTable,
    state: &FullState,
    seed: u64,
    instance: &KDistinctnessInstance,
) -> Measurement {
    let sampler = MeasurementSampler::new(state);
    let index = sampler.draw(&mut block_rng(seed, 0));
    Measurement {
        index,
        vertex: table.vertex(index),
        success: subset_succeeds(table, index, instance),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleSummary {
    pub samples: usize,
    pub successes: usize,
    pub rate: f64,
    /// Binomial standard deviation of the rate under `exact`.
    pub std_error: f64,
    pub exact: f64,
    /// `(rate - exact) / std_error`; 0 when there are no samples.
    pub z_score: f64,
}

/// Draws `samples` measurements and counts classical successes.
pub fn sample_many(
    table: &VertexTable,
    state: &FullState,
    instance: &KDistinctnessInstance,
    exact: f64,
    samples: usize,
    seed: u64,
    exec: Execution,
) -> SampleSummary {
    let sampler = MeasurementSampler::new(state);
    let success_by_subset: Vec<bool> = (0..table.subset_count())
        .map(|rank| subset_succeeds(table, rank * table.outside(), instance))
        .collect();
    let blocks = samples.div_ceil(BLOCK);
    let counts = exec.map_range(blocks, |b| {
        let mut rng = block_rng(seed, b);
        let take = BLOCK.min(samples - b * BLOCK);
        (0..take)
            .filter(|_| success_by_subset[sampler.draw(&mut rng) / table.outside()])
            .count()
    });
    let successes: usize = counts.into_iter().sum();
    let (rate, std_error) = if samples == 0 {
        (0.0, 0.0)
    } else {
        (
            successes as f64 / samples as f64,
            (exact * (1.0 - exact) / samples as f64).sqrt(),
        )
    };
    let z_score = if std_error > 0.0 {
        (rate - exact) / std_error
    } else {
        0.0
    };
    SampleSummary {
        samples,
        successes,
        rate,
        std_error,
        exact,
        z_score,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combinatorics::ProblemParams;
    use crate::full::FullWalk;

    fn walk() -> FullWalk {
        let params = ProblemParams::with_r(8, 2, 4).unwrap();
        let inst = KDistinctnessInstance::with_collision(8, &[2, 7]).unwrap();
        FullWalk::new(&params, &inst).unwrap()
    }

    #[test]
    fn basis_state_always_measures_its_vertex() {
        let w = walk();
        let idx = 123;
        let state = FullState::basis(w.table().len(), idx);
        for seed in 0..20 {
            let m = sample_measurement(w.table(), &state, seed, w.instance());
            assert_eq!(m.index, idx);
            assert_eq!(m.vertex, w.table().vertex(idx));
        }
    }

    #[test]
    fn uniform_state_success_rate() {
        let w = walk();
        let state = w.uniform_state();
        let exact = 60.0 / 280.0;
        let s = sample_many(
            w.table(),
            &state,
            w.instance(),
            exact,
            100_000,
            7,
            Execution::default(),
        );
        assert!(s.z_score.abs() < 3.0, "{s:?}");
    }

    #[test]
    fn seeds_are_deterministic_and_distinct() {
        let w = walk();
        let state = w.run(1, 1).unwrap().state;
        let a = sample_many(
            w.table(),
            &state,
            w.instance(),
            0.5,
            20_000,
            1,
            Execution::Sequential,
        );
        let b = sample_many(
            w.table(),
            &state,
            w.instance(),
            0.5,
            20_000,
            1,
            Execution::Parallel,
        );
        let c = sample_many(
            w.table(),
            &state,
            w.instance(),
            0.5,
            20_000,
            2,
            Execution::Sequential,
        );
        assert_eq!(a, b);
        assert_ne!(a.successes, c.successes);
        let draws = |seed| {
            (0..5)
                .map(|_| sample_measurement(w.table(), &state, seed, w.instance()).index)
                .collect::<Vec<_>>()
        };
        assert_eq!(draws(11), draws(11));
    }

    #[test]
    fn zero_samples() {
        let w = walk();
        let s = sample_many(
            w.table(),
            &w.uniform_state(),
            w.instance(),
            0.3,
            0,
            0,
            Execution::default(),
        );
        assert_eq!((s.samples, s.successes, s.z_score), (0, 0, 0.0));
    }
}
