//! The two-register algorithm: vertex register `|S, y>` plus `r + 1` value
//! slots `|x'_1, ..., x'_{r+1}>`.
//!
//! Slots hold `ceil(log2(M + 1))`-bit words (0 means "not queried") and
//! queries XOR list values into them. Slots `1..r` follow the sorted
//! elements of `S`; slot `r + 1` belongs to `y`. The extended beta
//! reflection moves the slot contents along with their indices: for the
//! member `(T \ {y'}, y')` of a beta polygon, slot `m` holds the value
//! attached to the `m`-th smallest element of `T \ {y'}` and slot `r + 1`
//! the value attached to `y'`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::vertex::{elements_of, VertexTable};
use super::DEFAULT_CAP;
use crate::combinatorics::{vertex_count, KDistinctnessInstance, ProblemParams};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::schedule;
use crate::Operator;

/// Amplitudes indexed by `vertex * slot_space + slot_code`.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoRegisterState {
    amplitudes: Vec<Complex64>,
}

impl TwoRegisterState {
    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// Tally of the slot-correspondence checks.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorrespondenceAudit {
    /// Basis terms with nonzero amplitude that were inspected.
    pub terms_checked: usize,
    pub violations: usize,
}

impl CorrespondenceAudit {
    fn absorb(&mut self, other: CorrespondenceAudit) {
        self.terms_checked += other.terms_checked;
        self.violations += other.violations;
    }
}

#[derive(Clone, Debug)]
pub struct MicrosimRun {
    pub state: TwoRegisterState,
    /// `sum_slots |a|^2` per vertex, in canonical vertex order.
    pub marginal: Vec<f64>,
    pub marked_probability: f64,
    pub audit: CorrespondenceAudit,
}

/// What the last slot must contain at an audit point.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum LastSlot {
    Empty,
    QueriedY,
}

const NONZERO: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct TwoRegisterSim {
    instance: KDistinctnessInstance,
    table: VertexTable,
    marked: Vec<bool>,
    bits: u32,
    slots: usize,
    slot_space: usize,
    exec: Execution,
}

impl TwoRegisterSim {
    /// `m` bounds the list values, which must lie in `1..=m`.
    pub fn new(params: &ProblemParams, instance: &KDistinctnessInstance, m: u64) -> Result<Self> {
        Self::with_cap(params, instance, m, DEFAULT_CAP)
    }

    pub fn with_cap(
        params: &ProblemParams,
        instance: &KDistinctnessInstance,
        m: u64,
        cap: u128,
    ) -> Result<Self> {
        if instance.len() != params.n() || instance.k() != params.k() {
            return Err(Error::Instance("instance does not match N and k".into()));
        }
        if m == 0 || instance.values().iter().any(|&v| v == 0 || v > m) {
            return Err(Error::Instance(format!("every list value must lie in 1..={m}")));
        }
        instance.unique_collision()?;
        let bits = 64 - m.leading_zeros();
        let slots = params.r() + 1;
        let slot_space = 1u128
            .checked_shl(bits * slots as u32)
            .filter(|&s| s <= cap)
            .ok_or(Error::CapExceeded {
                required: u128::MAX,
                cap,
            })?;
        let required = vertex_count(params)?
            .checked_mul(slot_space)
            .ok_or(Error::CapExceeded {
                required: u128::MAX,
                cap,
            })?;
        if required > cap {
            return Err(Error::CapExceeded { required, cap });
        }
        let table = VertexTable::new(params, cap)?;
        let marked = (0..table.subset_count())
            .map(|rank| {
                let elems: Vec<usize> = elements_of(table.subset_mask(rank)).collect();
                instance.has_collision_within(&elems)
            })
            .collect();
        Ok(Self {
            instance: instance.clone(),
            table,
            marked,
            bits,
            slots,
            slot_space: slot_space as usize,
            exec: Execution::default(),
        })
    }

    pub fn with_execution(mut self, exec: Execution) -> Self {
        self.exec = exec;
        self
    }

    pub fn dimension(&self) -> usize {
        self.table.len() * self.slot_space
    }

    pub fn table(&self) -> &VertexTable {
        &self.table
    }

    fn decode_slots(&self, code: usize) -> Vec<u64> {
        let mask = (1usize << self.bits) - 1;
        (0..self.slots)
            .map(|m| ((code >> (self.bits as usize * (self.slots - 1 - m))) & mask) as u64)
            .collect()
    }

    fn encode_slots(&self, slots: &[u64]) -> usize {
        slots
            .iter()
            .fold(0usize, |acc, &s| (acc << self.bits) | s as usize)
    }

    fn split(&self, index: usize) -> (usize, usize) {
        (index / self.slot_space, index % self.slot_space)
    }

    /// Uniform over vertices, all slots empty.
    pub fn initial_state(&self) -> TwoRegisterState {
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); self.dimension()];
        let a = Complex64::new(1.0 / (self.table.len() as f64).sqrt(), 0.0);
        for v in 0..self.table.len() {
            amplitudes[v * self.slot_space] = a;
        }
        TwoRegisterState { amplitudes }
    }

    /// Applies a self-inverse basis permutation.
    fn permute<F>(&self, state: &mut TwoRegisterState, image: F)
    where
        F: Fn(usize) -> usize + Sync + Send,
    {
        let old = &state.amplitudes;
        let new = self.exec.map_range(old.len(), |i| old[image(i)]);
        state.amplitudes = new;
    }

    /// XORs `x_i` into slot `m` for the `m`-th smallest `i ∈ S` (`r` queries).
    pub fn setup_query(&self, state: &mut TwoRegisterState) {
        self.permute(state, |i| {
            let (v, code) = self.split(i);
            let (s, _) = self.table.parts(v);
            let mut slots = self.decode_slots(code);
            for (slot, e) in slots.iter_mut().zip(elements_of(s)) {
                *slot ^= self.instance.value(e);
            }
            v * self.slot_space + self.encode_slots(&slots)
        });
    }

    /// `O`: XORs `x_y` into the last slot.
    pub fn oracle(&self, state: &mut TwoRegisterState) {
        self.permute(state, |i| {
            let (v, code) = self.split(i);
            let (_, y) = self.table.parts(v);
            v * self.slot_space + (code ^ self.instance.value(y) as usize)
        });
    }

    pub fn phase_flip(&self, state: &mut TwoRegisterState) {
        let per_subset = self.table.outside() * self.slot_space;
        let marked = &self.marked;
        self.exec.update_each(&mut state.amplitudes, |i, a| {
            if marked[i / per_subset] {
                *a = -*a;
            }
        });
    }

    /// `U_alpha ⊗ I`: reflect over `y` for fixed `S` and slot contents.
    pub fn alpha(&self, state: &mut TwoRegisterState) {
        let outside = self.table.outside();
        let old = &state.amplitudes;
        let new = self.exec.map_range(old.len(), |i| {
            let (v, code) = self.split(i);
            let base = v - v % outside;
            let sum: Complex64 = (0..outside)
                .map(|p| old[(base + p) * self.slot_space + code])
                .sum();
            sum * (2.0 / outside as f64) - old[i]
        });
        state.amplitudes = new;
    }

    /// Indices of the extended beta polygon containing basis index `i`.
    fn beta_members(&self, i: usize) -> Vec<usize> {
        let (v, code) = self.split(i);
        let (s, y) = self.table.parts(v);
        let slots = self.decode_slots(code);
        let union = s | 1 << (y - 1);
        // value attached to each element of S ∪ {y}
        let attached = |e: usize| -> u64 {
            if e == y {
                slots[self.slots - 1]
            } else {
                let pos = (s & ((1u64 << (e - 1)) - 1)).count_ones() as usize;
                slots[pos]
            }
        };
        elements_of(union)
            .map(|y2| {
                let s2 = union & !(1u64 << (y2 - 1));
                let mut moved: Vec<u64> = elements_of(s2).map(attached).collect();
                moved.push(attached(y2));
                self.table.index_from_parts(s2, y2) * self.slot_space + self.encode_slots(&moved)
            })
            .collect()
    }

    /// `U_beta^EXT`.
    pub fn beta_ext(&self, state: &mut TwoRegisterState) {
        let old = &state.amplitudes;
        let new = self.exec.map_range(old.len(), |i| {
            let members = self.beta_members(i);
            let sum: Complex64 = members.iter().map(|&j| old[j]).sum();
            sum * (2.0 / members.len() as f64) - old[i]
        });
        state.amplitudes = new;
    }

    /// Checks every nonzero term: slots `1..r` equal the list values of `S`
    /// in order; the last slot is empty or holds `x_y`.
    fn audit(&self, state: &TwoRegisterState, last: LastSlot) -> CorrespondenceAudit {
        let flags = self.exec.map_range(state.amplitudes.len(), |i| {
            if state.amplitudes[i].norm() <= NONZERO {
                return None;
            }
            let (v, code) = self.split(i);
            let (s, y) = self.table.parts(v);
            let slots = self.decode_slots(code);
            let body_ok = elements_of(s)
                .zip(&slots)
                .all(|(e, &x)| self.instance.value(e) == x);
            let expected_last = match last {
                LastSlot::Empty => 0,
                LastSlot::QueriedY => self.instance.value(y),
            };
            Some(body_ok && slots[self.slots - 1] == expected_last)
        });
        flags
            .into_iter()
            .flatten()
            .fold(CorrespondenceAudit::default(), |mut acc, ok| {
                acc.terms_checked += 1;
                acc.violations += usize::from(!ok);
                acc
            })
    }

    /// First-register distribution.
    pub fn marginal(&self, state: &TwoRegisterState) -> Vec<f64> {
        self.exec.map_range(self.table.len(), |v| {
            state.amplitudes[v * self.slot_space..(v + 1) * self.slot_space]
                .iter()
                .map(|a| a.norm_sqr())
                .sum()
        })
    }

    /// Initial setup, then `t1` main blocks of `R` and `t2` subroutine
    /// calls `(U_alpha, O, U_beta^EXT, O)`, auditing the slot
    /// correspondence after the setup and around every extended beta step.
    pub fn run(&self, t1: usize, t2: usize) -> MicrosimRun {
        let mut state = self.initial_state();
        self.setup_query(&mut state);
        let mut audit = self.audit(&state, LastSlot::Empty);
        for op in schedule(t1, t2) {
            match op {
                Operator::PhaseFlip => self.phase_flip(&mut state),
                Operator::Alpha => self.alpha(&mut state),
                Operator::Beta => {
                    self.oracle(&mut state);
                    audit.absorb(self.audit(&state, LastSlot::QueriedY));
                    self.beta_ext(&mut state);
                    audit.absorb(self.audit(&state, LastSlot::QueriedY));
                    self.oracle(&mut state);
                    audit.absorb(self.audit(&state, LastSlot::Empty));
                }
            }
        }
        let marginal = self.marginal(&state);
        let outside = self.table.outside();
        let marked_probability = marginal
            .iter()
            .enumerate()
            .filter(|(v, _)| self.marked[v / outside])
            .map(|(_, p)| p)
            .sum();
        MicrosimRun {
            state,
            marginal,
            marked_probability,
            audit,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::full::FullWalk;

    fn sim() -> (ProblemParams, KDistinctnessInstance, TwoRegisterSim) {
        let params = ProblemParams::with_r(5, 2, 3).unwrap();
        let inst = KDistinctnessInstance::new(vec![2, 4, 1, 4, 3], 2).unwrap();
        let sim = TwoRegisterSim::new(&params, &inst, 4).unwrap();
        (params, inst, sim)
    }

    #[test]
    fn dimension_uses_three_bit_slots() {
        let (_, _, sim) = sim();
        assert_eq!(sim.dimension(), 20 * 8usize.pow(4));
    }

    #[test]
    fn setup_fills_slots_with_subset_values() {
        let (_, _, sim) = sim();
        let mut state = sim.initial_state();
        sim.setup_query(&mut state);
        let audit = sim.audit(&state, LastSlot::Empty);
        assert_eq!(audit.terms_checked, 20);
        assert_eq!(audit.violations, 0);
    }

    #[test]
    fn oracle_is_an_involution() {
        let (_, _, sim) = sim();
        let mut state = sim.initial_state();
        sim.setup_query(&mut state);
        sim.alpha(&mut state);
        let before = state.clone();
        sim.oracle(&mut state);
        assert_ne!(state, before);
        sim.oracle(&mut state);
        assert_eq!(state, before);
    }

    #[test]
    fn extended_beta_is_an_involution() {
        let (_, _, sim) = sim();
        let mut state = sim.initial_state();
        sim.setup_query(&mut state);
        sim.alpha(&mut state);
        sim.oracle(&mut state);
        let before = state.clone();
        sim.beta_ext(&mut state);
        sim.beta_ext(&mut state);
        let dev = state
            .amplitudes()
            .iter()
            .zip(before.amplitudes())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(dev < 1e-12);
    }

    #[test]
    fn marginal_matches_register_free_walk() {
        let (params, inst, sim) = sim();
        let full = FullWalk::new(&params, &inst).unwrap();
        for (t1, t2) in [(1, 1), (2, 1), (1, 2)] {
            let micro = sim.run(t1, t2);
            assert_eq!(micro.audit.violations, 0);
            assert!(micro.audit.terms_checked > 0);
            assert!((micro.state.norm() - 1.0).abs() < 1e-12);
            let reference = full.run(t1, t2).unwrap();
            for (p, a) in micro.marginal.iter().zip(reference.state.amplitudes()) {
                assert!((p - a.norm_sqr()).abs() < 1e-10);
            }
            assert!((micro.marked_probability - reference.marked_probability).abs() < 1e-10);
        }
    }

    #[test]
    fn rejects_values_above_bound() {
        let params = ProblemParams::with_r(5, 2, 3).unwrap();
        let inst = KDistinctnessInstance::new(vec![2, 9, 1, 9, 3], 2).unwrap();
        assert!(TwoRegisterSim::new(&params, &inst, 4).is_err());
    }

    #[test]
    fn rejects_oversized_register() {
        let params = ProblemParams::with_r(8, 2, 4).unwrap();
        let inst = KDistinctnessInstance::with_collision(8, &[1, 2]).unwrap();
        assert!(matches!(
            TwoRegisterSim::new(&params, &inst, 8),
            Err(Error::CapExceeded { .. })
        ));
    }
}
