//! Problem parameters, class cardinalities and classical collision checks.
//!
//! List indices are 1-based everywhere in the public surface, matching the
//! index set `[N] = {1, ..., N}`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `round(N^(k/(k+1)))`, halves away from zero.
///
/// The floating estimate is confirmed with integer arithmetic where it fits
/// in `u128`: `r` is the nearest integer iff
/// `(2r-1)^(k+1) <= 2^(k+1) N^k <= (2r+1)^(k+1)`.
pub fn nearest_r(n: usize, k: usize) -> Result<usize> {
    if n < 2 {
        return Err(Error::InvalidParams(format!("N = {n} must be at least 2")));
    }
    if k < 2 {
        return Err(Error::InvalidParams(format!("k = {k} must be at least 2")));
    }
    let estimate = (n as f64).powf(k as f64 / (k as f64 + 1.0)).round() as usize;
    let target = checked_pow(2, k as u32 + 1)
        .and_then(|p| checked_pow(n as u128, k as u32).and_then(|q| p.checked_mul(q)));
    let Some(target) = target else {
        return Ok(estimate);
    };
    let mut r = estimate.max(1);
    // At most a step or two of correction is ever needed.
    for _ in 0..4 {
        let lower = checked_pow(2 * r as u128 - 1, k as u32 + 1);
        let upper = checked_pow(2 * r as u128 + 1, k as u32 + 1);
        match (lower, upper) {
            (Some(lo), _) if target < lo => r -= 1,
            (_, Some(hi)) if target >= hi => r += 1,
            _ => break,
        }
    }
    Ok(r)
}

fn checked_pow(base: u128, exp: u32) -> Option<u128> {
    base.checked_pow(exp)
}

/// Exact binomial coefficient `C(n, m)`; 0 when `m > n`.
pub fn binomial(n: u64, m: u64) -> Result<u128> {
    if m > n {
        return Ok(0);
    }
    let m = m.min(n - m);
    let mut acc: u128 = 1;
    for i in 0..m {
        // acc * (n - i) is divisible by (i + 1) at every step.
        acc = acc
            .checked_mul((n - i) as u128)
            .ok_or_else(|| Error::Overflow(format!("C({n}, {m})")))?
            / (i as u128 + 1);
    }
    Ok(acc)
}

/// `ln C(n, m)` as a sum of `ln((n - i) / (i + 1))`; negative infinity
/// when `m > n`.
pub fn ln_binomial(n: u64, m: u64) -> f64 {
    if m > n {
        return f64::NEG_INFINITY;
    }
    let m = m.min(n - m);
    (0..m).map(|i| ((n - i) as f64 / (i + 1) as f64).ln()).sum()
}

/// `N`, `k`, subset size `r`, and an optional bound `M` on list values.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProblemParams {
    n: usize,
    k: usize,
    r: usize,
    m: Option<u64>,
}

impl ProblemParams {
    /// Parameters with `r = nearest_r(N, k)`.
    pub fn new(n: usize, k: usize) -> Result<Self> {
        let r = nearest_r(n, k)?;
        Self::with_r(n, k, r)
    }

    /// Parameters with an explicit subset size.
    ///
    /// Only `1 <= r < N` is enforced here; the reduced model additionally
    /// needs [`ProblemParams::check_reduced_regime`].
    pub fn with_r(n: usize, k: usize, r: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidParams(format!("N = {n} must be at least 2")));
        }
        if k < 2 {
            return Err(Error::InvalidParams(format!("k = {k} must be at least 2")));
        }
        if r == 0 || r >= n {
            return Err(Error::InvalidParams(format!(
                "r = {r} must satisfy 1 <= r < N = {n}"
            )));
        }
        Ok(Self { n, k, r, m: None })
    }

    pub fn with_max_value(mut self, m: u64) -> Self {
        self.m = Some(m);
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn max_value(&self) -> Option<u64> {
        self.m
    }

    /// Dimension of the reduced subspace.
    pub fn reduced_dim(&self) -> usize {
        2 * self.k + 1
    }

    /// True when every class `eta_l^j` is nonempty: `k < N - r` and `k <= r`.
    pub fn in_reduced_regime(&self) -> bool {
        self.k < self.n - self.r && self.k <= self.r
    }

    pub fn check_reduced_regime(&self) -> Result<()> {
        if self.in_reduced_regime() {
            Ok(())
        } else {
            Err(Error::Regime {
                k: self.k,
                gap: self.n - self.r,
                r: self.r,
            })
        }
    }
}

/// Index `(l, j)` of a class `eta_l^j`: `l = |S ∩ K|`, `j = [y ∈ K]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EtaClass {
    pub level: usize,
    pub y_marked: bool,
}

impl EtaClass {
    pub fn new(level: usize, y_marked: bool, k: usize) -> Result<Self> {
        if level > k || (level == k && y_marked) {
            return Err(Error::InvalidClass {
                level,
                y_marked: y_marked as u8,
                k,
            });
        }
        Ok(Self { level, y_marked })
    }

    /// The marked class `(k, 0)`.
    pub fn marked(k: usize) -> Self {
        Self {
            level: k,
            y_marked: false,
        }
    }

    /// Position in the basis order `(0,0), (0,1), (1,0), ..., (k-1,1), (k,0)`.
    pub fn position(&self) -> usize {
        2 * self.level + self.y_marked as usize
    }

    pub fn from_position(pos: usize, k: usize) -> Result<Self> {
        Self::new(pos / 2, pos % 2 == 1, k)
    }

    pub fn j(&self) -> usize {
        self.y_marked as usize
    }

    /// All `2k + 1` valid classes in basis order.
    pub fn all(k: usize) -> impl Iterator<Item = EtaClass> {
        (0..=2 * k).map(move |pos| EtaClass {
            level: pos / 2,
            y_marked: pos % 2 == 1,
        })
    }
}

/// `|eta_l^j| = C(k,l) C(N-k, r-l) (N-r-k+l)` for `j = 0`, and
/// `C(k,l) C(N-k, r-l) (k-l)` for `j = 1`.
pub fn eta_cardinality(params: &ProblemParams, class: EtaClass) -> Result<u128> {
    params.check_reduced_regime()?;
    let (n, k, r) = (params.n as u64, params.k as u64, params.r as u64);
    let l = class.level as u64;
    EtaClass::new(class.level, class.y_marked, params.k)?;
    let tail = if class.y_marked { k - l } else { n - r - k + l };
    let overflow = || Error::Overflow(format!("|eta_{l}^{}|", class.j()));
    binomial(k, l)?
        .checked_mul(binomial(n - k, r - l)?)
        .and_then(|c| c.checked_mul(tail as u128))
        .ok_or_else(overflow)
}

/// `|eta_l^j| / |V|` as a float, valid for arbitrarily large `N`.
///
/// Uses `C(N-k, r-l) / C(N, r) = prod_{i<l}(r-i) prod_{i<k-l}(N-r-i) / prod_{i<k}(N-i)`,
/// so no large count is ever formed.
pub fn eta_weight(params: &ProblemParams, class: EtaClass) -> Result<f64> {
    params.check_reduced_regime()?;
    EtaClass::new(class.level, class.y_marked, params.k)?;
    let (n, k, r) = (params.n as f64, params.k, params.r as f64);
    let l = class.level;
    let mut ratio = binomial(k as u64, l as u64)? as f64;
    for i in 0..l {
        ratio *= r - i as f64;
    }
    for i in 0..k - l {
        ratio *= n - r - i as f64;
    }
    for i in 0..k {
        ratio /= n - i as f64;
    }
    let tail = if class.y_marked {
        (k - l) as f64
    } else {
        n - r - (k - l) as f64
    };
    Ok(ratio * tail / (n - r))
}

/// `|V| = C(N, r) (N - r)`.
pub fn vertex_count(params: &ProblemParams) -> Result<u128> {
    binomial(params.n as u64, params.r as u64)?
        .checked_mul((params.n - params.r) as u128)
        .ok_or_else(|| Error::Overflow("|V|".into()))
}

/// Finds `k` indices (1-based) with equal values.
///
/// Sort-based. When several collisions exist, returns the `k` smallest
/// indices among those holding the smallest colliding value.
pub fn classical_k_collision(values: &[u64], k: usize) -> Option<Vec<usize>> {
    if k == 0 {
        return Some(Vec::new());
    }
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by_key(|&i| (values[i], i));
    order
        .chunk_by(|&a, &b| values[a] == values[b])
        .find(|run| run.len() >= k)
        .map(|run| run[..k].iter().map(|&i| i + 1).collect())
}

/// A list `x_1..x_N` and the collision multiplicity `k` being searched for.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KDistinctnessInstance {
    values: Vec<u64>,
    k: usize,
    colliding: Option<Vec<usize>>,
}

impl KDistinctnessInstance {
    pub fn new(values: Vec<u64>, k: usize) -> Result<Self> {
        if k < 2 {
            return Err(Error::Instance(format!("k = {k} must be at least 2")));
        }
        if values.is_empty() {
            return Err(Error::Instance("empty list".into()));
        }
        let colliding = classical_k_collision(&values, k);
        Ok(Self { values, k, colliding })
    }

    /// A list of length `n` in which exactly the 1-based `positions` share
    /// value 1 and every other entry is distinct (2, 3, ...).
    pub fn with_collision(n: usize, positions: &[usize]) -> Result<Self> {
        let k = positions.len();
        let mut values = vec![0u64; n];
        for &p in positions {
            if p == 0 || p > n || values[p - 1] != 0 {
                return Err(Error::Instance(format!("bad collision position {p}")));
            }
            values[p - 1] = 1;
        }
        for (next, v) in (2..).zip(values.iter_mut().filter(|v| **v == 0)) {
            *v = next;
        }
        Self::new(values, k)
    }

    pub fn values(&self) -> &[u64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// 1-based lookup `x_i`.
    pub fn value(&self, index: usize) -> u64 {
        self.values[index - 1]
    }

    pub fn colliding_set(&self) -> Option<&[usize]> {
        self.colliding.as_deref()
    }

    pub fn max_value(&self) -> u64 {
        self.values.iter().copied().max().unwrap_or(0)
    }

    /// The single colliding set `K`, or an error when the list has none or
    /// more than one `k`-collision.
    pub fn unique_collision(&self) -> Result<&[usize]> {
        let Some(set) = self.colliding.as_deref() else {
            return Err(Error::Instance(format!("no {}-collision in the list", self.k)));
        };
        let mut sorted = self.values.clone();
        sorted.sort_unstable();
        let mut heavy = sorted.chunk_by(|a, b| a == b).filter(|run| run.len() >= self.k);
        let first = heavy.next().map(|run| run.len());
        if first != Some(self.k) || heavy.next().is_some() {
            return Err(Error::Instance(format!(
                "the list has more than one {}-colliding set",
                self.k
            )));
        }
        Ok(set)
    }

    /// Whether the 1-based indices contain `k` positions with equal values.
    pub fn has_collision_within(&self, indices: &[usize]) -> bool {
        let mut vals: Vec<u64> = indices.iter().map(|&i| self.value(i)).collect();
        vals.sort_unstable();
        vals.chunk_by(|a, b| a == b).any(|run| run.len() >= self.k)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn nearest_r_examples() {
        assert_eq!(nearest_r(8, 2).unwrap(), 4);
        assert_eq!(nearest_r(16, 2).unwrap(), 6);
        assert_eq!(nearest_r(10_000, 2).unwrap(), 464);
        assert_eq!(nearest_r(1_000_000, 2).unwrap(), 10_000);
        assert_eq!(nearest_r(10, 8).unwrap(), 8);
        assert!(nearest_r(1, 2).is_err());
        assert!(nearest_r(10, 1).is_err());
    }

    #[test]
    fn nearest_r_matches_high_precision_rounding() {
        // 16^(2/3) = 6.3496..., 1000^(3/4) = 177.827..., 10^6^(3/4) = 31622.77...
        assert_eq!(nearest_r(1000, 3).unwrap(), 178);
        assert_eq!(nearest_r(1_000_000, 3).unwrap(), 31_623);
        assert_eq!(nearest_r(100_000, 2).unwrap(), 2154);
    }

    #[test]
    fn binomial_examples() {
        assert_eq!(binomial(6, 4).unwrap(), 15);
        assert_eq!(binomial(8, 4).unwrap(), 70);
        assert_eq!(binomial(17, 0).unwrap(), 1);
        assert_eq!(binomial(3, 5).unwrap(), 0);
        assert_eq!(binomial(64, 32).unwrap(), 1_832_624_140_942_590_534);
        assert!(matches!(binomial(200, 100), Err(Error::Overflow(_))));
    }

    #[test]
    fn ln_binomial_agrees_with_exact() {
        let exact = binomial(60, 25).unwrap() as f64;
        assert!((ln_binomial(60, 25) - exact.ln()).abs() < 1e-9);
        assert_eq!(ln_binomial(3, 4), f64::NEG_INFINITY);
    }

    /// Counts `(S, y)` with `|S ∩ K| = l` and `[y ∈ K] = j` by brute force.
    fn enumerate_classes(n: usize, k: usize, r: usize) -> Vec<u128> {
        let mut counts = vec![0u128; 2 * k + 1];
        let kmask: u64 = (1u64 << k) - 1; // K = {1..k}
        for s in 0u64..(1 << n) {
            if s.count_ones() as usize != r {
                continue;
            }
            for y in 0..n {
                if s >> y & 1 == 1 {
                    continue;
                }
                let l = (s & kmask).count_ones() as usize;
                let j = (kmask >> y & 1) as usize;
                counts[2 * l + j] += 1;
            }
        }
        counts
    }

    #[test]
    fn eta_cardinality_examples() {
        let p = ProblemParams::with_r(8, 2, 4).unwrap();
        let card = |l, j| eta_cardinality(&p, EtaClass::new(l, j, 2).unwrap()).unwrap();
        assert_eq!(card(2, false), 60);
        assert_eq!(card(1, false), 120);
        assert_eq!(card(0, true), 30);
        assert!(EtaClass::new(2, true, 2).is_err());
    }

    #[test]
    fn eta_cardinality_matches_enumeration() {
        for (n, k, r) in [(8, 2, 4), (7, 2, 3), (8, 3, 4), (9, 3, 5), (10, 4, 5)] {
            let p = ProblemParams::with_r(n, k, r).unwrap();
            let brute = enumerate_classes(n, k, r);
            for class in EtaClass::all(k) {
                assert_eq!(
                    eta_cardinality(&p, class).unwrap(),
                    brute[class.position()],
                    "N={n} k={k} r={r} {class:?}"
                );
            }
        }
    }

    #[test]
    fn vertex_count_examples() {
        assert_eq!(
            vertex_count(&ProblemParams::with_r(8, 2, 4).unwrap()).unwrap(),
            280
        );
        assert_eq!(
            vertex_count(&ProblemParams::with_r(5, 2, 3).unwrap()).unwrap(),
            20
        );
        assert_eq!(
            vertex_count(&ProblemParams::with_r(12, 2, 11).unwrap()).unwrap(),
            12
        );
    }

    #[test]
    fn partition_identity() {
        for n in 5..=40 {
            for k in 2..=4 {
                let Ok(p) = ProblemParams::new(n, k) else { continue };
                if !p.in_reduced_regime() {
                    continue;
                }
                let total: u128 = EtaClass::all(k).map(|c| eta_cardinality(&p, c).unwrap()).sum();
                assert_eq!(total, vertex_count(&p).unwrap(), "N={n} k={k}");
                let weight: f64 = EtaClass::all(k).map(|c| eta_weight(&p, c).unwrap()).sum();
                assert!((weight - 1.0).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn eta_weight_matches_cardinality_ratio() {
        let p = ProblemParams::with_r(30, 3, 10).unwrap();
        let total = vertex_count(&p).unwrap() as f64;
        for c in EtaClass::all(3) {
            let exact = eta_cardinality(&p, c).unwrap() as f64 / total;
            assert!((eta_weight(&p, c).unwrap() - exact).abs() < 1e-15);
        }
    }

    #[test]
    fn regime_checks() {
        let p = ProblemParams::new(10, 8).unwrap();
        assert_eq!(p.r(), 8);
        assert!(matches!(p.check_reduced_regime(), Err(Error::Regime { .. })));
        assert!(ProblemParams::with_r(5, 2, 5).is_err());
        assert!(ProblemParams::with_r(5, 2, 0).is_err());
        assert!(!ProblemParams::with_r(5, 2, 3).unwrap().in_reduced_regime());
        assert!(ProblemParams::with_r(5, 2, 2).unwrap().in_reduced_regime());
    }

    #[test]
    fn class_positions_round_trip() {
        for k in 2..6 {
            let classes: Vec<_> = EtaClass::all(k).collect();
            assert_eq!(classes.len(), 2 * k + 1);
            for (pos, c) in classes.iter().enumerate() {
                assert_eq!(c.position(), pos);
                assert_eq!(EtaClass::from_position(pos, k).unwrap(), *c);
            }
            assert_eq!(classes.last().copied(), Some(EtaClass::marked(k)));
        }
    }

    #[test]
    fn classical_collision_examples() {
        assert_eq!(classical_k_collision(&[3, 1, 2], 2), None);
        assert_eq!(classical_k_collision(&[5, 2, 5], 2), Some(vec![1, 3]));
        assert_eq!(classical_k_collision(&[4, 4, 4, 1], 3), Some(vec![1, 2, 3]));
        // smallest colliding value wins, then smallest indices
        assert_eq!(classical_k_collision(&[9, 7, 9, 7, 7], 2), Some(vec![2, 4]));
    }

    #[test]
    fn unique_collision_detection() {
        let inst = KDistinctnessInstance::with_collision(6, &[2, 5]).unwrap();
        assert_eq!(inst.unique_collision().unwrap(), &[2, 5]);
        let multi = KDistinctnessInstance::new(vec![1, 1, 2, 2], 2).unwrap();
        assert!(multi.unique_collision().is_err());
        let triple = KDistinctnessInstance::new(vec![1, 1, 1, 2], 2).unwrap();
        assert!(triple.unique_collision().is_err());
        let none = KDistinctnessInstance::new(vec![1, 2, 3], 2).unwrap();
        assert!(none.unique_collision().is_err());
        assert!(inst.has_collision_within(&[1, 2, 5]));
        assert!(!inst.has_collision_within(&[1, 2, 3]));
    }

    fn brute_collision(values: &[u64], k: usize) -> Option<u64> {
        let mut best: Option<u64> = None;
        for i in 0..values.len() {
            let count = values.iter().filter(|&&v| v == values[i]).count();
            if count >= k {
                best = Some(best.map_or(values[i], |b| b.min(values[i])));
            }
        }
        best
    }

    proptest! {
        #[test]
        fn collision_agrees_with_brute_force(values in prop::collection::vec(1u64..6, 1..14), k in 2usize..4) {
            let found = classical_k_collision(&values, k);
            let brute = brute_collision(&values, k);
            prop_assert_eq!(found.is_some(), brute.is_some());
            if let Some(idx) = found {
                prop_assert_eq!(idx.len(), k);
                prop_assert!(idx.windows(2).all(|w| w[0] < w[1]));
                prop_assert!(idx.iter().all(|&i| Some(values[i - 1]) == brute));
            }
        }

        #[test]
        fn nearest_r_nondecreasing(n in 2usize..5000, k in 2usize..5) {
            prop_assert!(nearest_r(n, k).unwrap() <= nearest_r(n + 1, k).unwrap());
        }
    }
}
