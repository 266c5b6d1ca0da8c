use serde::{Deserialize, Serialize};

use crate::combinatorics::{vertex_count, ProblemParams};
use crate::error::{Error, Result};

/// A vertex `(S, y)`; `subset` is sorted and 1-based.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Vertex {
    pub subset: Vec<usize>,
    pub y: usize,
}

pub(crate) fn mask_of(elements: &[usize]) -> u64 {
    elements.iter().fold(0u64, |m, &e| m | 1 << (e - 1))
}

pub(crate) fn elements_of(mask: u64) -> impl Iterator<Item = usize> {
    let mut rest = mask;
    std::iter::from_fn(move || {
        if rest == 0 {
            return None;
        }
        let bit = rest.trailing_zeros() as usize;
        rest &= rest - 1;
        Some(bit + 1)
    })
}

/// Lexicographic ranking of `m`-subsets of `[N]`, `N <= 64`.
#[derive(Clone, Debug)]
pub struct SubsetRanker {
    n: usize,
    binom: Vec<Vec<u64>>,
}

impl SubsetRanker {
    pub fn new(n: usize) -> Result<Self> {
        if n > 64 {
            return Err(Error::InvalidParams(format!(
                "full-space simulation needs N <= 64, got {n}"
            )));
        }
        let mut binom = vec![vec![0u64; n + 1]; n + 1];
        for a in 0..=n {
            binom[a][0] = 1;
            for b in 1..=a {
                binom[a][b] = binom[a - 1][b - 1].saturating_add(binom[a - 1][b]);
            }
        }
        Ok(Self { n, binom })
    }

    pub fn count(&self, m: usize) -> u64 {
        self.binom[self.n][m]
    }

    /// Rank of the subset among all subsets of the same size, ordered
    /// lexicographically as sorted tuples.
    pub fn rank(&self, mask: u64) -> usize {
        let m = mask.count_ones() as usize;
        let mut rank = 0u64;
        let mut prev = 0usize;
        for (i, e) in elements_of(mask).enumerate() {
            let remaining = m - i - 1;
            for v in prev + 1..e {
                rank += self.binom[self.n - v][remaining];
            }
            prev = e;
        }
        rank as usize
    }

    pub fn unrank(&self, mut rank: u64, m: usize) -> u64 {
        let mut mask = 0u64;
        let mut v = 1usize;
        for remaining in (0..m).rev() {
            loop {
                let block = self.binom[self.n - v][remaining];
                if rank < block {
                    break;
                }
                rank -= block;
                v += 1;
            }
            mask |= 1 << (v - 1);
            v += 1;
        }
        mask
    }
}

/// Bijection between `0..|V|` and the vertices, in lexicographic order of
/// `(S, y)`: index = `rank(S) * (N - r) + position of y in [N] \ S`.
#[derive(Clone, Debug)]
pub struct VertexTable {
    n: usize,
    r: usize,
    subsets: Vec<u64>,
    ranker: SubsetRanker,
}

/// Builds the vertex table, refusing more than `cap` vertices.
pub fn enumerate_vertices(params: &ProblemParams, cap: u128) -> Result<VertexTable> {
    VertexTable::new(params, cap)
}

impl VertexTable {
    pub fn new(params: &ProblemParams, cap: u128) -> Result<Self> {
        let required = vertex_count(params)?;
        if required > cap {
            return Err(Error::CapExceeded { required, cap });
        }
        let (n, r) = (params.n(), params.r());
        let ranker = SubsetRanker::new(n)?;
        let subsets = (0..ranker.count(r)).map(|rank| ranker.unrank(rank, r)).collect();
        Ok(Self {
            n,
            r,
            subsets,
            ranker,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn r(&self) -> usize {
        self.r
    }

    /// `N - r`, the size of an alpha polygon.
    pub fn outside(&self) -> usize {
        self.n - self.r
    }

    pub fn len(&self) -> usize {
        self.subsets.len() * self.outside()
    }

    pub fn is_empty(&self) -> bool {
        self.subsets.is_empty()
    }

    pub fn subset_count(&self) -> usize {
        self.subsets.len()
    }

    pub fn ranker(&self) -> &SubsetRanker {
        &self.ranker
    }

    pub fn subset_mask(&self, subset_rank: usize) -> u64 {
        self.subsets[subset_rank]
    }

    /// `(S as mask, y)` for a vertex index.
    pub fn parts(&self, index: usize) -> (u64, usize) {
        let s = self.subsets[index / self.outside()];
        let mut pos = index % self.outside();
        let mut y = 1;
        loop {
            if s >> (y - 1) & 1 == 0 {
                if pos == 0 {
                    return (s, y);
                }
                pos -= 1;
            }
            y += 1;
        }
    }

    pub fn vertex(&self, index: usize) -> Vertex {
        let (s, y) = self.parts(index);
        Vertex {
            subset: elements_of(s).collect(),
            y,
        }
    }

    /// Index of `(S, y)` given `S` as a mask; `y` must lie outside `S`.
    pub fn index_from_parts(&self, s: u64, y: usize) -> usize {
        let below = s & ((1u64 << (y - 1)) - 1);
        let pos = (y - 1) - below.count_ones() as usize;
        self.ranker.rank(s) * self.outside() + pos
    }

    pub fn index_of(&self, v: &Vertex) -> Option<usize> {
        let valid = v.subset.len() == self.r
            && v.subset.windows(2).all(|w| w[0] < w[1])
            && v.subset.iter().all(|&e| (1..=self.n).contains(&e))
            && (1..=self.n).contains(&v.y)
            && !v.subset.contains(&v.y);
        valid.then(|| self.index_from_parts(mask_of(&v.subset), v.y))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn table(n: usize, r: usize) -> VertexTable {
        let params = ProblemParams::with_r(n, 2, r).unwrap();
        enumerate_vertices(&params, crate::full::DEFAULT_CAP).unwrap()
    }

    #[test]
    fn vertex_counts() {
        assert_eq!(table(5, 3).len(), 20);
        assert_eq!(table(8, 4).len(), 280);
        assert_eq!(table(9, 8).len(), 9);
    }

    #[test]
    fn lexicographic_order() {
        let t = table(5, 3);
        assert_eq!(
            t.vertex(0),
            Vertex {
                subset: vec![1, 2, 3],
                y: 4
            }
        );
        assert_eq!(
            t.vertex(1),
            Vertex {
                subset: vec![1, 2, 3],
                y: 5
            }
        );
        assert_eq!(
            t.vertex(2),
            Vertex {
                subset: vec![1, 2, 4],
                y: 3
            }
        );
        assert_eq!(
            t.vertex(19),
            Vertex {
                subset: vec![3, 4, 5],
                y: 2
            }
        );
        let all: Vec<_> = (0..t.len()).map(|i| t.vertex(i)).collect();
        let mut sorted = all.clone();
        sorted.sort_by(|a, b| (&a.subset, a.y).cmp(&(&b.subset, b.y)));
        assert_eq!(all, sorted);
    }

    #[test]
    fn round_trip_every_vertex() {
        let t = table(8, 4);
        for i in 0..t.len() {
            assert_eq!(t.index_of(&t.vertex(i)), Some(i));
        }
        assert_eq!(
            t.index_of(&Vertex {
                subset: vec![1, 2, 3, 4],
                y: 4
            }),
            None
        );
        assert_eq!(
            t.index_of(&Vertex {
                subset: vec![1, 2, 3],
                y: 4
            }),
            None
        );
    }

    #[test]
    fn cap_is_enforced() {
        let params = ProblemParams::new(30, 2).unwrap();
        assert!(matches!(
            enumerate_vertices(&params, 1000),
            Err(Error::CapExceeded { .. })
        ));
    }

    proptest! {
        #[test]
        fn rank_unrank_bijection(n in 1usize..=20, seed in any::<u64>()) {
            let ranker = SubsetRanker::new(n).unwrap();
            let m = (seed as usize) % (n + 1);
            let count = ranker.count(m);
            let rank = (seed >> 8) % count;
            let mask = ranker.unrank(rank, m);
            prop_assert_eq!(mask.count_ones() as usize, m);
            prop_assert_eq!(ranker.rank(mask) as u64, rank);
        }
    }
}
