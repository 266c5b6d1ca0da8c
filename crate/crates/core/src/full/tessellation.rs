use num_complex::Complex64;

use super::vertex::VertexTable;
use crate::exec::Execution;

/// A partition of `0..len` into polygons, stored compactly.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    offsets: Vec<usize>,
    members: Vec<usize>,
    polygon_of: Vec<usize>,
}

impl Partition {
    /// Groups indices by `keys[i] ∈ 0..polygons`; members stay sorted.
    pub fn from_keys(keys: Vec<usize>, polygons: usize) -> Self {
        let mut offsets = vec![0usize; polygons + 1];
        for &key in &keys {
            offsets[key + 1] += 1;
        }
        for p in 0..polygons {
            offsets[p + 1] += offsets[p];
        }
        let mut cursor = offsets.clone();
        let mut members = vec![0usize; keys.len()];
        for (i, &key) in keys.iter().enumerate() {
            members[cursor[key]] = i;
            cursor[key] += 1;
        }
        Self {
            offsets,
            members,
            polygon_of: keys,
        }
    }

    pub fn len(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn vertex_count(&self) -> usize {
        self.polygon_of.len()
    }

    pub fn polygon(&self, p: usize) -> &[usize] {
        &self.members[self.offsets[p]..self.offsets[p + 1]]
    }

    pub fn polygon_of(&self, v: usize) -> usize {
        self.polygon_of[v]
    }

    pub fn polygons(&self) -> impl Iterator<Item = &[usize]> {
        (0..self.len()).map(|p| self.polygon(p))
    }

    /// Every index appears in exactly one polygon.
    pub fn is_partition(&self) -> bool {
        let mut seen = vec![false; self.vertex_count()];
        for &v in &self.members {
            if std::mem::replace(&mut seen[v], true) {
                return false;
            }
        }
        seen.into_iter().all(|s| s)
            && self
                .polygons()
                .enumerate()
                .all(|(p, poly)| poly.iter().all(|&v| self.polygon_of[v] == p))
    }

    /// `(2 sum_c |c><c| - I)` in place: each amplitude `a` in a polygon
    /// becomes `2 * mean - a`.
    pub fn reflect(&self, amplitudes: &mut [Complex64], exec: Execution) {
        let means: Vec<Complex64> = exec.map_range(self.len(), |p| {
            let poly = self.polygon(p);
            poly.iter().map(|&v| amplitudes[v]).sum::<Complex64>() / poly.len() as f64
        });
        exec.update_each(amplitudes, |i, a| *a = means[self.polygon_of[i]] * 2.0 - *a);
    }
}

/// The alpha (same `S`) and beta (same `S ∪ {y}`) tessellations.
#[derive(Clone, Debug)]
pub struct TessellationCover {
    pub alpha: Partition,
    pub beta: Partition,
}

pub fn build_tessellations(table: &VertexTable) -> TessellationCover {
    let outside = table.outside();
    let alpha_keys = (0..table.len()).map(|i| i / outside).collect();
    let alpha = Partition::from_keys(alpha_keys, table.subset_count());

    let ranker = table.ranker();
    let beta_keys = (0..table.len())
        .map(|i| {
            let (s, y) = table.parts(i);
            ranker.rank(s | 1 << (y - 1))
        })
        .collect();
    let beta = Partition::from_keys(beta_keys, ranker.count(table.r() + 1) as usize);
    TessellationCover { alpha, beta }
}

/// Counts mismatches between the graph's edge set and the union of the
/// polygon edge sets: vertex pairs adjacent in the graph but in no common
/// polygon, plus polygon pairs that are not graph edges. Zero means the two
/// tessellations form a tessellation cover. Quadratic in `|V|`.
pub fn edge_cover_defects(table: &VertexTable, cover: &TessellationCover) -> usize {
    let len = table.len();
    let mut defects = 0;
    for a in 0..len {
        let (sa, ya) = table.parts(a);
        for b in a + 1..len {
            let (sb, yb) = table.parts(b);
            let adjacent = sa == sb || (sa | 1 << (ya - 1)) == (sb | 1 << (yb - 1));
            let covered = cover.alpha.polygon_of(a) == cover.alpha.polygon_of(b)
                || cover.beta.polygon_of(a) == cover.beta.polygon_of(b);
            if adjacent != covered {
                defects += 1;
            }
        }
    }
    defects
}
