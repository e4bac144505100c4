//! Deliberately naive reference implementation: pixel flood fill for the
//! object partition and value grouping for object-layers, plus a
//! relabel-invariant partition comparison. Shares nothing with the main
//! pipeline beyond the core types.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use thiserror::Error;

use crate::depth::DepthMap;
use crate::linking::LabelMap;
use crate::unionfind::DisjointSet;
use crate::{abs_diff, DepthValue};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("partition dimensions differ: {0}x{1} vs {2}x{3}")]
    DimensionMismatch(usize, usize, usize, usize),
}

/// A labeling of every pixel into dense classes 1..=class_count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PixelPartition {
    pub width: usize,
    pub height: usize,
    pub class_of: Vec<u32>,
    pub class_count: u32,
}

impl PixelPartition {
    /// Builds a partition from arbitrary per-pixel labels, renumbering
    /// them densely in order of first appearance.
    pub fn from_labels(width: usize, height: usize, labels: &[u32]) -> Self {
        assert_eq!(labels.len(), width * height);
        let mut dense: HashMap<u32, u32> = HashMap::new();
        let mut next = 0;
        let class_of = labels
            .iter()
            .map(|&l| {
                *dense.entry(l).or_insert_with(|| {
                    next += 1;
                    next
                })
            })
            .collect();
        Self {
            width,
            height,
            class_of,
            class_count: next,
        }
    }
}

impl From<&LabelMap> for PixelPartition {
    fn from(map: &LabelMap) -> Self {
        Self::from_labels(map.width, map.height, &map.labels)
    }
}

/// 4-connected components under |D(p) - D(q)| <= connectivity, by flood
/// fill. Class ids follow row-major discovery order.
pub fn oracle_objects<P: DepthValue>(depth: &DepthMap<P>, connectivity: u64) -> PixelPartition {
    let (w, h) = (depth.width(), depth.height());
    let mut class_of = vec![0u32; w * h];
    let mut next = 0u32;
    for start in 0..w * h {
        if class_of[start] != 0 {
            continue;
        }
        next += 1;
        class_of[start] = next;
        let mut queue = VecDeque::from([start]);
        while let Some(p) = queue.pop_front() {
            let (r, c) = (p / w, p % w);
            let mut visit = |nr: usize, nc: usize| {
                let q = nr * w + nc;
                if class_of[q] == 0 && abs_diff(depth.get(r, c), depth.get(nr, nc)) <= connectivity
                {
                    class_of[q] = next;
                    queue.push_back(q);
                }
            };
            if r > 0 {
                visit(r - 1, c);
            }
            if r + 1 < h {
                visit(r + 1, c);
            }
            if c > 0 {
                visit(r, c - 1);
            }
            if c + 1 < w {
                visit(r, c + 1);
            }
        }
    }
    PixelPartition {
        width: w,
        height: h,
        class_of,
        class_count: next,
    }
}

/// Reference object-layer partition: take the flood-fill components, then
/// merge components sharing a depth value and values spanned by one
/// component (bipartite components over the component/value incidence).
pub fn oracle_object_layers<P: DepthValue>(
    depth: &DepthMap<P>,
    connectivity: u64,
) -> PixelPartition {
    let objects = oracle_objects(depth, connectivity);
    let n = objects.class_count as usize;
    let mut values_of: Vec<BTreeSet<P>> = vec![BTreeSet::new(); n];
    for (i, &class) in objects.class_of.iter().enumerate() {
        values_of[class as usize - 1].insert(depth.values()[i]);
    }
    let mut ds = DisjointSet::new(n);
    let mut first_with_value: HashMap<P, usize> = HashMap::new();
    for (i, values) in values_of.iter().enumerate() {
        for &v in values {
            match first_with_value.get(&v) {
                Some(&j) => {
                    ds.union(i, j);
                }
                None => {
                    first_with_value.insert(v, i);
                }
            }
        }
    }
    let merged: Vec<u32> = objects
        .class_of
        .iter()
        .map(|&class| ds.find(class as usize - 1) as u32)
        .collect();
    PixelPartition::from_labels(objects.width, objects.height, &merged)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PartitionComparison {
    pub equivalent: bool,
    /// Pixel pairs on which the two partitions disagree about
    /// co-membership.
    pub mismatched_pixel_pairs: u128,
}

/// Relabel-invariant equivalence plus a disagreement count computed from
/// the contingency table (Rand-index style), so large maps stay cheap.
pub fn compare_partitions(
    a: &PixelPartition,
    b: &PixelPartition,
) -> Result<PartitionComparison, OracleError> {
    if a.width != b.width || a.height != b.height {
        return Err(OracleError::DimensionMismatch(
            a.width, a.height, b.width, b.height,
        ));
    }
    let mut sizes_a: HashMap<u32, u128> = HashMap::new();
    let mut sizes_b: HashMap<u32, u128> = HashMap::new();
    let mut cells: BTreeMap<(u32, u32), u128> = BTreeMap::new();
    for (&ca, &cb) in a.class_of.iter().zip(&b.class_of) {
        *sizes_a.entry(ca).or_insert(0) += 1;
        *sizes_b.entry(cb).or_insert(0) += 1;
        *cells.entry((ca, cb)).or_insert(0) += 1;
    }
    let choose2 = |n: u128| n * n.saturating_sub(1) / 2;
    let same_a: u128 = sizes_a.values().map(|&n| choose2(n)).sum();
    let same_b: u128 = sizes_b.values().map(|&n| choose2(n)).sum();
    let same_both: u128 = cells.values().map(|&n| choose2(n)).sum();
    let mismatched = (same_a - same_both) + (same_b - same_both);
    Ok(PartitionComparison {
        equivalent: mismatched == 0,
        mismatched_pixel_pairs: mismatched,
    })
}
