//! Line-segment labeling: object numbers from vertical connectivity and
//! layer numbers from representative-depth matching. The two assignments
//! are independent of each other.

use std::collections::HashMap;

use crate::depth::LayerTable;
use crate::segmentation::RowSegments;
use crate::unionfind::DisjointSet;
use crate::{abs_diff, DepthValue};

/// Row segments with object and layer numbers populated.
#[derive(Debug, Clone)]
pub struct LabeledSegments<P: DepthValue> {
    pub rows: RowSegments<P>,
    /// Final number of canonical objects after merge resolution.
    pub object_count: u32,
    /// Provisional object count before merging (the running counter).
    pub raw_object_count: u32,
    /// Merge structure over provisional object ids (0-based internally).
    pub object_merges: DisjointSet,
    pub layer_table: LayerTable<P>,
}

/// Result of the object-number pass alone.
#[derive(Debug, Clone)]
pub struct ObjectAssignment {
    pub object_count: u32,
    pub raw_object_count: u32,
    pub merges: DisjointSet,
}

/// Assigns object numbers. Row 0 segments get fresh ids; a segment in a
/// later row inherits from the first previous-row segment that overlaps it
/// in columns with a representative-depth gap of at most `connectivity`,
/// and all such matches are unioned. Segments with no match open a fresh
/// object. Canonical ids are then renumbered densely in row-major order of
/// first appearance.
pub fn assign_object_numbers<P: DepthValue>(
    rows: &mut RowSegments<P>,
    connectivity: u64,
) -> ObjectAssignment {
    let mut merges = DisjointSet::new(0);
    // Provisional 0-based id per segment, row by row.
    let mut prev: Vec<(usize, usize, P, usize)> = Vec::new(); // start, end, value, id
    let mut provisional: Vec<Vec<usize>> = Vec::with_capacity(rows.rows().len());
    for row in rows.rows() {
        let mut current = Vec::with_capacity(row.len());
        for seg in row {
            let mut inherited = None;
            for &(ps, pe, pv, pid) in &prev {
                if ps <= seg.end && seg.start <= pe && abs_diff(seg.value, pv) <= connectivity {
                    match inherited {
                        None => inherited = Some(pid),
                        Some(first) => {
                            merges.union(first, pid);
                        }
                    }
                }
            }
            let id = match inherited {
                Some(id) => id,
                None => merges.push(),
            };
            current.push(id);
        }
        prev = row
            .iter()
            .zip(&current)
            .map(|(s, &id)| (s.start, s.end, s.value, id))
            .collect();
        provisional.push(current);
    }

    // Dense canonical ids, 1-based, in order of first appearance.
    let mut dense: HashMap<usize, u32> = HashMap::new();
    let mut next = 0u32;
    for (row, ids) in rows.rows_mut().iter_mut().zip(&provisional) {
        for (seg, &id) in row.iter_mut().zip(ids) {
            let root = merges.find(id);
            let on = *dense.entry(root).or_insert_with(|| {
                next += 1;
                next
            });
            seg.object_number = Some(on);
        }
    }
    ObjectAssignment {
        object_count: next,
        raw_object_count: merges.len() as u32,
        merges,
    }
}

/// Assigns layer numbers in row-major order: first existing layer whose
/// stored representative is within `layer_tolerance`, else a new layer.
pub fn assign_layer_numbers<P: DepthValue>(
    rows: &mut RowSegments<P>,
    layer_tolerance: u64,
) -> LayerTable<P> {
    let mut table = LayerTable::new(layer_tolerance);
    for row in rows.rows_mut() {
        for seg in row {
            seg.layer_number = Some(table.match_or_insert(seg.value));
        }
    }
    table
}

/// Runs both labeling passes.
pub fn label_segments<P: DepthValue>(
    mut rows: RowSegments<P>,
    connectivity: u64,
    layer_tolerance: u64,
) -> LabeledSegments<P> {
    let objects = assign_object_numbers(&mut rows, connectivity);
    let layer_table = assign_layer_numbers(&mut rows, layer_tolerance);
    LabeledSegments {
        rows,
        object_count: objects.object_count,
        raw_object_count: objects.raw_object_count,
        object_merges: objects.merges,
        layer_table,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::depth::DepthMap;
    use crate::segmentation::segment_all_rows;
    use proptest::prelude::*;
    use std::collections::{HashSet, VecDeque};

    fn map(width: usize, height: usize, values: Vec<u8>) -> DepthMap<u8> {
        DepthMap::new(width, height, 255, values).unwrap()
    }

    fn ons<P: crate::DepthValue>(rows: &RowSegments<P>) -> Vec<Vec<u32>> {
        rows.rows()
            .iter()
            .map(|r| r.iter().map(|s| s.object_number.unwrap()).collect())
            .collect()
    }

    fn lns<P: crate::DepthValue>(rows: &RowSegments<P>) -> Vec<Vec<u32>> {
        rows.rows()
            .iter()
            .map(|r| r.iter().map(|s| s.layer_number.unwrap()).collect())
            .collect()
    }

    #[test]
    fn overlapping_close_segments_share_object() {
        // (0..4, V=10) above (2..6, V=10): overlap at 2..4, |10-10| <= 2.
        let mut values = vec![10u8; 7];
        values.extend([99, 99, 10, 10, 10, 10, 10]);
        let d = map(7, 2, values);
        let mut segs = segment_all_rows(&d, 2);
        // Force the exact extents from the example.
        assert_eq!(segs.rows()[1].len(), 2);
        let a = assign_object_numbers(&mut segs, 2);
        let o = ons(&segs);
        assert_eq!(o[0], vec![1]);
        assert_eq!(o[1][1], 1);
        assert_eq!(a.object_count, 2); // the 99-run is its own object
    }

    #[test]
    fn overlapping_distant_segments_stay_apart() {
        let d = map(3, 2, vec![10, 10, 10, 80, 80, 80]);
        let mut segs = segment_all_rows(&d, 2);
        let a = assign_object_numbers(&mut segs, 2);
        assert_eq!(ons(&segs), vec![vec![1], vec![2]]);
        assert_eq!(a.object_count, 2);
    }

    #[test]
    fn u_shape_unions_both_arms() {
        let d = map(3, 3, vec![10, 99, 10, 10, 99, 10, 10, 10, 10]);
        let mut segs = segment_all_rows(&d, 2);
        let a = assign_object_numbers(&mut segs, 2);
        assert_eq!(a.object_count, 2);
        assert!(a.raw_object_count > a.object_count); // a merge happened
        let o = ons(&segs);
        // Both arms and the bottom bar share one object, the pole another.
        assert_eq!(o[0][0], o[0][2]);
        assert_eq!(o[0][0], o[2][0]);
        assert_ne!(o[0][0], o[0][1]);
        assert_eq!(o[0][1], o[1][1]);
    }

    #[test]
    fn layer_numbers_follow_first_match() {
        let d = map(3, 1, vec![10, 99, 10]);
        let mut segs = segment_all_rows(&d, 2);
        assert_eq!(segs.rows()[0].len(), 3);
        let table = assign_layer_numbers(&mut segs, 0);
        assert_eq!(lns(&segs), vec![vec![1, 2, 1]]);
        assert_eq!(table.len(), 2);
        assert_eq!(table.value_of(1), Some(10));
        assert_eq!(table.value_of(2), Some(99));
    }

    #[test]
    fn constant_value_single_layer() {
        let d = map(4, 2, vec![42; 8]);
        let mut segs = segment_all_rows(&d, 0);
        let table = assign_layer_numbers(&mut segs, 0);
        assert_eq!(table.len(), 1);
        assert!(lns(&segs).iter().flatten().all(|&l| l == 1));
    }

    #[test]
    fn tolerance_matches_stored_representative() {
        // V sequence 10, 12, 14 with tolerance 2: 12 joins layer(10),
        // 14 is 4 away from the stored 10 and opens a new layer.
        let d = map(3, 1, vec![10, 12, 14]);
        let mut segs = segment_all_rows(&d, 0);
        assert_eq!(segs.rows()[0].len(), 3);
        let table = assign_layer_numbers(&mut segs, 2);
        assert_eq!(lns(&segs), vec![vec![1, 1, 2]]);
        assert_eq!(table.value_of(2), Some(14));
    }

    #[test]
    fn on_and_ln_passes_commute() {
        let d = map(3, 3, vec![10, 99, 10, 10, 99, 10, 10, 10, 10]);
        let base = segment_all_rows(&d, 2);

        let mut a = base.clone();
        assign_object_numbers(&mut a, 2);
        assign_layer_numbers(&mut a, 0);

        let mut b = base.clone();
        assign_layer_numbers(&mut b, 0);
        assign_object_numbers(&mut b, 2);

        assert_eq!(ons(&a), ons(&b));
        assert_eq!(lns(&a), lns(&b));
    }

    /// Segment-graph reachability oracle for the object partition: nodes
    /// are segments, edges join adjacent-row segments that overlap in
    /// columns within the connectivity gap.
    fn segment_components<P: crate::DepthValue>(rows: &RowSegments<P>, t: u64) -> Vec<Vec<usize>> {
        let segs: Vec<_> = rows.iter_segments().collect();
        let n = segs.len();
        let mut adj = vec![Vec::new(); n];
        for i in 0..n {
            for j in 0..n {
                let (a, b) = (segs[i], segs[j]);
                if a.row + 1 == b.row && a.overlaps(b) && abs_diff(a.value, b.value) <= t {
                    adj[i].push(j);
                    adj[j].push(i);
                }
            }
        }
        let mut comp = vec![usize::MAX; n];
        let mut next = 0;
        for s in 0..n {
            if comp[s] != usize::MAX {
                continue;
            }
            comp[s] = next;
            let mut q = VecDeque::from([s]);
            while let Some(u) = q.pop_front() {
                for &v in &adj[u] {
                    if comp[v] == usize::MAX {
                        comp[v] = next;
                        q.push_back(v);
                    }
                }
            }
            next += 1;
        }
        (0..next)
            .map(|c| (0..n).filter(|&i| comp[i] == c).collect())
            .collect()
    }

    proptest! {
        #[test]
        fn object_partition_matches_reachability_oracle(
            values in prop::collection::vec(0u8..=30, 4..49),
            width in 2usize..8,
            t in 0u64..6,
            threshold in 0u64..6,
        ) {
            let height = values.len() / width;
            prop_assume!(height >= 1);
            let d = map(width, height, values[..width * height].to_vec());
            let mut segs = segment_all_rows(&d, threshold);
            assign_object_numbers(&mut segs, t);
            let flat: Vec<u32> = segs
                .iter_segments()
                .map(|s| s.object_number.unwrap())
                .collect();
            for group in segment_components(&segs, t) {
                let labels: HashSet<u32> = group.iter().map(|&i| flat[i]).collect();
                prop_assert_eq!(labels.len(), 1);
            }
            let oracle_groups = segment_components(&segs, t).len();
            let pipeline_groups: HashSet<u32> = flat.iter().copied().collect();
            prop_assert_eq!(pipeline_groups.len(), oracle_groups);
        }

        #[test]
        fn dense_ids_and_distinct_layers(
            values in prop::collection::vec(0u8..=20, 4..36),
            threshold in 0u64..4,
        ) {
            let width = 4;
            let height = values.len() / width;
            prop_assume!(height >= 1);
            let d = map(width, height, values[..width * height].to_vec());
            let labeled = label_segments(segment_all_rows(&d, threshold), 2, 0);
            let on: HashSet<u32> = labeled
                .rows
                .iter_segments()
                .map(|s| s.object_number.unwrap())
                .collect();
            prop_assert_eq!(on.len() as u32, labeled.object_count);
            for id in 1..=labeled.object_count {
                prop_assert!(on.contains(&id));
            }
            // Tolerance 0: one layer per distinct representative value.
            let distinct: HashSet<u8> = labeled.rows.iter_segments().map(|s| s.value).collect();
            prop_assert_eq!(labeled.layer_table.len(), distinct.len());
        }
    }
}
