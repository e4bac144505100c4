//! Core domain types: the depth map, line-segments and the layer table.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::{abs_diff, DepthValue};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DepthError {
    #[error("depth map dimensions must be at least 1x1, got {width}x{height}")]
    EmptyDimensions { width: usize, height: usize },
    #[error("value buffer length {actual} does not match {width}x{height} = {expected}")]
    LengthMismatch {
        width: usize,
        height: usize,
        expected: usize,
        actual: usize,
    },
    #[error("depth value {value} at index {index} exceeds max level {max_level}")]
    ValueOutOfRange {
        index: usize,
        value: u64,
        max_level: u64,
    },
    #[error("row index {row} out of range for height {height}")]
    RowOutOfRange { row: usize, height: usize },
    #[error("run {start}..{end} invalid for width {width}")]
    InvalidRun {
        start: usize,
        end: usize,
        width: usize,
    },
}

/// A dense depth image: `width * height` gray levels in `0..=max_level`,
/// row-major. Immutable after construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DepthMap<P: DepthValue> {
    width: usize,
    height: usize,
    max_level: P,
    values: Vec<P>,
}

impl<P: DepthValue> DepthMap<P> {
    pub fn new(
        width: usize,
        height: usize,
        max_level: P,
        values: Vec<P>,
    ) -> Result<Self, DepthError> {
        if width == 0 || height == 0 {
            return Err(DepthError::EmptyDimensions { width, height });
        }
        let expected = width * height;
        if values.len() != expected {
            return Err(DepthError::LengthMismatch {
                width,
                height,
                expected,
                actual: values.len(),
            });
        }
        if let Some((index, &value)) = values.iter().enumerate().find(|(_, &v)| v > max_level) {
            return Err(DepthError::ValueOutOfRange {
                index,
                value: value.into(),
                max_level: max_level.into(),
            });
        }
        Ok(Self {
            width,
            height,
            max_level,
            values,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn max_level(&self) -> P {
        self.max_level
    }

    pub fn values(&self) -> &[P] {
        &self.values
    }

    pub fn get(&self, row: usize, col: usize) -> P {
        self.values[row * self.width + col]
    }

    pub fn row(&self, row: usize) -> &[P] {
        &self.values[row * self.width..(row + 1) * self.width]
    }

    fn check_run(&self, row: usize, start: usize, end: usize) -> Result<(), DepthError> {
        if row >= self.height {
            return Err(DepthError::RowOutOfRange {
                row,
                height: self.height,
            });
        }
        if start > end || end >= self.width {
            return Err(DepthError::InvalidRun {
                start,
                end,
                width: self.width,
            });
        }
        Ok(())
    }

    /// Most frequent depth value over columns `start..=end` of `row`.
    /// Ties go to the smallest value, so the result is independent of the
    /// order the run is scanned in.
    pub fn mode_of_run(&self, row: usize, start: usize, end: usize) -> Result<P, DepthError> {
        self.check_run(row, start, end)?;
        Ok(mode_of_slice(&self.row(row)[start..=end]))
    }
}

/// Mode of a non-empty slice, smallest value on ties.
pub fn mode_of_slice<P: DepthValue>(values: &[P]) -> P {
    debug_assert!(!values.is_empty());
    let mut counts: BTreeMap<P, usize> = BTreeMap::new();
    for &v in values {
        *counts.entry(v).or_insert(0) += 1;
    }
    // BTreeMap iterates in ascending value order, so the first maximal
    // count wins the tie with the smallest value.
    let mut best = None;
    for (&v, &n) in &counts {
        match best {
            Some((_, bn)) if n <= bn => {}
            _ => best = Some((v, n)),
        }
    }
    best.unwrap().0
}

/// A maximal horizontal run within one row. `value` is the mode of the
/// run's depths; `object_number` and `layer_number` stay unset until the
/// labeling stage fills them in.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LineSegment<P: DepthValue> {
    pub row: usize,
    pub start: usize,
    pub end: usize,
    pub value: P,
    pub object_number: Option<u32>,
    pub layer_number: Option<u32>,
}

impl<P: DepthValue> LineSegment<P> {
    pub fn len(&self) -> usize {
        self.end - self.start + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Column extents share at least one column.
    pub fn overlaps(&self, other: &Self) -> bool {
        self.start <= other.end && other.start <= self.end
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LayerEntry<P: DepthValue> {
    /// 1-based layer id, dense.
    pub id: u32,
    /// Representative depth value of the layer.
    pub value: P,
}

/// Ordered registry of discovered depth layers. A candidate value joins the
/// first layer whose stored representative is within `tolerance`, otherwise
/// a new layer is appended.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LayerTable<P: DepthValue> {
    entries: Vec<LayerEntry<P>>,
    tolerance: u64,
}

impl<P: DepthValue> LayerTable<P> {
    pub fn new(tolerance: u64) -> Self {
        Self {
            entries: Vec::new(),
            tolerance,
        }
    }

    pub fn tolerance(&self) -> u64 {
        self.tolerance
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[LayerEntry<P>] {
        &self.entries
    }

    pub fn value_of(&self, id: u32) -> Option<P> {
        self.entries.get(id as usize - 1).map(|e| e.value)
    }

    /// Layer id for `value`: lowest existing id within tolerance, else a
    /// freshly registered layer keyed by `value` itself.
    pub fn match_or_insert(&mut self, value: P) -> u32 {
        for entry in &self.entries {
            if abs_diff(entry.value, value) <= self.tolerance {
                return entry.id;
            }
        }
        let id = self.entries.len() as u32 + 1;
        self.entries.push(LayerEntry { id, value });
        id
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn minimal_map() {
        let d = DepthMap::new(1, 1, 255u8, vec![7]).unwrap();
        assert_eq!(d.get(0, 0), 7);
    }

    #[test]
    fn length_mismatch_rejected() {
        let err = DepthMap::new(2, 2, 255u8, vec![0, 0, 0]).unwrap_err();
        assert_eq!(
            err,
            DepthError::LengthMismatch {
                width: 2,
                height: 2,
                expected: 4,
                actual: 3
            }
        );
    }

    #[test]
    fn value_out_of_range_names_index() {
        let err = DepthMap::new(2, 1, 255u16, vec![10, 300]).unwrap_err();
        assert_eq!(
            err,
            DepthError::ValueOutOfRange {
                index: 1,
                value: 300,
                max_level: 255
            }
        );
    }

    #[test]
    fn mode_clear_majority() {
        let d = DepthMap::new(3, 1, 255u8, vec![5, 5, 7]).unwrap();
        assert_eq!(d.mode_of_run(0, 0, 2).unwrap(), 5);
    }

    #[test]
    fn mode_singleton() {
        let d = DepthMap::new(1, 1, 255u8, vec![9]).unwrap();
        assert_eq!(d.mode_of_run(0, 0, 0).unwrap(), 9);
    }

    #[test]
    fn mode_tie_takes_smallest() {
        // 3 and 8 both occur twice; the smaller value wins.
        let d = DepthMap::new(4, 1, 255u8, vec![3, 8, 3, 8]).unwrap();
        assert_eq!(d.mode_of_run(0, 0, 3).unwrap(), 3);
    }

    #[test]
    fn mode_rejects_bad_indices() {
        let d = DepthMap::new(2, 2, 255u8, vec![1, 2, 3, 4]).unwrap();
        assert!(matches!(
            d.mode_of_run(2, 0, 1),
            Err(DepthError::RowOutOfRange { .. })
        ));
        assert!(matches!(
            d.mode_of_run(0, 1, 2),
            Err(DepthError::InvalidRun { .. })
        ));
        assert!(matches!(
            d.mode_of_run(0, 1, 0),
            Err(DepthError::InvalidRun { .. })
        ));
    }

    #[test]
    fn layer_table_matches_stored_representative_not_last_member() {
        let mut t = LayerTable::new(2);
        assert_eq!(t.match_or_insert(10u8), 1);
        assert_eq!(t.match_or_insert(12u8), 1);
        // 14 is within 2 of the absorbed 12 but matching is against the
        // stored representative 10, so a new layer opens.
        assert_eq!(t.match_or_insert(14u8), 2);
        assert_eq!(t.len(), 2);
    }

    proptest! {
        #[test]
        fn mode_occurs_in_run(values in prop::collection::vec(0u8..=255, 1..40)) {
            let m = mode_of_slice(&values);
            prop_assert!(values.contains(&m));
        }

        #[test]
        fn mode_permutation_invariant(
            values in prop::collection::vec(0u8..=20, 1..30),
            seed in any::<u64>(),
        ) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let mut shuffled = values.clone();
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            shuffled.shuffle(&mut rng);
            prop_assert_eq!(mode_of_slice(&values), mode_of_slice(&shuffled));
        }
    }
}
