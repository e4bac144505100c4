//! Edge localization: cut every row into line-segments wherever the
//! consecutive-pixel difference exceeds the threshold.

use crate::depth::{mode_of_slice, DepthError, DepthMap, LineSegment};
use crate::{abs_diff, DepthValue};

/// Per-row line-segments for a whole map. Within each row the segments are
/// disjoint, sorted by start column and jointly cover every column.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RowSegments<P: DepthValue> {
    rows: Vec<Vec<LineSegment<P>>>,
    threshold_used: u64,
    width: usize,
    height: usize,
}

impl<P: DepthValue> RowSegments<P> {
    pub fn rows(&self) -> &[Vec<LineSegment<P>>] {
        &self.rows
    }

    pub fn rows_mut(&mut self) -> &mut [Vec<LineSegment<P>>] {
        &mut self.rows
    }

    pub fn threshold_used(&self) -> u64 {
        self.threshold_used
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn segment_count(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn iter_segments(&self) -> impl Iterator<Item = &LineSegment<P>> {
        self.rows.iter().flatten()
    }
}

/// Segments one row. A new segment starts at column 0 and at every column
/// whose difference to the previous pixel exceeds `threshold`; each
/// segment's representative value is the mode of its run.
pub fn segment_row<P: DepthValue>(
    depth: &DepthMap<P>,
    row: usize,
    threshold: u64,
) -> Result<Vec<LineSegment<P>>, DepthError> {
    if row >= depth.height() {
        return Err(DepthError::RowOutOfRange {
            row,
            height: depth.height(),
        });
    }
    let pixels = depth.row(row);
    let mut segments = Vec::new();
    let mut start = 0;
    for col in 1..pixels.len() {
        if abs_diff(pixels[col - 1], pixels[col]) > threshold {
            segments.push(make_segment(pixels, row, start, col - 1));
            start = col;
        }
    }
    segments.push(make_segment(pixels, row, start, pixels.len() - 1));
    Ok(segments)
}

fn make_segment<P: DepthValue>(
    pixels: &[P],
    row: usize,
    start: usize,
    end: usize,
) -> LineSegment<P> {
    LineSegment {
        row,
        start,
        end,
        value: mode_of_slice(&pixels[start..=end]),
        object_number: None,
        layer_number: None,
    }
}

/// Applies [`segment_row`] to every row of the map.
pub fn segment_all_rows<P: DepthValue>(depth: &DepthMap<P>, threshold: u64) -> RowSegments<P> {
    let rows = (0..depth.height())
        .map(|r| segment_row(depth, r, threshold).expect("row index in range"))
        .collect();
    RowSegments {
        rows,
        threshold_used: threshold,
        width: depth.width(),
        height: depth.height(),
    }
}
