//! Threshold estimation from the depth map's consecutive-pixel difference
//! histogram.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::depth::DepthMap;
use crate::{abs_diff, DepthValue};

#[derive(Debug, Error, PartialEq)]
pub enum ThresholdError {
    #[error("no lines to sample")]
    NoLines,
    #[error("line index {index} out of range for {axis:?} of extent {extent}")]
    LineOutOfRange {
        index: usize,
        axis: Axis,
        extent: usize,
    },
    #[error("lines along {axis:?} are a single pixel long, no adjacent pairs exist")]
    DegenerateAxis { axis: Axis },
    #[error("map has no adjacent pixel pairs along either axis")]
    DegenerateGeometry,
    #[error("sample count must be positive")]
    ZeroSampleCount,
    #[error("percentile {0} must lie in (0, 1]")]
    BadPercentile(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Axis {
    Rows,
    Columns,
}

/// Counts of absolute differences between consecutive pixels along sampled
/// lines of one axis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DifferenceHistogram {
    counts: BTreeMap<u64, u64>,
    total: u64,
    axis: Axis,
}

impl DifferenceHistogram {
    pub fn counts(&self) -> &BTreeMap<u64, u64> {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn axis(&self) -> Axis {
        self.axis
    }

    pub fn count(&self, difference: u64) -> u64 {
        self.counts.get(&difference).copied().unwrap_or(0)
    }

    /// Difference value with the highest count, smallest on ties.
    pub fn argmax(&self) -> Option<u64> {
        let mut best: Option<(u64, u64)> = None;
        for (&d, &n) in &self.counts {
            match best {
                Some((_, bn)) if n <= bn => {}
                _ => best = Some((d, n)),
            }
        }
        best.map(|(d, _)| d)
    }

    /// Largest observed difference whose cumulative count stays strictly
    /// below `p * total`. Rare outlier steps (a fraction above 1 - p of the
    /// pairs) land past the crossing and stay above the returned cut.
    fn percentile_cut(&self, p: f64) -> u64 {
        if p >= 1.0 {
            return self.counts.keys().next_back().copied().unwrap_or(0);
        }
        let target = p * self.total as f64;
        let mut cut = 0;
        let mut cum = 0u64;
        for (&d, &n) in &self.counts {
            cum += n;
            if (cum as f64) < target {
                cut = d;
            } else {
                break;
            }
        }
        cut
    }
}

/// Histogram of adjacent-pixel differences along the given lines.
/// `line_indices` are row indices for `Axis::Rows`, column indices for
/// `Axis::Columns`.
pub fn difference_histogram<P: DepthValue>(
    depth: &DepthMap<P>,
    line_indices: &[usize],
    axis: Axis,
) -> Result<DifferenceHistogram, ThresholdError> {
    if line_indices.is_empty() {
        return Err(ThresholdError::NoLines);
    }
    let (extent, line_len) = match axis {
        Axis::Rows => (depth.height(), depth.width()),
        Axis::Columns => (depth.width(), depth.height()),
    };
    if line_len < 2 {
        return Err(ThresholdError::DegenerateAxis { axis });
    }
    let mut counts = BTreeMap::new();
    let mut total = 0;
    for &index in line_indices {
        if index >= extent {
            return Err(ThresholdError::LineOutOfRange {
                index,
                axis,
                extent,
            });
        }
        for k in 1..line_len {
            let (a, b) = match axis {
                Axis::Rows => (depth.get(index, k - 1), depth.get(index, k)),
                Axis::Columns => (depth.get(k - 1, index), depth.get(k, index)),
            };
            *counts.entry(abs_diff(a, b)).or_insert(0) += 1;
            total += 1;
        }
    }
    Ok(DifferenceHistogram {
        counts,
        total,
        axis,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EstimatorMethod {
    /// Cumulative cut: smallest d covering fraction p of sampled pairs.
    Percentile,
    /// Literal reading of the difference-histogram estimator: the largest
    /// per-line histogram peak over the sampled lines.
    PaperMode,
}

impl EstimatorMethod {
    pub fn name(&self) -> &'static str {
        match self {
            EstimatorMethod::Percentile => "percentile",
            EstimatorMethod::PaperMode => "paper-mode",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdConfig {
    pub method: EstimatorMethod,
    pub percentile: f64,
    /// Lines sampled per axis; defaults to min(extent, 64).
    pub sample_count: Option<usize>,
    pub seed: u64,
}

impl Default for ThresholdConfig {
    fn default() -> Self {
        Self {
            method: EstimatorMethod::Percentile,
            percentile: 0.99,
            sample_count: None,
            seed: 0,
        }
    }
}

pub const DEFAULT_SAMPLE_LINES: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThresholdEstimate {
    pub row_threshold: u64,
    pub column_threshold: u64,
    pub method: EstimatorMethod,
    pub sampled_lines: usize,
}

fn sample_lines(rng: &mut ChaCha8Rng, extent: usize, requested: usize) -> Vec<usize> {
    let count = requested.min(extent);
    let mut picked = rand::seq::index::sample(rng, extent, count).into_vec();
    picked.sort_unstable();
    picked
}

fn estimate_axis<P: DepthValue>(
    depth: &DepthMap<P>,
    axis: Axis,
    config: &ThresholdConfig,
    rng: &mut ChaCha8Rng,
) -> Result<Option<(u64, usize)>, ThresholdError> {
    let (extent, line_len) = match axis {
        Axis::Rows => (depth.height(), depth.width()),
        Axis::Columns => (depth.width(), depth.height()),
    };
    if line_len < 2 {
        return Ok(None);
    }
    let requested = config.sample_count.unwrap_or(DEFAULT_SAMPLE_LINES.min(extent));
    let lines = sample_lines(rng, extent, requested);
    let hist = difference_histogram(depth, &lines, axis)?;
    let raw = match config.method {
        EstimatorMethod::PaperMode => {
            // Per-line peaks, largest over the sampled lines.
            let mut peak = 0;
            for &line in &lines {
                let h = difference_histogram(depth, &[line], axis)?;
                peak = peak.max(h.argmax().unwrap_or(0));
            }
            peak
        }
        EstimatorMethod::Percentile => hist.percentile_cut(config.percentile),
    };
    Ok(Some((raw.max(1), lines.len())))
}

/// Estimates the row and column segmentation thresholds by sampling random
/// lines (seeded, reproducible). When one axis is a single pixel long its
/// threshold falls back to the other axis' estimate.
pub fn estimate_threshold<P: DepthValue>(
    depth: &DepthMap<P>,
    config: &ThresholdConfig,
) -> Result<ThresholdEstimate, ThresholdError> {
    if config.sample_count == Some(0) {
        return Err(ThresholdError::ZeroSampleCount);
    }
    if !(config.percentile > 0.0 && config.percentile <= 1.0) {
        return Err(ThresholdError::BadPercentile(config.percentile));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let row = estimate_axis(depth, Axis::Rows, config, &mut rng)?;
    let col = estimate_axis(depth, Axis::Columns, config, &mut rng)?;
    let (row_threshold, column_threshold, sampled) = match (row, col) {
        (Some((tr, nr)), Some((tc, nc))) => (tr, tc, nr + nc),
        (Some((tr, nr)), None) => (tr, tr, nr),
        (None, Some((tc, nc))) => (tc, tc, nc),
        (None, None) => return Err(ThresholdError::DegenerateGeometry),
    };
    Ok(ThresholdEstimate {
        row_threshold,
        column_threshold,
        method: config.method,
        sampled_lines: sampled,
    })
}
