//! Depth-wise layering of 3D images from dense depth maps.
//!
//! The pipeline slices a depth image into depth-ordered object-layers:
//! every row is cut into line-segments wherever adjacent pixels differ by
//! more than an estimated threshold, segments are labelled with object
//! numbers (vertical connectivity) and layer numbers (representative depth)
//! independently, and a link-perception pass merges occlusion-split object
//! parts and same-layer objects into the final object-layers.

pub mod depth;
pub mod imgio;
pub mod labeling;
pub mod linking;
pub mod oracle;
pub mod segmentation;
pub mod synthgen;
pub mod thresholding;
pub mod unionfind;

use std::fmt::{Debug, Display};
use std::hash::Hash;

use num_traits::{PrimInt, Unsigned};

/// Integer gray value of a depth map pixel.
///
/// The algorithm only compares, subtracts and counts depth values, so any
/// unsigned integer narrow enough to fit in `u64` works.
pub trait DepthValue:
    PrimInt + Unsigned + Into<u64> + Hash + Display + Debug + Send + Sync + 'static
{
}

impl DepthValue for u8 {}
impl DepthValue for u16 {}
impl DepthValue for u32 {}

/// Absolute difference of two depth values, widened to `u64`.
pub fn abs_diff<P: DepthValue>(a: P, b: P) -> u64 {
    let (a, b): (u64, u64) = (a.into(), b.into());
    a.max(b) - a.min(b)
}

pub use depth::{DepthError, DepthMap, LayerTable, LineSegment};
pub use labeling::LabeledSegments;
pub use linking::{run_layering, LabelMap, LayeringParams, LayeringResult, ObjectLayer};
pub use oracle::PixelPartition;
pub use unionfind::DisjointSet;

/// Depth map over 8-bit gray levels (L = 256).
pub type DepthMap8 = DepthMap<u8>;
/// Depth map over 16-bit gray levels (L = 65536).
pub type DepthMap16 = DepthMap<u16>;

/// Pixel type the file formats and generators work in. 8-bit inputs widen
/// losslessly; `max_level` keeps the original range.
pub type Px = u16;
