//! Synthetic scenes with exact ground truth: occluded rings, random
//! plateau maps for fuzzing, and an office-style clutter of primitives.
//! Scenes are rasterized directly in depth space; every object sits at one
//! constant depth value.

use image::RgbImage;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::depth::DepthMap;
use crate::oracle::{oracle_objects, PixelPartition};
use crate::Px;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SynthError {
    #[error("scene geometry does not fit in a {size}x{size} canvas: {detail}")]
    GeometryDoesNotFit { size: usize, detail: String },
    #[error("ring config invalid: {0}")]
    BadRingConfig(String),
    #[error("could not pack {placed} of {requested} plateaus without overlap")]
    InfeasiblePacking { requested: usize, placed: usize },
    #[error("not enough distinct depth values for {requested} plateaus with min_step {min_step}")]
    ValueRangeExhausted { requested: usize, min_step: u64 },
}

/// A generated scene: the depth map, an optional flat-shaded color image
/// and the ground-truth object-layer partition.
#[derive(Debug, Clone)]
pub struct SyntheticScene {
    pub depth: DepthMap<Px>,
    pub color: Option<RgbImage>,
    pub truth: PixelPartition,
    pub truth_object_count: u32,
    pub truth_layer_count: u32,
}

/// Ground truth for a piecewise-constant map: group pixels by depth value,
/// which is exactly the object-layer semantics on such maps.
fn truth_by_value(width: usize, height: usize, values: &[Px]) -> PixelPartition {
    PixelPartition::from_labels(width, height, &values.iter().map(|&v| v as u32).collect::<Vec<_>>())
}

fn finish_scene(
    width: usize,
    height: usize,
    max_level: Px,
    base: Vec<Px>,
    jittered: Option<Vec<Px>>,
    color: Option<RgbImage>,
) -> SyntheticScene {
    let truth = truth_by_value(width, height, &base);
    let base_map = DepthMap::new(width, height, max_level, base).expect("generated map valid");
    let truth_object_count = oracle_objects(&base_map, 0).class_count;
    let truth_layer_count = truth.class_count;
    let depth = match jittered {
        Some(values) => {
            DepthMap::new(width, height, max_level, values).expect("generated map valid")
        }
        None => base_map,
    };
    SyntheticScene {
        depth,
        color,
        truth,
        truth_object_count,
        truth_layer_count,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct RingsConfig {
    pub size: usize,
    pub ring_count: usize,
    /// Per-ring outer and inner radii.
    pub outer_radii: Vec<u32>,
    pub inner_radii: Vec<u32>,
    /// Ring depth values, farthest first.
    pub depths: Vec<Px>,
    pub background: Px,
    /// When set, rings are spaced so each one occludes its farther
    /// neighbour; otherwise they sit apart.
    pub occluder: bool,
    pub max_level: Px,
}

impl Default for RingsConfig {
    fn default() -> Self {
        Self {
            size: 512,
            ring_count: 3,
            outer_radii: vec![90; 3],
            inner_radii: vec![60; 3],
            depths: vec![60, 120, 180],
            background: 10,
            occluder: true,
            max_level: 255,
        }
    }
}

const RING_COLORS: [[u8; 3]; 6] = [
    [200, 70, 60],
    [70, 180, 80],
    [230, 200, 70],
    [90, 120, 220],
    [200, 110, 200],
    [90, 200, 200],
];

/// Rasterizes annuli over a background plane, farthest ring first so
/// nearer rings overwrite (occlude) farther ones. Ground truth gives each
/// ring one class even where occlusion splits it apart.
pub fn gen_rings(config: &RingsConfig) -> Result<SyntheticScene, SynthError> {
    let n = config.ring_count;
    if config.depths.len() != n || config.outer_radii.len() != n || config.inner_radii.len() != n {
        return Err(SynthError::BadRingConfig(format!(
            "expected {n} depths and radii pairs"
        )));
    }
    let mut seen = std::collections::HashSet::new();
    for &d in &config.depths {
        if d == config.background || !seen.insert(d) || d > config.max_level {
            return Err(SynthError::BadRingConfig(format!(
                "depth values must be distinct, differ from the background and fit max_level; got {d}"
            )));
        }
    }
    for (&outer, &inner) in config.outer_radii.iter().zip(&config.inner_radii) {
        if inner == 0 || inner >= outer {
            return Err(SynthError::BadRingConfig(format!(
                "need 0 < inner < outer, got {inner}/{outer}"
            )));
        }
    }

    // Center spacing: close enough that the nearer ring's band crosses the
    // farther band twice and its hole swallows the band in between, which
    // cuts the farther ring's visible part into two pieces.
    let mut centers_x = if n == 0 { Vec::new() } else { vec![0i64] };
    for i in 1..n {
        let gap = if config.occluder {
            (config.inner_radii[i - 1] + config.inner_radii[i]) as i64 * 5 / 6
        } else {
            (config.outer_radii[i - 1] + config.outer_radii[i]) as i64 + 10
        };
        centers_x.push(centers_x[i - 1] + gap);
    }
    let span = *centers_x.last().unwrap_or(&0);
    let offset = (config.size as i64 - span) / 2;
    let centers: Vec<(i64, i64)> = centers_x
        .iter()
        .map(|&x| (x + offset, config.size as i64 / 2))
        .collect();
    for (i, &(cx, cy)) in centers.iter().enumerate() {
        let r = config.outer_radii[i] as i64;
        if cx - r < 0 || cx + r >= config.size as i64 || cy - r < 0 || cy + r >= config.size as i64
        {
            return Err(SynthError::GeometryDoesNotFit {
                size: config.size,
                detail: format!("ring {i} with outer radius {r} at ({cx}, {cy})"),
            });
        }
    }

    let (w, h) = (config.size, config.size);
    let mut base = vec![config.background; w * h];
    let mut color = RgbImage::from_pixel(w as u32, h as u32, image::Rgb([30, 30, 80]));
    for (i, &(cx, cy)) in centers.iter().enumerate() {
        let (ro, ri) = (
            config.outer_radii[i] as i64,
            config.inner_radii[i] as i64,
        );
        let tint = image::Rgb(RING_COLORS[i % RING_COLORS.len()]);
        for y in (cy - ro).max(0)..=(cy + ro).min(h as i64 - 1) {
            for x in (cx - ro).max(0)..=(cx + ro).min(w as i64 - 1) {
                let d2 = (x - cx) * (x - cx) + (y - cy) * (y - cy);
                if d2 <= ro * ro && d2 >= ri * ri {
                    base[y as usize * w + x as usize] = config.depths[i];
                    color.put_pixel(x as u32, y as u32, tint);
                }
            }
        }
    }
    Ok(finish_scene(w, h, config.max_level, base, None, Some(color)))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct PlateauConfig {
    pub size: usize,
    pub plateau_count: usize,
    /// Minimum realized depth step between any two distinct regions.
    pub min_step: u64,
    /// Uniform additive intra-region jitter in 0..=jitter.
    pub jitter: u64,
    pub max_level: Px,
}

impl Default for PlateauConfig {
    fn default() -> Self {
        Self {
            size: 64,
            plateau_count: 4,
            min_step: 10,
            jitter: 0,
            max_level: 255,
        }
    }
}

/// Random non-overlapping rectangles and ellipses over a background, all
/// depth values pairwise at least `min_step + jitter` apart so that even
/// jittered maps keep inter-region steps of `min_step`. Deterministic per
/// seed.
pub fn gen_random_plateaus(seed: u64, config: &PlateauConfig) -> Result<SyntheticScene, SynthError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let stride = config.min_step + config.jitter;
    let usable = (config.max_level as u64).saturating_sub(config.jitter);
    let mut candidates: Vec<Px> = (0..=usable / stride).map(|k| (k * stride) as Px).collect();
    if candidates.len() < config.plateau_count + 1 {
        return Err(SynthError::ValueRangeExhausted {
            requested: config.plateau_count,
            min_step: config.min_step,
        });
    }
    candidates.shuffle(&mut rng);
    let background = candidates[0];
    let values = &candidates[1..=config.plateau_count];

    let size = config.size;
    let lo = (size / 16).max(3);
    let hi = (size / 10).max(lo + 1);
    let mut base = vec![background; size * size];
    let mut boxes: Vec<(usize, usize, usize, usize)> = Vec::new();
    for (i, &value) in values.iter().enumerate() {
        let mut placed = false;
        for _ in 0..200 {
            let pw = rng.gen_range(lo..=hi);
            let ph = rng.gen_range(lo..=hi);
            if pw + 2 >= size || ph + 2 >= size {
                continue;
            }
            let x = rng.gen_range(1..size - pw - 1);
            let y = rng.gen_range(1..size - ph - 1);
            // A one pixel gap keeps plateaus from touching each other.
            let clashes = boxes.iter().any(|&(bx, by, bw, bh)| {
                x < bx + bw + 1 && bx < x + pw + 1 && y < by + bh + 1 && by < y + ph + 1
            });
            if clashes {
                continue;
            }
            let ellipse = rng.gen_bool(0.5);
            stamp(&mut base, size, (x, y, pw, ph), ellipse, value);
            boxes.push((x, y, pw, ph));
            placed = true;
            break;
        }
        if !placed {
            return Err(SynthError::InfeasiblePacking {
                requested: config.plateau_count,
                placed: i,
            });
        }
    }

    let jittered = if config.jitter > 0 {
        Some(
            base.iter()
                .map(|&v| v + rng.gen_range(0..=config.jitter) as Px)
                .collect(),
        )
    } else {
        None
    };
    Ok(finish_scene(size, size, config.max_level, base, jittered, None))
}

fn stamp(
    canvas: &mut [Px],
    size: usize,
    (x, y, w, h): (usize, usize, usize, usize),
    ellipse: bool,
    value: Px,
) {
    for row in y..y + h {
        for col in x..x + w {
            let inside = if ellipse {
                // Inscribed in the bounding box.
                let fx = (col as f64 - x as f64 - w as f64 / 2.0 + 0.5) / (w as f64 / 2.0);
                let fy = (row as f64 - y as f64 - h as f64 / 2.0 + 0.5) / (h as f64 / 2.0);
                fx * fx + fy * fy <= 1.0
            } else {
                true
            };
            if inside {
                canvas[row * size + col] = value;
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OfficeShape {
    Box,
    Cylinder,
    Ellipse,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OfficeObject {
    pub shape: OfficeShape,
    pub x: usize,
    pub y: usize,
    pub width: usize,
    pub height: usize,
    pub depth: Px,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct OfficeConfig {
    pub size: usize,
    pub background: Px,
    pub max_level: Px,
    pub objects: Vec<OfficeObject>,
}

impl Default for OfficeConfig {
    fn default() -> Self {
        let object = |shape, x, y, width, height, depth| OfficeObject {
            shape,
            x,
            y,
            width,
            height,
            depth,
        };
        // A desk-style clutter with overlaps so nearer objects occlude
        // farther ones.
        Self {
            size: 512,
            background: 10,
            max_level: 255,
            objects: vec![
                object(OfficeShape::Box, 60, 120, 160, 220, 60),
                object(OfficeShape::Cylinder, 170, 90, 110, 260, 100),
                object(OfficeShape::Ellipse, 250, 200, 170, 120, 140),
                object(OfficeShape::Box, 330, 140, 120, 230, 180),
                object(OfficeShape::Cylinder, 120, 260, 100, 180, 220),
            ],
        }
    }
}

fn office_contains(obj: &OfficeObject, x: usize, y: usize) -> bool {
    let in_ellipse = |ex: usize, ey: usize, ew: usize, eh: usize| {
        let fx = (x as f64 - ex as f64 - ew as f64 / 2.0 + 0.5) / (ew as f64 / 2.0);
        let fy = (y as f64 - ey as f64 - eh as f64 / 2.0 + 0.5) / (eh as f64 / 2.0);
        fx * fx + fy * fy <= 1.0
    };
    let in_rect = |rx: usize, ry: usize, rw: usize, rh: usize| {
        x >= rx && x < rx + rw && y >= ry && y < ry + rh
    };
    match obj.shape {
        OfficeShape::Box => in_rect(obj.x, obj.y, obj.width, obj.height),
        OfficeShape::Ellipse => in_ellipse(obj.x, obj.y, obj.width, obj.height),
        OfficeShape::Cylinder => {
            let cap = obj.height / 3;
            in_rect(obj.x, obj.y + cap / 2, obj.width, obj.height - cap / 2)
                || in_ellipse(obj.x, obj.y, obj.width, cap)
        }
    }
}

/// Flat-shaded composition of boxes, cylinders and ellipses, stamped
/// farthest first. Objects sharing a depth value share a truth class.
pub fn gen_office(config: &OfficeConfig) -> Result<SyntheticScene, SynthError> {
    let size = config.size;
    for (i, obj) in config.objects.iter().enumerate() {
        if obj.x + obj.width > size || obj.y + obj.height > size || obj.width == 0 || obj.height == 0
        {
            return Err(SynthError::GeometryDoesNotFit {
                size,
                detail: format!("object {i} extends outside the canvas"),
            });
        }
        if obj.depth > config.max_level {
            return Err(SynthError::BadRingConfig(format!(
                "object {i} depth {} exceeds max_level",
                obj.depth
            )));
        }
    }
    let mut order: Vec<&OfficeObject> = config.objects.iter().collect();
    // Low gray = far; nearest (highest value) stamps last and occludes.
    order.sort_by_key(|o| o.depth);

    let mut base = vec![config.background; size * size];
    let mut color = RgbImage::from_pixel(size as u32, size as u32, image::Rgb([40, 36, 60]));
    for (i, obj) in order.iter().enumerate() {
        let tint = image::Rgb(RING_COLORS[i % RING_COLORS.len()]);
        for y in obj.y..(obj.y + obj.height).min(size) {
            for x in obj.x..(obj.x + obj.width).min(size) {
                if office_contains(obj, x, y) {
                    base[y * size + x] = obj.depth;
                    color.put_pixel(x as u32, y as u32, tint);
                }
            }
        }
    }
    Ok(finish_scene(size, size, config.max_level, base, None, Some(color)))
}
