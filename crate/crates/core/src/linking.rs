//! Link perception: fold labeled segments into compound objects, merge
//! them into object-layers via the object/layer incidence graph, order the
//! result by depth and render the per-pixel label map.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use thiserror::Error;

use crate::depth::{DepthMap, LayerTable};
use crate::labeling::{label_segments, LabeledSegments};
use crate::segmentation::segment_all_rows;
use crate::thresholding::{estimate_threshold, ThresholdConfig, ThresholdError, ThresholdEstimate};
use crate::unionfind::DisjointSet;
use crate::DepthValue;

#[derive(Debug, Error)]
pub enum LinkError {
    #[error("segment object number {0} belongs to no object-layer")]
    UnlinkedObject(u32),
    #[error(transparent)]
    Threshold(#[from] ThresholdError),
}

/// One canonical object together with the set of layers it spans.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompoundObject<P: DepthValue> {
    pub object_number: u32,
    pub layer_numbers: BTreeSet<u32>,
    pub pixel_count: usize,
    /// Representative depth value -> member pixel count.
    pub value_histogram: BTreeMap<P, usize>,
}

/// Final output class: a set of objects plus the layers they jointly span,
/// depth-ranked (rank 1 = farthest).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObjectLayer<P: DepthValue> {
    pub id: u32,
    pub object_numbers: BTreeSet<u32>,
    pub layer_numbers: BTreeSet<u32>,
    pub representative_depth: P,
    pub depth_rank: u32,
    pub pixel_count: usize,
}

/// Per-pixel object-layer ids, row-major, 1-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelMap {
    pub width: usize,
    pub height: usize,
    pub labels: Vec<u32>,
}

/// One [`CompoundObject`] per canonical object number, ordered by id.
pub fn build_compound_objects<P: DepthValue>(
    labeled: &LabeledSegments<P>,
) -> Vec<CompoundObject<P>> {
    let mut compounds: Vec<CompoundObject<P>> = (1..=labeled.object_count)
        .map(|on| CompoundObject {
            object_number: on,
            layer_numbers: BTreeSet::new(),
            pixel_count: 0,
            value_histogram: BTreeMap::new(),
        })
        .collect();
    for seg in labeled.rows.iter_segments() {
        let on = seg.object_number.expect("object numbers populated");
        let ln = seg.layer_number.expect("layer numbers populated");
        let co = &mut compounds[on as usize - 1];
        co.layer_numbers.insert(ln);
        co.pixel_count += seg.len();
        *co.value_histogram.entry(seg.value).or_insert(0) += seg.len();
    }
    compounds
}

/// Connected components of the bipartite object/layer incidence graph:
/// objects sharing a layer merge, and an object spanning several layers
/// pulls those layers together. Ranks and ids are left for
/// [`order_layers`].
pub fn link_object_layers<P: DepthValue>(
    compounds: &[CompoundObject<P>],
) -> Vec<ObjectLayer<P>> {
    let max_layer = compounds
        .iter()
        .flat_map(|c| c.layer_numbers.iter().copied())
        .max()
        .unwrap_or(0) as usize;
    // Nodes: 0..n are compounds, n..n+max_layer are layers.
    let n = compounds.len();
    let mut ds = DisjointSet::new(n + max_layer);
    for (i, co) in compounds.iter().enumerate() {
        for &ln in &co.layer_numbers {
            ds.union(i, n + ln as usize - 1);
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..n {
        groups.entry(ds.find(i)).or_default().push(i);
    }
    groups
        .into_values()
        .map(|members| {
            let mut object_numbers = BTreeSet::new();
            let mut layer_numbers = BTreeSet::new();
            let mut pixel_count = 0;
            let mut histogram: BTreeMap<P, usize> = BTreeMap::new();
            for &i in &members {
                let co = &compounds[i];
                object_numbers.insert(co.object_number);
                layer_numbers.extend(co.layer_numbers.iter().copied());
                pixel_count += co.pixel_count;
                for (&v, &c) in &co.value_histogram {
                    *histogram.entry(v).or_insert(0) += c;
                }
            }
            ObjectLayer {
                id: 0,
                object_numbers,
                layer_numbers,
                representative_depth: weighted_mode(&histogram),
                depth_rank: 0,
                pixel_count,
            }
        })
        .collect()
}

/// Pixel-count-weighted mode, smallest value on ties.
fn weighted_mode<P: DepthValue>(histogram: &BTreeMap<P, usize>) -> P {
    let mut best = None;
    for (&v, &c) in histogram {
        match best {
            Some((_, bc)) if c <= bc => {}
            _ => best = Some((v, c)),
        }
    }
    best.expect("non-empty histogram").0
}

/// Sorts farthest-first and assigns `depth_rank` and ids 1..m in rank
/// order. Under `far_is_low` lower gray values are farther. Ties break on
/// the smallest member object id.
pub fn order_layers<P: DepthValue>(
    mut object_layers: Vec<ObjectLayer<P>>,
    far_is_low: bool,
) -> Vec<ObjectLayer<P>> {
    object_layers.sort_by(|a, b| {
        let depth = if far_is_low {
            a.representative_depth.cmp(&b.representative_depth)
        } else {
            b.representative_depth.cmp(&a.representative_depth)
        };
        depth
            .then(a.representative_depth.cmp(&b.representative_depth))
            .then(a.object_numbers.iter().next().cmp(&b.object_numbers.iter().next()))
    });
    for (i, ol) in object_layers.iter_mut().enumerate() {
        ol.depth_rank = i as u32 + 1;
        ol.id = ol.depth_rank;
    }
    object_layers
}

/// Maps every pixel through segment -> object number -> object-layer id.
pub fn render_label_map<P: DepthValue>(
    depth: &DepthMap<P>,
    labeled: &LabeledSegments<P>,
    object_layers: &[ObjectLayer<P>],
) -> Result<LabelMap, LinkError> {
    let mut by_object: HashMap<u32, u32> = HashMap::new();
    for ol in object_layers {
        for &on in &ol.object_numbers {
            by_object.insert(on, ol.id);
        }
    }
    let mut labels = vec![0u32; depth.width() * depth.height()];
    for seg in labeled.rows.iter_segments() {
        let on = seg.object_number.expect("object numbers populated");
        let id = *by_object.get(&on).ok_or(LinkError::UnlinkedObject(on))?;
        let base = seg.row * depth.width();
        labels[base + seg.start..=base + seg.end].fill(id);
    }
    Ok(LabelMap {
        width: depth.width(),
        height: depth.height(),
        labels,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayeringParams {
    /// Row segmentation threshold; estimated when absent.
    pub threshold: Option<u64>,
    /// Object connectivity value; defaults to the estimated column
    /// threshold when absent.
    pub connectivity: Option<u64>,
    pub layer_tolerance: u64,
    pub far_is_low: bool,
    pub estimator: ThresholdConfig,
}

impl Default for LayeringParams {
    fn default() -> Self {
        Self {
            threshold: None,
            connectivity: None,
            layer_tolerance: 0,
            far_is_low: true,
            estimator: ThresholdConfig::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Diagnostics {
    pub threshold_used: u64,
    pub connectivity_used: u64,
    pub layer_tolerance: u64,
    pub estimate: Option<ThresholdEstimate>,
    pub raw_object_count: u32,
    pub object_count: u32,
    pub layer_count: u32,
    pub object_layer_count: u32,
}

#[derive(Debug, Clone)]
pub struct LayeringResult<P: DepthValue> {
    pub label_map: LabelMap,
    pub object_layers: Vec<ObjectLayer<P>>,
    pub layer_table: LayerTable<P>,
    pub labeled: LabeledSegments<P>,
    pub diagnostics: Diagnostics,
}

/// Runs the whole pipeline: threshold estimation (unless overridden), row
/// segmentation, dual labeling, link perception, depth ordering and label
/// rendering. Deterministic given the map, params and seed.
pub fn run_layering<P: DepthValue>(
    depth: &DepthMap<P>,
    params: &LayeringParams,
) -> Result<LayeringResult<P>, LinkError> {
    let needs_estimate = params.threshold.is_none() || params.connectivity.is_none();
    let estimate = if needs_estimate && (depth.width() >= 2 || depth.height() >= 2) {
        Some(estimate_threshold(depth, &params.estimator)?)
    } else {
        None
    };
    // A 1x1 map has no pixel pairs; any positive threshold behaves alike.
    let threshold = params
        .threshold
        .or_else(|| estimate.as_ref().map(|e| e.row_threshold))
        .unwrap_or(1);
    let connectivity = params
        .connectivity
        .or_else(|| estimate.as_ref().map(|e| e.column_threshold))
        .unwrap_or(1);

    let segments = segment_all_rows(depth, threshold);
    let labeled = label_segments(segments, connectivity, params.layer_tolerance);
    let compounds = build_compound_objects(&labeled);
    let object_layers = order_layers(link_object_layers(&compounds), params.far_is_low);
    let label_map = render_label_map(depth, &labeled, &object_layers)?;
    let diagnostics = Diagnostics {
        threshold_used: threshold,
        connectivity_used: connectivity,
        layer_tolerance: params.layer_tolerance,
        estimate,
        raw_object_count: labeled.raw_object_count,
        object_count: labeled.object_count,
        layer_count: labeled.layer_table.len() as u32,
        object_layer_count: object_layers.len() as u32,
    };
    Ok(LayeringResult {
        label_map,
        object_layers,
        layer_table: labeled.layer_table.clone(),
        labeled,
        diagnostics,
    })
}
