//! File I/O: portable graymaps (ASCII and binary), 8/16-bit grayscale
//! PNG, color visualizations and the machine-readable run report. Gray
//! values are never rescaled on read; they are the algorithm's native
//! units.

use std::fs;
use std::io::Write as _;
use std::path::Path;

use image::{DynamicImage, RgbImage, RgbaImage};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::depth::{DepthError, DepthMap};
use crate::linking::{Diagnostics, LabelMap, LayeringResult, ObjectLayer};
use crate::{DepthValue, Px};

#[derive(Debug, Error)]
pub enum ImgIoError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: String,
        source: std::io::Error,
    },
    #[error("cannot write {path}: {source}")]
    Write {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}: unknown format (expected PGM or grayscale PNG)")]
    UnknownFormat { path: String },
    #[error("{path}: corrupt header: {detail}")]
    CorruptHeader { path: String, detail: String },
    #[error("{path}: pixel payload too short: expected {expected} values, got {actual}")]
    TruncatedPayload {
        path: String,
        expected: usize,
        actual: usize,
    },
    #[error("{path}: {source}")]
    InvalidDepth { path: String, source: DepthError },
    #[error("{path}: PNG decode failed: {detail}")]
    PngDecode { path: String, detail: String },
    #[error("label id {0} exceeds the 16-bit graymap limit")]
    LabelIdOverflow(u32),
    #[error("json encode failed: {0}")]
    Json(#[from] serde_json::Error),
}

fn display(path: &Path) -> String {
    path.display().to_string()
}

/// Reads a depth map from a binary/ASCII PGM or an 8/16-bit grayscale
/// PNG. `max_level` comes from the file header, without rescaling.
pub fn read_depth(path: &Path) -> Result<DepthMap<Px>, ImgIoError> {
    let bytes = fs::read(path).map_err(|source| ImgIoError::Read {
        path: display(path),
        source,
    })?;
    match bytes.as_slice() {
        [b'P', b'2', ..] | [b'P', b'5', ..] => parse_pgm(path, &bytes),
        [0x89, b'P', b'N', b'G', ..] => parse_png(path, &bytes),
        _ => Err(ImgIoError::UnknownFormat {
            path: display(path),
        }),
    }
}

fn parse_png(path: &Path, bytes: &[u8]) -> Result<DepthMap<Px>, ImgIoError> {
    let img = image::load_from_memory(bytes).map_err(|e| ImgIoError::PngDecode {
        path: display(path),
        detail: e.to_string(),
    })?;
    let (values, max_level, w, h) = match img {
        DynamicImage::ImageLuma16(gray) => {
            let (w, h) = gray.dimensions();
            (gray.into_raw(), 65535, w, h)
        }
        other => {
            let gray = other.into_luma8();
            let (w, h) = gray.dimensions();
            (
                gray.into_raw().into_iter().map(Px::from).collect(),
                255,
                w,
                h,
            )
        }
    };
    DepthMap::new(w as usize, h as usize, max_level, values).map_err(|source| {
        ImgIoError::InvalidDepth {
            path: display(path),
            source,
        }
    })
}

/// Pulls whitespace-separated header tokens, skipping `#` comments.
struct PgmTokens<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> PgmTokens<'a> {
    fn next_token(&mut self) -> Option<&'a [u8]> {
        loop {
            while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
                self.pos += 1;
            }
            if self.bytes.get(self.pos) == Some(&b'#') {
                while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                    self.pos += 1;
                }
                continue;
            }
            break;
        }
        if self.pos >= self.bytes.len() {
            return None;
        }
        let start = self.pos;
        while self.pos < self.bytes.len() && !self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        Some(&self.bytes[start..self.pos])
    }

    fn next_number(&mut self, what: &str, path: &Path) -> Result<u64, ImgIoError> {
        let token = self.next_token().ok_or_else(|| ImgIoError::CorruptHeader {
            path: display(path),
            detail: format!("missing {what}"),
        })?;
        std::str::from_utf8(token)
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| ImgIoError::CorruptHeader {
                path: display(path),
                detail: format!("bad {what}: {:?}", String::from_utf8_lossy(token)),
            })
    }
}

fn parse_pgm(path: &Path, bytes: &[u8]) -> Result<DepthMap<Px>, ImgIoError> {
    let binary = bytes[1] == b'5';
    let mut tokens = PgmTokens { bytes, pos: 2 };
    let width = tokens.next_number("width", path)? as usize;
    let height = tokens.next_number("height", path)? as usize;
    let maxval = tokens.next_number("maxval", path)?;
    if maxval == 0 || maxval > 65535 {
        return Err(ImgIoError::CorruptHeader {
            path: display(path),
            detail: format!("maxval {maxval} outside 1..=65535"),
        });
    }
    let expected = width * height;
    let values: Vec<Px> = if binary {
        // Exactly one whitespace byte separates the header from the raster.
        let start = tokens.pos + 1;
        let wide = maxval > 255;
        let bpp = if wide { 2 } else { 1 };
        let raster = bytes.get(start..).unwrap_or_default();
        if raster.len() < expected * bpp {
            return Err(ImgIoError::TruncatedPayload {
                path: display(path),
                expected,
                actual: raster.len() / bpp,
            });
        }
        if wide {
            raster[..expected * 2]
                .chunks_exact(2)
                .map(|c| u16::from_be_bytes([c[0], c[1]]))
                .collect()
        } else {
            raster[..expected].iter().map(|&b| Px::from(b)).collect()
        }
    } else {
        let mut values = Vec::with_capacity(expected);
        for _ in 0..expected {
            match tokens.next_number("pixel value", path) {
                Ok(v) if v <= 65535 => values.push(v as Px),
                Ok(v) => {
                    return Err(ImgIoError::CorruptHeader {
                        path: display(path),
                        detail: format!("pixel value {v} exceeds 16 bits"),
                    })
                }
                Err(_) => {
                    return Err(ImgIoError::TruncatedPayload {
                        path: display(path),
                        expected,
                        actual: values.len(),
                    })
                }
            }
        }
        values
    };
    DepthMap::new(width, height, maxval as Px, values).map_err(|source| {
        ImgIoError::InvalidDepth {
            path: display(path),
            source,
        }
    })
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<(), ImgIoError> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(|source| ImgIoError::Write {
                path: display(path),
                source,
            })?;
        }
    }
    fs::write(path, bytes).map_err(|source| ImgIoError::Write {
        path: display(path),
        source,
    })
}

/// Writes a binary PGM; two bytes per pixel (big-endian) when the max
/// level needs them.
pub fn write_depth_pgm<P: DepthValue>(depth: &DepthMap<P>, path: &Path) -> Result<(), ImgIoError> {
    let maxval: u64 = depth.max_level().into().max(1);
    let mut out = Vec::new();
    write!(out, "P5\n{} {}\n{}\n", depth.width(), depth.height(), maxval).unwrap();
    for &v in depth.values() {
        let v: u64 = v.into();
        if maxval > 255 {
            out.extend_from_slice(&(v as u16).to_be_bytes());
        } else {
            out.push(v as u8);
        }
    }
    write_bytes(path, &out)
}

/// Writes the label map as a 16-bit binary graymap carrying raw ids.
pub fn write_label_map(labels: &LabelMap, path: &Path) -> Result<(), ImgIoError> {
    let mut out = Vec::new();
    write!(out, "P5\n{} {}\n65535\n", labels.width, labels.height).unwrap();
    for &id in &labels.labels {
        if id > 65535 {
            return Err(ImgIoError::LabelIdOverflow(id));
        }
        out.extend_from_slice(&(id as u16).to_be_bytes());
    }
    write_bytes(path, &out)
}

/// Reads a label map previously written by [`write_label_map`] (any
/// readable graymap/PNG works; pixel values are taken as ids).
pub fn read_label_map(path: &Path) -> Result<LabelMap, ImgIoError> {
    let depth = read_depth(path)?;
    Ok(LabelMap {
        width: depth.width(),
        height: depth.height(),
        labels: depth.values().iter().map(|&v| v as u32).collect(),
    })
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e3779b97f4a7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d049bb133111eb);
    x ^ (x >> 31)
}

/// Deterministic id -> color mapping. Id 1 is the farthest layer and stays
/// dark gray; other ids hash to saturated-ish colors.
pub fn palette_color(id: u32) -> [u8; 3] {
    if id == 1 {
        return [64, 64, 64];
    }
    let h = splitmix64(id as u64);
    let channel = |shift: u32| 60 + (h >> shift) as u8 % 196;
    [channel(0), channel(24), channel(48)]
}

/// Writes a color PNG of the label map using the fixed palette.
pub fn write_viz(labels: &LabelMap, path: &Path) -> Result<(), ImgIoError> {
    let mut img = RgbImage::new(labels.width as u32, labels.height as u32);
    for (i, &id) in labels.labels.iter().enumerate() {
        let [r, g, b] = palette_color(id);
        img.put_pixel(
            (i % labels.width) as u32,
            (i / labels.width) as u32,
            image::Rgb([r, g, b]),
        );
    }
    encode_png(path, &DynamicImage::ImageRgb8(img))
}

fn encode_png(path: &Path, img: &DynamicImage) -> Result<(), ImgIoError> {
    let mut bytes = Vec::new();
    img.write_to(
        &mut std::io::Cursor::new(&mut bytes),
        image::ImageOutputFormat::Png,
    )
    .map_err(|e| ImgIoError::PngDecode {
        path: display(path),
        detail: e.to_string(),
    })?;
    write_bytes(path, &bytes)
}

/// One RGBA image per object-layer: member pixels keep the color image
/// (or the palette color when none is given), everything else is
/// transparent. Files are named `layer_NN.png` by depth rank.
pub fn write_layer_images(
    labels: &LabelMap,
    color: Option<&RgbImage>,
    layer_count: u32,
    out_dir: &Path,
) -> Result<(), ImgIoError> {
    for id in 1..=layer_count {
        let mut img = RgbaImage::new(labels.width as u32, labels.height as u32);
        for (i, &label) in labels.labels.iter().enumerate() {
            if label != id {
                continue;
            }
            let (x, y) = ((i % labels.width) as u32, (i / labels.width) as u32);
            let [r, g, b] = match color {
                Some(c) => c.get_pixel(x, y).0,
                None => palette_color(id),
            };
            img.put_pixel(x, y, image::Rgba([r, g, b, 255]));
        }
        encode_png(
            &out_dir.join(format!("layer_{id:02}.png")),
            &DynamicImage::ImageRgba8(img),
        )?;
    }
    Ok(())
}

pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// Per-object-layer record of the run report, sorted by depth rank.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct ReportLayer {
    pub id: u32,
    pub depth_rank: u32,
    pub representative_depth: u64,
    /// Representative values of the member depth layers.
    pub layer_values: Vec<u64>,
    pub object_ids: Vec<u32>,
    pub layer_ids: Vec<u32>,
    pub pixel_count: usize,
}

/// Machine-readable summary of one pipeline run. Field order is fixed by
/// the struct, so serialized reports diff cleanly.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct RunReport {
    pub schema_version: u32,
    pub width: usize,
    pub height: usize,
    pub threshold_used: u64,
    pub connectivity_used: u64,
    pub layer_tolerance: u64,
    pub object_count: u32,
    pub layer_count: u32,
    pub object_layer_count: u32,
    pub object_layers: Vec<ReportLayer>,
}

fn report_layer<P: DepthValue>(
    ol: &ObjectLayer<P>,
    layer_value: impl Fn(u32) -> Option<P>,
) -> ReportLayer {
    ReportLayer {
        id: ol.id,
        depth_rank: ol.depth_rank,
        representative_depth: ol.representative_depth.into(),
        layer_values: ol
            .layer_numbers
            .iter()
            .filter_map(|&ln| layer_value(ln).map(Into::into))
            .collect(),
        object_ids: ol.object_numbers.iter().copied().collect(),
        layer_ids: ol.layer_numbers.iter().copied().collect(),
        pixel_count: ol.pixel_count,
    }
}

pub fn build_report<P: DepthValue>(result: &LayeringResult<P>) -> RunReport {
    let d: &Diagnostics = &result.diagnostics;
    RunReport {
        schema_version: REPORT_SCHEMA_VERSION,
        width: result.label_map.width,
        height: result.label_map.height,
        threshold_used: d.threshold_used,
        connectivity_used: d.connectivity_used,
        layer_tolerance: d.layer_tolerance,
        object_count: d.object_count,
        layer_count: d.layer_count,
        object_layer_count: d.object_layer_count,
        object_layers: result
            .object_layers
            .iter()
            .map(|ol| report_layer(ol, |ln| result.layer_table.value_of(ln)))
            .collect(),
    }
}

pub fn write_report(report: &RunReport, path: &Path) -> Result<(), ImgIoError> {
    let mut bytes = serde_json::to_vec_pretty(report)?;
    bytes.push(b'\n');
    write_bytes(path, &bytes)
}
