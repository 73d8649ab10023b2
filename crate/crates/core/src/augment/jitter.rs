//! Recoloring of segmentation maps that keeps the pixel partition intact.

use std::collections::{BTreeSet, HashMap, HashSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::ops::{hsv_to_rgb, rgb_to_hsv};
use crate::imagecore::ImageBuffer;
use crate::{Error, Result};

/// Above this many distinct colors an image is not treated as a segmentation.
pub const MAX_SEGMENT_COLORS: usize = 256;

/// Bounds of the per-color HSV perturbation applied after the swap.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PaletteJitterParams {
    /// Hue shift bound in turns.
    pub hue: f64,
    pub saturation: f64,
    pub value: f64,
}

impl Default for PaletteJitterParams {
    fn default() -> Self {
        Self {
            hue: 0.05,
            saturation: 0.15,
            value: 0.15,
        }
    }
}

/// Sorted distinct colors, or `TooManyColors`.
pub fn distinct_colors(img: &ImageBuffer) -> Result<Vec<[u8; 3]>> {
    let mut set = BTreeSet::new();
    for p in img.to_rgb().rgb_pixels() {
        set.insert(p);
        if set.len() > MAX_SEGMENT_COLORS {
            return Err(Error::TooManyColors(set.len()));
        }
    }
    Ok(set.into_iter().collect())
}

pub fn palette_jitter(img: &ImageBuffer, seed: u64) -> Result<ImageBuffer> {
    palette_jitter_with(img, &[], &PaletteJitterParams::default(), seed)
}

/// Swaps the map's colors by a uniform permutation over the map's own colors
/// plus `extra` targets, perturbs each in HSV, and repaints. The color
/// mapping is injective, so pixels share an output color exactly when they
/// shared an input color.
pub fn palette_jitter_with(
    img: &ImageBuffer,
    extra: &[[u8; 3]],
    params: &PaletteJitterParams,
    seed: u64,
) -> Result<ImageBuffer> {
    let source = distinct_colors(img)?;
    let mut targets: Vec<[u8; 3]> = source.iter().chain(extra).copied().collect::<BTreeSet<_>>().into_iter().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    targets.shuffle(&mut rng);

    let mut used = HashSet::with_capacity(source.len());
    let mut mapping = HashMap::with_capacity(source.len());
    for (&from, &to) in source.iter().zip(&targets) {
        let [h, s, v] = rgb_to_hsv(to.map(|c| f64::from(c) / 255.0));
        let h = h + rng.random_range(-params.hue..=params.hue);
        let s = (s + rng.random_range(-params.saturation..=params.saturation)).clamp(0.0, 1.0);
        let v = (v + rng.random_range(-params.value..=params.value)).clamp(0.0, 1.0);
        let base = hsv_to_rgb([h, s, v]).map(|c| (c * 255.0).round().clamp(0.0, 255.0) as u8);
        let mut color = base;
        let mut step = 0u32;
        while !used.insert(color) {
            color = nudge(base, step);
            step += 1;
        }
        mapping.insert(from, color);
    }
    let rgb = img.to_rgb();
    let data = rgb.rgb_pixels().flat_map(|p| mapping[&p]).collect();
    ImageBuffer::new(rgb.width(), rgb.height(), 3, data)
}

/// The `step`-th single-channel offset of a color: +1, -1, +2, -2, ... on
/// each channel in turn. The first 765 steps are all distinct colors.
fn nudge(c: [u8; 3], step: u32) -> [u8; 3] {
    let ch = (step % 3) as usize;
    let m = step / 3;
    let delta = (m / 2 + 1) as i32;
    let sign = if m.is_multiple_of(2) { 1 } else { -1 };
    let mut out = c;
    out[ch] = (i32::from(c[ch]) + sign * delta).rem_euclid(256) as u8;
    out
}

/// Label per pixel by first appearance of its color in raster order.
pub fn color_labels(img: &ImageBuffer) -> Vec<u32> {
    let mut ids = HashMap::new();
    img.to_rgb()
        .rgb_pixels()
        .map(|p| {
            let next = ids.len() as u32;
            *ids.entry(p).or_insert(next)
        })
        .collect()
}

/// 4-connected components of equal color, labeled in raster order.
pub fn connected_components(img: &ImageBuffer) -> Vec<u32> {
    let rgb = img.to_rgb();
    let (w, h) = rgb.dims();
    let mut labels = vec![u32::MAX; w * h];
    let mut next = 0;
    let mut stack = Vec::new();
    for start in 0..w * h {
        if labels[start] != u32::MAX {
            continue;
        }
        let color = rgb.rgb_at(start);
        labels[start] = next;
        stack.push(start);
        while let Some(p) = stack.pop() {
            let (x, y) = (p % w, p / w);
            let mut visit = |q: usize| {
                if labels[q] == u32::MAX && rgb.rgb_at(q) == color {
                    labels[q] = next;
                    stack.push(q);
                }
            };
            if x > 0 {
                visit(p - 1);
            }
            if x + 1 < w {
                visit(p + 1);
            }
            if y > 0 {
                visit(p - w);
            }
            if y + 1 < h {
                visit(p + w);
            }
        }
        next += 1;
    }
    labels
}
