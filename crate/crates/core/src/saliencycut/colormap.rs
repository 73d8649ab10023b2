use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::imagecore::{BinaryMask, ImageBuffer};
use crate::saliency::{hc_color_saliency, RegionMap};
use crate::Result;

/// Dense integer labeling; label 0 is background.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabelImage {
    pub width: usize,
    pub height: usize,
    pub labels: Vec<u32>,
}

impl LabelImage {
    pub fn label_count(&self) -> usize {
        self.labels.iter().max().map_or(0, |&m| m as usize + 1)
    }
}

impl From<&BinaryMask> for LabelImage {
    fn from(mask: &BinaryMask) -> Self {
        Self {
            width: mask.width(),
            height: mask.height(),
            labels: mask.data().iter().map(|&b| u32::from(b)).collect(),
        }
    }
}

impl From<&RegionMap> for LabelImage {
    fn from(map: &RegionMap) -> Self {
        Self {
            width: map.width,
            height: map.height,
            labels: map.labels.clone(),
        }
    }
}

/// The image's reduced palette as distinct 8-bit colors, least salient first.
pub fn segmentation_palette(img: &ImageBuffer, coverage: f64) -> Result<Vec<[u8; 3]>> {
    let cs = hc_color_saliency(&img.to_rgb(), coverage)?;
    let mut order: Vec<usize> = (0..cs.palette.len()).collect();
    order.sort_by(|&a, &b| cs.saliency[a].total_cmp(&cs.saliency[b]).then(a.cmp(&b)));
    let mut seen = HashSet::new();
    Ok(order
        .into_iter()
        .map(|i| cs.palette.retained[i].color.map(|c| c.round().clamp(0.0, 255.0) as u8))
        .filter(|c| seen.insert(*c))
        .collect())
}

/// Paints each label with a palette color. Label 0 takes `colors[0]`; the
/// remaining labels take a seeded shuffle of the rest. When the palette runs
/// out, further distinct colors are generated, so labels never share a color.
pub fn segmentation_to_colormap(labels: &LabelImage, colors: &[[u8; 3]], seed: u64) -> ImageBuffer {
    let count = labels.label_count().max(1);
    let mut seen = HashSet::new();
    let distinct: Vec<[u8; 3]> = colors.iter().copied().filter(|c| seen.insert(*c)).collect();
    let mut assigned: Vec<[u8; 3]> = Vec::with_capacity(count);
    if let Some((&first, rest)) = distinct.split_first() {
        assigned.push(first);
        let mut rest = rest.to_vec();
        rest.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        assigned.extend(rest.into_iter().take(count - 1));
    }
    let mut i: u32 = 0;
    while assigned.len() < count {
        // Odd multiplier: a bijection on 24-bit colors.
        let v = i.wrapping_mul(0x9e_3779) & 0xff_ffff;
        let c = [(v >> 16) as u8, (v >> 8) as u8, v as u8];
        i += 1;
        if seen.insert(c) {
            assigned.push(c);
        }
    }
    let data = labels
        .labels
        .iter()
        .flat_map(|&l| assigned[l as usize])
        .collect();
    ImageBuffer::new(labels.width, labels.height, 3, data).expect("label dimensions")
}
