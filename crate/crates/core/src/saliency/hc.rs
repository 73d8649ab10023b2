//! Histogram-based contrast.

use crate::imagecore::ImageBuffer;
use crate::quantize::{image_palette, ColorPalette, QuantizedImage, DEFAULT_COVERAGE};
use crate::Result;

use super::SaliencyMap;

#[derive(Clone, Debug, PartialEq)]
pub struct HcParams {
    pub coverage: f64,
    /// Neighbor count for color-space smoothing; `None` disables it.
    pub smoothing: Option<usize>,
}

impl Default for HcParams {
    fn default() -> Self {
        Self {
            coverage: DEFAULT_COVERAGE,
            smoothing: None,
        }
    }
}

/// Per-color saliency over the reduced palette.
#[derive(Clone, Debug)]
pub struct ColorSaliency {
    pub quantized: QuantizedImage,
    pub palette: ColorPalette,
    /// Pixel fraction per retained color, discarded bins merged in.
    pub frequencies: Vec<f64>,
    pub saliency: Vec<f64>,
}

pub fn hc_color_saliency(img: &ImageBuffer, coverage: f64) -> Result<ColorSaliency> {
    let (quantized, palette) = image_palette(img, coverage)?;
    let frequencies = palette.merged_frequencies(&quantized);
    let n = palette.len();
    let dist = palette.distance_matrix();
    let saliency = (0..n)
        .map(|k| {
            let row = &dist[k * n..(k + 1) * n];
            row.iter().zip(&frequencies).map(|(d, f)| f * d).sum()
        })
        .collect();
    Ok(ColorSaliency {
        quantized,
        palette,
        frequencies,
        saliency,
    })
}

pub fn hc_saliency(img: &ImageBuffer, coverage: f64) -> Result<SaliencyMap> {
    hc_saliency_with(
        img,
        &HcParams {
            coverage,
            smoothing: None,
        },
    )
}

pub fn hc_saliency_with(img: &ImageBuffer, params: &HcParams) -> Result<SaliencyMap> {
    let mut cs = hc_color_saliency(img, params.coverage)?;
    if let Some(m) = params.smoothing {
        cs.saliency = smooth_saliency(&cs.saliency, &cs.palette, m);
    }
    let raw = cs
        .palette
        .index_image(&cs.quantized)
        .into_iter()
        .map(|i| cs.saliency[i as usize])
        .collect();
    Ok(SaliencyMap::from_raw(img.width(), img.height(), raw))
}

/// Replaces each color's saliency with a weighted average over its `m`
/// nearest palette colors (itself included). Weights fall linearly from 1
/// for the color itself to 1/2 for the farthest neighbor considered.
pub fn smooth_saliency(saliency: &[f64], palette: &ColorPalette, m: usize) -> Vec<f64> {
    let n = palette.len();
    assert_eq!(saliency.len(), n);
    let m = m.clamp(1, n.max(1));
    if m == 1 {
        return saliency.to_vec();
    }
    let dist = palette.distance_matrix();
    (0..n)
        .map(|k| {
            let row = &dist[k * n..(k + 1) * n];
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&a, &b| row[a].total_cmp(&row[b]).then(a.cmp(&b)));
            let near = &order[..m];
            let far = near.iter().map(|&j| row[j]).fold(0.0, f64::max);
            let (mut num, mut den) = (0.0, 0.0);
            for &j in near {
                let w = if far > 0.0 { 1.0 - row[j] / (2.0 * far) } else { 1.0 };
                num += w * saliency[j];
                den += w;
            }
            num / den
        })
        .collect()
}
