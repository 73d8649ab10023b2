//! Global-contrast saliency maps.
//!
//! [`hc`] scores each reduced-palette color by its frequency-weighted Lab
//! distance to every other color. [`rc`] first over-segments the image and
//! scores regions by their color contrast to all other regions, damped by
//! centroid distance.

pub mod hc;
pub mod rc;
pub mod regions;

pub use hc::{hc_color_saliency, hc_saliency, hc_saliency_with, smooth_saliency, ColorSaliency, HcParams};
pub use rc::{rc_region_saliency, rc_saliency, DEFAULT_SIGMA_S};
pub use regions::{segment_regions, Region, RegionMap, RegionParams};

use crate::imagecore::ImageBuffer;

/// Per-pixel salience, min-max normalized to `0..=255`, plus the raw values.
#[derive(Clone, Debug, PartialEq)]
pub struct SaliencyMap {
    pub width: usize,
    pub height: usize,
    pub values: Vec<u8>,
    pub raw: Vec<f64>,
}

impl SaliencyMap {
    /// Normalizes `raw` so its minimum maps to 0 and maximum to 255; a
    /// constant field maps to all zeros.
    pub fn from_raw(width: usize, height: usize, raw: Vec<f64>) -> Self {
        assert_eq!(raw.len(), width * height);
        let (lo, hi) = raw
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
        let span = hi - lo;
        let values = if !(span > 0.0) {
            vec![0; raw.len()]
        } else {
            raw.iter()
                .map(|&v| ((v - lo) / span * 255.0).round().clamp(0.0, 255.0) as u8)
                .collect()
        };
        Self {
            width,
            height,
            values,
            raw,
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    /// 8-bit grayscale rendering.
    pub fn to_image(&self) -> ImageBuffer {
        ImageBuffer::new(self.width, self.height, 1, self.values.clone()).expect("saliency map is non-empty")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalization_endpoints() {
        let m = SaliencyMap::from_raw(3, 1, vec![2.0, 4.0, 6.0]);
        assert_eq!(m.values, vec![0, 128, 255]);
        let flat = SaliencyMap::from_raw(2, 2, vec![5.0; 4]);
        assert_eq!(flat.values, vec![0; 4]);
    }
}
