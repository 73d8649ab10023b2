//! Region-based contrast.
//!
//! Raw saliency of region `k`:
//!
//! ```text
//! S(k) = sum_{i != k} exp(-d(k, i)^2 / sigma_s^2) * w(i) * Dr(k, i)
//! ```
//!
//! with `d` the centroid distance (diagonal-normalized coordinates), `w(i)`
//! the pixel share of region `i`, and `Dr` the histogram-weighted mean Lab
//! distance between the two regions' palette colors.

use rayon::prelude::*;

use crate::imagecore::ImageBuffer;
use crate::{Error, Result};

use super::{RegionMap, SaliencyMap};

/// Spatial falloff; `sigma_s^2 = 0.16` in diagonal-normalized units.
pub const DEFAULT_SIGMA_S: f64 = 0.4;

/// Raw saliency per region. Each region is scored independently with a
/// fixed summation order, so the result does not depend on thread count.
pub fn rc_region_saliency(map: &RegionMap, sigma_s: f64) -> Vec<f64> {
    let n = map.palette.len();
    let dist = map.palette.distance_matrix();
    let total = (map.width * map.height) as f64;
    let inv_s2 = 1.0 / (sigma_s * sigma_s);
    let regions = &map.regions;
    (0..regions.len())
        .into_par_iter()
        .map(|k| {
            let rk = &regions[k];
            // g[c] = sum_j f_k(j) * D(j, c)
            let mut g = vec![0.0; n];
            for &(j, f) in &rk.color_hist {
                let row = &dist[j as usize * n..(j as usize + 1) * n];
                for (gc, d) in g.iter_mut().zip(row) {
                    *gc += f * d;
                }
            }
            let mut s = 0.0;
            for (i, ri) in regions.iter().enumerate() {
                if i == k {
                    continue;
                }
                let dx = rk.centroid[0] - ri.centroid[0];
                let dy = rk.centroid[1] - ri.centroid[1];
                let spatial = (-(dx * dx + dy * dy) * inv_s2).exp();
                let contrast: f64 = ri.color_hist.iter().map(|&(c, f)| f * g[c as usize]).sum();
                s += spatial * (ri.size as f64 / total) * contrast;
            }
            s
        })
        .collect()
}

pub fn rc_saliency(img: &ImageBuffer, map: &RegionMap, sigma_s: f64) -> Result<SaliencyMap> {
    if img.dims() != (map.width, map.height) {
        return Err(Error::DimensionMismatch {
            expected: (map.width, map.height),
            actual: img.dims(),
        });
    }
    if !(sigma_s > 0.0) {
        return Err(Error::InvalidParameter(format!("sigma_s {sigma_s} must be > 0")));
    }
    let per_region = rc_region_saliency(map, sigma_s);
    let raw = map.labels.iter().map(|&l| per_region[l as usize]).collect();
    Ok(SaliencyMap::from_raw(map.width, map.height, raw))
}
