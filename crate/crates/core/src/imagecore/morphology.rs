//! Binary dilation and erosion with a `(2r+1) x (2r+1)` square element.
//!
//! Pixels outside the image count as background for both operations, so
//! erosion eats into masks that touch the border.

use super::BinaryMask;

/// Sliding-window count of set flags along one axis, windows clipped to the
/// line. `line` is read with stride `stride`.
fn window_counts(src: &[bool], start: usize, stride: usize, len: usize, r: usize, out: &mut [u32]) {
    let mut prefix = vec![0u32; len + 1];
    for i in 0..len {
        prefix[i + 1] = prefix[i] + src[start + i * stride] as u32;
    }
    for (i, o) in out.iter_mut().enumerate().take(len) {
        let lo = i.saturating_sub(r);
        let hi = (i + r + 1).min(len);
        *o = prefix[hi] - prefix[lo];
    }
}

// Separable pass: `erode` keeps a pixel only when the full (unclipped) window
// is set; `dilate` when any pixel in it is.
fn pass(src: &[bool], w: usize, h: usize, r: usize, horizontal: bool, erode: bool) -> Vec<bool> {
    let full = (2 * r + 1) as u32;
    let mut out = vec![false; w * h];
    let (lines, len, stride, step) = if horizontal { (h, w, 1, w) } else { (w, h, w, 1) };
    let mut counts = vec![0u32; len];
    for line in 0..lines {
        let start = line * step;
        window_counts(src, start, stride, len, r, &mut counts);
        for (i, &c) in counts.iter().enumerate() {
            out[start + i * stride] = if erode { c == full } else { c > 0 };
        }
    }
    out
}

pub fn dilate(mask: &BinaryMask, radius: usize) -> BinaryMask {
    if radius == 0 {
        return mask.clone();
    }
    let (w, h) = mask.dims();
    let rows = pass(mask.data(), w, h, radius, true, false);
    let both = pass(&rows, w, h, radius, false, false);
    BinaryMask::from_vec(w, h, both).expect("dimensions preserved")
}

pub fn erode(mask: &BinaryMask, radius: usize) -> BinaryMask {
    if radius == 0 {
        return mask.clone();
    }
    let (w, h) = mask.dims();
    let rows = pass(mask.data(), w, h, radius, true, true);
    let both = pass(&rows, w, h, radius, false, true);
    BinaryMask::from_vec(w, h, both).expect("dimensions preserved")
}
