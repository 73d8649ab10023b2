//! sRGB (D65) to CIE L*a*b*.

use std::sync::OnceLock;

use super::{ImageBuffer, LabImage};
use crate::Result;

const RGB_TO_XYZ: [[f64; 3]; 3] = [
    [0.4124564, 0.3575761, 0.1804375],
    [0.2126729, 0.7151522, 0.0721750],
    [0.0193339, 0.1191920, 0.9503041],
];

// Reference white is the image of sRGB white under the matrix above, so
// (255, 255, 255) lands exactly on a = b = 0.
const WHITE: [f64; 3] = [
    RGB_TO_XYZ[0][0] + RGB_TO_XYZ[0][1] + RGB_TO_XYZ[0][2],
    RGB_TO_XYZ[1][0] + RGB_TO_XYZ[1][1] + RGB_TO_XYZ[1][2],
    RGB_TO_XYZ[2][0] + RGB_TO_XYZ[2][1] + RGB_TO_XYZ[2][2],
];

fn linear_table() -> &'static [f64; 256] {
    static TABLE: OnceLock<[f64; 256]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = [0.0; 256];
        for (v, slot) in t.iter_mut().enumerate() {
            let c = v as f64 / 255.0;
            *slot = if c <= 0.04045 {
                c / 12.92
            } else {
                ((c + 0.055) / 1.055).powf(2.4)
            };
        }
        t
    })
}

#[inline]
fn lab_f(t: f64) -> f64 {
    const DELTA: f64 = 6.0 / 29.0;
    if t > DELTA * DELTA * DELTA {
        t.cbrt()
    } else {
        t / (3.0 * DELTA * DELTA) + 4.0 / 29.0
    }
}

/// Lab coordinates of an 8-bit sRGB color.
pub fn srgb_to_lab(rgb: [u8; 3]) -> [f64; 3] {
    let lin = linear_table();
    let (r, g, b) = (lin[rgb[0] as usize], lin[rgb[1] as usize], lin[rgb[2] as usize]);
    let m = &RGB_TO_XYZ;
    let x = (m[0][0] * r + m[0][1] * g + m[0][2] * b) / WHITE[0];
    let y = (m[1][0] * r + m[1][1] * g + m[1][2] * b) / WHITE[1];
    let z = (m[2][0] * r + m[2][1] * g + m[2][2] * b) / WHITE[2];
    let (fx, fy, fz) = (lab_f(x), lab_f(y), lab_f(z));
    [116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)]
}

/// Lab coordinates of a real-valued RGB color (e.g. a mean over pixels).
pub(crate) fn srgb_f64_to_lab(rgb: [f64; 3]) -> [f64; 3] {
    let lin = |v: f64| {
        let c = (v / 255.0).clamp(0.0, 1.0);
        if c <= 0.04045 {
            c / 12.92
        } else {
            ((c + 0.055) / 1.055).powf(2.4)
        }
    };
    let (r, g, b) = (lin(rgb[0]), lin(rgb[1]), lin(rgb[2]));
    let m = &RGB_TO_XYZ;
    let x = (m[0][0] * r + m[0][1] * g + m[0][2] * b) / WHITE[0];
    let y = (m[1][0] * r + m[1][1] * g + m[1][2] * b) / WHITE[1];
    let z = (m[2][0] * r + m[2][1] * g + m[2][2] * b) / WHITE[2];
    let (fx, fy, fz) = (lab_f(x), lab_f(y), lab_f(z));
    [116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)]
}

pub fn rgb_to_lab(img: &ImageBuffer) -> Result<LabImage> {
    img.require_rgb()?;
    let data = img.rgb_pixels().map(srgb_to_lab).collect();
    Ok(LabImage {
        width: img.width(),
        height: img.height(),
        data,
    })
}

#[inline]
pub fn lab_distance_sq(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    let d0 = a[0] - b[0];
    let d1 = a[1] - b[1];
    let d2 = a[2] - b[2];
    d0 * d0 + d1 * d1 + d2 * d2
}

#[inline]
pub fn lab_distance(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    lab_distance_sq(a, b).sqrt()
}
