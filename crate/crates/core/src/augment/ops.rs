//! Individual augmentation operators. Each takes its random parameters from
//! the caller's stream so the same stream always gives the same output.

use rand::Rng;

use crate::imagecore::{resize, resize_nearest, ImageBuffer};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Interp {
    #[default]
    Bilinear,
    /// Used on segmentation maps so no new colors appear.
    Nearest,
}

pub fn resize_with(img: &ImageBuffer, w: usize, h: usize, interp: Interp) -> ImageBuffer {
    if img.dims() == (w, h) {
        return img.clone();
    }
    match interp {
        Interp::Bilinear => resize(img, w, h),
        Interp::Nearest => resize_nearest(img, w, h),
    }
}

pub fn hflip(img: &ImageBuffer) -> ImageBuffer {
    remap_pixels(img, img.width(), img.height(), |x, y| (img.width() - 1 - x, y))
}

pub fn vflip(img: &ImageBuffer) -> ImageBuffer {
    remap_pixels(img, img.width(), img.height(), |x, y| (x, img.height() - 1 - y))
}

/// Clockwise rotation by `quarter_turns` * 90 degrees.
pub fn rotate90(img: &ImageBuffer, quarter_turns: u32) -> ImageBuffer {
    let (w, h) = img.dims();
    match quarter_turns % 4 {
        0 => img.clone(),
        1 => remap_pixels(img, h, w, |x, y| (y, h - 1 - x)),
        2 => remap_pixels(img, w, h, |x, y| (w - 1 - x, h - 1 - y)),
        _ => remap_pixels(img, h, w, |x, y| (w - 1 - y, x)),
    }
}

fn remap_pixels(
    img: &ImageBuffer,
    out_w: usize,
    out_h: usize,
    src: impl Fn(usize, usize) -> (usize, usize),
) -> ImageBuffer {
    let c = img.channels();
    let mut data = Vec::with_capacity(out_w * out_h * c);
    for y in 0..out_h {
        for x in 0..out_w {
            let (sx, sy) = src(x, y);
            data.extend_from_slice(img.pixel(sx, sy));
        }
    }
    ImageBuffer::new(out_w, out_h, c, data).expect("remapped dimensions")
}

/// Rotation about the image center by `degrees` (counter-clockwise), same
/// output size, uncovered corners black.
pub fn rotate(img: &ImageBuffer, degrees: f64, interp: Interp) -> ImageBuffer {
    let (w, h) = img.dims();
    let c = img.channels();
    let (sin, cos) = degrees.to_radians().sin_cos();
    let cx = w as f64 / 2.0;
    let cy = h as f64 / 2.0;
    let mut data = vec![0u8; w * h * c];
    for y in 0..h {
        for x in 0..w {
            let dx = x as f64 + 0.5 - cx;
            let dy = y as f64 + 0.5 - cy;
            // Inverse map: rotate the output position back into the source.
            let sx = cos * dx - sin * dy + cx - 0.5;
            let sy = sin * dx + cos * dy + cy - 0.5;
            let out = &mut data[(y * w + x) * c..(y * w + x + 1) * c];
            match interp {
                Interp::Nearest => {
                    let (nx, ny) = (sx.round(), sy.round());
                    if nx >= 0.0 && ny >= 0.0 && (nx as usize) < w && (ny as usize) < h {
                        out.copy_from_slice(img.pixel(nx as usize, ny as usize));
                    }
                }
                Interp::Bilinear => {
                    if sx <= -1.0 || sy <= -1.0 || sx >= w as f64 || sy >= h as f64 {
                        continue;
                    }
                    let x0 = sx.floor();
                    let y0 = sy.floor();
                    let fx = sx - x0;
                    let fy = sy - y0;
                    let sample = |xi: f64, yi: f64, ch: usize| -> f64 {
                        if xi < 0.0 || yi < 0.0 || xi as usize >= w || yi as usize >= h {
                            0.0
                        } else {
                            f64::from(img.pixel(xi as usize, yi as usize)[ch])
                        }
                    };
                    for (ch, o) in out.iter_mut().enumerate() {
                        let v = sample(x0, y0, ch) * (1.0 - fx) * (1.0 - fy)
                            + sample(x0 + 1.0, y0, ch) * fx * (1.0 - fy)
                            + sample(x0, y0 + 1.0, ch) * (1.0 - fx) * fy
                            + sample(x0 + 1.0, y0 + 1.0, ch) * fx * fy;
                        *o = v.round().clamp(0.0, 255.0) as u8;
                    }
                }
            }
        }
    }
    ImageBuffer::new(w, h, c, data).expect("same dimensions")
}

pub fn crop(img: &ImageBuffer, x0: usize, y0: usize, w: usize, h: usize) -> ImageBuffer {
    remap_pixels(img, w, h, |x, y| (x0 + x, y0 + y))
}

/// Crop window with area fraction in `scale` and aspect ratio in `ratio`
/// (log-uniform). Falls back to the largest centered window within the
/// ratio bounds after ten rejected draws.
pub fn sample_crop(
    width: usize,
    height: usize,
    scale: (f64, f64),
    ratio: (f64, f64),
    rng: &mut impl Rng,
) -> (usize, usize, usize, usize) {
    let area = (width * height) as f64;
    let (log_lo, log_hi) = (ratio.0.ln(), ratio.1.ln());
    for _ in 0..10 {
        let target = area * rng.random_range(scale.0..=scale.1);
        let aspect = rng.random_range(log_lo..=log_hi).exp();
        let w = (target * aspect).sqrt().round() as usize;
        let h = (target / aspect).sqrt().round() as usize;
        if w >= 1 && h >= 1 && w <= width && h <= height {
            let x = rng.random_range(0..=width - w);
            let y = rng.random_range(0..=height - h);
            return (x, y, w, h);
        }
    }
    let in_ratio = width as f64 / height as f64;
    let (w, h) = if in_ratio < ratio.0 {
        (width, ((width as f64 / ratio.0).round() as usize).clamp(1, height))
    } else if in_ratio > ratio.1 {
        (((height as f64 * ratio.1).round() as usize).clamp(1, width), height)
    } else {
        (width, height)
    };
    ((width - w) / 2, (height - h) / 2, w, h)
}

pub fn resized_crop(
    img: &ImageBuffer,
    scale: (f64, f64),
    ratio: (f64, f64),
    out: (usize, usize),
    interp: Interp,
    rng: &mut impl Rng,
) -> ImageBuffer {
    let (x, y, w, h) = sample_crop(img.width(), img.height(), scale, ratio, rng);
    resize_with(&crop(img, x, y, w, h), out.0, out.1, interp)
}

/// ITU-R 601 luma replicated into all three channels.
pub fn grayscale(img: &ImageBuffer) -> ImageBuffer {
    let rgb = img.to_rgb();
    let data = rgb
        .rgb_pixels()
        .flat_map(|p| {
            let l = luma(p).round().clamp(0.0, 255.0) as u8;
            [l, l, l]
        })
        .collect();
    ImageBuffer::new(rgb.width(), rgb.height(), 3, data).expect("same dimensions")
}

fn luma(p: [u8; 3]) -> f64 {
    0.299 * f64::from(p[0]) + 0.587 * f64::from(p[1]) + 0.114 * f64::from(p[2])
}

/// Maximum strengths; factors are drawn from `[1 - s, 1 + s]` (hue shift
/// from `[-hue, hue]` turns).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ColorJitterParams {
    pub brightness: f64,
    pub contrast: f64,
    pub saturation: f64,
    pub hue: f64,
}

impl Default for ColorJitterParams {
    fn default() -> Self {
        Self {
            brightness: 0.4,
            contrast: 0.4,
            saturation: 0.4,
            hue: 0.1,
        }
    }
}

/// Concrete factors of one jitter draw.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JitterFactors {
    pub brightness: f64,
    pub contrast: f64,
    pub saturation: f64,
    pub hue_shift: f64,
}

impl ColorJitterParams {
    pub fn sample(&self, rng: &mut impl Rng) -> JitterFactors {
        let mut factor = |s: f64| if s > 0.0 { rng.random_range((1.0 - s).max(0.0)..=1.0 + s) } else { 1.0 };
        let brightness = factor(self.brightness);
        let contrast = factor(self.contrast);
        let saturation = factor(self.saturation);
        let hue_shift = if self.hue > 0.0 { rng.random_range(-self.hue..=self.hue) } else { 0.0 };
        JitterFactors {
            brightness,
            contrast,
            saturation,
            hue_shift,
        }
    }
}

/// Brightness, contrast, saturation, then hue, clamping after each step.
pub fn color_jitter(img: &ImageBuffer, f: &JitterFactors) -> ImageBuffer {
    let rgb = img.to_rgb();
    let n = rgb.pixel_count().max(1) as f64;
    let mean_luma = rgb.rgb_pixels().map(|p| luma(p) * f.brightness).sum::<f64>() / n;
    let clamp = |v: f64| v.clamp(0.0, 255.0);
    let data = rgb
        .rgb_pixels()
        .flat_map(|p| {
            let mut c = p.map(|v| clamp(f64::from(v) * f.brightness));
            c = c.map(|v| clamp((v - mean_luma) * f.contrast + mean_luma));
            let g = 0.299 * c[0] + 0.587 * c[1] + 0.114 * c[2];
            c = c.map(|v| clamp((v - g) * f.saturation + g));
            if f.hue_shift != 0.0 {
                let [h, s, v] = rgb_to_hsv(c.map(|v| v / 255.0));
                c = hsv_to_rgb([(h + f.hue_shift).rem_euclid(1.0), s, v]).map(|v| v * 255.0);
            }
            c.map(|v| v.round().clamp(0.0, 255.0) as u8)
        })
        .collect();
    ImageBuffer::new(rgb.width(), rgb.height(), 3, data).expect("same dimensions")
}

/// Normalized 1-D kernel of radius `max(1, ceil(3 sigma))`.
pub fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let radius = ((3.0 * sigma).ceil() as usize).max(1);
    let raw: Vec<f64> = (0..=2 * radius)
        .map(|i| {
            let d = i as f64 - radius as f64;
            (-d * d / (2.0 * sigma * sigma)).exp()
        })
        .collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|v| v / total).collect()
}

/// Separable Gaussian blur with clamped borders.
pub fn gaussian_blur(img: &ImageBuffer, sigma: f64) -> ImageBuffer {
    let kernel = gaussian_kernel(sigma);
    let r = (kernel.len() / 2) as isize;
    let (w, h) = img.dims();
    let c = img.channels();
    let src: Vec<f64> = img.data().iter().map(|&v| f64::from(v)).collect();
    let mut tmp = vec![0.0; src.len()];
    for y in 0..h {
        for x in 0..w {
            for ch in 0..c {
                let mut acc = 0.0;
                for (k, wt) in kernel.iter().enumerate() {
                    let sx = (x as isize + k as isize - r).clamp(0, w as isize - 1) as usize;
                    acc += wt * src[(y * w + sx) * c + ch];
                }
                tmp[(y * w + x) * c + ch] = acc;
            }
        }
    }
    let mut data = vec![0u8; src.len()];
    for y in 0..h {
        for x in 0..w {
            for ch in 0..c {
                let mut acc = 0.0;
                for (k, wt) in kernel.iter().enumerate() {
                    let sy = (y as isize + k as isize - r).clamp(0, h as isize - 1) as usize;
                    acc += wt * tmp[(sy * w + x) * c + ch];
                }
                data[(y * w + x) * c + ch] = acc.round().clamp(0.0, 255.0) as u8;
            }
        }
    }
    ImageBuffer::new(w, h, c, data).expect("same dimensions")
}

/// `[0,1]` RGB to `[0,1)` hue, saturation, value.
pub(crate) fn rgb_to_hsv([r, g, b]: [f64; 3]) -> [f64; 3] {
    let max = r.max(g).max(b);
    let min = r.min(g).min(b);
    let d = max - min;
    let h = if d == 0.0 {
        0.0
    } else if max == r {
        ((g - b) / d).rem_euclid(6.0) / 6.0
    } else if max == g {
        ((b - r) / d + 2.0) / 6.0
    } else {
        ((r - g) / d + 4.0) / 6.0
    };
    let s = if max == 0.0 { 0.0 } else { d / max };
    [h, s, max]
}

pub(crate) fn hsv_to_rgb([h, s, v]: [f64; 3]) -> [f64; 3] {
    let h6 = h.rem_euclid(1.0) * 6.0;
    let i = h6.floor();
    let f = h6 - i;
    let p = v * (1.0 - s);
    let q = v * (1.0 - s * f);
    let t = v * (1.0 - s * (1.0 - f));
    match i as u32 % 6 {
        0 => [v, t, p],
        1 => [q, v, p],
        2 => [p, v, t],
        3 => [p, q, v],
        4 => [t, p, v],
        _ => [v, p, q],
    }
}
