use super::ImageBuffer;

struct Tap {
    lo: usize,
    hi: usize,
    frac: f64,
}

// Half-pixel-center mapping, clamped at the borders.
fn taps(src: usize, dst: usize) -> Vec<Tap> {
    let scale = src as f64 / dst as f64;
    (0..dst)
        .map(|d| {
            let s = ((d as f64 + 0.5) * scale - 0.5).clamp(0.0, (src - 1) as f64);
            let lo = s.floor() as usize;
            let hi = (lo + 1).min(src - 1);
            Tap { lo, hi, frac: s - lo as f64 }
        })
        .collect()
}

/// Bilinear resampling to `new_w x new_h`.
pub fn resize(img: &ImageBuffer, new_w: usize, new_h: usize) -> ImageBuffer {
    assert!(new_w > 0 && new_h > 0, "target dimensions must be non-zero");
    if img.dims() == (new_w, new_h) {
        return img.clone();
    }
    let c = img.channels();
    let (w, src) = (img.width(), img.data());
    let xs = taps(img.width(), new_w);
    let ys = taps(img.height(), new_h);
    let mut out = Vec::with_capacity(new_w * new_h * c);
    for ty in &ys {
        let (r0, r1) = (ty.lo * w, ty.hi * w);
        for tx in &xs {
            for ch in 0..c {
                let p = |row: usize, col: usize| src[(row + col) * c + ch] as f64;
                let top = p(r0, tx.lo) * (1.0 - tx.frac) + p(r0, tx.hi) * tx.frac;
                let bot = p(r1, tx.lo) * (1.0 - tx.frac) + p(r1, tx.hi) * tx.frac;
                let v = top * (1.0 - ty.frac) + bot * ty.frac;
                out.push(v.round().clamp(0.0, 255.0) as u8);
            }
        }
    }
    ImageBuffer::new(new_w, new_h, c, out).expect("resize preserves buffer invariants")
}

/// Nearest-neighbor resampling; never introduces new colors, so label maps
/// stay label maps.
pub fn resize_nearest(img: &ImageBuffer, new_w: usize, new_h: usize) -> ImageBuffer {
    assert!(new_w > 0 && new_h > 0, "target dimensions must be non-zero");
    if img.dims() == (new_w, new_h) {
        return img.clone();
    }
    let c = img.channels();
    let pick = |src: usize, dst: usize, d: usize| ((d * 2 + 1) * src / (dst * 2)).min(src - 1);
    let mut out = Vec::with_capacity(new_w * new_h * c);
    for y in 0..new_h {
        let sy = pick(img.height(), new_h, y);
        for x in 0..new_w {
            let sx = pick(img.width(), new_w, x);
            out.extend_from_slice(img.pixel(sx, sy));
        }
    }
    ImageBuffer::new(new_w, new_h, c, out).expect("resize preserves buffer invariants")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_size_is_identity() {
        let img = ImageBuffer::from_fn_rgb(7, 5, |x, y| [x as u8 * 30, y as u8 * 40, 9]);
        assert_eq!(resize(&img, 7, 5), img);
        assert_eq!(resize_nearest(&img, 7, 5), img);
    }

    #[test]
    fn tenth_scale_dimensions() {
        let img = ImageBuffer::filled(600, 450, [10, 20, 30]);
        let small = resize(&img, 60, 45);
        assert_eq!(small.dims(), (60, 45));
        assert!(small.rgb_pixels().all(|p| p == [10, 20, 30]));
    }

    #[test]
    fn upsampled_ramp_is_monotone() {
        // Source coords for x = 0..4 are -0.25, 0.25, 0.75, 1.25 (clamped at the
        // ends), giving weights 0, 1/4, 3/4, 1 on the right sample.
        let img = ImageBuffer::new(2, 1, 1, vec![0, 255]).unwrap();
        let up = resize(&img, 4, 1);
        assert_eq!(up.data(), &[0, 64, 191, 255]);
        assert!(up.data().windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn nearest_keeps_palette() {
        let img = ImageBuffer::from_fn_rgb(5, 3, |x, _| if x < 2 { [1, 2, 3] } else { [200, 100, 50] });
        let big = resize_nearest(&img, 13, 8);
        assert!(big.rgb_pixels().all(|p| p == [1, 2, 3] || p == [200, 100, 50]));
    }
}
