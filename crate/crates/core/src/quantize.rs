//! Fixed 12-level color quantization and frequency-based palette reduction.
//!
//! Every channel is cut into 12 equal bins, giving at most 1728 colors. The
//! histogram over those bins is then trimmed to the most frequent colors that
//! together cover a requested fraction of the pixels; the remaining bins are
//! folded into their nearest retained color (Lab distance between the bins'
//! mean colors).

use std::fmt::Write as _;

use crate::imagecore::{lab_distance_sq, srgb_to_lab, ImageBuffer};
use crate::{Error, Result};

pub const LEVELS: usize = 12;
pub const BIN_COUNT: usize = LEVELS * LEVELS * LEVELS;
pub const DEFAULT_COVERAGE: f64 = 0.95;

const PALETTE_HEADER: &str = "# saliencut palette v1";

#[inline]
pub fn channel_bin(v: u8) -> usize {
    v as usize * LEVELS / 256
}

#[inline]
pub fn bin_index(rgb: [u8; 3]) -> u16 {
    (channel_bin(rgb[0]) * LEVELS * LEVELS + channel_bin(rgb[1]) * LEVELS + channel_bin(rgb[2])) as u16
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuantizedImage {
    pub width: usize,
    pub height: usize,
    pub bins: Vec<u16>,
}

pub fn quantize_image(img: &ImageBuffer) -> QuantizedImage {
    QuantizedImage {
        width: img.width(),
        height: img.height(),
        bins: img.rgb_pixels().map(bin_index).collect(),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct HistogramEntry {
    pub bin: u16,
    pub count: usize,
    pub frequency: f64,
    /// Mean RGB of the pixels in this bin.
    pub color: [f64; 3],
}

/// Occupied bins sorted by descending frequency, ties by ascending bin.
#[derive(Clone, Debug, PartialEq)]
pub struct ColorHistogram {
    pub total: usize,
    pub entries: Vec<HistogramEntry>,
}

pub fn build_histogram(q: &QuantizedImage, img: &ImageBuffer) -> Result<ColorHistogram> {
    if (q.width, q.height) != img.dims() {
        return Err(Error::DimensionMismatch {
            expected: (q.width, q.height),
            actual: img.dims(),
        });
    }
    let mut counts = vec![0usize; BIN_COUNT];
    let mut sums = vec![[0u64; 3]; BIN_COUNT];
    for (&bin, rgb) in q.bins.iter().zip(img.rgb_pixels()) {
        let b = bin as usize;
        counts[b] += 1;
        for c in 0..3 {
            sums[b][c] += rgb[c] as u64;
        }
    }
    let total = q.bins.len();
    let mut entries: Vec<HistogramEntry> = (0..BIN_COUNT)
        .filter(|&b| counts[b] > 0)
        .map(|b| {
            let n = counts[b] as f64;
            HistogramEntry {
                bin: b as u16,
                count: counts[b],
                frequency: counts[b] as f64 / total as f64,
                color: sums[b].map(|s| s as f64 / n),
            }
        })
        .collect();
    entries.sort_by(|a, b| b.count.cmp(&a.count).then(a.bin.cmp(&b.bin)));
    Ok(ColorHistogram { total, entries })
}

#[derive(Clone, Debug, PartialEq)]
pub struct PaletteEntry {
    pub bin: u16,
    /// Mean RGB of the bin's own pixels.
    pub color: [f64; 3],
    pub lab: [f64; 3],
    /// Fraction of pixels in the bin itself, before folding in discarded bins.
    pub frequency: f64,
}

/// The retained colors plus a total map from every occupied bin to one of them.
#[derive(Clone, Debug, PartialEq)]
pub struct ColorPalette {
    pub retained: Vec<PaletteEntry>,
    remap: Vec<u32>,
}

const UNMAPPED: u32 = u32::MAX;

impl ColorPalette {
    pub fn len(&self) -> usize {
        self.retained.len()
    }

    pub fn is_empty(&self) -> bool {
        self.retained.is_empty()
    }

    /// Retained-palette index for a bin, `None` if the bin was never occupied.
    #[inline]
    pub fn remap(&self, bin: u16) -> Option<usize> {
        match self.remap[bin as usize] {
            UNMAPPED => None,
            i => Some(i as usize),
        }
    }

    /// Palette index per pixel. Panics if a pixel falls in a bin this palette
    /// was not built from.
    pub fn index_image(&self, q: &QuantizedImage) -> Vec<u32> {
        q.bins
            .iter()
            .map(|&b| {
                let i = self.remap[b as usize];
                assert!(i != UNMAPPED, "bin {b} not covered by palette");
                i
            })
            .collect()
    }

    /// Per-retained-color pixel fractions with discarded bins merged into
    /// their targets; sums to 1.
    pub fn merged_frequencies(&self, q: &QuantizedImage) -> Vec<f64> {
        let mut counts = vec![0usize; self.len()];
        for i in self.index_image(q) {
            counts[i as usize] += 1;
        }
        let total = q.bins.len() as f64;
        counts.into_iter().map(|c| c as f64 / total).collect()
    }

    /// Pairwise Lab distances between retained colors, row-major.
    pub fn distance_matrix(&self) -> Vec<f64> {
        let n = self.len();
        let mut d = vec![0.0; n * n];
        for i in 0..n {
            for j in i + 1..n {
                let v = lab_distance_sq(&self.retained[i].lab, &self.retained[j].lab).sqrt();
                d[i * n + j] = v;
                d[j * n + i] = v;
            }
        }
        d
    }

    /// Versioned text form: one `bin<TAB>r<TAB>g<TAB>b<TAB>frequency` line per
    /// retained entry, colors rounded to 8 bits.
    pub fn to_text(&self) -> String {
        let mut s = String::from(PALETTE_HEADER);
        s.push('\n');
        for e in &self.retained {
            let c = e.color.map(|v| v.round() as u8);
            let _ = writeln!(s, "{}\t{}\t{}\t{}\t{:.9}", e.bin, c[0], c[1], c[2], e.frequency);
        }
        s
    }

    /// Reads retained colors back from [`to_text`](Self::to_text) output.
    /// Discarded-bin remapping is not serialized, so only retained bins map.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, h)) if h.trim() == PALETTE_HEADER => {}
            Some((_, h)) => return Err(Error::VersionMismatch(h.to_string())),
            None => return Err(Error::EmptyHistogram),
        }
        let mut retained = Vec::new();
        for (n, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let bad = |reason: &str| Error::Parse {
                what: "palette",
                line: n + 1,
                reason: reason.to_string(),
            };
            let f: Vec<&str> = line.split('\t').collect();
            if f.len() != 5 {
                return Err(bad("expected 5 tab-separated fields"));
            }
            let bin: u16 = f[0].parse().map_err(|_| bad("bin"))?;
            if bin as usize >= BIN_COUNT {
                return Err(bad("bin out of range"));
            }
            let mut rgb = [0u8; 3];
            for c in 0..3 {
                rgb[c] = f[c + 1].parse().map_err(|_| bad("color"))?;
            }
            let frequency: f64 = f[4].parse().map_err(|_| bad("frequency"))?;
            retained.push(PaletteEntry {
                bin,
                color: rgb.map(f64::from),
                lab: srgb_to_lab(rgb),
                frequency,
            });
        }
        if retained.is_empty() {
            return Err(Error::EmptyHistogram);
        }
        let mut remap = vec![UNMAPPED; BIN_COUNT];
        for (i, e) in retained.iter().enumerate() {
            remap[e.bin as usize] = i as u32;
        }
        Ok(Self { retained, remap })
    }
}

/// Keeps the shortest frequency-sorted prefix covering at least `coverage` of
/// the pixels and remaps every other bin to its nearest retained color.
pub fn reduce_histogram(hist: &ColorHistogram, coverage: f64) -> Result<ColorPalette> {
    if !(coverage > 0.0 && coverage <= 1.0) {
        return Err(Error::InvalidParameter(format!("coverage {coverage} not in (0, 1]")));
    }
    if hist.entries.is_empty() {
        return Err(Error::EmptyHistogram);
    }
    let needed = coverage * hist.total as f64;
    let slack = 1e-9 * hist.total as f64;
    let mut cum = 0usize;
    let mut keep = hist.entries.len();
    for (i, e) in hist.entries.iter().enumerate() {
        cum += e.count;
        if cum as f64 + slack >= needed {
            keep = i + 1;
            break;
        }
    }
    let retained: Vec<PaletteEntry> = hist.entries[..keep]
        .iter()
        .map(|e| PaletteEntry {
            bin: e.bin,
            color: e.color,
            lab: crate::imagecore::srgb_f64_to_lab(e.color),
            frequency: e.frequency,
        })
        .collect();
    let mut remap = vec![UNMAPPED; BIN_COUNT];
    for (i, e) in retained.iter().enumerate() {
        remap[e.bin as usize] = i as u32;
    }
    for e in &hist.entries[keep..] {
        let lab = crate::imagecore::srgb_f64_to_lab(e.color);
        // Retained entries are already in (frequency desc, bin asc) order, so
        // the first strict minimum honors the tie-breaking rule.
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (i, r) in retained.iter().enumerate() {
            let d = lab_distance_sq(&lab, &r.lab);
            if d < best_d {
                best_d = d;
                best = i;
            }
        }
        remap[e.bin as usize] = best as u32;
    }
    Ok(ColorPalette { retained, remap })
}

/// Quantize, histogram and reduce in one step.
pub fn image_palette(img: &ImageBuffer, coverage: f64) -> Result<(QuantizedImage, ColorPalette)> {
    let q = quantize_image(img);
    let hist = build_histogram(&q, img)?;
    let palette = reduce_histogram(&hist, coverage)?;
    Ok((q, palette))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn extreme_bins() {
        assert_eq!(bin_index([0, 0, 0]), 0);
        assert_eq!(bin_index([255, 255, 255]), 1727);
        assert_eq!(channel_bin(21), 0);
        assert_eq!(channel_bin(22), 1);
    }

    #[test]
    fn uniform_image_has_single_entry() {
        let img = ImageBuffer::filled(8, 8, [40, 90, 200]);
        let h = build_histogram(&quantize_image(&img), &img).unwrap();
        assert_eq!(h.entries.len(), 1);
        assert_eq!(h.entries[0].frequency, 1.0);
        assert_eq!(h.entries[0].color, [40.0, 90.0, 200.0]);
    }

    #[test]
    fn three_quarter_split() {
        let img = ImageBuffer::from_fn_rgb(32, 32, |x, _| if x < 24 { [250, 10, 10] } else { [10, 10, 250] });
        let h = build_histogram(&quantize_image(&img), &img).unwrap();
        assert_eq!(h.entries.len(), 2);
        assert_eq!(h.entries[0].frequency, 0.75);
        assert_eq!(h.entries[1].frequency, 0.25);
    }

    #[test]
    fn dimension_mismatch() {
        let a = ImageBuffer::filled(4, 4, [0, 0, 0]);
        let b = ImageBuffer::filled(4, 5, [0, 0, 0]);
        assert!(matches!(
            build_histogram(&quantize_image(&a), &b),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn full_coverage_keeps_everything() {
        let img = ImageBuffer::from_fn_rgb(10, 10, |x, y| [(x * 25) as u8, (y * 25) as u8, 0]);
        let q = quantize_image(&img);
        let h = build_histogram(&q, &img).unwrap();
        let p = reduce_histogram(&h, 1.0).unwrap();
        assert_eq!(p.len(), h.entries.len());
        for (i, e) in p.retained.iter().enumerate() {
            assert_eq!(p.remap(e.bin), Some(i));
        }
    }

    #[test]
    fn drops_rare_color_to_nearest() {
        // 80 red, 15 blue, 5 dark red: cumulative 0.80, 0.95 -> two retained.
        // Dark red (120,0,0) is far closer in Lab to red than to blue.
        let img = ImageBuffer::from_fn_rgb(10, 10, |x, y| match y * 10 + x {
            0..=79 => [250, 0, 0],
            80..=94 => [0, 0, 250],
            _ => [120, 0, 0],
        });
        let q = quantize_image(&img);
        let h = build_histogram(&q, &img).unwrap();
        let p = reduce_histogram(&h, 0.95).unwrap();
        assert_eq!(p.len(), 2);
        let red = srgb_to_lab([250, 0, 0]);
        let blue = srgb_to_lab([0, 0, 250]);
        let dark = srgb_to_lab([120, 0, 0]);
        assert!(lab_distance_sq(&dark, &red) < lab_distance_sq(&dark, &blue));
        assert_eq!(p.remap(bin_index([120, 0, 0])), Some(0));
        let f = p.merged_frequencies(&q);
        assert!((f[0] - 0.85).abs() < 1e-12 && (f[1] - 0.15).abs() < 1e-12);
    }

    #[test]
    fn invalid_inputs() {
        let h = ColorHistogram {
            total: 0,
            entries: vec![],
        };
        assert!(matches!(reduce_histogram(&h, 0.5), Err(Error::EmptyHistogram)));
        let img = ImageBuffer::filled(2, 2, [1, 1, 1]);
        let h = build_histogram(&quantize_image(&img), &img).unwrap();
        assert!(reduce_histogram(&h, 0.0).is_err());
        assert!(reduce_histogram(&h, 1.5).is_err());
    }

    #[test]
    fn palette_text_round_trip() {
        let img = ImageBuffer::from_fn_rgb(6, 6, |x, y| [(x * 40) as u8, (y * 40) as u8, 99]);
        let (_, p) = image_palette(&img, 0.9).unwrap();
        let text = p.to_text();
        let back = ColorPalette::from_text(&text).unwrap();
        assert_eq!(back.len(), p.len());
        assert_eq!(back.to_text(), text);
        assert!(ColorPalette::from_text("# other v9\n").is_err());
    }

    fn lcg_image(w: usize, h: usize, seed: u64) -> ImageBuffer {
        let mut s = seed;
        ImageBuffer::from_fn_rgb(w, h, |_, _| {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let v = s >> 16;
            [(v & 0xff) as u8, ((v >> 8) & 0xff) as u8, ((v >> 16) & 0x3f) as u8]
        })
    }

    proptest! {
        #[test]
        fn reduction_laws(seed in any::<u64>(), coverage in 0.05f64..=1.0) {
            let img = lcg_image(12, 12, seed);
            let q = quantize_image(&img);
            let h = build_histogram(&q, &img).unwrap();
            let total: f64 = h.entries.iter().map(|e| e.frequency).sum();
            prop_assert!((total - 1.0).abs() < 1e-9);
            prop_assert!(h.entries.len() <= BIN_COUNT);

            let p = reduce_histogram(&h, coverage).unwrap();
            // Prefix of the sorted histogram.
            for (e, r) in h.entries.iter().zip(&p.retained) {
                prop_assert_eq!(e.bin, r.bin);
            }
            // Coverage reached, and minimal.
            let kept: usize = h.entries[..p.len()].iter().map(|e| e.count).sum();
            prop_assert!(kept as f64 >= coverage * h.total as f64 - 1e-9);
            let without_last = kept - h.entries[p.len() - 1].count;
            prop_assert!((without_last as f64) < coverage * h.total as f64 - 1e-9 * h.total as f64);
            // Total remap, fixed on retained bins.
            for e in &h.entries {
                prop_assert!(p.remap(e.bin).is_some());
            }
            for (i, r) in p.retained.iter().enumerate() {
                prop_assert_eq!(p.remap(r.bin), Some(i));
            }
            // Mean colors stay inside their bins.
            for r in &p.retained {
                prop_assert_eq!(bin_index(r.color.map(|v| v.round() as u8)), r.bin);
            }
        }
    }
}
