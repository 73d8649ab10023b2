use crate::{Error, Result};

/// Row-major 8-bit image with 1 (gray) or 3 (RGB) interleaved channels.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ImageBuffer {
    width: usize,
    height: usize,
    channels: usize,
    data: Vec<u8>,
}

impl std::fmt::Debug for ImageBuffer {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ImageBuffer")
            .field("width", &self.width)
            .field("height", &self.height)
            .field("channels", &self.channels)
            .finish_non_exhaustive()
    }
}

impl ImageBuffer {
    pub fn new(width: usize, height: usize, channels: usize, data: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidBuffer(format!("zero-sized image {width}x{height}")));
        }
        if channels != 1 && channels != 3 {
            return Err(Error::InvalidBuffer(format!("unsupported channel count {channels}")));
        }
        let expected = width * height * channels;
        if data.len() != expected {
            return Err(Error::InvalidBuffer(format!(
                "data length {} != {width}x{height}x{channels}",
                data.len()
            )));
        }
        Ok(Self {
            width,
            height,
            channels,
            data,
        })
    }

    /// A `width x height` RGB image filled with one color.
    pub fn filled(width: usize, height: usize, rgb: [u8; 3]) -> Self {
        assert!(width > 0 && height > 0, "image dimensions must be non-zero");
        let data = rgb.iter().copied().cycle().take(width * height * 3).collect();
        Self {
            width,
            height,
            channels: 3,
            data,
        }
    }

    /// Builds an RGB image from a per-pixel closure.
    pub fn from_fn_rgb(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> [u8; 3]) -> Self {
        assert!(width > 0 && height > 0, "image dimensions must be non-zero");
        let mut data = Vec::with_capacity(width * height * 3);
        for y in 0..height {
            for x in 0..width {
                data.extend_from_slice(&f(x, y));
            }
        }
        Self {
            width,
            height,
            channels: 3,
            data,
        }
    }

    /// Builds a single-channel image from a per-pixel closure.
    pub fn from_fn_gray(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> u8) -> Self {
        assert!(width > 0 && height > 0, "image dimensions must be non-zero");
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self {
            width,
            height,
            channels: 1,
            data,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn pixel_count(&self) -> usize {
        self.width * self.height
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [u8] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<u8> {
        self.data
    }

    pub fn pixel(&self, x: usize, y: usize) -> &[u8] {
        let i = (y * self.width + x) * self.channels;
        &self.data[i..i + self.channels]
    }

    /// RGB triple at linear pixel index `i`; gray images are replicated.
    #[inline]
    pub fn rgb_at(&self, i: usize) -> [u8; 3] {
        if self.channels == 3 {
            let o = i * 3;
            [self.data[o], self.data[o + 1], self.data[o + 2]]
        } else {
            let v = self.data[i];
            [v, v, v]
        }
    }

    pub fn rgb_pixels(&self) -> impl Iterator<Item = [u8; 3]> + '_ {
        (0..self.pixel_count()).map(move |i| self.rgb_at(i))
    }

    /// Canonical 3-channel form; gray samples are replicated.
    pub fn to_rgb(&self) -> ImageBuffer {
        if self.channels == 3 {
            return self.clone();
        }
        let data = self.data.iter().flat_map(|&v| [v, v, v]).collect();
        Self {
            width: self.width,
            height: self.height,
            channels: 3,
            data,
        }
    }

    pub(crate) fn require_rgb(&self) -> Result<()> {
        if self.channels != 3 {
            return Err(Error::WrongChannelCount {
                expected: 3,
                actual: self.channels,
            });
        }
        Ok(())
    }
}

/// Per-pixel CIE Lab triples.
#[derive(Clone, Debug, PartialEq)]
pub struct LabImage {
    pub width: usize,
    pub height: usize,
    pub data: Vec<[f64; 3]>,
}

impl LabImage {
    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }
}

/// Per-pixel foreground flags.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BinaryMask {
    width: usize,
    height: usize,
    data: Vec<bool>,
}

impl std::fmt::Debug for BinaryMask {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "BinaryMask {}x{}", self.width, self.height)?;
        if self.width * self.height <= 64 * 64 {
            for row in self.data.chunks(self.width) {
                let line: String = row.iter().map(|&b| if b { '#' } else { '.' }).collect();
                writeln!(f, "{line}")?;
            }
        }
        Ok(())
    }
}

impl BinaryMask {
    pub fn new(width: usize, height: usize) -> Self {
        Self::filled(width, height, false)
    }

    pub fn filled(width: usize, height: usize, value: bool) -> Self {
        Self {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    pub fn from_vec(width: usize, height: usize, data: Vec<bool>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::InvalidBuffer(format!(
                "mask length {} != {width}x{height}",
                data.len()
            )));
        }
        Ok(Self { width, height, data })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self { width, height, data }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn data(&self) -> &[bool] {
        &self.data
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        self.data[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, value: bool) {
        self.data[y * self.width + x] = value;
    }

    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.data.iter().any(|&b| b)
    }

    pub fn complement(&self) -> Self {
        Self {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&b| !b).collect(),
        }
    }

    /// True when every foreground pixel of `self` is foreground in `other`.
    pub fn is_subset_of(&self, other: &BinaryMask) -> bool {
        self.data.iter().zip(&other.data).all(|(&a, &b)| !a || b)
    }

    /// Number of pixels whose flag differs.
    pub fn hamming(&self, other: &BinaryMask) -> usize {
        self.data.iter().zip(&other.data).filter(|(a, b)| a != b).count()
    }

    /// Intersection over union; two empty masks score 1.
    pub fn iou(&self, other: &BinaryMask) -> f64 {
        let (mut inter, mut union) = (0usize, 0usize);
        for (&a, &b) in self.data.iter().zip(&other.data) {
            inter += (a && b) as usize;
            union += (a || b) as usize;
        }
        if union == 0 {
            1.0
        } else {
            inter as f64 / union as f64
        }
    }

    /// 0/255 grayscale rendering.
    pub fn to_image(&self) -> ImageBuffer {
        ImageBuffer::new(
            self.width,
            self.height,
            1,
            self.data.iter().map(|&b| if b { 255 } else { 0 }).collect(),
        )
        .expect("mask dimensions are non-zero")
    }

    /// Inverse of [`to_image`](Self::to_image): any non-zero sample is foreground.
    pub fn from_image(img: &ImageBuffer) -> Self {
        let data = (0..img.pixel_count()).map(|i| img.rgb_at(i) != [0, 0, 0]).collect();
        Self {
            width: img.width(),
            height: img.height(),
            data,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TrimapLabel {
    Bg,
    Fg,
    Unknown,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trimap {
    pub width: usize,
    pub height: usize,
    pub labels: Vec<TrimapLabel>,
}

impl Trimap {
    pub fn filled(width: usize, height: usize, label: TrimapLabel) -> Self {
        Self {
            width,
            height,
            labels: vec![label; width * height],
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn get(&self, x: usize, y: usize) -> TrimapLabel {
        self.labels[y * self.width + x]
    }

    pub fn count(&self, label: TrimapLabel) -> usize {
        self.labels.iter().filter(|&&l| l == label).count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_lengths() {
        assert!(ImageBuffer::new(2, 2, 3, vec![0; 11]).is_err());
        assert!(ImageBuffer::new(0, 2, 3, vec![]).is_err());
        assert!(ImageBuffer::new(1, 1, 4, vec![0; 4]).is_err());
        assert!(ImageBuffer::new(2, 2, 1, vec![0; 4]).is_ok());
    }

    #[test]
    fn gray_promotes_to_rgb() {
        let g = ImageBuffer::new(2, 1, 1, vec![7, 9]).unwrap();
        assert_eq!(g.to_rgb().data(), &[7, 7, 7, 9, 9, 9]);
    }

    #[test]
    fn iou_of_disjoint_and_equal_masks() {
        let a = BinaryMask::from_fn(4, 4, |x, _| x < 2);
        assert_eq!(a.iou(&a), 1.0);
        assert_eq!(a.iou(&a.complement()), 0.0);
        assert_eq!(BinaryMask::new(3, 3).iou(&BinaryMask::new(3, 3)), 1.0);
    }
}
