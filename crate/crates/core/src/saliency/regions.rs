//! Graph-based over-segmentation (Felzenszwalb-Huttenlocher) on an
//! 8-connected pixel graph with Lab edge weights.

use crate::imagecore::{lab_distance, rgb_to_lab, ImageBuffer, LabImage};
use crate::quantize::{image_palette, ColorPalette, QuantizedImage, DEFAULT_COVERAGE};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct RegionParams {
    /// Merge threshold scale `k` in Lab distance units.
    pub scale_k: f64,
    pub min_size: usize,
    /// Palette coverage used for the per-region color histograms.
    pub coverage: f64,
}

impl Default for RegionParams {
    fn default() -> Self {
        Self {
            scale_k: 50.0,
            min_size: 50,
            coverage: DEFAULT_COVERAGE,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Region {
    pub size: usize,
    /// Mean pixel-center position divided by the image diagonal.
    pub centroid: [f64; 2],
    /// `(palette index, fraction of the region)` sorted by palette index.
    pub color_hist: Vec<(u32, f64)>,
}

/// Dense region labeling with per-region statistics over a reduced palette.
#[derive(Clone, Debug)]
pub struct RegionMap {
    pub width: usize,
    pub height: usize,
    pub labels: Vec<u32>,
    pub regions: Vec<Region>,
    pub quantized: QuantizedImage,
    pub palette: ColorPalette,
}

impl RegionMap {
    /// Computes region statistics for an existing labeling. Labels must be
    /// dense in `0..R`.
    pub fn from_labels(img: &ImageBuffer, labels: Vec<u32>, coverage: f64) -> Result<Self> {
        if labels.len() != img.pixel_count() {
            return Err(Error::InvalidBuffer(format!(
                "{} labels for {} pixels",
                labels.len(),
                img.pixel_count()
            )));
        }
        let region_count = labels.iter().max().map_or(0, |&m| m as usize + 1);
        let (w, h) = img.dims();
        let diag = ((w * w + h * h) as f64).sqrt();
        let (quantized, palette) = image_palette(img, coverage)?;
        let index = palette.index_image(&quantized);

        let mut sizes = vec![0usize; region_count];
        let mut sums = vec![[0.0f64; 2]; region_count];
        for (i, &l) in labels.iter().enumerate() {
            let l = l as usize;
            sizes[l] += 1;
            sums[l][0] += (i % w) as f64 + 0.5;
            sums[l][1] += (i / w) as f64 + 0.5;
        }
        if let Some(empty) = sizes.iter().position(|&s| s == 0) {
            return Err(Error::InvalidBuffer(format!("label {empty} is unused; labels must be dense")));
        }

        let mut pairs: Vec<(u32, u32)> = labels.iter().copied().zip(index.iter().copied()).collect();
        pairs.sort_unstable();
        let mut hists: Vec<Vec<(u32, f64)>> = vec![Vec::new(); region_count];
        let mut i = 0;
        while i < pairs.len() {
            let mut j = i;
            while j < pairs.len() && pairs[j] == pairs[i] {
                j += 1;
            }
            let (l, c) = pairs[i];
            hists[l as usize].push((c, (j - i) as f64 / sizes[l as usize] as f64));
            i = j;
        }

        let regions = (0..region_count)
            .map(|r| Region {
                size: sizes[r],
                centroid: [
                    sums[r][0] / sizes[r] as f64 / diag,
                    sums[r][1] / sizes[r] as f64 / diag,
                ],
                color_hist: std::mem::take(&mut hists[r]),
            })
            .collect();
        Ok(Self {
            width: w,
            height: h,
            labels,
            regions,
            quantized,
            palette,
        })
    }

    pub fn len(&self) -> usize {
        self.regions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.regions.is_empty()
    }

    /// Pseudo-color rendering: each region gets a deterministic hashed color.
    pub fn to_color_image(&self) -> ImageBuffer {
        let color = |l: u32| {
            let mut x = (l as u64).wrapping_add(0x9E37_79B9_7F4A_7C15);
            x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
            x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
            [(x >> 8) as u8, (x >> 24) as u8, (x >> 40) as u8]
        };
        ImageBuffer::from_fn_rgb(self.width, self.height, |x, y| color(self.labels[y * self.width + x]))
    }

    /// Tab-separated region statistics, one region per line.
    pub fn stats_text(&self) -> String {
        let mut s = String::from("# region\tsize\tcx\tcy\tcolors\n");
        for (i, r) in self.regions.iter().enumerate() {
            s.push_str(&format!(
                "{i}\t{}\t{:.6}\t{:.6}\t{}\n",
                r.size,
                r.centroid[0],
                r.centroid[1],
                r.color_hist.len()
            ));
        }
        s
    }
}

struct DisjointSets {
    parent: Vec<u32>,
    size: Vec<u32>,
    internal: Vec<f64>,
}

impl DisjointSets {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n as u32).collect(),
            size: vec![1; n],
            internal: vec![0.0; n],
        }
    }

    fn find(&mut self, mut x: u32) -> u32 {
        let mut root = x;
        while self.parent[root as usize] != root {
            root = self.parent[root as usize];
        }
        while self.parent[x as usize] != root {
            let next = self.parent[x as usize];
            self.parent[x as usize] = root;
            x = next;
        }
        root
    }

    fn union(&mut self, a: u32, b: u32, weight: f64) {
        let (big, small) = if self.size[a as usize] >= self.size[b as usize] {
            (a, b)
        } else {
            (b, a)
        };
        self.parent[small as usize] = big;
        self.size[big as usize] += self.size[small as usize];
        self.internal[big as usize] = weight.max(self.internal[a as usize]).max(self.internal[b as usize]);
    }
}

/// Dense labels (raster order of first appearance) from graph-based
/// segmentation of a Lab image.
pub fn segment_labels(lab: &LabImage, scale_k: f64, min_size: usize) -> Vec<u32> {
    let (w, h) = lab.dims();
    let n = w * h;
    let mut edges: Vec<(f64, u32, u32)> = Vec::with_capacity(n * 4);
    let mut push = |a: usize, b: usize| edges.push((lab_distance(&lab.data[a], &lab.data[b]), a as u32, b as u32));
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            if x + 1 < w {
                push(i, i + 1);
            }
            if y + 1 < h {
                push(i, i + w);
                if x + 1 < w {
                    push(i, i + w + 1);
                }
                if x > 0 {
                    push(i, i + w - 1);
                }
            }
        }
    }
    // Stable sort: equal weights keep generation order.
    edges.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut sets = DisjointSets::new(n);
    for &(wt, a, b) in &edges {
        let (ra, rb) = (sets.find(a), sets.find(b));
        if ra == rb {
            continue;
        }
        let ta = sets.internal[ra as usize] + scale_k / sets.size[ra as usize] as f64;
        let tb = sets.internal[rb as usize] + scale_k / sets.size[rb as usize] as f64;
        if wt <= ta.min(tb) {
            sets.union(ra, rb, wt);
        }
    }
    // Small components join their most similar neighbor: the cheapest edge
    // out of them comes first in sorted order.
    for &(wt, a, b) in &edges {
        let (ra, rb) = (sets.find(a), sets.find(b));
        if ra != rb && ((sets.size[ra as usize] as usize) < min_size || (sets.size[rb as usize] as usize) < min_size) {
            sets.union(ra, rb, wt);
        }
    }

    let mut dense = vec![u32::MAX; n];
    let mut next = 0u32;
    (0..n as u32)
        .map(|p| {
            let r = sets.find(p) as usize;
            if dense[r] == u32::MAX {
                dense[r] = next;
                next += 1;
            }
            dense[r]
        })
        .collect()
}

pub fn segment_regions(img: &ImageBuffer, params: &RegionParams) -> Result<RegionMap> {
    if !(params.scale_k > 0.0) {
        return Err(Error::InvalidParameter(format!("scale_k {} must be > 0", params.scale_k)));
    }
    if params.min_size == 0 {
        return Err(Error::InvalidParameter("min_size must be >= 1".into()));
    }
    let rgb = img.to_rgb();
    let lab = rgb_to_lab(&rgb)?;
    let labels = segment_labels(&lab, params.scale_k, params.min_size);
    RegionMap::from_labels(&rgb, labels, params.coverage)
}
