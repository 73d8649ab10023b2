//! Slow, direct reference computations shared by the oracle tests and the
//! acceptance harness. Nothing here calls into the library's numeric code.

#![allow(dead_code, clippy::needless_range_loop)]

use std::collections::BTreeMap;

use rand::Rng;

/// sRGB (D65) to Lab written out from the textbook formulas. The white point
/// is the matrix image of RGB (1, 1, 1).
pub fn lab_ref(rgb: [f64; 3]) -> [f64; 3] {
    let m = [
        [0.4124564, 0.3575761, 0.1804375],
        [0.2126729, 0.7151522, 0.0721750],
        [0.0193339, 0.1191920, 0.9503041],
    ];
    let lin: Vec<f64> = rgb
        .iter()
        .map(|&v| {
            let c = v / 255.0;
            if c <= 0.04045 {
                c / 12.92
            } else {
                ((c + 0.055) / 1.055).powf(2.4)
            }
        })
        .collect();
    let mut xyz = [0.0; 3];
    for r in 0..3 {
        let white: f64 = m[r].iter().sum();
        xyz[r] = (0..3).map(|c| m[r][c] * lin[c]).sum::<f64>() / white;
    }
    let eps = (6.0f64 / 29.0).powi(3);
    let f = |t: f64| if t > eps { t.cbrt() } else { t * (29.0f64 / 6.0).powi(2) / 3.0 + 4.0 / 29.0 };
    let (fx, fy, fz) = (f(xyz[0]), f(xyz[1]), f(xyz[2]));
    [116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)]
}

pub fn dist(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

pub fn bin_of(p: [u8; 3]) -> usize {
    let q = |v: u8| v as usize * 12 / 256;
    q(p[0]) * 144 + q(p[1]) * 12 + q(p[2])
}

/// Per-bin (mean RGB -> Lab, pixel count) over all occupied bins.
pub fn bin_stats(pixels: &[[u8; 3]]) -> BTreeMap<usize, ([f64; 3], usize)> {
    let mut acc: BTreeMap<usize, ([f64; 3], usize)> = BTreeMap::new();
    for &p in pixels {
        let e = acc.entry(bin_of(p)).or_insert(([0.0; 3], 0));
        for c in 0..3 {
            e.0[c] += f64::from(p[c]);
        }
        e.1 += 1;
    }
    acc.into_iter()
        .map(|(b, (sum, n))| (b, (lab_ref(sum.map(|s| s / n as f64)), n)))
        .collect()
}

/// Raw histogram-contrast saliency per pixel with every occupied bin kept.
pub fn hc_oracle(pixels: &[[u8; 3]]) -> Vec<f64> {
    let stats = bin_stats(pixels);
    let total = pixels.len() as f64;
    let mut sal = BTreeMap::new();
    for (&k, (lk, _)) in &stats {
        let mut s = 0.0;
        for (&j, (lj, nj)) in &stats {
            if j != k {
                s += (*nj as f64 / total) * dist(lk, lj);
            }
        }
        sal.insert(k, s);
    }
    pixels.iter().map(|&p| sal[&bin_of(p)]).collect()
}

/// Raw region-contrast saliency per region, every occupied bin kept.
/// `labels` must be dense.
pub fn rc_oracle(pixels: &[[u8; 3]], labels: &[u32], width: usize, height: usize, sigma_s: f64) -> Vec<f64> {
    let stats = bin_stats(pixels);
    let regions = *labels.iter().max().unwrap() as usize + 1;
    let diag = ((width * width + height * height) as f64).sqrt();
    let mut size = vec![0usize; regions];
    let mut cx = vec![0.0; regions];
    let mut cy = vec![0.0; regions];
    let mut hist: Vec<BTreeMap<usize, usize>> = vec![BTreeMap::new(); regions];
    for (i, (&p, &l)) in pixels.iter().zip(labels).enumerate() {
        let l = l as usize;
        size[l] += 1;
        cx[l] += (i % width) as f64 + 0.5;
        cy[l] += (i / width) as f64 + 0.5;
        *hist[l].entry(bin_of(p)).or_insert(0) += 1;
    }
    let total = pixels.len() as f64;
    let mut out = vec![0.0; regions];
    for k in 0..regions {
        for i in 0..regions {
            if i == k {
                continue;
            }
            let dx = (cx[k] / size[k] as f64 - cx[i] / size[i] as f64) / diag;
            let dy = (cy[k] / size[k] as f64 - cy[i] / size[i] as f64) / diag;
            let spatial = (-(dx * dx + dy * dy) / (sigma_s * sigma_s)).exp();
            let mut dr = 0.0;
            for (a, &na) in &hist[k] {
                for (b, &nb) in &hist[i] {
                    let fa = na as f64 / size[k] as f64;
                    let fb = nb as f64 / size[i] as f64;
                    dr += fa * fb * dist(&stats[a].0, &stats[b].0);
                }
            }
            out[k] += spatial * (size[i] as f64 / total) * dr;
        }
    }
    out
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-300)
}

/// Random image using at most `max_colors` distinct colors.
pub fn random_palette_image(rng: &mut impl Rng, w: usize, h: usize, max_colors: usize) -> Vec<[u8; 3]> {
    let n = rng.random_range(1..=max_colors);
    let colors: Vec<[u8; 3]> = (0..n).map(|_| [rng.random(), rng.random(), rng.random()]).collect();
    (0..w * h).map(|_| colors[rng.random_range(0..n)]).collect()
}

/// Guillotine partition of a `w` x `h` grid into `regions` rectangles, each
/// painted with a random mix of 1-3 colors. Labels are dense in raster order
/// of first appearance.
pub fn random_region_image(rng: &mut impl Rng, w: usize, h: usize, regions: usize) -> (Vec<[u8; 3]>, Vec<u32>) {
    let mut rects = vec![(0usize, 0usize, w, h)];
    while rects.len() < regions {
        let idx = (0..rects.len()).max_by_key(|&i| rects[i].2 * rects[i].3).unwrap();
        let (x, y, rw, rh) = rects.swap_remove(idx);
        if rw >= rh {
            let cut = rng.random_range(rw / 4..=3 * rw / 4).max(1);
            rects.push((x, y, cut, rh));
            rects.push((x + cut, y, rw - cut, rh));
        } else {
            let cut = rng.random_range(rh / 4..=3 * rh / 4).max(1);
            rects.push((x, y, rw, cut));
            rects.push((x, y + cut, rw, rh - cut));
        }
    }
    let mut raw = vec![0u32; w * h];
    let mut pixels = vec![[0u8; 3]; w * h];
    for (r, &(x0, y0, rw, rh)) in rects.iter().enumerate() {
        let k = rng.random_range(1..=3);
        let colors: Vec<[u8; 3]> = (0..k).map(|_| [rng.random(), rng.random(), rng.random()]).collect();
        for y in y0..y0 + rh {
            for x in x0..x0 + rw {
                raw[y * w + x] = r as u32;
                pixels[y * w + x] = colors[rng.random_range(0..k)];
            }
        }
    }
    let mut remap = BTreeMap::new();
    let labels = raw
        .iter()
        .map(|&r| {
            let next = remap.len() as u32;
            *remap.entry(r).or_insert(next)
        })
        .collect();
    (pixels, labels)
}

/// `(u, v, cap)` edges between non-terminal nodes plus source/sink caps.
pub struct SmallGraph {
    pub n: usize,
    pub source: Vec<f64>,
    pub sink: Vec<f64>,
    pub edges: Vec<(usize, usize, f64)>,
}

pub fn random_small_graph(rng: &mut impl Rng) -> SmallGraph {
    let n = rng.random_range(1..=8);
    let cap = |rng: &mut dyn rand::RngCore| f64::from(rng.random_range(0..=10u32));
    let source = (0..n).map(|_| if rng.random_bool(0.6) { cap(rng) } else { 0.0 }).collect();
    let sink = (0..n).map(|_| if rng.random_bool(0.6) { cap(rng) } else { 0.0 }).collect();
    let m = rng.random_range(0..=n * 3);
    let edges = (0..m)
        .filter_map(|_| {
            let u = rng.random_range(0..n);
            let v = rng.random_range(0..n);
            (u != v).then(|| (u, v, cap(rng)))
        })
        .collect();
    SmallGraph { n, source, sink, edges }
}

/// Minimum s-t cut capacity over all `2^n` partitions; bit set = source side.
pub fn brute_min_cut(g: &SmallGraph) -> f64 {
    let mut best = f64::INFINITY;
    for mask in 0u32..(1 << g.n) {
        let on_source = |i: usize| mask & (1 << i) != 0;
        let mut c = 0.0;
        for i in 0..g.n {
            c += if on_source(i) { g.sink[i] } else { g.source[i] };
        }
        for &(u, v, cap) in &g.edges {
            if on_source(u) && !on_source(v) {
                c += cap;
            }
        }
        best = best.min(c);
    }
    best
}

pub type Part = (f64, [f64; 3], [[f64; 3]; 3]);

/// `ln sum_k w_k N(z | mu_k, Sigma_k)` via the explicit 3x3 inverse and
/// determinant.
pub fn gmm_log_lik_ref(parts: &[Part], z: &[f64; 3]) -> f64 {
    let mut terms = Vec::new();
    for (w, mu, c) in parts {
        let det = c[0][0] * (c[1][1] * c[2][2] - c[1][2] * c[2][1]) - c[0][1] * (c[1][0] * c[2][2] - c[1][2] * c[2][0])
            + c[0][2] * (c[1][0] * c[2][1] - c[1][1] * c[2][0]);
        let mut inv = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                let (a, b) = ((j + 1) % 3, (j + 2) % 3);
                let (r, s) = ((i + 1) % 3, (i + 2) % 3);
                inv[i][j] = (c[a][r] * c[b][s] - c[a][s] * c[b][r]) / det;
            }
        }
        let d = [z[0] - mu[0], z[1] - mu[1], z[2] - mu[2]];
        let mut q = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                q += d[i] * inv[i][j] * d[j];
            }
        }
        terms.push(w.ln() - 0.5 * q - 0.5 * ((2.0 * std::f64::consts::PI).powi(3) * det).ln());
    }
    let top = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    top + terms.iter().map(|t| (t - top).exp()).sum::<f64>().ln()
}

/// 0 = background, 1 = foreground, 2 = unknown.
pub struct TinyMrf {
    pub width: usize,
    pub height: usize,
    pub lab: Vec<[f64; 3]>,
    pub trimap: Vec<u8>,
    pub fg: Vec<Part>,
    pub bg: Vec<Part>,
    pub lambda: f64,
    pub beta: f64,
}

impl TinyMrf {
    fn pairs(&self) -> Vec<(usize, usize, f64)> {
        let (w, h) = (self.width as isize, self.height as isize);
        let mut out = Vec::new();
        for y in 0..h {
            for x in 0..w {
                for (dx, dy) in [(1, 0), (0, 1), (1, 1), (-1, 1)] {
                    let (nx, ny) = (x + dx, y + dy);
                    if nx >= 0 && nx < w && ny < h {
                        let p = (y * w + x) as usize;
                        let q = (ny * w + nx) as usize;
                        let d2 = dist(&self.lab[p], &self.lab[q]).powi(2);
                        let len = if dx != 0 && dy != 0 { 2f64.sqrt() } else { 1.0 };
                        out.push((p, q, self.lambda * (-self.beta * d2).exp() / len));
                    }
                }
            }
        }
        out
    }

    /// GrabCut energy of `labels` (true = foreground); infinite when a
    /// trimap-fixed pixel is flipped.
    pub fn energy(&self, labels: &[bool]) -> f64 {
        let mut e = 0.0;
        for (p, &fg) in labels.iter().enumerate() {
            match (self.trimap[p], fg) {
                (0, true) | (1, false) => return f64::INFINITY,
                (2, true) => e -= gmm_log_lik_ref(&self.fg, &self.lab[p]),
                (2, false) => e -= gmm_log_lik_ref(&self.bg, &self.lab[p]),
                _ => {}
            }
        }
        for (p, q, w) in self.pairs() {
            if labels[p] != labels[q] {
                e += w;
            }
        }
        e
    }

    pub fn brute_min_energy(&self) -> f64 {
        let n = self.width * self.height;
        let mut best = f64::INFINITY;
        let mut labels = vec![false; n];
        for mask in 0u32..(1 << n) {
            for (i, l) in labels.iter_mut().enumerate() {
                *l = mask & (1 << i) != 0;
            }
            best = best.min(self.energy(&labels));
        }
        best
    }
}

fn random_part(rng: &mut impl Rng, weight: f64) -> Part {
    let mean = [rng.random_range(0.0..100.0), rng.random_range(-60.0..60.0), rng.random_range(-60.0..60.0)];
    // A A^T + s I is symmetric positive definite.
    let a: Vec<[f64; 3]> = (0..3).map(|_| [rng.random_range(-8.0..8.0), rng.random_range(-8.0..8.0), rng.random_range(-8.0..8.0)]).collect();
    let mut cov = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            cov[i][j] = (0..3).map(|k| a[i][k] * a[j][k]).sum::<f64>() + if i == j { 20.0 } else { 0.0 };
        }
    }
    (weight, mean, cov)
}

pub fn random_tiny_mrf(rng: &mut impl Rng) -> TinyMrf {
    let fg_mean = [rng.random_range(0.0..100.0), rng.random_range(-50.0..50.0), rng.random_range(-50.0..50.0)];
    let bg_mean = [rng.random_range(0.0..100.0), rng.random_range(-50.0..50.0), rng.random_range(-50.0..50.0)];
    let lab: Vec<[f64; 3]> = (0..16)
        .map(|i| {
            let base = if (i % 4 + i / 4) < 4 { fg_mean } else { bg_mean };
            [
                base[0] + rng.random_range(-15.0..15.0),
                base[1] + rng.random_range(-15.0..15.0),
                base[2] + rng.random_range(-15.0..15.0),
            ]
        })
        .collect();
    let trimap = (0..16)
        .map(|_| match rng.random_range(0..10) {
            0 => 0,
            1 => 1,
            _ => 2,
        })
        .collect();
    let w = rng.random_range(0.2..0.8);
    let mut fg = vec![random_part(rng, w), random_part(rng, 1.0 - w)];
    fg[0].1 = fg_mean;
    let w = rng.random_range(0.2..0.8);
    let mut bg = vec![random_part(rng, w), random_part(rng, 1.0 - w)];
    bg[0].1 = bg_mean;
    TinyMrf {
        width: 4,
        height: 4,
        lab,
        trimap,
        fg,
        bg,
        lambda: rng.random_range(0.0..60.0),
        beta: rng.random_range(0.0..0.01),
    }
}
