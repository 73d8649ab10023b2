use std::io::Write;
use std::time::Instant;

use anyhow::Result;
use saliencut::cache::{build_cache, hash_image, CacheStore, OpenOptions};
use saliencut::imagecore::{resize, write_png};
use saliencut::saliencycut::saliency_cut_colormap;
use saliencut::{CutParams, ImageBuffer};

use crate::Size;

/// Reference wall times, in seconds, that the rows are compared against.
const CUT_BASELINES: [((usize, usize), f64); 2] = [((60, 45), 1.0), ((600, 450), 120.0)];
const FETCH_BASELINE: f64 = 1.0;

#[derive(Clone, Debug, PartialEq)]
pub struct BenchRow {
    pub case: &'static str,
    pub size: Size,
    pub reps: usize,
    pub mean_s: f64,
    /// Sample standard deviation; `None` for a single repetition.
    pub sd_s: Option<f64>,
    pub baseline_s: Option<f64>,
    /// Leading hex digits of the output's content hash.
    pub digest: String,
}

/// Deterministic test scene: a disk and a bar over a soft gradient with a
/// little hashed texture.
pub fn synthetic_scene(width: usize, height: usize) -> ImageBuffer {
    ImageBuffer::from_fn_rgb(width, height, |x, y| {
        let u = (x as f64 + 0.5) / width as f64;
        let v = (y as f64 + 0.5) / height as f64;
        let noise = ((x.wrapping_mul(73_856_093) ^ y.wrapping_mul(19_349_663)) % 13) as f64 - 6.0;
        let base = if (u - 0.38).powi(2) + ((v - 0.5) * 0.75).powi(2) < 0.04 {
            [205.0, 40.0, 35.0]
        } else if (0.62..0.8).contains(&u) && (0.2..0.75).contains(&v) {
            [235.0, 200.0, 60.0]
        } else {
            [60.0 + 40.0 * v, 90.0 + 30.0 * u, 130.0 + 20.0 * v]
        };
        base.map(|c| (c + noise).clamp(0.0, 255.0) as u8)
    })
}

fn mean_sd(samples: &[f64]) -> (f64, Option<f64>) {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let sd = (samples.len() > 1)
        .then(|| (samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt());
    (mean, sd)
}

fn short_digest(img: &ImageBuffer) -> String {
    hash_image(img).to_hex()[..16].to_string()
}

/// One cut row per size, then a warm cache-fetch row at the largest size.
pub fn bench_table(source: Option<&ImageBuffer>, sizes: &[Size], reps: usize, params: &CutParams) -> Result<Vec<BenchRow>> {
    let reps = reps.max(1);
    let mut rows = Vec::new();
    let mut largest: Option<(Size, ImageBuffer)> = None;
    for &size in sizes {
        let img = match source {
            Some(src) => resize(src, size.width, size.height),
            None => synthetic_scene(size.width, size.height),
        };
        let mut times = Vec::with_capacity(reps);
        let mut digest = String::new();
        for _ in 0..reps {
            let start = Instant::now();
            let (outcome, _) = saliency_cut_colormap(&img, params)?;
            times.push(start.elapsed().as_secs_f64());
            let d = short_digest(&outcome.mask.to_image());
            if !digest.is_empty() && d != digest {
                log::warn!("{size}: mask changed between repetitions");
            }
            digest = d;
        }
        let (mean_s, sd_s) = mean_sd(&times);
        log::info!("cut {size}: {mean_s:.3}s");
        rows.push(BenchRow {
            case: "cut",
            size,
            reps,
            mean_s,
            sd_s,
            baseline_s: CUT_BASELINES
                .iter()
                .find(|(dims, _)| *dims == (size.width, size.height))
                .map(|(_, b)| *b),
            digest,
        });
        if largest
            .as_ref()
            .is_none_or(|(s, _)| s.width * s.height < size.width * size.height)
        {
            largest = Some((size, img));
        }
    }

    if let Some((size, img)) = largest {
        let images = tempfile::tempdir()?;
        let root = tempfile::tempdir()?;
        write_png(images.path().join("bench.png"), &img)?;
        build_cache(images.path(), root.path(), params, 1)?;
        let store = CacheStore::open(root.path(), OpenOptions::default())?;
        store.fetch(&img, params.seed, true)?;
        let mut times = Vec::with_capacity(reps);
        let mut digest = String::new();
        for _ in 0..reps {
            let start = Instant::now();
            let map = store.fetch(&img, params.seed, true)?;
            times.push(start.elapsed().as_secs_f64());
            digest = short_digest(&map);
        }
        let (mean_s, sd_s) = mean_sd(&times);
        rows.push(BenchRow {
            case: "fetch",
            size,
            reps,
            mean_s,
            sd_s,
            baseline_s: Some(FETCH_BASELINE),
            digest,
        });
    }
    Ok(rows)
}

pub fn write_table(out: &mut dyn Write, rows: &[BenchRow]) -> std::io::Result<()> {
    writeln!(out, "case\tsize\treps\tmean_s\tsd_s\tbaseline_s\tspeedup\toutput")?;
    for r in rows {
        let sd = r.sd_s.map_or_else(|| "-".to_string(), |s| format!("{s:.4}"));
        let (base, speedup) = match r.baseline_s {
            Some(b) => (format!("{b}"), format!("{:.1}x", b / r.mean_s.max(1e-9))),
            None => ("-".to_string(), "-".to_string()),
        };
        writeln!(
            out,
            "{}\t{}\t{}\t{:.4}\t{sd}\t{base}\t{speedup}\t{}",
            r.case, r.size, r.reps, r.mean_s, r.digest
        )?;
    }
    Ok(())
}
