use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::build::{compute_map, list_images};
use super::{hash_image, CacheStore, HashKey};
use crate::imagecore::{decode_rgb, read_image};
use crate::saliencycut::CutParams;
use crate::Result;

#[derive(Clone, Debug, PartialEq)]
pub struct VerifyOptions {
    /// Fraction of entries (and source images) to check, in `(0, 1]`.
    pub sample_fraction: f64,
    pub seed: u64,
    /// Source images to re-hash against the manifest.
    pub image_dir: Option<PathBuf>,
    /// Recompute sampled maps from their source images and compare bytes.
    pub recompute: bool,
    /// Parameters the caller expects the cache to have been built with.
    pub expected_params: Option<CutParams>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            sample_fraction: 1.0,
            seed: 0,
            image_dir: None,
            recompute: false,
            expected_params: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Finding {
    MissingFile { hash: HashKey, path: PathBuf },
    CorruptMap { hash: HashKey, reason: String },
    DimensionMismatch { hash: HashKey, manifest: (usize, usize), file: (usize, usize) },
    ParamsDrift { manifest: String, requested: String },
    /// A source image with no manifest entry.
    MissingEntry { image: PathBuf, hash: HashKey },
    /// A recomputed map differs from the stored one.
    MapMismatch { hash: HashKey, image: PathBuf },
}

impl std::fmt::Display for Finding {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::MissingFile { hash, path } => write!(f, "missing_file\t{hash}\t{}", path.display()),
            Self::CorruptMap { hash, reason } => write!(f, "corrupt_map\t{hash}\t{reason}"),
            Self::DimensionMismatch { hash, manifest, file } => write!(
                f,
                "dimension_mismatch\t{hash}\tmanifest={}x{}\tfile={}x{}",
                manifest.0, manifest.1, file.0, file.1
            ),
            Self::ParamsDrift { manifest, requested } => {
                write!(f, "params_drift\tmanifest={manifest}\trequested={requested}")
            }
            Self::MissingEntry { image, hash } => write!(f, "missing_entry\t{hash}\t{}", image.display()),
            Self::MapMismatch { hash, image } => write!(f, "map_mismatch\t{hash}\t{}", image.display()),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct VerifyReport {
    pub entries_checked: usize,
    pub images_checked: usize,
    pub findings: Vec<Finding>,
}

impl VerifyReport {
    pub fn is_clean(&self) -> bool {
        self.findings.is_empty()
    }
}

fn sample<T: Clone>(items: &[T], fraction: f64, rng: &mut ChaCha8Rng) -> Vec<T> {
    let take = ((items.len() as f64 * fraction.clamp(0.0, 1.0)).ceil() as usize).min(items.len());
    let mut idx: Vec<usize> = (0..items.len()).collect();
    idx.shuffle(rng);
    let mut chosen: Vec<usize> = idx.into_iter().take(take).collect();
    chosen.sort_unstable();
    chosen.into_iter().map(|i| items[i].clone()).collect()
}

/// Report-only consistency check. Findings are sorted for stable output.
pub fn verify(store: &CacheStore, options: &VerifyOptions) -> Result<VerifyReport> {
    let manifest = store.manifest();
    let mut report = VerifyReport::default();
    if let Some(expected) = &options.expected_params {
        let requested = expected.fingerprint();
        if requested != manifest.params_fingerprint {
            report.findings.push(Finding::ParamsDrift {
                manifest: manifest.params_fingerprint.clone(),
                requested,
            });
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let keys: Vec<HashKey> = manifest.entries.keys().copied().collect();
    let sampled = sample(&keys, options.sample_fraction, &mut rng);
    report.entries_checked = sampled.len();
    let entry_findings: Vec<Option<Finding>> = sampled
        .par_iter()
        .map(|k| {
            let e = &manifest.entries[k];
            let path = store.root().join(&e.path);
            let bytes = match std::fs::read(&path) {
                Ok(b) => b,
                Err(_) => return Some(Finding::MissingFile { hash: *k, path }),
            };
            match decode_rgb(&bytes) {
                Err(err) => Some(Finding::CorruptMap {
                    hash: *k,
                    reason: err.to_string(),
                }),
                Ok(map) if map.dims() != (e.width, e.height) => Some(Finding::DimensionMismatch {
                    hash: *k,
                    manifest: (e.width, e.height),
                    file: map.dims(),
                }),
                Ok(_) => None,
            }
        })
        .collect();
    report.findings.extend(entry_findings.into_iter().flatten());

    if let Some(dir) = &options.image_dir {
        let images = sample(&list_images(dir)?, options.sample_fraction, &mut rng);
        report.images_checked = images.len();
        let params = store.params().clone();
        let image_findings: Vec<Option<Finding>> = images
            .par_iter()
            .map(|p| check_image(store, p, options.recompute, &params))
            .collect::<Result<_>>()?;
        report.findings.extend(image_findings.into_iter().flatten());
    }
    report.findings.sort_by_key(|f| f.to_string());
    Ok(report)
}

fn check_image(store: &CacheStore, path: &Path, recompute: bool, params: &CutParams) -> Result<Option<Finding>> {
    let img = match read_image(path) {
        Ok(img) => img.to_rgb(),
        Err(e) => {
            log::warn!("verify: cannot read {}: {e}", path.display());
            return Ok(None);
        }
    };
    let hash = hash_image(&img);
    let Some(entry) = store.manifest().get(&hash) else {
        return Ok(Some(Finding::MissingEntry {
            image: path.to_path_buf(),
            hash,
        }));
    };
    if !recompute {
        return Ok(None);
    }
    let stored = match std::fs::read(store.root().join(&entry.path)).map(|b| decode_rgb(&b)) {
        Ok(Ok(m)) => m,
        // Already reported by the entry checks when sampled.
        _ => return Ok(None),
    };
    let (fresh, _) = compute_map(&img, params);
    Ok((fresh != stored).then(|| Finding::MapMismatch {
        hash,
        image: path.to_path_buf(),
    }))
}
