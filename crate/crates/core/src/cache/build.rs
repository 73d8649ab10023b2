use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use rayon::prelude::*;

use super::manifest::{map_rel_path, write_atomic};
use super::store::save_params;
use super::{hash_image, CacheManifest, EntryStatus, HashKey, ManifestEntry};
use crate::imagecore::{encode_png, read_image, ImageBuffer};
use crate::saliencycut::{saliency_cut_colormap, segmentation_to_colormap, CutParams, CutStatus, LabelImage};
use crate::{Error, Result};

/// Image files directly inside `dir` with a PNG or JPEG extension, sorted.
pub fn list_images(dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for entry in std::fs::read_dir(dir)? {
        let path = entry?.path();
        let ext = path
            .extension()
            .and_then(|e| e.to_str())
            .map(str::to_ascii_lowercase);
        if path.is_file() && matches!(ext.as_deref(), Some("png" | "jpg" | "jpeg")) {
            out.push(path);
        }
    }
    out.sort();
    Ok(out)
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BuildReport {
    pub images: usize,
    /// Distinct content hashes among decodable images.
    pub distinct: usize,
    pub computed: usize,
    pub skipped: usize,
    /// Images whose content matched an earlier file.
    pub duplicates: usize,
    /// Files that could not be read or decoded.
    pub failed: usize,
    pub no_salient: usize,
    /// Every input path with its hash (`None` when undecodable).
    pub files: Vec<(PathBuf, Option<HashKey>)>,
}

impl std::fmt::Display for BuildReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} images, {} distinct, {} computed, {} skipped, {} duplicates, {} failed, {} no salient object",
            self.images, self.distinct, self.computed, self.skipped, self.duplicates, self.failed, self.no_salient
        )
    }
}

fn now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

/// Computes one map; any pipeline failure becomes a flat no-object map.
pub(crate) fn compute_map(img: &ImageBuffer, params: &CutParams) -> (ImageBuffer, EntryStatus) {
    match saliency_cut_colormap(img, params) {
        Ok((out, map)) if out.status() == CutStatus::NoSalientObject => (map, EntryStatus::NoSalientObject),
        Ok((_, map)) => (map, EntryStatus::Ok),
        Err(e) => {
            log::warn!("saliency cut failed: {e}");
            let labels = LabelImage {
                width: img.width(),
                height: img.height(),
                labels: vec![0; img.pixel_count()],
            };
            (segmentation_to_colormap(&labels, &[], params.seed), EntryStatus::NoSalientObject)
        }
    }
}

/// Builds or extends a cache rooted at `root` from the images in
/// `image_dir`. Existing entries whose map file is present are kept. The
/// manifest is written once, atomically, after all maps are on disk.
pub fn build_cache(
    image_dir: impl AsRef<Path>,
    root: impl AsRef<Path>,
    params: &CutParams,
    jobs: usize,
) -> Result<BuildReport> {
    params.validate()?;
    let root = root.as_ref();
    let fingerprint = params.fingerprint();
    let mut manifest = match CacheManifest::load(root) {
        Ok(m) if m.params_fingerprint == fingerprint => m,
        Ok(m) => {
            return Err(Error::ParamsMismatch {
                manifest: m.params_fingerprint,
                requested: fingerprint,
            })
        }
        Err(Error::ManifestMissing(_)) => CacheManifest::new(fingerprint),
        Err(e) => return Err(e),
    };
    let paths = list_images(image_dir)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::Config(e.to_string()))?;

    let hashed: Vec<(PathBuf, Option<HashKey>)> = pool.install(|| {
        paths
            .par_iter()
            .map(|p| match read_image(p) {
                Ok(img) => (p.clone(), Some(hash_image(&img.to_rgb()))),
                Err(e) => {
                    log::warn!("skipping {}: {e}", p.display());
                    (p.clone(), None)
                }
            })
            .collect()
    });

    let mut first_path: BTreeMap<HashKey, &Path> = BTreeMap::new();
    let mut report = BuildReport {
        images: paths.len(),
        ..Default::default()
    };
    for (p, key) in &hashed {
        match key {
            None => report.failed += 1,
            Some(k) if first_path.contains_key(k) => report.duplicates += 1,
            Some(k) => {
                first_path.insert(*k, p);
            }
        }
    }
    report.distinct = first_path.len();

    let todo: Vec<(HashKey, &Path)> = first_path
        .iter()
        .filter(|(k, _)| match manifest.get(k) {
            Some(e) => !root.join(&e.path).is_file(),
            None => true,
        })
        .map(|(k, p)| (*k, *p))
        .collect();
    report.skipped = report.distinct - todo.len();

    let computed: Vec<Result<(HashKey, ManifestEntry)>> = pool.install(|| {
        todo.par_iter()
            .map(|&(key, path)| {
                let img = read_image(path)?.to_rgb();
                let (map, status) = compute_map(&img, params);
                let rel = map_rel_path(&key);
                write_atomic(&root.join(&rel), &encode_png(&map)?)?;
                log::info!("{} -> {rel} ({status:?})", path.display());
                Ok((
                    key,
                    ManifestEntry {
                        path: rel,
                        width: img.width(),
                        height: img.height(),
                        created: now(),
                        status,
                    },
                ))
            })
            .collect()
    });
    for r in computed {
        match r {
            Ok((k, e)) => {
                report.computed += 1;
                manifest.entries.insert(k, e);
            }
            Err(e) => {
                log::warn!("cache entry failed: {e}");
                report.failed += 1;
            }
        }
    }
    report.no_salient = first_path
        .keys()
        .filter(|k| manifest.get(k).is_some_and(|e| e.status == EntryStatus::NoSalientObject))
        .count();
    std::fs::create_dir_all(root)?;
    save_params(root, params)?;
    manifest.save(root)?;
    report.files = hashed;
    Ok(report)
}
