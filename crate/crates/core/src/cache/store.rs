use std::collections::HashMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::manifest::write_atomic;
use super::{hash_image, CacheManifest, HashKey, ManifestEntry};
use crate::augment::{palette_jitter, SegmentationSource};
use crate::imagecore::{decode_rgb, ImageBuffer};
use crate::saliencycut::{saliency_cut_colormap, CutParams};
use crate::{Error, Result};

pub const PARAMS_FILE: &str = "params.v1.toml";

/// What to do when an image has no cache entry.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum MissPolicy {
    /// Fail with `MissingEntry`.
    Strict,
    /// Compute the map inline with the cache's parameters.
    #[default]
    Lenient,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct OpenOptions {
    pub miss: MissPolicy,
    /// Decode every map into memory at open time.
    pub preload: bool,
}

/// Read-only view of a built cache.
#[derive(Debug)]
pub struct CacheStore {
    root: PathBuf,
    manifest: CacheManifest,
    params: CutParams,
    options: OpenOptions,
    memory: Option<HashMap<HashKey, ImageBuffer>>,
}

pub(crate) fn save_params(root: &Path, params: &CutParams) -> Result<()> {
    write_atomic(&root.join(PARAMS_FILE), params.to_toml().as_bytes())
}

impl CacheStore {
    pub fn open(root: impl AsRef<Path>, options: OpenOptions) -> Result<Self> {
        let root = root.as_ref().to_path_buf();
        let manifest = CacheManifest::load(&root)?;
        let params_path = root.join(PARAMS_FILE);
        let params = if params_path.exists() {
            CutParams::load(&params_path)?
        } else {
            CutParams::default()
        };
        if params.fingerprint() != manifest.params_fingerprint {
            log::warn!("{} does not match the manifest fingerprint", params_path.display());
        }
        let mut store = Self {
            root,
            manifest,
            params,
            options,
            memory: None,
        };
        if options.preload {
            let loaded: Result<HashMap<_, _>> = store
                .manifest
                .entries
                .par_iter()
                .map(|(k, e)| Ok((*k, store.read_map(e)?)))
                .collect();
            store.memory = Some(loaded?);
        }
        Ok(store)
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn manifest(&self) -> &CacheManifest {
        &self.manifest
    }

    /// Parameters inline computation uses on a lenient miss.
    pub fn params(&self) -> &CutParams {
        &self.params
    }

    pub fn options(&self) -> OpenOptions {
        self.options
    }

    pub fn len(&self) -> usize {
        self.manifest.len()
    }

    pub fn is_empty(&self) -> bool {
        self.manifest.is_empty()
    }

    pub fn is_preloaded(&self) -> bool {
        self.memory.is_some()
    }

    pub fn map_path(&self, entry: &ManifestEntry) -> PathBuf {
        self.root.join(&entry.path)
    }

    fn read_map(&self, entry: &ManifestEntry) -> Result<ImageBuffer> {
        let map = decode_rgb(&std::fs::read(self.map_path(entry))?)?;
        Ok(map)
    }

    /// The stored map for `key`, from memory when preloaded.
    pub fn load(&self, key: &HashKey) -> Result<Option<ImageBuffer>> {
        if let Some(mem) = &self.memory {
            return Ok(mem.get(key).cloned());
        }
        match self.manifest.get(key) {
            Some(e) => self.read_map(e).map(Some),
            None => Ok(None),
        }
    }

    /// Unjittered segmentation map for `img`.
    pub fn lookup(&self, img: &ImageBuffer) -> Result<ImageBuffer> {
        let rgb = img.to_rgb();
        let key = hash_image(&rgb);
        match self.load(&key)? {
            Some(map) if map.dims() == rgb.dims() => Ok(map),
            Some(map) => Err(Error::StaleEntry {
                hash: key.to_hex(),
                map: map.dims(),
                image: rgb.dims(),
            }),
            None => match self.options.miss {
                MissPolicy::Strict => Err(Error::MissingEntry(key.to_hex())),
                MissPolicy::Lenient => {
                    log::debug!("cache miss for {key}, computing inline");
                    saliency_cut_colormap(&rgb, &self.params).map(|(_, map)| map)
                }
            },
        }
    }

    /// Map for `img`, recolored with `seed` when `jitter` is set.
    pub fn fetch(&self, img: &ImageBuffer, seed: u64, jitter: bool) -> Result<ImageBuffer> {
        let map = self.lookup(img)?;
        if jitter {
            palette_jitter(&map, seed)
        } else {
            Ok(map)
        }
    }
}

impl SegmentationSource for CacheStore {
    fn segmentation(&self, img: &ImageBuffer) -> Result<ImageBuffer> {
        self.lookup(img)
    }
}

/// Summary of a cache directory.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CacheStats {
    pub entries: usize,
    pub no_salient: usize,
    pub total_bytes: u64,
    pub params_fingerprint: String,
}

impl std::fmt::Display for CacheStats {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "entries\t{}", self.entries)?;
        writeln!(f, "no_salient_object\t{}", self.no_salient)?;
        writeln!(f, "total_bytes\t{}", self.total_bytes)?;
        write!(f, "params\t{}", self.params_fingerprint)
    }
}

pub fn stats(root: impl AsRef<Path>) -> Result<CacheStats> {
    let root = root.as_ref();
    let manifest = CacheManifest::load(root)?;
    let mut total_bytes = 0;
    for e in manifest.entries.values() {
        if let Ok(md) = std::fs::metadata(root.join(&e.path)) {
            total_bytes += md.len();
        }
    }
    Ok(CacheStats {
        entries: manifest.len(),
        no_salient: manifest
            .entries
            .values()
            .filter(|e| e.status == super::EntryStatus::NoSalientObject)
            .count(),
        total_bytes,
        params_fingerprint: manifest.params_fingerprint,
    })
}
