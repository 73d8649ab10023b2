//! Content-addressed store of precomputed segmentation maps.
//!
//! Layout under the cache root:
//!
//! ```text
//! manifest.v1.tsv            header + one line per entry, sorted by hash
//! params.v1.toml             the CutParams the maps were built with
//! maps/<2 hex>/<hash>.png    one map per distinct image
//! ```

mod build;
mod hash;
mod manifest;
mod store;
mod verify;

pub use build::{build_cache, list_images, BuildReport};
pub use hash::{hash_image, HashKey};
pub use manifest::{
    map_rel_path, write_atomic, CacheManifest, EntryStatus, ManifestEntry, MANIFEST_FILE, MANIFEST_VERSION,
};
pub use store::{stats, CacheStats, CacheStore, MissPolicy, OpenOptions, PARAMS_FILE};
pub use verify::{verify, Finding, VerifyOptions, VerifyReport};
