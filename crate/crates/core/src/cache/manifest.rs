use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::HashKey;
use crate::{Error, Result};

pub const MANIFEST_FILE: &str = "manifest.v1.tsv";
pub const MANIFEST_MAGIC: &str = "saliencut-cache";
pub const MANIFEST_VERSION: &str = "v1";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EntryStatus {
    Ok,
    NoSalientObject,
}

impl EntryStatus {
    fn as_str(self) -> &'static str {
        match self {
            Self::Ok => "ok",
            Self::NoSalientObject => "no_salient_object",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ManifestEntry {
    /// Map path relative to the cache root, `/`-separated.
    pub path: String,
    pub width: usize,
    pub height: usize,
    /// Unix seconds when the map was written.
    pub created: u64,
    pub status: EntryStatus,
}

/// Hash-to-map dictionary with the parameter fingerprint it was built under.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CacheManifest {
    pub params_fingerprint: String,
    pub entries: BTreeMap<HashKey, ManifestEntry>,
}

/// `maps/<first two hex>/<hash>.png`
pub fn map_rel_path(key: &HashKey) -> String {
    format!("maps/{}/{}.png", key.shard(), key)
}

impl CacheManifest {
    pub fn new(params_fingerprint: impl Into<String>) -> Self {
        Self {
            params_fingerprint: params_fingerprint.into(),
            entries: BTreeMap::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, key: &HashKey) -> Option<&ManifestEntry> {
        self.entries.get(key)
    }

    /// Header line, then one tab-separated line per entry in hash order.
    pub fn to_text(&self) -> String {
        let mut s = format!("{MANIFEST_MAGIC}\t{MANIFEST_VERSION}\tparams={}\n", self.params_fingerprint);
        for (k, e) in &self.entries {
            let _ = writeln!(
                s,
                "{k}\t{}\t{}\t{}\t{}\t{}",
                e.path,
                e.width,
                e.height,
                e.created,
                e.status.as_str()
            );
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        let err = |line: usize, reason: String| Error::Parse {
            what: "cache manifest",
            line,
            reason,
        };
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| err(1, "empty file".into()))?;
        let fields: Vec<&str> = header.split('\t').collect();
        if fields.len() != 3 || fields[0] != MANIFEST_MAGIC {
            return Err(err(1, format!("bad header {header:?}")));
        }
        if fields[1] != MANIFEST_VERSION {
            return Err(Error::VersionMismatch(format!("manifest {}", fields[1])));
        }
        let fingerprint = fields[2]
            .strip_prefix("params=")
            .ok_or_else(|| err(1, "missing params fingerprint".into()))?;
        let mut manifest = Self::new(fingerprint);
        for (i, line) in lines.enumerate() {
            let n = i + 2;
            if line.is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split('\t').collect();
            if f.len() != 6 {
                return Err(err(n, format!("expected 6 fields, got {}", f.len())));
            }
            let key: HashKey = f[0].parse().map_err(|e: Error| err(n, e.to_string()))?;
            let num = |s: &str| s.parse::<u64>().map_err(|e| err(n, format!("{s:?}: {e}")));
            let status = match f[5] {
                "ok" => EntryStatus::Ok,
                "no_salient_object" => EntryStatus::NoSalientObject,
                other => return Err(err(n, format!("unknown status {other:?}"))),
            };
            let entry = ManifestEntry {
                path: f[1].to_string(),
                width: num(f[2])? as usize,
                height: num(f[3])? as usize,
                created: num(f[4])?,
                status,
            };
            if manifest.entries.insert(key, entry).is_some() {
                return Err(err(n, format!("duplicate hash {key}")));
            }
        }
        Ok(manifest)
    }

    pub fn load(root: impl AsRef<Path>) -> Result<Self> {
        let path = root.as_ref().join(MANIFEST_FILE);
        match std::fs::read_to_string(&path) {
            Ok(text) => Self::parse(&text),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Err(Error::ManifestMissing(path)),
            Err(e) => Err(e.into()),
        }
    }

    pub fn save(&self, root: impl AsRef<Path>) -> Result<()> {
        write_atomic(&root.as_ref().join(MANIFEST_FILE), self.to_text().as_bytes())
    }
}

/// Writes to a sibling temporary file, then renames over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir)?;
    let name = path.file_name().map(|n| n.to_string_lossy()).unwrap_or_default();
    let tmp: PathBuf = dir.join(format!(".{name}.tmp-{}-{:?}", std::process::id(), std::thread::current().id()));
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path).inspect_err(|_| {
        let _ = std::fs::remove_file(&tmp);
    })?;
    Ok(())
}
