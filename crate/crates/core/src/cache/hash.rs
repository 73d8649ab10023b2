use std::fmt;
use std::str::FromStr;

use sha2::{Digest, Sha256};

use crate::imagecore::ImageBuffer;
use crate::{Error, Result};

/// SHA-256 of an image's canonical serialization.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HashKey([u8; 32]);

impl HashKey {
    pub fn as_bytes(&self) -> &[u8; 32] {
        &self.0
    }

    pub fn to_hex(&self) -> String {
        hex::encode(self.0)
    }

    /// Two-character fan-out directory name.
    pub fn shard(&self) -> String {
        hex::encode(&self.0[..1])
    }

    /// First eight bytes as a little-endian integer.
    pub fn prefix_u64(&self) -> u64 {
        u64::from_le_bytes(self.0[..8].try_into().expect("8 bytes"))
    }
}

impl fmt::Display for HashKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

impl fmt::Debug for HashKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "HashKey({})", self.to_hex())
    }
}

impl FromStr for HashKey {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.len() != 64 || s.bytes().any(|b| !matches!(b, b'0'..=b'9' | b'a'..=b'f')) {
            return Err(Error::InvalidParameter(format!("not a 64-char lowercase hex digest: {s:?}")));
        }
        let mut out = [0u8; 32];
        hex::decode_to_slice(s, &mut out).map_err(|e| Error::InvalidParameter(e.to_string()))?;
        Ok(Self(out))
    }
}

/// Digest of little-endian `u32` width, height and channel count followed by
/// the raw row-major samples. The buffer is hashed as given; callers that
/// want grayscale and RGB copies of one picture to collide should convert
/// first (the cache always hashes the RGB form).
pub fn hash_image(img: &ImageBuffer) -> HashKey {
    let mut h = Sha256::new();
    for v in [img.width(), img.height(), img.channels()] {
        h.update((v as u32).to_le_bytes());
    }
    h.update(img.data());
    HashKey(h.finalize().into())
}
