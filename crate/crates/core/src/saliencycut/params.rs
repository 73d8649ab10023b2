use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::quantize::DEFAULT_COVERAGE;
use crate::saliency::rc::DEFAULT_SIGMA_S;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SaliencyMode {
    Hc,
    #[default]
    Rc,
}

impl std::str::FromStr for SaliencyMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "hc" => Ok(Self::Hc),
            "rc" => Ok(Self::Rc),
            other => Err(Error::InvalidParameter(format!("unknown saliency mode {other:?}"))),
        }
    }
}

impl std::fmt::Display for SaliencyMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Hc => "hc",
            Self::Rc => "rc",
        })
    }
}

/// Every knob of the SaliencyCut pipeline.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CutParams {
    /// Saliency values at or above this start as foreground.
    pub threshold: u8,
    pub max_iters: usize,
    /// Trimap band half-width; `None` means `max(1, round(0.01 * diagonal))`.
    pub morph_radius: Option<usize>,
    /// Stop once fewer than this fraction of pixels change in an iteration.
    pub convergence_eps: f64,
    pub gmm_k: usize,
    pub lambda: f64,
    /// Smoothness contrast scale; `None` derives it from the image.
    pub beta: Option<f64>,
    pub sigma_s: f64,
    pub coverage: f64,
    pub saliency_mode: SaliencyMode,
    pub scale_k: f64,
    pub min_size: usize,
    /// HC color-space smoothing neighbor count; off when `None`.
    pub hc_smoothing: Option<usize>,
    /// Seeds the mixture initialization and segmentation coloring.
    pub seed: u64,
}

impl Default for CutParams {
    fn default() -> Self {
        Self {
            threshold: 70,
            max_iters: 4,
            morph_radius: None,
            convergence_eps: 0.001,
            gmm_k: 5,
            lambda: 50.0,
            beta: None,
            sigma_s: DEFAULT_SIGMA_S,
            coverage: DEFAULT_COVERAGE,
            saliency_mode: SaliencyMode::Rc,
            scale_k: 50.0,
            min_size: 50,
            hc_smoothing: None,
            seed: 0,
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ParamsFile {
    version: u32,
    #[serde(default)]
    cut: CutParams,
}

const PARAMS_VERSION: u32 = 1;

impl CutParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if self.max_iters == 0 {
            return bad("max_iters must be >= 1".into());
        }
        if self.morph_radius == Some(0) {
            return bad("morph_radius must be >= 1".into());
        }
        if !(0.0..=1.0).contains(&self.convergence_eps) {
            return bad(format!("convergence_eps {} not in [0, 1]", self.convergence_eps));
        }
        if self.gmm_k == 0 {
            return bad("gmm_k must be >= 1".into());
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return bad(format!("lambda {} must be finite and >= 0", self.lambda));
        }
        if let Some(b) = self.beta {
            if !(b >= 0.0 && b.is_finite()) {
                return bad(format!("beta {b} must be finite and >= 0"));
            }
        }
        if !(self.sigma_s > 0.0 && self.sigma_s.is_finite()) {
            return bad(format!("sigma_s {} must be > 0", self.sigma_s));
        }
        if !(self.coverage > 0.0 && self.coverage <= 1.0) {
            return bad(format!("coverage {} not in (0, 1]", self.coverage));
        }
        if !(self.scale_k > 0.0) {
            return bad(format!("scale_k {} must be > 0", self.scale_k));
        }
        if self.min_size == 0 {
            return bad("min_size must be >= 1".into());
        }
        if self.hc_smoothing == Some(0) {
            return bad("hc_smoothing must be >= 1".into());
        }
        Ok(())
    }

    pub fn morph_radius_for(&self, width: usize, height: usize) -> usize {
        self.morph_radius.unwrap_or_else(|| {
            let diag = ((width * width + height * height) as f64).sqrt();
            ((0.01 * diag).round() as usize).max(1)
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(&ParamsFile {
            version: PARAMS_VERSION,
            cut: self.clone(),
        })
        .expect("params serialize")
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let file: ParamsFile = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        if file.version != PARAMS_VERSION {
            return Err(Error::VersionMismatch(format!("params version {}", file.version)));
        }
        file.cut.validate()?;
        Ok(file.cut)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    /// Stable digest of every parameter, independent of serialization format.
    pub fn fingerprint(&self) -> String {
        let mut s = String::new();
        let _ = write!(
            s,
            "v{PARAMS_VERSION};threshold={};max_iters={};morph_radius={:?};convergence_eps={:?};gmm_k={};\
             lambda={:?};beta={:?};sigma_s={:?};coverage={:?};mode={};scale_k={:?};min_size={};\
             hc_smoothing={:?};seed={}",
            self.threshold,
            self.max_iters,
            self.morph_radius,
            self.convergence_eps,
            self.gmm_k,
            self.lambda,
            self.beta,
            self.sigma_s,
            self.coverage,
            self.saliency_mode,
            self.scale_k,
            self.min_size,
            self.hc_smoothing,
            self.seed
        );
        hex::encode(Sha256::digest(s.as_bytes()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let p = CutParams::default();
        p.validate().unwrap();
        assert_eq!(p.threshold, 70);
        assert_eq!(p.max_iters, 4);
        assert_eq!(p.gmm_k, 5);
        assert_eq!(p.saliency_mode, SaliencyMode::Rc);
    }

    #[test]
    fn morph_radius_default() {
        let p = CutParams::default();
        assert_eq!(p.morph_radius_for(600, 450), 8);
        assert_eq!(p.morph_radius_for(60, 45), 1);
        assert_eq!(p.morph_radius_for(10, 10), 1);
    }

    #[test]
    fn toml_round_trip_and_partial_files() {
        let p = CutParams {
            threshold: 90,
            beta: Some(0.25),
            saliency_mode: SaliencyMode::Hc,
            ..CutParams::default()
        };
        let back = CutParams::from_toml(&p.to_toml()).unwrap();
        assert_eq!(back, p);
        assert_eq!(back.fingerprint(), p.fingerprint());

        let partial = CutParams::from_toml("version = 1\n[cut]\nthreshold = 12\n").unwrap();
        assert_eq!(partial.threshold, 12);
        assert_eq!(partial.lambda, 50.0);
        assert!(CutParams::from_toml("version = 2\n").is_err());
        assert!(CutParams::from_toml("version = 1\n[cut]\nbogus = 1\n").is_err());
        assert!(CutParams::from_toml("version = 1\n[cut]\ncoverage = 0.0\n").is_err());
    }

    #[test]
    fn fingerprint_tracks_every_change() {
        let a = CutParams::default();
        let mut b = a.clone();
        b.seed = 1;
        assert_ne!(a.fingerprint(), b.fingerprint());
        assert_eq!(a.fingerprint().len(), 64);
    }
}
