use std::path::Path;

use serde::{Deserialize, Serialize};

use super::jitter::{palette_jitter_with, PaletteJitterParams, MAX_SEGMENT_COLORS};
use super::ops::{
    color_jitter, gaussian_blur, grayscale, hflip, resize_with, resized_crop, rotate, rotate90, vflip,
    ColorJitterParams, Interp,
};
use super::rng::{fires, op_rng};
use crate::imagecore::ImageBuffer;
use crate::saliencycut::{saliency_cut_colormap, CutParams};
use crate::{Error, Result};

use rand::Rng;

pub const DEFAULT_OUTPUT_SIZE: (usize, usize) = (224, 224);

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RotateMode {
    /// A random non-zero multiple of 90 degrees.
    Quarter,
    /// Uniform angle in `[-max_degrees, max_degrees]`.
    Arbitrary { max_degrees: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum OpKind {
    Sgd,
    ResizedCrop { scale: (f64, f64), ratio: (f64, f64) },
    Rotate(RotateMode),
    HFlip,
    VFlip,
    ColorJitter(ColorJitterParams),
    Grayscale,
    GaussianBlur { sigma: (f64, f64) },
    PaletteJitter(PaletteJitterParams),
}

impl OpKind {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Sgd => "sgd",
            Self::ResizedCrop { .. } => "resized_crop",
            Self::Rotate(_) => "rotate",
            Self::HFlip => "hflip",
            Self::VFlip => "vflip",
            Self::ColorJitter(_) => "color_jitter",
            Self::Grayscale => "grayscale",
            Self::GaussianBlur { .. } => "gaussian_blur",
            Self::PaletteJitter(_) => "palette_jitter",
        }
    }

    fn is_color(&self) -> bool {
        matches!(
            self,
            Self::ColorJitter(_) | Self::Grayscale | Self::GaussianBlur { .. } | Self::PaletteJitter(_)
        )
    }

    pub fn default_resized_crop() -> Self {
        Self::ResizedCrop {
            scale: (0.2, 1.0),
            ratio: (3.0 / 4.0, 4.0 / 3.0),
        }
    }

    pub fn default_blur() -> Self {
        Self::GaussianBlur { sigma: (0.1, 2.0) }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AugOp {
    pub kind: OpKind,
    pub p: f64,
}

impl AugOp {
    pub fn new(kind: OpKind, p: f64) -> Self {
        Self { kind, p }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AugPolicy {
    pub name: String,
    /// Final output size; `None` keeps the input size.
    pub output_size: Option<(usize, usize)>,
    pub ops: Vec<AugOp>,
}

/// Produces the segmentation image for the SGD op.
pub trait SegmentationSource: Sync {
    fn segmentation(&self, img: &ImageBuffer) -> Result<ImageBuffer>;
}

/// Runs SaliencyCut on demand.
#[derive(Clone, Debug, Default)]
pub struct InlineSegmentation {
    pub params: CutParams,
}

impl SegmentationSource for InlineSegmentation {
    fn segmentation(&self, img: &ImageBuffer) -> Result<ImageBuffer> {
        saliency_cut_colormap(img, &self.params).map(|(_, map)| map)
    }
}

/// The defaults shared by several presets, SimCLR-style magnitudes.
pub fn default_ops() -> Vec<AugOp> {
    vec![
        AugOp::new(OpKind::default_resized_crop(), 1.0),
        AugOp::new(OpKind::Rotate(RotateMode::Quarter), 0.5),
        AugOp::new(OpKind::HFlip, 0.5),
        AugOp::new(OpKind::VFlip, 0.5),
        AugOp::new(OpKind::ColorJitter(ColorJitterParams::default()), 0.8),
        AugOp::new(OpKind::Grayscale, 0.2),
        AugOp::new(OpKind::default_blur(), 0.5),
    ]
}

fn preset(name: &str, ops: Vec<AugOp>) -> AugPolicy {
    AugPolicy {
        name: name.to_string(),
        output_size: Some(DEFAULT_OUTPUT_SIZE),
        ops,
    }
}

fn sgd_then(p: f64, rest: Vec<AugOp>) -> Vec<AugOp> {
    std::iter::once(AugOp::new(OpKind::Sgd, p)).chain(rest).collect()
}

fn jitter(p: f64) -> Vec<AugOp> {
    vec![AugOp::new(OpKind::PaletteJitter(PaletteJitterParams::default()), p)]
}

/// The seven evaluated policies.
pub fn preset_policies() -> Vec<AugPolicy> {
    vec![
        preset("defaults", default_ops()),
        preset("sgd_p10", sgd_then(1.0, vec![])),
        preset("sgd_p10_defaults", sgd_then(1.0, default_ops())),
        preset("sgd_p05_defaults", sgd_then(0.5, default_ops())),
        preset("sgd_p10_jitter_p10", sgd_then(1.0, jitter(1.0))),
        preset("sgd_p05_jitter_p10", sgd_then(0.5, jitter(1.0))),
        preset("sgd_p08_jitter_p08", sgd_then(0.8, jitter(0.8))),
    ]
}

/// Preset by name; `sgd_plus_defaults` is accepted for `sgd_p10_defaults`.
pub fn preset_policy(name: &str) -> Option<AugPolicy> {
    let name = if name == "sgd_plus_defaults" { "sgd_p10_defaults" } else { name };
    preset_policies().into_iter().find(|p| p.name == name)
}

impl AugPolicy {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidPolicy(format!("{}: {m}", self.name)));
        if let Some((w, h)) = self.output_size {
            if w == 0 || h == 0 {
                return bad("output size must be positive".into());
            }
        }
        let mut sgd_at = None;
        let mut first_color = None;
        for (i, op) in self.ops.iter().enumerate() {
            if !(0.0..=1.0).contains(&op.p) {
                return bad(format!("op {i} ({}) has p = {} outside [0, 1]", op.kind.name(), op.p));
            }
            validate_kind(&op.kind).or_else(|m| bad(format!("op {i} ({}): {m}", op.kind.name())))?;
            match op.kind {
                OpKind::Sgd if sgd_at.is_some() => return bad("at most one sgd op".into()),
                OpKind::Sgd => sgd_at = Some(i),
                k if k.is_color() && first_color.is_none() => first_color = Some(i),
                _ => {}
            }
        }
        if let (Some(s), Some(c)) = (sgd_at, first_color) {
            if c < s {
                return bad("sgd must precede color ops".into());
            }
        }
        Ok(())
    }

    /// Which ops fire for `seed`. Only the first draw of each op's stream is
    /// consumed, so this is cheap and matches [`apply_policy`] exactly.
    pub fn firing(&self, seed: u64) -> Vec<bool> {
        self.ops
            .iter()
            .enumerate()
            .map(|(i, op)| fires(&mut op_rng(seed, i), op.p))
            .collect()
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let file: PolicyFile = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        if file.version != POLICY_VERSION {
            return Err(Error::VersionMismatch(format!("policy version {}", file.version)));
        }
        let ops = file
            .ops
            .iter()
            .map(OpSpec::to_op)
            .collect::<std::result::Result<Vec<_>, String>>()
            .map_err(|m| Error::InvalidPolicy(format!("{}: {m}", file.name)))?;
        let policy = AugPolicy {
            name: file.name,
            output_size: file.output_size.map(|[w, h]| (w, h)),
            ops,
        };
        policy.validate()?;
        Ok(policy)
    }

    pub fn to_toml(&self) -> String {
        let file = PolicyFile {
            version: POLICY_VERSION,
            name: self.name.clone(),
            output_size: self.output_size.map(|(w, h)| [w, h]),
            ops: self.ops.iter().map(OpSpec::from_op).collect(),
        };
        toml::to_string(&file).expect("policy serialize")
    }
}

fn validate_kind(kind: &OpKind) -> std::result::Result<(), String> {
    let range = |what: &str, (lo, hi): (f64, f64), min: f64| {
        if lo.is_finite() && hi.is_finite() && min <= lo && lo <= hi {
            Ok(())
        } else {
            Err(format!("{what} range ({lo}, {hi}) invalid"))
        }
    };
    match kind {
        OpKind::ResizedCrop { scale, ratio } => {
            range("scale", *scale, f64::MIN_POSITIVE)?;
            if scale.1 > 1.0 {
                return Err("scale must not exceed 1".into());
            }
            range("ratio", *ratio, f64::MIN_POSITIVE)
        }
        OpKind::Rotate(RotateMode::Arbitrary { max_degrees }) if !(*max_degrees >= 0.0 && *max_degrees <= 180.0) => {
            Err(format!("max_degrees {max_degrees} not in [0, 180]"))
        }
        OpKind::ColorJitter(c) => {
            for (what, v, max) in [
                ("brightness", c.brightness, f64::INFINITY),
                ("contrast", c.contrast, f64::INFINITY),
                ("saturation", c.saturation, f64::INFINITY),
                ("hue", c.hue, 0.5),
            ] {
                if !(v >= 0.0 && v <= max) {
                    return Err(format!("{what} {v} out of range"));
                }
            }
            Ok(())
        }
        OpKind::GaussianBlur { sigma } => range("sigma", *sigma, f64::MIN_POSITIVE),
        OpKind::PaletteJitter(j) => {
            if [j.hue, j.saturation, j.value].iter().all(|v| (0.0..=1.0).contains(v)) {
                Ok(())
            } else {
                Err("palette jitter bounds must lie in [0, 1]".into())
            }
        }
        _ => Ok(()),
    }
}

/// Applies the policy's ops in order. Op `i` fires iff the first draw of
/// stream `i` is below its `p`; its parameters come from the same stream.
/// Once SGD has fired, resampling switches to nearest-neighbor so the map
/// stays a segmentation. Palette jitter is skipped on images with more than
/// 256 colors. The result is resized to the policy's output size (or the
/// input size).
pub fn apply_policy(
    img: &ImageBuffer,
    policy: &AugPolicy,
    seed: u64,
    source: &dyn SegmentationSource,
) -> Result<ImageBuffer> {
    let target = policy.output_size.unwrap_or(img.dims());
    let mut cur = img.to_rgb();
    let mut interp = Interp::Bilinear;
    for (i, op) in policy.ops.iter().enumerate() {
        let mut rng = op_rng(seed, i);
        if !fires(&mut rng, op.p) {
            continue;
        }
        cur = match op.kind {
            OpKind::Sgd => {
                interp = Interp::Nearest;
                source.segmentation(&cur)?
            }
            OpKind::ResizedCrop { scale, ratio } => resized_crop(&cur, scale, ratio, target, interp, &mut rng),
            OpKind::Rotate(RotateMode::Quarter) => rotate90(&cur, rng.random_range(1..=3)),
            OpKind::Rotate(RotateMode::Arbitrary { max_degrees }) => {
                rotate(&cur, rng.random_range(-max_degrees..=max_degrees), interp)
            }
            OpKind::HFlip => hflip(&cur),
            OpKind::VFlip => vflip(&cur),
            OpKind::ColorJitter(params) => color_jitter(&cur, &params.sample(&mut rng)),
            OpKind::Grayscale => grayscale(&cur),
            OpKind::GaussianBlur { sigma } => gaussian_blur(&cur, rng.random_range(sigma.0..=sigma.1)),
            OpKind::PaletteJitter(params) => match palette_jitter_with(&cur, &[], &params, rng.random()) {
                Ok(out) => out,
                Err(Error::TooManyColors(n)) => {
                    log::debug!("palette jitter skipped: {n}+ colors (limit {MAX_SEGMENT_COLORS})");
                    cur
                }
                Err(e) => return Err(e),
            },
        };
    }
    Ok(resize_with(&cur, target.0, target.1, interp))
}

const POLICY_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PolicyFile {
    version: u32,
    name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    output_size: Option<[usize; 2]>,
    #[serde(default)]
    ops: Vec<OpSpec>,
}

/// Flat on-disk form of one op; unset fields take the documented defaults.
#[derive(Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct OpSpec {
    kind: String,
    p: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    scale: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    ratio: Option<[f64; 2]>,
    /// Rotation: absent or 0 means quarter turns.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    max_degrees: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    brightness: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    contrast: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    saturation: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    hue: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    value: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sigma: Option<[f64; 2]>,
}

impl OpSpec {
    fn to_op(&self) -> std::result::Result<AugOp, String> {
        let pair = |v: Option<[f64; 2]>, d: (f64, f64)| v.map_or(d, |[a, b]| (a, b));
        let allowed: &[&str];
        let kind = match self.kind.as_str() {
            "sgd" => {
                allowed = &[];
                OpKind::Sgd
            }
            "resized_crop" => {
                allowed = &["scale", "ratio"];
                OpKind::ResizedCrop {
                    scale: pair(self.scale, (0.2, 1.0)),
                    ratio: pair(self.ratio, (3.0 / 4.0, 4.0 / 3.0)),
                }
            }
            "rotate" => {
                allowed = &["max_degrees"];
                match self.max_degrees {
                    None | Some(0.0) => OpKind::Rotate(RotateMode::Quarter),
                                        Some(d) => OpKind::Rotate(RotateMode::Arbitrary { max_degrees: d }),
                }
            }
            "hflip" => {
                allowed = &[];
                OpKind::HFlip
            }
            "vflip" => {
                allowed = &[];
                OpKind::VFlip
            }
            "color_jitter" => {
                allowed = &["brightness", "contrast", "saturation", "hue"];
                let d = ColorJitterParams::default();
                OpKind::ColorJitter(ColorJitterParams {
                    brightness: self.brightness.unwrap_or(d.brightness),
                    contrast: self.contrast.unwrap_or(d.contrast),
                    saturation: self.saturation.unwrap_or(d.saturation),
                    hue: self.hue.unwrap_or(d.hue),
                })
            }
            "grayscale" => {
                allowed = &[];
                OpKind::Grayscale
            }
            "gaussian_blur" => {
                allowed = &["sigma"];
                OpKind::GaussianBlur {
                    sigma: pair(self.sigma, (0.1, 2.0)),
                }
            }
            "palette_jitter" => {
                allowed = &["hue", "saturation", "value"];
                let d = PaletteJitterParams::default();
                OpKind::PaletteJitter(PaletteJitterParams {
                    hue: self.hue.unwrap_or(d.hue),
                    saturation: self.saturation.unwrap_or(d.saturation),
                    value: self.value.unwrap_or(d.value),
                })
            }
            other => return Err(format!("unknown op kind {other:?}")),
        };
        for (field, set) in [
            ("scale", self.scale.is_some()),
            ("ratio", self.ratio.is_some()),
            ("max_degrees", self.max_degrees.is_some()),
            ("brightness", self.brightness.is_some()),
            ("contrast", self.contrast.is_some()),
            ("saturation", self.saturation.is_some()),
            ("hue", self.hue.is_some()),
            ("value", self.value.is_some()),
            ("sigma", self.sigma.is_some()),
        ] {
            if set && !allowed.contains(&field) {
                return Err(format!("field {field} does not apply to {}", self.kind));
            }
        }
        Ok(AugOp { kind, p: self.p })
    }

    fn from_op(op: &AugOp) -> Self {
        let mut s = OpSpec {
            kind: op.kind.name().to_string(),
            p: op.p,
            ..Default::default()
        };
        match op.kind {
            OpKind::ResizedCrop { scale, ratio } => {
                s.scale = Some([scale.0, scale.1]);
                s.ratio = Some([ratio.0, ratio.1]);
            }
            OpKind::Rotate(RotateMode::Arbitrary { max_degrees }) => s.max_degrees = Some(max_degrees),
            OpKind::ColorJitter(c) => {
                s.brightness = Some(c.brightness);
                s.contrast = Some(c.contrast);
                s.saturation = Some(c.saturation);
                s.hue = Some(c.hue);
            }
            OpKind::GaussianBlur { sigma } => s.sigma = Some([sigma.0, sigma.1]),
            OpKind::PaletteJitter(j) => {
                s.hue = Some(j.hue);
                s.saturation = Some(j.saturation);
                s.value = Some(j.value);
            }
            _ => {}
        }
        s
    }
}
