//! Global-contrast salient region detection and SaliencyCut segmentation,
//! plus the pieces needed to use that segmentation as a cheap, cached data
//! augmentation for contrastive self-supervised training.
//!
//! The pipeline, bottom-up:
//!
//! - [`imagecore`]: 8-bit image buffers, PNG/JPEG codecs, sRGB to CIE Lab,
//!   bilinear resizing and square-element binary morphology.
//! - [`quantize`]: 12-level-per-channel color quantization and the
//!   frequency-based histogram reduction shared by both saliency methods.
//! - [`saliency`]: histogram contrast (HC) and region contrast (RC) maps.
//! - [`graphcut`]: a Boykov-Kolmogorov max-flow solver and the 8-connected
//!   MRF graph used by each GrabCut step.
//! - [`saliencycut`]: Gaussian mixtures, trimaps and the iterative cut loop.
//! - [`augment`]: seeded augmentation operators and the preset policies.
//! - [`cache`]: content-hashed storage of precomputed segmentation maps.
//!
//! ```no_run
//! use saliencut::{imagecore, saliencycut::{saliency_cut, CutParams}};
//!
//! let bytes = std::fs::read("photo.jpg").unwrap();
//! let img = imagecore::decode_rgb(&bytes).unwrap();
//! let out = saliency_cut(&img, &CutParams::default()).unwrap();
//! println!("{} foreground pixels", out.mask.count());
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod augment;
pub mod cache;
mod error;
pub mod graphcut;
pub mod imagecore;
pub mod quantize;
pub mod saliency;
pub mod saliencycut;

pub use error::{Error, Result};
pub use imagecore::{BinaryMask, ImageBuffer, LabImage, Trimap, TrimapLabel};
pub use saliency::SaliencyMap;
pub use saliencycut::{CutParams, SaliencyMode};

/// Library version, shared by the CLI and any bindings.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
