//! Seeded augmentation operators, palette jitter and the preset policies.

mod jitter;
pub mod ops;
mod policy;
mod rng;

pub use jitter::{
    color_labels, connected_components, distinct_colors, palette_jitter, palette_jitter_with, PaletteJitterParams,
    MAX_SEGMENT_COLORS,
};
pub use ops::{ColorJitterParams, Interp, JitterFactors};
pub use policy::{
    apply_policy, default_ops, preset_policies, preset_policy, AugOp, AugPolicy, InlineSegmentation, OpKind,
    RotateMode, SegmentationSource, DEFAULT_OUTPUT_SIZE,
};
pub use rng::{fires, image_seed, op_rng};
