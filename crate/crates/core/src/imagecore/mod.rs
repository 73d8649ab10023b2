//! Image buffers and the low-level operations every other module builds on.

mod buffer;
mod codec;
mod lab;
mod morphology;
mod resize;

pub use buffer::{BinaryMask, ImageBuffer, LabImage, Trimap, TrimapLabel};
pub use codec::{decode, decode_rgb, encode_png, read_image, write_png};
pub use lab::{lab_distance, lab_distance_sq, rgb_to_lab, srgb_to_lab};
pub(crate) use lab::srgb_f64_to_lab;
pub use morphology::{dilate, erode};
pub use resize::{resize, resize_nearest};
