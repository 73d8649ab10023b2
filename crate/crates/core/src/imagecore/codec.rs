//! PNG/JPEG decoding and PNG encoding.
//!
//! JPEG decoding goes through the `image` crate's single built-in decoder, so
//! decoded pixels are reproducible for a pinned dependency set.

use std::io::Cursor;
use std::path::Path;

use image::{DynamicImage, ImageFormat};

use super::ImageBuffer;
use crate::{Error, Result};

/// Decodes a PNG or JPEG stream, keeping grayscale images single-channel.
///
/// Alpha is dropped and 16-bit samples are reduced to 8 bits.
pub fn decode(bytes: &[u8]) -> Result<ImageBuffer> {
    let format = match image::guess_format(bytes) {
        Ok(f @ (ImageFormat::Png | ImageFormat::Jpeg)) => f,
        Ok(_) => return Err(Error::UnsupportedFormat),
        Err(_) => return Err(Error::UnsupportedFormat),
    };
    let img = image::load_from_memory_with_format(bytes, format)
        .map_err(|e| Error::CorruptStream(e.to_string()))?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    match img {
        DynamicImage::ImageLuma8(_)
        | DynamicImage::ImageLumaA8(_)
        | DynamicImage::ImageLuma16(_)
        | DynamicImage::ImageLumaA16(_) => ImageBuffer::new(w, h, 1, img.to_luma8().into_raw()),
        _ => ImageBuffer::new(w, h, 3, img.to_rgb8().into_raw()),
    }
}

/// Decodes and canonicalizes to 3-channel RGB.
pub fn decode_rgb(bytes: &[u8]) -> Result<ImageBuffer> {
    decode(bytes).map(|img| img.to_rgb())
}

pub fn read_image(path: impl AsRef<Path>) -> Result<ImageBuffer> {
    let bytes = std::fs::read(path)?;
    decode_rgb(&bytes)
}

/// Lossless PNG encoding; gray buffers are written as 8-bit grayscale.
pub fn encode_png(img: &ImageBuffer) -> Result<Vec<u8>> {
    use image::ImageEncoder;

    let color = if img.channels() == 1 {
        image::ExtendedColorType::L8
    } else {
        image::ExtendedColorType::Rgb8
    };
    let mut out = Cursor::new(Vec::new());
    image::codecs::png::PngEncoder::new(&mut out)
        .write_image(img.data(), img.width() as u32, img.height() as u32, color)
        .map_err(|e| Error::Io(std::io::Error::other(e)))?;
    Ok(out.into_inner())
}

pub fn write_png(path: impl AsRef<Path>, img: &ImageBuffer) -> Result<()> {
    std::fs::write(path, encode_png(img)?)?;
    Ok(())
}
