//! PNG and binary PPM (P6) files. Pixels are RGB in that byte order; an alpha
//! channel is dropped on read.

use std::fs;
use std::io::ErrorKind;
use std::path::Path;

use image::{ImageFormat, ImageReader, RgbImage};

use super::RasterImage;
use crate::error::{Error, Result};

fn image_err(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Image {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}

pub fn read_image(path: impl AsRef<Path>) -> Result<RasterImage> {
    let path = path.as_ref();
    let reader = ImageReader::open(path).map_err(|source| match source.kind() {
        ErrorKind::NotFound => Error::MissingFile {
            path: path.to_path_buf(),
        },
        _ => Error::Io {
            path: path.to_path_buf(),
            source,
        },
    })?;
    let decoded = reader
        .with_guessed_format()
        .map_err(|e| image_err(path, e))?
        .decode()
        .map_err(|e| image_err(path, e))?
        .to_rgb8();
    let (w, h) = decoded.dimensions();
    let pixels = decoded.pixels().map(|p| p.0).collect();
    RasterImage::new(w as usize, h as usize, pixels).map_err(|e| image_err(path, e))
}

/// Writes PNG unless the extension is `.ppm`/`.pnm`, which gives P6.
pub fn write_image(img: &RasterImage, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase);
    let bytes: Vec<u8> = img.pixels().iter().flatten().copied().collect();
    if matches!(ext.as_deref(), Some("ppm") | Some("pnm")) {
        let mut out = format!("P6\n{} {}\n255\n", img.width(), img.height()).into_bytes();
        out.extend_from_slice(&bytes);
        return fs::write(path, out).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        });
    }
    let buf = RgbImage::from_raw(img.width() as u32, img.height() as u32, bytes)
        .expect("buffer matches dimensions");
    buf.save_with_format(path, ImageFormat::Png)
        .map_err(|e| image_err(path, e))
}
