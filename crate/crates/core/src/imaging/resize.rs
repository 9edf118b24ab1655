use super::RasterImage;
use crate::error::{Error, Result};

/// Source coordinate and blend weight for output index `i`, with pixel
/// centers at half-integer positions.
fn taps(i: usize, out: usize, src: usize) -> (usize, usize, f64) {
    let pos = ((i as f64 + 0.5) * src as f64 / out as f64 - 0.5).clamp(0.0, (src - 1) as f64);
    let lo = pos.floor() as usize;
    let hi = (lo + 1).min(src - 1);
    (lo, hi, pos - lo as f64)
}

/// Bilinear resampling.
pub fn resize(img: &RasterImage, width: usize, height: usize) -> Result<RasterImage> {
    if width == 0 || height == 0 {
        return Err(Error::invalid(format!("cannot resize to {width}x{height}")));
    }
    if width == img.width() && height == img.height() {
        return Ok(img.clone());
    }
    let xs: Vec<_> = (0..width).map(|x| taps(x, width, img.width())).collect();
    let ys: Vec<_> = (0..height).map(|y| taps(y, height, img.height())).collect();
    RasterImage::from_fn(width, height, |x, y| {
        let (x0, x1, fx) = xs[x];
        let (y0, y1, fy) = ys[y];
        let (p00, p10, p01, p11) = (img.get(x0, y0), img.get(x1, y0), img.get(x0, y1), img.get(x1, y1));
        [0, 1, 2].map(|c| {
            let top = p00[c] as f64 * (1.0 - fx) + p10[c] as f64 * fx;
            let bottom = p01[c] as f64 * (1.0 - fx) + p11[c] as f64 * fx;
            (top * (1.0 - fy) + bottom * fy).round().clamp(0.0, 255.0) as u8
        })
    })
}
