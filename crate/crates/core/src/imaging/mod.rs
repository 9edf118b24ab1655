//! Raster images, CIELAB conversion, grid superpixels with a k-means palette,
//! and the adapter from images to point clouds.
//!
//! Images are stored as row-major RGB triples (top row first). The point
//! cloud of an image has one row per pixel in the same raster order, so two
//! images of equal size produce node-aligned graphs.

mod color;
mod io;
mod resize;
mod superpixel;

pub use color::{lab_to_rgb, lab_to_srgb, rgb_to_lab, srgb_to_lab};
pub use io::{read_image, write_image};
pub use resize::resize;
pub use superpixel::{
    grid_superpixels, kmeans_palette, superpixel_centroid_image, SuperpixelResult,
};

use crate::datasets::PointCloud;
use crate::error::{Error, Result};
use crate::graphs::{adjacency, knn_graph};
use crate::matrix::Matrix;
use crate::similarity::{manifold_distance, SimilarityResult, Variant};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RasterImage {
    width: usize,
    height: usize,
    pixels: Vec<[u8; 3]>,
}

impl RasterImage {
    pub fn new(width: usize, height: usize, pixels: Vec<[u8; 3]>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::invalid(format!("empty image {width}x{height}")));
        }
        if pixels.len() != width * height {
            return Err(Error::mismatch(
                format!("{width}x{height} image"),
                format!("{} pixels", pixels.len()),
            ));
        }
        Ok(RasterImage {
            width,
            height,
            pixels,
        })
    }

    pub fn uniform(width: usize, height: usize, rgb: [u8; 3]) -> Result<Self> {
        Self::new(width, height, vec![rgb; width * height])
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> [u8; 3],
    ) -> Result<Self> {
        let mut pixels = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        Self::new(width, height, pixels)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixel_count(&self) -> usize {
        self.pixels.len()
    }

    pub fn get(&self, x: usize, y: usize) -> [u8; 3] {
        self.pixels[y * self.width + x]
    }

    pub fn pixels(&self) -> &[[u8; 3]] {
        &self.pixels
    }

    pub fn distinct_colors(&self) -> usize {
        let mut p = self.pixels.clone();
        p.sort_unstable();
        p.dedup();
        p.len()
    }

    /// Downscales so the longer side is at most `max_side`, keeping the
    /// aspect ratio. Smaller images are returned unchanged.
    pub fn limit_side(&self, max_side: usize) -> Result<RasterImage> {
        let long = self.width.max(self.height);
        if max_side == 0 {
            return Err(Error::invalid("max side must be at least 1"));
        }
        if long <= max_side {
            return Ok(self.clone());
        }
        let scale = max_side as f64 / long as f64;
        let w = ((self.width as f64 * scale).round() as usize).clamp(1, max_side);
        let h = ((self.height as f64 * scale).round() as usize).clamp(1, max_side);
        resize(self, w, h)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabImage {
    width: usize,
    height: usize,
    pixels: Vec<[f64; 3]>,
}

impl LabImage {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[[f64; 3]] {
        &self.pixels
    }
}

/// Segment label per pixel, row-major; labels are `0..count`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SegmentMap {
    width: usize,
    height: usize,
    labels: Vec<usize>,
    count: usize,
}

impl SegmentMap {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn get(&self, x: usize, y: usize) -> usize {
        self.labels[y * self.width + x]
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for row in self.labels.chunks(self.width) {
            let cells: Vec<String> = row.iter().map(usize::to_string).collect();
            s.push_str(&cells.join(" "));
            s.push('\n');
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Palette {
    colors: Vec<[f64; 3]>,
}

impl Palette {
    pub fn colors(&self) -> &[[f64; 3]] {
        &self.colors
    }

    pub fn len(&self) -> usize {
        self.colors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.colors.is_empty()
    }

    /// Index of the nearest color in LAB; ties go to the lower index.
    pub fn nearest(&self, lab: [f64; 3]) -> usize {
        let mut best = (f64::INFINITY, 0);
        for (i, c) in self.colors.iter().enumerate() {
            let d = (0..3).map(|k| (c[k] - lab[k]).powi(2)).sum::<f64>();
            if d < best.0 {
                best = (d, i);
            }
        }
        best.1
    }

    pub fn to_text(&self) -> String {
        self.colors
            .iter()
            .map(|c| format!("{} {} {}\n", c[0], c[1], c[2]))
            .collect()
    }
}

/// One row per pixel in raster order with `(L/100, (a+128)/255, (b+128)/255)`,
/// optionally preceded by `(x/w, y/h)`.
pub fn image_to_point_cloud(img: &RasterImage, include_xy: bool) -> PointCloud {
    let lab = rgb_to_lab(img);
    let d = if include_xy { 5 } else { 3 };
    let (w, h) = (img.width, img.height);
    let mut data = Vec::with_capacity(w * h * d);
    for (i, p) in lab.pixels.iter().enumerate() {
        if include_xy {
            data.push((i % w) as f64 / w as f64);
            data.push((i / w) as f64 / h as f64);
        }
        data.push(p[0] / 100.0);
        data.push((p[1] + 128.0) / 255.0);
        data.push((p[2] + 128.0) / 255.0);
    }
    PointCloud::from_matrix_unchecked(Matrix::from_row_major(w * h, d, data))
}

/// Resizes both images to their common (smallest) width and height.
pub fn match_sizes(a: &RasterImage, b: &RasterImage) -> Result<(RasterImage, RasterImage)> {
    let w = a.width.min(b.width);
    let h = a.height.min(b.height);
    Ok((resize(a, w, h)?, resize(b, w, h)?))
}

/// How an image becomes a graph.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageGraphOptions {
    pub k: usize,
    pub include_xy: bool,
    pub t: Option<f64>,
    pub variant: Variant,
    pub symmetrize: bool,
}

impl Default for ImageGraphOptions {
    fn default() -> Self {
        ImageGraphOptions {
            k: 8,
            include_xy: true,
            t: None,
            variant: Variant::Rows,
            symmetrize: false,
        }
    }
}

/// Manifold distance between the pixel k-NN graphs of two images of equal
/// size.
pub fn image_distance(
    a: &RasterImage,
    b: &RasterImage,
    opts: &ImageGraphOptions,
) -> Result<SimilarityResult> {
    if (a.width, a.height) != (b.width, b.height) {
        return Err(Error::mismatch(
            format!("{}x{} image", a.width, a.height),
            format!("{}x{} image", b.width, b.height),
        ));
    }
    let graph = |img: &RasterImage| -> Result<_> {
        let cloud = image_to_point_cloud(img, opts.include_xy);
        Ok(adjacency(&knn_graph(&cloud, opts.k, opts.symmetrize)?))
    };
    manifold_distance(&graph(a)?, &graph(b)?, opts.t, opts.variant)
}

/// Distances between the superpixel versions of two images at each size in
/// `sizes`, preceded by the distance of the unprocessed pair.
pub fn superpixel_study(
    first: &RasterImage,
    second: &RasterImage,
    sizes: &[usize],
    opts: &ImageGraphOptions,
    seed: u64,
) -> Result<Vec<(Option<usize>, f64)>> {
    let (x, y) = match_sizes(first, second)?;
    let mut rows = vec![(None, image_distance(&x, &y, opts)?.distance)];
    for &n in sizes {
        let sx = superpixel_centroid_image(&x, n, seed)?.image;
        let sy = superpixel_centroid_image(&y, n, seed)?.image;
        rows.push((Some(n), image_distance(&sx, &sy, opts)?.distance));
    }
    Ok(rows)
}
