//! Grid superpixels recolored from a k-means palette.

use rand::Rng as _;

use super::{lab_to_rgb, rgb_to_lab, LabImage, Palette, RasterImage, SegmentMap};
use crate::error::{Error, Result};
use crate::seed::rng;

const MAX_ITERATIONS: usize = 100;
const SHIFT_TOL: f64 = 1e-4;

/// Square blocks of side `max(1, round(sqrt(h*w/n)))`, numbered row by row.
pub fn grid_superpixels(width: usize, height: usize, n: usize) -> Result<SegmentMap> {
    if n == 0 {
        return Err(Error::invalid("superpixel count must be at least 1"));
    }
    if width == 0 || height == 0 {
        return Err(Error::invalid(format!("empty image {width}x{height}")));
    }
    let step = (((height * width) as f64 / n as f64).sqrt().round() as usize).max(1);
    let across = width.div_ceil(step);
    let mut labels = Vec::with_capacity(width * height);
    for y in 0..height {
        for x in 0..width {
            labels.push((y / step) * across + x / step);
        }
    }
    Ok(SegmentMap {
        width,
        height,
        labels,
        count: across * height.div_ceil(step),
    })
}

fn sq(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    (0..3).map(|k| (a[k] - b[k]).powi(2)).sum()
}

/// Nearest center (ties to the lower index) and its squared distance.
fn nearest(p: &[f64; 3], centers: &[[f64; 3]]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (i, c) in centers.iter().enumerate() {
        let d = sq(p, c);
        if d < best.1 {
            best = (i, d);
        }
    }
    best
}

/// k-means++ seeding; stops early once every point coincides with a center.
fn seed_centers(points: &[[f64; 3]], k: usize, seed: u64) -> Vec<[f64; 3]> {
    let mut r = rng(seed);
    let mut centers = vec![points[r.random_range(0..points.len())]];
    let mut d2: Vec<f64> = points.iter().map(|p| sq(p, &centers[0])).collect();
    while centers.len() < k {
        let total: f64 = d2.iter().sum();
        if total <= 0.0 {
            break;
        }
        let mut target = r.random::<f64>() * total;
        let mut pick = d2.iter().rposition(|&d| d > 0.0).expect("positive total");
        for (i, &d) in d2.iter().enumerate() {
            if d > 0.0 && target < d {
                pick = i;
                break;
            }
            target -= d;
        }
        let c = points[pick];
        for (slot, p) in d2.iter_mut().zip(points) {
            *slot = slot.min(sq(p, &c));
        }
        centers.push(c);
    }
    centers
}

fn lloyd(points: &[[f64; 3]], mut centers: Vec<[f64; 3]>) -> Vec<[f64; 3]> {
    let mut assign = vec![0usize; points.len()];
    for _ in 0..MAX_ITERATIONS {
        let mut dist = vec![0.0; points.len()];
        for (i, p) in points.iter().enumerate() {
            (assign[i], dist[i]) = nearest(p, &centers);
        }
        // accumulate offsets from the old center so a cluster of identical
        // points keeps that exact color
        let k = centers.len();
        let mut offset = vec![[0.0; 3]; k];
        let mut count = vec![0usize; k];
        for (p, &a) in points.iter().zip(&assign) {
            count[a] += 1;
            (0..3).for_each(|c| offset[a][c] += p[c] - centers[a][c]);
        }
        let mut shift = 0.0f64;
        let mut keep = vec![true; k];
        for j in 0..k {
            if count[j] == 0 {
                // reseed at the point farthest from its center
                let far = (0..points.len())
                    .max_by(|&a, &b| dist[a].total_cmp(&dist[b]).then(b.cmp(&a)))
                    .expect("nonempty");
                if dist[far] > 0.0 {
                    shift = shift.max(sq(&centers[j], &points[far]).sqrt());
                    centers[j] = points[far];
                    dist[far] = 0.0;
                } else {
                    keep[j] = false;
                }
                continue;
            }
            let new = [0, 1, 2].map(|c| centers[j][c] + offset[j][c] / count[j] as f64);
            shift = shift.max(sq(&centers[j], &new).sqrt());
            centers[j] = new;
        }
        if keep.iter().any(|&k| !k) {
            centers = centers
                .into_iter()
                .zip(&keep)
                .filter(|(_, &k)| k)
                .map(|(c, _)| c)
                .collect();
        }
        if shift <= SHIFT_TOL {
            break;
        }
    }
    centers
}

/// Up to `n` representative LAB colors of the image.
pub fn kmeans_palette(lab: &LabImage, n: usize, seed: u64) -> Result<Palette> {
    let points = lab.pixels();
    if n == 0 {
        return Err(Error::invalid("palette size must be at least 1"));
    }
    if n > points.len() {
        return Err(Error::invalid(format!(
            "palette size {n} exceeds pixel count {}",
            points.len()
        )));
    }
    let centers = seed_centers(points, n, seed);
    Ok(Palette {
        colors: lloyd(points, centers),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuperpixelResult {
    pub image: RasterImage,
    pub segments: SegmentMap,
    pub palette: Palette,
    /// Palette index chosen for each segment.
    pub assignment: Vec<usize>,
}

/// Paints every grid superpixel with the palette color nearest to its mean
/// LAB color.
pub fn superpixel_centroid_image(img: &RasterImage, n: usize, seed: u64) -> Result<SuperpixelResult> {
    let lab = rgb_to_lab(img);
    let segments = grid_superpixels(img.width(), img.height(), n)?;
    let palette = kmeans_palette(&lab, n.min(img.pixel_count()), seed)?;

    let mut sums = vec![[0.0; 3]; segments.count()];
    let mut counts = vec![0usize; segments.count()];
    for (p, &s) in lab.pixels().iter().zip(segments.labels()) {
        counts[s] += 1;
        (0..3).for_each(|c| sums[s][c] += p[c]);
    }
    let assignment: Vec<usize> = sums
        .iter()
        .zip(&counts)
        .map(|(s, &n)| palette.nearest(s.map(|v| v / n as f64)))
        .collect();
    let painted = LabImage {
        width: img.width(),
        height: img.height(),
        pixels: segments
            .labels()
            .iter()
            .map(|&s| palette.colors()[assignment[s]])
            .collect(),
    };
    Ok(SuperpixelResult {
        image: lab_to_rgb(&painted),
        segments,
        palette,
        assignment,
    })
}
