//! Conventional point-cloud distances used as comparison points for the
//! manifold distance.

use std::fmt;
use std::str::FromStr;

use faer::Mat;

use crate::datasets::PointCloud;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MeasureKind {
    Cosine,
    Rbf,
    Procrustes,
    Wasserstein,
    Hausdorff,
}

impl MeasureKind {
    pub const ALL: [MeasureKind; 5] = [
        MeasureKind::Cosine,
        MeasureKind::Rbf,
        MeasureKind::Procrustes,
        MeasureKind::Wasserstein,
        MeasureKind::Hausdorff,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            MeasureKind::Cosine => "cosine",
            MeasureKind::Rbf => "rbf",
            MeasureKind::Procrustes => "procrustes",
            MeasureKind::Wasserstein => "wasserstein",
            MeasureKind::Hausdorff => "hausdorff",
        }
    }
}

impl fmt::Display for MeasureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MeasureKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "cosine" | "cos" => Ok(MeasureKind::Cosine),
            "rbf" | "mmd" => Ok(MeasureKind::Rbf),
            "procrustes" | "pd" => Ok(MeasureKind::Procrustes),
            "wasserstein" | "wd" => Ok(MeasureKind::Wasserstein),
            "hausdorff" => Ok(MeasureKind::Hausdorff),
            other => Err(Error::invalid(format!("unknown measure {other:?}"))),
        }
    }
}

/// Evaluates `kind` with default parameters.
pub fn baseline_distance(kind: MeasureKind, x1: &PointCloud, x2: &PointCloud) -> Result<f64> {
    match kind {
        MeasureKind::Cosine => cosine_distance(x1, x2),
        MeasureKind::Rbf => rbf_distance(x1, x2, None),
        MeasureKind::Procrustes => procrustes_disparity(x1, x2),
        MeasureKind::Wasserstein => wasserstein_distance(x1, x2),
        MeasureKind::Hausdorff => hausdorff_distance(x1, x2),
    }
}

fn same_shape(x1: &PointCloud, x2: &PointCloud) -> Result<()> {
    if x1.len() != x2.len() || x1.dim() != x2.dim() {
        return Err(Error::mismatch(
            format!("{}x{}", x1.len(), x1.dim()),
            format!("{}x{}", x2.len(), x2.dim()),
        ));
    }
    Ok(())
}

fn same_dim(x1: &PointCloud, x2: &PointCloud) -> Result<()> {
    if x1.dim() != x2.dim() {
        return Err(Error::mismatch(format!("d={}", x1.dim()), format!("d={}", x2.dim())));
    }
    Ok(())
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// One minus the cosine of the angle between the row-major flattenings,
/// evaluated as half the squared distance between the unit-normalized
/// flattenings (exactly zero for identical inputs).
pub fn cosine_distance(x1: &PointCloud, x2: &PointCloud) -> Result<f64> {
    same_shape(x1, x2)?;
    let a = x1.features().as_slice();
    let b = x2.features().as_slice();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return Err(Error::Degenerate("cosine distance of an all-zero cloud".into()));
    }
    let sq: f64 = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x / na - y / nb).powi(2))
        .sum();
    Ok(0.5 * sq)
}

/// The pair in a fixed order, so floating-point summation does not depend on
/// argument order.
fn canonical<'a>(x1: &'a PointCloud, x2: &'a PointCloud) -> (&'a PointCloud, &'a PointCloud) {
    let key = |x: &PointCloud| (x.len(), x.dim());
    let order = key(x1).cmp(&key(x2)).then_with(|| {
        let (a, b) = (x1.features().as_slice(), x2.features().as_slice());
        a.iter()
            .zip(b)
            .map(|(p, q)| p.total_cmp(q))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    if order.is_gt() {
        (x2, x1)
    } else {
        (x1, x2)
    }
}

/// Default kernel width: `1 / (d * Var)` with the variance taken over every
/// entry of both clouds. Falls back to `1 / d` for constant data.
pub fn default_gamma(x1: &PointCloud, x2: &PointCloud) -> f64 {
    let entries = x1.features().as_slice().iter().chain(x2.features().as_slice());
    let count = (x1.len() + x2.len()) as f64 * x1.dim() as f64;
    let mean = entries.clone().sum::<f64>() / count;
    let var = entries.map(|v| (v - mean) * (v - mean)).sum::<f64>() / count;
    let d = x1.dim() as f64;
    if var > 0.0 {
        1.0 / (d * var)
    } else {
        1.0 / d
    }
}

fn mean_kernel(x: &PointCloud, y: &PointCloud, gamma: f64) -> f64 {
    let mut total = 0.0;
    for a in x.points() {
        for b in y.points() {
            total += (-gamma * sq_dist(a, b)).exp();
        }
    }
    total / (x.len() * y.len()) as f64
}

/// Biased Gaussian-kernel two-sample statistic. `gamma = None` uses
/// [`default_gamma`].
pub fn rbf_distance(x1: &PointCloud, x2: &PointCloud, gamma: Option<f64>) -> Result<f64> {
    same_dim(x1, x2)?;
    let (x1, x2) = canonical(x1, x2);
    let gamma = gamma.unwrap_or_else(|| default_gamma(x1, x2));
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::invalid(format!("gamma must be positive, got {gamma}")));
    }
    let stat = mean_kernel(x1, x1, gamma) + mean_kernel(x2, x2, gamma)
        - 2.0 * mean_kernel(x1, x2, gamma);
    Ok(stat.max(0.0))
}

fn standardized(x: &PointCloud) -> Result<Mat<f64>> {
    let (n, d) = (x.len(), x.dim());
    let mut mean = vec![0.0; d];
    for p in x.points() {
        for (m, v) in mean.iter_mut().zip(p) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);
    let norm = x
        .points()
        .map(|p| sq_dist(p, &mean))
        .sum::<f64>()
        .sqrt();
    if norm == 0.0 || !norm.is_finite() {
        return Err(Error::Degenerate("procrustes input has identical rows".into()));
    }
    Ok(Mat::from_fn(n, d, |i, j| (x.point(i)[j] - mean[j]) / norm))
}

/// Residual sum of squares after centering both clouds, scaling them to unit
/// Frobenius norm and optimally rotating/reflecting and scaling the second.
pub fn procrustes_disparity(x1: &PointCloud, x2: &PointCloud) -> Result<f64> {
    same_shape(x1, x2)?;
    let (x1, x2) = canonical(x1, x2);
    let a = standardized(x1)?;
    if x1 == x2 {
        return Ok(0.0);
    }
    let b = standardized(x2)?;
    let cross = a.transpose() * &b;
    let sv = cross
        .singular_values()
        .map_err(|_| Error::NoConvergence {
            iterations: 0,
            estimate: f64::NAN,
        })?;
    let trace: f64 = sv.iter().sum();
    Ok((1.0 - trace * trace).clamp(0.0, 1.0))
}

fn sorted_entries(x: &PointCloud) -> Vec<f64> {
    let mut v = x.features().as_slice().to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// Earth mover's distance between the value distributions of all entries.
pub fn wasserstein_distance(x1: &PointCloud, x2: &PointCloud) -> Result<f64> {
    let (a, b) = (sorted_entries(x1), sorted_entries(x2));
    if a.len() != b.len() {
        return Err(Error::mismatch(
            format!("{} entries", a.len()),
            format!("{} entries", b.len()),
        ));
    }
    Ok(a.iter().zip(&b).map(|(x, y)| (x - y).abs()).sum::<f64>() / a.len() as f64)
}

/// Largest squared distance from a point of `from` to its nearest point of
/// `to`. The inner scan stops as soon as it cannot raise the running maximum.
fn directed_hausdorff_sq(from: &PointCloud, to: &PointCloud) -> f64 {
    let mut worst = 0.0f64;
    for p in from.points() {
        let mut nearest = f64::INFINITY;
        for q in to.points() {
            let d = sq_dist(p, q);
            if d < nearest {
                nearest = d;
                if nearest <= worst {
                    break;
                }
            }
        }
        worst = worst.max(nearest);
    }
    worst
}

pub fn hausdorff_distance(x1: &PointCloud, x2: &PointCloud) -> Result<f64> {
    same_dim(x1, x2)?;
    if x1.is_empty() || x2.is_empty() {
        return Err(Error::invalid("hausdorff distance of an empty cloud"));
    }
    Ok(directed_hausdorff_sq(x1, x2)
        .max(directed_hausdorff_sq(x2, x1))
        .sqrt())
}
