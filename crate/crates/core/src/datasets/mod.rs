//! Point clouds, synthetic manifold generators and the noise / label-masking
//! / scaling protocol used by the transfer experiments.
//!
//! Row order is node identity throughout: every transformation here keeps
//! row `i` of its input at row `i` of its output (except [`subsample`], which
//! keeps the surviving rows in their original relative order).

mod generators;
mod io;
mod transform;

pub use generators::{gen_moons, gen_s_curve, gen_swiss_roll};
pub use io::{load_csv, parse_delimited, LabelColumn};
pub use transform::{
    add_noise, mask_labels, minmax_scale, minmax_scale_joint, subsample, subsample_indices,
};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// An `n x d` matrix of finite features.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    features: Matrix,
}

impl PointCloud {
    pub fn new(features: Matrix) -> Result<Self> {
        if features.nrows() == 0 || features.ncols() == 0 {
            return Err(Error::invalid(format!(
                "point cloud needs n >= 1 and d >= 1, got {}x{}",
                features.nrows(),
                features.ncols()
            )));
        }
        if let Some(pos) = features.as_slice().iter().position(|v| !v.is_finite()) {
            let d = features.ncols();
            return Err(Error::invalid(format!(
                "non-finite feature at row {}, column {}",
                pos / d,
                pos % d
            )));
        }
        Ok(PointCloud { features })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        PointCloud::new(Matrix::from_rows(rows))
    }

    /// Builds a cloud from data already known to be finite and non-empty.
    pub(crate) fn from_matrix_unchecked(features: Matrix) -> Self {
        debug_assert!(features.is_finite());
        PointCloud { features }
    }

    pub fn len(&self) -> usize {
        self.features.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dim(&self) -> usize {
        self.features.ncols()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        self.features.row(i)
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.features.rows()
    }

    pub fn features(&self) -> &Matrix {
        &self.features
    }

    pub fn into_features(self) -> Matrix {
        self.features
    }

    /// Rows `indices` in the given order.
    pub fn select(&self, indices: &[usize]) -> PointCloud {
        let d = self.dim();
        let mut data = Vec::with_capacity(indices.len() * d);
        for &i in indices {
            data.extend_from_slice(self.point(i));
        }
        PointCloud::from_matrix_unchecked(Matrix::from_row_major(indices.len(), d, data))
    }

    /// Stacks `other` below `self`.
    pub fn concat(&self, other: &PointCloud) -> Result<PointCloud> {
        if self.dim() != other.dim() {
            return Err(Error::mismatch(
                format!("d={}", self.dim()),
                format!("d={}", other.dim()),
            ));
        }
        let mut data = self.features.as_slice().to_vec();
        data.extend_from_slice(other.features.as_slice());
        Ok(PointCloud::from_matrix_unchecked(Matrix::from_row_major(
            self.len() + other.len(),
            self.dim(),
            data,
        )))
    }
}

/// A point cloud with one class id in `[0, C)` per row; every class occurs.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledPointCloud {
    cloud: PointCloud,
    labels: Vec<usize>,
    num_classes: usize,
}

impl LabeledPointCloud {
    pub fn new(cloud: PointCloud, labels: Vec<usize>) -> Result<Self> {
        if labels.len() != cloud.len() {
            return Err(Error::mismatch(
                format!("{} labels", labels.len()),
                format!("{} rows", cloud.len()),
            ));
        }
        let num_classes = labels.iter().max().map_or(0, |m| m + 1);
        let mut seen = vec![false; num_classes];
        for &l in &labels {
            seen[l] = true;
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(Error::invalid(format!(
                "class {missing} has no members (labels must cover 0..{num_classes})"
            )));
        }
        Ok(LabeledPointCloud {
            cloud,
            labels,
            num_classes,
        })
    }

    pub fn cloud(&self) -> &PointCloud {
        &self.cloud
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn len(&self) -> usize {
        self.cloud.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cloud.is_empty()
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.num_classes];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }

    /// Same labels, different features (e.g. after noise or scaling).
    pub fn with_cloud(&self, cloud: PointCloud) -> Result<Self> {
        LabeledPointCloud::new(cloud, self.labels.clone())
    }

    pub fn into_parts(self) -> (PointCloud, Vec<usize>) {
        (self.cloud, self.labels)
    }
}

/// A point cloud where only some rows carry their label. Unlabeled rows are
/// the prediction target.
#[derive(Debug, Clone, PartialEq)]
pub struct PartiallyLabeledCloud {
    cloud: PointCloud,
    labels: Vec<Option<usize>>,
    num_classes: usize,
}

impl PartiallyLabeledCloud {
    /// Every class in `0..num_classes` needs at least one labeled row.
    pub fn new(cloud: PointCloud, labels: Vec<Option<usize>>, num_classes: usize) -> Result<Self> {
        if labels.len() != cloud.len() {
            return Err(Error::mismatch(
                format!("{} labels", labels.len()),
                format!("{} rows", cloud.len()),
            ));
        }
        let mut seen = vec![false; num_classes];
        for l in labels.iter().flatten() {
            if *l >= num_classes {
                return Err(Error::invalid(format!(
                    "label {l} outside 0..{num_classes}"
                )));
            }
            seen[*l] = true;
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(Error::invalid(format!("class {missing} has no labeled rows")));
        }
        Ok(PartiallyLabeledCloud {
            cloud,
            labels,
            num_classes,
        })
    }

    pub fn cloud(&self) -> &PointCloud {
        &self.cloud
    }

    pub fn labels(&self) -> &[Option<usize>] {
        &self.labels
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn len(&self) -> usize {
        self.cloud.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cloud.is_empty()
    }

    pub fn labeled_mask(&self) -> Vec<bool> {
        self.labels.iter().map(Option::is_some).collect()
    }

    pub fn labeled_indices(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.labels[i].is_some()).collect()
    }

    pub fn unlabeled_indices(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.labels[i].is_none()).collect()
    }

    pub fn with_cloud(&self, cloud: PointCloud) -> Result<Self> {
        PartiallyLabeledCloud::new(cloud, self.labels.clone(), self.num_classes)
    }
}

/// Gaussian noise level; levels 1..=4 follow the experiment protocol.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    level: u8,
    sigma: f64,
}

impl NoiseSpec {
    /// Standard deviation for each level `0..=4`.
    pub const SIGMAS: [f64; 5] = [0.0, 0.078, 0.29, 0.64, 1.0];

    pub fn level(level: u8) -> Result<Self> {
        let sigma = *Self::SIGMAS
            .get(usize::from(level))
            .ok_or_else(|| Error::invalid(format!("noise level {level} outside 0..=4")))?;
        Ok(NoiseSpec { level, sigma })
    }

    pub fn level_index(&self) -> u8 {
        self.level
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }
}
