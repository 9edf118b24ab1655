use rand::seq::index;
use rand_distr::{Distribution, StandardNormal};

use super::{LabeledPointCloud, NoiseSpec, PartiallyLabeledCloud, PointCloud};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::seed;

/// Adds independent `N(0, sigma^2)` noise to every feature entry.
///
/// The noise is `sigma * z` with `z` drawn from a standard normal stream
/// determined by `seed` alone, so the same seed at different levels moves
/// each entry along the same direction.
pub fn add_noise(cloud: &PointCloud, spec: NoiseSpec, seed: u64) -> PointCloud {
    if spec.sigma() == 0.0 {
        return cloud.clone();
    }
    let mut rng = seed::rng(seed);
    let sigma = spec.sigma();
    let data = cloud
        .features()
        .as_slice()
        .iter()
        .map(|&v| {
            let z: f64 = StandardNormal.sample(&mut rng);
            v + sigma * z
        })
        .collect();
    PointCloud::from_matrix_unchecked(Matrix::from_row_major(cloud.len(), cloud.dim(), data))
}

/// Keeps exactly `per_class` labels per class, sampled uniformly without
/// replacement. Returns the partially labeled cloud and the full ground truth,
/// which callers keep away from the classifier and use only for scoring.
pub fn mask_labels(
    cloud: &LabeledPointCloud,
    per_class: usize,
    seed: u64,
) -> Result<(PartiallyLabeledCloud, Vec<usize>)> {
    if per_class == 0 {
        return Err(Error::invalid("per_class must be at least 1"));
    }
    let mut rng = seed::rng(seed);
    let mut labels = vec![None; cloud.len()];
    for class in 0..cloud.num_classes() {
        let members: Vec<usize> = (0..cloud.len())
            .filter(|&i| cloud.labels()[i] == class)
            .collect();
        if members.len() < per_class {
            return Err(Error::invalid(format!(
                "class {class} has {} members, fewer than per_class={per_class}",
                members.len()
            )));
        }
        for pick in index::sample(&mut rng, members.len(), per_class) {
            labels[members[pick]] = Some(class);
        }
    }
    let partial =
        PartiallyLabeledCloud::new(cloud.cloud().clone(), labels, cloud.num_classes())?;
    Ok((partial, cloud.labels().to_vec()))
}

fn column_ranges(clouds: &[&PointCloud]) -> Vec<(f64, f64)> {
    let d = clouds[0].dim();
    let mut ranges = vec![(f64::INFINITY, f64::NEG_INFINITY); d];
    for cloud in clouds {
        for p in cloud.points() {
            for (r, &v) in ranges.iter_mut().zip(p) {
                r.0 = r.0.min(v);
                r.1 = r.1.max(v);
            }
        }
    }
    ranges
}

fn apply_ranges(cloud: &PointCloud, ranges: &[(f64, f64)]) -> PointCloud {
    let mut out = cloud.features().clone();
    for i in 0..out.nrows() {
        for (v, &(lo, hi)) in out.row_mut(i).iter_mut().zip(ranges) {
            let span = hi - lo;
            *v = if span > 0.0 {
                ((*v - lo) / span).clamp(0.0, 1.0)
            } else {
                0.0
            };
        }
    }
    PointCloud::from_matrix_unchecked(out)
}

/// Per-feature affine map onto `[0, 1]`; constant features map to 0.
pub fn minmax_scale(cloud: &PointCloud) -> PointCloud {
    apply_ranges(cloud, &column_ranges(&[cloud]))
}

/// Scales several clouds with one shared per-feature range.
pub fn minmax_scale_joint(clouds: &[&PointCloud]) -> Result<Vec<PointCloud>> {
    let Some(first) = clouds.first() else {
        return Ok(Vec::new());
    };
    if let Some(bad) = clouds.iter().find(|c| c.dim() != first.dim()) {
        return Err(Error::mismatch(
            format!("d={}", first.dim()),
            format!("d={}", bad.dim()),
        ));
    }
    let ranges = column_ranges(clouds);
    Ok(clouds.iter().map(|c| apply_ranges(c, &ranges)).collect())
}

/// Row indices of a class-stratified sample of size `n`, ascending.
///
/// Class quotas are proportional to class sizes (largest remainder, ties to
/// the lower class id), so each class is within one row of its exact share.
pub fn subsample_indices(labels: &[usize], n: usize, seed: u64) -> Result<Vec<usize>> {
    let total = labels.len();
    if n > total {
        return Err(Error::invalid(format!(
            "cannot subsample {n} rows from {total}"
        )));
    }
    if n == total {
        return Ok((0..total).collect());
    }
    let classes = labels.iter().max().map_or(0, |m| m + 1);
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); classes];
    for (i, &l) in labels.iter().enumerate() {
        members[l].push(i);
    }
    let mut quota: Vec<usize> = members.iter().map(|m| m.len() * n / total).collect();
    let assigned: usize = quota.iter().sum();
    // largest fractional part first
    let mut order: Vec<usize> = (0..classes).collect();
    order.sort_by_key(|&c| (std::cmp::Reverse((members[c].len() * n) % total), c));
    for &c in order.iter().take(n - assigned) {
        quota[c] += 1;
    }

    let mut rng = seed::rng(seed);
    let mut picked = Vec::with_capacity(n);
    for (class_members, &q) in members.iter().zip(&quota) {
        for pick in index::sample(&mut rng, class_members.len(), q) {
            picked.push(class_members[pick]);
        }
    }
    picked.sort_unstable();
    Ok(picked)
}

/// Class-stratified subsample of `n` rows, kept in original order.
pub fn subsample(cloud: &LabeledPointCloud, n: usize, seed: u64) -> Result<LabeledPointCloud> {
    let rows = subsample_indices(cloud.labels(), n, seed)?;
    let labels: Vec<usize> = rows.iter().map(|&i| cloud.labels()[i]).collect();
    let sub = cloud.cloud().select(&rows);
    if labels.is_empty() {
        return Err(Error::invalid("subsample of size 0"));
    }
    // relabel in case a tiny sample dropped a class entirely
    let mut present: Vec<usize> = labels.clone();
    present.sort_unstable();
    present.dedup();
    let labels = if present.len() == cloud.num_classes() {
        labels
    } else {
        labels
            .iter()
            .map(|l| present.binary_search(l).expect("present"))
            .collect()
    };
    LabeledPointCloud::new(sub, labels)
}
