use std::f64::consts::PI;

use rand::seq::SliceRandom;
use rand::Rng as _;

use super::{LabeledPointCloud, PointCloud};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::seed;

/// Stratified draws on `[lo, hi]`: stratum `perm[i]` of `n` equal strata for
/// row `i`, with a uniform offset inside the stratum. Rows come out in random
/// order but every stratum is hit exactly once.
fn stratified(n: usize, lo: f64, hi: f64, rng: &mut seed::Rng) -> Vec<f64> {
    let mut strata: Vec<usize> = (0..n).collect();
    strata.shuffle(rng);
    strata
        .into_iter()
        .map(|s| {
            let frac = (s as f64 + rng.random::<f64>()) / n as f64;
            lo + frac.min(1.0) * (hi - lo)
        })
        .collect()
}

fn quantize(u: f64, lo: f64, hi: f64, classes: usize) -> usize {
    let bin = (classes as f64 * (u - lo) / (hi - lo)).floor();
    (bin.max(0.0) as usize).min(classes - 1)
}

fn check_counts(n: usize, classes: usize) -> Result<()> {
    if classes < 2 {
        return Err(Error::invalid(format!("need at least 2 classes, got {classes}")));
    }
    if n < classes {
        return Err(Error::invalid(format!(
            "n={n} is smaller than classes={classes}"
        )));
    }
    Ok(())
}

fn labeled(rows: Vec<f64>, n: usize, d: usize, labels: Vec<usize>) -> LabeledPointCloud {
    let cloud = PointCloud::from_matrix_unchecked(Matrix::from_row_major(n, d, rows));
    LabeledPointCloud::new(cloud, labels).expect("generator covers every class")
}

/// 3-D Swiss roll: `(u cos u, h, u sin u)` with `u` on `[1.5pi, 4.5pi]` and
/// `h` on `[0, 21]`. Classes are equal-width bins of `u`.
pub fn gen_swiss_roll(n: usize, classes: usize, seed: u64) -> Result<LabeledPointCloud> {
    check_counts(n, classes)?;
    let (lo, hi) = (1.5 * PI, 4.5 * PI);
    let mut rng = seed::rng(seed);
    let us = stratified(n, lo, hi, &mut rng);
    let mut rows = Vec::with_capacity(n * 3);
    let mut labels = Vec::with_capacity(n);
    for u in us {
        let h = 21.0 * rng.random::<f64>();
        rows.extend_from_slice(&[u * u.cos(), h, u * u.sin()]);
        labels.push(quantize(u, lo, hi, classes));
    }
    Ok(labeled(rows, n, 3, labels))
}

/// 3-D S curve: `(sin u, h, sign(u)(cos u - 1))` with `u` on
/// `[-1.5pi, 1.5pi]` and `h` on `[0, 2]`. Classes are equal-width bins of `u`.
pub fn gen_s_curve(n: usize, classes: usize, seed: u64) -> Result<LabeledPointCloud> {
    check_counts(n, classes)?;
    let (lo, hi) = (-1.5 * PI, 1.5 * PI);
    let mut rng = seed::rng(seed);
    let us = stratified(n, lo, hi, &mut rng);
    let mut rows = Vec::with_capacity(n * 3);
    let mut labels = Vec::with_capacity(n);
    for u in us {
        let h = 2.0 * rng.random::<f64>();
        // f64::signum(0.0) is 1, the formula wants sign(0) = 0
        let sign = if u == 0.0 { 0.0 } else { u.signum() };
        rows.extend_from_slice(&[u.sin(), h, sign * (u.cos() - 1.0)]);
        labels.push(quantize(u, lo, hi, classes));
    }
    Ok(labeled(rows, n, 3, labels))
}

/// Two interleaving half circles. Class 0 is the upper arc `(cos t, sin t)`,
/// class 1 the lower arc `(1 - cos t, 0.5 - sin t)`, `t` uniform on `[0, pi]`.
/// Class sizes are `ceil(n/2)` and `floor(n/2)`; rows are shuffled.
pub fn gen_moons(n: usize, seed: u64) -> Result<LabeledPointCloud> {
    if n < 2 {
        return Err(Error::invalid(format!("moons need n >= 2, got {n}")));
    }
    let mut rng = seed::rng(seed);
    let upper = n.div_ceil(2);
    let mut labels: Vec<usize> = (0..n).map(|i| usize::from(i >= upper)).collect();
    labels.shuffle(&mut rng);
    let mut rows = Vec::with_capacity(n * 2);
    for &class in &labels {
        let t = PI * rng.random::<f64>();
        if class == 0 {
            rows.extend_from_slice(&[t.cos(), t.sin()]);
        } else {
            rows.extend_from_slice(&[1.0 - t.cos(), 0.5 - t.sin()]);
        }
    }
    Ok(labeled(rows, n, 2, labels))
}
