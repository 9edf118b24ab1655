//! Similarity-gated transfer learning with a k-neighbours classifier whose
//! metric is the distance between random-walk embeddings.
//!
//! The pipeline for a sparsely labeled target and a fully labeled source of
//! the same size:
//!
//! 1. build k-NN graphs of both clouds and measure their manifold distance;
//!    above the threshold `dt` nothing is transferred;
//! 2. min-max scale both clouds (per cloud by default);
//! 3. build one k-NN graph over source rows followed by target rows, so label
//!    information can cross between the datasets;
//! 4. compute its walk matrix;
//! 5. give every unlabeled target row the majority class among its `k`
//!    nearest training rows (all source rows plus the labeled target rows)
//!    under the embedding distance.
//!
//! Classification is transductive: unlabeled rows take part in the graph.

use std::sync::Arc;

use rayon::prelude::*;

use crate::datasets::{
    add_noise, gen_moons, gen_s_curve, gen_swiss_roll, mask_labels, minmax_scale,
    minmax_scale_joint, subsample, LabeledPointCloud, NoiseSpec, PartiallyLabeledCloud,
    PointCloud,
};
use crate::error::{Error, Result};
use crate::graphs::{adjacency, knn_graph, max_stable_t, nearest_k};
use crate::matrix::Matrix;
use crate::seed::{derive_seed, label_id};
use crate::similarity::{
    manifold_distance, point_distances, walk_matrix, Variant, DEFAULT_SAFETY,
};

#[derive(Debug, Clone, PartialEq)]
pub struct TransferConfig {
    /// Neighbour count of every k-NN graph.
    pub k: usize,
    /// Neighbour count of the vote; `None` shares `k`.
    pub classify_k: Option<usize>,
    /// Walk parameter; `None` picks `0.9 / rho` per graph pair.
    pub t: Option<f64>,
    /// Largest manifold distance at which transfer is attempted.
    pub dt: f64,
    pub variant: Variant,
    pub symmetrize: bool,
    /// Scale source and target with one shared range instead of separately.
    pub joint_scale: bool,
}

impl Default for TransferConfig {
    fn default() -> Self {
        TransferConfig {
            k: 10,
            classify_k: None,
            t: None,
            dt: f64::INFINITY,
            variant: Variant::Rows,
            symmetrize: false,
            joint_scale: false,
        }
    }
}

impl TransferConfig {
    pub fn vote_k(&self) -> usize {
        self.classify_k.unwrap_or(self.k)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 || self.vote_k() == 0 {
            return Err(Error::invalid("k must be at least 1"));
        }
        if self.dt.is_nan() || self.dt < 0.0 {
            return Err(Error::invalid(format!("dt must be >= 0, got {}", self.dt)));
        }
        if let Some(t) = self.t {
            if !(t.is_finite() && t >= 0.0) {
                return Err(Error::invalid(format!("t must be finite and >= 0, got {t}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransferOutcome {
    /// True when the measured distance exceeded `dt` and nothing was
    /// transferred.
    pub gated: bool,
    /// One class id per unlabeled target row (in row order); `None` iff gated.
    pub predictions: Option<Vec<usize>>,
    /// Target rows the predictions refer to.
    pub unlabeled_rows: Vec<usize>,
    pub measured_distance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AccuracyReport {
    pub mean_accuracy: f64,
    pub per_iteration: Vec<f64>,
}

impl AccuracyReport {
    pub fn from_iterations(per_iteration: Vec<f64>) -> Self {
        // summed in iteration order so the mean does not depend on scheduling
        let mean_accuracy = if per_iteration.is_empty() {
            0.0
        } else {
            per_iteration.iter().sum::<f64>() / per_iteration.len() as f64
        };
        AccuracyReport {
            mean_accuracy,
            per_iteration,
        }
    }

    pub fn iterations(&self) -> usize {
        self.per_iteration.len()
    }
}

fn check_pair(target: &PointCloud, source: &PointCloud) -> Result<()> {
    if target.dim() != source.dim() {
        return Err(Error::mismatch(
            format!("target d={}", target.dim()),
            format!("source d={}", source.dim()),
        ));
    }
    if target.len() != source.len() {
        return Err(Error::mismatch(
            format!("target n={}", target.len()),
            format!("source n={}", source.len()),
        ));
    }
    Ok(())
}

/// Manifold distance between the k-NN graphs of two equally sized clouds.
pub fn gate_distance(target: &PointCloud, source: &PointCloud, cfg: &TransferConfig) -> Result<f64> {
    check_pair(target, source)?;
    let a_target = adjacency(&knn_graph(target, cfg.k, cfg.symmetrize)?);
    let a_source = adjacency(&knn_graph(source, cfg.k, cfg.symmetrize)?);
    Ok(manifold_distance(&a_target, &a_source, cfg.t, cfg.variant)?.distance)
}

/// Majority class among `neighbors`; ties go to the lowest class id.
fn vote(neighbors: impl Iterator<Item = usize>, num_classes: usize) -> usize {
    let mut counts = vec![0usize; num_classes];
    for class in neighbors {
        counts[class] += 1;
    }
    let best = counts.iter().copied().max().unwrap_or(0);
    counts.iter().position(|&c| c == best).unwrap_or(0)
}

/// The transfer classifier without the gate.
/// Returns one class id per unlabeled target row.
pub fn classify_with_transfer(
    target: &PartiallyLabeledCloud,
    source: &LabeledPointCloud,
    cfg: &TransferConfig,
) -> Result<Vec<usize>> {
    cfg.validate()?;
    if target.cloud().dim() != source.cloud().dim() {
        return Err(Error::mismatch(
            format!("target d={}", target.cloud().dim()),
            format!("source d={}", source.cloud().dim()),
        ));
    }
    let unlabeled = target.unlabeled_indices();
    if unlabeled.is_empty() {
        return Ok(Vec::new());
    }
    let (scaled_source, scaled_target) = if cfg.joint_scale {
        let mut both = minmax_scale_joint(&[source.cloud(), target.cloud()])?;
        let t = both.pop().expect("two clouds");
        (both.pop().expect("two clouds"), t)
    } else {
        (minmax_scale(source.cloud()), minmax_scale(target.cloud()))
    };
    let union = scaled_source.concat(&scaled_target)?;
    let offset = source.len();

    let mut train_rows: Vec<usize> = (0..offset).collect();
    let mut train_labels: Vec<usize> = source.labels().to_vec();
    for i in target.labeled_indices() {
        train_rows.push(offset + i);
        train_labels.push(target.labels()[i].expect("labeled row"));
    }
    if train_rows.is_empty() {
        return Err(Error::EmptyTrainingSet("no source rows and no target labels".into()));
    }
    let num_classes = train_labels.iter().max().map_or(0, |m| m + 1).max(target.num_classes());

    let adj = adjacency(&knn_graph(&union, cfg.k, cfg.symmetrize)?);
    let t = match cfg.t {
        Some(t) => t,
        None => max_stable_t(&adj, &adj, DEFAULT_SAFETY)?,
    };
    let walk = walk_matrix(&adj, t)?;
    let queries: Vec<usize> = unlabeled.iter().map(|&i| offset + i).collect();
    let dist = point_distances(&walk, &queries, &train_rows, cfg.variant)?;

    let k = cfg.vote_k().min(train_rows.len());
    Ok((0..queries.len())
        .map(|q| {
            // train_rows is ascending, so position order is row-index order
            let mut scored: Vec<(f64, usize)> =
                dist.row(q).iter().copied().zip(0..train_rows.len()).collect();
            scored.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            vote(scored.iter().take(k).map(|&(_, p)| train_labels[p]), num_classes)
        })
        .collect())
}

/// The full pipeline: gate on the manifold distance, then classify.
pub fn transfer_classify(
    target: &PartiallyLabeledCloud,
    source: &LabeledPointCloud,
    cfg: &TransferConfig,
) -> Result<TransferOutcome> {
    cfg.validate()?;
    let measured_distance = gate_distance(target.cloud(), source.cloud(), cfg)?;
    let unlabeled_rows = target.unlabeled_indices();
    if measured_distance > cfg.dt {
        return Ok(TransferOutcome {
            gated: true,
            predictions: None,
            unlabeled_rows,
            measured_distance,
        });
    }
    let predictions = classify_with_transfer(target, source, cfg)?;
    Ok(TransferOutcome {
        gated: false,
        predictions: Some(predictions),
        unlabeled_rows,
        measured_distance,
    })
}

/// Plain k-NN on min-max scaled target features, trained on the labeled
/// target rows only. `k` is capped at the number of labeled rows.
pub fn baseline_classify(target: &PartiallyLabeledCloud, k: usize) -> Result<Vec<usize>> {
    if k == 0 {
        return Err(Error::invalid("k must be at least 1"));
    }
    let labeled = target.labeled_indices();
    if labeled.is_empty() {
        return Err(Error::EmptyTrainingSet("target has no labeled rows".into()));
    }
    let scaled = minmax_scale(target.cloud());
    let k = k.min(labeled.len());
    Ok(target
        .unlabeled_indices()
        .into_iter()
        .map(|i| {
            let nearest = nearest_k(scaled.point(i), &scaled, labeled.iter().copied(), k);
            vote(
                nearest.into_iter().map(|j| target.labels()[j].expect("labeled")),
                target.num_classes(),
            )
        })
        .collect())
}

/// Fraction of positions where `predictions` and `truth` agree.
pub fn mean_accuracy(predictions: &[usize], truth: &[usize]) -> Result<f64> {
    if predictions.len() != truth.len() {
        return Err(Error::mismatch(
            format!("{} predictions", predictions.len()),
            format!("{} truth labels", truth.len()),
        ));
    }
    if predictions.is_empty() {
        return Err(Error::invalid("accuracy of an empty prediction set"));
    }
    let hits = predictions.iter().zip(truth).filter(|(p, t)| p == t).count();
    Ok(hits as f64 / predictions.len() as f64)
}

/// Where the rows of an experiment come from.
#[derive(Debug, Clone)]
pub enum DatasetSource {
    SwissRoll { classes: usize },
    SCurve { classes: usize },
    Moons,
    /// A loaded table, subsampled (class-stratified) each iteration.
    Table {
        name: String,
        data: Arc<LabeledPointCloud>,
    },
}

#[derive(Debug, Clone)]
pub struct DatasetSpec {
    pub source: DatasetSource,
    /// Rows per iteration (capped at the table size for tables).
    pub n: usize,
}

impl DatasetSpec {
    pub fn name(&self) -> &str {
        match &self.source {
            DatasetSource::SwissRoll { .. } => "swiss-roll",
            DatasetSource::SCurve { .. } => "s-curve",
            DatasetSource::Moons => "moons",
            DatasetSource::Table { name, .. } => name,
        }
    }

    fn draw(&self, seed: u64) -> Result<LabeledPointCloud> {
        match &self.source {
            DatasetSource::SwissRoll { classes } => gen_swiss_roll(self.n, *classes, seed),
            DatasetSource::SCurve { classes } => gen_s_curve(self.n, *classes, seed),
            DatasetSource::Moons => gen_moons(self.n, seed),
            DatasetSource::Table { data, .. } => subsample(data, self.n.min(data.len()), seed),
        }
    }
}

/// Target (fully labeled, before masking) and noisy source for one
/// iteration. Depends on the dataset, noise level, master seed and iteration
/// only, so every `per_class` setting of a noise level sees the same pair and
/// every noise level sees the same target and noise direction.
pub fn iteration_pair(
    spec: &DatasetSpec,
    noise_level: u8,
    seed: u64,
    iteration: usize,
) -> Result<(LabeledPointCloud, LabeledPointCloud)> {
    let id = label_id(spec.name());
    let target = spec.draw(derive_seed(seed, &[id, iteration as u64, 0]))?;
    let noise = NoiseSpec::level(noise_level)?;
    let noisy = add_noise(
        target.cloud(),
        noise,
        derive_seed(seed, &[id, iteration as u64, 1]),
    );
    let source = target.with_cloud(noisy)?;
    Ok((target, source))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub with_tl: AccuracyReport,
    pub without_tl: AccuracyReport,
    pub distances: Vec<f64>,
    pub gated: Vec<bool>,
}

impl ExperimentResult {
    pub fn mean_distance(&self) -> f64 {
        self.distances.iter().sum::<f64>() / self.distances.len().max(1) as f64
    }

    pub fn gated_fraction(&self) -> f64 {
        self.gated.iter().filter(|&&g| g).count() as f64 / self.gated.len().max(1) as f64
    }
}

/// Gate distances of `iterations` iterations at one noise level.
pub fn gate_distances(
    spec: &DatasetSpec,
    noise_level: u8,
    iterations: usize,
    cfg: &TransferConfig,
    seed: u64,
) -> Result<Vec<f64>> {
    (0..iterations)
        .into_par_iter()
        .map(|i| {
            let (target, source) = iteration_pair(spec, noise_level, seed, i)?;
            gate_distance(target.cloud(), source.cloud(), cfg)
        })
        .collect()
}

/// Runs the with/without transfer comparison over `iterations` seeded
/// iterations. When an iteration is gated, no transfer happens and its
/// with-transfer accuracy is the baseline's.
pub fn run_experiment(
    spec: &DatasetSpec,
    per_class: usize,
    noise_level: u8,
    iterations: usize,
    cfg: &TransferConfig,
    seed: u64,
) -> Result<ExperimentResult> {
    run_experiment_with_distances(spec, per_class, noise_level, iterations, cfg, seed, None)
}

/// [`run_experiment`] reusing gate distances from [`gate_distances`] with the
/// same arguments.
pub fn run_experiment_with_distances(
    spec: &DatasetSpec,
    per_class: usize,
    noise_level: u8,
    iterations: usize,
    cfg: &TransferConfig,
    seed: u64,
    distances: Option<&[f64]>,
) -> Result<ExperimentResult> {
    cfg.validate()?;
    if iterations == 0 {
        return Err(Error::invalid("iterations must be at least 1"));
    }
    if let Some(d) = distances {
        if d.len() != iterations {
            return Err(Error::mismatch(
                format!("{} distances", d.len()),
                format!("{iterations} iterations"),
            ));
        }
    }
    let id = label_id(spec.name());
    let rows: Vec<(f64, f64, f64, bool)> = (0..iterations)
        .into_par_iter()
        .map(|i| {
            let (target_full, source) = iteration_pair(spec, noise_level, seed, i)?;
            let mask_seed = derive_seed(seed, &[id, i as u64, 2, per_class as u64]);
            let (target, truth) = mask_labels(&target_full, per_class, mask_seed)?;
            let unlabeled = target.unlabeled_indices();
            let truth: Vec<usize> = unlabeled.iter().map(|&r| truth[r]).collect();

            let baseline = baseline_classify(&target, cfg.vote_k())?;
            let acc_base = mean_accuracy(&baseline, &truth)?;

            let distance = match distances {
                Some(d) => d[i],
                None => gate_distance(target.cloud(), source.cloud(), cfg)?,
            };
            let gated = distance > cfg.dt;
            let acc_tl = if gated {
                acc_base
            } else {
                mean_accuracy(&classify_with_transfer(&target, &source, cfg)?, &truth)?
            };
            Ok((acc_tl, acc_base, distance, gated))
        })
        .collect::<Result<_>>()?;

    Ok(ExperimentResult {
        with_tl: AccuracyReport::from_iterations(rows.iter().map(|r| r.0).collect()),
        without_tl: AccuracyReport::from_iterations(rows.iter().map(|r| r.1).collect()),
        distances: rows.iter().map(|r| r.2).collect(),
        gated: rows.iter().map(|r| r.3).collect(),
    })
}

/// Dense adjacency export helper for debugging output.
pub fn adjacency_text(cloud: &PointCloud, k: usize, symmetrize: bool) -> Result<String> {
    Ok(adjacency(&knn_graph(cloud, k, symmetrize)?).entries().to_text())
}

#[allow(dead_code)]
fn _assert_send_sync() {
    fn check<T: Send + Sync>() {}
    check::<Matrix>();
    check::<TransferOutcome>();
}
