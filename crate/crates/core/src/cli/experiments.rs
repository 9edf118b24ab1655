//! `figure1` and `tables`.

use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

use rayon::prelude::*;

use super::{Figure1Args, GateSetting, GlobalArgs, Suite, TablesArgs};
use crate::baselines::{baseline_distance, MeasureKind};
use crate::datasets::{load_csv, LabelColumn, NoiseSpec};
use crate::error::{Error, Result};
use crate::graphs::{adjacency, knn_graph};
use crate::similarity::manifold_distance;
use crate::stats::{mean, sample_std};
use crate::transfer::{
    gate_distances, iteration_pair, run_experiment_with_distances, DatasetSource, DatasetSpec,
    TransferConfig,
};

const DEFAULT_N: usize = 1000;
const DEFAULT_ITERATIONS: usize = 20;
const QUICK_N: usize = 300;
const QUICK_ITERATIONS: usize = 5;
const DEFAULT_K: usize = 10;
const CALIBRATION_LEVEL: u8 = 2;

/// UCI files expected in the data directory: (dataset name, file name).
pub const REAL_DATA_FILES: [(&str, &str); 3] = [
    ("banknotes", "data_banknote_authentication.txt"),
    ("pendigits", "pendigits.tra"),
    ("satlog", "sat.trn"),
];

fn sizes(g: &GlobalArgs, n: Option<usize>, iterations: Option<usize>) -> (usize, usize) {
    let (dn, di) = if g.quick {
        (QUICK_N, QUICK_ITERATIONS)
    } else {
        (DEFAULT_N, DEFAULT_ITERATIONS)
    };
    (n.unwrap_or(dn), iterations.unwrap_or(di))
}

fn check_levels(levels: &[u8]) -> Result<()> {
    for &l in levels {
        NoiseSpec::level(l)?;
    }
    if levels.is_empty() {
        return Err(Error::invalid("levels: at least one noise level is required"));
    }
    Ok(())
}

pub(crate) fn transfer_config(g: &GlobalArgs, dt: f64) -> TransferConfig {
    TransferConfig {
        k: g.k.unwrap_or(DEFAULT_K),
        classify_k: None,
        t: g.t.0,
        dt,
        variant: g.variant,
        symmetrize: g.symmetrize,
        joint_scale: g.joint_scale,
    }
}

const MEASURES: [&str; 6] = ["ours", "cosine", "rbf", "procrustes", "wasserstein", "hausdorff"];

pub fn figure1(g: &GlobalArgs, a: &Figure1Args) -> Result<String> {
    check_levels(&a.levels)?;
    let (n, iterations) = sizes(g, a.n, a.iterations);
    if iterations == 0 {
        return Err(Error::invalid("iterations must be at least 1"));
    }
    let spec = DatasetSpec {
        source: DatasetSource::SwissRoll { classes: a.classes },
        n,
    };
    let k = g.k.unwrap_or(DEFAULT_K);
    let jobs: Vec<(u8, usize)> = a
        .levels
        .iter()
        .flat_map(|&l| (0..iterations).map(move |i| (l, i)))
        .collect();
    let values: Vec<[f64; 6]> = jobs
        .par_iter()
        .map(|&(level, i)| {
            let (target, source) = iteration_pair(&spec, level, g.seed, i)?;
            let (x1, x2) = (target.cloud(), source.cloud());
            let a1 = adjacency(&knn_graph(x1, k, g.symmetrize)?);
            let a2 = adjacency(&knn_graph(x2, k, g.symmetrize)?);
            let mut row = [0.0; 6];
            row[0] = manifold_distance(&a1, &a2, g.t.0, g.variant)?.distance;
            for (slot, kind) in row[1..].iter_mut().zip(MeasureKind::ALL) {
                *slot = baseline_distance(kind, x1, x2)?;
            }
            Ok(row)
        })
        .collect::<Result<_>>()?;

    let mut out = String::from("noise_level,sigma,measure,mean_distance,std\n");
    for (li, &level) in a.levels.iter().enumerate() {
        let block = &values[li * iterations..(li + 1) * iterations];
        for (m, name) in MEASURES.iter().enumerate() {
            let xs: Vec<f64> = block.iter().map(|r| r[m]).collect();
            writeln!(
                out,
                "{level},{},{name},{:.9},{:.9}",
                NoiseSpec::SIGMAS[level as usize],
                mean(&xs),
                sample_std(&xs)
            )
            .expect("string write");
        }
    }
    Ok(out)
}

/// One cell of the accuracy grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub dataset: String,
    pub per_class: usize,
    pub noise_level: u8,
    pub sigma: f64,
    pub mean_acc_no_tl: f64,
    pub mean_acc_tl: f64,
    pub measured_distance: f64,
    pub gated_fraction: f64,
    pub iterations: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExperimentReport {
    pub rows: Vec<ReportRow>,
}

impl ExperimentReport {
    pub const CSV_HEADER: &'static str = "dataset,per_class,noise_level,sigma,mean_acc_no_tl,mean_acc_tl,measured_distance,gated_fraction,iterations,seed";

    pub fn to_csv(&self) -> String {
        let mut out = format!("{}\n", Self::CSV_HEADER);
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{:.6},{:.6},{:.6},{:.4},{},{}",
                r.dataset,
                r.per_class,
                r.noise_level,
                r.sigma,
                r.mean_acc_no_tl,
                r.mean_acc_tl,
                r.measured_distance,
                r.gated_fraction,
                r.iterations,
                r.seed
            )
            .expect("string write");
        }
        out
    }

    /// One Markdown table per dataset, accuracies in percent.
    pub fn to_markdown(&self) -> String {
        let mut out = String::new();
        let mut current: Option<&str> = None;
        for r in &self.rows {
            if current != Some(r.dataset.as_str()) {
                if current.is_some() {
                    out.push('\n');
                }
                current = Some(&r.dataset);
                writeln!(out, "### {}\n", r.dataset).expect("string write");
                out.push_str("| Labels/class | Noise | σ | Acc. no TL (%) | Acc. TL (%) | Distance | Gated |\n");
                out.push_str("|---:|---:|---:|---:|---:|---:|---:|\n");
            }
            writeln!(
                out,
                "| {} | {} | {} | {:.1} | {:.1} | {:.3} | {:.2} |",
                r.per_class,
                r.noise_level,
                r.sigma,
                100.0 * r.mean_acc_no_tl,
                100.0 * r.mean_acc_tl,
                r.measured_distance,
                r.gated_fraction
            )
            .expect("string write");
        }
        out
    }
}

fn synthetic_specs(n: usize, classes: usize) -> Vec<DatasetSpec> {
    vec![
        DatasetSpec {
            source: DatasetSource::SwissRoll { classes },
            n,
        },
        DatasetSpec {
            source: DatasetSource::SCurve { classes },
            n,
        },
        DatasetSpec {
            source: DatasetSource::Moons,
            n,
        },
    ]
}

fn real_specs(dir: Option<&Path>, n: usize) -> Result<Vec<DatasetSpec>> {
    let Some(dir) = dir else {
        let names: Vec<&str> = REAL_DATA_FILES.iter().map(|f| f.1).collect();
        return Err(Error::invalid(format!(
            "real-data tables need --data-dir (or MANIFOLDWALK_DATA_DIR) containing {}",
            names.join(", ")
        )));
    };
    let missing: Vec<String> = REAL_DATA_FILES
        .iter()
        .map(|(_, f)| dir.join(f))
        .filter(|p| !p.is_file())
        .map(|p| p.display().to_string())
        .collect();
    if !missing.is_empty() {
        return Err(Error::invalid(format!(
            "missing data files: {}",
            missing.join(", ")
        )));
    }
    REAL_DATA_FILES
        .iter()
        .map(|(name, file)| {
            let data = load_csv(dir.join(file), &LabelColumn::Last)?;
            Ok(DatasetSpec {
                n: n.min(data.len()),
                source: DatasetSource::Table {
                    name: name.to_string(),
                    data: Arc::new(data),
                },
            })
        })
        .collect()
}

pub fn tables(g: &GlobalArgs, a: &TablesArgs) -> Result<ExperimentReport> {
    check_levels(&a.levels)?;
    let (n, iterations) = sizes(g, a.n, a.iterations);
    if iterations == 0 {
        return Err(Error::invalid("iterations must be at least 1"));
    }
    if a.per_class.is_empty() || a.per_class.contains(&0) {
        return Err(Error::invalid("per-class: need one or more counts >= 1"));
    }
    let mut specs = Vec::new();
    if matches!(a.suite, Suite::Synthetic | Suite::All) {
        specs.extend(synthetic_specs(n, a.classes));
    }
    if matches!(a.suite, Suite::Real | Suite::All) {
        specs.extend(real_specs(g.data_dir.as_deref(), n)?);
    }

    let probe = transfer_config(g, f64::INFINITY);
    probe.validate()?;
    let mut report = ExperimentReport::default();
    for spec in &specs {
        let distances: Vec<Vec<f64>> = a
            .levels
            .iter()
            .map(|&l| gate_distances(spec, l, iterations, &probe, g.seed))
            .collect::<Result<_>>()?;
        let dt = match g.dt {
            GateSetting::Fixed(d) => d,
            GateSetting::Calibrate => {
                let level2 = match a.levels.iter().position(|&l| l == CALIBRATION_LEVEL) {
                    Some(i) => distances[i].clone(),
                    None => gate_distances(spec, CALIBRATION_LEVEL, iterations, &probe, g.seed)?,
                };
                level2.into_iter().fold(0.0, f64::max)
            }
        };
        let cfg = transfer_config(g, dt);
        for &per_class in &a.per_class {
            for (li, &level) in a.levels.iter().enumerate() {
                let r = run_experiment_with_distances(
                    spec,
                    per_class,
                    level,
                    iterations,
                    &cfg,
                    g.seed,
                    Some(&distances[li]),
                )?;
                report.rows.push(ReportRow {
                    dataset: spec.name().to_string(),
                    per_class,
                    noise_level: level,
                    sigma: NoiseSpec::SIGMAS[level as usize],
                    mean_acc_no_tl: r.without_tl.mean_accuracy,
                    mean_acc_tl: r.with_tl.mean_accuracy,
                    measured_distance: r.mean_distance(),
                    gated_fraction: r.gated_fraction(),
                    iterations,
                    seed: g.seed,
                });
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(dataset: &str, acc: f64) -> ReportRow {
        ReportRow {
            dataset: dataset.into(),
            per_class: 10,
            noise_level: 1,
            sigma: 0.078,
            mean_acc_no_tl: 0.5,
            mean_acc_tl: acc,
            measured_distance: 1.5,
            gated_fraction: 0.0,
            iterations: 20,
            seed: 42,
        }
    }

    #[test]
    fn csv_and_markdown_share_rows() {
        let report = ExperimentReport {
            rows: vec![row("a", 0.9), row("a", 0.8), row("b", 0.7)],
        };
        let csv = report.to_csv();
        assert_eq!(csv.lines().count(), 4);
        assert!(csv.lines().nth(1).unwrap().starts_with("a,10,1,0.078,0.500000,0.900000,"));
        let md = report.to_markdown();
        assert_eq!(md.matches("### ").count(), 2);
        assert!(md.contains("| 10 | 1 | 0.078 | 50.0 | 90.0 | 1.500 | 0.00 |"));
    }

    #[test]
    fn missing_real_files_are_listed() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("pendigits.tra"), "1,0\n").unwrap();
        let err = real_specs(Some(dir.path()), 100).unwrap_err().to_string();
        assert!(err.contains("data_banknote_authentication.txt"));
        assert!(err.contains("sat.trn"));
        assert!(!err.contains("pendigits"));
    }
}
