use manifoldwalk::datasets::{
    gen_moons, gen_swiss_roll, mask_labels, minmax_scale, PartiallyLabeledCloud, PointCloud,
};
use manifoldwalk::transfer::{
    baseline_classify, classify_with_transfer, mean_accuracy, run_experiment, transfer_classify,
    DatasetSource, DatasetSpec, TransferConfig,
};
use manifoldwalk::Error;

/// Euclidean k-NN over explicit training rows; ties in distance go to the
/// earlier training row, ties in votes to the lowest class.
fn euclidean_knn(train: &[(Vec<f64>, usize)], query: &[f64], k: usize, classes: usize) -> usize {
    let mut d: Vec<(f64, usize)> = train
        .iter()
        .enumerate()
        .map(|(i, (p, _))| {
            let s: f64 = p.iter().zip(query).map(|(a, b)| (a - b) * (a - b)).sum();
            (s, i)
        })
        .collect();
    d.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut votes = vec![0; classes];
    for &(_, i) in d.iter().take(k) {
        votes[train[i].1] += 1;
    }
    let best = *votes.iter().max().unwrap();
    votes.iter().position(|&v| v == best).unwrap()
}

fn swiss(classes: usize) -> DatasetSpec {
    DatasetSpec {
        source: DatasetSource::SwissRoll { classes },
        n: 500,
    }
}

#[test]
fn self_copy_agrees_with_euclidean_knn() {
    let full = gen_swiss_roll(500, 4, 21).unwrap();
    let (target, _) = mask_labels(&full, 10, 22).unwrap();
    let cfg = TransferConfig::default();
    let ours = classify_with_transfer(&target, &full, &cfg).unwrap();

    let scaled = minmax_scale(full.cloud());
    let mut train: Vec<(Vec<f64>, usize)> = scaled
        .points()
        .zip(full.labels())
        .map(|(p, &l)| (p.to_vec(), l))
        .collect();
    for i in target.labeled_indices() {
        train.push((scaled.point(i).to_vec(), full.labels()[i]));
    }
    let unlabeled = target.unlabeled_indices();
    let agree = unlabeled
        .iter()
        .zip(&ours)
        .filter(|(&i, &p)| euclidean_knn(&train, scaled.point(i), 10, 4) == p)
        .count();
    let frac = agree as f64 / unlabeled.len() as f64;
    assert!(frac >= 0.95, "agreement {frac}");
}

#[test]
fn moons_leave_one_out() {
    let m = gen_moons(200, 4).unwrap();
    let mut hits = 0;
    for i in 0..m.len() {
        let labels: Vec<Option<usize>> = m
            .labels()
            .iter()
            .enumerate()
            .map(|(j, &l)| (j != i).then_some(l))
            .collect();
        let partial = PartiallyLabeledCloud::new(m.cloud().clone(), labels, 2).unwrap();
        let pred = baseline_classify(&partial, 10).unwrap();
        hits += usize::from(pred == [m.labels()[i]]);
    }
    assert!(hits as f64 / 200.0 > 0.95, "{hits}/200");
}

#[test]
fn baseline_k1_copies_coincident_label() {
    let cloud = PointCloud::from_rows(&[[0.0, 0.0], [0.0, 0.0], [5.0, 5.0], [9.0, 9.0]]).unwrap();
    let partial =
        PartiallyLabeledCloud::new(cloud, vec![Some(1), None, Some(0), Some(0)], 2).unwrap();
    assert_eq!(baseline_classify(&partial, 1).unwrap(), vec![1]);
}

#[test]
fn noiseless_moons_transfer_is_near_perfect() {
    let spec = DatasetSpec {
        source: DatasetSource::Moons,
        n: 500,
    };
    let r = run_experiment(&spec, 10, 0, 5, &TransferConfig::default(), 3).unwrap();
    assert!(r.with_tl.mean_accuracy >= 0.99, "{:?}", r.with_tl);
    assert!(r.distances.iter().all(|&d| d == 0.0));
}

#[test]
fn self_transfer_dominates_baseline() {
    let r = run_experiment(&swiss(4), 10, 0, 20, &TransferConfig::default(), 42).unwrap();
    assert!(
        r.with_tl.mean_accuracy >= r.without_tl.mean_accuracy,
        "{} < {}",
        r.with_tl.mean_accuracy,
        r.without_tl.mean_accuracy
    );
}

#[test]
fn few_labels_on_distorted_roll() {
    // the source is the same roll with level-1 noise and full labels
    let spec = DatasetSpec {
        source: DatasetSource::SwissRoll { classes: 4 },
        n: 1000,
    };
    let r = run_experiment(&spec, 5, 1, 3, &TransferConfig::default(), 42).unwrap();
    assert!(r.with_tl.mean_accuracy >= 0.85, "{:?}", r.with_tl);
}

#[test]
fn gate_soundness() {
    let full = gen_moons(120, 9).unwrap();
    let noisy = manifoldwalk::datasets::add_noise(
        full.cloud(),
        manifoldwalk::datasets::NoiseSpec::level(2).unwrap(),
        4,
    );
    let source = full.with_cloud(noisy).unwrap();
    let (target, _) = mask_labels(&full, 5, 1).unwrap();
    let open = TransferConfig {
        dt: f64::INFINITY,
        ..TransferConfig::default()
    };
    let out = transfer_classify(&target, &source, &open).unwrap();
    let d = out.measured_distance;
    assert!(d > 0.0 && !out.gated);
    let preds = out.predictions.unwrap();
    assert_eq!(preds.len(), out.unlabeled_rows.len());
    assert!(preds.iter().all(|&p| p < 2));

    let at = TransferConfig { dt: d, ..open.clone() };
    assert!(!transfer_classify(&target, &source, &at).unwrap().gated);
    let below = TransferConfig {
        dt: d * (1.0 - 1e-9),
        ..open
    };
    let closed = transfer_classify(&target, &source, &below).unwrap();
    assert!(closed.gated && closed.predictions.is_none());
}

#[test]
fn experiments_are_deterministic() {
    let cfg = TransferConfig {
        dt: 2.0,
        ..TransferConfig::default()
    };
    let a = run_experiment(&swiss(3), 10, 2, 3, &cfg, 5).unwrap();
    let b = run_experiment(&swiss(3), 10, 2, 3, &cfg, 5).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.with_tl.per_iteration.len(), 3);
    let c = run_experiment(&swiss(3), 10, 2, 3, &cfg, 6).unwrap();
    assert_ne!(a.distances, c.distances);
}

#[test]
fn single_iteration_mean_equals_value() {
    let r = run_experiment(&swiss(4), 10, 1, 1, &TransferConfig::default(), 1).unwrap();
    assert_eq!(r.with_tl.per_iteration, vec![r.with_tl.mean_accuracy]);
}

#[test]
fn accuracy_examples() {
    assert_eq!(mean_accuracy(&[0, 1, 1, 0], &[0, 1, 0, 0]).unwrap(), 0.75);
    assert_eq!(mean_accuracy(&[0, 0], &[1, 1]).unwrap(), 0.0);
    assert!(mean_accuracy(&[0], &[0, 1]).is_err());
}

#[test]
fn distinct_error_values() {
    let full = gen_moons(40, 1).unwrap();
    let (target, _) = mask_labels(&full, 2, 1).unwrap();
    let wide = manifoldwalk::datasets::LabeledPointCloud::new(
        PointCloud::from_rows(&vec![[0.0, 0.0, 0.0]; 40]).unwrap(),
        full.labels().to_vec(),
    )
    .unwrap();
    let err = transfer_classify(&target, &wide, &TransferConfig::default()).unwrap_err();
    assert!(matches!(err, Error::DimensionMismatch { .. }), "{err:?}");

    let unlabeled =
        PartiallyLabeledCloud::new(full.cloud().clone(), vec![None; 40], 0).unwrap();
    assert!(matches!(
        baseline_classify(&unlabeled, 3).unwrap_err(),
        Error::EmptyTrainingSet(_)
    ));
    let unstable = TransferConfig {
        t: Some(1.0),
        ..TransferConfig::default()
    };
    let err = classify_with_transfer(&target, &full, &unstable).unwrap_err();
    assert!(err.is_numerical(), "{err:?}");
}
