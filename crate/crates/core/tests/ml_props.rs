use mer_core::ml::*;
use mer_core::seed;
use proptest::prelude::*;
use rand::Rng;
use rand_distr::StandardNormal;

/// Two Gaussian classes in `d` dimensions with means at -shift and +shift on
/// the first coordinate; remaining coordinates are noise.
fn blobs(n: usize, d: usize, shift: f64, seed_value: u64) -> Dataset {
    let mut rng = seed::rng(seed_value);
    let mut features = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let y = i % 2 == 0;
        let mut row: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        row[0] += if y { shift } else { -shift };
        features.push(row);
        labels.push(y);
    }
    Dataset::new(features, labels, vec![String::new(); n], (0..n).collect()).unwrap()
}

fn accuracy(model: &TrainedModel, data: &Dataset) -> f64 {
    let p = model.predict(&data.features).unwrap();
    p.iter().zip(&data.labels).filter(|(a, b)| a == b).count() as f64 / data.len() as f64
}

#[test]
fn naive_bayes_boundary_is_midpoint() {
    let train_set = blobs(4000, 1, 1.0, 1);
    let m = train(&ModelSpec::new(ModelKind::GaussianNb, 0), &train_set).unwrap();
    let grid: Vec<Vec<f64>> = (-300..=300).map(|i| vec![i as f64 / 100.0]).collect();
    let p = m.predict_proba(&grid).unwrap();
    let crossing = grid
        .iter()
        .zip(p.windows(2))
        .find(|(_, w)| w[0] <= 0.5 && w[1] > 0.5)
        .map(|(x, _)| x[0])
        .expect("probability crosses one half");
    assert!(crossing.abs() < 0.3, "boundary at {crossing}");
    assert!(p[0] < 0.05 && p[p.len() - 1] > 0.95);
}

#[test]
fn ensembles_beat_their_member_trees() {
    let train_set = blobs(600, 6, 0.8, 2);
    let test_set = blobs(2000, 6, 0.8, 3);
    for kind in [ModelKind::RandomForest, ModelKind::ExtraTrees] {
        let spec = ModelSpec::new(kind, 5);
        let forest = train(&spec, &train_set).unwrap();
        let Model::Forest(trees) = &forest.model else {
            panic!("{kind} is not a forest");
        };
        let member_acc: f64 = trees
            .iter()
            .map(|t| {
                test_set
                    .features
                    .iter()
                    .zip(&test_set.labels)
                    .filter(|(r, &l)| t.vote(r) == l)
                    .count() as f64
                    / test_set.len() as f64
            })
            .sum::<f64>()
            / trees.len() as f64;
        let acc = accuracy(&forest, &test_set);
        assert!(acc > member_acc + 0.03, "{kind}: forest {acc} vs mean member {member_acc}");
        // Bayes rate for this problem is about 0.79.
        assert!(acc > 0.72, "{kind}: {acc}");
    }
}

#[test]
fn every_kind_learns_a_clear_problem() {
    let train_set = blobs(400, 4, 2.0, 4);
    let test_set = blobs(400, 4, 2.0, 5);
    for kind in ModelKind::ALL {
        let m = train(&ModelSpec::new(kind, 1), &train_set).unwrap();
        let acc = accuracy(&m, &test_set);
        assert!(acc > 0.93, "{kind}: {acc}");
    }
}

#[test]
fn training_is_deterministic_across_thread_counts() {
    let data = blobs(300, 5, 0.7, 6);
    let fit = |threads: usize, kind: ModelKind| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| train(&ModelSpec::new(kind, 9), &data).unwrap())
    };
    for kind in [ModelKind::RandomForest, ModelKind::ExtraTrees] {
        let a = fit(1, kind);
        let b = fit(3, kind);
        assert_eq!(a, b, "{kind}");
    }
}

#[test]
fn saved_models_predict_identically() {
    let data = blobs(200, 3, 1.0, 7);
    let dir = tempfile::tempdir().unwrap();
    for kind in ModelKind::ALL {
        let m = train(&ModelSpec::new(kind, 2), &data).unwrap();
        let path = dir.path().join(format!("{kind}.json"));
        m.save(&path).unwrap();
        let back = TrainedModel::load(&path).unwrap();
        assert_eq!(
            m.predict_proba(&data.features).unwrap(),
            back.predict_proba(&data.features).unwrap(),
            "{kind}"
        );
    }
    std::fs::write(dir.path().join("bad.json"), "{\"format\":\"other\"}").unwrap();
    assert!(TrainedModel::load(&dir.path().join("bad.json")).is_err());
}

#[test]
fn knn_ignores_feature_scale() {
    let data = blobs(300, 3, 1.0, 8);
    let mut scaled = data.clone();
    for r in &mut scaled.features {
        r[1] *= 1000.0;
        r[2] = r[2] * 1e-3 + 50.0;
    }
    let spec = ModelSpec::new(ModelKind::Knn, 0);
    let a = train(&spec, &data).unwrap().predict_proba(&data.features).unwrap();
    let b = train(&spec, &scaled).unwrap().predict_proba(&scaled.features).unwrap();
    assert_eq!(a, b);
}

#[test]
fn stratified_folds_balance_classes() {
    let labels: Vec<bool> = (0..537).map(|i| i % 4 == 0).collect();
    let pos = labels.iter().filter(|&&l| l).count();
    let folds = stratified_kfold(&labels, 10, 3).unwrap();
    assert_eq!(folds, stratified_kfold(&labels, 10, 3).unwrap());
    let mut sizes = [0usize; 10];
    let mut pos_per = [0usize; 10];
    for (i, &f) in folds.iter().enumerate() {
        sizes[f] += 1;
        pos_per[f] += labels[i] as usize;
    }
    let (lo, hi) = (sizes.iter().min().unwrap(), sizes.iter().max().unwrap());
    assert!(hi - lo <= 1, "{sizes:?}");
    for p in pos_per {
        assert!((p as f64 - pos as f64 / 10.0).abs() < 1.0, "{pos_per:?}");
    }
}

#[test]
fn single_class_training_is_rejected() {
    let mut data = blobs(20, 2, 1.0, 0);
    data.labels = vec![true; 20];
    for kind in ModelKind::ALL {
        assert!(matches!(train(&ModelSpec::new(kind, 0), &data), Err(MlError::SingleClass)), "{kind}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn auc_invariant_under_monotone_maps(
        pairs in prop::collection::vec((any::<bool>(), -50.0f64..50.0), 2..80),
    ) {
        let labels: Vec<bool> = pairs.iter().map(|p| p.0).collect();
        let scores: Vec<f64> = pairs.iter().map(|p| p.1).collect();
        let base = roc_auc(&labels, &scores);
        let cubed: Vec<f64> = scores.iter().map(|s| s.powi(3) + 7.0).collect();
        let squashed: Vec<f64> = scores.iter().map(|s| 1.0 / (1.0 + (-s / 10.0).exp())).collect();
        prop_assert_eq!(base, roc_auc(&labels, &cubed));
        prop_assert_eq!(base, roc_auc(&labels, &squashed));
        if let Some(a) = base {
            let flipped: Vec<f64> = scores.iter().map(|s| -s).collect();
            let b = roc_auc(&labels, &flipped).unwrap();
            prop_assert!((a + b - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn auc_equals_pair_count(
        pairs in prop::collection::vec((any::<bool>(), 0u8..6), 2..60),
    ) {
        let labels: Vec<bool> = pairs.iter().map(|p| p.0).collect();
        let scores: Vec<f64> = pairs.iter().map(|p| p.1 as f64).collect();
        let (mut wins, mut n) = (0.0, 0.0);
        for (i, &li) in labels.iter().enumerate() {
            for (j, &lj) in labels.iter().enumerate() {
                if li && !lj {
                    n += 1.0;
                    wins += if scores[i] > scores[j] { 1.0 } else if scores[i] == scores[j] { 0.5 } else { 0.0 };
                }
            }
        }
        let got = roc_auc(&labels, &scores);
        if n == 0.0 {
            prop_assert!(got.is_none());
        } else {
            prop_assert!((got.unwrap() - wins / n).abs() < 1e-12);
        }
    }
}
