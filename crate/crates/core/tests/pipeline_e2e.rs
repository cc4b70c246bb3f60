use std::path::{Path, PathBuf};
use std::sync::OnceLock;

use mer_core::features::Domain;
use mer_core::ml::{ModelKind, ModelSpec};
use mer_core::pipeline::{
    self, final_holdout_eval, report, EvalRecord, FeatureGroup, PipelineError, RunConfig, RunOutcome,
};

const K: usize = 5;

fn small_config(out: &Path) -> RunConfig {
    let text = format!(
        r#"
master_seed = 5
output_dir = {out:?}
k_folds = {K}
bootstrap_resamples = 200
[synth]
n_inside = 20
n_outside = 54
duration_s = 5.0
"#
    );
    RunConfig::from_toml(&text, Path::new(".")).unwrap()
}

struct Shared {
    _dir: tempfile::TempDir,
    out: PathBuf,
    config: RunConfig,
    outcome: RunOutcome,
}

/// One full run reused by several tests.
fn shared() -> &'static Shared {
    static RUN: OnceLock<Shared> = OnceLock::new();
    RUN.get_or_init(|| {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("run");
        let config = small_config(&out);
        let outcome = pipeline::run_all(&config).unwrap();
        Shared {
            _dir: dir,
            out,
            config,
            outcome,
        }
    })
}

fn assert_same_outputs(a: &Path, b: &Path) {
    let files = report::deterministic_outputs(a);
    assert_eq!(files.len(), report::DETERMINISTIC_FILES.len(), "missing outputs in {}", a.display());
    for fa in files {
        let rel = fa.strip_prefix(a).unwrap();
        let fb = b.join(rel);
        let (x, y) = (std::fs::read(&fa).unwrap(), std::fs::read(&fb).unwrap());
        assert!(x == y, "{} differs", rel.display());
    }
}

#[test]
fn grid_is_complete() {
    let s = shared();
    assert_eq!(s.outcome.n_eval_records, 7 * 5 * K);
    let records: Vec<EvalRecord> = report::read_eval_records(&s.out).unwrap();
    assert_eq!(records.len(), 7 * 5 * K);
    assert!(s.outcome.summary.windows_total >= 200);
    let ratio = s.outcome.summary.windows_inside as f64 / s.outcome.summary.windows_total as f64;
    assert!((ratio - 0.27).abs() < 0.03, "{ratio}");
    assert!(s.out.join(report::RUN_MANIFEST).exists());
}

#[test]
fn roc_curve_has_both_endpoints() {
    let s = shared();
    let text = std::fs::read_to_string(s.out.join(report::ROC_POINTS)).unwrap();
    let pts: Vec<(f64, f64)> = text
        .lines()
        .skip(1)
        .map(|l| {
            let v: Vec<f64> = l.split(',').map(|x| x.parse().unwrap()).collect();
            (v[0], v[1])
        })
        .collect();
    assert_eq!(pts.first(), Some(&(0.0, 0.0)));
    assert_eq!(pts.last(), Some(&(1.0, 1.0)));
    assert!(pts.windows(2).all(|w| w[1].0 >= w[0].0 && w[1].1 >= w[0].1));
}

#[test]
fn holdout_intervals_bracket_estimates() {
    let h = &shared().outcome.holdout;
    for m in &h.intervals {
        if let Some(ci) = &m.ci {
            assert!(ci.lo <= m.estimate && m.estimate <= ci.hi, "{:?}", m.metric);
        } else {
            assert!(m.undefined);
        }
    }
}

#[test]
fn rerun_is_byte_identical_across_thread_counts() {
    let s = shared();
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let config = small_config(&out);
    let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
    pool.install(|| pipeline::run_all(&config)).unwrap();
    assert_same_outputs(&s.out, &out);
}

#[test]
fn stage_by_stage_matches_run_all() {
    let s = shared();
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let config = small_config(&out);
    pipeline::stage_synth(&config).unwrap();
    pipeline::stage_ingest(&config).unwrap();
    pipeline::stage_features(&config).unwrap();
    pipeline::stage_cv(&config).unwrap();
    pipeline::stage_select(&config).unwrap();
    pipeline::stage_holdout(&config).unwrap();
    pipeline::stage_report(&config).unwrap();
    assert_same_outputs(&s.out, &out);
}

#[test]
fn a_changed_seed_changes_the_split() {
    let s = shared();
    let dir = tempfile::tempdir().unwrap();
    let mut config = small_config(&dir.path().join("run"));
    config.manifest = Some(s.config.manifest_path());
    config.set_master_seed(6);
    pipeline::stage_features(&config).unwrap();
    pipeline::stage_cv(&config).unwrap();
    let a = std::fs::read(s.out.join(report::SPLIT)).unwrap();
    let b = std::fs::read(config.output_dir.join(report::SPLIT)).unwrap();
    assert_ne!(a, b);
}

#[test]
fn leaked_row_is_refused() {
    let s = shared();
    let data = report::read_features(&s.out).unwrap().dataset().unwrap();
    let mut split = report::read_split(&s.out, &data).unwrap();
    split.train.push(split.test[0]);
    let spec = ModelSpec::new(ModelKind::GaussianNb, 0);
    let e = final_holdout_eval(
        &spec,
        FeatureGroup::new(&Domain::ALL).unwrap(),
        &data.subset(&split.train),
        &data.subset(&split.test),
        10,
        0.95,
        0,
    )
    .unwrap_err();
    assert!(matches!(e, PipelineError::Leakage(_)), "{e}");
    assert_eq!(e.exit_code(), 3);
}

#[test]
fn edited_window_index_is_a_data_error() {
    let s = shared();
    let dir = tempfile::tempdir().unwrap();
    let mut config = small_config(&dir.path().join("run"));
    config.manifest = Some(s.config.manifest_path());
    report::ensure_dir(&config.output_dir).unwrap();
    let text = std::fs::read_to_string(s.out.join(report::WINDOWS)).unwrap();
    let mut lines: Vec<&str> = text.lines().collect();
    lines.pop();
    std::fs::write(config.output_dir.join(report::WINDOWS), lines.join("\n") + "\n").unwrap();
    let e = pipeline::stage_features(&config).unwrap_err();
    assert_eq!(e.exit_code(), 3, "{e}");
}

#[test]
fn missing_inputs_are_data_errors() {
    let dir = tempfile::tempdir().unwrap();
    let config = small_config(&dir.path().join("empty"));
    assert_eq!(pipeline::stage_ingest(&config).unwrap_err().exit_code(), 3);
    assert_eq!(pipeline::stage_cv(&config).unwrap_err().exit_code(), 3);
    assert_eq!(pipeline::stage_select(&config).unwrap_err().exit_code(), 3);
}

#[test]
fn combined_entropy_and_dynamics_beat_recurrence_alone() {
    let records = report::read_eval_records(&shared().out).unwrap();
    let mean_f1 = |g: &str| {
        let v: Vec<f64> = records.iter().filter(|r| r.combo.name() == g).map(|r| r.metrics.f1).collect();
        v.iter().sum::<f64>() / v.len() as f64
    };
    assert!(mean_f1("E+N") >= mean_f1("R"), "E+N {} vs R {}", mean_f1("E+N"), mean_f1("R"));
}

#[test]
fn a_crippled_tree_never_wins_stage_two() {
    let s = shared();
    let records = report::read_eval_records(&s.out).unwrap();
    let mut crippled = s.config.clone();
    crippled.models = crippled.roster();
    for spec in crippled.models.iter_mut() {
        if spec.kind == ModelKind::DecisionTree {
            spec.max_depth = Some(1);
        }
    }
    // Refit only the decision-tree cells with the stump, keeping the rest.
    let data = report::read_features(&s.out).unwrap().dataset().unwrap();
    let split = report::read_split(&s.out, &data).unwrap();
    let train = data.subset(&split.train);
    let stump: Vec<ModelSpec> = crippled.roster().into_iter().filter(|m| m.kind == ModelKind::DecisionTree).collect();
    let stump_records =
        pipeline::run_cv_grid(&train, &pipeline::enumerate_feature_groups(), &stump, K, crippled.fold_seed()).unwrap();
    let mut mixed: Vec<EvalRecord> = records.into_iter().filter(|r| r.model != ModelKind::DecisionTree).collect();
    mixed.extend(stump_records);
    let sel = pipeline::select_all(&mixed, &crippled).unwrap();
    assert_ne!(sel.model, ModelKind::DecisionTree);
}
