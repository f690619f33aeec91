//! Synthetic blob generation, the cross-validated sampler x classifier
//! benchmark, report emission and scatter dumps.

use std::io::Write;
use std::path::Path;

use ndarray::{Array2, Axis};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines;
use crate::classifiers::{fit, ClassifierConfig};
use crate::dataset::{fit_apply_minmax, split_classes, stratified_folds, Dataset};
use crate::error::{Error, Result};
use crate::metrics::{auc, confusion_matrix, gmean, gmean_raw_counts, precision_recall_f1};
use crate::nus::{nus1, nus2, NusConfig, ResampleOutcome};
use crate::seed::{mix_seed, mix_seed3};

/// One class of an isotropic Gaussian blob.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassBlob {
    pub center: Vec<f64>,
    pub std_dev: f64,
    pub count: usize,
}

/// Two-class blob dataset: the first blob is the majority ("maj"), the
/// second the minority ("min").
#[derive(Debug, Clone, PartialEq)]
pub struct BlobSpec {
    pub majority: ClassBlob,
    pub minority: ClassBlob,
    pub seed: u64,
}

pub fn generate_blobs(spec: &BlobSpec) -> Result<Dataset> {
    for blob in [&spec.majority, &spec.minority] {
        if blob.count == 0 {
            return Err(Error::BadSpec("class count must be >= 1".into()));
        }
        if blob.std_dev < 0.0 || !blob.std_dev.is_finite() {
            return Err(Error::BadSpec("standard deviation must be >= 0".into()));
        }
        if blob.center.is_empty() {
            return Err(Error::BadSpec("center must have at least one dimension".into()));
        }
    }
    if spec.majority.center.len() != spec.minority.center.len() {
        return Err(Error::BadSpec("class centers must share dimensionality".into()));
    }

    let m = spec.majority.center.len();
    let n = spec.majority.count + spec.minority.count;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut features = Array2::zeros((n, m));
    let mut labels = Vec::with_capacity(n);
    let normal = StandardNormal;
    let mut row = 0;
    for (blob, label) in [(&spec.majority, "maj"), (&spec.minority, "min")] {
        for _ in 0..blob.count {
            for j in 0..m {
                let z: f64 = normal.sample(&mut rng);
                features[[row, j]] = blob.center[j] + blob.std_dev * z;
            }
            labels.push(label.to_string());
            row += 1;
        }
    }
    let feature_names = (0..m).map(|j| format!("x{j}")).collect();
    Dataset::new(features, labels, feature_names, "class".into())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResampleScope {
    /// Scale and resample inside the training folds only (no leakage).
    TrainOnly,
    /// Scale and resample the whole dataset once, then cross-validate the
    /// balanced result. Exists to probe leakage-prone protocols.
    WholeDataset,
}

impl std::str::FromStr for ResampleScope {
    type Err = Error;

    fn from_str(s: &str) -> Result<ResampleScope> {
        match s {
            "train_only" => Ok(ResampleScope::TrainOnly),
            "whole_dataset" => Ok(ResampleScope::WholeDataset),
            other => Err(Error::ConfigError(format!(
                "unknown scope {other:?} (expected train_only or whole_dataset)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CVConfig {
    pub folds: usize,
    pub repeats: usize,
    pub seed: u64,
    pub resample_scope: ResampleScope,
}

impl Default for CVConfig {
    fn default() -> Self {
        CVConfig {
            folds: 5,
            repeats: 10,
            seed: 0,
            resample_scope: ResampleScope::TrainOnly,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricKind {
    Auc,
    GMean,
    F1,
    /// Audit-only variant of the G-mean over raw counts.
    GMeanRawCounts,
}

impl MetricKind {
    pub fn name(&self) -> &'static str {
        match self {
            MetricKind::Auc => "auc",
            MetricKind::GMean => "gmean",
            MetricKind::F1 => "f1",
            MetricKind::GMeanRawCounts => "gmean_raw",
        }
    }
}

impl std::str::FromStr for MetricKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<MetricKind> {
        match s {
            "auc" => Ok(MetricKind::Auc),
            "gmean" => Ok(MetricKind::GMean),
            "f1" => Ok(MetricKind::F1),
            "gmean_raw" => Ok(MetricKind::GMeanRawCounts),
            other => Err(Error::ConfigError(format!(
                "unknown metric {other:?} (expected auc, gmean, f1 or gmean_raw)"
            ))),
        }
    }
}

/// Anything that can rebalance a dataset. Implementations must be pure
/// given (dataset, seed).
pub trait Sampler: Sync {
    fn name(&self) -> &str;
    fn resample(&self, d: &Dataset, seed: u64) -> Result<ResampleOutcome>;
}

/// The sampler roster exposed on the command line.
#[derive(Debug, Clone, PartialEq)]
pub enum SamplerKind {
    Nus1(NusConfig),
    Nus2(NusConfig),
    Rus,
    NearMiss { version: u32, k: usize },
    Tomek,
    Enn { k: usize },
    Aknn { k_max: usize },
    Ncr { k: usize },
    Cc,
}

impl SamplerKind {
    /// Parse a CLI method name; `nus` supplies the shared configuration for
    /// the two neural methods.
    pub fn parse(name: &str, nus: &NusConfig) -> Result<SamplerKind> {
        Ok(match name {
            "nus1" => SamplerKind::Nus1(nus.clone()),
            "nus2" => SamplerKind::Nus2(nus.clone()),
            "rus" => SamplerKind::Rus,
            "nm1" => SamplerKind::NearMiss { version: 1, k: 3 },
            "nm2" => SamplerKind::NearMiss { version: 2, k: 3 },
            "nm3" => SamplerKind::NearMiss { version: 3, k: 3 },
            "tomek" => SamplerKind::Tomek,
            "enn" => SamplerKind::Enn { k: 3 },
            "aknn" => SamplerKind::Aknn { k_max: 3 },
            "ncr" => SamplerKind::Ncr { k: 3 },
            "cc" => SamplerKind::Cc,
            other => {
                return Err(Error::ConfigError(format!(
                    "unknown method {other:?}"
                )))
            }
        })
    }
}

impl Sampler for SamplerKind {
    fn name(&self) -> &str {
        match self {
            SamplerKind::Nus1(_) => "nus1",
            SamplerKind::Nus2(_) => "nus2",
            SamplerKind::Rus => "rus",
            SamplerKind::NearMiss { version: 1, .. } => "nm1",
            SamplerKind::NearMiss { version: 2, .. } => "nm2",
            SamplerKind::NearMiss { .. } => "nm3",
            SamplerKind::Tomek => "tomek",
            SamplerKind::Enn { .. } => "enn",
            SamplerKind::Aknn { .. } => "aknn",
            SamplerKind::Ncr { .. } => "ncr",
            SamplerKind::Cc => "cc",
        }
    }

    fn resample(&self, d: &Dataset, seed: u64) -> Result<ResampleOutcome> {
        match self {
            SamplerKind::Nus1(cfg) => nus1(d, cfg, seed),
            SamplerKind::Nus2(cfg) => nus2(d, cfg, seed),
            SamplerKind::Rus => baselines::random_undersample(d, seed),
            SamplerKind::NearMiss { version, k } => baselines::near_miss(d, *version, *k),
            SamplerKind::Tomek => baselines::tomek_links(d),
            SamplerKind::Enn { k } => baselines::enn(d, *k),
            SamplerKind::Aknn { k_max } => baselines::all_knn(d, *k_max),
            SamplerKind::Ncr { k } => baselines::ncr(d, *k),
            SamplerKind::Cc => baselines::cluster_centroids(d, seed),
        }
    }
}

/// Pass-through sampler: keeps every row. Useful as a no-resampling
/// reference in experiments and tests.
pub struct IdentitySampler;

impl Sampler for IdentitySampler {
    fn name(&self) -> &str {
        "identity"
    }

    fn resample(&self, d: &Dataset, _seed: u64) -> Result<ResampleOutcome> {
        let split = crate::dataset::checked_split(d)?;
        let kept = split.majority_indices.clone();
        Ok(ResampleOutcome::from_selection(d, &split, kept, None))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportRow {
    pub sampler: String,
    pub classifier: String,
    pub metric: String,
    pub mean: f64,
    pub std: f64,
    pub fold_values: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SkippedFold {
    pub sampler: String,
    pub repeat: usize,
    pub fold: usize,
    pub reason: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Provenance {
    pub dataset_name: String,
    pub cv: CVConfig,
    pub toolkit_version: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub provenance: Provenance,
    pub rows: Vec<ReportRow>,
    pub skipped: Vec<SkippedFold>,
}

impl ExperimentReport {
    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(s: &str) -> Result<ExperimentReport> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn row(&self, sampler: &str, classifier: &str, metric: &str) -> Option<&ReportRow> {
        self.rows
            .iter()
            .find(|r| r.sampler == sampler && r.classifier == classifier && r.metric == metric)
    }
}

fn sample_mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let std = if values.len() < 2 {
        0.0
    } else {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    };
    (mean, std)
}

/// Values produced by one (repeat, fold) cell, or the reason it was skipped,
/// per sampler.
enum CellSampler {
    Skipped(String),
    // values[classifier][metric]
    Done(Vec<Vec<f64>>),
}

struct Cell {
    repeat: usize,
    fold: usize,
    samplers: Vec<CellSampler>,
}

fn evaluate_split(
    train: &Dataset,
    test_x: ndarray::ArrayView2<'_, f64>,
    test_y: &[String],
    positive: &str,
    samplers: &[&dyn Sampler],
    classifiers: &[(String, ClassifierConfig)],
    metric_kinds: &[MetricKind],
    cell_seed: u64,
    scope_note: &str,
) -> Result<Vec<CellSampler>> {
    let mut out = Vec::with_capacity(samplers.len());
    for (si, sampler) in samplers.iter().enumerate() {
        let sampler_seed = mix_seed(cell_seed, si as u64);
        let outcome = match sampler.resample(train, sampler_seed) {
            Ok(o) => o,
            Err(e) if e.is_degenerate_data() => {
                out.push(CellSampler::Skipped(format!("{scope_note}resampling failed: {e}")));
                continue;
            }
            Err(e) => return Err(e),
        };
        let balanced = &outcome.balanced;
        if balanced.distinct_label_count() != 2 {
            out.push(CellSampler::Skipped(format!(
                "{scope_note}resampled training set is single-class ({} rows)",
                balanced.n_rows()
            )));
            continue;
        }
        let mut per_classifier = Vec::with_capacity(classifiers.len());
        for (ci, (_, cfg)) in classifiers.iter().enumerate() {
            let model = fit(
                cfg,
                balanced.features(),
                balanced.labels(),
                Some(positive),
                mix_seed(sampler_seed, ci as u64),
            )?;
            let scores = model.score(test_x)?;
            let preds = model.predict(test_x)?;
            let positive_owned = positive.to_string();
            let mut per_metric = Vec::with_capacity(metric_kinds.len());
            for metric in metric_kinds {
                let value = match metric {
                    MetricKind::Auc => auc(test_y, &scores, &positive_owned)?,
                    MetricKind::GMean => {
                        gmean(&confusion_matrix(test_y, &preds, &positive_owned)?)
                    }
                    MetricKind::F1 => {
                        precision_recall_f1(&confusion_matrix(test_y, &preds, &positive_owned)?).2
                    }
                    MetricKind::GMeanRawCounts => {
                        gmean_raw_counts(&confusion_matrix(test_y, &preds, &positive_owned)?)
                    }
                };
                per_metric.push(value);
            }
            per_classifier.push(per_metric);
        }
        out.push(CellSampler::Done(per_classifier));
    }
    Ok(out)
}

/// Run the full sampler x classifier x metric experiment under repeated
/// stratified cross-validation. Deterministic given (dataset, config, seed);
/// repeated runs produce byte-identical reports.
pub fn run_experiment(
    d: &Dataset,
    dataset_name: &str,
    samplers: &[&dyn Sampler],
    classifiers: &[(String, ClassifierConfig)],
    metric_kinds: &[MetricKind],
    cv: &CVConfig,
) -> Result<ExperimentReport> {
    if samplers.is_empty() || classifiers.is_empty() || metric_kinds.is_empty() {
        return Err(Error::ConfigError(
            "need at least one sampler, classifier and metric".into(),
        ));
    }
    let positive = split_classes(d).minority_label;

    let cells: Vec<Cell> = match cv.resample_scope {
        ResampleScope::TrainOnly => {
            let plan = stratified_folds(d, cv.folds, cv.repeats, cv.seed)?;
            let grid: Vec<(usize, usize)> = (0..cv.repeats)
                .flat_map(|r| (0..cv.folds).map(move |f| (r, f)))
                .collect();
            grid.par_iter()
                .map(|&(repeat, fold)| {
                    let train_idx = plan.train_indices(repeat, fold);
                    let test_idx = plan.test_indices(repeat, fold);
                    let train = d.select_rows(&train_idx);
                    let (scaled_train, scaler) = fit_apply_minmax(&train);
                    let test_rows = d.features().select(Axis(0), &test_idx);
                    let test_x = scaler.transform(test_rows.view());
                    let test_y: Vec<String> =
                        test_idx.iter().map(|&i| d.label(i).to_string()).collect();
                    let cell_seed = mix_seed3(cv.seed, repeat as u64, fold as u64);
                    let samplers_out = evaluate_split(
                        &scaled_train,
                        test_x.view(),
                        &test_y,
                        &positive,
                        samplers,
                        classifiers,
                        metric_kinds,
                        cell_seed,
                        "",
                    )?;
                    Ok(Cell {
                        repeat,
                        fold,
                        samplers: samplers_out,
                    })
                })
                .collect::<Result<Vec<_>>>()?
        }
        ResampleScope::WholeDataset => {
            let (scaled_all, _) = fit_apply_minmax(d);
            // resample once per sampler, then cross-validate the balanced data
            let mut balanced_sets: Vec<std::result::Result<Dataset, String>> = Vec::new();
            for (si, sampler) in samplers.iter().enumerate() {
                let outcome = match sampler.resample(&scaled_all, mix_seed(cv.seed, si as u64)) {
                    Ok(o) => o,
                    Err(e) if e.is_degenerate_data() => {
                        balanced_sets.push(Err(format!("whole-dataset resampling failed: {e}")));
                        continue;
                    }
                    Err(e) => return Err(e),
                };
                if outcome.balanced.distinct_label_count() != 2 {
                    balanced_sets.push(Err("whole-dataset resample is single-class".into()));
                } else {
                    balanced_sets.push(Ok(outcome.balanced));
                }
            }

            let grid: Vec<(usize, usize)> = (0..cv.repeats)
                .flat_map(|r| (0..cv.folds).map(move |f| (r, f)))
                .collect();
            grid.par_iter()
                .map(|&(repeat, fold)| {
                    let mut samplers_out = Vec::with_capacity(samplers.len());
                    for (si, balanced) in balanced_sets.iter().enumerate() {
                        let balanced = match balanced {
                            Ok(b) => b,
                            Err(reason) => {
                                samplers_out.push(CellSampler::Skipped(reason.clone()));
                                continue;
                            }
                        };
                        let plan = match stratified_folds(balanced, cv.folds, cv.repeats, cv.seed)
                        {
                            Ok(p) => p,
                            Err(e) if e.is_degenerate_data() => {
                                samplers_out.push(CellSampler::Skipped(format!(
                                    "balanced data too small for the fold plan: {e}"
                                )));
                                continue;
                            }
                            Err(e) => return Err(e),
                        };
                        let train_idx = plan.train_indices(repeat, fold);
                        let test_idx = plan.test_indices(repeat, fold);
                        let train = balanced.select_rows(&train_idx);
                        let test_x = balanced.features().select(Axis(0), &test_idx);
                        let test_y: Vec<String> = test_idx
                            .iter()
                            .map(|&i| balanced.label(i).to_string())
                            .collect();
                        if train.distinct_label_count() != 2 || test_y.len() < 2 {
                            samplers_out
                                .push(CellSampler::Skipped("degenerate fold".into()));
                            continue;
                        }
                        let cell_seed =
                            mix_seed3(cv.seed, repeat as u64, (fold * samplers.len() + si) as u64);
                        let mut per_classifier = Vec::with_capacity(classifiers.len());
                        for (ci, (_, cfg)) in classifiers.iter().enumerate() {
                            let model = fit(
                                cfg,
                                train.features(),
                                train.labels(),
                                Some(&positive),
                                mix_seed(cell_seed, ci as u64),
                            )?;
                            let scores = model.score(test_x.view())?;
                            let preds = model.predict(test_x.view())?;
                            let mut per_metric = Vec::with_capacity(metric_kinds.len());
                            for metric in metric_kinds {
                                let value = match metric {
                                    MetricKind::Auc => {
                                        match auc(&test_y, &scores, &positive) {
                                            Ok(v) => v,
                                            Err(Error::SingleClass) => 0.5,
                                            Err(e) => return Err(e),
                                        }
                                    }
                                    MetricKind::GMean => gmean(&confusion_matrix(
                                        &test_y, &preds, &positive,
                                    )?),
                                    MetricKind::F1 => {
                                        precision_recall_f1(&confusion_matrix(
                                            &test_y, &preds, &positive,
                                        )?)
                                        .2
                                    }
                                    MetricKind::GMeanRawCounts => gmean_raw_counts(
                                        &confusion_matrix(&test_y, &preds, &positive)?,
                                    ),
                                };
                                per_metric.push(value);
                            }
                            per_classifier.push(per_metric);
                        }
                        samplers_out.push(CellSampler::Done(per_classifier));
                    }
                    Ok(Cell {
                        repeat,
                        fold,
                        samplers: samplers_out,
                    })
                })
                .collect::<Result<Vec<_>>>()?
        }
    };

    // assemble rows in canonical (sampler, classifier, metric) order
    let mut rows = Vec::new();
    let mut skipped = Vec::new();
    for (si, sampler) in samplers.iter().enumerate() {
        let mut values: Vec<Vec<Vec<f64>>> =
            vec![vec![Vec::new(); metric_kinds.len()]; classifiers.len()];
        for cell in &cells {
            match &cell.samplers[si] {
                CellSampler::Skipped(reason) => skipped.push(SkippedFold {
                    sampler: sampler.name().to_string(),
                    repeat: cell.repeat,
                    fold: cell.fold,
                    reason: reason.clone(),
                }),
                CellSampler::Done(per_classifier) => {
                    for (ci, per_metric) in per_classifier.iter().enumerate() {
                        for (mi, v) in per_metric.iter().enumerate() {
                            values[ci][mi].push(*v);
                        }
                    }
                }
            }
        }
        for (ci, (cname, _)) in classifiers.iter().enumerate() {
            for (mi, metric) in metric_kinds.iter().enumerate() {
                let fold_values = std::mem::take(&mut values[ci][mi]);
                if fold_values.is_empty() {
                    continue;
                }
                let (mean, std) = sample_mean_std(&fold_values);
                rows.push(ReportRow {
                    sampler: sampler.name().to_string(),
                    classifier: cname.clone(),
                    metric: metric.name().to_string(),
                    mean,
                    std,
                    fold_values,
                });
            }
        }
    }
    if rows.is_empty() {
        return Err(Error::AllFoldsSkipped);
    }
    rows.sort_by(|a, b| {
        (&a.sampler, &a.classifier, &a.metric).cmp(&(&b.sampler, &b.classifier, &b.metric))
    });
    skipped.sort_by(|a, b| {
        (&a.sampler, a.repeat, a.fold).cmp(&(&b.sampler, b.repeat, b.fold))
    });

    Ok(ExperimentReport {
        provenance: Provenance {
            dataset_name: dataset_name.to_string(),
            cv: cv.clone(),
            toolkit_version: env!("CARGO_PKG_VERSION").to_string(),
        },
        rows,
        skipped,
    })
}

/// Dump a 2-D dataset plus a resampling outcome as a plottable CSV with
/// columns x, y, class, status. Original rows are flagged kept/dropped;
/// synthesized points are appended with status "synthetic".
pub fn emit_scatter(
    original: &Dataset,
    outcome: &ResampleOutcome,
    path: impl AsRef<Path>,
) -> Result<()> {
    if original.n_features() != 2 {
        return Err(Error::NotTwoDimensional(original.n_features()));
    }
    let mut kept = vec![false; original.n_rows()];
    for &i in outcome.kept_minority.iter().chain(outcome.kept_majority.iter()) {
        kept[i] = true;
    }
    let majority_label = split_classes(original).majority_label;

    let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(file, "x,y,class,status")?;
    for (i, row) in original.features().outer_iter().enumerate() {
        writeln!(
            file,
            "{},{},{},{}",
            row[0],
            row[1],
            original.label(i),
            if kept[i] { "kept" } else { "dropped" }
        )?;
    }
    if let Some(synth) = &outcome.synthesized_majority {
        for row in synth.outer_iter() {
            writeln!(file, "{},{},{},synthetic", row[0], row[1], majority_label)?;
        }
    }
    file.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Mutex;

    fn blob_dataset(sep: f64, n_maj: usize, n_min: usize, seed: u64) -> Dataset {
        generate_blobs(&BlobSpec {
            majority: ClassBlob {
                center: vec![0.0, 0.0],
                std_dev: 0.3,
                count: n_maj,
            },
            minority: ClassBlob {
                center: vec![sep, sep],
                std_dev: 0.3,
                count: n_min,
            },
            seed,
        })
        .unwrap()
    }

    #[test]
    fn blob_counts_and_labels() {
        let d = blob_dataset(2.0, 50, 10, 1);
        assert_eq!(d.n_rows(), 60);
        assert_eq!(d.n_features(), 2);
        assert_eq!(d.labels().iter().filter(|l| *l == "maj").count(), 50);
    }

    #[test]
    fn blob_zero_std_is_degenerate_at_center() {
        let d = generate_blobs(&BlobSpec {
            majority: ClassBlob {
                center: vec![1.0, 2.0],
                std_dev: 0.0,
                count: 3,
            },
            minority: ClassBlob {
                center: vec![5.0, 6.0],
                std_dev: 0.0,
                count: 2,
            },
            seed: 0,
        })
        .unwrap();
        for i in 0..3 {
            assert_eq!(d.row(i).to_vec(), vec![1.0, 2.0]);
        }
    }

    #[test]
    fn blob_determinism_and_bad_specs() {
        let a = blob_dataset(2.0, 20, 5, 9);
        let b = blob_dataset(2.0, 20, 5, 9);
        assert_eq!(a.features(), b.features());

        let bad = generate_blobs(&BlobSpec {
            majority: ClassBlob {
                center: vec![0.0],
                std_dev: 1.0,
                count: 0,
            },
            minority: ClassBlob {
                center: vec![1.0],
                std_dev: 1.0,
                count: 1,
            },
            seed: 0,
        });
        assert!(matches!(bad, Err(Error::BadSpec(_))));
    }

    fn quick_cv() -> CVConfig {
        CVConfig {
            folds: 3,
            repeats: 2,
            seed: 5,
            resample_scope: ResampleScope::TrainOnly,
        }
    }

    #[test]
    fn separable_blobs_reach_high_auc() {
        let d = blob_dataset(9.0, 60, 20, 2);
        let samplers: Vec<&dyn Sampler> = vec![&IdentitySampler];
        let classifiers = vec![(
            "knn".to_string(),
            ClassifierConfig::defaults(crate::classifiers::ClassifierKind::Knn),
        )];
        let report = run_experiment(
            &d,
            "blobs",
            &samplers,
            &classifiers,
            &[MetricKind::Auc],
            &quick_cv(),
        )
        .unwrap();
        let row = report.row("identity", "knn", "auc").unwrap();
        assert!(row.mean >= 0.99, "auc {}", row.mean);
        assert_eq!(row.fold_values.len(), 6);
    }

    #[test]
    fn report_has_cartesian_rows() {
        let d = blob_dataset(3.0, 40, 12, 3);
        let rus = SamplerKind::Rus;
        let tomek = SamplerKind::Tomek;
        let samplers: Vec<&dyn Sampler> = vec![&rus, &tomek];
        let classifiers = vec![
            (
                "knn".to_string(),
                ClassifierConfig::defaults(crate::classifiers::ClassifierKind::Knn),
            ),
            (
                "logreg".to_string(),
                ClassifierConfig::defaults(crate::classifiers::ClassifierKind::LogReg),
            ),
        ];
        let metrics = [MetricKind::Auc, MetricKind::F1, MetricKind::GMean];
        let report =
            run_experiment(&d, "blobs", &samplers, &classifiers, &metrics, &quick_cv()).unwrap();
        assert_eq!(report.rows.len(), 2 * 2 * 3);
        for row in &report.rows {
            let (mean, std) = sample_mean_std(&row.fold_values);
            assert!((row.mean - mean).abs() < 1e-9);
            assert!((row.std - std).abs() < 1e-9);
        }
    }

    /// Counts invocations and records every feature value it sees.
    struct SpySampler {
        calls: Mutex<usize>,
        seen_rows: Mutex<Vec<Vec<f64>>>,
    }

    impl SpySampler {
        fn new() -> Self {
            SpySampler {
                calls: Mutex::new(0),
                seen_rows: Mutex::new(Vec::new()),
            }
        }
    }

    impl Sampler for SpySampler {
        fn name(&self) -> &str {
            "spy"
        }

        fn resample(&self, d: &Dataset, seed: u64) -> Result<ResampleOutcome> {
            *self.calls.lock().unwrap() += 1;
            let mut seen = self.seen_rows.lock().unwrap();
            for row in d.features().outer_iter() {
                seen.push(row.to_vec());
            }
            drop(seen);
            IdentitySampler.resample(d, seed)
        }
    }

    #[test]
    fn train_only_calls_sampler_once_per_cell() {
        let d = blob_dataset(4.0, 30, 9, 11);
        let spy = SpySampler::new();
        let samplers: Vec<&dyn Sampler> = vec![&spy];
        let classifiers = vec![(
            "knn".to_string(),
            ClassifierConfig::defaults(crate::classifiers::ClassifierKind::Knn),
        )];
        let cv = quick_cv();
        let plan = stratified_folds(&d, cv.folds, cv.repeats, cv.seed).unwrap();
        run_experiment(&d, "blobs", &samplers, &classifiers, &[MetricKind::Auc], &cv).unwrap();
        assert_eq!(*spy.calls.lock().unwrap(), cv.folds * cv.repeats);

        // every invocation saw exactly one cell's training rows
        let seen = spy.seen_rows.lock().unwrap();
        let expected: usize = (0..cv.repeats)
            .flat_map(|r| (0..cv.folds).map(move |f| (r, f)))
            .map(|(r, f)| plan.train_indices(r, f).len())
            .sum();
        assert_eq!(seen.len(), expected);
    }

    #[test]
    fn held_out_rows_never_reach_the_sampler() {
        // identity scaling (features already in [0,1] with per-column span
        // 0..1 in every training fold is not guaranteed), so instead give
        // every row a unique fingerprint coordinate and compare fingerprints
        // after undoing nothing: fingerprints survive min-max scaling as
        // ranks, and ranks identify rows uniquely here.
        let n = 24;
        let features = Array2::from_shape_fn((n, 2), |(i, j)| {
            if j == 0 {
                i as f64 // unique, order-preserving fingerprint
            } else {
                (i % 5) as f64
            }
        });
        let labels: Vec<String> = (0..n)
            .map(|i| if i % 4 == 0 { "min" } else { "maj" }.to_string())
            .collect();
        let d = Dataset::new(
            features,
            labels,
            vec!["fp".into(), "x".into()],
            "y".into(),
        )
        .unwrap();

        let spy = SpySampler::new();
        let cv = quick_cv();
        let plan = stratified_folds(&d, cv.folds, cv.repeats, cv.seed).unwrap();
        let samplers: Vec<&dyn Sampler> = vec![&spy];
        let classifiers = vec![(
            "knn".to_string(),
            ClassifierConfig::defaults(crate::classifiers::ClassifierKind::Knn),
        )];
        run_experiment(&d, "fp", &samplers, &classifiers, &[MetricKind::Auc], &cv).unwrap();

        // reconstruct, per cell, which fingerprints the sampler saw; scaling
        // maps fingerprint i to i / max(train fingerprints), recover by rank
        let seen = spy.seen_rows.lock().unwrap();
        let mut offset = 0;
        for repeat in 0..cv.repeats {
            for fold in 0..cv.folds {
                let train_idx = plan.train_indices(repeat, fold);
                let test_idx = plan.test_indices(repeat, fold);
                let cell_rows = &seen[offset..offset + train_idx.len()];
                offset += train_idx.len();

                // ranks of scaled fingerprints must match ranks of train_idx
                let mut scaled: Vec<f64> = cell_rows.iter().map(|r| r[0]).collect();
                scaled.sort_by(f64::total_cmp);
                let mut expected = train_idx.clone();
                expected.sort_unstable();
                // the largest training fingerprint scales to exactly 1.0 and
                // the smallest to 0.0; intermediate ones interpolate their
                // original values, so recover them
                let lo = *expected.first().unwrap() as f64;
                let hi = *expected.last().unwrap() as f64;
                let recovered: Vec<usize> = scaled
                    .iter()
                    .map(|s| (s * (hi - lo) + lo).round() as usize)
                    .collect();
                assert_eq!(recovered, expected);
                for t in &test_idx {
                    assert!(!recovered.contains(t), "held-out row {t} leaked");
                }
            }
        }
    }

    #[test]
    fn reports_are_byte_identical_across_runs() {
        let d = blob_dataset(2.0, 40, 12, 7);
        let rus = SamplerKind::Rus;
        let samplers: Vec<&dyn Sampler> = vec![&rus];
        let classifiers = vec![(
            "sgd".to_string(),
            ClassifierConfig::defaults(crate::classifiers::ClassifierKind::SgdHinge),
        )];
        let metrics = [MetricKind::Auc, MetricKind::GMean];
        let a = run_experiment(&d, "blobs", &samplers, &classifiers, &metrics, &quick_cv())
            .unwrap()
            .to_json_pretty();
        let b = run_experiment(&d, "blobs", &samplers, &classifiers, &metrics, &quick_cv())
            .unwrap()
            .to_json_pretty();
        assert_eq!(a, b);
    }

    #[test]
    fn whole_dataset_scope_runs() {
        let d = blob_dataset(3.0, 40, 12, 7);
        let rus = SamplerKind::Rus;
        let samplers: Vec<&dyn Sampler> = vec![&rus];
        let classifiers = vec![(
            "knn".to_string(),
            ClassifierConfig::defaults(crate::classifiers::ClassifierKind::Knn),
        )];
        let cv = CVConfig {
            resample_scope: ResampleScope::WholeDataset,
            folds: 3,
            repeats: 2,
            seed: 1,
        };
        let report =
            run_experiment(&d, "blobs", &samplers, &classifiers, &[MetricKind::Auc], &cv)
                .unwrap();
        assert_eq!(report.rows.len(), 1);
    }

    #[test]
    fn scatter_requires_two_dims_and_flags_rows() {
        let d = blob_dataset(5.0, 10, 4, 3);
        let out = SamplerKind::Rus.resample(&d, 0).unwrap();
        let tmp = tempfile::NamedTempFile::new().unwrap();
        emit_scatter(&d, &out, tmp.path()).unwrap();
        let text = std::fs::read_to_string(tmp.path()).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 1 + 14);
        let kept = lines.iter().filter(|l| l.ends_with(",kept")).count();
        assert_eq!(kept, 8); // 4 minority + 4 sampled majority

        let wide = generate_blobs(&BlobSpec {
            majority: ClassBlob {
                center: vec![0.0, 0.0, 0.0],
                std_dev: 1.0,
                count: 5,
            },
            minority: ClassBlob {
                center: vec![1.0, 1.0, 1.0],
                std_dev: 1.0,
                count: 3,
            },
            seed: 0,
        })
        .unwrap();
        let out2 = SamplerKind::Rus.resample(&wide, 0).unwrap();
        assert!(matches!(
            emit_scatter(&wide, &out2, tmp.path()),
            Err(Error::NotTwoDimensional(3))
        ));
    }
}
