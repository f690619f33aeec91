//! The two neural-reconstruction undersamplers: hard (keep exactly the n1
//! majority rows farthest from their reconstructions) and soft (keep every
//! majority row whose reconstruction distance clears a minority-derived
//! threshold).
//!
//! Both scale a private copy of the input to [0, 1] before training, so
//! their behaviour does not depend on caller preprocessing; selected rows
//! always refer to the original, unscaled dataset.

use ndarray::{Array2, Axis};
use serde::{Deserialize, Serialize};

use crate::dataset::{checked_split, fit_apply_minmax, ClassSplit, Dataset};
use crate::error::{Error, Result};
use crate::nnet::{
    choose_architecture, reconstruction_distances, sort_distances_desc, train_reconstructor,
    DistanceRecord, TrainConfig, TrainedReconstructor, DEFAULT_ARCHITECTURE_THRESHOLD,
};

/// Which minority-derived threshold the soft undersampler applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdMode {
    /// Keep rows beyond the maximum minority distance.
    Max,
    /// Keep rows beyond the average of the top half of minority distances.
    HalfAverage,
    /// The literal disjunction of the two. Since the maximum dominates the
    /// half-average, this selects exactly the half-average set; both
    /// operands are kept for fidelity to the published procedure.
    OrBoth,
}

impl std::str::FromStr for ThresholdMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<ThresholdMode> {
        match s {
            "max" => Ok(ThresholdMode::Max),
            "half_average" => Ok(ThresholdMode::HalfAverage),
            "or_both" => Ok(ThresholdMode::OrBoth),
            other => Err(Error::ConfigError(format!(
                "unknown threshold mode {other:?} (expected or_both, max or half_average)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NusConfig {
    /// Attribute count above which the autoencoder architecture is used.
    pub threshold: usize,
    pub threshold_mode: ThresholdMode,
    pub train: TrainConfig,
}

impl Default for NusConfig {
    fn default() -> Self {
        NusConfig {
            threshold: DEFAULT_ARCHITECTURE_THRESHOLD,
            threshold_mode: ThresholdMode::OrBoth,
            train: TrainConfig::default(),
        }
    }
}

/// Thresholds computed from the minority's own reconstruction distances.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinorityThresholds {
    pub max_dist: f64,
    pub last_mid_avg: f64,
}

impl MinorityThresholds {
    fn passes(&self, dist: f64, mode: ThresholdMode) -> bool {
        match mode {
            ThresholdMode::Max => dist > self.max_dist,
            ThresholdMode::HalfAverage => dist > self.last_mid_avg,
            ThresholdMode::OrBoth => dist > self.max_dist || dist > self.last_mid_avg,
        }
    }
}

/// max distance plus the mean of the top ceil(n/2) distances.
pub fn minority_thresholds(records: &[DistanceRecord]) -> Result<MinorityThresholds> {
    if records.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut sorted = records.to_vec();
    sort_distances_desc(&mut sorted);
    let half = sorted.len().div_ceil(2);
    let last_mid_avg = sorted[..half].iter().map(|r| r.dist).sum::<f64>() / half as f64;
    Ok(MinorityThresholds {
        max_dist: sorted[0].dist,
        last_mid_avg,
    })
}

/// Result of one resampling run: which original rows survive, any
/// synthesized points (cluster centroids only), and the balanced dataset
/// assembled from them. Balanced rows are ordered minority first (ascending
/// original index), then kept majority (ascending), then synthesized points.
#[derive(Debug, Clone)]
pub struct ResampleOutcome {
    pub kept_majority: Vec<usize>,
    pub synthesized_majority: Option<Array2<f64>>,
    pub kept_minority: Vec<usize>,
    pub balanced: Dataset,
}

impl ResampleOutcome {
    /// Assemble an outcome from a selection over `d`. `kept_majority` must
    /// contain valid, unique majority indices; it is sorted ascending here.
    pub(crate) fn from_selection(
        d: &Dataset,
        split: &ClassSplit,
        mut kept_majority: Vec<usize>,
        synthesized_majority: Option<Array2<f64>>,
    ) -> ResampleOutcome {
        kept_majority.sort_unstable();
        let kept_minority = split.minority_indices.clone();

        let mut rows: Vec<usize> = kept_minority.iter().chain(kept_majority.iter()).copied().collect();
        let mut features = d.features().select(Axis(0), &rows);
        let mut labels: Vec<String> = rows.drain(..).map(|i| d.label(i).to_string()).collect();
        if let Some(extra) = &synthesized_majority {
            assert_eq!(extra.ncols(), d.n_features());
            let mut stacked = Array2::zeros((features.nrows() + extra.nrows(), d.n_features()));
            stacked
                .slice_mut(ndarray::s![..features.nrows(), ..])
                .assign(&features);
            stacked
                .slice_mut(ndarray::s![features.nrows().., ..])
                .assign(extra);
            features = stacked;
            labels.extend(std::iter::repeat_n(
                split.majority_label.clone(),
                extra.nrows(),
            ));
        }
        let balanced = Dataset::from_parts_lenient(
            features,
            labels,
            d.feature_names().to_vec(),
            d.label_name().to_string(),
        );
        ResampleOutcome {
            kept_majority,
            synthesized_majority,
            kept_minority,
            balanced,
        }
    }
}

fn train_on_minority(
    scaled: &Dataset,
    split: &ClassSplit,
    cfg: &NusConfig,
    seed: u64,
) -> Result<TrainedReconstructor> {
    let spec = choose_architecture(scaled.n_features(), cfg.threshold);
    let tcfg = TrainConfig {
        seed,
        ..cfg.train.clone()
    };
    let minority = scaled.features().select(Axis(0), &split.minority_indices);
    train_reconstructor(minority.view(), &spec, &tcfg)
}

/// Top-n selection for the hard undersampler: the n largest distances, ties
/// toward the smaller original index.
pub(crate) fn hard_select(records: &[DistanceRecord], n: usize) -> Vec<usize> {
    let mut sorted = records.to_vec();
    sort_distances_desc(&mut sorted);
    sorted.iter().take(n).map(|r| r.index).collect()
}

pub(crate) fn soft_select(
    records: &[DistanceRecord],
    thresholds: &MinorityThresholds,
    mode: ThresholdMode,
) -> Vec<usize> {
    records
        .iter()
        .filter(|r| thresholds.passes(r.dist, mode))
        .map(|r| r.index)
        .collect()
}

/// Hard undersampling: train on the minority, score every majority row by
/// squared reconstruction distance, keep exactly the n1 farthest. The
/// balanced dataset has exactly 2*n1 rows.
pub fn nus1(d: &Dataset, cfg: &NusConfig, seed: u64) -> Result<ResampleOutcome> {
    let split = checked_split(d)?;
    let (scaled, _) = fit_apply_minmax(d);
    let model = train_on_minority(&scaled, &split, cfg, seed)?;
    let records = reconstruction_distances(&model, &split.majority_indices, scaled.features());
    let kept = hard_select(&records, split.n_minority());
    Ok(ResampleOutcome::from_selection(d, &split, kept, None))
}

/// Soft undersampling: derive thresholds from the minority's own
/// reconstruction distances, then keep every majority row whose distance
/// passes the configured test. The kept count is data-dependent and may be
/// zero (reported with a warning, not an error).
pub fn nus2(d: &Dataset, cfg: &NusConfig, seed: u64) -> Result<ResampleOutcome> {
    let split = checked_split(d)?;
    let (scaled, _) = fit_apply_minmax(d);
    let model = train_on_minority(&scaled, &split, cfg, seed)?;
    let minority_records =
        reconstruction_distances(&model, &split.minority_indices, scaled.features());
    let thresholds = minority_thresholds(&minority_records)?;
    let majority_records =
        reconstruction_distances(&model, &split.majority_indices, scaled.features());
    let kept = soft_select(&majority_records, &thresholds, cfg.threshold_mode);
    if kept.is_empty() {
        log::warn!(
            "soft undersampling kept no majority rows (thresholds max={:.6e}, half-avg={:.6e})",
            thresholds.max_dist,
            thresholds.last_mid_avg
        );
    }
    Ok(ResampleOutcome::from_selection(d, &split, kept, None))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::split_classes;
    use approx::assert_abs_diff_eq;
    use ndarray::Array2;
    use proptest::prelude::*;

    fn records(dists: &[f64]) -> Vec<DistanceRecord> {
        dists
            .iter()
            .enumerate()
            .map(|(index, &dist)| DistanceRecord { index, dist })
            .collect()
    }

    #[test]
    fn thresholds_even_count() {
        let t = minority_thresholds(&records(&[4.0, 3.0, 2.0, 1.0])).unwrap();
        assert_abs_diff_eq!(t.max_dist, 4.0);
        assert_abs_diff_eq!(t.last_mid_avg, 3.5);
    }

    #[test]
    fn thresholds_odd_count_uses_ceiling() {
        let t = minority_thresholds(&records(&[3.0, 2.0, 1.0])).unwrap();
        assert_abs_diff_eq!(t.max_dist, 3.0);
        assert_abs_diff_eq!(t.last_mid_avg, 2.5);
    }

    #[test]
    fn thresholds_degenerate_zeroes() {
        let t = minority_thresholds(&records(&[0.0, 0.0])).unwrap();
        assert_abs_diff_eq!(t.max_dist, 0.0);
        assert_abs_diff_eq!(t.last_mid_avg, 0.0);
    }

    #[test]
    fn thresholds_empty_input() {
        assert!(matches!(
            minority_thresholds(&[]),
            Err(Error::EmptyInput)
        ));
    }

    #[test]
    fn hard_select_top_three() {
        let recs = records(&[5.0, 4.0, 3.0, 2.0, 1.0]);
        let mut kept = hard_select(&recs, 3);
        kept.sort_unstable();
        assert_eq!(kept, vec![0, 1, 2]);
    }

    #[test]
    fn soft_select_or_both_example() {
        let t = MinorityThresholds {
            max_dist: 4.0,
            last_mid_avg: 3.5,
        };
        let recs = records(&[5.0, 3.6, 3.4, 1.0]);
        let kept = soft_select(&recs, &t, ThresholdMode::OrBoth);
        assert_eq!(kept, vec![0, 1]);
    }

    proptest! {
        /// hard selection equals the brute-force "sort and take top n" oracle
        #[test]
        fn hard_select_matches_oracle(dists in proptest::collection::vec(0.0f64..100.0, 1..60),
                                      n_frac in 0.0f64..1.0) {
            let n = ((dists.len() as f64) * n_frac).floor() as usize;
            let recs = records(&dists);
            let mut kept = hard_select(&recs, n);
            kept.sort_unstable();

            // oracle: stable sort of (dist desc, index asc), take n
            let mut oracle: Vec<(usize, f64)> = dists.iter().copied().enumerate().collect();
            oracle.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
            let mut expect: Vec<usize> = oracle.iter().take(n).map(|(i, _)| *i).collect();
            expect.sort_unstable();
            prop_assert_eq!(kept, expect);
        }

        /// or_both selects exactly the half-average set, and the max set is
        /// contained in it
        #[test]
        fn soft_modes_nest(min_dists in proptest::collection::vec(0.0f64..10.0, 1..40),
                           maj_dists in proptest::collection::vec(0.0f64..20.0, 1..80)) {
            let t = minority_thresholds(&records(&min_dists)).unwrap();
            prop_assert!(t.max_dist >= t.last_mid_avg);
            let recs = records(&maj_dists);
            let or_both = soft_select(&recs, &t, ThresholdMode::OrBoth);
            let half = soft_select(&recs, &t, ThresholdMode::HalfAverage);
            let max = soft_select(&recs, &t, ThresholdMode::Max);
            prop_assert_eq!(&or_both, &half);
            prop_assert!(max.iter().all(|i| or_both.contains(i)));
        }
    }

    fn tiny_dataset(minority: usize, majority: usize) -> Dataset {
        // two cleanly separated 2-D blobs on a grid
        let n = minority + majority;
        let features = Array2::from_shape_fn((n, 2), |(i, j)| {
            if i < majority {
                (i % 7) as f64 * 0.1 + j as f64 * 0.05
            } else {
                3.0 + (i % 5) as f64 * 0.1 + j as f64 * 0.07
            }
        });
        let labels = (0..n)
            .map(|i| if i < majority { "maj" } else { "min" }.to_string())
            .collect();
        Dataset::new(features, labels, vec!["x".into(), "y".into()], "y".into()).unwrap()
    }

    fn quick_cfg() -> NusConfig {
        NusConfig {
            train: TrainConfig {
                max_epochs: 60,
                ..TrainConfig::default()
            },
            ..NusConfig::default()
        }
    }

    #[test]
    fn nus1_keeps_exactly_n1() {
        let d = tiny_dataset(4, 11);
        let out = nus1(&d, &quick_cfg(), 7).unwrap();
        assert_eq!(out.kept_majority.len(), 4);
        assert_eq!(out.kept_minority.len(), 4);
        assert_eq!(out.balanced.n_rows(), 8);
    }

    #[test]
    fn nus1_equal_counts_keeps_everything() {
        let d = tiny_dataset(5, 5);
        let out = nus1(&d, &quick_cfg(), 7).unwrap();
        assert_eq!(out.kept_majority.len(), 5);
        assert_eq!(out.balanced.n_rows(), 10);
    }

    #[test]
    fn nus1_preserves_minority_rows_bit_exact() {
        let d = tiny_dataset(4, 9);
        let out = nus1(&d, &quick_cfg(), 3).unwrap();
        let split = split_classes(&d);
        for (pos, &idx) in split.minority_indices.iter().enumerate() {
            assert_eq!(out.balanced.row(pos), d.row(idx));
            assert_eq!(out.balanced.label(pos), d.label(idx));
        }
    }

    #[test]
    fn nus_runs_are_deterministic() {
        let d = tiny_dataset(4, 9);
        let a = nus1(&d, &quick_cfg(), 42).unwrap();
        let b = nus1(&d, &quick_cfg(), 42).unwrap();
        assert_eq!(a.kept_majority, b.kept_majority);
        assert_eq!(a.balanced.features(), b.balanced.features());
        let c = nus2(&d, &quick_cfg(), 42).unwrap();
        let e = nus2(&d, &quick_cfg(), 42).unwrap();
        assert_eq!(c.kept_majority, e.kept_majority);
    }

    #[test]
    fn nus2_empty_selection_is_ok_not_error() {
        // all-zero distances pass no strict threshold
        let d = tiny_dataset(3, 6);
        let split = split_classes(&d);
        let t = MinorityThresholds {
            max_dist: 0.0,
            last_mid_avg: 0.0,
        };
        let kept = soft_select(&records(&[0.0; 6]), &t, ThresholdMode::OrBoth);
        assert!(kept.is_empty());
        let out = ResampleOutcome::from_selection(&d, &split, kept, None);
        assert_eq!(out.balanced.n_rows(), 3);
        assert_eq!(out.balanced.distinct_label_count(), 1);
    }

    #[test]
    fn nus2_kept_majority_distances_clear_threshold() {
        let d = tiny_dataset(5, 12);
        let cfg = quick_cfg();
        let out = nus2(&d, &cfg, 9).unwrap();
        // every kept row must be a majority row
        let split = split_classes(&d);
        for idx in &out.kept_majority {
            assert!(split.majority_indices.contains(idx));
        }
    }
}
