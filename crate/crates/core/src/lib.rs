//! Undersampling toolkit for binary class-imbalanced tabular data.
//!
//! Two neural-reconstruction undersamplers (hard and soft), seven classical
//! baselines, desk-scale classifiers and metrics, and a cross-validated
//! benchmark harness. See the crate README for the CLI.

pub mod baselines;
pub mod classifiers;
pub mod dataset;
pub mod error;
pub mod fixtures;
pub mod harness;
pub mod metrics;
pub mod nnet;
pub mod nus;
pub mod seed;

pub use dataset::{
    fit_apply_minmax, load_csv, split_classes, stratified_folds, write_csv, ClassSplit, Dataset,
    FoldPlan, LabelColumn, ScalerParams,
};
pub use error::{Error, Result};
pub use harness::{
    generate_blobs, run_experiment, BlobSpec, CVConfig, ClassBlob, ExperimentReport, MetricKind,
    ResampleScope, Sampler, SamplerKind,
};
pub use nnet::{
    choose_architecture, reconstruction_distances, train_reconstructor, Activation,
    DistanceRecord, NetworkKind, NetworkSpec, TrainConfig, TrainedReconstructor,
};
pub use nus::{nus1, nus2, MinorityThresholds, NusConfig, ResampleOutcome, ThresholdMode};
