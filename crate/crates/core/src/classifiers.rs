//! Desk-scale classifiers used to evaluate resampled data: k-NN, logistic
//! regression and a hinge-loss linear model. Scores are oriented so that
//! higher means more likely positive (the minority class by default).

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::baselines::neighbors::NeighborQuery;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClassifierKind {
    Knn,
    LogReg,
    SgdHinge,
}

impl std::str::FromStr for ClassifierKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<ClassifierKind> {
        match s {
            "knn" => Ok(ClassifierKind::Knn),
            "logreg" => Ok(ClassifierKind::LogReg),
            "sgd" | "sgd_hinge" => Ok(ClassifierKind::SgdHinge),
            other => Err(Error::ConfigError(format!(
                "unknown classifier {other:?} (expected knn, logreg or sgd)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ClassifierConfig {
    Knn { k: usize },
    LogReg { learning_rate: f64, epochs: usize },
    SgdHinge { learning_rate: f64, epochs: usize },
}

impl ClassifierConfig {
    pub fn defaults(kind: ClassifierKind) -> ClassifierConfig {
        match kind {
            ClassifierKind::Knn => ClassifierConfig::Knn { k: 5 },
            ClassifierKind::LogReg => ClassifierConfig::LogReg {
                learning_rate: 0.1,
                epochs: 500,
            },
            ClassifierKind::SgdHinge => ClassifierConfig::SgdHinge {
                learning_rate: 0.01,
                epochs: 200,
            },
        }
    }

    pub fn kind(&self) -> ClassifierKind {
        match self {
            ClassifierConfig::Knn { .. } => ClassifierKind::Knn,
            ClassifierConfig::LogReg { .. } => ClassifierKind::LogReg,
            ClassifierConfig::SgdHinge { .. } => ClassifierKind::SgdHinge,
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            ClassifierConfig::Knn { k } => {
                if *k < 1 {
                    return Err(Error::ConfigError("knn needs k >= 1".into()));
                }
            }
            ClassifierConfig::LogReg {
                learning_rate,
                epochs,
            }
            | ClassifierConfig::SgdHinge {
                learning_rate,
                epochs,
            } => {
                if !(*learning_rate > 0.0) {
                    return Err(Error::ConfigError("learning rate must be positive".into()));
                }
                if *epochs == 0 {
                    return Err(Error::ConfigError("epochs must be >= 1".into()));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
enum ModelParams {
    Knn {
        train: Array2<f64>,
        is_positive: Vec<bool>,
        k: usize,
    },
    Linear {
        weights: Array1<f64>,
        bias: f64,
    },
}

/// A fitted classifier. `score` is the number the harness feeds to AUC;
/// `predict` thresholds it (0.5 for k-NN vote fractions, 0 for the linear
/// margins).
#[derive(Debug, Clone)]
pub struct ClassifierModel {
    positive_label: String,
    negative_label: String,
    n_features: usize,
    params: ModelParams,
}

fn pick_positive(y: &[String], positive: Option<&str>) -> Result<(String, String)> {
    let mut distinct: Vec<&str> = Vec::new();
    for l in y {
        if !distinct.contains(&l.as_str()) {
            distinct.push(l);
        }
    }
    if distinct.len() != 2 {
        return Err(Error::SingleClass);
    }
    distinct.sort_unstable();
    let (a, b) = (distinct[0], distinct[1]);
    let pos = match positive {
        Some(p) => {
            if p != a && p != b {
                return Err(Error::ConfigError(format!(
                    "positive label {p:?} not present in training labels"
                )));
            }
            p.to_string()
        }
        None => {
            // minority of y; lexicographic tie-break favours the smaller
            let count_a = y.iter().filter(|l| l.as_str() == a).count();
            let count_b = y.len() - count_a;
            if count_a <= count_b {
                a.to_string()
            } else {
                b.to_string()
            }
        }
    };
    let neg = if pos == a { b.to_string() } else { a.to_string() };
    Ok((pos, neg))
}

/// Fit a classifier. The positive class is the given label, or the minority
/// of `y` when unspecified. Linear models start from zero weights; the seed
/// only drives the per-epoch shuffle of the hinge model.
pub fn fit(
    cfg: &ClassifierConfig,
    x: ArrayView2<'_, f64>,
    y: &[String],
    positive: Option<&str>,
    seed: u64,
) -> Result<ClassifierModel> {
    cfg.validate()?;
    if x.nrows() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.nrows(),
            right: y.len(),
        });
    }
    if x.nrows() < 2 {
        return Err(Error::ConfigError("need at least 2 training rows".into()));
    }
    let (positive_label, negative_label) = pick_positive(y, positive)?;
    let n_features = x.ncols();

    let params = match *cfg {
        ClassifierConfig::Knn { k } => ModelParams::Knn {
            train: x.to_owned(),
            is_positive: y.iter().map(|l| *l == positive_label).collect(),
            k,
        },
        ClassifierConfig::LogReg {
            learning_rate,
            epochs,
        } => {
            let targets: Array1<f64> = y
                .iter()
                .map(|l| if *l == positive_label { 1.0 } else { 0.0 })
                .collect();
            let n = x.nrows() as f64;
            let mut w = Array1::<f64>::zeros(n_features);
            let mut b = 0.0f64;
            for _ in 0..epochs {
                let margin = x.dot(&w) + b;
                let prob = margin.mapv(|z| 1.0 / (1.0 + (-z).exp()));
                let err = &prob - &targets;
                let grad_w = x.t().dot(&err) / n;
                let grad_b = err.sum() / n;
                w.scaled_add(-learning_rate, &grad_w);
                b -= learning_rate * grad_b;
            }
            ModelParams::Linear { weights: w, bias: b }
        }
        ClassifierConfig::SgdHinge {
            learning_rate,
            epochs,
        } => {
            let targets: Vec<f64> = y
                .iter()
                .map(|l| if *l == positive_label { 1.0 } else { -1.0 })
                .collect();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut order: Vec<usize> = (0..x.nrows()).collect();
            let mut w = Array1::<f64>::zeros(n_features);
            let mut b = 0.0f64;
            for _ in 0..epochs {
                order.shuffle(&mut rng);
                for &i in &order {
                    let row = x.row(i);
                    let margin = targets[i] * (row.dot(&w) + b);
                    if margin < 1.0 {
                        w.scaled_add(learning_rate * targets[i], &row);
                        b += learning_rate * targets[i];
                    }
                }
            }
            ModelParams::Linear { weights: w, bias: b }
        }
    };

    Ok(ClassifierModel {
        positive_label,
        negative_label,
        n_features,
        params,
    })
}

impl ClassifierModel {
    pub fn positive_label(&self) -> &str {
        &self.positive_label
    }

    pub fn negative_label(&self) -> &str {
        &self.negative_label
    }

    /// Linear weights, when the model is linear.
    pub fn linear_parameters(&self) -> Option<(ArrayView1<'_, f64>, f64)> {
        match &self.params {
            ModelParams::Linear { weights, bias } => Some((weights.view(), *bias)),
            _ => None,
        }
    }

    /// One score per row: k-NN positive-neighbour fraction or linear margin.
    pub fn score(&self, x: ArrayView2<'_, f64>) -> Result<Vec<f64>> {
        if x.ncols() != self.n_features {
            return Err(Error::ShapeError {
                expected: self.n_features,
                got: x.ncols(),
            });
        }
        let scores = match &self.params {
            ModelParams::Knn {
                train,
                is_positive,
                k,
            } => {
                let query = NeighborQuery::new(train.view());
                let k_eff = (*k).min(train.nrows());
                x.outer_iter()
                    .map(|row| {
                        let hits = query
                            .k_nearest(row, k_eff, None)
                            .iter()
                            .filter(|(i, _)| is_positive[*i])
                            .count();
                        hits as f64 / k_eff as f64
                    })
                    .collect()
            }
            ModelParams::Linear { weights, bias } => {
                (x.dot(weights) + *bias).to_vec()
            }
        };
        Ok(scores)
    }

    /// Hard labels from the kind-specific decision threshold.
    pub fn predict(&self, x: ArrayView2<'_, f64>) -> Result<Vec<String>> {
        let threshold = match self.params {
            ModelParams::Knn { .. } => 0.5,
            ModelParams::Linear { .. } => 0.0,
        };
        Ok(self
            .score(x)?
            .into_iter()
            .map(|s| {
                if s > threshold {
                    self.positive_label.clone()
                } else {
                    self.negative_label.clone()
                }
            })
            .collect())
    }
}
