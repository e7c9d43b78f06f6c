//! One-class comparators: k-nearest-neighbour distance (OCNN) and a plain
//! reconstruction-error autoencoder. Both flag a transaction when its score
//! is strictly above a threshold calibrated for MCC on a small labelled set.

use std::path::Path;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::data::{self, Class, TransactionRecord, N_FEATURES};
use crate::detector::{batch_ranges, hidden_stack, mean_squared_error};
use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use crate::metrics::{confusion_at, metric_report};
use crate::nn::{AdamConfig, AdamState};
use crate::nn::{reconstruction_loss, LossKind};
use crate::nn::{self, LayerSpec, LayerWeights, Network};
use crate::persist;
use crate::rng;

pub const OCNN_KIND: &str = "ocnn";
pub const AE_BASELINE_KIND: &str = "ae_baseline";
pub const DEFAULT_K: usize = 5;
pub const DEFAULT_TRAIN_SIZE: usize = 700;
pub const EVAL_PER_CLASS: usize = 25;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BaselineMethod {
    Ocnn,
    Ae,
}

impl BaselineMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            BaselineMethod::Ocnn => "ocnn",
            BaselineMethod::Ae => "ae",
        }
    }
}

impl std::str::FromStr for BaselineMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ocnn" => Ok(BaselineMethod::Ocnn),
            "ae" | "autoencoder" => Ok(BaselineMethod::Ae),
            other => Err(Error::Config(format!("unknown baseline `{other}` (expected ocnn or ae)"))),
        }
    }
}

fn check_genuine(records: &[TransactionRecord], indices: &[usize]) -> Result<()> {
    if let Some(pos) = indices.iter().position(|&i| records[i].label.is_fraud()) {
        return Err(Error::FraudInTraining(pos));
    }
    Ok(())
}

/// Euclidean distance, summed in feature order.
pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OcnnModel {
    pub k: usize,
    pub points: DenseMatrix,
    pub threshold: Option<f64>,
    pub data_fingerprint: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct OcnnFile {
    version: u64,
    kind: String,
    #[serde(flatten)]
    model: OcnnModel,
}

impl OcnnModel {
    pub fn fit(points: DenseMatrix, k: usize) -> Result<Self> {
        if points.rows() == 0 {
            return Err(Error::Input("OCNN needs at least one training point".into()));
        }
        if k < 1 || k > points.rows() {
            return Err(Error::Config(format!("k must be within 1..={}, got {k}", points.rows())));
        }
        Ok(OcnnModel {
            k,
            points,
            threshold: None,
            data_fingerprint: String::new(),
        })
    }

    /// Fits on the genuine records at `indices`.
    pub fn fit_records(records: &[TransactionRecord], indices: &[usize], k: usize) -> Result<Self> {
        check_genuine(records, indices)?;
        let mut model = Self::fit(data::features_matrix(records, indices), k)?;
        model.data_fingerprint = data::fingerprint(records, indices);
        Ok(model)
    }

    /// Mean distance to the `k` nearest training points. Ties at the k-th
    /// distance go to the lower training index; the selected distances are
    /// summed in ascending order.
    pub fn score(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.points.cols() {
            return Err(Error::Shape(format!(
                "query has {} features, model has {}",
                x.len(),
                self.points.cols()
            )));
        }
        let mut d: Vec<(f64, usize)> = self.points.row_iter().map(|p| euclidean(x, p)).zip(0..).collect();
        let by_distance = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        if self.k < d.len() {
            d.select_nth_unstable_by(self.k - 1, by_distance);
            d.truncate(self.k);
        }
        d.sort_by(by_distance);
        Ok(d.iter().map(|(v, _)| v).sum::<f64>() / self.k as f64)
    }

    pub fn score_batch(&self, x: &DenseMatrix) -> Result<Vec<f64>> {
        x.row_iter().map(|r| self.score(r)).collect()
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        persist::write(
            path,
            &OcnnFile {
                version: persist::MODEL_VERSION,
                kind: OCNN_KIND.into(),
                model: self.clone(),
            },
        )
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let file: OcnnFile = persist::read(path, OCNN_KIND)?;
        Self::fit(file.model.points.clone(), file.model.k).map_err(|e| Error::Corrupt(e.to_string()))?;
        Ok(file.model)
    }
}

/// Threshold maximizing MCC of `score > threshold` on a labelled set.
///
/// Candidates are half the smallest score (flag everything), every midpoint
/// between consecutive distinct scores, and the largest score (flag
/// nothing). Ties go to the smaller threshold. Returns `(threshold, mcc)`.
pub fn calibrate_threshold(scores: &[f64], labels: &[Class]) -> Result<(f64, f64)> {
    if scores.len() != labels.len() {
        return Err(Error::Input(format!("{} scores for {} labels", scores.len(), labels.len())));
    }
    let frauds = labels.iter().filter(|l| l.is_fraud()).count();
    if frauds == 0 || frauds == labels.len() {
        return Err(Error::Input("calibration set needs both classes".into()));
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::Input("scores must be finite".into()));
    }
    let mut distinct = scores.to_vec();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();

    let mut candidates = Vec::with_capacity(distinct.len() + 1);
    if distinct[0] > 0.0 {
        candidates.push(distinct[0] / 2.0);
    }
    candidates.extend(distinct.windows(2).map(|w| w[0] + (w[1] - w[0]) / 2.0));
    candidates.push(distinct[distinct.len() - 1]);

    let mut best = (candidates[0], f64::NEG_INFINITY);
    for t in candidates {
        let mcc = metric_report(&confusion_at(scores, labels, t)?).mcc;
        if mcc > best.1 {
            best = (t, mcc);
        }
    }
    Ok(best)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AeBaselineConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub loss_kind: LossKind,
    pub seed: u64,
    pub architecture: Vec<LayerSpec>,
}

impl Default for AeBaselineConfig {
    fn default() -> Self {
        AeBaselineConfig {
            epochs: 100,
            batch_size: 32,
            learning_rate: 1e-3,
            loss_kind: LossKind::L2,
            seed: 0,
            architecture: hidden_stack(&[N_FEATURES, 16, 8, 16, N_FEATURES], false),
        }
    }
}

impl AeBaselineConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 || self.batch_size < 2 {
            return Err(Error::Config("epochs must be ≥ 1 and batch size ≥ 2".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config("learning rate must be positive".into()));
        }
        let (i, o) = nn::validate_specs(&self.architecture)?;
        if i != N_FEATURES || o != N_FEATURES {
            return Err(Error::Architecture(format!("autoencoder must map {N_FEATURES} -> {N_FEATURES}")));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AeBaseline {
    pub network: Network,
    pub config: AeBaselineConfig,
    pub threshold: Option<f64>,
    pub data_fingerprint: String,
    pub train_steps: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct AeBaselineFile {
    version: u64,
    kind: String,
    arch: Vec<LayerSpec>,
    weights: Vec<LayerWeights>,
    config: AeBaselineConfig,
    threshold: Option<f64>,
    data_fingerprint: String,
    train_steps: u64,
}

impl AeBaseline {
    /// Reconstruction-only training on the genuine records at `indices`.
    pub fn train(records: &[TransactionRecord], indices: &[usize], cfg: &AeBaselineConfig) -> Result<Self> {
        check_genuine(records, indices)?;
        let mut model = Self::train_matrix(&data::features_matrix(records, indices), cfg)?;
        model.data_fingerprint = data::fingerprint(records, indices);
        Ok(model)
    }

    pub fn train_matrix(x: &DenseMatrix, cfg: &AeBaselineConfig) -> Result<Self> {
        cfg.validate()?;
        let ranges = batch_ranges(x.rows(), cfg.batch_size);
        if ranges.is_empty() {
            return Err(Error::Insufficient(format!("{} training row(s) cannot form a batch", x.rows())));
        }
        let mut init = rng::stream(cfg.seed, "baseline.ae.init");
        let mut network = nn::init_network_with(&cfg.architecture, &mut init)?;
        let mut adam = AdamState::new(
            &network,
            AdamConfig {
                learning_rate: cfg.learning_rate,
                beta1: 0.9,
                ..AdamConfig::default()
            },
        );
        let mut shuffle = rng::stream(cfg.seed, "baseline.ae.shuffle");
        let mut order: Vec<usize> = (0..x.rows()).collect();
        let mut steps = 0;
        for _ in 0..cfg.epochs {
            order.shuffle(&mut shuffle);
            for range in &ranges {
                let batch = x.select_rows(&order[range.clone()]);
                let (out, cache) = network.forward_cached(&batch)?;
                let (_, grad) = reconstruction_loss(cfg.loss_kind, &out, &batch)?;
                let grads = network.backward(&cache, &grad)?;
                network.commit_batch_stats(&cache)?;
                adam.step(&mut network, &grads)?;
                steps += 1;
            }
        }
        Ok(AeBaseline {
            network,
            config: cfg.clone(),
            threshold: None,
            data_fingerprint: String::new(),
            train_steps: steps,
        })
    }

    /// Mean squared reconstruction error per row.
    pub fn score_batch(&self, x: &DenseMatrix) -> Result<Vec<f64>> {
        let xr = self.network.predict(x)?;
        Ok(x.row_iter().zip(xr.row_iter()).map(|(a, b)| mean_squared_error(a, b)).collect())
    }

    pub fn score(&self, x: &[f64]) -> Result<f64> {
        Ok(self.score_batch(&DenseMatrix::from_vec(1, x.len(), x.to_vec())?)?[0])
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        persist::write(
            path,
            &AeBaselineFile {
                version: persist::MODEL_VERSION,
                kind: AE_BASELINE_KIND.into(),
                arch: self.network.specs(),
                weights: self.network.to_weights(),
                config: self.config.clone(),
                threshold: self.threshold,
                data_fingerprint: self.data_fingerprint.clone(),
                train_steps: self.train_steps,
            },
        )
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let file: AeBaselineFile = persist::read(path, AE_BASELINE_KIND)?;
        let network = Network::from_parts(&file.arch, &file.weights).map_err(|e| Error::Corrupt(e.to_string()))?;
        Ok(AeBaseline {
            network,
            config: file.config,
            threshold: file.threshold,
            data_fingerprint: file.data_fingerprint,
            train_steps: file.train_steps,
        })
    }
}

/// Index sets used by a baseline run: a genuine training sample drawn from
/// the detector's training pool and a balanced calibration set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BaselineSample {
    pub train: Vec<usize>,
    pub eval: Vec<usize>,
}

/// Draws `train_size` genuine rows from `split.train` and `eval_per_class`
/// rows of each class for calibration. Calibration genuine rows avoid the
/// baseline training rows and the test set. Calibration fraud rows come from
/// every fraud record, since the test set already holds nearly all of them.
pub fn sample_baseline_sets(
    records: &[TransactionRecord],
    split: &data::DataSplit,
    train_size: usize,
    eval_per_class: usize,
    seed: u64,
) -> Result<BaselineSample> {
    let mut rng = rng::stream(seed, "baseline.sample");
    let train_pool: std::collections::BTreeSet<usize> = split.train.iter().copied().collect();
    let outside_pool: std::collections::BTreeSet<usize> =
        (0..records.len()).filter(|i| !train_pool.contains(i)).collect();
    let train = data::sample_subset(records, Class::Genuine, train_size, &outside_pool, &mut rng)?;

    let mut exclude = outside_pool;
    exclude.extend(&train);
    let mut eval = data::sample_subset(records, Class::Genuine, eval_per_class, &exclude, &mut rng)?;
    eval.extend(data::sample_subset(records, Class::Fraud, eval_per_class, &Default::default(), &mut rng)?);
    eval.sort_unstable();
    Ok(BaselineSample { train, eval })
}
