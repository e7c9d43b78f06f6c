//! Adversarially trained one-class detector.
//!
//! A reconstructor (autoencoder) and a classifier are trained on genuine
//! transactions only. Per batch the classifier first learns to tell real rows
//! (target 1) from their reconstructions (target 0); then the reconstructor
//! minimizes its reconstruction loss plus `-log C(R(X))` with the classifier
//! frozen. At inference a transaction is flagged when its score exceeds the
//! threshold.

use std::fmt;
use std::ops::Range;
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::data::{self, Class, FeatureStats, TransactionRecord, N_FEATURES};
use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use crate::nn::{
    self, bce_batch, reconstruction_loss, AdamConfig, AdamState, LayerSpec, LayerWeights, LossKind, Network,
};
use crate::persist;
use crate::rng;

pub const MODEL_KIND: &str = "detector";

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoreMode {
    /// `C(R(x))`
    #[default]
    ClassifyReconstructed,
    /// `C(x)`
    ClassifyRaw,
    /// `|C(R(x)) - 0.5| * 2`
    DistanceFromHalf,
}

impl ScoreMode {
    pub const ALL: [ScoreMode; 3] = [
        ScoreMode::ClassifyReconstructed,
        ScoreMode::ClassifyRaw,
        ScoreMode::DistanceFromHalf,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ScoreMode::ClassifyReconstructed => "classify_reconstructed",
            ScoreMode::ClassifyRaw => "classify_raw",
            ScoreMode::DistanceFromHalf => "distance_from_half",
        }
    }
}

impl fmt::Display for ScoreMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ScoreMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.replace('-', "_").as_str() {
            "classify_reconstructed" => Ok(ScoreMode::ClassifyReconstructed),
            "classify_raw" => Ok(ScoreMode::ClassifyRaw),
            "distance_from_half" => Ok(ScoreMode::DistanceFromHalf),
            other => Err(Error::Config(format!(
                "unknown score mode `{other}` (expected classify_reconstructed, classify_raw or distance_from_half)"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Architecture {
    pub reconstructor: Vec<LayerSpec>,
    pub classifier: Vec<LayerSpec>,
}

impl Default for Architecture {
    /// Encoder 28-16-8, decoder 8-16-28 and a 28-32-16-1 classifier, with
    /// batch norm and ReLU after every hidden linear layer.
    fn default() -> Self {
        Architecture {
            reconstructor: hidden_stack(&[N_FEATURES, 16, 8, 16, N_FEATURES], false),
            classifier: hidden_stack(&[N_FEATURES, 32, 16, 1], true),
        }
    }
}

/// Linear layers through `widths`, with BN + ReLU after every layer but the
/// last, and an optional final sigmoid.
pub fn hidden_stack(widths: &[usize], sigmoid: bool) -> Vec<LayerSpec> {
    let mut specs = Vec::new();
    for (i, w) in widths.windows(2).enumerate() {
        specs.push(LayerSpec::Linear {
            input: w[0],
            output: w[1],
        });
        if i + 2 < widths.len() {
            specs.push(LayerSpec::BatchNorm { dim: w[1] });
            specs.push(LayerSpec::Relu);
        }
    }
    if sigmoid {
        specs.push(LayerSpec::Sigmoid);
    }
    specs
}

impl Architecture {
    pub fn validate(&self) -> Result<()> {
        let (ri, ro) = nn::validate_specs(&self.reconstructor)?;
        if ri != N_FEATURES || ro != N_FEATURES {
            return Err(Error::Architecture(format!(
                "reconstructor must map {N_FEATURES} -> {N_FEATURES}, got {ri} -> {ro}"
            )));
        }
        let (ci, co) = nn::validate_specs(&self.classifier)?;
        if ci != N_FEATURES || co != 1 {
            return Err(Error::Architecture(format!(
                "classifier must map {N_FEATURES} -> 1, got {ci} -> {co}"
            )));
        }
        if self.classifier.last() != Some(&LayerSpec::Sigmoid) {
            return Err(Error::Architecture("classifier must end in a sigmoid".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub loss_kind: LossKind,
    pub threshold: f64,
    pub score_mode: ScoreMode,
    pub seed: u64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_epsilon: f64,
    /// Z-score inputs with training-set statistics before they reach either
    /// network. Off by default: the PCA features are used as delivered.
    #[serde(default)]
    pub standardize_inputs: bool,
    #[serde(default)]
    pub architecture: Architecture,
}

impl Default for TrainConfig {
    fn default() -> Self {
        let adam = AdamConfig::default();
        TrainConfig {
            epochs: 2,
            batch_size: 4096,
            learning_rate: adam.learning_rate,
            loss_kind: LossKind::L2,
            threshold: 0.7,
            score_mode: ScoreMode::ClassifyReconstructed,
            seed: 0,
            adam_beta1: adam.beta1,
            adam_beta2: adam.beta2,
            adam_epsilon: adam.epsilon,
            standardize_inputs: false,
            architecture: Architecture::default(),
        }
    }
}

impl TrainConfig {
    pub fn with_seed(seed: u64) -> Self {
        TrainConfig {
            seed,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.epochs < 1 {
            return Err(Error::Config("epochs must be at least 1".into()));
        }
        if self.batch_size < 2 {
            return Err(Error::Config("batch size must be at least 2".into()));
        }
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return Err(Error::Config(format!("threshold {} is outside (0, 1)", self.threshold)));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config("learning rate must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.adam_beta1) || !(0.0..1.0).contains(&self.adam_beta2) {
            return Err(Error::Config("Adam betas must lie in [0, 1)".into()));
        }
        if self.adam_epsilon <= 0.0 {
            return Err(Error::Config("Adam epsilon must be positive".into()));
        }
        self.architecture.validate()
    }

    fn adam(&self) -> AdamConfig {
        AdamConfig {
            learning_rate: self.learning_rate,
            beta1: self.adam_beta1,
            beta2: self.adam_beta2,
            epsilon: self.adam_epsilon,
        }
    }
}

/// Losses and classifier means for one training batch.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainStepReport {
    pub epoch: usize,
    pub batch: usize,
    /// Reconstruction loss.
    pub loss_reconstruction: f64,
    /// Reconstructor's adversarial term, `-log C(R(X))`.
    pub loss_reconstructor_adv: f64,
    /// Classifier loss, `-log C(X) - log(1 - C(R(X)))`.
    pub loss_classifier: f64,
    pub mean_c_real: f64,
    pub mean_c_reconstructed: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectionResult {
    pub score: f64,
    pub label: Class,
    pub threshold: f64,
    pub score_mode: ScoreMode,
}

/// Fraud iff `score > threshold`.
pub fn detect(score: f64, threshold: f64, score_mode: ScoreMode) -> DetectionResult {
    let label = if score > threshold { Class::Fraud } else { Class::Genuine };
    DetectionResult {
        score,
        label,
        threshold,
        score_mode,
    }
}

/// Row ranges of one epoch. A trailing partial batch is kept when it has at
/// least two rows (batch norm needs a batch variance).
pub fn batch_ranges(n: usize, batch_size: usize) -> Vec<Range<usize>> {
    let batch_size = batch_size.max(1);
    (0..n)
        .step_by(batch_size)
        .map(|start| start..(start + batch_size).min(n))
        .filter(|r| r.len() >= 2)
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct DetectorModel {
    pub reconstructor: Network,
    pub classifier: Network,
    pub config: TrainConfig,
    /// Fingerprint of the training rows (see [`data::fingerprint`]).
    pub data_fingerprint: String,
    pub input_scaling: Option<FeatureStats>,
    pub train_steps: u64,
}

impl DetectorModel {
    /// Freshly initialized, untrained networks.
    pub fn init(config: &TrainConfig) -> Result<Self> {
        config.validate()?;
        let mut rng_r = rng::stream(config.seed, "init.reconstructor");
        let mut rng_c = rng::stream(config.seed, "init.classifier");
        Ok(DetectorModel {
            reconstructor: nn::init_network_with(&config.architecture.reconstructor, &mut rng_r)?,
            classifier: nn::init_network_with(&config.architecture.classifier, &mut rng_c)?,
            config: config.clone(),
            data_fingerprint: String::new(),
            input_scaling: None,
            train_steps: 0,
        })
    }

    pub fn is_trained(&self) -> bool {
        self.train_steps > 0
    }

    fn scale_in(&self, x: &DenseMatrix) -> DenseMatrix {
        match &self.input_scaling {
            None => x.clone(),
            Some(stats) => {
                let mut out = x.clone();
                for r in 0..out.rows() {
                    let z = stats.standardize(out.row(r));
                    out.row_mut(r).copy_from_slice(&z);
                }
                out
            }
        }
    }

    fn scale_out(&self, z: DenseMatrix) -> DenseMatrix {
        match &self.input_scaling {
            None => z,
            Some(stats) => {
                let mut out = z;
                for r in 0..out.rows() {
                    let x = stats.unstandardize(out.row(r));
                    out.row_mut(r).copy_from_slice(&x);
                }
                out
            }
        }
    }

    fn check_batch(x: &DenseMatrix) -> Result<()> {
        if x.cols() != N_FEATURES {
            return Err(Error::Shape(format!(
                "transactions have {N_FEATURES} features, got {}",
                x.cols()
            )));
        }
        Ok(())
    }

    /// Eval-mode reconstruction of every row.
    pub fn reconstruct_batch(&self, x: &DenseMatrix) -> Result<DenseMatrix> {
        Self::check_batch(x)?;
        let z = self.reconstructor.predict(&self.scale_in(x))?;
        Ok(self.scale_out(z))
    }

    /// Eval-mode classifier probability per row.
    pub fn classify_batch(&self, x: &DenseMatrix) -> Result<Vec<f64>> {
        Self::check_batch(x)?;
        Ok(self.classifier.predict(&self.scale_in(x))?.into_vec())
    }

    pub fn score_batch(&self, x: &DenseMatrix, mode: ScoreMode) -> Result<Vec<f64>> {
        match mode {
            ScoreMode::ClassifyRaw => self.classify_batch(x),
            ScoreMode::ClassifyReconstructed => self.classify_batch(&self.reconstruct_batch(x)?),
            ScoreMode::DistanceFromHalf => Ok(self
                .classify_batch(&self.reconstruct_batch(x)?)?
                .into_iter()
                .map(|p| ((p - 0.5).abs() * 2.0).min(1.0))
                .collect()),
        }
    }

    /// Per-row mean squared reconstruction error.
    pub fn reconstruction_error_batch(&self, x: &DenseMatrix) -> Result<Vec<f64>> {
        let xr = self.reconstruct_batch(x)?;
        Ok(x.row_iter().zip(xr.row_iter()).map(|(a, b)| mean_squared_error(a, b)).collect())
    }

    pub fn reconstruct(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(self.reconstruct_batch(&single_row(x)?)?.into_vec())
    }

    pub fn classify(&self, x: &[f64]) -> Result<f64> {
        Ok(self.classify_batch(&single_row(x)?)?[0])
    }

    pub fn score(&self, x: &[f64], mode: ScoreMode) -> Result<f64> {
        Ok(self.score_batch(&single_row(x)?, mode)?[0])
    }

    /// Scores `x` with the configured mode and applies the configured threshold.
    pub fn detect(&self, x: &[f64]) -> Result<DetectionResult> {
        let mode = self.config.score_mode;
        Ok(detect(self.score(x, mode)?, self.config.threshold, mode))
    }

    /// Classifier update on one batch; the reconstructor is read but not
    /// changed. Returns `(loss, mean C(X), mean C(R(X)))`.
    pub fn classifier_step(&mut self, x: &DenseMatrix, adam: &mut AdamState) -> Result<(f64, f64, f64)> {
        let (rx, _) = self.reconstructor.forward_cached(x)?;
        let (c_real, cache_real) = self.classifier.forward_cached(x)?;
        let (loss_real, g_real) = bce_batch(&c_real, 1.0)?;
        let (c_fake, cache_fake) = self.classifier.forward_cached(&rx)?;
        let (loss_fake, g_fake) = bce_batch(&c_fake, 0.0)?;

        let mut grads = self.classifier.backward(&cache_real, &g_real)?;
        let grads_fake = self.classifier.backward(&cache_fake, &g_fake)?;
        grads.accumulate(&grads_fake)?;
        self.classifier.commit_batch_stats(&cache_real)?;
        self.classifier.commit_batch_stats(&cache_fake)?;
        adam.step(&mut self.classifier, &grads)?;
        Ok((loss_real + loss_fake, c_real.mean(), c_fake.mean()))
    }

    /// Reconstructor update on one batch with the classifier frozen. Returns
    /// `(reconstruction loss, adversarial loss)`.
    pub fn reconstructor_step(&mut self, x: &DenseMatrix, adam: &mut AdamState) -> Result<(f64, f64)> {
        let (rx, cache_r) = self.reconstructor.forward_cached(x)?;
        let (loss_rec, mut grad) = reconstruction_loss(self.config.loss_kind, &rx, x)?;
        let (c_fake, cache_c) = self.classifier.forward_cached(&rx)?;
        let (loss_adv, g_adv) = bce_batch(&c_fake, 1.0)?;
        let through_c = self.classifier.backward(&cache_c, &g_adv)?;
        grad.add_assign(&through_c.input)?;

        let grads = self.reconstructor.backward(&cache_r, &grad)?;
        self.reconstructor.commit_batch_stats(&cache_r)?;
        adam.step(&mut self.reconstructor, &grads)?;
        Ok((loss_rec, loss_adv))
    }

    pub fn to_file(&self) -> ModelFile {
        ModelFile {
            version: persist::MODEL_VERSION,
            kind: MODEL_KIND.to_string(),
            arch: ArchRecord {
                reconstructor: self.reconstructor.specs(),
                classifier: self.classifier.specs(),
            },
            weights: WeightsRecord {
                reconstructor: self.reconstructor.to_weights(),
                classifier: self.classifier.to_weights(),
            },
            train_config: self.config.clone(),
            seed: self.config.seed,
            data_fingerprint: self.data_fingerprint.clone(),
            input_scaling: self.input_scaling.clone(),
            train_steps: self.train_steps,
        }
    }

    pub fn from_file(file: ModelFile) -> Result<Self> {
        let corrupt = |e: Error| Error::Corrupt(e.to_string());
        let reconstructor = Network::from_parts(&file.arch.reconstructor, &file.weights.reconstructor).map_err(corrupt)?;
        let classifier = Network::from_parts(&file.arch.classifier, &file.weights.classifier).map_err(corrupt)?;
        let arch = Architecture {
            reconstructor: file.arch.reconstructor.clone(),
            classifier: file.arch.classifier.clone(),
        };
        arch.validate().map_err(corrupt)?;
        if file.train_config.architecture != arch {
            return Err(Error::Corrupt("train_config architecture disagrees with arch".into()));
        }
        if file.seed != file.train_config.seed {
            return Err(Error::Corrupt("seed disagrees with train_config".into()));
        }
        if let Some(s) = &file.input_scaling {
            if s.dim() != N_FEATURES || s.std.len() != N_FEATURES {
                return Err(Error::Corrupt("input scaling has the wrong width".into()));
            }
        }
        Ok(DetectorModel {
            reconstructor,
            classifier,
            config: file.train_config,
            data_fingerprint: file.data_fingerprint,
            input_scaling: file.input_scaling,
            train_steps: file.train_steps,
        })
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        persist::to_bytes(&self.to_file())
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        Self::from_file(persist::from_bytes(bytes, MODEL_KIND)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        persist::write(path, &self.to_file())
    }

    /// Loads a model; with `expected_fingerprint` set, refuses a model trained
    /// on other data.
    pub fn load(path: impl AsRef<Path>, expected_fingerprint: Option<&str>) -> Result<Self> {
        let model = Self::from_file(persist::read(path, MODEL_KIND)?)?;
        if let Some(expected) = expected_fingerprint {
            model.check_fingerprint(expected)?;
        }
        Ok(model)
    }

    pub fn check_fingerprint(&self, expected: &str) -> Result<()> {
        if self.data_fingerprint != expected {
            return Err(Error::Fingerprint {
                model: self.data_fingerprint.clone(),
                data: expected.to_string(),
            });
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArchRecord {
    pub reconstructor: Vec<LayerSpec>,
    pub classifier: Vec<LayerSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightsRecord {
    pub reconstructor: Vec<LayerWeights>,
    pub classifier: Vec<LayerWeights>,
}

/// On-disk detector model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub version: u64,
    pub kind: String,
    pub arch: ArchRecord,
    pub weights: WeightsRecord,
    pub train_config: TrainConfig,
    pub seed: u64,
    pub data_fingerprint: String,
    pub input_scaling: Option<FeatureStats>,
    pub train_steps: u64,
}

/// Trains on the records at `indices`, which must all be genuine.
pub fn train(
    records: &[TransactionRecord],
    indices: &[usize],
    config: &TrainConfig,
) -> Result<(DetectorModel, Vec<TrainStepReport>)> {
    train_with(records, indices, config, |_| {})
}

/// [`train`] with a callback invoked after every batch.
pub fn train_with(
    records: &[TransactionRecord],
    indices: &[usize],
    config: &TrainConfig,
    mut on_step: impl FnMut(&TrainStepReport),
) -> Result<(DetectorModel, Vec<TrainStepReport>)> {
    config.validate()?;
    if indices.is_empty() {
        return Err(Error::Input("training set is empty".into()));
    }
    if let Some(pos) = indices.iter().position(|&i| records[i].label.is_fraud()) {
        return Err(Error::FraudInTraining(pos));
    }
    let x = data::features_matrix(records, indices);
    let fingerprint = data::fingerprint(records, indices);
    train_matrix(&x, config, fingerprint, &mut on_step)
}

/// Trains on rows that the caller guarantees are genuine.
pub fn train_matrix(
    x: &DenseMatrix,
    config: &TrainConfig,
    data_fingerprint: String,
    on_step: &mut dyn FnMut(&TrainStepReport),
) -> Result<(DetectorModel, Vec<TrainStepReport>)> {
    config.validate()?;
    if x.cols() != N_FEATURES {
        return Err(Error::Shape(format!("expected {N_FEATURES} feature columns, got {}", x.cols())));
    }
    let ranges = batch_ranges(x.rows(), config.batch_size);
    if ranges.is_empty() {
        return Err(Error::Insufficient(format!(
            "{} training row(s) cannot form a batch of at least 2",
            x.rows()
        )));
    }

    let mut model = DetectorModel::init(config)?;
    model.data_fingerprint = data_fingerprint;
    if config.standardize_inputs {
        model.input_scaling = Some(FeatureStats::from_matrix(x)?);
    }
    let x = model.scale_in(x);

    let mut adam_c = AdamState::new(&model.classifier, config.adam());
    let mut adam_r = AdamState::new(&model.reconstructor, config.adam());
    let mut shuffle = rng::stream(config.seed, "shuffle");
    let mut order: Vec<usize> = (0..x.rows()).collect();
    let mut reports = Vec::with_capacity(config.epochs * ranges.len());

    for epoch in 0..config.epochs {
        order.shuffle(&mut shuffle);
        for (b, range) in ranges.iter().enumerate() {
            let batch = x.select_rows(&order[range.clone()]);
            let (loss_c, mean_real, mean_fake) = model.classifier_step(&batch, &mut adam_c)?;
            let (loss_rec, loss_adv) = model.reconstructor_step(&batch, &mut adam_r)?;
            model.train_steps += 1;
            let report = TrainStepReport {
                epoch,
                batch: b,
                loss_reconstruction: loss_rec,
                loss_reconstructor_adv: loss_adv,
                loss_classifier: loss_c,
                mean_c_real: mean_real,
                mean_c_reconstructed: mean_fake,
            };
            on_step(&report);
            reports.push(report);
        }
    }
    Ok((model, reports))
}

pub fn mean_squared_error(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().max(1) as f64;
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>() / n
}

fn single_row(x: &[f64]) -> Result<DenseMatrix> {
    if x.len() != N_FEATURES {
        return Err(Error::Shape(format!("transactions have {N_FEATURES} features, got {}", x.len())));
    }
    DenseMatrix::from_vec(1, N_FEATURES, x.to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthetic::{self, SyntheticConfig};

    fn small_config(seed: u64) -> TrainConfig {
        TrainConfig {
            epochs: 2,
            batch_size: 64,
            learning_rate: 1e-3,
            seed,
            ..Default::default()
        }
    }

    fn genuine(n: usize, seed: u64) -> Vec<TransactionRecord> {
        synthetic::generate(&SyntheticConfig::small(n, 0), seed)
    }

    #[test]
    fn default_architecture_shapes() {
        let a = Architecture::default();
        a.validate().unwrap();
        assert_eq!(nn::validate_specs(&a.reconstructor).unwrap(), (28, 28));
        assert_eq!(nn::validate_specs(&a.classifier).unwrap(), (28, 1));
        assert_eq!(a.reconstructor.iter().filter(|s| matches!(s, LayerSpec::BatchNorm { .. })).count(), 3);
        assert!(!a.reconstructor.contains(&LayerSpec::Sigmoid));
    }

    #[test]
    fn config_validation() {
        TrainConfig::default().validate().unwrap();
        for bad in [
            TrainConfig { threshold: 1.0, ..Default::default() },
            TrainConfig { threshold: 0.0, ..Default::default() },
            TrainConfig { batch_size: 1, ..Default::default() },
            TrainConfig { epochs: 0, ..Default::default() },
            TrainConfig { learning_rate: -1.0, ..Default::default() },
        ] {
            assert!(matches!(bad.validate(), Err(Error::Config(_))));
        }
    }

    #[test]
    fn paper_schedule_batch_count() {
        let ranges = batch_ranges(233_825, 4096);
        assert_eq!(ranges.len(), 58);
        assert_eq!(ranges.last().unwrap().len(), 233_825 - 57 * 4096);
        assert_eq!(batch_ranges(4097, 4096).len(), 1);
        assert_eq!(batch_ranges(4098, 4096).len(), 2);
        assert_eq!(batch_ranges(1, 4096).len(), 0);
        assert_eq!(batch_ranges(5, 4096), vec![0..5]);
    }

    #[test]
    fn detect_is_strict() {
        let m = ScoreMode::ClassifyReconstructed;
        assert_eq!(detect(0.71, 0.7, m).label, Class::Fraud);
        assert_eq!(detect(0.70, 0.7, m).label, Class::Genuine);
        assert_eq!(detect(0.50, 0.7, m).label, Class::Genuine);
    }

    #[test]
    fn untrained_model_is_deterministic() {
        let a = DetectorModel::init(&TrainConfig::with_seed(3)).unwrap();
        let b = DetectorModel::init(&TrainConfig::with_seed(3)).unwrap();
        let x: Vec<f64> = (0..28).map(|i| i as f64 * 0.1 - 1.0).collect();
        assert_eq!(a.reconstruct(&x).unwrap(), b.reconstruct(&x).unwrap());
        let p = a.classify(&x).unwrap();
        assert!(p > 0.0 && p < 1.0);
        assert_eq!(p, a.classify(&x).unwrap());
        assert!(a.reconstruct(&x[..27]).is_err());
        assert!(a.classify(&[0.0; 29]).is_err());
    }

    #[test]
    fn distance_from_half_range() {
        let m = DetectorModel::init(&TrainConfig::with_seed(1)).unwrap();
        let x = data::all_features(&genuine(50, 2));
        for v in m.score_batch(&x, ScoreMode::DistanceFromHalf).unwrap() {
            assert!((0.0..=1.0).contains(&v));
        }
        let c = m.score_batch(&x, ScoreMode::ClassifyReconstructed).unwrap();
        let d = m.score_batch(&x, ScoreMode::DistanceFromHalf).unwrap();
        for (c, d) in c.iter().zip(&d) {
            assert_eq!(*d, (c - 0.5).abs() * 2.0);
        }
    }

    #[test]
    fn rejects_fraud_in_training() {
        let records = synthetic::generate(&SyntheticConfig::small(50, 5), 1);
        let idx: Vec<usize> = (0..records.len()).collect();
        assert!(matches!(train(&records, &idx, &small_config(0)), Err(Error::FraudInTraining(_))));
        assert!(matches!(train(&records, &[], &small_config(0)), Err(Error::Input(_))));
    }

    #[test]
    fn training_reports_every_batch() {
        let records = genuine(300, 4);
        let idx: Vec<usize> = (0..300).collect();
        let (model, reports) = train(&records, &idx, &small_config(7)).unwrap();
        // 300 rows in batches of 64: four full batches and a 44-row tail
        assert_eq!(reports.len(), 2 * 5);
        assert_eq!(model.train_steps, 10);
        for r in &reports {
            assert!(r.loss_reconstruction >= 0.0 && r.loss_reconstructor_adv >= 0.0 && r.loss_classifier >= 0.0);
            assert!(r.mean_c_real > 0.0 && r.mean_c_real < 1.0);
            assert!(r.mean_c_reconstructed > 0.0 && r.mean_c_reconstructed < 1.0);
        }
        assert_eq!(model.data_fingerprint, data::fingerprint(&records, &idx));
    }

    #[test]
    fn adversarial_steps_are_isolated() {
        let records = genuine(128, 5);
        let x = data::all_features(&records);
        let mut model = DetectorModel::init(&small_config(1)).unwrap();
        let mut adam_c = AdamState::new(&model.classifier, AdamConfig::default());
        let mut adam_r = AdamState::new(&model.reconstructor, AdamConfig::default());

        let r_before = model.reconstructor.to_weights();
        let c_before = model.classifier.to_weights();
        model.classifier_step(&x, &mut adam_c).unwrap();
        assert_eq!(model.reconstructor.to_weights(), r_before);
        assert_ne!(model.classifier.to_weights(), c_before);

        let c_before = model.classifier.to_weights();
        model.reconstructor_step(&x, &mut adam_r).unwrap();
        assert_eq!(model.classifier.to_weights(), c_before);
        assert_ne!(model.reconstructor.to_weights(), r_before);
    }

    #[test]
    fn adversarial_term_at_half() {
        let half = DenseMatrix::from_vec(3, 1, vec![0.5; 3]).unwrap();
        let (v, _) = bce_batch(&half, 1.0).unwrap();
        assert!((v - std::f64::consts::LN_2).abs() < 1e-6);
    }

    #[test]
    fn same_seed_same_bytes() {
        let records = genuine(200, 6);
        let idx: Vec<usize> = (0..200).collect();
        let (a, _) = train(&records, &idx, &small_config(11)).unwrap();
        let (b, _) = train(&records, &idx, &small_config(11)).unwrap();
        assert_eq!(a.to_bytes().unwrap(), b.to_bytes().unwrap());
        let (c, _) = train(&records, &idx, &small_config(12)).unwrap();
        assert_ne!(a.to_bytes().unwrap(), c.to_bytes().unwrap());
    }

    #[test]
    fn model_file_round_trip_and_errors() {
        let records = genuine(100, 8);
        let idx: Vec<usize> = (0..100).collect();
        let cfg = TrainConfig {
            standardize_inputs: true,
            ..small_config(2)
        };
        let (model, _) = train(&records, &idx, &cfg).unwrap();
        let bytes = model.to_bytes().unwrap();
        let back = DetectorModel::from_bytes(&bytes).unwrap();
        assert_eq!(back, model);
        assert_eq!(back.to_bytes().unwrap(), bytes);

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.json");
        model.save(&path).unwrap();
        assert_eq!(DetectorModel::load(&path, Some(&model.data_fingerprint)).unwrap(), model);
        assert!(matches!(
            DetectorModel::load(&path, Some("deadbeef")),
            Err(Error::Fingerprint { .. })
        ));

        let truncated = &bytes[..bytes.len() / 2];
        assert!(matches!(DetectorModel::from_bytes(truncated), Err(Error::Corrupt(_))));

        let mut v: serde_json::Value = serde_json::from_slice(&bytes).unwrap();
        v["version"] = 999.into();
        let future = serde_json::to_vec(&v).unwrap();
        assert!(matches!(
            DetectorModel::from_bytes(&future),
            Err(Error::Version { found: 999, .. })
        ));

        let mut v: serde_json::Value = serde_json::from_slice(&bytes).unwrap();
        v["weights"]["classifier"][0]["bias"] = serde_json::json!([1.0]);
        assert!(matches!(
            DetectorModel::from_bytes(&serde_json::to_vec(&v).unwrap()),
            Err(Error::Corrupt(_))
        ));
    }
}
