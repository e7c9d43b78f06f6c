//! Subcommands of the `fraudlens` binary.
//!
//! Each command reads the CSV, writes its artifacts under `--out` and logs a
//! short human-readable summary. Artifacts are written to a temporary name and
//! renamed into place, so a failed run never leaves a half-written file.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::baselines::{
    calibrate_threshold, sample_baseline_sets, AeBaseline, AeBaselineConfig, BaselineMethod, OcnnModel,
    DEFAULT_K, DEFAULT_TRAIN_SIZE, EVAL_PER_CLASS,
};
use crate::data::{self, Class, SplitManifest, TransactionRecord, TEST_PER_CLASS};
use crate::detector::{self, DetectorModel, ScoreMode, TrainConfig, TrainStepReport};
use crate::error::{Error, Result};
use crate::explain::{self, ExplainConfig, ExplainerKind, ReferenceSet, SamplingScheme};
use crate::metrics::{confusion_at, roc_auc, ConfusionMatrix, MetricReport, RocCurve};
use crate::nn::LossKind;

pub const MANIFEST_FILE: &str = "split_manifest.json";
pub const MODEL_FILE: &str = "model.json";
pub const TRAIN_LOG_FILE: &str = "train_log.csv";

#[derive(Debug, Parser)]
#[command(name = "fraudlens", version, about = "Adversarial one-class fraud detection with local explanations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Cut the balanced test set and the genuine-only training set.
    Split(SplitArgs),
    /// Train the reconstructor/classifier pair on the training split.
    Train(TrainArgs),
    /// Score the test set; write metrics and the ROC curve.
    Eval(EvalArgs),
    /// Explain one test transaction with the AE, C or general explainer.
    Explain(ExplainArgs),
    /// Train, calibrate and evaluate the OCNN or plain autoencoder baseline.
    Baseline(BaselineArgs),
    /// Compare the three reconstruction losses across seeds.
    Ablation(AblationArgs),
}

#[derive(Debug, Clone, Args)]
pub struct DataArgs {
    /// Benchmark CSV (Time, V1..V28, Amount, Class).
    #[arg(long, env = "FRAUDLENS_DATA")]
    pub data: PathBuf,
    /// Output directory, created if missing.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct SplitArgs {
    #[command(flatten)]
    pub io: DataArgs,
    #[arg(long)]
    pub seed: u64,
    /// Test cases per class.
    #[arg(long, default_value_t = TEST_PER_CLASS)]
    pub per_class: usize,
}

#[derive(Debug, Clone, Args)]
pub struct TrainOverrides {
    #[arg(long, default_value_t = 2)]
    pub epochs: usize,
    #[arg(long = "batch", default_value_t = 4096)]
    pub batch_size: usize,
    #[arg(long = "lr", default_value_t = 2e-4)]
    pub learning_rate: f64,
    #[arg(long = "loss", default_value = "l2")]
    pub loss_kind: LossKind,
    #[arg(long, default_value_t = 0.7)]
    pub threshold: f64,
    #[arg(long, default_value = "classify_reconstructed")]
    pub score_mode: ScoreMode,
    #[arg(long, default_value_t = 0.5)]
    pub adam_beta1: f64,
    #[arg(long, default_value_t = 0.999)]
    pub adam_beta2: f64,
    #[arg(long, default_value_t = 1e-8)]
    pub adam_epsilon: f64,
    /// Z-score inputs with training-set statistics.
    #[arg(long)]
    pub standardize: bool,
}

impl Default for TrainOverrides {
    fn default() -> Self {
        let d = TrainConfig::default();
        TrainOverrides {
            epochs: d.epochs,
            batch_size: d.batch_size,
            learning_rate: d.learning_rate,
            loss_kind: d.loss_kind,
            threshold: d.threshold,
            score_mode: d.score_mode,
            adam_beta1: d.adam_beta1,
            adam_beta2: d.adam_beta2,
            adam_epsilon: d.adam_epsilon,
            standardize: d.standardize_inputs,
        }
    }
}

impl TrainOverrides {
    pub fn config(&self, seed: u64) -> TrainConfig {
        TrainConfig {
            epochs: self.epochs,
            batch_size: self.batch_size,
            learning_rate: self.learning_rate,
            loss_kind: self.loss_kind,
            threshold: self.threshold,
            score_mode: self.score_mode,
            seed,
            adam_beta1: self.adam_beta1,
            adam_beta2: self.adam_beta2,
            adam_epsilon: self.adam_epsilon,
            standardize_inputs: self.standardize,
            architecture: Default::default(),
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub io: DataArgs,
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long)]
    pub seed: u64,
    #[command(flatten)]
    pub train: TrainOverrides,
}

#[derive(Debug, Clone, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub io: DataArgs,
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long)]
    pub model: PathBuf,
    /// Defaults to the threshold stored in the model.
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Defaults to the score mode stored in the model.
    #[arg(long)]
    pub score_mode: Option<ScoreMode>,
    /// Comma-separated thresholds; one metrics row each.
    #[arg(long, value_delimiter = ',')]
    pub sweep: Vec<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct ExplainArgs {
    #[command(flatten)]
    pub io: DataArgs,
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long)]
    pub model: PathBuf,
    /// Position in the test set; defaults to its first fraud case.
    #[arg(long)]
    pub instance: Option<usize>,
    /// Comma-separated explainers (ae, c, general); all three by default.
    #[arg(long, value_delimiter = ',', default_value = "ae,c,general")]
    pub kind: Vec<ExplainerKind>,
    #[arg(long, default_value_t = explain::DEFAULT_SAMPLES)]
    pub samples: usize,
    #[arg(long, default_value_t = explain::DEFAULT_TOP_K)]
    pub topk: usize,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value_t = explain::default_kernel_width())]
    pub kernel_width: f64,
    #[arg(long, default_value_t = 1.0)]
    pub ridge_lambda: f64,
    #[arg(long, default_value = "gaussian", value_parser = parse_sampling)]
    pub sampling: SamplingScheme,
    /// Score explained by the general explainer; defaults to the model's.
    #[arg(long)]
    pub score_mode: Option<ScoreMode>,
    /// Skip the SVG chart.
    #[arg(long)]
    pub no_svg: bool,
}

fn parse_sampling(s: &str) -> std::result::Result<SamplingScheme, String> {
    match s {
        "gaussian" => Ok(SamplingScheme::Gaussian),
        "bootstrap" => Ok(SamplingScheme::Bootstrap),
        _ => Err(format!("unknown sampling `{s}` (expected gaussian or bootstrap)")),
    }
}

#[derive(Debug, Clone, Args)]
pub struct BaselineArgs {
    #[command(flatten)]
    pub io: DataArgs,
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long)]
    pub method: BaselineMethod,
    #[arg(long, default_value_t = DEFAULT_K)]
    pub k: usize,
    #[arg(long, default_value_t = DEFAULT_TRAIN_SIZE)]
    pub train_size: usize,
    #[arg(long)]
    pub seed: u64,
    /// Autoencoder baseline epochs.
    #[arg(long, default_value_t = 100)]
    pub epochs: usize,
    #[arg(long = "batch", default_value_t = 32)]
    pub batch_size: usize,
    #[arg(long = "lr", default_value_t = 1e-3)]
    pub learning_rate: f64,
}

#[derive(Debug, Clone, Args)]
pub struct AblationArgs {
    #[command(flatten)]
    pub io: DataArgs,
    #[arg(long)]
    pub manifest: PathBuf,
    /// Comma-separated seeds; one training run per loss and seed.
    #[arg(long, value_delimiter = ',', required = true)]
    pub seeds: Vec<u64>,
    #[command(flatten)]
    pub train: TrainOverrides,
}

/// Writes `bytes` to `dir/name` through a temporary file.
pub fn write_artifact(dir: &Path, name: &str, bytes: &[u8]) -> Result<PathBuf> {
    let path = dir.join(name);
    let tmp = dir.join(format!(".{name}.tmp"));
    fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, &path).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

fn create_out(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn load(path: &Path, log: &mut dyn Write) -> Result<Vec<TransactionRecord>> {
    let (records, schema) = data::load_csv(path)?;
    let _ = writeln!(
        log,
        "loaded {} records ({} genuine, {} fraud) from {}",
        schema.row_count,
        schema.class_counts[0],
        schema.class_counts[1],
        path.display()
    );
    Ok(records)
}

fn load_with_manifest(io: &DataArgs, manifest: &Path, log: &mut dyn Write) -> Result<(Vec<TransactionRecord>, SplitManifest)> {
    let manifest = SplitManifest::read(manifest)?;
    let records = load(&io.data, log)?;
    manifest.verify(&records)?;
    Ok((records, manifest))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitOutcome {
    pub genuine: usize,
    pub fraud: usize,
    pub train: usize,
    pub test: usize,
    pub discarded: usize,
    pub manifest: PathBuf,
}

pub fn split(args: &SplitArgs, log: &mut dyn Write) -> Result<SplitOutcome> {
    let records = load(&args.io.data, log)?;
    let s = data::split_balanced(&records, args.per_class, args.seed)?;
    let manifest = SplitManifest::new(&records, &s);
    create_out(&args.io.out)?;
    let path = write_artifact(&args.io.out, MANIFEST_FILE, manifest.to_json()?.as_bytes())?;
    let [genuine, fraud] = manifest.schema.class_counts;
    let out = SplitOutcome {
        genuine,
        fraud,
        train: s.train.len(),
        test: s.test.len(),
        discarded: s.discarded.len(),
        manifest: path,
    };
    let _ = writeln!(
        log,
        "training {} genuine; test {} ({} per class); discarded {} fraud",
        out.train, out.test, args.per_class, out.discarded
    );
    if genuine == 284_315 {
        let _ = writeln!(
            log,
            "note: this file has 284,315 genuine rows; the figures 234,315 genuine and 233,825 training \
             that circulate for this dataset do not match it, so counts here come from the file"
        );
    }
    let _ = writeln!(log, "wrote {}", out.manifest.display());
    Ok(out)
}

pub const TRAIN_LOG_HEADER: &str =
    "epoch,batch,loss_reconstruction,loss_reconstructor_adv,loss_classifier,mean_c_real,mean_c_reconstructed";

pub fn train_log_csv(reports: &[TrainStepReport]) -> String {
    let mut s = String::from(TRAIN_LOG_HEADER);
    s.push('\n');
    for r in reports {
        s.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.epoch,
            r.batch,
            r.loss_reconstruction,
            r.loss_reconstructor_adv,
            r.loss_classifier,
            r.mean_c_real,
            r.mean_c_reconstructed
        ));
    }
    s
}

#[derive(Clone, Debug)]
pub struct TrainOutcome {
    pub model: DetectorModel,
    pub reports: Vec<TrainStepReport>,
    pub model_path: PathBuf,
    pub log_path: PathBuf,
}

pub fn train(args: &TrainArgs, log: &mut dyn Write) -> Result<TrainOutcome> {
    let cfg = args.train.config(args.seed);
    cfg.validate()?;
    let (records, manifest) = load_with_manifest(&args.io, &args.manifest, log)?;
    let n_batches = detector::batch_ranges(manifest.train_indices.len(), cfg.batch_size).len();
    let _ = writeln!(
        log,
        "training on {} rows: {} epoch(s) x {} batch(es), loss {}",
        manifest.train_indices.len(),
        cfg.epochs,
        n_batches,
        cfg.loss_kind
    );
    let (model, reports) = detector::train(&records, &manifest.train_indices, &cfg)?;
    if let Some(last) = reports.last() {
        let _ = writeln!(
            log,
            "final batch: reconstruction {:.6}, C(x) {:.4}, C(R(x)) {:.4}",
            last.loss_reconstruction, last.mean_c_real, last.mean_c_reconstructed
        );
    }
    create_out(&args.io.out)?;
    let model_path = write_artifact(&args.io.out, MODEL_FILE, &model.to_bytes()?)?;
    let log_path = write_artifact(&args.io.out, TRAIN_LOG_FILE, train_log_csv(&reports).as_bytes())?;
    let _ = writeln!(log, "wrote {} and {}", model_path.display(), log_path.display());
    Ok(TrainOutcome {
        model,
        reports,
        model_path,
        log_path,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub threshold: f64,
    pub confusion: ConfusionMatrix,
    pub metrics: MetricReport,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoreSummary {
    pub fraud_median: f64,
    pub genuine_median: f64,
    pub genuine_p90: f64,
}

/// Nearest-rank quantile of `values`.
pub fn quantile(values: &[f64], q: f64) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    if v.is_empty() {
        return f64::NAN;
    }
    let rank = ((q * v.len() as f64).ceil() as usize).clamp(1, v.len());
    v[rank - 1]
}

pub fn score_summary(scores: &[f64], labels: &[Class]) -> ScoreSummary {
    let pick = |fraud: bool| -> Vec<f64> {
        scores
            .iter()
            .zip(labels)
            .filter(|(_, l)| l.is_fraud() == fraud)
            .map(|(s, _)| *s)
            .collect()
    };
    let (f, g) = (pick(true), pick(false));
    ScoreSummary {
        fraud_median: quantile(&f, 0.5),
        genuine_median: quantile(&g, 0.5),
        genuine_p90: quantile(&g, 0.9),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub n_test: usize,
    pub score_mode: ScoreMode,
    pub threshold: f64,
    pub confusion: ConfusionMatrix,
    pub metrics: MetricReport,
    pub auc: f64,
    pub auc_by_score_mode: BTreeMap<String, f64>,
    pub scores: ScoreSummary,
    pub sweep: Vec<SweepRow>,
}

/// Metrics of a trained detector on the test rows.
pub fn evaluate(
    model: &DetectorModel,
    records: &[TransactionRecord],
    test: &[usize],
    threshold: f64,
    mode: ScoreMode,
    sweep: &[f64],
) -> Result<(EvalReport, RocCurve)> {
    let x = data::features_matrix(records, test);
    let labels: Vec<Class> = test.iter().map(|&i| records[i].label).collect();
    let mut auc_by_score_mode = BTreeMap::new();
    let mut main = None;
    for m in ScoreMode::ALL {
        let scores = model.score_batch(&x, m)?;
        let roc = roc_auc(&scores, &labels)?;
        auc_by_score_mode.insert(m.as_str().to_string(), roc.auc);
        if m == mode {
            main = Some((scores, roc));
        }
    }
    let (scores, roc) = main.expect("score mode is one of ALL");
    let confusion = confusion_at(&scores, &labels, threshold)?;
    let sweep = sweep
        .iter()
        .map(|&t| {
            let cm = confusion_at(&scores, &labels, t)?;
            Ok(SweepRow {
                threshold: t,
                confusion: cm,
                metrics: cm.report(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let report = EvalReport {
        n_test: test.len(),
        score_mode: mode,
        threshold,
        confusion,
        metrics: confusion.report(),
        auc: roc.auc,
        auc_by_score_mode,
        scores: score_summary(&scores, &labels),
        sweep,
    };
    Ok((report, roc))
}

fn metrics_csv(rows: &[(f64, MetricReport)]) -> String {
    let mut s = format!("threshold,{}\n", MetricReport::CSV_HEADER);
    for (t, m) in rows {
        s.push_str(&format!("{t},{}\n", m.csv_row()));
    }
    s
}

pub fn eval(args: &EvalArgs, log: &mut dyn Write) -> Result<EvalReport> {
    let (records, manifest) = load_with_manifest(&args.io, &args.manifest, log)?;
    let model = DetectorModel::load(&args.model, Some(&manifest.train_fingerprint))?;
    let threshold = args.threshold.unwrap_or(model.config.threshold);
    let mode = args.score_mode.unwrap_or(model.config.score_mode);
    let (report, roc) = evaluate(&model, &records, &manifest.test_indices, threshold, mode, &args.sweep)?;

    let rows: Vec<(f64, MetricReport)> = if report.sweep.is_empty() {
        vec![(threshold, report.metrics)]
    } else {
        report.sweep.iter().map(|r| (r.threshold, r.metrics)).collect()
    };
    create_out(&args.io.out)?;
    write_artifact(&args.io.out, "metrics.json", (serde_json::to_string_pretty(&report)? + "\n").as_bytes())?;
    write_artifact(&args.io.out, "metrics.csv", metrics_csv(&rows).as_bytes())?;
    write_artifact(&args.io.out, "roc.csv", roc.to_csv().as_bytes())?;
    let m = &report.metrics;
    let _ = writeln!(
        log,
        "{} at {}: accuracy {:.4} precision {:.4} recall {:.4} f1 {:.4} mcc {:.4}",
        mode, threshold, m.accuracy, m.precision, m.recall, m.f1, m.mcc
    );
    for (name, auc) in &report.auc_by_score_mode {
        let _ = writeln!(log, "AUC ({name}): {auc:.4}");
    }
    Ok(report)
}

/// One explainer's output for the CLI.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExplanationReport {
    pub test_position: usize,
    pub record_index: usize,
    pub label: Class,
    /// True when the explained vector is the transaction's reconstruction.
    pub reconstructed: bool,
    pub top_k: usize,
    pub explanation: explain::Explanation,
}

pub fn explain(args: &ExplainArgs, log: &mut dyn Write) -> Result<Vec<ExplanationReport>> {
    if args.kind.is_empty() {
        return Err(Error::Config("no explainer selected".into()));
    }
    let (records, manifest) = load_with_manifest(&args.io, &args.manifest, log)?;
    let model = DetectorModel::load(&args.model, Some(&manifest.train_fingerprint))?;
    let test = &manifest.test_indices;
    let position = match args.instance {
        Some(p) if p < test.len() => p,
        Some(p) => {
            return Err(Error::Input(format!("instance {p} is outside the {}-case test set", test.len())));
        }
        None => test
            .iter()
            .position(|&i| records[i].label.is_fraud())
            .ok_or_else(|| Error::Input("test set holds no fraud case".into()))?,
    };
    let record_index = test[position];
    let transaction = records[record_index].features.to_vec();
    let cfg = ExplainConfig {
        n_samples: args.samples,
        kernel_width: args.kernel_width,
        ridge_lambda: args.ridge_lambda,
        sampling: args.sampling,
        score_mode: args.score_mode.unwrap_or(model.config.score_mode),
        seed: args.seed,
        expected_fingerprint: Some(manifest.train_fingerprint.clone()),
    };
    cfg.validate()?;
    let reference = ReferenceSet::new(data::features_matrix(&records, test))?;
    let reconstructed = if args.kind.contains(&ExplainerKind::C) {
        Some(reference.reconstructed(&model)?)
    } else {
        None
    };

    let mut reports = Vec::new();
    for &kind in &args.kind {
        let full = explain::explain_transaction(
            kind,
            &model,
            &transaction,
            &reference,
            reconstructed.as_ref().unwrap_or(&reference),
            &cfg,
        )?;
        let shown = explain::top_k(&full, args.topk)?;
        reports.push(ExplanationReport {
            test_position: position,
            record_index,
            label: records[record_index].label,
            reconstructed: kind == ExplainerKind::C,
            top_k: args.topk,
            explanation: shown,
        });
    }

    create_out(&args.io.out)?;
    for r in &reports {
        let kind = r.explanation.kind;
        let stem = format!("explanation_{kind}");
        write_artifact(&args.io.out, &format!("{stem}.json"), (serde_json::to_string_pretty(r)? + "\n").as_bytes())?;
        write_artifact(&args.io.out, &format!("{stem}.txt"), r.explanation.to_text().as_bytes())?;
        if !args.no_svg {
            write_artifact(&args.io.out, &format!("{stem}.svg"), r.explanation.to_svg().as_bytes())?;
        }
        let top: Vec<&str> = r.explanation.entries.iter().map(|e| e.feature.as_str()).collect();
        let _ = writeln!(
            log,
            "{kind}: predicted {:.6}, fidelity {:.4}, top {}",
            r.explanation.predicted_value,
            r.explanation.fidelity,
            top.join(" ")
        );
    }
    Ok(reports)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BaselineReport {
    pub method: BaselineMethod,
    pub k: Option<usize>,
    pub train_size: usize,
    pub calibration_size: usize,
    pub threshold: f64,
    pub calibration_mcc: f64,
    pub n_test: usize,
    pub confusion: ConfusionMatrix,
    pub metrics: MetricReport,
    pub auc: f64,
}

pub fn baseline(args: &BaselineArgs, log: &mut dyn Write) -> Result<BaselineReport> {
    let (records, manifest) = load_with_manifest(&args.io, &args.manifest, log)?;
    let s = sample_baseline_sets(&records, &manifest.split(), args.train_size, EVAL_PER_CLASS, args.seed)?;
    let eval_x = data::features_matrix(&records, &s.eval);
    let eval_labels: Vec<Class> = s.eval.iter().map(|&i| records[i].label).collect();
    let test_x = data::features_matrix(&records, &manifest.test_indices);
    let test_labels = manifest.split().test_labels(&records);

    let method = args.method;
    let file = format!("baseline_{}_model.json", method.as_str());
    let (threshold, calibration_mcc, scores, save): (f64, f64, Vec<f64>, Box<dyn Fn(&Path) -> Result<()>>) =
        match method {
            BaselineMethod::Ocnn => {
                let mut m = OcnnModel::fit_records(&records, &s.train, args.k)?;
                let (t, mcc) = calibrate_threshold(&m.score_batch(&eval_x)?, &eval_labels)?;
                m.threshold = Some(t);
                let scores = m.score_batch(&test_x)?;
                (t, mcc, scores, Box::new(move |p: &Path| m.save(p)))
            }
            BaselineMethod::Ae => {
                let cfg = AeBaselineConfig {
                    epochs: args.epochs,
                    batch_size: args.batch_size,
                    learning_rate: args.learning_rate,
                    seed: args.seed,
                    ..Default::default()
                };
                let mut m = AeBaseline::train(&records, &s.train, &cfg)?;
                let (t, mcc) = calibrate_threshold(&m.score_batch(&eval_x)?, &eval_labels)?;
                m.threshold = Some(t);
                let scores = m.score_batch(&test_x)?;
                (t, mcc, scores, Box::new(move |p: &Path| m.save(p)))
            }
        };
    let confusion = confusion_at(&scores, &test_labels, threshold)?;
    let report = BaselineReport {
        method,
        k: (method == BaselineMethod::Ocnn).then_some(args.k),
        train_size: s.train.len(),
        calibration_size: s.eval.len(),
        threshold,
        calibration_mcc,
        n_test: manifest.test_indices.len(),
        confusion,
        metrics: confusion.report(),
        auc: roc_auc(&scores, &test_labels)?.auc,
    };

    create_out(&args.io.out)?;
    let tmp = args.io.out.join(format!(".{file}.tmp"));
    save(&tmp)?;
    fs::rename(&tmp, args.io.out.join(&file)).map_err(|e| Error::io(&tmp, e))?;
    let stem = format!("baseline_{}_metrics", method.as_str());
    write_artifact(&args.io.out, &format!("{stem}.json"), (serde_json::to_string_pretty(&report)? + "\n").as_bytes())?;
    write_artifact(&args.io.out, &format!("{stem}.csv"), metrics_csv(&[(threshold, report.metrics)]).as_bytes())?;
    let m = &report.metrics;
    let _ = writeln!(
        log,
        "{} (threshold {threshold:.6}): accuracy {:.4} precision {:.4} recall {:.4} f1 {:.4} mcc {:.4} auc {:.4}",
        method.as_str(),
        m.accuracy,
        m.precision,
        m.recall,
        m.f1,
        m.mcc,
        report.auc
    );
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AblationRow {
    pub loss: LossKind,
    pub seed: u64,
    pub metrics: MetricReport,
    pub auc: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AblationSummary {
    pub loss: LossKind,
    pub mean_mcc: f64,
    pub min_mcc: f64,
    pub max_mcc: f64,
    pub mean_auc: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AblationReport {
    pub seeds: Vec<u64>,
    pub rows: Vec<AblationRow>,
    pub summary: Vec<AblationSummary>,
    pub best_loss: LossKind,
    /// Best mean MCC minus the L2 mean MCC.
    pub l2_gap: f64,
}

/// Trains one detector per (loss, seed) and evaluates each on the test set.
pub fn run_ablation(
    records: &[TransactionRecord],
    manifest: &SplitManifest,
    overrides: &TrainOverrides,
    seeds: &[u64],
    log: &mut dyn Write,
) -> Result<AblationReport> {
    if seeds.is_empty() {
        return Err(Error::Config("ablation needs at least one seed".into()));
    }
    let mut rows = Vec::new();
    let mut summary = Vec::new();
    for loss in LossKind::ALL {
        let mut mccs = Vec::new();
        let mut aucs = Vec::new();
        for &seed in seeds {
            let mut cfg = overrides.config(seed);
            cfg.loss_kind = loss;
            let (model, _) = detector::train(records, &manifest.train_indices, &cfg)?;
            let (report, _) =
                evaluate(&model, records, &manifest.test_indices, cfg.threshold, cfg.score_mode, &[])?;
            let _ = writeln!(log, "{loss:>8} seed {seed:>4}: mcc {:.4} auc {:.4}", report.metrics.mcc, report.auc);
            mccs.push(report.metrics.mcc);
            aucs.push(report.auc);
            rows.push(AblationRow {
                loss,
                seed,
                metrics: report.metrics,
                auc: report.auc,
            });
        }
        let n = mccs.len() as f64;
        summary.push(AblationSummary {
            loss,
            mean_mcc: mccs.iter().sum::<f64>() / n,
            min_mcc: mccs.iter().copied().fold(f64::INFINITY, f64::min),
            max_mcc: mccs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            mean_auc: aucs.iter().sum::<f64>() / n,
        });
    }
    let best = summary
        .iter()
        .fold(&summary[0], |b, s| if s.mean_mcc > b.mean_mcc { s } else { b });
    let l2 = summary.iter().find(|s| s.loss == LossKind::L2).expect("L2 is in ALL");
    Ok(AblationReport {
        seeds: seeds.to_vec(),
        best_loss: best.loss,
        l2_gap: best.mean_mcc - l2.mean_mcc,
        rows,
        summary,
    })
}

pub fn ablation_table(report: &AblationReport) -> String {
    let mut s = format!("{:<10}{:>10}{:>10}{:>10}{:>10}\n", "loss", "mean_mcc", "min_mcc", "max_mcc", "mean_auc");
    for r in &report.summary {
        s.push_str(&format!(
            "{:<10}{:>10.4}{:>10.4}{:>10.4}{:>10.4}\n",
            r.loss.as_str(),
            r.mean_mcc,
            r.min_mcc,
            r.max_mcc,
            r.mean_auc
        ));
    }
    s
}

pub fn ablation(args: &AblationArgs, log: &mut dyn Write) -> Result<AblationReport> {
    args.train.config(0).validate()?;
    let (records, manifest) = load_with_manifest(&args.io, &args.manifest, log)?;
    let report = run_ablation(&records, &manifest, &args.train, &args.seeds, log)?;
    let mut csv = format!("loss,seed,{},auc\n", MetricReport::CSV_HEADER);
    for r in &report.rows {
        csv.push_str(&format!("{},{},{},{:.6}\n", r.loss, r.seed, r.metrics.csv_row(), r.auc));
    }
    let table = ablation_table(&report);
    create_out(&args.io.out)?;
    write_artifact(&args.io.out, "ablation.csv", csv.as_bytes())?;
    write_artifact(&args.io.out, "ablation.txt", table.as_bytes())?;
    write_artifact(&args.io.out, "ablation.json", (serde_json::to_string_pretty(&report)? + "\n").as_bytes())?;
    let _ = write!(log, "{table}");
    let _ = writeln!(log, "best {}; L2 trails it by {:.4}", report.best_loss, report.l2_gap);
    Ok(report)
}

/// Parses `args` and runs the selected subcommand, logging to `log`.
pub fn run<I, T>(args: I, log: &mut dyn Write) -> Result<()>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| Error::Config(e.to_string()))?;
    dispatch(&cli.command, log)
}

pub fn dispatch(command: &Command, log: &mut dyn Write) -> Result<()> {
    match command {
        Command::Split(a) => split(a, log).map(drop),
        Command::Train(a) => train(a, log).map(drop),
        Command::Eval(a) => eval(a, log).map(drop),
        Command::Explain(a) => explain(a, log).map(drop),
        Command::Baseline(a) => baseline(a, log).map(drop),
        Command::Ablation(a) => ablation(a, log).map(drop),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cli_is_well_formed() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }

    #[test]
    fn quantiles() {
        let v = [5.0, 1.0, 3.0, 2.0, 4.0];
        assert_eq!(quantile(&v, 0.5), 3.0);
        assert_eq!(quantile(&v, 0.9), 5.0);
        assert_eq!(quantile(&v, 0.0), 1.0);
    }

    #[test]
    fn train_overrides_default_to_train_config() {
        assert_eq!(TrainOverrides::default().config(3), TrainConfig::with_seed(3));
    }

    #[test]
    fn seed_is_required() {
        let err = run(["fraudlens", "split", "--data", "x.csv"], &mut std::io::sink()).unwrap_err();
        assert!(err.to_string().contains("--seed"));
        let err = run(["fraudlens", "split", "--data", "x.csv", "--seed", "1", "--bogus"], &mut std::io::sink());
        assert!(err.is_err());
    }
}
