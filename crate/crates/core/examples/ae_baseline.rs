//! Plain autoencoder baseline scored by reconstruction error.
//!
//! ```text
//! cargo run --release --example ae_baseline
//! ```

use fraudlens::baselines::{calibrate_threshold, sample_baseline_sets, AeBaseline, AeBaselineConfig};
use fraudlens::data;
use fraudlens::metrics::{confusion_at, roc_auc};
use fraudlens::synthetic::{generate, SyntheticConfig};

fn main() -> fraudlens::Result<()> {
    let records = generate(&SyntheticConfig::small(20_000, 500), 6);
    let split = data::split_balanced(&records, 400, 6)?;
    let sets = sample_baseline_sets(&records, &split, 700, 25, 6)?;
    let model = AeBaseline::train(&records, &sets.train, &AeBaselineConfig { seed: 6, ..Default::default() })?;

    let eval_labels: Vec<_> = sets.eval.iter().map(|&i| records[i].label).collect();
    let (threshold, _) = calibrate_threshold(&model.score_batch(&data::features_matrix(&records, &sets.eval))?, &eval_labels)?;
    let scores = model.score_batch(&data::features_matrix(&records, &split.test))?;
    let labels = split.test_labels(&records);
    let m = confusion_at(&scores, &labels, threshold)?.report();
    println!(
        "{} steps; threshold {threshold:.4}; test mcc {:.4} f1 {:.4} auc {:.4}",
        model.train_steps,
        m.mcc,
        m.f1,
        roc_auc(&scores, &labels)?.auc
    );
    Ok(())
}
