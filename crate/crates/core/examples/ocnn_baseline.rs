//! k-nearest-neighbour baseline: 700 genuine training rows, threshold
//! calibrated on 25 + 25 labelled rows, evaluated on the balanced test set.
//!
//! ```text
//! cargo run --release --example ocnn_baseline -- [k]
//! ```

use fraudlens::baselines::{calibrate_threshold, sample_baseline_sets, OcnnModel};
use fraudlens::data;
use fraudlens::metrics::{confusion_at, roc_auc};
use fraudlens::synthetic::{generate, SyntheticConfig};

fn main() -> fraudlens::Result<()> {
    let k = std::env::args().nth(1).map_or(5, |s| s.parse().expect("k"));
    let records = generate(&SyntheticConfig::small(20_000, 500), 5);
    let split = data::split_balanced(&records, 400, 5)?;
    let sets = sample_baseline_sets(&records, &split, 700, 25, 5)?;

    let model = OcnnModel::fit_records(&records, &sets.train, k)?;
    let eval_labels: Vec<_> = sets.eval.iter().map(|&i| records[i].label).collect();
    let eval_scores = model.score_batch(&data::features_matrix(&records, &sets.eval))?;
    let (threshold, cal_mcc) = calibrate_threshold(&eval_scores, &eval_labels)?;
    println!("k = {k}: threshold {threshold:.4} (calibration mcc {cal_mcc:.4})");

    let scores = model.score_batch(&data::features_matrix(&records, &split.test))?;
    let labels = split.test_labels(&records);
    let m = confusion_at(&scores, &labels, threshold)?.report();
    println!("test: mcc {:.4} f1 {:.4} accuracy {:.4} auc {:.4}", m.mcc, m.f1, m.accuracy, roc_auc(&scores, &labels)?.auc);
    Ok(())
}
