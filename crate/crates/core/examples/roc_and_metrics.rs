//! Confusion-matrix metrics and the ROC curve for a small score vector.
//!
//! ```text
//! cargo run --release --example roc_and_metrics
//! ```

use fraudlens::data::Class::{Fraud as F, Genuine as G};
use fraudlens::metrics::{confusion_at, metric_report, roc_auc, ConfusionMatrix, MetricReport};

fn main() -> fraudlens::Result<()> {
    let r = metric_report(&ConfusionMatrix::new(435, 37, 453, 55));
    println!("{}\n{}", MetricReport::CSV_HEADER, r.csv_row());

    let scores = [0.95, 0.91, 0.83, 0.71, 0.71, 0.64, 0.55, 0.52, 0.48, 0.30];
    let labels = [F, F, G, F, G, F, G, G, F, G];
    for t in [0.5, 0.7, 0.9] {
        let cm = confusion_at(&scores, &labels, t)?;
        println!("threshold {t}: {cm:?} mcc {:.4}", cm.report().mcc);
    }
    let roc = roc_auc(&scores, &labels)?;
    print!("{}", roc.to_csv());
    println!("AUC {:.4}", roc.auc);
    Ok(())
}
