//! Trains the detector and reports test-set metrics.
//!
//! Uses the CSV named by `FRAUDLENS_DATA` when set, otherwise a synthetic
//! dataset. The paper-scale schedule (2 epochs, batch 4096) runs in seconds.
//!
//! ```text
//! cargo run --release --example train_detector -- [seed]
//! ```

use fraudlens::data::{self, TransactionRecord};
use fraudlens::detector::{self, ScoreMode, TrainConfig};
use fraudlens::metrics::{confusion_at, roc_auc};
use fraudlens::synthetic::{generate, SyntheticConfig};

fn records() -> fraudlens::Result<Vec<TransactionRecord>> {
    match std::env::var_os("FRAUDLENS_DATA") {
        Some(path) => Ok(data::load_csv(path)?.0),
        None => {
            println!("FRAUDLENS_DATA not set; using synthetic transactions");
            Ok(generate(&SyntheticConfig::small(100_000, 600), 1))
        }
    }
}

fn main() -> fraudlens::Result<()> {
    let seed = std::env::args().nth(1).map_or(0, |s| s.parse().expect("seed"));
    let records = records()?;
    let split = data::split_paper(&records, seed)?;
    let cfg = TrainConfig::with_seed(seed);

    let (model, reports) = detector::train_with(&records, &split.train, &cfg, |r| {
        if r.batch % 10 == 0 {
            println!(
                "epoch {} batch {:>3}: rec {:.4}  adv {:.4}  C {:.4}  C(x) {:.3}  C(R(x)) {:.3}",
                r.epoch, r.batch, r.loss_reconstruction, r.loss_reconstructor_adv, r.loss_classifier, r.mean_c_real,
                r.mean_c_reconstructed
            );
        }
    })?;
    println!("{} optimizer steps", reports.len());

    let x = data::features_matrix(&records, &split.test);
    let labels = split.test_labels(&records);
    for mode in ScoreMode::ALL {
        let scores = model.score_batch(&x, mode)?;
        let m = confusion_at(&scores, &labels, cfg.threshold)?.report();
        let auc = roc_auc(&scores, &labels)?.auc;
        println!("{mode:<24} mcc {:.4}  f1 {:.4}  accuracy {:.4}  auc {auc:.4}", m.mcc, m.f1, m.accuracy);
    }
    Ok(())
}
