//! Explains one fraudulent test transaction with the AE, C and general
//! explainers and prints the six largest contributions of each.
//!
//! ```text
//! cargo run --release --example explain_instance
//! ```

use fraudlens::data;
use fraudlens::detector::{self, TrainConfig};
use fraudlens::explain::{explain_transaction, top_k, ExplainConfig, ExplainerKind, ReferenceSet};
use fraudlens::synthetic::{generate, SyntheticConfig};

fn main() -> fraudlens::Result<()> {
    let records = generate(&SyntheticConfig::small(50_000, 400), 3);
    let split = data::split_balanced(&records, 300, 3)?;
    let cfg = TrainConfig {
        batch_size: 1024,
        ..TrainConfig::with_seed(3)
    };
    let (model, _) = detector::train(&records, &split.train, &cfg)?;

    let reference = ReferenceSet::new(data::features_matrix(&records, &split.test))?;
    let reconstructed = reference.reconstructed(&model)?;
    let fraud = *split.test.iter().find(|&&i| records[i].label.is_fraud()).expect("a fraud case");
    let x = records[fraud].features;

    let ecfg = ExplainConfig {
        seed: 3,
        ..Default::default()
    };
    for kind in ExplainerKind::ALL {
        let e = explain_transaction(kind, &model, &x, &reference, &reconstructed, &ecfg)?;
        println!("{}", top_k(&e, 6)?.to_text());
    }
    Ok(())
}
