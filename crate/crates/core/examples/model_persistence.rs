//! Saves a trained detector, reloads it with a fingerprint check and shows
//! the distinct errors for a foreign data fingerprint and a damaged file.
//!
//! ```text
//! cargo run --release --example model_persistence
//! ```

use fraudlens::data;
use fraudlens::detector::{self, DetectorModel, TrainConfig};
use fraudlens::synthetic::{generate, SyntheticConfig};

fn main() -> fraudlens::Result<()> {
    let records = generate(&SyntheticConfig::small(5_000, 100), 4);
    let split = data::split_balanced(&records, 50, 4)?;
    let cfg = TrainConfig {
        batch_size: 512,
        ..TrainConfig::with_seed(4)
    };
    let (model, _) = detector::train(&records, &split.train, &cfg)?;

    let dir = std::env::temp_dir().join("fraudlens-persistence");
    std::fs::create_dir_all(&dir).ok();
    let path = dir.join("model.json");
    model.save(&path)?;
    let fp = data::fingerprint(&records, &split.train);
    let back = DetectorModel::load(&path, Some(&fp))?;
    let x = records[split.test[0]].features;
    println!("reloaded; score {} == {}", model.score(&x, cfg.score_mode)?, back.score(&x, cfg.score_mode)?);

    if let Err(e) = DetectorModel::load(&path, Some("0000")) {
        println!("foreign fingerprint: {e}");
    }
    let bytes = std::fs::read(&path).expect("model file");
    if let Err(e) = DetectorModel::from_bytes(&bytes[..bytes.len() / 2]) {
        println!("truncated file: {e}");
    }
    Ok(())
}
