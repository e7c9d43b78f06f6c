//! Trains one detector per reconstruction loss and seed and prints the MCC
//! table.
//!
//! ```text
//! cargo run --release --example loss_ablation -- [seeds...]
//! ```

use fraudlens::commands::{ablation_table, run_ablation, TrainOverrides};
use fraudlens::data::{self, SplitManifest};
use fraudlens::synthetic::{generate, SyntheticConfig};

fn main() -> fraudlens::Result<()> {
    let mut seeds: Vec<u64> = std::env::args().skip(1).map(|s| s.parse().expect("seed")).collect();
    if seeds.is_empty() {
        seeds = vec![0, 1, 2];
    }
    let records = generate(&SyntheticConfig::small(60_000, 600), 2);
    let manifest = SplitManifest::new(&records, &data::split_paper(&records, 0)?);
    let overrides = TrainOverrides {
        batch_size: 1024,
        ..Default::default()
    };
    let report = run_ablation(&records, &manifest, &overrides, &seeds, &mut std::io::stdout())?;
    print!("{}", ablation_table(&report));
    Ok(())
}
