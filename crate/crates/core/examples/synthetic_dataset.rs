//! Writes a synthetic transactions CSV with the benchmark's schema.
//!
//! ```text
//! cargo run --release --example synthetic_dataset -- out/synthetic.csv [genuine] [fraud] [seed]
//! ```

use fraudlens::data;
use fraudlens::synthetic::{generate, SyntheticConfig};

fn main() -> fraudlens::Result<()> {
    let mut args = std::env::args().skip(1);
    let path = args.next().unwrap_or_else(|| "synthetic.csv".into());
    let mut cfg = SyntheticConfig::benchmark_sized();
    if let Some(g) = args.next() {
        cfg.n_genuine = g.parse().expect("genuine count");
    }
    if let Some(f) = args.next() {
        cfg.n_fraud = f.parse().expect("fraud count");
    }
    let seed = args.next().map_or(7, |s| s.parse().expect("seed"));

    let records = generate(&cfg, seed);
    if let Some(dir) = std::path::Path::new(&path).parent() {
        std::fs::create_dir_all(dir).ok();
    }
    data::write_csv(&path, &records)?;
    println!("wrote {} genuine + {} fraud rows to {path}", cfg.n_genuine, cfg.n_fraud);
    Ok(())
}
