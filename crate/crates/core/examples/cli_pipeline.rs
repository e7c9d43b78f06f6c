//! Runs split, train, eval, explain, baseline and ablation through the
//! command layer, exactly as the `fraudlens` binary would.
//!
//! ```text
//! cargo run --release --example cli_pipeline -- [out-dir]
//! ```

use fraudlens::commands;
use fraudlens::data;
use fraudlens::synthetic::{generate, SyntheticConfig};

fn main() -> fraudlens::Result<()> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "pipeline-out".into());
    std::fs::create_dir_all(&out).ok();
    let csv = match std::env::var("FRAUDLENS_DATA") {
        Ok(p) => p,
        Err(_) => {
            let p = format!("{out}/synthetic.csv");
            data::write_csv(&p, &generate(&SyntheticConfig::small(40_000, 600), 1))?;
            p
        }
    };
    let manifest = format!("{out}/split_manifest.json");
    let model = format!("{out}/model.json");
    let log = &mut std::io::stdout();
    let run = |args: &[&str], log: &mut dyn std::io::Write| {
        println!("$ fraudlens {}", args.join(" "));
        let mut full = vec!["fraudlens", args[0], "--data", &csv, "--out", &out];
        full.extend(&args[1..]);
        commands::run(full, log)
    };
    run(&["split", "--seed", "1"], log)?;
    run(&["train", "--manifest", &manifest, "--seed", "1", "--batch", "1024"], log)?;
    run(&["eval", "--manifest", &manifest, "--model", &model, "--sweep", "0.5,0.6,0.7,0.8"], log)?;
    run(&["explain", "--manifest", &manifest, "--model", &model, "--seed", "1"], log)?;
    run(&["baseline", "--manifest", &manifest, "--method", "ocnn", "--seed", "1"], log)?;
    run(&["baseline", "--manifest", &manifest, "--method", "ae", "--seed", "1"], log)?;
    run(&["ablation", "--manifest", &manifest, "--seeds", "1,2", "--batch", "1024"], log)?;
    Ok(())
}
