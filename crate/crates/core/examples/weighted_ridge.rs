//! Fits a kernel-weighted ridge surrogate to a nonlinear function around a
//! point and compares the local slopes with the analytic gradient.
//!
//! ```text
//! cargo run --release --example weighted_ridge
//! ```

use fraudlens::explain::{explain_black_box, ExplainConfig, ExplainerKind, ReferenceSet};
use fraudlens::{DenseMatrix, Result};

fn main() -> Result<()> {
    // reference cloud: 28 features, feature j spread (j + 1) / 10
    let rows: Vec<Vec<f64>> = (0..400)
        .map(|i| (0..28).map(|j| ((i * 31 + j * 17) % 101) as f64 / 101.0 * (j + 1) as f64 / 10.0).collect())
        .collect();
    let reference = ReferenceSet::new(DenseMatrix::from_rows(&rows)?)?;

    let f = |x: &DenseMatrix| -> Result<Vec<f64>> {
        Ok(x.row_iter().map(|r| (r[0] - 2.0 * r[1]).tanh() + 0.5 * r[2] * r[2]).collect())
    };
    let at = reference.stats.mean.clone();
    for width in [0.5, 2.0, 8.0] {
        let cfg = ExplainConfig {
            kernel_width: width,
            n_samples: 5000,
            seed: 1,
            ..Default::default()
        };
        let (e, _) = explain_black_box(ExplainerKind::General, &f, &at, &reference, &cfg)?;
        let mut slope = [0.0; 3];
        for c in e.entries.iter().filter(|c| c.index < 3) {
            slope[c.index] = c.coefficient / reference.stats.floored_std()[c.index];
        }
        println!(
            "width {width:>4}: fidelity {:.4}; slopes V1 {:+.3} V2 {:+.3} V3 {:+.3}",
            e.fidelity, slope[0], slope[1], slope[2]
        );
    }
    let s = (at[0] - 2.0 * at[1]).tanh();
    println!("analytic gradient: V1 {:+.3} V2 {:+.3} V3 {:+.3}", 1.0 - s * s, -2.0 * (1.0 - s * s), at[2]);
    Ok(())
}
