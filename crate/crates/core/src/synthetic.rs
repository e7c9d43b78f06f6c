//! Synthetic transactions with the same schema as the public benchmark file.
//!
//! Genuine rows are centred Gaussians whose per-feature spread decays like the
//! variance profile of PCA components. Fraud rows are shifted along a fixed
//! direction by a random severity, so some of them sit deep inside the genuine
//! cloud. Used by examples, tests and smoke runs when the real file is absent.

use rand::Rng;
use rand_distr::{Distribution, LogNormal, Normal};

use crate::data::{Class, TransactionRecord, N_FEATURES};
use crate::rng;

const GENUINE_STD: [f64; N_FEATURES] = [
    1.96, 1.65, 1.52, 1.42, 1.38, 1.33, 1.24, 1.19, 1.10, 1.09, 1.02, 1.00, 0.995, 0.959, 0.915, 0.876, 0.849,
    0.838, 0.814, 0.771, 0.735, 0.726, 0.624, 0.606, 0.521, 0.482, 0.404, 0.330,
];

const FRAUD_SHIFT: [f64; N_FEATURES] = [
    -4.77, 3.62, -7.03, 4.54, -3.15, -1.40, -5.57, 0.57, -2.58, -5.68, 3.80, -6.26, -0.11, -6.97, -0.09, -4.14,
    -6.67, -2.25, 0.68, 0.37, 0.71, 0.01, -0.04, -0.11, 0.04, 0.05, 0.17, 0.08,
];

#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticConfig {
    pub n_genuine: usize,
    pub n_fraud: usize,
    /// Share of fraud rows drawn with a near-zero shift.
    pub hard_fraud_fraction: f64,
    /// Share of genuine rows drawn with triple spread.
    pub genuine_outlier_fraction: f64,
}

impl SyntheticConfig {
    pub fn small(n_genuine: usize, n_fraud: usize) -> Self {
        SyntheticConfig {
            n_genuine,
            n_fraud,
            hard_fraud_fraction: 0.2,
            genuine_outlier_fraction: 0.05,
        }
    }

    /// Same class counts as the public benchmark file.
    pub fn benchmark_sized() -> Self {
        Self::small(284_315, 492)
    }
}

/// Generates `n_genuine + n_fraud` records in a seeded, shuffled order.
pub fn generate(cfg: &SyntheticConfig, seed: u64) -> Vec<TransactionRecord> {
    let mut rng = rng::stream(seed, "synthetic");
    let normal = Normal::new(0.0, 1.0).expect("valid normal");
    let amount: LogNormal<f64> = LogNormal::new(3.0, 1.5).expect("valid lognormal");
    let total = cfg.n_genuine + cfg.n_fraud;

    let mut labels: Vec<Class> = std::iter::repeat_n(Class::Genuine, cfg.n_genuine)
        .chain(std::iter::repeat_n(Class::Fraud, cfg.n_fraud))
        .collect();
    for i in (1..labels.len()).rev() {
        let j = rng.random_range(0..=i);
        labels.swap(i, j);
    }

    let mut time = 0.0;
    labels
        .into_iter()
        .map(|label| {
            time += rng.random_range(0.0..2.0 * 172_792.0 / total.max(1) as f64);
            let mut features = [0.0; N_FEATURES];
            match label {
                Class::Genuine => {
                    let spread = if rng.random::<f64>() < cfg.genuine_outlier_fraction { 3.0 } else { 1.0 };
                    for (j, f) in features.iter_mut().enumerate() {
                        *f = spread * GENUINE_STD[j] * normal.sample(&mut rng);
                    }
                }
                Class::Fraud => {
                    let severity = if rng.random::<f64>() < cfg.hard_fraud_fraction {
                        rng.random_range(0.0..0.25)
                    } else {
                        rng.random_range(0.35..1.5)
                    };
                    for (j, f) in features.iter_mut().enumerate() {
                        let spread = GENUINE_STD[j] * (1.0 + 1.5 * severity);
                        *f = severity * FRAUD_SHIFT[j] + spread * normal.sample(&mut rng);
                    }
                }
            }
            TransactionRecord {
                features,
                time: time.round(),
                amount: (amount.sample(&mut rng) * 100.0).round() / 100.0,
                label,
            }
        })
        .collect()
}
