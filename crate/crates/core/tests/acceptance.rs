//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Criteria 1 to 3 need the public benchmark CSV, read from `FRAUDLENS_DATA`.
//! Without it they report FAIL and the process exits nonzero.

mod common;

use std::fs;
use std::path::Path;
use std::time::Instant;

use fraudlens::baselines::OcnnModel;
use fraudlens::commands::{self, evaluate, run_ablation, EvalReport, TrainOverrides};
use fraudlens::data::{self, Class, SplitManifest};
use fraudlens::detector::{self, TrainConfig};
use fraudlens::explain::{self, explain_black_box, fit_weighted_ridge, ExplainConfig, ExplainerKind, ReferenceSet};
use fraudlens::metrics::{metric_report, roc_auc, ConfusionMatrix};
use fraudlens::synthetic::{generate, SyntheticConfig};
use fraudlens::DenseMatrix;
use rand::Rng;

const FIXED_SEEDS: [u64; 5] = [0, 1, 2, 3, 4];
const SPLIT_SEED: u64 = 0;

const MCC_FLOOR: f64 = 0.75;
const F1_FLOOR: f64 = 0.85;
const ACCURACY_FLOOR: f64 = 0.85;
const AUC_FLOOR: f64 = 0.90;
const ABLATION_GAP: f64 = 0.05;
const METRIC_TOL: f64 = 1e-4;
const AUC_ORACLE_TOL: f64 = 1e-12;
const GRADIENT_TOL: f64 = 1e-4;
const RIDGE_TOL: f64 = 1e-8;
const FIDELITY_FLOOR: f64 = 0.999;
const COMPLETENESS_TOL: f64 = 1e-10;
const RUNTIME_LIMIT_SECS: f64 = 600.0;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

struct Benchmark {
    records: Vec<data::TransactionRecord>,
    manifest: SplitManifest,
}

fn load_benchmark() -> Result<Benchmark, String> {
    let path = std::env::var_os("FRAUDLENS_DATA").ok_or("dataset unavailable: FRAUDLENS_DATA is not set")?;
    let (records, _) = data::load_csv(&path).map_err(|e| format!("dataset unavailable: {e}"))?;
    let split = data::split_paper(&records, SPLIT_SEED).map_err(|e| e.to_string())?;
    let manifest = SplitManifest::new(&records, &split);
    Ok(Benchmark { records, manifest })
}

struct HeadlineRun {
    seed: u64,
    report: EvalReport,
    secs: f64,
}

fn headline_runs(b: &Benchmark) -> Result<Vec<HeadlineRun>, String> {
    let mut runs = Vec::new();
    for seed in FIXED_SEEDS {
        let start = Instant::now();
        let cfg = TrainConfig::with_seed(seed);
        let (model, _) = detector::train(&b.records, &b.manifest.train_indices, &cfg).map_err(|e| e.to_string())?;
        let (report, _) = evaluate(&model, &b.records, &b.manifest.test_indices, cfg.threshold, cfg.score_mode, &[])
            .map_err(|e| e.to_string())?;
        runs.push(HeadlineRun {
            seed,
            report,
            secs: start.elapsed().as_secs_f64(),
        });
    }
    Ok(runs)
}

fn meets_floors(r: &EvalReport) -> bool {
    r.metrics.mcc >= MCC_FLOOR && r.metrics.f1 >= F1_FLOOR && r.metrics.accuracy >= ACCURACY_FLOOR
}

fn criterion_1(runs: &Result<Vec<HeadlineRun>, String>, fallback_support: bool) -> Outcome {
    let runs = match runs {
        Ok(r) => r,
        Err(e) => return outcome(false, e.clone()),
    };
    let slowest = runs.iter().map(|r| r.secs).fold(0.0, f64::max);
    if let Some(r) = runs.iter().find(|r| meets_floors(&r.report)) {
        let m = &r.report.metrics;
        return outcome(
            slowest < RUNTIME_LIMIT_SECS,
            format!(
                "seed {}: mcc {:.4} f1 {:.4} accuracy {:.4}; slowest run {slowest:.1}s",
                r.seed, m.mcc, m.f1, m.accuracy
            ),
        );
    }
    let separated: Vec<u64> = runs
        .iter()
        .filter(|r| r.report.scores.fraud_median > r.report.scores.genuine_p90)
        .map(|r| r.seed)
        .collect();
    let best = runs.iter().map(|r| r.report.metrics.mcc).fold(f64::NEG_INFINITY, f64::max);
    outcome(
        !separated.is_empty() && fallback_support,
        format!(
            "no seed met the floors (best mcc {best:.4}); fallback: fraud median > genuine p90 for seeds {separated:?}, \
             criteria 3-8 {}",
            if fallback_support { "pass" } else { "do not all pass" }
        ),
    )
}

fn criterion_2(runs: &Result<Vec<HeadlineRun>, String>) -> Outcome {
    let runs = match runs {
        Ok(r) => r,
        Err(e) => return outcome(false, e.clone()),
    };
    let chosen = runs
        .iter()
        .find(|r| meets_floors(&r.report))
        .unwrap_or_else(|| runs.iter().max_by(|a, b| a.report.metrics.mcc.total_cmp(&b.report.metrics.mcc)).unwrap());
    let (mode, auc) = chosen
        .report
        .auc_by_score_mode
        .iter()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(m, a)| (m.clone(), *a))
        .unwrap();
    outcome(auc >= AUC_FLOOR, format!("seed {}: best AUC {auc:.4} ({mode})", chosen.seed))
}

fn criterion_3(bench: &Result<Benchmark, String>) -> Outcome {
    let b = match bench {
        Ok(b) => b,
        Err(e) => return outcome(false, e.clone()),
    };
    match run_ablation(&b.records, &b.manifest, &TrainOverrides::default(), &FIXED_SEEDS, &mut std::io::sink()) {
        Ok(r) => {
            let table: Vec<String> =
                r.summary.iter().map(|s| format!("{} {:.4}", s.loss, s.mean_mcc)).collect();
            outcome(r.l2_gap <= ABLATION_GAP, format!("mean mcc {}; L2 gap {:.4}", table.join(", "), r.l2_gap))
        }
        Err(e) => outcome(false, e.to_string()),
    }
}

fn criterion_4() -> Outcome {
    let r = metric_report(&ConfusionMatrix::new(435, 37, 453, 55));
    let expected = [0.9061, 0.9216, 0.8878, 0.9044, 0.8128];
    let got = [r.accuracy, r.precision, r.recall, r.f1, r.mcc];
    let worst = got.iter().zip(&expected).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    outcome(
        worst <= METRIC_TOL,
        format!("accuracy/precision/recall/f1/mcc = {got:.4?}; max deviation {worst:.1e}"),
    )
}

fn criterion_5() -> Outcome {
    let mut r = common::rng(5);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let n = r.random_range(2..=200);
        let mut labels: Vec<Class> =
            (0..n).map(|_| if r.random_bool(0.4) { Class::Fraud } else { Class::Genuine }).collect();
        labels[0] = Class::Fraud;
        labels[1] = Class::Genuine;
        let scores: Vec<f64> = (0..n)
            .map(|_| if r.random_bool(0.3) { f64::from(r.random_range(0..5)) } else { r.random::<f64>() })
            .collect();
        let auc = roc_auc(&scores, &labels).unwrap().auc;
        worst = worst.max((auc - common::pairwise_auc(&scores, &labels)).abs());
    }
    outcome(worst <= AUC_ORACLE_TOL, format!("100 score sets, max |AUC - pairwise| = {worst:.1e}"))
}

fn criterion_6() -> Outcome {
    let worst = (0..20)
        .map(|seed| {
            let (net, x, g) = common::random_network(seed);
            common::gradient_check(&net, &x, &g)
        })
        .fold(0.0, f64::max);
    outcome(worst < GRADIENT_TOL, format!("20 random networks, max relative error {worst:.1e}"))
}

fn criterion_7() -> Outcome {
    let mut r = common::rng(7);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let (n, p) = (r.random_range(30..200), r.random_range(1..=28));
        let z = common::random_matrix(n, p, 1.0, &mut r);
        let y = common::random_matrix(n, 1, 1.0, &mut r).into_vec();
        let w: Vec<f64> = (0..n).map(|_| r.random_range(0.01..1.0)).collect();
        let lambda = if r.random_bool(0.5) { 1.0 } else { r.random_range(0.0..3.0) };
        let fit = fit_weighted_ridge(&z, &y, &w, lambda).unwrap();
        let (b0, beta) = common::ridge_closed_form(&z, &y, &w, lambda);
        worst = worst.max((fit.intercept - b0).abs());
        for (a, b) in fit.coefficients.iter().zip(&beta) {
            worst = worst.max((a - b).abs());
        }
    }

    let reference = ReferenceSet::new(common::random_matrix(300, 28, 1.5, &mut r)).unwrap();
    let truth: Vec<f64> = (0..28).map(|_| r.random_range(-2.0..2.0)).collect();
    let t = truth.clone();
    let affine = move |x: &DenseMatrix| -> fraudlens::Result<Vec<f64>> {
        Ok(x.row_iter().map(|row| 0.3 + row.iter().zip(&t).map(|(a, b)| a * b).sum::<f64>()).collect())
    };
    let cfg = ExplainConfig {
        ridge_lambda: 1e-6,
        seed: 7,
        ..Default::default()
    };
    let (e, _) = explain_black_box(ExplainerKind::General, &affine, reference.rows.row(0), &reference, &cfg).unwrap();
    let coef_err = e
        .entries
        .iter()
        .map(|c| (c.coefficient - truth[c.index] * reference.stats.std[c.index]).abs())
        .fold(0.0, f64::max);
    outcome(
        worst <= RIDGE_TOL && e.fidelity >= FIDELITY_FLOOR && coef_err < 1e-6,
        format!(
            "ridge vs closed form max error {worst:.1e}; affine black box fidelity {:.6}, coefficient error {coef_err:.1e}",
            e.fidelity
        ),
    )
}

fn run_pipeline(data: &Path, out: &Path, seed: &str) -> fraudlens::Result<()> {
    let d = data.to_str().unwrap();
    let o = out.to_str().unwrap();
    let m = out.join("split_manifest.json");
    let m = m.to_str().unwrap();
    let model = out.join("model.json");
    let model = model.to_str().unwrap();
    let sink = &mut std::io::sink();
    commands::run(["fraudlens", "split", "--data", d, "--seed", seed, "--per-class", "100", "--out", o], sink)?;
    commands::run(["fraudlens", "train", "--data", d, "--manifest", m, "--seed", seed, "--batch", "1024", "--out", o], sink)?;
    commands::run(["fraudlens", "eval", "--data", d, "--manifest", m, "--model", model, "--out", o], sink)?;
    commands::run(
        ["fraudlens", "explain", "--data", d, "--manifest", m, "--model", model, "--seed", seed, "--out", o],
        sink,
    )
}

fn criterion_8() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let data = common::synthetic_csv(dir.path(), 20_000, 150, 8);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    if let Err(e) = run_pipeline(&data, &a, "8").and_then(|_| run_pipeline(&data, &b, "8")) {
        return outcome(false, e.to_string());
    }
    let mut names: Vec<String> = fs::read_dir(&a).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
    names.sort();
    let differing: Vec<&String> = names.iter().filter(|n| fs::read(a.join(n)).ok() != fs::read(b.join(n)).ok()).collect();

    let mut r = common::rng(8);
    let mut mismatches = 0;
    for n in [1, 7, 120, 500] {
        let pts = common::random_matrix(n, 28, 1.0, &mut r);
        for k in [1, 5.min(n), n] {
            let model = OcnnModel::fit(pts.clone(), k).unwrap();
            for _ in 0..10 {
                let q = common::random_matrix(1, 28, 1.2, &mut r);
                if model.score(q.row(0)).unwrap() != common::brute_force_knn(&pts, q.row(0), k) {
                    mismatches += 1;
                }
            }
        }
    }
    outcome(
        differing.is_empty() && mismatches == 0,
        format!(
            "{} artifacts compared, {} differ; OCNN vs brute force: {mismatches} mismatches (synthetic data)",
            names.len(),
            differing.len()
        ),
    )
}

fn criterion_9() -> Outcome {
    let records = generate(&SyntheticConfig::small(30_000, 300), 9);
    let split = data::split_balanced(&records, 200, 9).unwrap();
    let cfg = TrainConfig {
        batch_size: 1024,
        ..TrainConfig::with_seed(9)
    };
    let (model, _) = detector::train(&records, &split.train, &cfg).unwrap();
    let reference = ReferenceSet::new(data::features_matrix(&records, &split.test)).unwrap();
    let reconstructed = reference.reconstructed(&model).unwrap();
    let instance = *split.test.iter().find(|&&i| records[i].label.is_fraud()).unwrap();
    let x = records[instance].features;
    let ecfg = ExplainConfig {
        seed: 9,
        ..Default::default()
    };
    let mut worst: f64 = 0.0;
    let mut pass = ecfg.n_samples == 5000;
    let mut parts = Vec::new();
    for kind in ExplainerKind::ALL {
        match explain::explain_transaction(kind, &model, &x, &reference, &reconstructed, &ecfg)
            .and_then(|e| explain::top_k(&e, 6).map(|t| (e, t)))
        {
            Ok((full, top)) => {
                let full_sum = full.intercept + full.entries.iter().map(|e| e.contribution).sum::<f64>();
                worst = worst
                    .max((full_sum - full.surrogate_prediction).abs())
                    .max((top.contribution_total() - top.surrogate_prediction).abs());
                pass &= top.entries.len() == 6 && full.n_samples == 5000;
                let names: Vec<&str> = top.entries.iter().map(|e| e.feature.as_str()).collect();
                parts.push(format!("{kind}: {}", names.join(" ")));
            }
            Err(e) => {
                pass = false;
                parts.push(format!("{kind}: {e}"));
            }
        }
    }
    outcome(
        pass && worst <= COMPLETENESS_TOL,
        format!("max |intercept + Σ contributions - surrogate| = {worst:.1e}; {} (synthetic data)", parts.join("; ")),
    )
}

fn main() {
    let bench = load_benchmark();
    let runs = bench.as_ref().map_err(Clone::clone).and_then(headline_runs);

    let c3 = criterion_3(&bench);
    let c4 = criterion_4();
    let c5 = criterion_5();
    let c6 = criterion_6();
    let c7 = criterion_7();
    let c8 = criterion_8();
    let fallback_support = [&c3, &c4, &c5, &c6, &c7, &c8].iter().all(|o| o.pass);
    let results = [
        ("1 headline metrics (mcc >= 0.75, f1 >= 0.85, accuracy >= 0.85)", criterion_1(&runs, fallback_support)),
        ("2 ROC AUC >= 0.90 under some score mode", criterion_2(&runs)),
        ("3 loss ablation, L2 within 0.05 of best mean MCC", c3),
        ("4 metric oracle within 1e-4", c4),
        ("5 AUC equals pairwise oracle within 1e-12", c5),
        ("6 gradients match finite differences (rel err < 1e-4)", c6),
        ("7 weighted ridge oracle within 1e-8, affine fidelity >= 0.999", c7),
        ("8 byte-identical reruns, OCNN equals brute force", c8),
        ("9 explanation contract within 1e-10", criterion_9()),
    ];
    let mut failed = 0;
    for (name, o) in &results {
        println!("{} criterion {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.pass);
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
