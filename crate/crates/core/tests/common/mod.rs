//! Independent oracles shared by the integration and acceptance tests.
#![allow(dead_code)]

use std::path::{Path, PathBuf};

use fraudlens::data::{self, Class};
use fraudlens::nn::{self, LayerSpec, Network};
use fraudlens::synthetic::{generate, SyntheticConfig};
use fraudlens::DenseMatrix;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

pub const FD_STEP: f64 = 1e-5;
pub const FD_TOLERANCE: f64 = 1e-4;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_matrix(rows: usize, cols: usize, std: f64, rng: &mut ChaCha8Rng) -> DenseMatrix {
    let n = Normal::new(0.0, std).unwrap();
    DenseMatrix::from_vec(rows, cols, (0..rows * cols).map(|_| n.sample(rng)).collect()).unwrap()
}

/// A random stack of Linear/BatchNorm/ReLU layers, optionally ending in a
/// sigmoid, with every parameter drawn from N(0, 0.5).
pub fn random_network(seed: u64) -> (Network, DenseMatrix, DenseMatrix) {
    let mut r = rng(seed);
    let depth = r.random_range(1..=3);
    let mut widths = vec![r.random_range(2..=6)];
    for _ in 0..depth {
        widths.push(r.random_range(1..=6));
    }
    let mut specs = Vec::new();
    for (i, w) in widths.windows(2).enumerate() {
        specs.push(LayerSpec::Linear {
            input: w[0],
            output: w[1],
        });
        if i + 2 < widths.len() {
            if r.random_bool(0.7) {
                specs.push(LayerSpec::BatchNorm { dim: w[1] });
            }
            specs.push(LayerSpec::Relu);
        }
    }
    if r.random_bool(0.5) {
        specs.push(LayerSpec::Sigmoid);
    }
    let mut net = nn::init_network(&specs, seed).unwrap();
    let n = Normal::new(0.0, 0.5).unwrap();
    for p in net.params_mut() {
        for v in p.iter_mut() {
            *v = n.sample(&mut r);
        }
    }
    let rows = r.random_range(3..=8);
    let x = random_matrix(rows, widths[0], 1.0, &mut r);
    let g = random_matrix(rows, *widths.last().unwrap(), 1.0, &mut r);
    (net, x, g)
}

fn probe(net: &Network, x: &DenseMatrix, g: &DenseMatrix) -> f64 {
    let (out, _) = net.forward_cached(x).unwrap();
    out.as_slice().iter().zip(g.as_slice()).map(|(a, b)| a * b).sum()
}

pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(FD_TOLERANCE)
}

/// Largest relative error between backprop and central differences of
/// `L = Σ out ⊙ g` over every parameter and input entry.
pub fn gradient_check(net: &Network, x: &DenseMatrix, g: &DenseMatrix) -> f64 {
    let (_, cache) = net.forward_cached(x).unwrap();
    let grads = net.backward(&cache, g).unwrap();
    let analytic: Vec<Vec<f64>> = grads.param_slices().iter().map(|s| s.to_vec()).collect();
    let mut worst: f64 = 0.0;

    let mut work = net.clone();
    for (pi, slice) in analytic.iter().enumerate() {
        for k in 0..slice.len() {
            let orig = work.params_mut()[pi][k];
            work.params_mut()[pi][k] = orig + FD_STEP;
            let up = probe(&work, x, g);
            work.params_mut()[pi][k] = orig - FD_STEP;
            let down = probe(&work, x, g);
            work.params_mut()[pi][k] = orig;
            worst = worst.max(relative_error(slice[k], (up - down) / (2.0 * FD_STEP)));
        }
    }
    let mut xi = x.clone();
    for k in 0..x.as_slice().len() {
        let orig = xi.as_slice()[k];
        xi.as_mut_slice()[k] = orig + FD_STEP;
        let up = probe(net, &xi, g);
        xi.as_mut_slice()[k] = orig - FD_STEP;
        let down = probe(net, &xi, g);
        xi.as_mut_slice()[k] = orig;
        worst = worst.max(relative_error(grads.input.as_slice()[k], (up - down) / (2.0 * FD_STEP)));
    }
    worst
}

/// Mann-Whitney AUC by exhaustive pair comparison, ties counted as half.
pub fn pairwise_auc(scores: &[f64], labels: &[Class]) -> f64 {
    let mut wins = 0.0;
    let mut pairs = 0.0;
    for (i, li) in labels.iter().enumerate() {
        if !li.is_fraud() {
            continue;
        }
        for (j, lj) in labels.iter().enumerate() {
            if lj.is_fraud() {
                continue;
            }
            pairs += 1.0;
            if scores[i] > scores[j] {
                wins += 1.0;
            } else if scores[i] == scores[j] {
                wins += 0.5;
            }
        }
    }
    wins / pairs
}

/// Weighted ridge with an unpenalized intercept, solved directly on the
/// augmented design `[1 | Z]` with nalgebra. Returns `(intercept, β)`.
pub fn ridge_closed_form(z: &DenseMatrix, y: &[f64], w: &[f64], lambda: f64) -> (f64, Vec<f64>) {
    let (n, p) = z.shape();
    let a = DMatrix::from_fn(n, p + 1, |i, j| if j == 0 { 1.0 } else { z.get(i, j - 1) });
    let wm = DMatrix::from_diagonal(&DVector::from_column_slice(w));
    let mut lhs = a.transpose() * &wm * &a;
    for j in 1..=p {
        lhs[(j, j)] += lambda;
    }
    let rhs = a.transpose() * &wm * DVector::from_column_slice(y);
    let sol = lhs.lu().solve(&rhs).expect("solvable system");
    (sol[0], sol.iter().skip(1).copied().collect())
}

/// Mean of the `k` smallest distances after sorting every distance.
pub fn brute_force_knn(points: &DenseMatrix, x: &[f64], k: usize) -> f64 {
    let mut d: Vec<(f64, usize)> = (0..points.rows())
        .map(|i| {
            let s: f64 = points.row(i).iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum();
            (s.sqrt(), i)
        })
        .collect();
    d.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    d[..k].iter().map(|p| p.0).sum::<f64>() / k as f64
}

/// Writes a synthetic benchmark-schema CSV into `dir`.
pub fn synthetic_csv(dir: &Path, genuine: usize, fraud: usize, seed: u64) -> PathBuf {
    let path = dir.join("transactions.csv");
    let records = generate(&SyntheticConfig::small(genuine, fraud), seed);
    data::write_csv(&path, &records).unwrap();
    path
}
