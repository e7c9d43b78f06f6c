use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;

/// Probabilities are clamped into `[BCE_CLAMP, 1 - BCE_CLAMP]` before the log.
pub const BCE_CLAMP: f64 = 1e-7;

/// Reconstruction loss family. All three average over every element.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LossKind {
    L1,
    SmoothL1,
    #[default]
    L2,
}

impl LossKind {
    pub const ALL: [LossKind; 3] = [LossKind::L1, LossKind::SmoothL1, LossKind::L2];

    pub fn as_str(self) -> &'static str {
        match self {
            LossKind::L1 => "l1",
            LossKind::SmoothL1 => "smoothl1",
            LossKind::L2 => "l2",
        }
    }
}

impl fmt::Display for LossKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LossKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "l1" => Ok(LossKind::L1),
            "smoothl1" | "smooth_l1" | "smooth-l1" => Ok(LossKind::SmoothL1),
            "l2" | "mse" => Ok(LossKind::L2),
            other => Err(Error::Config(format!("unknown loss kind `{other}` (expected l1, smoothl1 or l2)"))),
        }
    }
}

/// Mean reconstruction loss between `x_hat` and `x` and its gradient with
/// respect to `x_hat`.
pub fn reconstruction_loss(kind: LossKind, x_hat: &DenseMatrix, x: &DenseMatrix) -> Result<(f64, DenseMatrix)> {
    x_hat.check_same_shape(x)?;
    let n = x.as_slice().len();
    if n == 0 {
        return Ok((0.0, DenseMatrix::zeros(x.rows(), x.cols())));
    }
    let scale = 1.0 / n as f64;
    let mut grad = DenseMatrix::zeros(x.rows(), x.cols());
    let mut total = 0.0;
    for ((g, &a), &b) in grad.as_mut_slice().iter_mut().zip(x_hat.as_slice()).zip(x.as_slice()) {
        let d = a - b;
        let (value, slope) = match kind {
            LossKind::L2 => (d * d, 2.0 * d),
            LossKind::L1 => (d.abs(), sign(d)),
            LossKind::SmoothL1 => {
                if d.abs() < 1.0 {
                    (0.5 * d * d, d)
                } else {
                    (d.abs() - 0.5, sign(d))
                }
            }
        };
        total += value;
        *g = slope * scale;
    }
    Ok((total * scale, grad))
}

fn sign(d: f64) -> f64 {
    if d > 0.0 {
        1.0
    } else if d < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Binary cross entropy of one probability against a {0, 1} target, with the
/// derivative with respect to `p`.
pub fn bce(p: f64, target: f64) -> (f64, f64) {
    let p = p.clamp(BCE_CLAMP, 1.0 - BCE_CLAMP);
    let value = -(target * p.ln() + (1.0 - target) * (1.0 - p).ln());
    let dp = -target / p + (1.0 - target) / (1.0 - p);
    (value.max(0.0), dp)
}

/// Batch-mean BCE over an `n x 1` probability column.
pub fn bce_batch(probs: &DenseMatrix, target: f64) -> Result<(f64, DenseMatrix)> {
    if probs.cols() != 1 {
        return Err(Error::Shape(format!("expected a single probability column, got {}", probs.cols())));
    }
    let n = probs.rows().max(1) as f64;
    let mut grad = DenseMatrix::zeros(probs.rows(), 1);
    let mut total = 0.0;
    for (g, &p) in grad.as_mut_slice().iter_mut().zip(probs.as_slice()) {
        let (v, d) = bce(p, target);
        total += v;
        *g = d / n;
    }
    Ok((total / n, grad))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(v: &[f64]) -> DenseMatrix {
        DenseMatrix::from_vec(1, v.len(), v.to_vec()).unwrap()
    }

    #[test]
    fn perfect_reconstruction_is_free() {
        let x = row(&[1.0, -2.0, 3.5]);
        for kind in LossKind::ALL {
            let (v, g) = reconstruction_loss(kind, &x, &x).unwrap();
            assert_eq!(v, 0.0);
            assert!(g.as_slice().iter().all(|&d| d == 0.0));
        }
    }

    #[test]
    fn single_feature_error_over_28() {
        let x = row(&[0.0; 28]);
        let mut xh = vec![0.0; 28];
        xh[0] = 2.0;
        let xh = row(&xh);
        let (l2, _) = reconstruction_loss(LossKind::L2, &xh, &x).unwrap();
        let (l1, _) = reconstruction_loss(LossKind::L1, &xh, &x).unwrap();
        let (sl1, _) = reconstruction_loss(LossKind::SmoothL1, &xh, &x).unwrap();
        assert!((l2 - 4.0 / 28.0).abs() < 1e-15);
        assert!((l2 - 0.142857).abs() < 1e-6);
        assert!((l1 - 2.0 / 28.0).abs() < 1e-15);
        assert!((l1 - 0.071429).abs() < 1e-6);
        assert!((sl1 - 1.5 / 28.0).abs() < 1e-15);
    }

    #[test]
    fn loss_gradients_match_finite_differences() {
        let x = row(&[0.3, -1.2, 2.0, 0.0]);
        let xh = row(&[0.1, 0.4, -0.5, 0.7]);
        for kind in LossKind::ALL {
            let (_, g) = reconstruction_loss(kind, &xh, &x).unwrap();
            for i in 0..4 {
                let h = 1e-6;
                let mut plus = xh.clone();
                plus.as_mut_slice()[i] += h;
                let mut minus = xh.clone();
                minus.as_mut_slice()[i] -= h;
                let fd = (reconstruction_loss(kind, &plus, &x).unwrap().0
                    - reconstruction_loss(kind, &minus, &x).unwrap().0)
                    / (2.0 * h);
                assert!((fd - g.as_slice()[i]).abs() < 1e-8, "{kind} {i}");
            }
        }
    }

    #[test]
    fn shape_mismatch_is_an_error() {
        assert!(reconstruction_loss(LossKind::L2, &row(&[1.0]), &row(&[1.0, 2.0])).is_err());
    }

    #[test]
    fn bce_reference_values() {
        assert!((bce(0.5, 1.0).0 - std::f64::consts::LN_2).abs() < 1e-6);
        assert!((bce(0.9, 0.0).0 - std::f64::consts::LN_10).abs() < 1e-6);
        assert!(bce(1.0, 1.0).0 < 1e-6);
        assert!(bce(0.0, 1.0).0.is_finite());
        let (_, d) = bce(0.25, 1.0);
        assert!((d + 4.0).abs() < 1e-12);
    }

    #[test]
    fn loss_kind_parses() {
        assert_eq!("SmoothL1".parse::<LossKind>().unwrap(), LossKind::SmoothL1);
        assert_eq!("l2".parse::<LossKind>().unwrap(), LossKind::L2);
        assert!("huber".parse::<LossKind>().is_err());
    }
}
