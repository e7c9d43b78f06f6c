//! Local surrogate explanations.
//!
//! An instance is explained by drawing perturbations from the reference
//! distribution, labelling them with a black box, weighting them with an
//! exponential kernel on standardized distance to the instance, and fitting a
//! weighted ridge regression on standardized features. Three black boxes are
//! wired to a [`DetectorModel`]:
//!
//! * [`ExplainerKind::Ae`]: the per-feature mean squared reconstruction error.
//! * [`ExplainerKind::C`]: the classifier probability, explained over a
//!   reconstructed feature vector.
//! * [`ExplainerKind::General`]: the end-to-end detector score.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::data::{self, FeatureStats, N_FEATURES};
use crate::detector::{mean_squared_error, DetectorModel, ScoreMode};
use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use crate::rng;

pub const DEFAULT_SAMPLES: usize = 5000;
pub const DEFAULT_TOP_K: usize = 6;
pub const MIN_FIT_SAMPLES: usize = 30;

/// `0.75 * sqrt(28)`.
pub fn default_kernel_width() -> f64 {
    0.75 * (N_FEATURES as f64).sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExplainerKind {
    Ae,
    C,
    General,
}

impl ExplainerKind {
    pub const ALL: [ExplainerKind; 3] = [ExplainerKind::Ae, ExplainerKind::C, ExplainerKind::General];

    pub fn as_str(self) -> &'static str {
        match self {
            ExplainerKind::Ae => "ae",
            ExplainerKind::C => "c",
            ExplainerKind::General => "general",
        }
    }

    fn output_name(self) -> &'static str {
        match self {
            ExplainerKind::Ae => "reconstruction error",
            ExplainerKind::C => "classifier output",
            ExplainerKind::General => "detector score",
        }
    }
}

impl fmt::Display for ExplainerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExplainerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ae" => Ok(ExplainerKind::Ae),
            "c" | "d" => Ok(ExplainerKind::C),
            "general" => Ok(ExplainerKind::General),
            other => Err(Error::Config(format!("unknown explainer `{other}` (expected ae, c or general)"))),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SamplingScheme {
    /// Independent per-feature Normal(mean, std) of the reference set.
    #[default]
    Gaussian,
    /// Rows resampled with replacement from the reference set.
    Bootstrap,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExplainConfig {
    pub n_samples: usize,
    pub kernel_width: f64,
    pub ridge_lambda: f64,
    pub sampling: SamplingScheme,
    /// Score used by the general explainer.
    pub score_mode: ScoreMode,
    pub seed: u64,
    /// When set, the model must have been trained on data with this fingerprint.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected_fingerprint: Option<String>,
}

impl Default for ExplainConfig {
    fn default() -> Self {
        ExplainConfig {
            n_samples: DEFAULT_SAMPLES,
            kernel_width: default_kernel_width(),
            ridge_lambda: 1.0,
            sampling: SamplingScheme::Gaussian,
            score_mode: ScoreMode::ClassifyReconstructed,
            seed: 0,
            expected_fingerprint: None,
        }
    }
}

impl ExplainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_samples < MIN_FIT_SAMPLES {
            return Err(Error::Config(format!(
                "need at least {MIN_FIT_SAMPLES} perturbation samples, got {}",
                self.n_samples
            )));
        }
        if !(self.kernel_width > 0.0 && self.kernel_width.is_finite()) {
            return Err(Error::Config("kernel width must be positive".into()));
        }
        if !(self.ridge_lambda >= 0.0 && self.ridge_lambda.is_finite()) {
            return Err(Error::Config("ridge strength must be non-negative".into()));
        }
        Ok(())
    }
}

/// Distribution the perturbations are drawn from.
#[derive(Clone, Debug, PartialEq)]
pub struct ReferenceSet {
    pub stats: FeatureStats,
    pub rows: DenseMatrix,
}

impl ReferenceSet {
    pub fn new(rows: DenseMatrix) -> Result<Self> {
        Ok(ReferenceSet {
            stats: FeatureStats::from_matrix(&rows)?,
            rows,
        })
    }

    /// The same rows after passing through the model's reconstructor, used as
    /// the sampling distribution of the classifier explainer.
    pub fn reconstructed(&self, model: &DetectorModel) -> Result<Self> {
        Self::new(model.reconstruct_batch(&self.rows)?)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerturbationSet {
    pub instance: Vec<f64>,
    pub samples: DenseMatrix,
    pub labels: Vec<f64>,
    pub weights: Vec<f64>,
    pub seed: u64,
}

/// `n` rows; row 0 is the instance itself, the rest come from the
/// reference distribution.
pub fn sample_perturbations(
    instance: &[f64],
    reference: &ReferenceSet,
    n: usize,
    scheme: SamplingScheme,
    seed: u64,
) -> Result<DenseMatrix> {
    let d = reference.stats.dim();
    if n < 2 {
        return Err(Error::Config(format!("need at least 2 perturbation samples, got {n}")));
    }
    if instance.len() != d {
        return Err(Error::Shape(format!("instance has {} features, reference has {d}", instance.len())));
    }
    let mut rng = rng::stream(seed, "perturb");
    let mut samples = DenseMatrix::zeros(n, d);
    samples.row_mut(0).copy_from_slice(instance);
    for r in 1..n {
        match scheme {
            SamplingScheme::Gaussian => {
                let row = samples.row_mut(r);
                for (j, v) in row.iter_mut().enumerate() {
                    let e: f64 = StandardNormal.sample(&mut rng);
                    *v = reference.stats.mean[j] + reference.stats.std[j] * e;
                }
            }
            SamplingScheme::Bootstrap => {
                let k = rng.random_range(0..reference.rows.rows());
                samples.row_mut(r).copy_from_slice(reference.rows.row(k));
            }
        }
    }
    if !samples.is_finite() {
        return Err(Error::NonFinite("perturbation sampling"));
    }
    Ok(samples)
}

/// Exponential kernel `exp(-d² / width²)`, floored at the smallest positive
/// double so every sample keeps a strictly positive weight.
pub fn kernel_weight(distance: f64, width: f64) -> f64 {
    (-(distance * distance) / (width * width)).exp().max(f64::MIN_POSITIVE)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearSurrogate {
    pub intercept: f64,
    pub coefficients: Vec<f64>,
    pub lambda: f64,
    /// Weighted R² on the fitting set.
    pub fidelity: f64,
}

impl LinearSurrogate {
    pub fn predict(&self, z: &[f64]) -> f64 {
        self.intercept + self.coefficients.iter().zip(z).map(|(c, v)| c * v).sum::<f64>()
    }
}

/// Minimizes `Σ wᵢ (yᵢ - b₀ - βᵀzᵢ)² + λ‖β‖²` with an unpenalized intercept.
///
/// Centres `z` and `y` on their weighted means, solves the reduced normal
/// equations `(Zᵀ W Z + λI) β = Zᵀ W y` by Cholesky, then recovers `b₀`.
pub fn fit_weighted_ridge(z: &DenseMatrix, y: &[f64], w: &[f64], lambda: f64) -> Result<LinearSurrogate> {
    let (n, p) = z.shape();
    if y.len() != n || w.len() != n {
        return Err(Error::Shape(format!("{n} samples, {} labels, {} weights", y.len(), w.len())));
    }
    if n < MIN_FIT_SAMPLES {
        return Err(Error::Input(format!("need at least {MIN_FIT_SAMPLES} samples to fit, got {n}")));
    }
    if lambda.is_nan() || lambda < 0.0 {
        return Err(Error::Config("ridge strength must be non-negative".into()));
    }
    if w.iter().any(|&v| !(v >= 0.0 && v.is_finite())) || y.iter().any(|v| !v.is_finite()) {
        return Err(Error::Input("weights must be non-negative and labels finite".into()));
    }
    let w_sum: f64 = w.iter().sum();
    if w_sum <= 0.0 {
        return Err(Error::Input("sample weights sum to zero".into()));
    }

    let mut z_mean = vec![0.0; p];
    let mut y_mean = 0.0;
    for (i, row) in z.row_iter().enumerate() {
        for (m, v) in z_mean.iter_mut().zip(row) {
            *m += w[i] * v;
        }
        y_mean += w[i] * y[i];
    }
    z_mean.iter_mut().for_each(|m| *m /= w_sum);
    y_mean /= w_sum;

    let mut gram = vec![0.0; p * p];
    let mut rhs = vec![0.0; p];
    let mut centred = vec![0.0; p];
    for (i, row) in z.row_iter().enumerate() {
        for j in 0..p {
            centred[j] = row[j] - z_mean[j];
        }
        let yc = y[i] - y_mean;
        for j in 0..p {
            let wj = w[i] * centred[j];
            rhs[j] += wj * yc;
            for k in 0..=j {
                gram[j * p + k] += wj * centred[k];
            }
        }
    }
    for j in 0..p {
        gram[j * p + j] += lambda;
    }
    let beta = cholesky_solve(&mut gram, &rhs, p)?;
    let intercept = y_mean - beta.iter().zip(&z_mean).map(|(b, m)| b * m).sum::<f64>();

    let mut surrogate = LinearSurrogate {
        intercept,
        coefficients: beta,
        lambda,
        fidelity: 0.0,
    };
    let mut ss_res = 0.0;
    let mut ss_tot = 0.0;
    for (i, row) in z.row_iter().enumerate() {
        let r = y[i] - surrogate.predict(row);
        ss_res += w[i] * r * r;
        ss_tot += w[i] * (y[i] - y_mean) * (y[i] - y_mean);
    }
    surrogate.fidelity = if ss_tot > 0.0 {
        1.0 - ss_res / ss_tot
    } else if ss_res <= f64::EPSILON * w_sum {
        1.0
    } else {
        0.0
    };
    Ok(surrogate)
}

/// In-place Cholesky of the lower triangle of `a` followed by two triangular
/// solves.
fn cholesky_solve(a: &mut [f64], b: &[f64], p: usize) -> Result<Vec<f64>> {
    let scale = (0..p).map(|j| a[j * p + j].abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    for j in 0..p {
        let mut diag = a[j * p + j];
        for k in 0..j {
            diag -= a[j * p + k] * a[j * p + k];
        }
        if diag.is_nan() || diag <= 1e-12 * scale {
            return Err(Error::Singular);
        }
        let l_jj = diag.sqrt();
        a[j * p + j] = l_jj;
        for i in j + 1..p {
            let mut v = a[i * p + j];
            for k in 0..j {
                v -= a[i * p + k] * a[j * p + k];
            }
            a[i * p + j] = v / l_jj;
        }
    }
    let mut x = b.to_vec();
    for i in 0..p {
        for k in 0..i {
            x[i] -= a[i * p + k] * x[k];
        }
        x[i] /= a[i * p + i];
    }
    for i in (0..p).rev() {
        for k in i + 1..p {
            x[i] -= a[k * p + i] * x[k];
        }
        x[i] /= a[i * p + i];
    }
    Ok(x)
}

/// Mean squared reconstruction error of one transaction.
pub fn ae_label(model: &DetectorModel, x: &[f64]) -> Result<f64> {
    let xr = model.reconstruct(x)?;
    Ok(mean_squared_error(&xr, x))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureContribution {
    pub feature: String,
    pub index: usize,
    /// `coefficient * standardized`.
    pub contribution: f64,
    pub coefficient: f64,
    pub standardized: f64,
    /// The feature value of the explained vector.
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Explanation {
    pub kind: ExplainerKind,
    /// Black-box output at the instance.
    pub predicted_value: f64,
    /// Surrogate output at the instance: `intercept + Σ contributions`
    /// (including `omitted_contribution`).
    pub surrogate_prediction: f64,
    pub intercept: f64,
    /// Sorted by `|contribution|` descending, ties by feature index.
    pub entries: Vec<FeatureContribution>,
    /// Sum of contributions dropped by [`top_k`].
    pub omitted_contribution: f64,
    pub fidelity: f64,
    pub ridge_lambda: f64,
    pub kernel_width: f64,
    pub sampling: SamplingScheme,
    pub score_mode: Option<ScoreMode>,
    pub seed: u64,
    pub n_samples: usize,
}

/// Explains `black_box` around `instance`. `black_box` maps an `n x d`
/// sample matrix to one output per row.
pub fn explain_black_box(
    kind: ExplainerKind,
    black_box: &dyn Fn(&DenseMatrix) -> Result<Vec<f64>>,
    instance: &[f64],
    reference: &ReferenceSet,
    cfg: &ExplainConfig,
) -> Result<(Explanation, PerturbationSet)> {
    cfg.validate()?;
    let samples = sample_perturbations(instance, reference, cfg.n_samples, cfg.sampling, cfg.seed)?;
    let labels = black_box(&samples)?;
    if labels.len() != samples.rows() || labels.iter().any(|v| !v.is_finite()) {
        return Err(Error::Input("black box must return one finite output per sample".into()));
    }

    let stats = &reference.stats;
    let z_instance = stats.standardize(instance);
    let mut z = samples.clone();
    let mut weights = Vec::with_capacity(samples.rows());
    for r in 0..samples.rows() {
        let zr = stats.standardize(samples.row(r));
        let d = zr.iter().zip(&z_instance).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        weights.push(kernel_weight(d, cfg.kernel_width));
        z.row_mut(r).copy_from_slice(&zr);
    }

    let surrogate = fit_weighted_ridge(&z, &labels, &weights, cfg.ridge_lambda)?;
    let mut entries: Vec<FeatureContribution> = (0..instance.len())
        .map(|j| FeatureContribution {
            feature: stats.feature_names.get(j).cloned().unwrap_or_else(|| format!("x{}", j + 1)),
            index: j,
            contribution: surrogate.coefficients[j] * z_instance[j],
            coefficient: surrogate.coefficients[j],
            standardized: z_instance[j],
            value: instance[j],
        })
        .collect();
    sort_entries(&mut entries);

    let explanation = Explanation {
        kind,
        predicted_value: labels[0],
        surrogate_prediction: surrogate.predict(&z_instance),
        intercept: surrogate.intercept,
        entries,
        omitted_contribution: 0.0,
        fidelity: surrogate.fidelity,
        ridge_lambda: cfg.ridge_lambda,
        kernel_width: cfg.kernel_width,
        sampling: cfg.sampling,
        score_mode: (kind == ExplainerKind::General).then_some(cfg.score_mode),
        seed: cfg.seed,
        n_samples: cfg.n_samples,
    };
    let set = PerturbationSet {
        instance: instance.to_vec(),
        samples,
        labels,
        weights,
        seed: cfg.seed,
    };
    Ok((explanation, set))
}

fn sort_entries(entries: &mut [FeatureContribution]) {
    entries.sort_by(|a, b| {
        b.contribution
            .abs()
            .total_cmp(&a.contribution.abs())
            .then(a.index.cmp(&b.index))
    });
}

/// Explains one of the detector's three input-output relations around
/// `instance`. For [`ExplainerKind::C`] the instance is a reconstructed
/// feature vector (see [`explain_transaction`]).
pub fn explain(
    kind: ExplainerKind,
    model: &DetectorModel,
    instance: &[f64],
    reference: &ReferenceSet,
    cfg: &ExplainConfig,
) -> Result<Explanation> {
    if !model.is_trained() {
        return Err(Error::Untrained);
    }
    if let Some(expected) = &cfg.expected_fingerprint {
        model.check_fingerprint(expected)?;
    }
    let names = data::feature_names();
    if reference.stats.feature_names != names {
        return Err(Error::Fingerprint {
            model: data::schema_fingerprint(&names),
            data: data::schema_fingerprint(&reference.stats.feature_names),
        });
    }
    if instance.len() != N_FEATURES {
        return Err(Error::Shape(format!("transactions have {N_FEATURES} features, got {}", instance.len())));
    }
    let mode = cfg.score_mode;
    let black_box = |x: &DenseMatrix| -> Result<Vec<f64>> {
        match kind {
            ExplainerKind::Ae => model.reconstruction_error_batch(x),
            ExplainerKind::C => model.classify_batch(x),
            ExplainerKind::General => model.score_batch(x, mode),
        }
    };
    Ok(explain_black_box(kind, &black_box, instance, reference, cfg)?.0)
}

/// Explains a raw transaction. The classifier explainer is run on the
/// transaction's reconstruction, sampled from `reconstructed_reference`.
pub fn explain_transaction(
    kind: ExplainerKind,
    model: &DetectorModel,
    transaction: &[f64],
    reference: &ReferenceSet,
    reconstructed_reference: &ReferenceSet,
    cfg: &ExplainConfig,
) -> Result<Explanation> {
    match kind {
        ExplainerKind::C => {
            let rx = model.reconstruct(transaction)?;
            explain(kind, model, &rx, reconstructed_reference, cfg)
        }
        _ => explain(kind, model, transaction, reference, cfg),
    }
}

/// Keeps the `k` largest contributions.
pub fn top_k(explanation: &Explanation, k: usize) -> Result<Explanation> {
    let n = explanation.entries.len();
    if k < 1 || k > n {
        return Err(Error::Config(format!("top-k must be within 1..={n}, got {k}")));
    }
    let mut out = explanation.clone();
    let dropped: f64 = out.entries[k..].iter().map(|e| e.contribution).sum();
    out.entries.truncate(k);
    out.omitted_contribution += dropped;
    Ok(out)
}

impl Explanation {
    /// `intercept + Σ contributions + omitted`, which equals
    /// `surrogate_prediction` up to rounding.
    pub fn contribution_total(&self) -> f64 {
        self.intercept + self.entries.iter().map(|e| e.contribution).sum::<f64>() + self.omitted_contribution
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    /// Aligned plain-text report: predicted value, then one row per feature
    /// with its contribution and value.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("explainer:        {}\n", self.kind));
        out.push_str(&format!("{:<18}{:.6}\n", format!("{}:", self.kind.output_name()), self.predicted_value));
        out.push_str(&format!("surrogate:        {:.6} (intercept {:.6})\n", self.surrogate_prediction, self.intercept));
        out.push_str(&format!("fidelity (R²):    {:.6}\n", self.fidelity));
        out.push_str(&format!("samples:          {} (seed {})\n\n", self.n_samples, self.seed));
        let width = self.entries.iter().map(|e| e.feature.len()).max().unwrap_or(7).max(7);
        out.push_str(&format!("{:<width$}  {:>14}  {:>12}\n", "feature", "contribution", "value"));
        for e in &self.entries {
            out.push_str(&format!("{:<width$}  {:>+14.6}  {:>12.4}\n", e.feature, e.contribution, e.value));
        }
        if self.omitted_contribution != 0.0 {
            out.push_str(&format!("{:<width$}  {:>+14.6}\n", "(others)", self.omitted_contribution));
        }
        out
    }

    /// Horizontal bar chart of the listed contributions.
    pub fn to_svg(&self) -> String {
        const W: f64 = 640.0;
        const ROW: f64 = 28.0;
        const LABEL: f64 = 80.0;
        let height = 60.0 + ROW * self.entries.len() as f64;
        let max = self.entries.iter().map(|e| e.contribution.abs()).fold(0.0, f64::max).max(1e-300);
        let axis = LABEL + (W - LABEL - 20.0) / 2.0;
        let half = (W - LABEL - 40.0) / 2.0;
        let mut s = format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{height}\" font-family=\"sans-serif\" font-size=\"12\">\n"
        );
        s.push_str(&format!(
            "<text x=\"10\" y=\"20\">{} explainer: {} = {:.4}</text>\n",
            self.kind,
            self.kind.output_name(),
            self.predicted_value
        ));
        s.push_str(&format!(
            "<line x1=\"{axis}\" y1=\"36\" x2=\"{axis}\" y2=\"{}\" stroke=\"#444\"/>\n",
            height - 10.0
        ));
        for (i, e) in self.entries.iter().enumerate() {
            let y = 40.0 + ROW * i as f64;
            let len = half * e.contribution.abs() / max;
            let (x, color) = if e.contribution >= 0.0 { (axis, "#d62728") } else { (axis - len, "#1f77b4") };
            s.push_str(&format!(
                "<text x=\"10\" y=\"{:.1}\">{}</text>\n<rect x=\"{x:.2}\" y=\"{y:.1}\" width=\"{len:.2}\" height=\"{:.1}\" fill=\"{color}\"/>\n<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"10\">{:+.4}</text>\n",
                y + 15.0,
                e.feature,
                ROW - 8.0,
                if e.contribution >= 0.0 { axis + len + 4.0 } else { axis + 4.0 },
                y + 14.0,
                e.contribution
            ));
        }
        s.push_str("</svg>\n");
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference(rows: usize, seed: u64) -> ReferenceSet {
        let mut rng = rng::stream(seed, "test");
        let data: Vec<f64> = (0..rows * N_FEATURES)
            .map(|k| {
                let e: f64 = StandardNormal.sample(&mut rng);
                e * (1.0 + (k % N_FEATURES) as f64 * 0.1) + (k % 3) as f64
            })
            .collect();
        ReferenceSet::new(DenseMatrix::from_vec(rows, N_FEATURES, data).unwrap()).unwrap()
    }

    #[test]
    fn kernel_values() {
        assert_eq!(kernel_weight(0.0, 2.0), 1.0);
        assert!((kernel_weight(2.0, 2.0) - 0.367879).abs() < 1e-6);
        assert!(kernel_weight(1.0, 2.0) > kernel_weight(1.5, 2.0));
        assert!(kernel_weight(1e6, 1.0) > 0.0);
        assert!((default_kernel_width() - 3.9686).abs() < 1e-4);
    }

    #[test]
    fn degenerate_reference_samples_the_mean() {
        let rows = DenseMatrix::from_rows(&vec![vec![0.5; N_FEATURES]; 4]).unwrap();
        let r = ReferenceSet::new(rows).unwrap();
        let instance = vec![3.0; N_FEATURES];
        let s = sample_perturbations(&instance, &r, 10, SamplingScheme::Gaussian, 1).unwrap();
        assert_eq!(s.row(0), instance.as_slice());
        for row in s.row_iter().skip(1) {
            assert!(row.iter().all(|&v| v == 0.5));
        }
    }

    #[test]
    fn sampling_is_seeded() {
        let r = reference(50, 1);
        let x = r.rows.row(0).to_vec();
        let a = sample_perturbations(&x, &r, 100, SamplingScheme::Gaussian, 4).unwrap();
        assert_eq!(a, sample_perturbations(&x, &r, 100, SamplingScheme::Gaussian, 4).unwrap());
        assert_ne!(a, sample_perturbations(&x, &r, 100, SamplingScheme::Gaussian, 5).unwrap());
        assert!(sample_perturbations(&x, &r, 1, SamplingScheme::Gaussian, 4).is_err());
        let b = sample_perturbations(&x, &r, 100, SamplingScheme::Bootstrap, 4).unwrap();
        for row in b.row_iter().skip(1) {
            assert!(r.rows.row_iter().any(|ref_row| ref_row == row));
        }
    }

    #[test]
    fn gaussian_sample_means_match_reference() {
        let r = reference(300, 2);
        let x = vec![0.0; N_FEATURES];
        let n = 5000;
        let s = sample_perturbations(&x, &r, n, SamplingScheme::Gaussian, 9).unwrap();
        let rest = s.select_rows(&(1..n).collect::<Vec<_>>());
        let means = rest.column_means();
        for j in 0..N_FEATURES {
            let tol = 4.0 * r.stats.std[j] / ((n - 1) as f64).sqrt();
            assert!((means[j] - r.stats.mean[j]).abs() < tol, "feature {j}");
        }
    }

    #[test]
    fn exact_linear_fit() {
        let r = reference(60, 3);
        let truth: Vec<f64> = (0..N_FEATURES).map(|j| (j as f64 - 10.0) * 0.3).collect();
        let y: Vec<f64> = r.rows.row_iter().map(|row| 2.5 + row.iter().zip(&truth).map(|(a, b)| a * b).sum::<f64>()).collect();
        let fit = fit_weighted_ridge(&r.rows, &y, &vec![1.0; 60], 0.0).unwrap();
        for (c, t) in fit.coefficients.iter().zip(&truth) {
            assert!((c - t).abs() < 1e-8);
        }
        assert!((fit.intercept - 2.5).abs() < 1e-8);
        assert!(fit.fidelity > 0.999_999);
    }

    #[test]
    fn heavy_ridge_shrinks_to_weighted_mean() {
        let r = reference(40, 4);
        let y: Vec<f64> = (0..40).map(|i| i as f64).collect();
        let w: Vec<f64> = (0..40).map(|i| 0.1 + (i % 5) as f64 * 0.2).collect();
        let fit = fit_weighted_ridge(&r.rows, &y, &w, 1e14).unwrap();
        let wmean = y.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>() / w.iter().sum::<f64>();
        assert!(fit.coefficients.iter().all(|c| c.abs() < 1e-9));
        assert!((fit.intercept - wmean).abs() < 1e-6);
    }

    #[test]
    fn singular_system_needs_ridge() {
        let mut rows = reference(40, 5).rows;
        for r in 0..40 {
            let v = rows.get(r, 0);
            rows.set(r, 1, 2.0 * v);
        }
        let y = vec![1.0; 40];
        assert!(matches!(fit_weighted_ridge(&rows, &y, &[1.0; 40], 0.0), Err(Error::Singular)));
        assert!(fit_weighted_ridge(&rows, &y, &[1.0; 40], 1.0).is_ok());
        assert!(fit_weighted_ridge(&rows.select_rows(&[0, 1, 2]), &y[..3], &[1.0; 3], 1.0).is_err());
    }

    #[test]
    fn linear_black_box_is_recovered() {
        let r = reference(200, 6);
        let truth: Vec<f64> = (0..N_FEATURES).map(|j| ((j * 7) % 11) as f64 - 5.5).collect();
        let t = truth.clone();
        let black_box = move |x: &DenseMatrix| -> Result<Vec<f64>> {
            Ok(x.row_iter().map(|row| 1.0 + row.iter().zip(&t).map(|(a, b)| a * b).sum::<f64>()).collect())
        };
        let instance = r.rows.row(3).to_vec();
        let cfg = ExplainConfig {
            ridge_lambda: 1e-6,
            seed: 2,
            ..Default::default()
        };
        let (e, set) = explain_black_box(ExplainerKind::General, &black_box, &instance, &r, &cfg).unwrap();
        assert!(e.fidelity >= 0.999);
        assert_eq!(set.samples.rows(), 5000);
        assert!(set.weights.iter().all(|&w| w > 0.0 && w <= 1.0));
        assert_eq!(set.weights[0], 1.0);
        for entry in &e.entries {
            let expected = truth[entry.index] * r.stats.std[entry.index];
            assert!((entry.coefficient - expected).abs() < 1e-6, "{}", entry.feature);
        }
        let mut expected_order: Vec<usize> = (0..N_FEATURES).collect();
        let z = r.stats.standardize(&instance);
        let key = |j: usize| (truth[j] * r.stats.std[j] * z[j]).abs();
        expected_order.sort_by(|&a, &b| key(b).total_cmp(&key(a)).then(a.cmp(&b)));
        assert_eq!(e.entries.iter().map(|x| x.index).collect::<Vec<_>>(), expected_order);
        assert!((e.contribution_total() - e.surrogate_prediction).abs() < 1e-10);
    }

    #[test]
    fn top_k_behaviour() {
        let r = reference(100, 7);
        let black_box = |x: &DenseMatrix| -> Result<Vec<f64>> { Ok(x.row_iter().map(|row| row[0] - row[1]).collect()) };
        let cfg = ExplainConfig {
            n_samples: 300,
            ..Default::default()
        };
        let (e, _) = explain_black_box(ExplainerKind::Ae, &black_box, r.rows.row(0), &r, &cfg).unwrap();
        assert_eq!(top_k(&e, 28).unwrap(), e);
        let six = top_k(&e, 6).unwrap();
        assert_eq!(six.entries.len(), 6);
        for w in six.entries.windows(2) {
            assert!(w[0].contribution.abs() >= w[1].contribution.abs());
        }
        assert!((six.contribution_total() - e.surrogate_prediction).abs() < 1e-10);
        assert!(top_k(&e, 0).is_err());
        assert!(top_k(&e, 29).is_err());
    }

    #[test]
    fn ties_keep_feature_order() {
        let mk = |index: usize, contribution: f64| FeatureContribution {
            feature: format!("V{}", index + 1),
            index,
            contribution,
            coefficient: 0.0,
            standardized: 0.0,
            value: 0.0,
        };
        let mut entries = vec![mk(5, 1.0), mk(2, -1.0), mk(0, 0.5), mk(9, 2.0)];
        sort_entries(&mut entries);
        assert_eq!(entries.iter().map(|e| e.index).collect::<Vec<_>>(), vec![9, 2, 5, 0]);
    }

    #[test]
    fn explainer_kind_parses() {
        assert_eq!("AE".parse::<ExplainerKind>().unwrap(), ExplainerKind::Ae);
        assert_eq!("d".parse::<ExplainerKind>().unwrap(), ExplainerKind::C);
        assert!("lime".parse::<ExplainerKind>().is_err());
    }
}
