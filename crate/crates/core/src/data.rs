//! Ingestion of the credit-card transaction CSV, the balanced train/test split
//! and per-feature reference statistics.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::Read;
use std::path::Path;

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use crate::rng;

pub const N_FEATURES: usize = 28;

/// Fraud cases (and genuine cases) placed in the balanced test set.
pub const TEST_PER_CLASS: usize = 490;

pub const MANIFEST_VERSION: u64 = 1;

/// Smallest standard deviation used when dividing by a feature's spread.
pub const STD_FLOOR: f64 = 1e-12;

pub fn feature_names() -> Vec<String> {
    (1..=N_FEATURES).map(|i| format!("V{i}")).collect()
}

fn expected_header() -> Vec<String> {
    let mut h = vec!["Time".to_string()];
    h.extend(feature_names());
    h.push("Amount".into());
    h.push("Class".into());
    h
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
pub enum Class {
    Genuine,
    Fraud,
}

impl Class {
    pub fn as_u8(self) -> u8 {
        match self {
            Class::Genuine => 0,
            Class::Fraud => 1,
        }
    }

    pub fn is_fraud(self) -> bool {
        self == Class::Fraud
    }
}

impl From<Class> for u8 {
    fn from(c: Class) -> u8 {
        c.as_u8()
    }
}

impl TryFrom<u8> for Class {
    type Error = String;

    fn try_from(v: u8) -> std::result::Result<Self, String> {
        match v {
            0 => Ok(Class::Genuine),
            1 => Ok(Class::Fraud),
            other => Err(format!("class label must be 0 or 1, got {other}")),
        }
    }
}

/// One labelled transaction. Only `features` feed the models; `time` and
/// `amount` are carried along for reports.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransactionRecord {
    pub features: [f64; N_FEATURES],
    pub time: f64,
    pub amount: f64,
    pub label: Class,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetSchema {
    pub feature_names: Vec<String>,
    pub n_features: usize,
    pub row_count: usize,
    /// `[genuine, fraud]`
    pub class_counts: [usize; 2],
}

impl DatasetSchema {
    pub fn from_records(records: &[TransactionRecord]) -> Self {
        let fraud = records.iter().filter(|r| r.label.is_fraud()).count();
        DatasetSchema {
            feature_names: feature_names(),
            n_features: N_FEATURES,
            row_count: records.len(),
            class_counts: [records.len() - fraud, fraud],
        }
    }
}

pub fn load_csv(path: impl AsRef<Path>) -> Result<(Vec<TransactionRecord>, DatasetSchema)> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(file)
}

/// Parses `"Time","V1",…,"V28","Amount","Class"` rows. Row numbers in errors
/// are 1-based data rows (the header is not counted).
pub fn read_csv<R: Read>(reader: R) -> Result<(Vec<TransactionRecord>, DatasetSchema)> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).flexible(true).from_reader(reader);
    let mut rows = rdr.records();
    let header = match rows.next() {
        None => return Err(Error::Schema("file is empty; expected a header row".into())),
        Some(h) => h?,
    };
    let header: Vec<String> = header.iter().map(|s| s.trim().to_string()).collect();
    if header != expected_header() {
        return Err(Error::Schema(format!(
            "unexpected header {:?}; expected Time, V1..V28, Amount, Class",
            header
        )));
    }
    let width = header.len();

    let mut records = Vec::new();
    for (i, row) in rows.enumerate() {
        let row_no = i + 1;
        let row = row.map_err(|e| Error::Parse {
            row: row_no,
            message: e.to_string(),
        })?;
        if row.len() != width {
            return Err(Error::Parse {
                row: row_no,
                message: format!("{} columns, expected {width}", row.len()),
            });
        }
        let mut values = [0.0; 31];
        for (j, cell) in row.iter().enumerate() {
            let v: f64 = cell.trim().parse().map_err(|_| Error::Parse {
                row: row_no,
                message: format!("column {} (`{}`) is not a number: {cell:?}", j + 1, header[j]),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    row: row_no,
                    message: format!("column {} (`{}`) is not finite", j + 1, header[j]),
                });
            }
            values[j] = v;
        }
        let label = match values[30] {
            0.0 => Class::Genuine,
            1.0 => Class::Fraud,
            v => {
                return Err(Error::Parse {
                    row: row_no,
                    message: format!("class label must be 0 or 1, got {v}"),
                })
            }
        };
        let mut features = [0.0; N_FEATURES];
        features.copy_from_slice(&values[1..=N_FEATURES]);
        records.push(TransactionRecord {
            features,
            time: values[0],
            amount: values[29],
            label,
        });
    }
    let schema = DatasetSchema::from_records(&records);
    Ok((records, schema))
}

/// Writes records in the same layout `read_csv` accepts.
pub fn write_csv(path: impl AsRef<Path>, records: &[TransactionRecord]) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::WriterBuilder::new().quote_style(csv::QuoteStyle::NonNumeric).from_writer(file);
    w.write_record(expected_header())?;
    for r in records {
        let mut row = Vec::with_capacity(31);
        row.push(r.time.to_string());
        row.extend(r.features.iter().map(f64::to_string));
        row.push(r.amount.to_string());
        row.push(r.label.as_u8().to_string());
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Stacks the features of the selected records into a matrix.
pub fn features_matrix(records: &[TransactionRecord], indices: &[usize]) -> DenseMatrix {
    let mut data = Vec::with_capacity(indices.len() * N_FEATURES);
    for &i in indices {
        data.extend_from_slice(&records[i].features);
    }
    DenseMatrix::from_vec(indices.len(), N_FEATURES, data).expect("records hold finite features")
}

pub fn all_features(records: &[TransactionRecord]) -> DenseMatrix {
    let idx: Vec<usize> = (0..records.len()).collect();
    features_matrix(records, &idx)
}

/// Hex SHA-256 over the feature names and the exact bits of the selected rows.
pub fn fingerprint(records: &[TransactionRecord], indices: &[usize]) -> String {
    let mut h = Sha256::new();
    h.update(feature_names().join(",").as_bytes());
    h.update((indices.len() as u64).to_le_bytes());
    for &i in indices {
        h.update((i as u64).to_le_bytes());
        for v in &records[i].features {
            h.update(v.to_bits().to_le_bytes());
        }
    }
    hex::encode(h.finalize())
}

/// Hex SHA-256 over the feature names only.
pub fn schema_fingerprint(names: &[String]) -> String {
    let mut h = Sha256::new();
    h.update(names.join(",").as_bytes());
    hex::encode(h.finalize())
}

/// Balanced test set plus genuine-only training set, as record indices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DataSplit {
    pub seed: u64,
    pub train: Vec<usize>,
    pub test: Vec<usize>,
    pub discarded: Vec<usize>,
}

impl DataSplit {
    pub fn test_labels(&self, records: &[TransactionRecord]) -> Vec<Class> {
        self.test.iter().map(|&i| records[i].label).collect()
    }
}

/// Seeded uniform choice of `per_class` fraud and `per_class` genuine records
/// for the test set. The remaining genuine records train; unused fraud
/// records are discarded.
pub fn split_balanced(records: &[TransactionRecord], per_class: usize, seed: u64) -> Result<DataSplit> {
    let (fraud, genuine): (Vec<usize>, Vec<usize>) = (0..records.len()).partition(|&i| records[i].label.is_fraud());
    if fraud.len() < per_class || genuine.len() < 2 * per_class {
        return Err(Error::Insufficient(format!(
            "need at least {per_class} fraud and {} genuine records, found {} and {}",
            2 * per_class,
            fraud.len(),
            genuine.len()
        )));
    }
    let mut rng = rng::stream(seed, "split");
    let pick_fraud: BTreeSet<usize> = index::sample(&mut rng, fraud.len(), per_class)
        .into_iter()
        .map(|k| fraud[k])
        .collect();
    let pick_genuine: BTreeSet<usize> = index::sample(&mut rng, genuine.len(), per_class)
        .into_iter()
        .map(|k| genuine[k])
        .collect();

    let test: Vec<usize> = pick_fraud.union(&pick_genuine).copied().collect();
    let train = genuine.iter().copied().filter(|i| !pick_genuine.contains(i)).collect();
    let discarded = fraud.iter().copied().filter(|i| !pick_fraud.contains(i)).collect();
    Ok(DataSplit {
        seed,
        train,
        test,
        discarded,
    })
}

/// The 490 + 490 balanced split.
pub fn split_paper(records: &[TransactionRecord], seed: u64) -> Result<DataSplit> {
    split_balanced(records, TEST_PER_CLASS, seed)
}

/// On-disk replay record of a split. Indices are 0-based data rows.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitManifest {
    pub version: u64,
    pub seed: u64,
    pub schema: DatasetSchema,
    pub train_fingerprint: String,
    pub train_indices: Vec<usize>,
    pub test_indices: Vec<usize>,
    pub discarded_indices: Vec<usize>,
}

impl SplitManifest {
    pub fn new(records: &[TransactionRecord], split: &DataSplit) -> Self {
        SplitManifest {
            version: MANIFEST_VERSION,
            seed: split.seed,
            schema: DatasetSchema::from_records(records),
            train_fingerprint: fingerprint(records, &split.train),
            train_indices: split.train.clone(),
            test_indices: split.test.clone(),
            discarded_indices: split.discarded.clone(),
        }
    }

    pub fn split(&self) -> DataSplit {
        DataSplit {
            seed: self.seed,
            train: self.train_indices.clone(),
            test: self.test_indices.clone(),
            discarded: self.discarded_indices.clone(),
        }
    }

    /// Checks that `records` are the rows this manifest was cut from.
    pub fn verify(&self, records: &[TransactionRecord]) -> Result<()> {
        let n = records.len();
        if let Some(&bad) = self
            .train_indices
            .iter()
            .chain(&self.test_indices)
            .chain(&self.discarded_indices)
            .find(|&&i| i >= n)
        {
            return Err(Error::Input(format!("manifest index {bad} exceeds {n} loaded records")));
        }
        let actual = fingerprint(records, &self.train_indices);
        if actual != self.train_fingerprint {
            return Err(Error::Fingerprint {
                model: self.train_fingerprint.clone(),
                data: actual,
            });
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let m: SplitManifest = serde_json::from_str(&text)?;
        if m.version != MANIFEST_VERSION {
            return Err(Error::Version {
                found: m.version,
                expected: MANIFEST_VERSION,
            });
        }
        Ok(m)
    }
}

/// Population mean and standard deviation per feature.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureStats {
    pub feature_names: Vec<String>,
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl FeatureStats {
    /// Welford's single-pass update over the rows of `m`.
    pub fn from_matrix(m: &DenseMatrix) -> Result<Self> {
        if m.rows() == 0 {
            return Err(Error::Input("feature statistics need at least one row".into()));
        }
        let d = m.cols();
        let mut mean = vec![0.0; d];
        let mut m2 = vec![0.0; d];
        for (k, row) in m.row_iter().enumerate() {
            let count = (k + 1) as f64;
            for j in 0..d {
                let delta = row[j] - mean[j];
                mean[j] += delta / count;
                m2[j] += delta * (row[j] - mean[j]);
            }
        }
        let n = m.rows() as f64;
        let std = m2.iter().map(|v| (v / n).max(0.0).sqrt()).collect();
        let feature_names = if d == N_FEATURES {
            feature_names()
        } else {
            (1..=d).map(|i| format!("x{i}")).collect()
        };
        Ok(FeatureStats {
            feature_names,
            mean,
            std,
        })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// Standard deviations with the division floor applied.
    pub fn floored_std(&self) -> Vec<f64> {
        self.std.iter().map(|s| s.max(STD_FLOOR)).collect()
    }

    pub fn standardize(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(&self.mean)
            .zip(self.floored_std())
            .map(|((v, m), s)| (v - m) / s)
            .collect()
    }

    pub fn unstandardize(&self, z: &[f64]) -> Vec<f64> {
        z.iter()
            .zip(&self.mean)
            .zip(self.floored_std())
            .map(|((v, m), s)| v * s + m)
            .collect()
    }
}

pub fn feature_stats(records: &[TransactionRecord]) -> Result<FeatureStats> {
    if records.is_empty() {
        return Err(Error::Input("feature statistics need at least one record".into()));
    }
    FeatureStats::from_matrix(&all_features(records))
}

/// Uniform sample without replacement of `count` records of `class`, never
/// touching an index in `exclude`. Returned indices are ascending.
pub fn sample_subset<R: Rng>(
    records: &[TransactionRecord],
    class: Class,
    count: usize,
    exclude: &BTreeSet<usize>,
    rng: &mut R,
) -> Result<Vec<usize>> {
    let pool: Vec<usize> = (0..records.len())
        .filter(|i| records[*i].label == class && !exclude.contains(i))
        .collect();
    if count > pool.len() {
        return Err(Error::Insufficient(format!(
            "requested {count} {class:?} records but only {} are available",
            pool.len()
        )));
    }
    let mut out: Vec<usize> = index::sample(rng, pool.len(), count).into_iter().map(|k| pool[k]).collect();
    out.sort_unstable();
    Ok(out)
}
