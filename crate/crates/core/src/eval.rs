//! Linear discriminant analysis and stratified k-fold cross-validation.
//!
//! The classifier is the shared-covariance Gaussian model with uniform
//! priors. The pooled within-class covariance gets `ridge * mean(diag)` added
//! to its diagonal before factorization; with few samples per class and a few
//! hundred features the unregularized scatter matrix is singular.

use std::io::Write;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::descriptor::DescriptorConfig;
use crate::error::{Error, Result};
use crate::fsutil;

/// Relative ridge used when the caller does not pick one.
pub const DEFAULT_RIDGE: f64 = 1e-6;

/// Feature rows with class ids in `0..class_count`.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    features: Vec<Vec<f64>>,
    labels: Vec<usize>,
    class_names: Vec<String>,
}

impl LabeledDataset {
    pub fn new(
        features: Vec<Vec<f64>>,
        labels: Vec<usize>,
        class_names: Vec<String>,
    ) -> Result<Self> {
        if features.len() != labels.len() {
            return Err(Error::invalid(format!(
                "{} feature rows but {} labels",
                features.len(),
                labels.len()
            )));
        }
        if class_names.len() < 2 {
            return Err(Error::invalid(
                "a labeled dataset needs at least two classes",
            ));
        }
        let dim = features.first().map_or(0, Vec::len);
        for (i, row) in features.iter().enumerate() {
            if row.len() != dim {
                return Err(Error::invalid(format!(
                    "row {i} has {} features, expected {dim}",
                    row.len()
                )));
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::invalid(format!(
                    "row {i} contains a non-finite value"
                )));
            }
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= class_names.len()) {
            return Err(Error::invalid(format!(
                "label {bad} out of range for {} classes",
                class_names.len()
            )));
        }
        Ok(LabeledDataset {
            features,
            labels,
            class_names,
        })
    }

    /// Dataset whose classes are named by their id.
    pub fn unnamed(features: Vec<Vec<f64>>, labels: Vec<usize>) -> Result<Self> {
        let classes = labels.iter().max().map_or(0, |m| m + 1);
        Self::new(
            features,
            labels,
            (0..classes).map(|c| c.to_string()).collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dimension(&self) -> usize {
        self.features.first().map_or(0, Vec::len)
    }

    pub fn class_count(&self) -> usize {
        self.class_names.len()
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn features(&self) -> &[Vec<f64>] {
        &self.features
    }

    pub fn class_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.class_count()];
        for &l in &self.labels {
            sizes[l] += 1;
        }
        sizes
    }

    pub fn subset(&self, indices: &[usize]) -> LabeledDataset {
        LabeledDataset {
            features: indices.iter().map(|&i| self.features[i].clone()).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            class_names: self.class_names.clone(),
        }
    }

    /// Same features with labels shuffled under `seed`.
    pub fn with_permuted_labels(&self, seed: u64) -> LabeledDataset {
        let mut labels = self.labels.clone();
        labels.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        LabeledDataset {
            labels,
            ..self.clone()
        }
    }
}

/// A fitted discriminant: one linear score per class.
#[derive(Debug, Clone)]
pub struct LdaModel {
    means: Vec<DVector<f64>>,
    // column c holds the inverse covariance applied to mean c
    weights: DMatrix<f64>,
    bias: Vec<f64>,
    ridge: f64,
}

pub fn fit_lda(train: &LabeledDataset, ridge: f64) -> Result<LdaModel> {
    if !(ridge.is_finite() && ridge >= 0.0) {
        return Err(Error::invalid(format!(
            "ridge must be a finite non-negative number, got {ridge}"
        )));
    }
    let classes = train.class_count();
    let sizes = train.class_sizes();
    if let Some(c) = sizes.iter().position(|&s| s < 2) {
        return Err(Error::ModelFit(format!(
            "class {:?} has {} training samples, need at least 2",
            train.class_names[c], sizes[c]
        )));
    }
    let d = train.dimension();
    if d == 0 {
        return Err(Error::ModelFit("no features".into()));
    }
    let n = train.len();

    let mut means = vec![DVector::zeros(d); classes];
    for (row, &l) in train.features.iter().zip(&train.labels) {
        means[l] += DVector::from_column_slice(row);
    }
    for (m, &s) in means.iter_mut().zip(&sizes) {
        *m /= s as f64;
    }

    let mut centered = DMatrix::zeros(n, d);
    for (i, (row, &l)) in train.features.iter().zip(&train.labels).enumerate() {
        for j in 0..d {
            centered[(i, j)] = row[j] - means[l][j];
        }
    }
    let mut cov = centered.tr_mul(&centered) / (n - classes) as f64;

    let mean_diag = cov.diagonal().mean();
    let shift = if mean_diag > 0.0 {
        ridge * mean_diag
    } else {
        ridge
    };
    for j in 0..d {
        cov[(j, j)] += shift;
    }
    let chol = cov.cholesky().ok_or_else(|| {
        Error::ModelFit("within-class covariance is singular; use a positive ridge".into())
    })?;

    let mut mean_cols = DMatrix::zeros(d, classes);
    for (c, m) in means.iter().enumerate() {
        mean_cols.set_column(c, m);
    }
    let weights = chol.solve(&mean_cols);
    let bias = (0..classes)
        .map(|c| -0.5 * means[c].dot(&weights.column(c)))
        .collect();
    Ok(LdaModel {
        means,
        weights,
        bias,
        ridge,
    })
}

impl LdaModel {
    pub fn dimension(&self) -> usize {
        self.weights.nrows()
    }

    pub fn class_count(&self) -> usize {
        self.bias.len()
    }

    pub fn ridge(&self) -> f64 {
        self.ridge
    }

    pub fn class_mean(&self, class: usize) -> &[f64] {
        self.means[class].as_slice()
    }

    pub fn scores(&self, row: &[f64]) -> Result<Vec<f64>> {
        if row.len() != self.dimension() {
            return Err(Error::invalid(format!(
                "feature row has {} values, model expects {}",
                row.len(),
                self.dimension()
            )));
        }
        let x = DVector::from_column_slice(row);
        let s = self.weights.tr_mul(&x);
        Ok(s.iter().zip(&self.bias).map(|(a, b)| a + b).collect())
    }

    /// Class with the highest score; the lowest id wins a tie.
    pub fn predict(&self, row: &[f64]) -> Result<usize> {
        let scores = self.scores(row)?;
        let mut best = 0;
        for (c, &s) in scores.iter().enumerate().skip(1) {
            if s > scores[best] {
                best = c;
            }
        }
        Ok(best)
    }
}

/// Cross-validation outcome. Rates are percentages.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub ccr_mean: f64,
    /// Sample standard deviation of the per-fold rates.
    pub ccr_std: f64,
    pub per_fold: Vec<f64>,
    /// `confusion[true][predicted]`
    pub confusion: Vec<Vec<u32>>,
    pub class_names: Vec<String>,
    pub folds: usize,
    pub seed: u64,
    pub ridge: f64,
    /// Extraction settings of the evaluated features, when known.
    pub features: Option<DescriptorConfig>,
}

impl CvReport {
    pub fn correct(&self) -> u32 {
        (0..self.confusion.len())
            .map(|c| self.confusion[c][c])
            .sum()
    }

    pub fn total(&self) -> u32 {
        self.confusion.iter().flatten().sum()
    }

    /// `CCR: 95.50 (± 1.47)`
    pub fn summary(&self) -> String {
        format!("CCR: {:.2} (± {:.2})", self.ccr_mean, self.ccr_std)
    }

    pub fn write_json<W: Write>(&self, out: W) -> Result<()> {
        serde_json::to_writer_pretty(out, self)?;
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut bytes = serde_json::to_vec_pretty(self)?;
        bytes.push(b'\n');
        fsutil::write_atomic(path, |w| w.write_all(&bytes))?;
        Ok(())
    }
}

/// Fold id per sample. Each class is shuffled under `seed` and dealt round
/// robin, continuing where the previous class stopped, so per-fold class
/// counts differ by at most one and fold sizes stay balanced.
pub fn stratified_folds(data: &LabeledDataset, folds: usize, seed: u64) -> Result<Vec<usize>> {
    if folds < 2 {
        return Err(Error::invalid(format!(
            "need at least 2 folds, got {folds}"
        )));
    }
    let sizes = data.class_sizes();
    if let Some(c) = sizes.iter().position(|&s| s < folds) {
        return Err(Error::Stratification {
            class: data.class_names[c].clone(),
            count: sizes[c],
            folds,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignment = vec![0; data.len()];
    let mut next = 0;
    for class in 0..data.class_count() {
        let mut members: Vec<usize> = (0..data.len())
            .filter(|&i| data.labels[i] == class)
            .collect();
        members.shuffle(&mut rng);
        for i in members {
            assignment[i] = next;
            next = (next + 1) % folds;
        }
    }
    Ok(assignment)
}

pub fn cross_validate(
    data: &LabeledDataset,
    folds: usize,
    seed: u64,
    ridge: f64,
) -> Result<CvReport> {
    let assignment = stratified_folds(data, folds, seed)?;
    let outcomes: Vec<Vec<(usize, usize)>> = (0..folds)
        .into_par_iter()
        .map(|f| {
            let (test, train): (Vec<usize>, Vec<usize>) =
                (0..data.len()).partition(|&i| assignment[i] == f);
            let model = fit_lda(&data.subset(&train), ridge)?;
            test.iter()
                .map(|&i| Ok((data.labels[i], model.predict(&data.features[i])?)))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;

    let classes = data.class_count();
    let mut confusion = vec![vec![0u32; classes]; classes];
    let mut per_fold = Vec::with_capacity(folds);
    for fold in &outcomes {
        let mut correct = 0;
        for &(truth, pred) in fold {
            confusion[truth][pred] += 1;
            correct += usize::from(truth == pred);
        }
        per_fold.push(100.0 * correct as f64 / fold.len() as f64);
    }
    let mean = per_fold.iter().sum::<f64>() / folds as f64;
    let var = per_fold.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / (folds - 1) as f64;
    Ok(CvReport {
        ccr_mean: mean,
        ccr_std: var.sqrt(),
        per_fold,
        confusion,
        class_names: data.class_names.clone(),
        folds,
        seed,
        ridge,
        features: None,
    })
}
