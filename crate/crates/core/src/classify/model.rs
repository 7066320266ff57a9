use std::collections::BTreeMap;
use std::path::Path;

use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::SeedableRng;

use super::svm::{dot, train_binary, Samples, SolverParams};
use super::{Candidate, ClassifyError};
use crate::features::{FeatureVector, FEATURE_LEN};
use crate::script::LabelId;

const MAGIC: &[u8; 8] = b"KOCRLIN\0";
pub const MODEL_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct TrainingConfig {
    pub c_grid: Vec<f64>,
    pub folds: usize,
    pub seed: u64,
    /// Constant feature value used for the bias term.
    pub bias: f64,
    /// Softmax temperature applied to margins when reporting confidences.
    pub margin_scale: f64,
    pub eps: f64,
    pub max_iter: usize,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        Self {
            c_grid: vec![0.01, 0.1, 1.0, 10.0],
            folds: 5,
            seed: 1,
            bias: 1.0,
            margin_scale: 5.0,
            eps: 0.1,
            max_iter: 1000,
        }
    }
}

/// One-vs-rest linear classifier.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    pub labels: Vec<LabelId>,
    pub dim: usize,
    /// `labels.len() x dim`, row-major.
    pub weights: Vec<f32>,
    pub bias: Vec<f32>,
    pub bias_term: f32,
    pub c: f64,
    pub margin_scale: f64,
}

/// Training result with the cross-validation accuracy of each C tried.
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: LinearModel,
    pub cv_accuracy: Vec<(f64, f64)>,
}

struct Problem<'a> {
    samples: &'a Samples,
    targets: &'a [usize],
    labels: &'a [LabelId],
}

fn fit(p: &Problem, rows: &[usize], c: f64, cfg: &TrainingConfig) -> LinearModel {
    let dim = p.samples.dim;
    let mut weights = Vec::with_capacity(p.labels.len() * dim);
    let mut bias = Vec::with_capacity(p.labels.len());
    for (k, _) in p.labels.iter().enumerate() {
        let positive: Vec<bool> = rows.iter().map(|&r| p.targets[r] == k).collect();
        let params = SolverParams {
            c,
            bias: cfg.bias as f32,
            eps: cfg.eps,
            max_iter: cfg.max_iter,
            seed: cfg.seed.wrapping_add(k as u64),
        };
        let (w, b) = train_binary(p.samples, rows, &positive, &params);
        weights.extend(w);
        bias.push(b);
    }
    LinearModel {
        labels: p.labels.to_vec(),
        dim,
        weights,
        bias,
        bias_term: cfg.bias as f32,
        c,
        margin_scale: cfg.margin_scale,
    }
}

/// Train a one-vs-rest model, choosing C by stratified k-fold
/// cross-validation when the grid has more than one value. Ties in
/// accuracy go to the smaller C.
pub fn train(samples: &[(FeatureVector, LabelId)], config: &TrainingConfig) -> Result<TrainOutcome, ClassifyError> {
    if config.c_grid.is_empty() || config.c_grid.iter().any(|&c| c.is_nan() || c <= 0.0) || config.folds < 2 {
        return Err(ClassifyError::InvalidConfig("C grid must be non-empty and positive, folds >= 2".into()));
    }
    if samples.len() < 2 {
        return Err(ClassifyError::InsufficientSamples { label: None, count: samples.len() });
    }
    let mut per_label: BTreeMap<LabelId, Vec<usize>> = BTreeMap::new();
    for (i, (_, l)) in samples.iter().enumerate() {
        per_label.entry(*l).or_default().push(i);
    }
    if per_label.len() < 2 {
        return Err(ClassifyError::SingleLabel);
    }
    if let Some((l, v)) = per_label.iter().find(|(_, v)| v.len() < 2) {
        return Err(ClassifyError::InsufficientSamples { label: Some(*l), count: v.len() });
    }
    let labels: Vec<LabelId> = per_label.keys().copied().collect();
    let mut matrix = Samples::new(FEATURE_LEN);
    let mut targets = Vec::with_capacity(samples.len());
    for (f, l) in samples {
        if f.0.len() != FEATURE_LEN {
            return Err(ClassifyError::DimensionMismatch { expected: FEATURE_LEN, found: f.0.len() });
        }
        let row: Vec<f32> = f.0.iter().map(|&v| v as f32).collect();
        matrix.push(&row);
        targets.push(labels.binary_search(l).expect("label collected above"));
    }
    let problem = Problem {
        samples: &matrix,
        targets: &targets,
        labels: &labels,
    };

    let mut cv_accuracy = Vec::new();
    let mut best_c = config.c_grid[0];
    if config.c_grid.len() > 1 {
        let mut rng = StdRng::seed_from_u64(config.seed);
        let mut fold_of = vec![0usize; samples.len()];
        for idx in per_label.values() {
            let mut idx = idx.clone();
            idx.shuffle(&mut rng);
            for (pos, i) in idx.into_iter().enumerate() {
                fold_of[i] = pos % config.folds;
            }
        }
        let mut grid = config.c_grid.clone();
        grid.sort_by(f64::total_cmp);
        let mut best_acc = f64::NEG_INFINITY;
        for &c in &grid {
            let mut correct = 0usize;
            let mut total = 0usize;
            for fold in 0..config.folds {
                let train_rows: Vec<usize> = (0..samples.len()).filter(|&i| fold_of[i] != fold).collect();
                let test_rows: Vec<usize> = (0..samples.len()).filter(|&i| fold_of[i] == fold).collect();
                if test_rows.is_empty() {
                    continue;
                }
                let model = fit(&problem, &train_rows, c, config);
                for &r in &test_rows {
                    total += 1;
                    if model.labels[model.argmax(matrix.row(r))] == labels[targets[r]] {
                        correct += 1;
                    }
                }
            }
            let acc = correct as f64 / total.max(1) as f64;
            cv_accuracy.push((c, acc));
            if acc > best_acc {
                best_acc = acc;
                best_c = c;
            }
        }
    }
    let all: Vec<usize> = (0..samples.len()).collect();
    Ok(TrainOutcome {
        model: fit(&problem, &all, best_c, config),
        cv_accuracy,
    })
}

impl LinearModel {
    fn margins_f32(&self, x: &[f32]) -> Vec<f32> {
        (0..self.labels.len())
            .map(|k| dot(&self.weights[k * self.dim..(k + 1) * self.dim], x) + self.bias[k] * self.bias_term)
            .collect()
    }

    fn argmax(&self, x: &[f32]) -> usize {
        let m = self.margins_f32(x);
        let mut best = 0;
        for k in 1..m.len() {
            if m[k] > m[best] {
                best = k;
            }
        }
        best
    }

    /// Decision values, one per label in `labels` order.
    pub fn margins(&self, features: &[f64]) -> Result<Vec<f64>, ClassifyError> {
        if features.len() != self.dim {
            return Err(ClassifyError::DimensionMismatch { expected: self.dim, found: features.len() });
        }
        let x: Vec<f32> = features.iter().map(|&v| v as f32).collect();
        Ok(self.margins_f32(&x).into_iter().map(f64::from).collect())
    }

    /// The `k` most likely labels. Confidences are a softmax over all
    /// scaled margins; equal confidences are ordered by label id.
    pub fn predict_topk(&self, features: &[f64], k: usize) -> Result<Vec<Candidate>, ClassifyError> {
        if k == 0 || k > self.labels.len() {
            return Err(ClassifyError::InvalidTopK { k, labels: self.labels.len() });
        }
        let margins = self.margins(features)?;
        let scaled: Vec<f64> = margins.iter().map(|m| m * self.margin_scale).collect();
        let max = scaled.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let exps: Vec<f64> = scaled.iter().map(|s| (s - max).exp()).collect();
        let z: f64 = exps.iter().sum();
        let mut cands: Vec<Candidate> = self
            .labels
            .iter()
            .zip(&exps)
            .map(|(&label, e)| Candidate { label, confidence: e / z })
            .collect();
        cands.sort_by(|a, b| b.confidence.total_cmp(&a.confidence).then(a.label.cmp(&b.label)));
        cands.truncate(k);
        Ok(cands)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut b = Vec::with_capacity(64 + 4 * (self.weights.len() + 2 * self.labels.len()));
        b.extend_from_slice(MAGIC);
        b.extend_from_slice(&MODEL_VERSION.to_le_bytes());
        b.extend_from_slice(&(self.labels.len() as u32).to_le_bytes());
        b.extend_from_slice(&(self.dim as u32).to_le_bytes());
        b.extend_from_slice(&self.c.to_le_bytes());
        b.extend_from_slice(&self.margin_scale.to_le_bytes());
        b.extend_from_slice(&self.bias_term.to_le_bytes());
        for &l in &self.labels {
            b.extend_from_slice(&(l as u32).to_le_bytes());
        }
        for v in self.bias.iter().chain(&self.weights) {
            b.extend_from_slice(&v.to_le_bytes());
        }
        b
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, ClassifyError> {
        let corrupt = |m: &str| ClassifyError::CorruptModel(m.to_string());
        let mut r = Reader { bytes, pos: 0 };
        if r.take(8).ok_or_else(|| corrupt("truncated header"))? != MAGIC {
            return Err(corrupt("bad magic"));
        }
        let version = r.u32().ok_or_else(|| corrupt("truncated header"))?;
        if version != MODEL_VERSION {
            return Err(ClassifyError::VersionMismatch { found: version, expected: MODEL_VERSION });
        }
        let n = r.u32().ok_or_else(|| corrupt("truncated header"))? as usize;
        let dim = r.u32().ok_or_else(|| corrupt("truncated header"))? as usize;
        let c = r.f64().ok_or_else(|| corrupt("truncated header"))?;
        let margin_scale = r.f64().ok_or_else(|| corrupt("truncated header"))?;
        let bias_term = r.f32().ok_or_else(|| corrupt("truncated header"))?;
        let expected = n
            .checked_mul(dim)
            .and_then(|w| w.checked_add(2 * n))
            .and_then(|k| k.checked_mul(4))
            .ok_or_else(|| corrupt("size overflow"))?;
        if r.remaining() != expected {
            return Err(corrupt("payload length does not match header"));
        }
        let labels = (0..n).map(|_| r.u32().map(|v| v as LabelId)).collect::<Option<Vec<_>>>().ok_or_else(|| corrupt("truncated"))?;
        let bias = (0..n).map(|_| r.f32()).collect::<Option<Vec<_>>>().ok_or_else(|| corrupt("truncated"))?;
        let weights = (0..n * dim).map(|_| r.f32()).collect::<Option<Vec<_>>>().ok_or_else(|| corrupt("truncated"))?;
        if weights.iter().chain(&bias).any(|v| !v.is_finite()) {
            return Err(corrupt("non-finite weight"));
        }
        Ok(Self {
            labels,
            dim,
            weights,
            bias,
            bias_term,
            c,
            margin_scale,
        })
    }

    pub fn save(&self, path: &Path) -> Result<(), ClassifyError> {
        std::fs::write(path, self.to_bytes()).map_err(|e| ClassifyError::Io {
            path: path.display().to_string(),
            source: e,
        })
    }

    pub fn load(path: &Path) -> Result<Self, ClassifyError> {
        let bytes = std::fs::read(path).map_err(|e| ClassifyError::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        Self::from_bytes(&bytes)
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Option<&'a [u8]> {
        let s = self.bytes.get(self.pos..self.pos + n)?;
        self.pos += n;
        Some(s)
    }
    fn remaining(&self) -> usize {
        self.bytes.len() - self.pos
    }
    fn u32(&mut self) -> Option<u32> {
        self.take(4).map(|s| u32::from_le_bytes(s.try_into().expect("4 bytes")))
    }
    fn f32(&mut self) -> Option<f32> {
        self.take(4).map(|s| f32::from_le_bytes(s.try_into().expect("4 bytes")))
    }
    fn f64(&mut self) -> Option<f64> {
        self.take(8).map(|s| f64::from_le_bytes(s.try_into().expect("8 bytes")))
    }
}
