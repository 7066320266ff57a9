//! Linear SVM symbol classifiers and the per-symbol classification step.

mod model;
mod svm;

use std::path::Path;

use thiserror::Error;

use crate::features::{feature_vector, FeatureError};
use crate::layout::{classify_by_geometry, SymbolImage};
use crate::script::{LabelId, Role, SymbolRegistry};

pub use model::{train, LinearModel, TrainOutcome, TrainingConfig, MODEL_VERSION};
pub use svm::{train_binary, Samples, SolverParams};

/// A label with its classifier confidence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate {
    pub label: LabelId,
    pub confidence: f64,
}

#[derive(Debug, Error)]
pub enum ClassifyError {
    #[error("too few training samples ({count}){}", label.map(|l| format!(" for label {l}")).unwrap_or_default())]
    InsufficientSamples { label: Option<LabelId>, count: usize },
    #[error("training data contains a single label")]
    SingleLabel,
    #[error("feature length {found}, model expects {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("top-k of {k} requested from a model with {labels} labels")]
    InvalidTopK { k: usize, labels: usize },
    #[error("invalid training configuration: {0}")]
    InvalidConfig(String),
    #[error("corrupt classifier model: {0}")]
    CorruptModel(String),
    #[error("classifier model version {found}, expected {expected}")]
    VersionMismatch { found: u32, expected: u32 },
    #[error("label {0} does not belong to this model")]
    ForeignLabel(LabelId),
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// The base-symbol and ottu classifiers used together.
#[derive(Debug, Clone)]
pub struct Models {
    pub base: LinearModel,
    pub ottu: LinearModel,
}

impl Models {
    /// Load `base.model` and `ottu.model` from a directory.
    pub fn load_dir(dir: &Path) -> Result<Self, ClassifyError> {
        Ok(Self {
            base: LinearModel::load(&dir.join("base.model"))?,
            ottu: LinearModel::load(&dir.join("ottu.model"))?,
        })
    }

    pub fn save_dir(&self, dir: &Path) -> Result<(), ClassifyError> {
        std::fs::create_dir_all(dir).map_err(|e| ClassifyError::Io {
            path: dir.display().to_string(),
            source: e,
        })?;
        self.base.save(&dir.join("base.model"))?;
        self.ottu.save(&dir.join("ottu.model"))
    }

    /// Check that each model only predicts labels of the right kind.
    pub fn validate(&self, registry: &SymbolRegistry) -> Result<(), ClassifyError> {
        let ottu_role = |id: LabelId| matches!(registry.get(id).map(|l| l.role), Some(Role::Ottu | Role::OttuComplex));
        for &l in &self.base.labels {
            if registry.get(l).is_none() || ottu_role(l) {
                return Err(ClassifyError::ForeignLabel(l));
            }
        }
        for &l in &self.ottu.labels {
            if !ottu_role(l) {
                return Err(ClassifyError::ForeignLabel(l));
            }
        }
        Ok(())
    }
}

/// Whether a label is recognised by the ottu model rather than the base one.
pub fn is_ottu_label(registry: &SymbolRegistry, id: LabelId) -> bool {
    matches!(registry.role(id), Role::Ottu | Role::OttuComplex)
}

/// Top-`k` candidates for one segmented symbol. Punctuation recognised from
/// geometry is returned as a single certain candidate; otherwise ottus go to
/// the ottu model and everything else to the base model.
pub fn classify_symbol(
    symbol: &SymbolImage,
    foreline: i32,
    baseline: i32,
    models: &Models,
    registry: &SymbolRegistry,
    k: usize,
) -> Result<Vec<Candidate>, ClassifyError> {
    if !symbol.is_ottu {
        if let Some(label) = classify_by_geometry(symbol, foreline, baseline).and_then(|p| registry.id(p.label_name())) {
            return Ok(vec![Candidate { label, confidence: 1.0 }]);
        }
    }
    let model = if symbol.is_ottu { &models.ottu } else { &models.base };
    let f = feature_vector(symbol)?;
    model.predict_topk(&f.0, k.min(model.labels.len()).max(1))
}
