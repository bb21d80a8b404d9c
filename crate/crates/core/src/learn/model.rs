//! Trained-model wrapper: kind dispatch, standardization, persistence.

use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::dataset::{schema_fingerprint, Dataset, Matrix, Scaler};
use super::gbdt::{train_gbdt, GbdtModel, GbdtParams};
use super::linear::{train_lr, LrModel, LrParams};
use super::mlp::{train_mlp, MlpModel, MlpParams};
use crate::error::{Error, Result};

/// Serialization format version written into every model artifact.
pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Lr,
    Gbdt,
    Mlp,
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            ModelKind::Lr => "lr",
            ModelKind::Gbdt => "gbdt",
            ModelKind::Mlp => "mlp",
        };
        f.write_str(s)
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<ModelKind> {
        match s.to_ascii_lowercase().as_str() {
            "lr" => Ok(ModelKind::Lr),
            "gbdt" => Ok(ModelKind::Gbdt),
            "mlp" => Ok(ModelKind::Mlp),
            other => Err(Error::InvalidConfig(format!(
                "unknown model kind {other:?}; expected lr, gbdt, or mlp"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct HyperParams {
    pub lr: LrParams,
    pub gbdt: GbdtParams,
    pub mlp: MlpParams,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
enum ModelParams {
    Lr(LrModel),
    Gbdt(GbdtModel),
    Mlp(MlpModel),
}

/// An immutable trained classifier with its input contract.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainedModel {
    pub format_version: u32,
    pub kind: ModelKind,
    pub schema: Vec<String>,
    pub schema_fingerprint: String,
    pub seed: u64,
    /// Present for LR and MLP, which train on z-scored features.
    scaler: Option<Scaler>,
    params: ModelParams,
}

/// Anything that maps feature rows to survival probabilities. Explanations
/// are generated against this interface, so test doubles can stand in for
/// trained models.
pub trait ProbClassifier {
    fn predict_rows(&self, x: &Matrix) -> Vec<f64>;
}

impl TrainedModel {
    /// Probabilities of the positive (survived) class.
    pub fn predict_proba(&self, x: &Matrix) -> Vec<f64> {
        let scaled;
        let input = match &self.scaler {
            Some(s) => {
                scaled = s.transform(x);
                &scaled
            }
            None => x,
        };
        match &self.params {
            ModelParams::Lr(m) => m.predict_rows(input),
            ModelParams::Gbdt(m) => m.predict_rows(input),
            ModelParams::Mlp(m) => m.predict_rows(input),
        }
    }

    /// Predict with a schema check against the dataset's fingerprint.
    pub fn predict_dataset(&self, d: &Dataset) -> Result<Vec<f64>> {
        let fp = d.schema_fingerprint();
        if fp != self.schema_fingerprint {
            return Err(Error::SchemaMismatch(format!(
                "model expects schema {} but dataset has {}",
                self.schema_fingerprint, fp
            )));
        }
        Ok(self.predict_proba(&d.x))
    }

    /// Training loss trace for GBDT models (loss after init and each round).
    pub fn gbdt_train_loss(&self) -> Option<&[f64]> {
        match &self.params {
            ModelParams::Gbdt(m) => Some(&m.train_loss),
            _ => None,
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_string(self)?;
        std::fs::write(path, json).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<TrainedModel> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        let model: TrainedModel = serde_json::from_slice(&bytes)?;
        if model.format_version != MODEL_FORMAT_VERSION {
            return Err(Error::invalid(format!(
                "unsupported model format version {} (tool reads {})",
                model.format_version, MODEL_FORMAT_VERSION
            )));
        }
        Ok(model)
    }
}

impl ProbClassifier for TrainedModel {
    fn predict_rows(&self, x: &Matrix) -> Vec<f64> {
        self.predict_proba(x)
    }
}

/// Train one classifier. LR and MLP standardize features with a scaler
/// fitted on this training fold; GBDT consumes raw features.
pub fn train_classifier(
    kind: ModelKind,
    train: &Dataset,
    hyper: &HyperParams,
    seed: u64,
) -> Result<TrainedModel> {
    if train.is_empty() {
        return Err(Error::invalid("train_classifier: empty training set"));
    }
    if !train.x.is_finite() {
        return Err(Error::invalid("train_classifier: non-finite features"));
    }
    let (scaler, params) = match kind {
        ModelKind::Gbdt => {
            let model = train_gbdt(&train.x, &train.y, &hyper.gbdt)?;
            (None, ModelParams::Gbdt(model))
        }
        ModelKind::Lr => {
            let scaler = Scaler::fit(&train.x);
            let x = scaler.transform(&train.x);
            let model = train_lr(&x, &train.y, &hyper.lr)?;
            (Some(scaler), ModelParams::Lr(model))
        }
        ModelKind::Mlp => {
            let scaler = Scaler::fit(&train.x);
            let x = scaler.transform(&train.x);
            let model = train_mlp(&x, &train.y, &hyper.mlp, seed)?;
            (Some(scaler), ModelParams::Mlp(model))
        }
    };
    Ok(TrainedModel {
        format_version: MODEL_FORMAT_VERSION,
        kind,
        schema: train.schema.clone(),
        schema_fingerprint: schema_fingerprint(&train.schema),
        seed,
        scaler,
        params,
    })
}
