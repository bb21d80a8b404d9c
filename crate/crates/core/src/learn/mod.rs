//! Imbalance-aware training and evaluation: SMOTE, three from-scratch
//! classifiers, ROC/AUC, majority-vote ensembles, and the ablation grid.

pub mod ablation;
mod dataset;
mod ensemble;
mod gbdt;
mod linear;
mod metrics;
mod mlp;
mod model;
mod smote;
mod split;

pub use ablation::{
    ablation_rows, run_ablation, AblationConfig, AblationRow, AblationTable, FeatureFamily,
};
pub use dataset::{
    assemble_dataset, schema_fingerprint, Dataset, JoinReport, Matrix, Scaler, SplitTag,
};
pub use ensemble::majority_vote;
pub use gbdt::{train_gbdt, GbdtModel, GbdtParams, Tree, TreeNode};
pub use linear::{train_lr, LrModel, LrParams};
pub use metrics::{roc_auc, EvalReport};
pub use mlp::{train_mlp, MlpModel, MlpParams};
pub use model::{
    train_classifier, HyperParams, ModelKind, ProbClassifier, TrainedModel, MODEL_FORMAT_VERSION,
};
pub use smote::{oversample, smote_rows, SmoteConfig, SmoteReport, SyntheticPoint};
pub use split::{stratified_indices, stratified_split};

use std::collections::BTreeMap;

use crate::corpus::Snapshot;
use crate::error::Result;
use crate::text::{bow_vector, polarity, preprocess, Polarity, PolarityMap, Vocabulary};

/// Per-review sentiment dataset: one row per review, bag-of-words features,
/// polarity as the binary label (positive class = positive polarity).
/// Neutral reviews (alternative polarity map only) are dropped.
pub fn sentiment_dataset(
    s: &Snapshot,
    vocab: &Vocabulary,
    map: PolarityMap,
) -> Result<Dataset> {
    let mut ids = Vec::new();
    let mut rows = Vec::new();
    let mut y = Vec::new();
    for r in &s.reviews {
        let label = match polarity(r.stars, map) {
            Polarity::Positive => true,
            Polarity::Negative => false,
            Polarity::Neutral => continue,
        };
        let tokens = preprocess(&r.text);
        let counts = bow_vector(tokens.iter().map(String::as_str), vocab);
        ids.push(r.review_id.clone());
        rows.push(counts.into_iter().map(f64::from).collect());
        y.push(label);
    }
    if ids.is_empty() {
        return Err(crate::error::Error::invalid(
            "sentiment dataset is empty: no labelable reviews",
        ));
    }
    let schema: Vec<String> = vocab.terms().iter().map(|t| format!("bow_{t}")).collect();
    Ok(Dataset {
        ids,
        schema,
        x: Matrix::from_rows(rows),
        y,
        tag: None,
    })
}

/// Survival labels keyed by business id, ready for dataset assembly.
pub fn label_map(labels: &[crate::corpus::LabeledRestaurant]) -> BTreeMap<String, bool> {
    labels
        .iter()
        .map(|l| {
            (
                l.business_id.clone(),
                l.label == crate::corpus::SurvivalLabel::Survived,
            )
        })
        .collect()
}
