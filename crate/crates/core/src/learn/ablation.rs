//! Feature-family ablation grid.
//!
//! Eleven rows: each family alone (G, U, A, L), geography+mobility (GU),
//! everything (ALL), and every leave-out complement (-GU, -G, -U, -A, -L),
//! each scored with GBDT and MLP. Single-family rows are single models;
//! multi-family rows are equal-weight majority-vote ensembles of
//! per-family models, scored by their mean probability.

use std::collections::BTreeMap;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dataset::{Dataset, Matrix};
use super::ensemble::majority_vote;
use super::metrics::roc_auc;
use super::model::{train_classifier, HyperParams, ModelKind};
use super::smote::{oversample, SmoteConfig};
use super::split::stratified_indices;
use crate::error::{Error, Result};
use crate::seed;
use crate::table::FeatureTable;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureFamily {
    Geography,
    Mobility,
    Attributes,
    Linguistic,
}

impl FeatureFamily {
    pub fn all() -> [FeatureFamily; 4] {
        [
            FeatureFamily::Geography,
            FeatureFamily::Mobility,
            FeatureFamily::Attributes,
            FeatureFamily::Linguistic,
        ]
    }

    /// Single-letter code used in the ablation grid.
    pub fn letter(self) -> &'static str {
        match self {
            FeatureFamily::Geography => "G",
            FeatureFamily::Mobility => "U",
            FeatureFamily::Attributes => "A",
            FeatureFamily::Linguistic => "L",
        }
    }

    /// Feature-table family name this maps to.
    pub fn table_name(self) -> &'static str {
        match self {
            FeatureFamily::Geography => "geo",
            FeatureFamily::Mobility => "mobility",
            FeatureFamily::Attributes => "attributes",
            FeatureFamily::Linguistic => "text",
        }
    }
}

impl std::fmt::Display for FeatureFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.letter())
    }
}

/// The canonical eleven-row grid.
pub fn ablation_rows() -> Vec<(String, Vec<FeatureFamily>)> {
    use FeatureFamily::*;
    vec![
        ("G".to_string(), vec![Geography]),
        ("U".to_string(), vec![Mobility]),
        ("A".to_string(), vec![Attributes]),
        ("L".to_string(), vec![Linguistic]),
        ("GU".to_string(), vec![Geography, Mobility]),
        ("ALL".to_string(), vec![Geography, Mobility, Attributes, Linguistic]),
        ("-GU".to_string(), vec![Attributes, Linguistic]),
        ("-G".to_string(), vec![Mobility, Attributes, Linguistic]),
        ("-U".to_string(), vec![Geography, Attributes, Linguistic]),
        ("-A".to_string(), vec![Geography, Mobility, Linguistic]),
        ("-L".to_string(), vec![Geography, Mobility, Attributes]),
    ]
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AblationConfig {
    pub test_fraction: f64,
    pub smote: SmoteConfig,
    pub hyper: HyperParams,
}

impl Default for AblationConfig {
    fn default() -> Self {
        AblationConfig {
            test_fraction: 0.2,
            smote: SmoteConfig::default(),
            hyper: HyperParams::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AblationRow {
    pub features: String,
    pub gbdt: Option<f64>,
    pub mlp: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AblationTable {
    pub rows: Vec<AblationRow>,
    pub warnings: Vec<String>,
    /// Human-readable record of the evaluation protocol.
    pub protocol: String,
}

impl AblationTable {
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("features,gbdt,mlp\n");
        let fmt = |v: Option<f64>| v.map_or(String::new(), |a| format!("{a:.6}"));
        for row in &self.rows {
            out.push_str(&format!(
                "{},{},{}\n",
                row.features,
                fmt(row.gbdt),
                fmt(row.mlp)
            ));
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv_string()).map_err(|e| Error::io(path, e))
    }

    pub fn auc(&self, features: &str, kind: ModelKind) -> Option<f64> {
        let row = self.rows.iter().find(|r| r.features == features)?;
        match kind {
            ModelKind::Gbdt => row.gbdt,
            ModelKind::Mlp => row.mlp,
            ModelKind::Lr => None,
        }
    }
}

/// Per-family single-table dataset over a fixed id population, preserving
/// the population order so folds align across families.
fn family_dataset(
    family: FeatureFamily,
    table: &FeatureTable,
    population: &[String],
    labels: &BTreeMap<String, bool>,
) -> Dataset {
    let index = table.id_index();
    let mut x = Matrix::zeros(0, table.columns.len());
    let mut y = Vec::with_capacity(population.len());
    for id in population {
        x.push_row(&table.rows[index[id.as_str()]]);
        y.push(labels[id]);
    }
    let schema = table
        .columns
        .iter()
        .map(|c| format!("{}.{c}", family.table_name()))
        .collect();
    Dataset {
        ids: population.to_vec(),
        schema,
        x,
        y,
        tag: None,
    }
}

/// Run the full grid. Rows whose families lack a feature table are skipped
/// with a warning. Everything is deterministic under `master_seed`.
pub fn run_ablation(
    tables: &BTreeMap<FeatureFamily, FeatureTable>,
    labels: &BTreeMap<String, bool>,
    config: &AblationConfig,
    master_seed: u64,
) -> Result<AblationTable> {
    let mut warnings: Vec<String> = FeatureFamily::all()
        .iter()
        .filter(|f| !tables.contains_key(f))
        .map(|f| format!("feature table for {} missing; dependent rows skipped", f.letter()))
        .collect();

    // Population: labeled ids present in every available table.
    let mut population: Vec<String> = labels
        .keys()
        .filter(|id| {
            tables
                .values()
                .all(|t| t.ids.iter().any(|tid| tid == *id))
        })
        .cloned()
        .collect();
    population.sort();
    if population.is_empty() {
        return Err(Error::invalid(
            "ablation: no labeled id appears in every available feature table",
        ));
    }
    let y: Vec<bool> = population.iter().map(|id| labels[id]).collect();
    let split_seed = seed::derive(master_seed, "ablation:split");
    let (train_idx, test_idx) = stratified_indices(&y, config.test_fraction, split_seed)?;
    let test_y: Vec<bool> = test_idx.iter().map(|&i| y[i]).collect();

    // Train one model per (family, kind) in parallel; each task is
    // independently seeded so the grid is deterministic regardless of
    // scheduling.
    type Task = (FeatureFamily, ModelKind);
    let tasks: Vec<Task> = tables
        .keys()
        .flat_map(|&f| [(f, ModelKind::Gbdt), (f, ModelKind::Mlp)])
        .collect();
    let results: Result<Vec<(Task, Vec<f64>)>> = tasks
        .par_iter()
        .map(|&(family, kind)| {
            let dataset = family_dataset(family, &tables[&family], &population, labels);
            let train = dataset.subset(&train_idx, Some(super::dataset::SplitTag::Train));
            let test = dataset.subset(&test_idx, Some(super::dataset::SplitTag::Test));
            let smote_seed =
                seed::derive(master_seed, &format!("ablation:{family}:{kind}:smote"));
            let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(smote_seed);
            let (train, _) = oversample(&train, &config.smote, &mut rng)?;
            let train_seed =
                seed::derive(master_seed, &format!("ablation:{family}:{kind}:train"));
            let model = train_classifier(kind, &train, &config.hyper, train_seed)?;
            let probs = model.predict_dataset(&test)?;
            Ok(((family, kind), probs))
        })
        .collect();
    let probs_by_task: BTreeMap<(FeatureFamily, ModelKind), Vec<f64>> =
        results?.into_iter().collect();

    let mut rows = Vec::new();
    for (label, families) in ablation_rows() {
        if families.iter().any(|f| !tables.contains_key(f)) {
            warnings.push(format!("row {label} skipped: missing feature table"));
            rows.push(AblationRow {
                features: label,
                gbdt: None,
                mlp: None,
            });
            continue;
        }
        let mut row = AblationRow {
            features: label,
            gbdt: None,
            mlp: None,
        };
        for kind in [ModelKind::Gbdt, ModelKind::Mlp] {
            let member_probs: Vec<Vec<f64>> = families
                .iter()
                .map(|f| probs_by_task[&(*f, kind)].clone())
                .collect();
            let scores = if member_probs.len() == 1 {
                member_probs.into_iter().next().unwrap()
            } else {
                let (_, mean) = majority_vote(&member_probs)?;
                mean
            };
            let auc = roc_auc(&scores, &test_y)?.auc;
            match kind {
                ModelKind::Gbdt => row.gbdt = Some(auc),
                ModelKind::Mlp => row.mlp = Some(auc),
                ModelKind::Lr => {}
            }
        }
        rows.push(row);
    }

    Ok(AblationTable {
        rows,
        warnings,
        protocol: format!(
            "stratified {:.0}/{:.0} split, SMOTE (k={}, ratio={}) on the training fold only, \
             per-family models, equal-weight vote ensembles scored by mean probability",
            (1.0 - config.test_fraction) * 100.0,
            config.test_fraction * 100.0,
            config.smote.k,
            config.smote.target_ratio
        ),
    })
}
