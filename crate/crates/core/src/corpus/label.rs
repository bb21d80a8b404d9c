//! Survival labeling from an observation/prediction snapshot pair.
//!
//! A restaurant open at the end of the observation period is labelled
//! survived if it is still open at the end of the prediction period and
//! dead otherwise. Restaurants that disappeared from the prediction
//! snapshot entirely are treated as closed (delisting counted separately).
//! Restaurants already closed at observation end are excluded.

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::records::Snapshot;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SurvivalLabel {
    Survived,
    Dead,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LabeledRestaurant {
    pub business_id: String,
    pub label: SurvivalLabel,
    pub observation_end: NaiveDate,
    pub prediction_end: NaiveDate,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct LabelReport {
    /// Restaurants open at observation end (exactly the labeled set).
    pub considered: usize,
    pub survived: usize,
    pub dead: usize,
    /// Subset of `dead` that were absent from the prediction snapshot.
    pub dead_delisted: usize,
    /// Restaurants excluded because they were already closed.
    pub excluded_closed: usize,
}

/// Label every business open in `observation` by its state in `prediction`.
///
/// Callers wanting the restaurant-only population filter the snapshots
/// first; labeling itself is category-agnostic.
pub fn derive_labels(
    observation: &Snapshot,
    prediction: &Snapshot,
) -> Result<(Vec<LabeledRestaurant>, LabelReport)> {
    if observation.as_of >= prediction.as_of {
        return Err(Error::invalid(format!(
            "observation end {} must precede prediction end {}",
            observation.as_of, prediction.as_of
        )));
    }
    if !observation
        .businesses
        .iter()
        .any(|b| prediction.contains(&b.business_id))
    {
        return Err(Error::invalid(
            "no business id appears in both snapshots; snapshots likely mismatched",
        ));
    }

    let mut labels = Vec::new();
    let mut report = LabelReport::default();
    for b in &observation.businesses {
        if !b.is_open {
            report.excluded_closed += 1;
            continue;
        }
        let label = match prediction.business(&b.business_id) {
            Some(later) if later.is_open => SurvivalLabel::Survived,
            Some(_) => SurvivalLabel::Dead,
            None => {
                report.dead_delisted += 1;
                SurvivalLabel::Dead
            }
        };
        match label {
            SurvivalLabel::Survived => report.survived += 1,
            SurvivalLabel::Dead => report.dead += 1,
        }
        report.considered += 1;
        labels.push(LabeledRestaurant {
            business_id: b.business_id.clone(),
            label,
            observation_end: observation.as_of,
            prediction_end: prediction.as_of,
        });
    }
    Ok((labels, report))
}
