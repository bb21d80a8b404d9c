//! Locality-profile features for each restaurant's 500 m neighborhood.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::grid::GridIndex;
use super::manifest::{categories, cuisines, CATEGORY_COUNT, CUISINE_COUNT};
use crate::corpus::Snapshot;
use crate::numeric::entropy_nats;
use crate::table::FeatureTable;

/// The default neighborhood radius in meters.
pub const DEFAULT_RADIUS_M: f64 = 500.0;

/// All businesses (any category) within `radius_m` of the center, center
/// excluded. Members are indices into the snapshot's business list.
#[derive(Debug, Clone)]
pub struct Neighborhood {
    pub center: usize,
    pub members: Vec<usize>,
    pub radius_m: f64,
}

#[derive(Debug, Clone)]
pub struct GeoFeatures {
    pub competition: f64,
    pub specific_competition: f64,
    pub category_counts: Vec<u32>,
    pub subcategory_counts: Vec<u32>,
    pub place_entropy: f64,
    pub attractiveness_cat: Vec<f64>,
    pub attractiveness_subcat: Vec<f64>,
    pub empty_neighborhood: bool,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct GeoReport {
    pub restaurants: usize,
    pub empty_neighborhoods: usize,
    /// Category strings matching neither manifest, with occurrence counts
    /// (tallied once per business).
    pub unknown_categories: BTreeMap<String, usize>,
}

/// Build neighborhoods for the given center businesses using a spatial
/// grid index; total work is o(n^2) for realistically clustered data.
pub fn build_neighborhoods_for(
    s: &Snapshot,
    centers: &[String],
    radius_m: f64,
) -> BTreeMap<String, Neighborhood> {
    let points: Vec<(f64, f64)> = s
        .businesses
        .iter()
        .map(|b| (b.latitude, b.longitude))
        .collect();
    let index = GridIndex::new(points, radius_m);
    let pairs: Vec<(String, Neighborhood)> = centers
        .par_iter()
        .filter_map(|id| {
            let center = s.business_index(id)?;
            let b = &s.businesses[center];
            let members = index.within_radius((b.latitude, b.longitude), Some(center));
            Some((
                id.clone(),
                Neighborhood {
                    center,
                    members,
                    radius_m,
                },
            ))
        })
        .collect();
    pairs.into_iter().collect()
}

/// Neighborhoods for every restaurant in the snapshot.
pub fn build_neighborhoods(s: &Snapshot, radius_m: f64) -> BTreeMap<String, Neighborhood> {
    let centers: Vec<String> = s
        .businesses
        .iter()
        .filter(|b| b.is_restaurant())
        .map(|b| b.business_id.clone())
        .collect();
    build_neighborhoods_for(s, &centers, radius_m)
}

/// Ratio of neighborhood businesses that are restaurants. Empty
/// neighborhoods yield 0 with the flag set.
pub fn competition(n: &Neighborhood, s: &Snapshot) -> (f64, bool) {
    if n.members.is_empty() {
        return (0.0, true);
    }
    let restaurants = n
        .members
        .iter()
        .filter(|&&i| s.businesses[i].is_restaurant())
        .count();
    (restaurants as f64 / n.members.len() as f64, false)
}

/// Cuisine-manifest indices carried by a business.
pub fn cuisine_set(s: &Snapshot, business: usize) -> Vec<usize> {
    let mut set: Vec<usize> = s.businesses[business]
        .categories
        .iter()
        .filter_map(|c| cuisines().index_of(c))
        .collect();
    set.sort_unstable();
    set.dedup();
    set
}

/// Among restaurant members, the fraction sharing at least one cuisine
/// subcategory with the center. 0 when there are no restaurant members.
pub fn specific_competition(n: &Neighborhood, s: &Snapshot, center_cuisines: &[usize]) -> f64 {
    let mut restaurants = 0usize;
    let mut same = 0usize;
    for &i in &n.members {
        if !s.businesses[i].is_restaurant() {
            continue;
        }
        restaurants += 1;
        let member_cuisines = cuisine_set(s, i);
        if member_cuisines
            .iter()
            .any(|c| center_cuisines.binary_search(c).is_ok())
        {
            same += 1;
        }
    }
    if restaurants == 0 {
        0.0
    } else {
        same as f64 / restaurants as f64
    }
}

/// Tally neighborhood members into the fixed 22-category and 145-cuisine
/// count vectors. A business with k matching categories contributes to k
/// bins; unmatched strings are ignored here (reported separately).
pub fn category_profiles(n: &Neighborhood, s: &Snapshot) -> (Vec<u32>, Vec<u32>) {
    let mut cat = vec![0u32; CATEGORY_COUNT];
    let mut cui = vec![0u32; CUISINE_COUNT];
    for &i in &n.members {
        for c in &s.businesses[i].categories {
            if let Some(idx) = categories().index_of(c) {
                cat[idx] += 1;
            }
            if let Some(idx) = cuisines().index_of(c) {
                cui[idx] += 1;
            }
        }
    }
    (cat, cui)
}

/// Shannon entropy in nats of the neighborhood's category distribution;
/// 0 for an empty neighborhood. Always within [0, ln 22].
pub fn place_entropy(category_counts: &[u32]) -> f64 {
    let weights: Vec<f64> = category_counts.iter().map(|&c| c as f64).collect();
    entropy_nats(&weights)
}

/// TF-IDF attractiveness over all restaurants' neighborhoods: each
/// neighborhood is a document, each category/cuisine a term,
/// tfidf(t, d) = tf(t, d) * ln(N / df(t)), with df = 0 terms mapped to 0.
pub fn neighborhood_attractiveness(
    profiles: &BTreeMap<String, (Vec<u32>, Vec<u32>)>,
) -> BTreeMap<String, (Vec<f64>, Vec<f64>)> {
    let n = profiles.len();
    let mut df_cat = [0usize; CATEGORY_COUNT];
    let mut df_cui = vec![0usize; CUISINE_COUNT];
    for (cat, cui) in profiles.values() {
        for (t, &c) in cat.iter().enumerate() {
            if c > 0 {
                df_cat[t] += 1;
            }
        }
        for (t, &c) in cui.iter().enumerate() {
            if c > 0 {
                df_cui[t] += 1;
            }
        }
    }
    let idf = |df: usize| -> f64 {
        if df == 0 {
            0.0
        } else {
            (n as f64 / df as f64).ln()
        }
    };
    let idf_cat: Vec<f64> = df_cat.iter().map(|&d| idf(d)).collect();
    let idf_cui: Vec<f64> = df_cui.iter().map(|&d| idf(d)).collect();

    profiles
        .iter()
        .map(|(id, (cat, cui))| {
            let nac: Vec<f64> = cat
                .iter()
                .zip(&idf_cat)
                .map(|(&tf, &idf)| if tf == 0 { 0.0 } else { tf as f64 * idf })
                .collect();
            let nasc: Vec<f64> = cui
                .iter()
                .zip(&idf_cui)
                .map(|(&tf, &idf)| if tf == 0 { 0.0 } else { tf as f64 * idf })
                .collect();
            (id.clone(), (nac, nasc))
        })
        .collect()
}

/// Compute the full locality profile for every neighborhood center.
pub fn geo_features(
    s: &Snapshot,
    neighborhoods: &BTreeMap<String, Neighborhood>,
) -> (BTreeMap<String, GeoFeatures>, GeoReport) {
    let mut report = GeoReport {
        restaurants: neighborhoods.len(),
        ..GeoReport::default()
    };
    // Unknown category strings tallied once per business.
    for b in &s.businesses {
        for c in &b.categories {
            if categories().index_of(c).is_none() && cuisines().index_of(c).is_none() {
                *report.unknown_categories.entry(c.clone()).or_insert(0) += 1;
            }
        }
    }

    let profiles: BTreeMap<String, (Vec<u32>, Vec<u32>)> = neighborhoods
        .iter()
        .map(|(id, n)| (id.clone(), category_profiles(n, s)))
        .collect();
    let attractiveness = neighborhood_attractiveness(&profiles);

    let mut features = BTreeMap::new();
    for (id, n) in neighborhoods {
        let (comp, empty) = competition(n, s);
        if empty {
            report.empty_neighborhoods += 1;
        }
        let center_cuisines = cuisine_set(s, n.center);
        let spec = specific_competition(n, s, &center_cuisines);
        let (cat, cui) = profiles[id].clone();
        let entropy = place_entropy(&cat);
        let (nac, nasc) = attractiveness[id].clone();
        features.insert(
            id.clone(),
            GeoFeatures {
                competition: comp,
                specific_competition: spec,
                category_counts: cat,
                subcategory_counts: cui,
                place_entropy: entropy,
                attractiveness_cat: nac,
                attractiveness_subcat: nasc,
                empty_neighborhood: empty,
            },
        );
    }
    (features, report)
}

/// Fixed, documented column order:
/// competition, specific_competition, 22 category counts, 145 cuisine
/// counts, place_entropy, 22 category attractiveness, 145 cuisine
/// attractiveness, empty_neighborhood flag.
pub fn geo_columns() -> Vec<String> {
    let mut cols = vec!["competition".to_string(), "specific_competition".to_string()];
    cols.extend(categories().slugs().iter().map(|s| format!("cat_count_{s}")));
    cols.extend(cuisines().slugs().iter().map(|s| format!("cuisine_count_{s}")));
    cols.push("place_entropy".to_string());
    cols.extend(categories().slugs().iter().map(|s| format!("nac_{s}")));
    cols.extend(cuisines().slugs().iter().map(|s| format!("nasc_{s}")));
    cols.push("empty_neighborhood".to_string());
    cols
}

pub fn geo_feature_table(features: &BTreeMap<String, GeoFeatures>) -> FeatureTable {
    let mut table = FeatureTable::new("geo", geo_columns());
    for (id, f) in features {
        let mut row = Vec::with_capacity(table.columns.len());
        row.push(f.competition);
        row.push(f.specific_competition);
        row.extend(f.category_counts.iter().map(|&c| c as f64));
        row.extend(f.subcategory_counts.iter().map(|&c| c as f64));
        row.push(f.place_entropy);
        row.extend(f.attractiveness_cat.iter().copied());
        row.extend(f.attractiveness_subcat.iter().copied());
        row.push(f.empty_neighborhood as u8 as f64);
        table.push_row(id.clone(), row);
    }
    table
}
