//! Locality profiles: neighborhood construction and geography features.

mod distance;
mod features;
mod grid;
pub mod manifest;

pub use distance::{geo_distance, EARTH_RADIUS_M};
pub use features::{
    build_neighborhoods, build_neighborhoods_for, category_profiles, competition, cuisine_set,
    geo_columns, geo_feature_table, geo_features, neighborhood_attractiveness, place_entropy,
    specific_competition, GeoFeatures, GeoReport, Neighborhood, DEFAULT_RADIUS_M,
};
pub use grid::GridIndex;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{BusinessRecord, Snapshot};
    use std::collections::BTreeMap;

    pub(crate) fn business_at(
        id: &str,
        lat: f64,
        lon: f64,
        categories: &[&str],
    ) -> BusinessRecord {
        BusinessRecord {
            business_id: id.to_string(),
            name: id.to_string(),
            latitude: lat,
            longitude: lon,
            categories: categories.iter().map(|s| s.to_string()).collect(),
            is_open: true,
            attributes: BTreeMap::new(),
            state: "NV".to_string(),
            review_count: 0,
        }
    }

    fn snapshot(businesses: Vec<BusinessRecord>) -> Snapshot {
        Snapshot::new(
            chrono::NaiveDate::from_ymd_opt(2017, 12, 31).unwrap(),
            businesses,
            vec![],
            vec![],
            vec![],
        )
        .unwrap()
        .0
    }

    /// Offset `meters` north of a base latitude, in degrees.
    fn north(meters: f64) -> f64 {
        meters / (EARTH_RADIUS_M * std::f64::consts::PI / 180.0)
    }

    #[test]
    fn neighbors_within_and_beyond_radius() {
        let s = snapshot(vec![
            business_at("a", 36.0, -115.0, &["Restaurants"]),
            business_at("b", 36.0 + north(100.0), -115.0, &["Restaurants"]),
            business_at("c", 36.0 + north(700.0), -115.0, &["Restaurants"]),
        ]);
        let n = build_neighborhoods(&s, 500.0);
        assert_eq!(n["a"].members, vec![1]);
        assert_eq!(n["b"].members, vec![0]);
        assert!(n["c"].members.is_empty());
    }

    #[test]
    fn competition_examples() {
        let s = snapshot(vec![
            business_at("center", 36.0, -115.0, &["Restaurants", "Pizza"]),
            business_at("r1", 36.0 + north(50.0), -115.0, &["Restaurants", "Pizza"]),
            business_at("r2", 36.0 + north(80.0), -115.0, &["Restaurants", "Thai"]),
            business_at("bar", 36.0 + north(110.0), -115.0, &["Nightlife", "Bars"]),
            business_at("gym", 36.0 + north(140.0), -115.0, &["Active Life"]),
        ]);
        let n = build_neighborhoods(&s, 500.0);
        let (comp, empty) = competition(&n["center"], &s);
        assert_eq!(comp, 0.5);
        assert!(!empty);

        let center_cuisines = cuisine_set(&s, n["center"].center);
        let spec = specific_competition(&n["center"], &s, &center_cuisines);
        assert_eq!(spec, 0.5);
    }

    #[test]
    fn empty_neighborhood_flags_and_zero_vectors() {
        let s = snapshot(vec![business_at("lone", 36.0, -115.0, &["Restaurants"])]);
        let n = build_neighborhoods(&s, 500.0);
        let (comp, empty) = competition(&n["lone"], &s);
        assert_eq!(comp, 0.0);
        assert!(empty);
        let (cat, cui) = category_profiles(&n["lone"], &s);
        assert!(cat.iter().all(|&c| c == 0));
        assert!(cui.iter().all(|&c| c == 0));
        assert_eq!(place_entropy(&cat), 0.0);
    }

    #[test]
    fn category_profile_counts_match_example() {
        let s = snapshot(vec![
            business_at("center", 36.0, -115.0, &["Restaurants"]),
            business_at("r1", 36.0 + north(50.0), -115.0, &["Restaurants"]),
            business_at("r2", 36.0 + north(80.0), -115.0, &["Restaurants"]),
            business_at("r3", 36.0 + north(100.0), -115.0, &["Restaurants"]),
            business_at("bar", 36.0 + north(120.0), -115.0, &["Nightlife"]),
        ]);
        let n = build_neighborhoods(&s, 500.0);
        let (cat, _) = category_profiles(&n["center"], &s);
        let restaurants_idx = manifest::categories().index_of("Restaurants").unwrap();
        let nightlife_idx = manifest::categories().index_of("Nightlife").unwrap();
        assert_eq!(cat[restaurants_idx], 3);
        assert_eq!(cat[nightlife_idx], 1);
    }

    #[test]
    fn place_entropy_bounds_and_known_values() {
        let uniform = vec![1u32; 22];
        assert!((place_entropy(&uniform) - 22f64.ln()).abs() < 1e-12);
        let mut single = vec![0u32; 22];
        single[3] = 9;
        assert_eq!(place_entropy(&single), 0.0);
        let mut two = vec![0u32; 22];
        two[0] = 2;
        two[1] = 2;
        assert!((place_entropy(&two) - 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn attractiveness_zero_iff_absent_or_everywhere() {
        // Three restaurants; term "Restaurants" in every neighborhood,
        // term "Thai" in one only.
        let mut profiles: BTreeMap<String, (Vec<u32>, Vec<u32>)> = BTreeMap::new();
        let r_idx = manifest::categories().index_of("Restaurants").unwrap();
        let thai_idx = manifest::cuisines().index_of("Thai").unwrap();
        for (id, thai) in [("a", 2u32), ("b", 0), ("c", 0)] {
            let mut cat = vec![0u32; 22];
            cat[r_idx] = 3;
            let mut cui = vec![0u32; 145];
            cui[thai_idx] = thai;
            profiles.insert(id.to_string(), (cat, cui));
        }
        let attr = neighborhood_attractiveness(&profiles);
        // df = N implies idf = ln 1 = 0.
        assert_eq!(attr["a"].0[r_idx], 0.0);
        // tf = 0 implies weight 0.
        assert_eq!(attr["b"].1[thai_idx], 0.0);
        // tf = 2, df = 1, N = 3.
        assert!((attr["a"].1[thai_idx] - 2.0 * 3f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn geo_table_has_documented_width() {
        // 2 ratios + 22 + 145 counts + entropy + 22 + 145 tfidf + flag.
        assert_eq!(geo_columns().len(), 2 + 22 + 145 + 1 + 22 + 145 + 1);
    }
}
