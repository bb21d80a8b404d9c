//! Independent brute-force oracles for the feature extractors.

use std::collections::BTreeMap;

use bizsurv_core::corpus::{synth, BusinessRecord, ReviewRecord, Snapshot};
use bizsurv_core::geo;
use bizsurv_core::mobility;
use bizsurv_core::text;
use chrono::NaiveDate;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn business_at(id: &str, lat: f64, lon: f64, categories: &[&str]) -> BusinessRecord {
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

#[test]
fn grid_neighborhoods_equal_brute_force_on_1000_random_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let businesses: Vec<BusinessRecord> = (0..1000)
        .map(|i| {
            business_at(
                &format!("b{i:04}"),
                36.0 + rng.random_range(-0.02..0.02),
                -115.0 + rng.random_range(-0.02..0.02),
                if i % 3 == 0 { &["Restaurants"] } else { &["Shopping"] },
            )
        })
        .collect();
    let coords: Vec<(f64, f64)> = businesses.iter().map(|b| (b.latitude, b.longitude)).collect();
    let snapshot = Snapshot::new(
        NaiveDate::from_ymd_opt(2017, 12, 31).unwrap(),
        businesses,
        vec![],
        vec![],
        vec![],
    )
    .unwrap()
    .0;

    let neighborhoods = geo::build_neighborhoods(&snapshot, 500.0);
    assert_eq!(neighborhoods.len(), 334);
    for (id, n) in &neighborhoods {
        let center = snapshot.business_index(id).unwrap();
        // Brute-force all-pairs oracle.
        let expected: Vec<usize> = (0..coords.len())
            .filter(|&j| j != center && geo::geo_distance(coords[center], coords[j]) <= 500.0)
            .collect();
        assert_eq!(n.members, expected, "neighborhood mismatch for {id}");
    }
}

#[test]
fn specific_competition_matches_set_scan_on_synthetic_city() {
    let corpus = synth::generate(
        &synth::SynthConfig {
            restaurants: 200,
            other_businesses: 100,
            users: 60,
            ..synth::SynthConfig::default()
        },
        13,
    )
    .unwrap();
    let s = &corpus.observation;
    let neighborhoods = geo::build_neighborhoods(s, 500.0);
    for (id, n) in neighborhoods.iter().take(60) {
        let center = s.business_index(id).unwrap();
        let center_cuisines = geo::cuisine_set(s, center);
        let got = geo::specific_competition(n, s, &center_cuisines);

        // Direct set-scan oracle.
        let mut restaurants = 0usize;
        let mut same = 0usize;
        for &m in &n.members {
            if !s.businesses[m].is_restaurant() {
                continue;
            }
            restaurants += 1;
            let member = geo::cuisine_set(s, m);
            if member.iter().any(|c| center_cuisines.contains(c)) {
                same += 1;
            }
        }
        let expected = if restaurants == 0 {
            0.0
        } else {
            same as f64 / restaurants as f64
        };
        assert_eq!(got, expected, "specific competition mismatch for {id}");
    }
}

#[test]
fn category_profile_sums_equal_total_memberships() {
    let corpus = synth::generate(
        &synth::SynthConfig {
            restaurants: 150,
            other_businesses: 80,
            users: 40,
            ..synth::SynthConfig::default()
        },
        17,
    )
    .unwrap();
    let s = &corpus.observation;
    let neighborhoods = geo::build_neighborhoods(s, 500.0);
    for (_, n) in neighborhoods.iter().take(50) {
        let (cat, cui) = geo::category_profiles(n, s);
        // Recount oracle: every member contributes one tally per matching
        // manifest name.
        let mut cat_total = 0u32;
        let mut cui_total = 0u32;
        for &m in &n.members {
            for c in &s.businesses[m].categories {
                if geo::manifest::categories().index_of(c).is_some() {
                    cat_total += 1;
                }
                if geo::manifest::cuisines().index_of(c).is_some() {
                    cui_total += 1;
                }
            }
        }
        assert_eq!(cat.iter().sum::<u32>(), cat_total);
        assert_eq!(cui.iter().sum::<u32>(), cui_total);
    }
}

#[test]
fn tfidf_matches_hand_computed_table_on_ten_restaurant_fixture() {
    // Ten neighborhoods; categories planted so document frequencies are
    // known: "Restaurants" in all ten, "Nightlife" in four, "Shopping" in
    // one, everything else absent.
    let r_idx = geo::manifest::categories().index_of("Restaurants").unwrap();
    let n_idx = geo::manifest::categories().index_of("Nightlife").unwrap();
    let s_idx = geo::manifest::categories().index_of("Shopping").unwrap();
    let mut profiles: BTreeMap<String, (Vec<u32>, Vec<u32>)> = BTreeMap::new();
    for i in 0..10 {
        let mut cat = vec![0u32; 22];
        cat[r_idx] = (i as u32 % 3) + 1; // 1..=3
        if i < 4 {
            cat[n_idx] = 2;
        }
        if i == 7 {
            cat[s_idx] = 5;
        }
        profiles.insert(format!("r{i}"), (cat, vec![0u32; 145]));
    }
    let attractiveness = geo::neighborhood_attractiveness(&profiles);

    // Spreadsheet-style recomputation: tfidf = tf * ln(N / df).
    let ln = |x: f64| x.ln();
    for i in 0..10 {
        let id = format!("r{i}");
        let (nac, _) = &attractiveness[&id];
        let tf_r = ((i as u32 % 3) + 1) as f64;
        assert!((nac[r_idx] - tf_r * ln(10.0 / 10.0)).abs() < 1e-12);
        let expected_n = if i < 4 { 2.0 * ln(10.0 / 4.0) } else { 0.0 };
        assert!((nac[n_idx] - expected_n).abs() < 1e-12, "nightlife row {i}");
        let expected_s = if i == 7 { 5.0 * ln(10.0 / 1.0) } else { 0.0 };
        assert!((nac[s_idx] - expected_s).abs() < 1e-12, "shopping row {i}");
    }
}

#[test]
fn transitions_equal_per_user_sort_and_pair_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(29);
    let businesses: Vec<BusinessRecord> = (0..30)
        .map(|i| {
            business_at(
                &format!("b{i:02}"),
                36.0 + rng.random_range(-0.01..0.01),
                -115.0 + rng.random_range(-0.01..0.01),
                &["Restaurants"],
            )
        })
        .collect();
    let mut reviews = Vec::new();
    for r in 0..400 {
        let user = rng.random_range(0..50);
        let business = rng.random_range(0..30);
        // Coarse timestamps force plenty of ties.
        let day = rng.random_range(0..40);
        let hour = rng.random_range(0..4) * 6;
        reviews.push(ReviewRecord {
            review_id: format!("r{r:04}"),
            business_id: format!("b{business:02}"),
            user_id: format!("u{user:02}"),
            stars: rng.random_range(1..=5),
            timestamp: NaiveDate::from_ymd_opt(2017, 1, 1)
                .unwrap()
                .checked_add_days(chrono::Days::new(day))
                .unwrap()
                .and_hms_opt(hour, 0, 0)
                .unwrap(),
            text: String::new(),
        });
    }
    let snapshot = Snapshot::new(
        NaiveDate::from_ymd_opt(2017, 12, 31).unwrap(),
        businesses,
        reviews.clone(),
        vec![],
        vec![],
    )
    .unwrap()
    .0;

    let (transitions, unresolved) = mobility::extract_transitions(&snapshot, None);
    assert_eq!(unresolved, 0);

    // Brute-force oracle: group, sort by (timestamp, review_id), pair.
    let mut by_user: BTreeMap<&str, Vec<&ReviewRecord>> = BTreeMap::new();
    for r in &reviews {
        by_user.entry(&r.user_id).or_default().push(r);
    }
    let mut expected: Vec<(String, String, String)> = Vec::new();
    for (_, mut rs) in by_user {
        rs.sort_by(|a, b| {
            a.timestamp
                .cmp(&b.timestamp)
                .then_with(|| a.review_id.cmp(&b.review_id))
        });
        for w in rs.windows(2) {
            if w[0].business_id != w[1].business_id {
                expected.push((
                    w[0].user_id.clone(),
                    w[0].business_id.clone(),
                    w[1].business_id.clone(),
                ));
            }
        }
    }
    let mut got: Vec<(String, String, String)> = transitions
        .iter()
        .map(|t| (t.user_id.clone(), t.from_id.clone(), t.to_id.clone()))
        .collect();
    got.sort();
    expected.sort();
    assert_eq!(got, expected);
}

#[test]
fn flow_conservation_when_all_endpoints_are_restaurants() {
    // No non-restaurant businesses: every transition endpoint is in the
    // labeled population, so inflow and outflow rates integrate back to
    // the total transition count.
    let corpus = synth::generate(
        &synth::SynthConfig {
            restaurants: 120,
            other_businesses: 0,
            users: 30,
            ..synth::SynthConfig::default()
        },
        31,
    )
    .unwrap();
    let s = &corpus.observation;
    let population: Vec<String> = s.businesses.iter().map(|b| b.business_id.clone()).collect();
    let neighborhoods = geo::build_neighborhoods_for(s, &population, 500.0);
    let (transitions, _) = mobility::extract_transitions(s, None);
    let features = mobility::mobility_features(
        s,
        &neighborhoods,
        &transitions,
        mobility::MobilityOptions::default(),
    );

    let total_in: f64 = features.values().map(|f| f.inflow * f.lifespan_months).sum();
    let total_out: f64 = features
        .values()
        .map(|f| f.outflow * f.lifespan_months)
        .sum();
    let n = transitions.len() as f64;
    assert!((total_in - n).abs() < 1e-6, "inflow {total_in} vs {n}");
    assert!((total_out - n).abs() < 1e-6, "outflow {total_out} vs {n}");
}

#[test]
fn mobility_features_invariant_to_record_order() {
    let corpus = synth::generate(
        &synth::SynthConfig {
            restaurants: 80,
            other_businesses: 30,
            users: 25,
            ..synth::SynthConfig::default()
        },
        53,
    )
    .unwrap();
    let s = &corpus.observation;
    let mut shuffled_reviews = s.reviews.clone();
    shuffled_reviews.reverse();
    let mut shuffled_checkins = s.checkins.clone();
    shuffled_checkins.reverse();
    for c in &mut shuffled_checkins {
        c.timestamps.reverse();
    }
    let reordered = Snapshot::new(
        s.as_of,
        s.businesses.clone(),
        shuffled_reviews,
        shuffled_checkins,
        s.photos.clone(),
    )
    .unwrap()
    .0;

    let population: Vec<String> = s.open_restaurant_ids();
    let neighborhoods = geo::build_neighborhoods_for(s, &population, 500.0);
    let options = mobility::MobilityOptions::default();
    let (t1, _) = mobility::extract_transitions(s, None);
    let (t2, _) = mobility::extract_transitions(&reordered, None);
    let f1 = mobility::mobility_features(s, &neighborhoods, &t1, options);
    let f2 = mobility::mobility_features(&reordered, &neighborhoods, &t2, options);
    for (id, a) in &f1 {
        let b = &f2[id];
        assert_eq!(a.inflow, b.inflow, "{id}");
        assert_eq!(a.outflow, b.outflow, "{id}");
        assert_eq!(a.popularity_skew, b.popularity_skew, "{id}");
        assert_eq!(a.visit_trend, b.visit_trend, "{id}");
        assert_eq!(a.lifespan_months, b.lifespan_months, "{id}");
        assert!((a.avg_dist_to - b.avg_dist_to).abs() < 1e-9, "{id}");
    }
}

#[test]
fn neighborhood_restricted_flows_never_exceed_global_flows() {
    let corpus = synth::generate(
        &synth::SynthConfig {
            restaurants: 100,
            other_businesses: 50,
            users: 30,
            ..synth::SynthConfig::default()
        },
        59,
    )
    .unwrap();
    let s = &corpus.observation;
    let population: Vec<String> = s.open_restaurant_ids();
    let neighborhoods = geo::build_neighborhoods_for(s, &population, 500.0);
    let (transitions, _) = mobility::extract_transitions(s, None);
    let global = mobility::mobility_features(
        s,
        &neighborhoods,
        &transitions,
        mobility::MobilityOptions::default(),
    );
    let local = mobility::mobility_features(
        s,
        &neighborhoods,
        &transitions,
        mobility::MobilityOptions {
            flows_within_neighborhood: true,
        },
    );
    let mut strictly_smaller = 0;
    for (id, g) in &global {
        let l = &local[id];
        assert!(l.inflow <= g.inflow + 1e-12, "{id}");
        assert!(l.outflow <= g.outflow + 1e-12, "{id}");
        if l.inflow < g.inflow {
            strictly_smaller += 1;
        }
    }
    // The 4 km synthetic city is much larger than one neighborhood, so
    // the restriction must actually bite somewhere.
    assert!(strictly_smaller > 0);
}

#[test]
fn bow_counts_equal_dictionary_oracle_on_synthetic_reviews() {
    let corpus = synth::generate(
        &synth::SynthConfig {
            restaurants: 60,
            other_businesses: 0,
            users: 25,
            review_text: synth::ReviewTextMode::SentimentPools,
            ..synth::SynthConfig::default()
        },
        37,
    )
    .unwrap();
    let s = &corpus.observation;
    let vocab = text::build_corpus_vocabulary(s, 1000).unwrap();
    let population: Vec<String> = s.open_restaurant_ids();
    let table = text::bow_feature_table(s, &population, &vocab);

    // Brute-force dictionary count per restaurant.
    for (row_idx, id) in table.ids.iter().enumerate().step_by(7) {
        let mut counts: BTreeMap<&str, u32> = BTreeMap::new();
        for r in s.reviews.iter().filter(|r| &r.business_id == id) {
            for token in text::preprocess(&r.text) {
                if let Some(ti) = vocab.index_of(&token) {
                    *counts.entry(vocab.terms()[ti].as_str()).or_insert(0) += 1;
                }
            }
        }
        for (t, term) in vocab.terms().iter().enumerate() {
            let expected = counts.get(term.as_str()).copied().unwrap_or(0);
            assert_eq!(
                table.rows[row_idx][t] as u32, expected,
                "count mismatch for {id}:{term}"
            );
        }
    }
}

#[test]
fn vocabulary_matches_frequency_count_oracle() {
    let corpus = synth::generate(
        &synth::SynthConfig {
            restaurants: 150,
            other_businesses: 0,
            users: 50,
            review_text: synth::ReviewTextMode::SentimentPools,
            ..synth::SynthConfig::default()
        },
        43,
    )
    .unwrap();
    let s = &corpus.observation;
    let vocab = text::build_corpus_vocabulary(s, 50).unwrap();

    // Hash-map frequency oracle with the same tie rule.
    let mut counts: BTreeMap<String, u64> = BTreeMap::new();
    for r in &s.reviews {
        for t in text::preprocess(&r.text) {
            *counts.entry(t).or_insert(0) += 1;
        }
    }
    let mut ranked: Vec<(String, u64)> = counts.into_iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    let expected: Vec<String> = ranked.into_iter().take(50).map(|(t, _)| t).collect();
    assert_eq!(vocab.terms(), expected.as_slice());
}
