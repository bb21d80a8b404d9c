//! User mobility features derived from consecutive reviews.
//!
//! Check-ins in the dataset carry no user identity, so transitions are
//! reconstructed from each user's review stream: every adjacent pair of
//! reviews at two different businesses counts as one movement.

use std::collections::{BTreeMap, HashMap};

use chrono::{Datelike, Duration, NaiveDate, NaiveDateTime};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::Snapshot;
use crate::geo::{geo_distance, Neighborhood};
use crate::numeric::{entropy_nats, ols_slope};
use crate::table::FeatureTable;

/// Average Gregorian month length in days.
pub const DAYS_PER_MONTH: f64 = 30.44;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Transition {
    pub user_id: String,
    pub from_id: String,
    pub to_id: String,
    pub t_from: NaiveDateTime,
    pub t_to: NaiveDateTime,
    pub distance_m: f64,
    pub duration_s: f64,
}

#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
pub struct MobilityFlags {
    /// No review or check-in at all: lifespan undefined, rates forced to 0.
    pub no_engagement: bool,
    pub no_inbound: bool,
    pub no_outbound: bool,
    pub no_checkins: bool,
    pub no_neighbor_checkins: bool,
}

#[derive(Debug, Clone)]
pub struct MobilityFeatures {
    pub inflow: f64,
    pub outflow: f64,
    pub avg_dist_to: f64,
    pub avg_dist_from: f64,
    pub avg_speed_to: f64,
    pub avg_speed_from: f64,
    pub popularity_skew: f64,
    pub competitor_alignment: f64,
    pub visit_trend: f64,
    pub lifespan_months: f64,
    pub temporal_profile: [f64; 24],
    pub flags: MobilityFlags,
}

/// Extract transitions from every user's review stream. Reviews are sorted
/// by timestamp with review-id tie-breaks for determinism; adjacent pairs
/// at distinct businesses yield one transition each, subject to `max_gap`.
/// Pairs with an endpoint missing from the snapshot are skipped and counted.
pub fn extract_transitions(s: &Snapshot, max_gap: Option<Duration>) -> (Vec<Transition>, usize) {
    let mut by_user: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, r) in s.reviews.iter().enumerate() {
        by_user.entry(&r.user_id).or_default().push(i);
    }

    let users: Vec<(&str, Vec<usize>)> = by_user.into_iter().collect();
    let per_user: Vec<(Vec<Transition>, usize)> = users
        .into_par_iter()
        .map(|(_, mut review_idx)| {
            review_idx.sort_by(|&a, &b| {
                let ra = &s.reviews[a];
                let rb = &s.reviews[b];
                ra.timestamp
                    .cmp(&rb.timestamp)
                    .then_with(|| ra.review_id.cmp(&rb.review_id))
            });
            let mut transitions = Vec::new();
            let mut unresolved = 0usize;
            for pair in review_idx.windows(2) {
                let from = &s.reviews[pair[0]];
                let to = &s.reviews[pair[1]];
                if from.business_id == to.business_id {
                    continue;
                }
                let gap = to.timestamp - from.timestamp;
                if let Some(limit) = max_gap {
                    if gap > limit {
                        continue;
                    }
                }
                let (Some(b_from), Some(b_to)) =
                    (s.business(&from.business_id), s.business(&to.business_id))
                else {
                    unresolved += 1;
                    continue;
                };
                let distance_m = geo_distance(
                    (b_from.latitude, b_from.longitude),
                    (b_to.latitude, b_to.longitude),
                );
                transitions.push(Transition {
                    user_id: from.user_id.clone(),
                    from_id: from.business_id.clone(),
                    to_id: to.business_id.clone(),
                    t_from: from.timestamp,
                    t_to: to.timestamp,
                    distance_m,
                    duration_s: gap.num_seconds() as f64,
                });
            }
            (transitions, unresolved)
        })
        .collect();

    let mut transitions = Vec::new();
    let mut unresolved = 0;
    for (t, u) in per_user {
        transitions.extend(t);
        unresolved += u;
    }
    (transitions, unresolved)
}

/// Months between the first engagement (review or check-in) and the end of
/// the observation window, floored at one month. `None` when the
/// restaurant has no engagement at all.
pub fn lifespan_months(
    first_engagement: Option<NaiveDateTime>,
    observation_end_instant: NaiveDateTime,
) -> Option<f64> {
    let first = first_engagement?;
    let seconds = (observation_end_instant - first).num_seconds().max(0) as f64;
    let months = seconds / (DAYS_PER_MONTH * 86_400.0);
    Some(months.max(1.0))
}

/// Transitions per month into and out of the restaurant: total transition
/// counts divided by the lifespan.
pub fn flow_rates(inbound: usize, outbound: usize, months: f64) -> (f64, f64) {
    (inbound as f64 / months, outbound as f64 / months)
}

/// Means of distance and speed over the inbound and outbound transition
/// sets. Zero-duration transitions are excluded from the speed means but
/// still count toward distances. Empty sets yield 0.
pub fn transition_travel_stats(
    inbound: &[&Transition],
    outbound: &[&Transition],
) -> (f64, f64, f64, f64) {
    let mean_dist = |set: &[&Transition]| {
        if set.is_empty() {
            0.0
        } else {
            set.iter().map(|t| t.distance_m).sum::<f64>() / set.len() as f64
        }
    };
    let mean_speed = |set: &[&Transition]| {
        let moving: Vec<f64> = set
            .iter()
            .filter(|t| t.duration_s > 0.0)
            .map(|t| t.distance_m / t.duration_s)
            .collect();
        if moving.is_empty() {
            0.0
        } else {
            moving.iter().sum::<f64>() / moving.len() as f64
        }
    };
    (
        mean_dist(inbound),
        mean_dist(outbound),
        mean_speed(inbound),
        mean_speed(outbound),
    )
}

/// Normalized hour-of-day check-in histogram; all-zero when there are no
/// check-ins (flagged by the caller).
pub fn temporal_profile(timestamps: &[NaiveDateTime]) -> [f64; 24] {
    let mut counts = [0.0f64; 24];
    for ts in timestamps {
        counts[chrono::Timelike::hour(ts) as usize] += 1.0;
    }
    let total: f64 = counts.iter().sum();
    if total > 0.0 {
        for c in &mut counts {
            *c /= total;
        }
    }
    counts
}

/// Entropy in nats of the temporal profile; 0 for the all-zero profile.
pub fn popularity_skew(profile: &[f64; 24]) -> f64 {
    entropy_nats(profile)
}

/// Squared distance between the restaurant's profile and the renormalized
/// mean of its neighbors' profiles. Returns (0, true) when no neighbor has
/// any check-ins.
pub fn competitor_alignment<'a>(
    profile: &[f64; 24],
    neighbor_profiles: impl IntoIterator<Item = &'a [f64; 24]>,
) -> (f64, bool) {
    let mut aggregate = [0.0f64; 24];
    for p in neighbor_profiles {
        for (a, v) in aggregate.iter_mut().zip(p) {
            *a += v;
        }
    }
    let total: f64 = aggregate.iter().sum();
    if total <= 0.0 {
        return (0.0, true);
    }
    for a in &mut aggregate {
        *a /= total;
    }
    let d2 = profile
        .iter()
        .zip(&aggregate)
        .map(|(h, g)| (h - g) * (h - g))
        .sum();
    (d2, false)
}

/// OLS slope of monthly check-in counts over the last six calendar months
/// of the observation window (month index 1..=6, missing months count 0).
pub fn visit_trend(monthly_counts: &[f64; 6]) -> f64 {
    ols_slope(monthly_counts)
}

/// Bucket a restaurant's check-ins into the last six calendar months
/// ending at `observation_end`.
pub fn monthly_checkin_counts(
    timestamps: &[NaiveDateTime],
    observation_end: NaiveDate,
) -> [f64; 6] {
    // Month keys (year * 12 + month0) for the six buckets, oldest first.
    let end_key = observation_end.year() * 12 + observation_end.month0() as i32;
    let mut counts = [0.0f64; 6];
    for ts in timestamps {
        let key = ts.year() * 12 + ts.month0() as i32;
        let offset = end_key - key;
        if (0..6).contains(&offset) {
            counts[5 - offset as usize] += 1.0;
        }
    }
    counts
}

#[derive(Debug, Clone, Copy, Default)]
pub struct MobilityOptions {
    /// Restrict the inflow/outflow counts to transitions whose other
    /// endpoint lies inside the restaurant's neighborhood. Off by default:
    /// the prose reading counts movements from anywhere. Travel statistics
    /// always cover all transitions.
    pub flows_within_neighborhood: bool,
}

/// Compute the full mobility feature set for each neighborhood center.
pub fn mobility_features(
    s: &Snapshot,
    neighborhoods: &BTreeMap<String, Neighborhood>,
    transitions: &[Transition],
    options: MobilityOptions,
) -> BTreeMap<String, MobilityFeatures> {
    let end_instant = s.end_instant();

    let mut inbound: HashMap<&str, Vec<&Transition>> = HashMap::new();
    let mut outbound: HashMap<&str, Vec<&Transition>> = HashMap::new();
    for t in transitions {
        inbound.entry(&t.to_id).or_default().push(t);
        outbound.entry(&t.from_id).or_default().push(t);
    }

    let mut checkins_by_business: HashMap<&str, Vec<NaiveDateTime>> = HashMap::new();
    for c in &s.checkins {
        checkins_by_business
            .entry(&c.business_id)
            .or_default()
            .extend(c.timestamps.iter().copied());
    }
    let mut first_review: HashMap<&str, NaiveDateTime> = HashMap::new();
    for r in &s.reviews {
        first_review
            .entry(&r.business_id)
            .and_modify(|t| *t = (*t).min(r.timestamp))
            .or_insert(r.timestamp);
    }

    // Profiles for every business so neighbors of any category contribute
    // to the aggregated temporal profile.
    let profiles: HashMap<&str, [f64; 24]> = s
        .businesses
        .iter()
        .map(|b| {
            let id = b.business_id.as_str();
            let empty = Vec::new();
            let ts = checkins_by_business.get(id).unwrap_or(&empty);
            (id, temporal_profile(ts))
        })
        .collect();

    let mut features = BTreeMap::new();
    for (id, neighborhood) in neighborhoods {
        let id_str = id.as_str();
        let empty_checkins = Vec::new();
        let checkins = checkins_by_business.get(id_str).unwrap_or(&empty_checkins);
        let first_checkin = checkins.iter().min().copied();
        let first = match (first_review.get(id_str).copied(), first_checkin) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
        let lifespan = lifespan_months(first, end_instant);

        let no_transitions = Vec::new();
        let inbound_set = inbound.get(id_str).unwrap_or(&no_transitions);
        let outbound_set = outbound.get(id_str).unwrap_or(&no_transitions);

        let mut flags = MobilityFlags {
            no_engagement: lifespan.is_none(),
            no_inbound: inbound_set.is_empty(),
            no_outbound: outbound_set.is_empty(),
            no_checkins: checkins.is_empty(),
            no_neighbor_checkins: false,
        };

        let (inbound_flow, outbound_flow) = if options.flows_within_neighborhood {
            let members: std::collections::HashSet<&str> = neighborhood
                .members
                .iter()
                .map(|&i| s.businesses[i].business_id.as_str())
                .collect();
            (
                inbound_set
                    .iter()
                    .filter(|t| members.contains(t.from_id.as_str()))
                    .count(),
                outbound_set
                    .iter()
                    .filter(|t| members.contains(t.to_id.as_str()))
                    .count(),
            )
        } else {
            (inbound_set.len(), outbound_set.len())
        };
        let (inflow, outflow) = match lifespan {
            Some(m) => flow_rates(inbound_flow, outbound_flow, m),
            None => (0.0, 0.0),
        };
        let (avg_dist_to, avg_dist_from, avg_speed_to, avg_speed_from) =
            transition_travel_stats(inbound_set, outbound_set);

        let profile = temporal_profile(checkins);
        let skew = popularity_skew(&profile);
        let neighbor_profiles = neighborhood
            .members
            .iter()
            .map(|&i| &profiles[s.businesses[i].business_id.as_str()]);
        let (alignment, no_neighbor_checkins) = competitor_alignment(&profile, neighbor_profiles);
        flags.no_neighbor_checkins = no_neighbor_checkins;

        let trend = visit_trend(&monthly_checkin_counts(checkins, s.as_of));

        features.insert(
            id.clone(),
            MobilityFeatures {
                inflow,
                outflow,
                avg_dist_to,
                avg_dist_from,
                avg_speed_to,
                avg_speed_from,
                popularity_skew: skew,
                competitor_alignment: alignment,
                visit_trend: trend,
                lifespan_months: lifespan.unwrap_or(0.0),
                temporal_profile: profile,
                flags,
            },
        );
    }
    features
}

/// Fixed, documented column order: the nine scalar features, lifespan, the
/// 24 temporal-profile bins, then the five missingness flags.
pub fn mobility_columns() -> Vec<String> {
    let mut cols: Vec<String> = [
        "inflow",
        "outflow",
        "avg_dist_to",
        "avg_dist_from",
        "avg_speed_to",
        "avg_speed_from",
        "popularity_skew",
        "competitor_alignment",
        "visit_trend",
        "lifespan_months",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    cols.extend((0..24).map(|h| format!("hour_{h:02}")));
    cols.extend(
        [
            "no_engagement",
            "no_inbound",
            "no_outbound",
            "no_checkins",
            "no_neighbor_checkins",
        ]
        .iter()
        .map(|s| s.to_string()),
    );
    cols
}

pub fn mobility_feature_table(features: &BTreeMap<String, MobilityFeatures>) -> FeatureTable {
    let mut table = FeatureTable::new("mobility", mobility_columns());
    for (id, f) in features {
        let mut row = Vec::with_capacity(table.columns.len());
        row.extend([
            f.inflow,
            f.outflow,
            f.avg_dist_to,
            f.avg_dist_from,
            f.avg_speed_to,
            f.avg_speed_from,
            f.popularity_skew,
            f.competitor_alignment,
            f.visit_trend,
            f.lifespan_months,
        ]);
        row.extend(f.temporal_profile.iter().copied());
        row.extend(
            [
                f.flags.no_engagement,
                f.flags.no_inbound,
                f.flags.no_outbound,
                f.flags.no_checkins,
                f.flags.no_neighbor_checkins,
            ]
            .iter()
            .map(|&b| b as u8 as f64),
        );
        table.push_row(id.clone(), row);
    }
    table
}
