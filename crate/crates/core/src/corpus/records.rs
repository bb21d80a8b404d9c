//! Domain records for a dated LBSN snapshot.

use std::collections::{BTreeMap, BTreeSet};

use chrono::{NaiveDate, NaiveDateTime};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Category string identifying restaurants, matched case-insensitively.
pub const RESTAURANT_CATEGORY: &str = "Restaurants";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BusinessRecord {
    pub business_id: String,
    pub name: String,
    pub latitude: f64,
    pub longitude: f64,
    /// Comma-split category names, order preserved, duplicates removed.
    pub categories: Vec<String>,
    pub is_open: bool,
    /// Raw attribute map as found in the snapshot; values may be JSON
    /// booleans or Yelp's Python-literal strings ("True", "u'free'", ...).
    pub attributes: BTreeMap<String, serde_json::Value>,
    pub state: String,
    pub review_count: u32,
}

impl BusinessRecord {
    pub fn is_restaurant(&self) -> bool {
        self.categories
            .iter()
            .any(|c| c.eq_ignore_ascii_case(RESTAURANT_CATEGORY))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReviewRecord {
    pub review_id: String,
    pub business_id: String,
    pub user_id: String,
    pub stars: u8,
    pub timestamp: NaiveDateTime,
    pub text: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckinRecord {
    pub business_id: String,
    pub timestamps: Vec<NaiveDateTime>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PhotoRecord {
    pub photo_id: String,
    pub business_id: String,
}

/// Counts of records whose business id did not resolve within the snapshot.
/// Such records are kept but flagged; features skip them where a resolved
/// business is required.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct IntegrityReport {
    pub unresolved_reviews: usize,
    pub unresolved_checkins: usize,
    pub unresolved_photos: usize,
}

/// A dated, immutable snapshot of the dataset.
#[derive(Debug, Clone)]
pub struct Snapshot {
    pub as_of: NaiveDate,
    pub businesses: Vec<BusinessRecord>,
    pub reviews: Vec<ReviewRecord>,
    pub checkins: Vec<CheckinRecord>,
    pub photos: Vec<PhotoRecord>,
    id_index: BTreeMap<String, usize>,
}

impl Snapshot {
    /// Build a snapshot, indexing businesses by id. Duplicate business ids
    /// are an error; foreign-key violations are counted, not fatal.
    pub fn new(
        as_of: NaiveDate,
        businesses: Vec<BusinessRecord>,
        reviews: Vec<ReviewRecord>,
        checkins: Vec<CheckinRecord>,
        photos: Vec<PhotoRecord>,
    ) -> Result<(Self, IntegrityReport)> {
        let mut id_index = BTreeMap::new();
        for (i, b) in businesses.iter().enumerate() {
            if b.business_id.is_empty() {
                return Err(Error::invalid("empty business_id"));
            }
            if id_index.insert(b.business_id.clone(), i).is_some() {
                return Err(Error::invalid(format!(
                    "duplicate business_id {:?}",
                    b.business_id
                )));
            }
        }
        let report = IntegrityReport {
            unresolved_reviews: reviews
                .iter()
                .filter(|r| !id_index.contains_key(&r.business_id))
                .count(),
            unresolved_checkins: checkins
                .iter()
                .filter(|c| !id_index.contains_key(&c.business_id))
                .count(),
            unresolved_photos: photos
                .iter()
                .filter(|p| !id_index.contains_key(&p.business_id))
                .count(),
        };
        Ok((
            Snapshot {
                as_of,
                businesses,
                reviews,
                checkins,
                photos,
                id_index,
            },
            report,
        ))
    }

    pub fn business(&self, id: &str) -> Option<&BusinessRecord> {
        self.id_index.get(id).map(|&i| &self.businesses[i])
    }

    pub fn business_index(&self, id: &str) -> Option<usize> {
        self.id_index.get(id).copied()
    }

    pub fn contains(&self, id: &str) -> bool {
        self.id_index.contains_key(id)
    }

    /// Ids of restaurants with `is_open = true`, in snapshot order.
    pub fn open_restaurant_ids(&self) -> Vec<String> {
        self.businesses
            .iter()
            .filter(|b| b.is_open && b.is_restaurant())
            .map(|b| b.business_id.clone())
            .collect()
    }

    /// End of the observation window as an instant: midnight after `as_of`,
    /// so every timestamp dated on `as_of` itself falls inside the window.
    pub fn end_instant(&self) -> NaiveDateTime {
        self.as_of
            .succ_opt()
            .expect("valid date")
            .and_hms_opt(0, 0, 0)
            .expect("valid time")
    }
}

/// Retain restaurants only, restricting reviews, check-ins, and photos to
/// the surviving businesses. Idempotent.
pub fn filter_restaurants(s: &Snapshot) -> Snapshot {
    let businesses: Vec<BusinessRecord> = s
        .businesses
        .iter()
        .filter(|b| b.is_restaurant())
        .cloned()
        .collect();
    let kept: BTreeSet<&str> = businesses.iter().map(|b| b.business_id.as_str()).collect();
    let reviews = s
        .reviews
        .iter()
        .filter(|r| kept.contains(r.business_id.as_str()))
        .cloned()
        .collect();
    let checkins = s
        .checkins
        .iter()
        .filter(|c| kept.contains(c.business_id.as_str()))
        .cloned()
        .collect();
    let photos = s
        .photos
        .iter()
        .filter(|p| kept.contains(p.business_id.as_str()))
        .cloned()
        .collect();
    let (snapshot, _) = Snapshot::new(s.as_of, businesses, reviews, checkins, photos)
        .expect("filtered snapshot preserves id uniqueness");
    snapshot
}
