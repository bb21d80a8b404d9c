//! Business-attribute encoding.
//!
//! Yelp attribute values arrive either as JSON booleans or as Python
//! literals serialized to strings ("True", "u'free'", "{'garage': False}").
//! Everything is normalized through a small literal parser and encoded
//! into a fixed-width numeric vector with explicit missingness columns:
//! tree models can then exploit absence itself as signal.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::corpus::{BusinessRecord, Snapshot};
use crate::table::FeatureTable;

const AMBIENCE_KEYS: [&str; 9] = [
    "romantic", "intimate", "classy", "hipster", "divey", "touristy", "trendy", "upscale",
    "casual",
];
const DIETARY_KEYS: [&str; 7] = [
    "dairy-free",
    "gluten-free",
    "vegan",
    "kosher",
    "halal",
    "soy-free",
    "vegetarian",
];
const PARKING_KEYS: [&str; 5] = ["garage", "street", "validated", "lot", "valet"];
const ALCOHOL_LEVELS: [&str; 3] = ["none", "beer_and_wine", "full_bar"];
const ATTIRE_LEVELS: [&str; 3] = ["casual", "dressy", "formal"];
const WIFI_LEVELS: [&str; 3] = ["no", "free", "paid"];

/// A normalized Python-ish literal.
#[derive(Debug, Clone, PartialEq)]
pub enum PyValue {
    None,
    Bool(bool),
    Str(String),
    Dict(BTreeMap<String, PyValue>),
}

/// Parse the string forms Yelp uses: `True`, `False`, `None`, quoted
/// strings with an optional `u` prefix, and one-level dict literals.
/// Anything unrecognized comes back as `None` so encoding stays total.
pub fn parse_py_literal(s: &str) -> PyValue {
    let s = s.trim();
    match s {
        "True" => return PyValue::Bool(true),
        "False" => return PyValue::Bool(false),
        "None" | "" => return PyValue::None,
        _ => {}
    }
    if let Some(inner) = strip_quotes(s) {
        return PyValue::Str(inner.to_string());
    }
    if let Some(body) = s.strip_prefix('{').and_then(|r| r.strip_suffix('}')) {
        let mut dict = BTreeMap::new();
        for entry in body.split(',') {
            let entry = entry.trim();
            if entry.is_empty() {
                continue;
            }
            let Some((key, value)) = entry.split_once(':') else {
                continue;
            };
            let key = strip_quotes(key.trim()).unwrap_or(key.trim()).to_string();
            dict.insert(key, parse_py_literal(value));
        }
        return PyValue::Dict(dict);
    }
    // Bare scalars like the "2" of a price range.
    PyValue::Str(s.to_string())
}

fn strip_quotes(s: &str) -> Option<&str> {
    let s = s.strip_prefix('u').unwrap_or(s);
    s.strip_prefix('\'')
        .and_then(|r| r.strip_suffix('\''))
        .or_else(|| s.strip_prefix('"').and_then(|r| r.strip_suffix('"')))
}

fn normalize(value: &serde_json::Value) -> PyValue {
    match value {
        serde_json::Value::Null => PyValue::None,
        serde_json::Value::Bool(b) => PyValue::Bool(*b),
        serde_json::Value::Number(n) => PyValue::Str(n.to_string()),
        serde_json::Value::String(s) => parse_py_literal(s),
        serde_json::Value::Object(map) => {
            let dict = map
                .iter()
                .map(|(k, v)| (k.clone(), normalize(v)))
                .collect();
            PyValue::Dict(dict)
        }
        serde_json::Value::Array(_) => PyValue::None,
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ColumnSpec {
    pub name: String,
    /// "integer", "binary", "onehot", or "count".
    pub kind: String,
    /// Dotted path into the raw record, e.g. "attributes.Ambience.trendy".
    pub source: String,
}

fn spec(name: &str, kind: &str, source: &str) -> ColumnSpec {
    ColumnSpec {
        name: name.to_string(),
        kind: kind.to_string(),
        source: source.to_string(),
    }
}

/// The fixed encoding schema, in column order.
pub fn attribute_schema() -> Vec<ColumnSpec> {
    let mut cols = Vec::new();
    cols.push(spec(
        "price_range",
        "integer",
        "attributes.RestaurantsPriceRange2",
    ));
    for k in AMBIENCE_KEYS {
        let slug = k.replace('-', "_");
        let source = format!("attributes.Ambience.{k}");
        cols.push(spec(&format!("ambience_{slug}_present"), "binary", &source));
        cols.push(spec(&format!("ambience_{slug}"), "binary", &source));
    }
    for k in DIETARY_KEYS {
        let slug = k.replace('-', "_");
        let source = format!("attributes.DietaryRestrictions.{k}");
        cols.push(spec(&format!("dietary_{slug}_present"), "binary", &source));
        cols.push(spec(&format!("dietary_{slug}"), "binary", &source));
    }
    cols.push(spec("alcohol_missing", "onehot", "attributes.Alcohol"));
    for level in ALCOHOL_LEVELS {
        cols.push(spec(&format!("alcohol_{level}"), "onehot", "attributes.Alcohol"));
    }
    for (name, source) in [
        ("good_for_kids", "attributes.GoodForKids"),
        ("dogs_allowed", "attributes.DogsAllowed"),
    ] {
        cols.push(spec(&format!("{name}_present"), "binary", source));
        cols.push(spec(name, "binary", source));
    }
    cols.push(spec("attire_missing", "onehot", "attributes.RestaurantsAttire"));
    for level in ATTIRE_LEVELS {
        cols.push(spec(
            &format!("attire_{level}"),
            "onehot",
            "attributes.RestaurantsAttire",
        ));
    }
    for (name, source) in [
        ("outdoor_seating", "attributes.OutdoorSeating"),
        ("bike_parking", "attributes.BikeParking"),
    ] {
        cols.push(spec(&format!("{name}_present"), "binary", source));
        cols.push(spec(name, "binary", source));
    }
    for k in PARKING_KEYS {
        let source = format!("attributes.BusinessParking.{k}");
        cols.push(spec(&format!("parking_{k}_present"), "binary", &source));
        cols.push(spec(&format!("parking_{k}"), "binary", &source));
    }
    cols.push(spec("wifi_missing", "onehot", "attributes.WiFi"));
    for level in WIFI_LEVELS {
        cols.push(spec(&format!("wifi_{level}"), "onehot", "attributes.WiFi"));
    }
    for (name, source) in [
        ("has_tv", "attributes.HasTV"),
        ("takes_reservations", "attributes.RestaurantsReservations"),
        ("happy_hour", "attributes.HappyHour"),
    ] {
        cols.push(spec(&format!("{name}_present"), "binary", source));
        cols.push(spec(name, "binary", source));
    }
    cols.push(spec("image_count", "count", "photo records in window"));
    cols.push(spec("review_count", "count", "review records in window"));
    cols
}

/// Encode one business into the fixed-width vector (engagement counts are
/// filled by the caller and left 0 here). Total: every record encodes.
/// Unrecognized enum values map to missing and are returned for the report.
pub fn encode_attributes(b: &BusinessRecord) -> (Vec<f64>, Vec<(String, String)>) {
    let mut row = Vec::with_capacity(attribute_schema().len());
    let mut unrecognized = Vec::new();
    let get = |key: &str| b.attributes.get(key).map(normalize);

    // price_range: 0 = missing.
    let price = match get("RestaurantsPriceRange2") {
        Some(PyValue::Str(s)) => match s.parse::<u8>() {
            Ok(p @ 1..=4) => f64::from(p),
            _ => {
                unrecognized.push(("RestaurantsPriceRange2".to_string(), s));
                0.0
            }
        },
        Some(PyValue::None) | None => 0.0,
        Some(other) => {
            unrecognized.push(("RestaurantsPriceRange2".to_string(), format!("{other:?}")));
            0.0
        }
    };
    row.push(price);

    let push_tri = |row: &mut Vec<f64>, v: Option<PyValue>, attr: &str,
                        unrecognized: &mut Vec<(String, String)>| {
        match v {
            Some(PyValue::Bool(b)) => {
                row.push(1.0);
                row.push(b as u8 as f64);
            }
            Some(PyValue::None) | None => {
                row.push(0.0);
                row.push(0.0);
            }
            Some(other) => {
                unrecognized.push((attr.to_string(), format!("{other:?}")));
                row.push(0.0);
                row.push(0.0);
            }
        }
    };

    let nested = |outer: Option<PyValue>, key: &str| -> Option<PyValue> {
        match outer {
            Some(PyValue::Dict(d)) => d.get(key).cloned(),
            _ => None,
        }
    };

    let ambience = get("Ambience");
    for k in AMBIENCE_KEYS {
        push_tri(&mut row, nested(ambience.clone(), k), &format!("Ambience.{k}"), &mut unrecognized);
    }
    let dietary = get("DietaryRestrictions");
    for k in DIETARY_KEYS {
        push_tri(
            &mut row,
            nested(dietary.clone(), k),
            &format!("DietaryRestrictions.{k}"),
            &mut unrecognized,
        );
    }

    let push_onehot = |row: &mut Vec<f64>, v: Option<PyValue>, attr: &str, levels: &[&str],
                           unrecognized: &mut Vec<(String, String)>| {
        let mut hot = None;
        match v {
            Some(PyValue::Str(s)) => match levels.iter().position(|l| *l == s) {
                Some(i) => hot = Some(i),
                None => unrecognized.push((attr.to_string(), s)),
            },
            Some(PyValue::None) | None => {}
            Some(other) => unrecognized.push((attr.to_string(), format!("{other:?}"))),
        }
        row.push(hot.is_none() as u8 as f64);
        for i in 0..levels.len() {
            row.push((hot == Some(i)) as u8 as f64);
        }
    };

    push_onehot(&mut row, get("Alcohol"), "Alcohol", &ALCOHOL_LEVELS, &mut unrecognized);
    push_tri(&mut row, get("GoodForKids"), "GoodForKids", &mut unrecognized);
    push_tri(&mut row, get("DogsAllowed"), "DogsAllowed", &mut unrecognized);
    push_onehot(
        &mut row,
        get("RestaurantsAttire"),
        "RestaurantsAttire",
        &ATTIRE_LEVELS,
        &mut unrecognized,
    );
    push_tri(&mut row, get("OutdoorSeating"), "OutdoorSeating", &mut unrecognized);
    push_tri(&mut row, get("BikeParking"), "BikeParking", &mut unrecognized);
    let parking = get("BusinessParking");
    for k in PARKING_KEYS {
        push_tri(
            &mut row,
            nested(parking.clone(), k),
            &format!("BusinessParking.{k}"),
            &mut unrecognized,
        );
    }
    push_onehot(&mut row, get("WiFi"), "WiFi", &WIFI_LEVELS, &mut unrecognized);
    push_tri(&mut row, get("HasTV"), "HasTV", &mut unrecognized);
    push_tri(
        &mut row,
        get("RestaurantsReservations"),
        "RestaurantsReservations",
        &mut unrecognized,
    );
    push_tri(&mut row, get("HappyHour"), "HappyHour", &mut unrecognized);

    // image_count and review_count slots.
    row.push(0.0);
    row.push(0.0);

    debug_assert_eq!(row.len(), attribute_schema().len());
    (row, unrecognized)
}

/// Photo and review counts for a business within the observation window.
/// Counts are recomputed from records rather than trusting the business
/// file's own `review_count` field.
pub fn engagement_counts(business_id: &str, s: &Snapshot) -> (u32, u32) {
    let end = s.end_instant();
    let images = s
        .photos
        .iter()
        .filter(|p| p.business_id == business_id)
        .count() as u32;
    let reviews = s
        .reviews
        .iter()
        .filter(|r| r.business_id == business_id && r.timestamp < end)
        .count() as u32;
    (images, reviews)
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct AttributeReport {
    pub encoded: usize,
    /// attribute path -> count of unrecognized values mapped to missing.
    pub unrecognized: BTreeMap<String, usize>,
}

/// Encode the population into the attribute feature table.
pub fn attribute_feature_table(
    s: &Snapshot,
    population: &[String],
) -> (FeatureTable, AttributeReport) {
    let schema = attribute_schema();
    let columns: Vec<String> = schema.iter().map(|c| c.name.clone()).collect();
    let image_idx = columns.iter().position(|c| c == "image_count").unwrap();
    let review_idx = columns.iter().position(|c| c == "review_count").unwrap();

    let mut photo_counts: BTreeMap<&str, u32> = BTreeMap::new();
    for p in &s.photos {
        *photo_counts.entry(p.business_id.as_str()).or_insert(0) += 1;
    }
    let end = s.end_instant();
    let mut review_counts: BTreeMap<&str, u32> = BTreeMap::new();
    for r in &s.reviews {
        if r.timestamp < end {
            *review_counts.entry(r.business_id.as_str()).or_insert(0) += 1;
        }
    }

    let mut table = FeatureTable::new("attributes", columns);
    let mut report = AttributeReport::default();
    let mut population: Vec<&String> = population.iter().collect();
    population.sort();
    for id in population {
        let Some(b) = s.business(id) else { continue };
        let (mut row, unrecognized) = encode_attributes(b);
        for (attr, _) in unrecognized {
            *report.unrecognized.entry(attr).or_insert(0) += 1;
        }
        row[image_idx] = f64::from(photo_counts.get(id.as_str()).copied().unwrap_or(0));
        row[review_idx] = f64::from(review_counts.get(id.as_str()).copied().unwrap_or(0));
        table.push_row(id.clone(), row);
        report.encoded += 1;
    }
    (table, report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{PhotoRecord, ReviewRecord, Snapshot};
    use chrono::NaiveDate;

    fn business_with(attrs: &[(&str, serde_json::Value)]) -> BusinessRecord {
        BusinessRecord {
            business_id: "b1".to_string(),
            name: "B".to_string(),
            latitude: 36.0,
            longitude: -115.0,
            categories: vec!["Restaurants".to_string()],
            is_open: true,
            attributes: attrs
                .iter()
                .map(|(k, v)| (k.to_string(), v.clone()))
                .collect(),
            state: "NV".to_string(),
            review_count: 99,
        }
    }

    fn col(name: &str) -> usize {
        attribute_schema()
            .iter()
            .position(|c| c.name == name)
            .unwrap()
    }

    #[test]
    fn py_literal_forms() {
        assert_eq!(parse_py_literal("True"), PyValue::Bool(true));
        assert_eq!(parse_py_literal("None"), PyValue::None);
        assert_eq!(parse_py_literal("u'free'"), PyValue::Str("free".into()));
        assert_eq!(parse_py_literal("'casual'"), PyValue::Str("casual".into()));
        assert_eq!(parse_py_literal("2"), PyValue::Str("2".into()));
        let PyValue::Dict(d) = parse_py_literal("{'garage': False, 'street': True}") else {
            panic!("expected dict");
        };
        assert_eq!(d["garage"], PyValue::Bool(false));
        assert_eq!(d["street"], PyValue::Bool(true));
    }

    #[test]
    fn price_range_and_ambience_encoding() {
        let b = business_with(&[
            ("RestaurantsPriceRange2", serde_json::json!("2")),
            ("Ambience", serde_json::json!("{'trendy': True}")),
        ]);
        let (row, unrecognized) = encode_attributes(&b);
        assert!(unrecognized.is_empty());
        assert_eq!(row[col("price_range")], 2.0);
        assert_eq!(row[col("ambience_trendy_present")], 1.0);
        assert_eq!(row[col("ambience_trendy")], 1.0);
        assert_eq!(row[col("ambience_romantic_present")], 0.0);
        assert_eq!(row[col("ambience_romantic")], 0.0);
    }

    #[test]
    fn null_attributes_encode_all_missing() {
        let b = business_with(&[]);
        let (row, unrecognized) = encode_attributes(&b);
        assert!(unrecognized.is_empty());
        assert_eq!(row.len(), attribute_schema().len());
        // Everything except the one-hot missing indicators is zero.
        for (i, c) in attribute_schema().iter().enumerate() {
            if c.name.ends_with("_missing") {
                assert_eq!(row[i], 1.0, "{}", c.name);
            } else {
                assert_eq!(row[i], 0.0, "{}", c.name);
            }
        }
    }

    #[test]
    fn categorical_onehots_and_unknown_values() {
        let b = business_with(&[
            ("WiFi", serde_json::json!("u'free'")),
            ("Alcohol", serde_json::json!("u'full_bar'")),
            ("RestaurantsAttire", serde_json::json!("u'space_suit'")),
        ]);
        let (row, unrecognized) = encode_attributes(&b);
        assert_eq!(row[col("wifi_free")], 1.0);
        assert_eq!(row[col("wifi_missing")], 0.0);
        assert_eq!(row[col("alcohol_full_bar")], 1.0);
        assert_eq!(row[col("attire_missing")], 1.0);
        assert_eq!(unrecognized.len(), 1);
        assert_eq!(unrecognized[0].0, "RestaurantsAttire");
    }

    #[test]
    fn value_implies_present_for_every_tri_column() {
        let b = business_with(&[
            ("GoodForKids", serde_json::json!("True")),
            ("DogsAllowed", serde_json::json!("False")),
            ("BusinessParking", serde_json::json!("{'garage': True, 'lot': False}")),
        ]);
        let (row, _) = encode_attributes(&b);
        let schema = attribute_schema();
        for (i, c) in schema.iter().enumerate() {
            if let Some(base) = c.name.strip_suffix("_present") {
                let value_idx = schema.iter().position(|x| x.name == base).unwrap();
                if row[value_idx] == 1.0 {
                    assert_eq!(row[i], 1.0, "{base}: value implies present");
                }
            }
        }
    }

    #[test]
    fn engagement_counts_respect_window() {
        let date = NaiveDate::from_ymd_opt(2017, 12, 31).unwrap();
        let review = |id: &str, ts: &str| ReviewRecord {
            review_id: id.to_string(),
            business_id: "b1".to_string(),
            user_id: "u".to_string(),
            stars: 4,
            timestamp: crate::corpus::parse_datetime(ts).unwrap(),
            text: String::new(),
        };
        let (snap, _) = Snapshot::new(
            date,
            vec![business_with(&[])],
            vec![
                review("r1", "2017-06-01"),
                review("r2", "2017-07-01"),
                review("r3", "2018-02-01"),
            ],
            vec![],
            vec![],
        )
        .unwrap();
        let (images, reviews) = engagement_counts("b1", &snap);
        assert_eq!(images, 0);
        assert_eq!(reviews, 2);

        let (snap, _) = Snapshot::new(
            date,
            vec![business_with(&[])],
            vec![review("r1", "2017-06-01")],
            vec![],
            vec![PhotoRecord {
                photo_id: "p1".into(),
                business_id: "b1".into(),
            }],
        )
        .unwrap();
        assert_eq!(engagement_counts("b1", &snap), (1, 1));
    }

    #[test]
    fn table_width_is_stable() {
        assert_eq!(attribute_schema().len(), 71);
        let names: std::collections::BTreeSet<String> =
            attribute_schema().into_iter().map(|c| c.name).collect();
        assert_eq!(names.len(), 71, "column names must be unique");
    }
}
