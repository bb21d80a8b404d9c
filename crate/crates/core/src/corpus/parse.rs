//! JSONL snapshot parsing in the public Yelp open-dataset layout.
//!
//! A snapshot directory holds one JSONL file per record kind:
//! `business.json`, `review.json`, `checkin.json`, `photo.json`. The
//! business file is required; the others default to empty with a note in
//! the report. Malformed lines and invariant violations are skipped and
//! counted, never fatal.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use chrono::{NaiveDate, NaiveDateTime};
use serde::{Deserialize, Serialize};

use super::records::{
    BusinessRecord, CheckinRecord, IntegrityReport, PhotoRecord, ReviewRecord, Snapshot,
};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct KindStats {
    pub parsed: usize,
    /// Lines that were not valid JSON objects of the expected shape.
    pub malformed: usize,
    /// Well-formed lines violating a record invariant (star range,
    /// coordinate range, timestamp after the snapshot date, duplicate id).
    pub invalid: usize,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ParseReport {
    pub businesses: KindStats,
    pub reviews: KindStats,
    pub checkins: KindStats,
    pub photos: KindStats,
    pub integrity: IntegrityReport,
    pub missing_optional_files: Vec<String>,
}

impl ParseReport {
    pub fn total_skipped(&self) -> usize {
        let k = |s: &KindStats| s.malformed + s.invalid;
        k(&self.businesses) + k(&self.reviews) + k(&self.checkins) + k(&self.photos)
    }
}

/// Parse a snapshot directory dated `as_of`.
pub fn parse_snapshot(dir: &Path, as_of: NaiveDate) -> Result<(Snapshot, ParseReport)> {
    let mut report = ParseReport::default();
    let end = as_of
        .succ_opt()
        .expect("valid date")
        .and_hms_opt(0, 0, 0)
        .expect("valid time");

    let business_path = dir.join("business.json");
    if !business_path.exists() {
        return Err(Error::MissingFile(business_path));
    }
    let mut businesses = Vec::new();
    let mut seen_ids = BTreeMap::new();
    for_each_line(&business_path, |line| {
        match serde_json::from_str::<RawBusiness>(line) {
            Ok(raw) => match raw.validate() {
                Some(b) => {
                    if seen_ids.insert(b.business_id.clone(), ()).is_some() {
                        report.businesses.invalid += 1;
                    } else {
                        businesses.push(b);
                        report.businesses.parsed += 1;
                    }
                }
                None => report.businesses.invalid += 1,
            },
            Err(_) => report.businesses.malformed += 1,
        }
    })?;

    let mut reviews = Vec::new();
    read_optional(dir, "review.json", &mut report.missing_optional_files, |line| {
        match serde_json::from_str::<RawReview>(line) {
            Ok(raw) => match raw.validate(end) {
                Some(r) => {
                    reviews.push(r);
                    report.reviews.parsed += 1;
                }
                None => report.reviews.invalid += 1,
            },
            Err(_) => report.reviews.malformed += 1,
        }
    })?;

    let mut checkins = Vec::new();
    read_optional(dir, "checkin.json", &mut report.missing_optional_files, |line| {
        match serde_json::from_str::<RawCheckin>(line) {
            Ok(raw) => {
                let (record, dropped) = raw.validate(end);
                report.checkins.invalid += dropped;
                if let Some(c) = record {
                    checkins.push(c);
                    report.checkins.parsed += 1;
                }
            }
            Err(_) => report.checkins.malformed += 1,
        }
    })?;

    let mut photos = Vec::new();
    read_optional(dir, "photo.json", &mut report.missing_optional_files, |line| {
        match serde_json::from_str::<RawPhoto>(line) {
            Ok(raw) => {
                if raw.photo_id.is_empty() || raw.business_id.is_empty() {
                    report.photos.invalid += 1;
                } else {
                    photos.push(PhotoRecord {
                        photo_id: raw.photo_id,
                        business_id: raw.business_id,
                    });
                    report.photos.parsed += 1;
                }
            }
            Err(_) => report.photos.malformed += 1,
        }
    })?;

    let (snapshot, integrity) = Snapshot::new(as_of, businesses, reviews, checkins, photos)?;
    report.integrity = integrity;
    Ok((snapshot, report))
}

fn for_each_line(path: &Path, mut f: impl FnMut(&str)) -> Result<()> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    for line in BufReader::new(file).lines() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let line = line.trim();
        if !line.is_empty() {
            f(line);
        }
    }
    Ok(())
}

fn read_optional(
    dir: &Path,
    name: &str,
    missing: &mut Vec<String>,
    f: impl FnMut(&str),
) -> Result<()> {
    let path = dir.join(name);
    if !path.exists() {
        missing.push(name.to_string());
        return Ok(());
    }
    for_each_line(&path, f)
}

#[derive(Deserialize)]
struct RawBusiness {
    business_id: String,
    #[serde(default)]
    name: String,
    latitude: Option<f64>,
    longitude: Option<f64>,
    /// Comma-separated in the Yelp dumps; may be null.
    categories: Option<String>,
    is_open: Option<serde_json::Value>,
    #[serde(default)]
    attributes: Option<BTreeMap<String, serde_json::Value>>,
    #[serde(default)]
    state: Option<String>,
    #[serde(default)]
    review_count: Option<i64>,
}

impl RawBusiness {
    fn validate(self) -> Option<BusinessRecord> {
        if self.business_id.is_empty() {
            return None;
        }
        let latitude = self.latitude?;
        let longitude = self.longitude?;
        if !(-90.0..=90.0).contains(&latitude) || !(-180.0..=180.0).contains(&longitude) {
            return None;
        }
        let is_open = match self.is_open {
            Some(serde_json::Value::Bool(b)) => b,
            Some(serde_json::Value::Number(n)) => n.as_i64()? != 0,
            _ => return None,
        };
        let mut categories = Vec::new();
        if let Some(raw) = self.categories {
            for part in raw.split(',') {
                let part = part.trim();
                if !part.is_empty() && !categories.iter().any(|c| c == part) {
                    categories.push(part.to_string());
                }
            }
        }
        let review_count = self.review_count.unwrap_or(0).max(0) as u32;
        Some(BusinessRecord {
            business_id: self.business_id,
            name: self.name,
            latitude,
            longitude,
            categories,
            is_open,
            attributes: self.attributes.unwrap_or_default(),
            state: self.state.unwrap_or_default(),
            review_count,
        })
    }
}

#[derive(Deserialize)]
struct RawReview {
    review_id: String,
    business_id: String,
    user_id: String,
    stars: f64,
    date: String,
    #[serde(default)]
    text: String,
}

impl RawReview {
    fn validate(self, end: NaiveDateTime) -> Option<ReviewRecord> {
        if self.review_id.is_empty() || self.business_id.is_empty() || self.user_id.is_empty() {
            return None;
        }
        let stars = self.stars;
        if stars.fract() != 0.0 || !(1.0..=5.0).contains(&stars) {
            return None;
        }
        let timestamp = parse_datetime(&self.date)?;
        if timestamp >= end {
            return None;
        }
        Some(ReviewRecord {
            review_id: self.review_id,
            business_id: self.business_id,
            user_id: self.user_id,
            stars: stars as u8,
            timestamp,
            text: self.text,
        })
    }
}

#[derive(Deserialize)]
struct RawCheckin {
    business_id: String,
    /// Comma-separated datetimes in the 2019-style dumps.
    #[serde(default)]
    date: String,
}

impl RawCheckin {
    /// Returns the record restricted to in-window timestamps, plus the
    /// number of unparseable or late timestamps that were dropped.
    fn validate(self, end: NaiveDateTime) -> (Option<CheckinRecord>, usize) {
        if self.business_id.is_empty() {
            return (None, 1);
        }
        let mut timestamps = Vec::new();
        let mut dropped = 0;
        for part in self.date.split(',') {
            let part = part.trim();
            if part.is_empty() {
                continue;
            }
            match parse_datetime(part) {
                Some(ts) if ts < end => timestamps.push(ts),
                _ => dropped += 1,
            }
        }
        (
            Some(CheckinRecord {
                business_id: self.business_id,
                timestamps,
            }),
            dropped,
        )
    }
}

#[derive(Deserialize)]
struct RawPhoto {
    photo_id: String,
    business_id: String,
}

/// Accepts both `YYYY-MM-DD HH:MM:SS` (2019 dumps) and bare `YYYY-MM-DD`.
pub fn parse_datetime(s: &str) -> Option<NaiveDateTime> {
    if let Ok(dt) = NaiveDateTime::parse_from_str(s, "%Y-%m-%d %H:%M:%S") {
        return Some(dt);
    }
    NaiveDate::parse_from_str(s, "%Y-%m-%d")
        .ok()
        .and_then(|d| d.and_hms_opt(0, 0, 0))
}

#[derive(Serialize)]
struct OutBusiness<'a> {
    business_id: &'a str,
    name: &'a str,
    latitude: f64,
    longitude: f64,
    state: &'a str,
    categories: String,
    is_open: u8,
    attributes: Option<&'a BTreeMap<String, serde_json::Value>>,
    review_count: u32,
}

#[derive(Serialize)]
struct OutReview<'a> {
    review_id: &'a str,
    user_id: &'a str,
    business_id: &'a str,
    stars: f64,
    date: String,
    text: &'a str,
}

#[derive(Serialize)]
struct OutCheckin<'a> {
    business_id: &'a str,
    date: String,
}

#[derive(Serialize)]
struct OutPhoto<'a> {
    photo_id: &'a str,
    business_id: &'a str,
}

/// Write a snapshot back out in the Yelp JSONL layout. Record order is
/// preserved, so identical snapshots serialize to identical bytes.
pub fn write_snapshot(dir: &Path, s: &Snapshot) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let fmt = |ts: &NaiveDateTime| ts.format("%Y-%m-%d %H:%M:%S").to_string();

    let mut lines = Vec::with_capacity(s.businesses.len());
    for b in &s.businesses {
        lines.push(serde_json::to_string(&OutBusiness {
            business_id: &b.business_id,
            name: &b.name,
            latitude: b.latitude,
            longitude: b.longitude,
            state: &b.state,
            categories: b.categories.join(", "),
            is_open: b.is_open as u8,
            attributes: if b.attributes.is_empty() {
                None
            } else {
                Some(&b.attributes)
            },
            review_count: b.review_count,
        })?);
    }
    write_lines(&dir.join("business.json"), &lines)?;

    let mut lines = Vec::with_capacity(s.reviews.len());
    for r in &s.reviews {
        lines.push(serde_json::to_string(&OutReview {
            review_id: &r.review_id,
            user_id: &r.user_id,
            business_id: &r.business_id,
            stars: f64::from(r.stars),
            date: fmt(&r.timestamp),
            text: &r.text,
        })?);
    }
    write_lines(&dir.join("review.json"), &lines)?;

    let mut lines = Vec::with_capacity(s.checkins.len());
    for c in &s.checkins {
        let date = c
            .timestamps
            .iter()
            .map(&fmt)
            .collect::<Vec<_>>()
            .join(", ");
        lines.push(serde_json::to_string(&OutCheckin {
            business_id: &c.business_id,
            date,
        })?);
    }
    write_lines(&dir.join("checkin.json"), &lines)?;

    let mut lines = Vec::with_capacity(s.photos.len());
    for p in &s.photos {
        lines.push(serde_json::to_string(&OutPhoto {
            photo_id: &p.photo_id,
            business_id: &p.business_id,
        })?);
    }
    write_lines(&dir.join("photo.json"), &lines)?;
    Ok(())
}

fn write_lines(path: &Path, lines: &[String]) -> Result<()> {
    let mut out = String::with_capacity(lines.iter().map(|l| l.len() + 1).sum());
    for line in lines {
        out.push_str(line);
        out.push('\n');
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_dir(files: &[(&str, &str)]) -> tempfile::TempDir {
        let dir = tempfile::tempdir().unwrap();
        for (name, content) in files {
            let mut f = File::create(dir.path().join(name)).unwrap();
            f.write_all(content.as_bytes()).unwrap();
        }
        dir
    }

    fn date(y: i32, m: u32, d: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(y, m, d).unwrap()
    }

    const BIZ: &str = concat!(
        r#"{"business_id":"b1","name":"A","latitude":36.0,"longitude":-115.0,"categories":"Restaurants, Pizza","is_open":1,"state":"NV","review_count":3}"#,
        "\n",
        r#"{"business_id":"b2","name":"B","latitude":36.0,"longitude":-115.0,"categories":"Nightlife","is_open":0,"state":"NV","review_count":1}"#,
        "\n",
        r#"{"business_id":"b3","name":"C","latitude":36.0,"longitude":-115.0,"categories":null,"is_open":1,"state":"NV","review_count":0}"#,
        "\n",
    );

    #[test]
    fn parses_valid_business_lines() {
        let dir = write_dir(&[("business.json", BIZ)]);
        let (snap, report) = parse_snapshot(dir.path(), date(2017, 12, 31)).unwrap();
        assert_eq!(snap.businesses.len(), 3);
        assert_eq!(report.businesses.parsed, 3);
        assert_eq!(report.total_skipped(), 0);
        assert_eq!(snap.business("b1").unwrap().categories.len(), 2);
    }

    #[test]
    fn skips_invalid_stars_with_count() {
        let reviews = concat!(
            r#"{"review_id":"r1","business_id":"b1","user_id":"u1","stars":7.0,"date":"2016-01-01","text":"x"}"#,
            "\n",
            r#"{"review_id":"r2","business_id":"b1","user_id":"u1","stars":4.0,"date":"2016-01-01 10:00:00","text":"y"}"#,
            "\n",
        );
        let dir = write_dir(&[("business.json", BIZ), ("review.json", reviews)]);
        let (snap, report) = parse_snapshot(dir.path(), date(2017, 12, 31)).unwrap();
        assert_eq!(snap.reviews.len(), 1);
        assert_eq!(report.reviews.invalid, 1);
    }

    #[test]
    fn skips_malformed_lines_with_count() {
        let dir = write_dir(&[(
            "business.json",
            "{not json}\n{\"business_id\":\"b1\",\"latitude\":36.0,\"longitude\":-115.0,\"is_open\":1}\n",
        )]);
        let (snap, report) = parse_snapshot(dir.path(), date(2017, 12, 31)).unwrap();
        assert_eq!(snap.businesses.len(), 1);
        assert_eq!(report.businesses.malformed, 1);
    }

    #[test]
    fn missing_business_file_is_fatal() {
        let dir = write_dir(&[]);
        assert!(matches!(
            parse_snapshot(dir.path(), date(2017, 12, 31)),
            Err(Error::MissingFile(_))
        ));
    }

    #[test]
    fn review_after_snapshot_date_is_dropped() {
        let reviews = concat!(
            r#"{"review_id":"r1","business_id":"b1","user_id":"u1","stars":4.0,"date":"2018-06-01","text":"late"}"#,
            "\n",
            r#"{"review_id":"r2","business_id":"b1","user_id":"u1","stars":4.0,"date":"2017-12-31 23:59:59","text":"on the day"}"#,
            "\n",
        );
        let dir = write_dir(&[("business.json", BIZ), ("review.json", reviews)]);
        let (snap, report) = parse_snapshot(dir.path(), date(2017, 12, 31)).unwrap();
        assert_eq!(snap.reviews.len(), 1);
        assert_eq!(snap.reviews[0].review_id, "r2");
        assert_eq!(report.reviews.invalid, 1);
    }

    #[test]
    fn unresolved_foreign_keys_kept_and_flagged() {
        let reviews = concat!(
            r#"{"review_id":"r1","business_id":"ghost","user_id":"u1","stars":3.0,"date":"2016-01-01","text":"x"}"#,
            "\n",
        );
        let dir = write_dir(&[("business.json", BIZ), ("review.json", reviews)]);
        let (snap, report) = parse_snapshot(dir.path(), date(2017, 12, 31)).unwrap();
        assert_eq!(snap.reviews.len(), 1);
        assert_eq!(report.integrity.unresolved_reviews, 1);
    }

    #[test]
    fn checkin_dates_parse_as_list() {
        let checkins = concat!(
            r#"{"business_id":"b1","date":"2016-04-26 19:49:16, 2016-08-30 18:36:57"}"#,
            "\n",
        );
        let dir = write_dir(&[("business.json", BIZ), ("checkin.json", checkins)]);
        let (snap, _) = parse_snapshot(dir.path(), date(2017, 12, 31)).unwrap();
        assert_eq!(snap.checkins.len(), 1);
        assert_eq!(snap.checkins[0].timestamps.len(), 2);
    }
}
