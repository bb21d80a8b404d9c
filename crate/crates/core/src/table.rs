//! Wide per-restaurant feature tables with CSV persistence.
//!
//! Every feature family produces one table: a `business_id` key column plus a
//! fixed, documented ordering of numeric columns. Tables round-trip through
//! CSV byte-identically for a given set of values, which the pipeline's
//! determinism contract relies on.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTable {
    /// Feature family name, e.g. "geo"; becomes a column-name prefix on join.
    pub family: String,
    pub ids: Vec<String>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl FeatureTable {
    pub fn new(family: impl Into<String>, columns: Vec<String>) -> Self {
        FeatureTable {
            family: family.into(),
            ids: Vec::new(),
            columns,
            rows: Vec::new(),
        }
    }

    pub fn push_row(&mut self, id: impl Into<String>, row: Vec<f64>) {
        assert_eq!(
            row.len(),
            self.columns.len(),
            "row width must match column count"
        );
        self.ids.push(id.into());
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    /// Map from business id to row index.
    pub fn id_index(&self) -> BTreeMap<&str, usize> {
        self.ids
            .iter()
            .enumerate()
            .map(|(i, id)| (id.as_str(), i))
            .collect()
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut writer = csv::Writer::from_path(path)?;
        let mut header = Vec::with_capacity(self.columns.len() + 1);
        header.push("business_id".to_string());
        header.extend(self.columns.iter().cloned());
        writer.write_record(&header)?;
        for (id, row) in self.ids.iter().zip(&self.rows) {
            let mut record = Vec::with_capacity(row.len() + 1);
            record.push(id.clone());
            record.extend(row.iter().map(|v| format_value(*v)));
            writer.write_record(&record)?;
        }
        writer.flush().map_err(|e| Error::io(path, e))?;
        Ok(())
    }

    pub fn read_csv(path: &Path, family: impl Into<String>) -> Result<Self> {
        let mut reader = csv::Reader::from_path(path)?;
        let header = reader.headers()?.clone();
        if header.is_empty() || &header[0] != "business_id" {
            return Err(Error::invalid(format!(
                "{}: first column must be business_id",
                path.display()
            )));
        }
        let columns: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
        let mut table = FeatureTable::new(family, columns);
        for record in reader.records() {
            let record = record?;
            let id = record
                .get(0)
                .ok_or_else(|| Error::invalid("empty csv record"))?
                .to_string();
            let mut row = Vec::with_capacity(table.columns.len());
            for field in record.iter().skip(1) {
                let v: f64 = field.parse().map_err(|_| {
                    Error::invalid(format!("{}: non-numeric value {field:?}", path.display()))
                })?;
                row.push(v);
            }
            if row.len() != table.columns.len() {
                return Err(Error::invalid(format!(
                    "{}: row width {} != header width {}",
                    path.display(),
                    row.len(),
                    table.columns.len()
                )));
            }
            table.ids.push(id);
            table.rows.push(row);
        }
        Ok(table)
    }
}

/// Render a value the way Rust's shortest round-trip float formatting does,
/// so reruns produce identical bytes.
fn format_value(v: f64) -> String {
    format!("{v}")
}
