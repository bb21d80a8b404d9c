//! Dense row-major matrices, labeled datasets, and feature-table joins.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::table::FeatureTable;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Matrix {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Matrix {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        let n = rows.len();
        for row in rows {
            assert_eq!(row.len(), cols, "ragged rows");
            data.extend(row);
        }
        Matrix { rows: n, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[f64]> {
        (0..self.rows).map(move |i| self.row(i))
    }

    pub fn column(&self, j: usize) -> impl Iterator<Item = f64> + '_ {
        (0..self.rows).map(move |i| self.data[i * self.cols + j])
    }

    pub fn push_row(&mut self, row: &[f64]) {
        assert_eq!(row.len(), self.cols);
        self.data.extend_from_slice(row);
        self.rows += 1;
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitTag {
    Train,
    Test,
}

/// A labeled feature matrix. The positive class is "survived".
#[derive(Debug, Clone)]
pub struct Dataset {
    pub ids: Vec<String>,
    pub schema: Vec<String>,
    pub x: Matrix,
    pub y: Vec<bool>,
    pub tag: Option<SplitTag>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn positives(&self) -> usize {
        self.y.iter().filter(|&&v| v).count()
    }

    /// Row subset in the given index order.
    pub fn subset(&self, indices: &[usize], tag: Option<SplitTag>) -> Dataset {
        let mut x = Matrix::zeros(0, self.x.cols());
        let mut ids = Vec::with_capacity(indices.len());
        let mut y = Vec::with_capacity(indices.len());
        for &i in indices {
            x.push_row(self.x.row(i));
            ids.push(self.ids[i].clone());
            y.push(self.y[i]);
        }
        Dataset {
            ids,
            schema: self.schema.clone(),
            x,
            y,
            tag,
        }
    }

    /// Fingerprint of the column schema; models refuse mismatched inputs.
    pub fn schema_fingerprint(&self) -> String {
        schema_fingerprint(&self.schema)
    }
}

pub fn schema_fingerprint(schema: &[String]) -> String {
    use sha2::{Digest, Sha256};
    let mut hasher = Sha256::new();
    for col in schema {
        hasher.update(col.as_bytes());
        hasher.update([0u8]);
    }
    let digest = hasher.finalize();
    digest.iter().map(|b| format!("{b:02x}")).take(16).collect()
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct JoinReport {
    pub joined: usize,
    /// Rows dropped per source because the id was absent elsewhere.
    pub dropped: BTreeMap<String, usize>,
}

/// Inner-join feature tables with the label map. Row order is the sorted
/// id order, so assembly is independent of table construction order.
pub fn assemble_dataset(
    tables: &[&FeatureTable],
    labels: &BTreeMap<String, bool>,
) -> Result<(Dataset, JoinReport)> {
    if tables.is_empty() {
        return Err(Error::invalid("no feature tables selected"));
    }
    let indices: Vec<BTreeMap<&str, usize>> = tables.iter().map(|t| t.id_index()).collect();
    let mut join_ids: Vec<&String> = labels
        .iter()
        .filter(|(id, _)| indices.iter().all(|ix| ix.contains_key(id.as_str())))
        .map(|(id, _)| id)
        .collect();
    join_ids.sort();

    let mut report = JoinReport {
        joined: join_ids.len(),
        ..JoinReport::default()
    };
    for (t, ix) in tables.iter().zip(&indices) {
        let dropped = ix
            .keys()
            .filter(|id| {
                !labels.contains_key(**id)
                    || !indices.iter().all(|other| other.contains_key(*id))
            })
            .count();
        if dropped > 0 {
            report.dropped.insert(t.family.clone(), dropped);
        }
    }
    let unlabeled_join = labels
        .keys()
        .filter(|id| !indices.iter().all(|ix| ix.contains_key(id.as_str())))
        .count();
    if unlabeled_join > 0 {
        report.dropped.insert("labels".to_string(), unlabeled_join);
    }

    if join_ids.is_empty() {
        return Err(Error::invalid(
            "empty join: no labeled id appears in every selected feature table",
        ));
    }

    let mut schema = Vec::new();
    for t in tables {
        schema.extend(t.columns.iter().map(|c| format!("{}.{c}", t.family)));
    }
    let width = schema.len();
    let mut x = Matrix::zeros(0, width);
    let mut y = Vec::with_capacity(join_ids.len());
    let mut row_buf = Vec::with_capacity(width);
    for id in &join_ids {
        row_buf.clear();
        for (t, ix) in tables.iter().zip(&indices) {
            let r = ix[id.as_str()];
            row_buf.extend_from_slice(&t.rows[r]);
        }
        x.push_row(&row_buf);
        y.push(labels[id.as_str()]);
    }
    if !x.is_finite() {
        return Err(Error::invalid("assembled dataset contains NaN or Inf"));
    }
    let ids = join_ids.into_iter().cloned().collect();
    Ok((
        Dataset {
            ids,
            schema,
            x,
            y,
            tag: None,
        },
        report,
    ))
}

/// Per-column z-score scaler fitted on training data. Zero-variance
/// columns pass through unscaled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scaler {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Scaler {
    pub fn fit(x: &Matrix) -> Scaler {
        let n = x.rows().max(1) as f64;
        let cols = x.cols();
        let mut mean = vec![0.0; cols];
        for row in x.iter_rows() {
            for (m, v) in mean.iter_mut().zip(row) {
                *m += v;
            }
        }
        for m in &mut mean {
            *m /= n;
        }
        let mut var = vec![0.0; cols];
        for row in x.iter_rows() {
            for ((s, v), m) in var.iter_mut().zip(row).zip(&mean) {
                let d = v - m;
                *s += d * d;
            }
        }
        let std = var
            .into_iter()
            .map(|s| {
                let sd = (s / n).sqrt();
                if sd > 1e-12 {
                    sd
                } else {
                    1.0
                }
            })
            .collect();
        Scaler { mean, std }
    }

    pub fn transform(&self, x: &Matrix) -> Matrix {
        let mut out = x.clone();
        for i in 0..out.rows() {
            let row = out.row_mut(i);
            for ((v, m), s) in row.iter_mut().zip(&self.mean).zip(&self.std) {
                *v = (*v - m) / s;
            }
        }
        out
    }
}
