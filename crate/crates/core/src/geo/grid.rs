//! Uniform lat/lon grid for radius queries.
//!
//! Cells are sized so that any two points within the query radius land in
//! the same or adjacent cells (conservative degree conversion, longitude
//! wrapped modulo 360). Candidates from the 3x3 block around a query point
//! are then filtered with the exact haversine distance, so results are
//! identical to a brute-force scan.

use std::collections::HashMap;

use super::distance::{geo_distance, EARTH_RADIUS_M};

/// Meters per degree of latitude on the haversine sphere.
const METERS_PER_LAT_DEG: f64 = EARTH_RADIUS_M * std::f64::consts::PI / 180.0;

#[derive(Debug)]
pub struct GridIndex {
    points: Vec<(f64, f64)>,
    radius_m: f64,
    lat_cell_deg: f64,
    lon_cell_deg: f64,
    lon_cols: i64,
    cells: HashMap<(i64, i64), Vec<u32>>,
}

impl GridIndex {
    pub fn new(points: Vec<(f64, f64)>, radius_m: f64) -> GridIndex {
        assert!(radius_m > 0.0, "radius must be positive");
        // Latitude: slightly undersized meters-per-degree keeps the cell
        // at least one radius wide.
        let lat_cell_deg = radius_m / (METERS_PER_LAT_DEG * 0.999);

        // Longitude: bound the angular separation of two in-radius points
        // at the highest latitude present in the data.
        let max_abs_lat = points
            .iter()
            .map(|p| p.0.abs())
            .fold(0.0f64, f64::max)
            .min(89.9);
        let cos_max = max_abs_lat.to_radians().cos();
        let half_angle = (radius_m / (2.0 * EARTH_RADIUS_M)).sin() / cos_max;
        let lon_cell_deg = if half_angle >= 1.0 {
            360.0
        } else {
            (2.0 * half_angle.asin()).to_degrees() * 1.001
        };
        let lon_cols = ((360.0 / lon_cell_deg).floor() as i64).max(1);
        let lon_cell_deg = 360.0 / lon_cols as f64;

        let mut index = GridIndex {
            points,
            radius_m,
            lat_cell_deg,
            lon_cell_deg,
            lon_cols,
            cells: HashMap::new(),
        };
        for i in 0..index.points.len() {
            let key = index.cell_of(index.points[i]);
            index.cells.entry(key).or_default().push(i as u32);
        }
        index
    }

    fn cell_of(&self, p: (f64, f64)) -> (i64, i64) {
        let row = (p.0 / self.lat_cell_deg).floor() as i64;
        let col = (((p.1 + 180.0) / self.lon_cell_deg).floor() as i64)
            .clamp(0, self.lon_cols - 1);
        (row, col)
    }

    /// Indices of all points within `radius_m` of `center`, excluding
    /// `exclude` if given, in ascending index order.
    pub fn within_radius(&self, center: (f64, f64), exclude: Option<usize>) -> Vec<usize> {
        let (row, col) = self.cell_of(center);
        let mut result = Vec::new();
        let cols: Vec<i64> = if self.lon_cols <= 3 {
            (0..self.lon_cols).collect()
        } else {
            vec![
                (col - 1).rem_euclid(self.lon_cols),
                col,
                (col + 1).rem_euclid(self.lon_cols),
            ]
        };
        for r in row - 1..=row + 1 {
            for &c in &cols {
                if let Some(bucket) = self.cells.get(&(r, c)) {
                    for &i in bucket {
                        let i = i as usize;
                        if Some(i) == exclude {
                            continue;
                        }
                        if geo_distance(center, self.points[i]) <= self.radius_m {
                            result.push(i);
                        }
                    }
                }
            }
        }
        result.sort_unstable();
        result
    }
}
