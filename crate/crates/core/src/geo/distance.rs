//! Great-circle distance.

/// Mean Earth radius in meters.
pub const EARTH_RADIUS_M: f64 = 6_371_000.0;

/// Haversine distance in meters between two (latitude, longitude) points
/// given in degrees. Symmetric and nonnegative.
pub fn geo_distance(a: (f64, f64), b: (f64, f64)) -> f64 {
    let lat1 = a.0.to_radians();
    let lat2 = b.0.to_radians();
    let dlat = (b.0 - a.0).to_radians();
    let dlon = (b.1 - a.1).to_radians();

    let s_lat = (dlat / 2.0).sin();
    let s_lon = (dlon / 2.0).sin();
    let h = s_lat * s_lat + lat1.cos() * lat2.cos() * s_lon * s_lon;
    2.0 * EARTH_RADIUS_M * h.sqrt().min(1.0).asin()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_is_zero() {
        assert_eq!(geo_distance((41.3, -73.2), (41.3, -73.2)), 0.0);
    }

    #[test]
    fn one_degree_of_longitude_at_equator() {
        // Independent evaluation: R * pi / 180.
        let expected = EARTH_RADIUS_M * std::f64::consts::PI / 180.0;
        let d = geo_distance((0.0, 0.0), (0.0, 1.0));
        assert!((d - expected).abs() < 1e-6);
        assert!((d - 111_195.0).abs() <= 1.0);
    }

    #[test]
    fn symmetric_on_random_pairs() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let a = (rng.random_range(-90.0..90.0), rng.random_range(-180.0..180.0));
            let b = (rng.random_range(-90.0..90.0), rng.random_range(-180.0..180.0));
            let d1 = geo_distance(a, b);
            let d2 = geo_distance(b, a);
            assert!(d1 >= 0.0);
            assert_eq!(d1, d2);
        }
    }
}
