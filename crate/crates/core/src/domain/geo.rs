use crate::error::{Error, Result};

pub const EARTH_RADIUS_KM: f64 = 6371.0;

/// WGS84 coordinate in degrees.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatLon {
    pub lat: f64,
    pub lon: f64,
}

impl LatLon {
    pub fn new(lat: f64, lon: f64) -> Result<Self> {
        if !(-90.0..=90.0).contains(&lat) {
            return Err(Error::invalid("lat", format!("{lat} outside [-90, 90]")));
        }
        if !(-180.0..=180.0).contains(&lon) {
            return Err(Error::invalid("lon", format!("{lon} outside [-180, 180]")));
        }
        Ok(Self { lat, lon })
    }
}

/// Great-circle distance on a sphere of radius [`EARTH_RADIUS_KM`].
pub fn haversine_km(a: LatLon, b: LatLon) -> Result<f64> {
    let a = LatLon::new(a.lat, a.lon)?;
    let b = LatLon::new(b.lat, b.lon)?;
    Ok(haversine_unchecked(a, b))
}

pub(crate) fn haversine_unchecked(a: LatLon, b: LatLon) -> f64 {
    let (phi1, phi2) = (a.lat.to_radians(), b.lat.to_radians());
    let dphi = phi2 - phi1;
    let dlambda = (b.lon - a.lon).to_radians();
    let h = (dphi / 2.0).sin().powi(2) + phi1.cos() * phi2.cos() * (dlambda / 2.0).sin().powi(2);
    // clamp: rounding can push h a hair above 1 for antipodes
    2.0 * EARTH_RADIUS_KM * h.sqrt().min(1.0).asin()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(lat: f64, lon: f64) -> LatLon {
        LatLon::new(lat, lon).unwrap()
    }

    /// Spherical law of cosines, used as an independent route.
    fn cosine_law_km(a: LatLon, b: LatLon) -> f64 {
        let (p1, p2) = (a.lat.to_radians(), b.lat.to_radians());
        let dl = (b.lon - a.lon).to_radians();
        let c = p1.sin() * p2.sin() + p1.cos() * p2.cos() * dl.cos();
        EARTH_RADIUS_KM * c.clamp(-1.0, 1.0).acos()
    }

    #[test]
    fn identity_is_zero() {
        assert_eq!(haversine_km(p(48.0, 2.0), p(48.0, 2.0)).unwrap(), 0.0);
    }

    #[test]
    fn antipodal_on_equator() {
        let d = haversine_km(p(0.0, 0.0), p(0.0, 180.0)).unwrap();
        assert!((d - EARTH_RADIUS_KM * std::f64::consts::PI).abs() < 1e-9);
        assert!((d - 20015.09).abs() < 0.01);
    }

    #[test]
    fn small_meridian_step() {
        let d = haversine_km(p(48.0, 2.0), p(48.009, 2.0)).unwrap();
        let expected = 0.009f64.to_radians() * EARTH_RADIUS_KM;
        assert!((d - expected).abs() < 1e-9, "{d} vs {expected}");
        assert!((d - cosine_law_km(p(48.0, 2.0), p(48.009, 2.0))).abs() < 1e-6);
        assert!((d - 1.0008).abs() < 1e-3);
    }

    #[test]
    fn out_of_range_names_field() {
        let err = haversine_km(LatLon { lat: 91.0, lon: 0.0 }, p(0.0, 0.0)).unwrap_err();
        assert!(err.to_string().contains("lat"), "{err}");
        let err = haversine_km(p(0.0, 0.0), LatLon { lat: 0.0, lon: -181.0 }).unwrap_err();
        assert!(err.to_string().contains("lon"), "{err}");
    }

    fn coord() -> impl Strategy<Value = LatLon> {
        (-90.0f64..=90.0, -180.0f64..=180.0).prop_map(|(lat, lon)| LatLon { lat, lon })
    }

    proptest! {
        #[test]
        fn symmetric(a in coord(), b in coord()) {
            prop_assert_eq!(haversine_km(a, b).unwrap(), haversine_km(b, a).unwrap());
        }

        #[test]
        fn triangle_inequality(a in coord(), b in coord(), c in coord()) {
            let ab = haversine_km(a, b).unwrap();
            let bc = haversine_km(b, c).unwrap();
            let ac = haversine_km(a, c).unwrap();
            prop_assert!(ac <= ab + bc + 1e-9);
        }

        #[test]
        fn agrees_with_cosine_law(a in coord(), b in coord()) {
            let d = haversine_km(a, b).unwrap();
            // the cosine law loses precision for tiny separations, so compare loosely
            prop_assert!((d - cosine_law_km(a, b)).abs() < 1e-3);
        }
    }
}
