//! Shared primitives: geodesy, calendar days, RNG streams and the station tables.

mod date;
mod geo;
mod rng;
mod station;

pub use date::{epoch_day, Date};
pub use geo::{haversine_km, LatLon, EARTH_RADIUS_KM};
pub(crate) use geo::haversine_unchecked;
pub use rng::RngStream;
pub use station::{LandCover, Measurement, MeasurementTable, Station, StationTable};
