use crate::domain::Date;
use crate::ingestion::{Era5Table, ERA5_VARIABLES};

pub const MAX_LOOKBACK: usize = 20;

/// Column names `{var}_lag{l}`, lag-major, for lags `0..=lookback`.
pub fn era5_columns(lookback: usize) -> Vec<String> {
    (0..=lookback)
        .flat_map(|lag| ERA5_VARIABLES.iter().map(move |v| format!("{v}_lag{lag}")))
        .collect()
}

/// Values at `target - lag` for every variable and lag `0..=lookback`, in
/// [`era5_columns`] order. A day without a record contributes 13 missing entries.
pub fn era5_lag_stack(era5: &Era5Table, station_id: &str, target: Date, lookback: usize) -> Vec<Option<f64>> {
    let mut out = Vec::with_capacity(ERA5_VARIABLES.len() * (lookback + 1));
    for lag in 0..=lookback {
        match era5.get(station_id, target.add_days(-(lag as i32))) {
            Some(values) => out.extend(values.iter().map(|&v| Some(v))),
            None => out.extend(std::iter::repeat(None).take(ERA5_VARIABLES.len())),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingestion::{Era5Record, N_ERA5_VARIABLES};

    fn table(days: impl Iterator<Item = i32>) -> Era5Table {
        let mut t = Era5Table::new();
        for d in days {
            let mut v = [300.0; N_ERA5_VARIABLES];
            v[0] = d as f64;
            v[5] = 0.3;
            t.insert(Era5Record::new("A", Date::from_epoch_day(d), v).unwrap());
        }
        t
    }

    #[test]
    fn lag_zero_is_todays_values() {
        let t = table(90..=100);
        let v = era5_lag_stack(&t, "A", Date::from_epoch_day(100), 0);
        assert_eq!(v.len(), 13);
        assert_eq!(v[0], Some(100.0));
        assert_eq!(era5_columns(0)[0], "precip_total_lag0");
    }

    #[test]
    fn lag_ten_has_143_columns() {
        let t = table(80..=100);
        let v = era5_lag_stack(&t, "A", Date::from_epoch_day(100), 10);
        assert_eq!(v.len(), 143);
        assert_eq!(era5_columns(10).len(), 143);
        assert_eq!(v[13 * 4], Some(96.0));
        assert_eq!(era5_columns(10)[13 * 4 + 12], "wind_v10_lag4");
    }

    #[test]
    fn gap_marks_thirteen_missing() {
        let t = table((70..=100).filter(|&d| d != 93));
        let v = era5_lag_stack(&t, "A", Date::from_epoch_day(100), 20);
        assert_eq!(v.len(), 273);
        assert_eq!(v.iter().filter(|x| x.is_none()).count(), 13);
        assert!(v[13 * 7..13 * 8].iter().all(Option::is_none));
    }

    #[test]
    fn prefix_consistency() {
        let t = table(60..=100);
        for l in 0..MAX_LOOKBACK {
            let a = era5_lag_stack(&t, "A", Date::from_epoch_day(100), l);
            let b = era5_lag_stack(&t, "A", Date::from_epoch_day(100), l + 1);
            assert_eq!(a[..], b[..a.len()]);
            assert_eq!(era5_columns(l)[..], era5_columns(l + 1)[..a.len()]);
        }
    }
}
