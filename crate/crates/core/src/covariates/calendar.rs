use std::collections::BTreeMap;
use std::f64::consts::TAU;

use crate::panel::{Interval, TimeGrid};

pub const SEASONS: [&str; 4] = ["season_djf", "season_mam", "season_jja", "season_son"];

/// Calendar channels shared by every region: cyclical month encoding
/// (monthly grids only) and one-hot meteorological seasons.
pub fn calendar_covariates(grid: &TimeGrid) -> BTreeMap<String, Vec<f64>> {
    let n = grid.len();
    let months: Vec<u32> = (0..n).map(|t| grid.month_of(t)).collect();
    let mut out = BTreeMap::new();
    if grid.interval() == Interval::Monthly {
        out.insert("month_sin".into(), months.iter().map(|m| (TAU * *m as f64 / 12.0).sin()).collect());
        out.insert("month_cos".into(), months.iter().map(|m| (TAU * *m as f64 / 12.0).cos()).collect());
    }
    for (s, name) in SEASONS.iter().enumerate() {
        let values = months.iter().map(|m| if season_index(*m) == s { 1.0 } else { 0.0 }).collect();
        out.insert((*name).to_string(), values);
    }
    out
}

/// 0 = DJF, 1 = MAM, 2 = JJA, 3 = SON.
fn season_index(month: u32) -> usize {
    ((month % 12) / 3) as usize
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::NaiveDate;

    fn grid(interval: Interval) -> TimeGrid {
        TimeGrid::new(interval, NaiveDate::from_ymd_opt(2018, 1, 1).unwrap(), 30).unwrap()
    }

    #[test]
    fn january_encoding() {
        let c = calendar_covariates(&grid(Interval::Monthly));
        assert_eq!(c["month_sin"][0], (TAU / 12.0).sin());
        assert_eq!(c["month_cos"][0], (TAU / 12.0).cos());
        assert_eq!(c["season_djf"][0], 1.0);
        assert_eq!(c["season_mam"][0] + c["season_jja"][0] + c["season_son"][0], 0.0);
        // March opens spring, December closes autumn's successor.
        assert_eq!(c["season_mam"][2], 1.0);
        assert_eq!(c["season_djf"][11], 1.0);
    }

    #[test]
    fn identities_hold_every_step() {
        let c = calendar_covariates(&grid(Interval::Monthly));
        for t in 0..30 {
            let r = c["month_sin"][t].powi(2) + c["month_cos"][t].powi(2);
            assert!((r - 1.0).abs() < 1e-15);
            let s: f64 = SEASONS.iter().map(|n| c[*n][t]).sum();
            assert_eq!(s, 1.0);
        }
    }

    #[test]
    fn non_monthly_grids_keep_only_seasons() {
        let c = calendar_covariates(&grid(Interval::Quarterly));
        assert!(!c.contains_key("month_sin"));
        assert_eq!(c.len(), 4);
        assert_eq!(calendar_covariates(&grid(Interval::Quarterly)), c);
    }
}
