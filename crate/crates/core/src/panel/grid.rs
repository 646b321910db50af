use chrono::{Datelike, Duration, NaiveDate, Weekday};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Temporal bucketing interval. Months, quarters and years follow the civil
/// calendar; weeks are ISO weeks (Monday start).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Interval {
    Weekly,
    Monthly,
    Quarterly,
    Yearly,
}

impl Interval {
    pub const ALL: [Interval; 4] =
        [Interval::Yearly, Interval::Quarterly, Interval::Monthly, Interval::Weekly];

    pub fn name(self) -> &'static str {
        match self {
            Interval::Weekly => "Weekly",
            Interval::Monthly => "Monthly",
            Interval::Quarterly => "Quarterly",
            Interval::Yearly => "Yearly",
        }
    }

    /// Index of the period containing `date`, on an absolute scale.
    fn absolute_index(self, date: NaiveDate) -> i64 {
        let y = date.year() as i64;
        let m0 = date.month0() as i64;
        match self {
            Interval::Yearly => y,
            Interval::Quarterly => y * 4 + m0 / 3,
            Interval::Monthly => y * 12 + m0,
            Interval::Weekly => {
                let monday = date - Duration::days(date.weekday().num_days_from_monday() as i64);
                monday.num_days_from_ce() as i64 / 7
            }
        }
    }

    /// First calendar day of the period with the given absolute index.
    fn period_start(self, index: i64) -> NaiveDate {
        match self {
            Interval::Yearly => NaiveDate::from_ymd_opt(index as i32, 1, 1),
            Interval::Quarterly => {
                NaiveDate::from_ymd_opt(index.div_euclid(4) as i32, (index.rem_euclid(4) * 3 + 1) as u32, 1)
            }
            Interval::Monthly => {
                NaiveDate::from_ymd_opt(index.div_euclid(12) as i32, (index.rem_euclid(12) + 1) as u32, 1)
            }
            // Day 1 of the common era (0001-01-01) is a Monday.
            Interval::Weekly => NaiveDate::from_num_days_from_ce_opt((index * 7 + 1) as i32)
                .filter(|d| d.weekday() == Weekday::Mon),
        }
        .expect("period index within calendar range")
    }
}

/// Regular time axis shared by every series in a panel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TimeGrid {
    interval: Interval,
    start: NaiveDate,
    len: usize,
}

impl TimeGrid {
    /// `start` is snapped to the first day of its period.
    pub fn new(interval: Interval, start: NaiveDate, len: usize) -> Result<Self> {
        if len == 0 {
            return Err(Error::invalid("time grid must have at least one step"));
        }
        let start = interval.period_start(interval.absolute_index(start));
        Ok(Self { interval, start, len })
    }

    /// Smallest grid of `interval` covering the inclusive date range.
    pub fn covering(interval: Interval, first: NaiveDate, last: NaiveDate) -> Result<Self> {
        if last < first {
            return Err(Error::invalid(format!("empty date range {first}..{last}")));
        }
        let len = interval.absolute_index(last) - interval.absolute_index(first) + 1;
        Self::new(interval, first, len as usize)
    }

    pub fn interval(&self) -> Interval {
        self.interval
    }

    pub fn start(&self) -> NaiveDate {
        self.start
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Step containing `date`, or `None` when the date is off the grid.
    pub fn step_of(&self, date: NaiveDate) -> Option<usize> {
        let offset =
            self.interval.absolute_index(date) - self.interval.absolute_index(self.start);
        (0..self.len as i64).contains(&offset).then_some(offset as usize)
    }

    /// Signed step offset of `date` relative to the grid start (may lie off-grid).
    pub fn offset_of(&self, date: NaiveDate) -> i64 {
        self.interval.absolute_index(date) - self.interval.absolute_index(self.start)
    }

    /// First calendar day of step `t`.
    pub fn date_of(&self, t: usize) -> NaiveDate {
        self.interval.period_start(self.interval.absolute_index(self.start) + t as i64)
    }

    /// Last calendar day covered by the grid.
    pub fn end_date(&self) -> NaiveDate {
        self.interval.period_start(self.interval.absolute_index(self.start) + self.len as i64)
            - Duration::days(1)
    }

    /// Calendar month (1..=12) of step `t`.
    pub fn month_of(&self, t: usize) -> u32 {
        self.date_of(t).month()
    }

    pub fn with_len(&self, len: usize) -> Result<Self> {
        Self::new(self.interval, self.start, len)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(y: i32, m: u32, day: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(y, m, day).unwrap()
    }

    #[test]
    fn monthly_steps() {
        let g = TimeGrid::new(Interval::Monthly, d(2018, 1, 15), 48).unwrap();
        assert_eq!(g.start(), d(2018, 1, 1));
        assert_eq!(g.step_of(d(2018, 1, 31)), Some(0));
        assert_eq!(g.step_of(d(2019, 3, 1)), Some(14));
        assert_eq!(g.step_of(d(2022, 1, 1)), None);
        assert_eq!(g.date_of(14), d(2019, 3, 1));
        assert_eq!(g.end_date(), d(2021, 12, 31));
    }

    #[test]
    fn iso_weeks_start_monday() {
        // 2018-01-01 is a Monday; 2017-12-31 belongs to the previous ISO week.
        let g = TimeGrid::covering(Interval::Weekly, d(2018, 1, 1), d(2018, 12, 31)).unwrap();
        assert_eq!(g.start(), d(2018, 1, 1));
        assert_eq!(g.len(), 53);
        assert_eq!(g.step_of(d(2018, 1, 7)), Some(0));
        assert_eq!(g.step_of(d(2018, 1, 8)), Some(1));
        assert_eq!(g.step_of(d(2017, 12, 31)), None);
        let g2 = TimeGrid::new(Interval::Weekly, d(2020, 1, 1), 2).unwrap();
        assert_eq!(g2.start(), d(2019, 12, 30));
    }

    #[test]
    fn quarterly_and_yearly() {
        let q = TimeGrid::covering(Interval::Quarterly, d(2018, 2, 1), d(2019, 11, 30)).unwrap();
        assert_eq!(q.len(), 8);
        assert_eq!(q.step_of(d(2018, 4, 1)), Some(1));
        let y = TimeGrid::covering(Interval::Yearly, d(2018, 2, 1), d(2021, 11, 30)).unwrap();
        assert_eq!(y.len(), 4);
    }

    #[test]
    fn zero_length_rejected() {
        assert!(TimeGrid::new(Interval::Monthly, d(2018, 1, 1), 0).is_err());
    }

    #[test]
    fn grids_equal_only_when_all_fields_match() {
        let a = TimeGrid::new(Interval::Monthly, d(2018, 1, 1), 12).unwrap();
        assert_ne!(a, TimeGrid::new(Interval::Monthly, d(2018, 1, 1), 13).unwrap());
        assert_ne!(a, TimeGrid::new(Interval::Quarterly, d(2018, 1, 1), 12).unwrap());
        assert_eq!(a, TimeGrid::new(Interval::Monthly, d(2018, 1, 20), 12).unwrap());
    }
}
