use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};

use super::{aggregate, roll_up, DateSpan, EventRecord, GeoHierarchy, Interval, Level};

/// Fraction of exact zeros in a series.
pub fn sparsity(series: &[f64]) -> Result<f64> {
    if series.is_empty() {
        return Err(Error::invalid("sparsity of an empty series"));
    }
    let zeros = series.iter().filter(|v| **v == 0.0).count();
    Ok(zeros as f64 / series.len() as f64)
}

/// One cell of the sparsity table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SparsityCell {
    pub groupings: usize,
    pub sparsity: f64,
}

/// Level x interval sparsity table. Each cell pools every grouping x step
/// cell at that level (the proportion of zeros over the whole matrix).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SparsityTable {
    pub intervals: Vec<Interval>,
    pub cells: BTreeMap<Level, BTreeMap<Interval, SparsityCell>>,
}

impl SparsityTable {
    pub fn get(&self, level: Level, interval: Interval) -> Option<f64> {
        self.cells.get(&level)?.get(&interval).map(|c| c.sparsity)
    }

    /// Delimited table: rows are levels (coarsest first), columns intervals.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("grouping,groupings");
        for i in &self.intervals {
            write!(out, ",{}", i.name()).unwrap();
        }
        out.push('\n');
        for level in [Level::State, Level::District, Level::County] {
            let Some(row) = self.cells.get(&level) else { continue };
            let groupings = row.values().next().map_or(0, |c| c.groupings);
            write!(out, "{},{}", level.name(), groupings).unwrap();
            for i in &self.intervals {
                write!(out, ",{:.4}", row[i].sparsity).unwrap();
            }
            out.push('\n');
        }
        out
    }
}

/// Aggregate at every requested interval, roll up, and pool zero
/// proportions per level.
pub fn sparsity_report(
    events: &[EventRecord],
    hierarchy: &GeoHierarchy,
    span: DateSpan,
    intervals: &[Interval],
) -> Result<SparsityTable> {
    let mut cells: BTreeMap<Level, BTreeMap<Interval, SparsityCell>> = BTreeMap::new();
    for &interval in intervals {
        let panel = roll_up(&aggregate(events, hierarchy, interval, span)?, hierarchy)?;
        for level in Level::ALL {
            let mut zeros = 0usize;
            let mut total = 0usize;
            let mut groupings = 0usize;
            for region in panel.regions_at(level) {
                let values = panel.series(region)?;
                zeros += values.iter().filter(|v| **v == 0.0).count();
                total += values.len();
                groupings += 1;
            }
            if groupings == 0 {
                continue;
            }
            cells.entry(level).or_default().insert(
                interval,
                SparsityCell { groupings, sparsity: zeros as f64 / total as f64 },
            );
        }
    }
    Ok(SparsityTable { intervals: intervals.to_vec(), cells })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::panel::RegionId;
    use chrono::NaiveDate;

    #[test]
    fn direct_counts() {
        assert_eq!(sparsity(&[0.0, 0.0, 1.0, 0.0]).unwrap(), 0.75);
        assert_eq!(sparsity(&[5.0, 3.0, 2.0]).unwrap(), 0.0);
        assert!(sparsity(&[]).is_err());
    }

    #[test]
    fn single_event_in_four_years() {
        let h = GeoHierarchy::from_pairs([("only", "D")], "S").unwrap();
        let span = DateSpan::new(
            NaiveDate::from_ymd_opt(2018, 1, 1).unwrap(),
            NaiveDate::from_ymd_opt(2021, 12, 31).unwrap(),
        )
        .unwrap();
        let event = EventRecord::new(NaiveDate::from_ymd_opt(2019, 7, 4).unwrap(), RegionId::county("only").unwrap(), 1)
            .unwrap();
        let table = sparsity_report(&[event], &h, span, &[Interval::Yearly, Interval::Monthly]).unwrap();
        assert_eq!(table.get(Level::County, Interval::Yearly), Some(0.75));
        assert_eq!(table.get(Level::County, Interval::Monthly), Some(47.0 / 48.0));
        let csv = table.to_csv();
        assert!(csv.starts_with("grouping,groupings,Yearly,Monthly\nState,1,0.7500,0.9792\n"), "{csv}");
    }
}
