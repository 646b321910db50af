use std::fmt;
use std::io::Read;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::{GeoHierarchy, Interval, Level, RegionId, SeriesPanel, TimeGrid};

/// One timestamped event assigned to a county.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventRecord {
    pub date: NaiveDate,
    pub region: RegionId,
    pub weight: u32,
}

impl EventRecord {
    pub fn new(date: NaiveDate, region: RegionId, weight: u32) -> Result<Self> {
        if weight == 0 {
            return Err(Error::invalid("event weight must be at least 1"));
        }
        if region.level() != Level::County {
            return Err(Error::invalid(format!("event region {region} is not a county")));
        }
        Ok(Self { date, region, weight })
    }
}

impl fmt::Display for EventRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, weight {})", self.date, self.region.code(), self.weight)
    }
}

/// Inclusive calendar date range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DateSpan {
    pub first: NaiveDate,
    pub last: NaiveDate,
}

impl DateSpan {
    pub fn new(first: NaiveDate, last: NaiveDate) -> Result<Self> {
        if last < first {
            return Err(Error::invalid(format!("date span {first}..{last} is empty")));
        }
        Ok(Self { first, last })
    }

    /// Tightest span covering every event, if any.
    pub fn of_events(events: &[EventRecord]) -> Option<Self> {
        let first = events.iter().map(|e| e.date).min()?;
        let last = events.iter().map(|e| e.date).max()?;
        Some(Self { first, last })
    }

    pub fn contains(&self, date: NaiveDate) -> bool {
        (self.first..=self.last).contains(&date)
    }
}

/// Parse `date,region[,weight]` rows. Row order is preserved; errors carry
/// the 1-based line number of the offending row.
pub fn ingest_events<R: Read>(source: R) -> Result<Vec<EventRecord>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(source);
    let headers = rdr.headers()?.clone();
    let find = |name: &str| headers.iter().position(|h| h.eq_ignore_ascii_case(name));
    let date_col = find("date").ok_or_else(|| Error::Parse { line: 1, message: "missing `date` column".into() })?;
    let region_col =
        find("region").ok_or_else(|| Error::Parse { line: 1, message: "missing `region` column".into() })?;
    let weight_col = find("weight");

    let mut events = Vec::new();
    for row in rdr.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line());
        let raw_date = row.get(date_col).unwrap_or("");
        let date = NaiveDate::parse_from_str(raw_date, "%Y-%m-%d")
            .map_err(|e| Error::Parse { line, message: format!("malformed date `{raw_date}`: {e}") })?;
        let code = row.get(region_col).unwrap_or("");
        if code.is_empty() {
            return Err(Error::Parse { line, message: "empty region".into() });
        }
        let weight = match weight_col.and_then(|c| row.get(c)).filter(|w| !w.is_empty()) {
            None => 1,
            Some(w) => w
                .parse::<u32>()
                .ok()
                .filter(|w| *w >= 1)
                .ok_or_else(|| Error::Parse { line, message: format!("invalid weight `{w}`") })?,
        };
        let region = RegionId::county(code).map_err(|e| Error::Parse { line, message: e.to_string() })?;
        events.push(EventRecord { date, region, weight });
    }
    Ok(events)
}

pub fn write_events<W: std::io::Write>(events: &[EventRecord], writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(["date", "region", "weight"])?;
    for e in events {
        wtr.write_record([e.date.to_string(), e.region.code().to_string(), e.weight.to_string()])?;
    }
    wtr.flush().map_err(|e| Error::io("<events>", e))?;
    Ok(())
}

/// Bucket events into a county-level panel on the grid of `interval`
/// covering `span`. Counties without events get all-zero series.
pub fn aggregate(
    events: &[EventRecord],
    hierarchy: &GeoHierarchy,
    interval: Interval,
    span: DateSpan,
) -> Result<SeriesPanel> {
    let grid = TimeGrid::covering(interval, span.first, span.last)?;
    aggregate_on(events, hierarchy, grid)
}

/// Bucket events onto an explicit grid; every event must fall on it.
pub fn aggregate_on(events: &[EventRecord], hierarchy: &GeoHierarchy, grid: TimeGrid) -> Result<SeriesPanel> {
    let mut counts: std::collections::BTreeMap<&RegionId, Vec<f64>> =
        hierarchy.counties().map(|c| (c, vec![0.0; grid.len()])).collect();
    for event in events {
        let series = counts
            .get_mut(&event.region)
            .ok_or_else(|| Error::UnknownRegion(event.region.to_string()))?;
        let step = grid.step_of(event.date).ok_or_else(|| Error::OutsideSpan { record: event.to_string() })?;
        series[step] += event.weight as f64;
    }
    let mut panel = SeriesPanel::new(grid);
    for (county, values) in counts {
        panel.insert(county.clone(), values)?;
    }
    Ok(panel)
}

/// Add district and state series as elementwise sums of county series.
pub fn roll_up(panel: &SeriesPanel, hierarchy: &GeoHierarchy) -> Result<SeriesPanel> {
    if panel.is_normalized() {
        return Err(Error::invalid("roll_up expects raw counts, not a normalized panel"));
    }
    for region in panel.regions() {
        if region.level() != Level::County {
            return Err(Error::invalid(format!("roll_up expects a county panel, found {region}")));
        }
        if !hierarchy.contains_county(region) {
            return Err(Error::UnknownRegion(region.to_string()));
        }
    }
    let steps = panel.grid().len();
    let sum_of = |members: &[RegionId]| -> Result<(Vec<f64>, Vec<bool>)> {
        let mut total = vec![0.0; steps];
        let mut mask = vec![true; steps];
        for county in members {
            let values = panel.series(county)?;
            let m = panel.mask(county).unwrap_or(&[]);
            for t in 0..steps {
                total[t] += values[t];
                mask[t] &= m.get(t).copied().unwrap_or(true);
            }
        }
        Ok((total, mask))
    };

    let mut out = panel.clone();
    for district in hierarchy.districts() {
        let (values, mask) = sum_of(hierarchy.members(district)?)?;
        out.insert_masked(district.clone(), values, mask)?;
    }
    let all: Vec<RegionId> = hierarchy.counties().cloned().collect();
    let (values, mask) = sum_of(&all)?;
    out.insert_masked(hierarchy.state().clone(), values, mask)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(y: i32, m: u32, day: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(y, m, day).unwrap()
    }

    fn hierarchy() -> GeoHierarchy {
        GeoHierarchy::from_pairs([("A", "D1"), ("B", "D1"), ("C", "D2")], "S").unwrap()
    }

    #[test]
    fn single_row() {
        let events = ingest_events("date,region\n2018-01-05,021".as_bytes()).unwrap();
        assert_eq!(events, vec![EventRecord::new(d(2018, 1, 5), RegionId::county("021").unwrap(), 1).unwrap()]);
    }

    #[test]
    fn empty_region_reports_line() {
        let err = ingest_events("date,region\n2018-01-05,\n".as_bytes()).unwrap_err();
        match err {
            Error::Parse { line, message } => {
                assert_eq!(line, 2);
                assert!(message.contains("empty region"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn malformed_date_reports_line() {
        let err = ingest_events("date,region\n2018-01-05,1\n2018-13-01,2\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
    }

    #[test]
    fn header_only_is_empty() {
        assert!(ingest_events("date,region,weight\n".as_bytes()).unwrap().is_empty());
    }

    #[test]
    fn weight_column() {
        let events = ingest_events("date,region,weight\n2018-01-05,1,3\n2018-01-06,1,\n".as_bytes()).unwrap();
        assert_eq!(events[0].weight, 3);
        assert_eq!(events[1].weight, 1);
        assert!(ingest_events("date,region,weight\n2018-01-05,1,0\n".as_bytes()).is_err());
    }

    #[test]
    fn direct_count_and_zero_fill() {
        let a = RegionId::county("A").unwrap();
        let events: Vec<_> = [5, 9, 30]
            .iter()
            .map(|day| EventRecord::new(d(2018, 1, *day), a.clone(), 1).unwrap())
            .collect();
        let span = DateSpan::new(d(2018, 1, 1), d(2018, 6, 30)).unwrap();
        let p = aggregate(&events, &hierarchy(), Interval::Monthly, span).unwrap();
        assert_eq!(p.get(&a).unwrap()[0], 3.0);
        assert_eq!(p.get(&RegionId::county("B").unwrap()).unwrap(), &[0.0; 6]);
    }

    #[test]
    fn outside_span_and_unknown_county() {
        let span = DateSpan::new(d(2018, 1, 1), d(2018, 6, 30)).unwrap();
        let late = EventRecord::new(d(2019, 1, 1), RegionId::county("A").unwrap(), 1).unwrap();
        let err = aggregate(&[late], &hierarchy(), Interval::Monthly, span).unwrap_err();
        assert!(err.to_string().contains("2019-01-01"), "{err}");
        let stray = EventRecord::new(d(2018, 1, 1), RegionId::county("Z").unwrap(), 1).unwrap();
        assert!(matches!(
            aggregate(&[stray], &hierarchy(), Interval::Monthly, span),
            Err(Error::UnknownRegion(_))
        ));
    }

    #[test]
    fn district_is_sum_of_members() {
        let h = GeoHierarchy::from_pairs([("1", "D"), ("2", "D")], "S").unwrap();
        let grid = TimeGrid::new(Interval::Monthly, d(2018, 1, 1), 2).unwrap();
        let mut p = SeriesPanel::new(grid);
        p.insert(RegionId::county("1").unwrap(), vec![1.0, 2.0]).unwrap();
        p.insert(RegionId::county("2").unwrap(), vec![3.0, 0.0]).unwrap();
        let r = roll_up(&p, &h).unwrap();
        assert_eq!(r.get(&RegionId::district("D").unwrap()).unwrap(), &[4.0, 2.0]);
        // single district covering everything: state equals district
        assert_eq!(r.get(&RegionId::state("S").unwrap()).unwrap(), &[4.0, 2.0]);
        assert_eq!(r.len(), 4);
    }

    #[test]
    fn roll_up_rejects_foreign_county() {
        let grid = TimeGrid::new(Interval::Monthly, d(2018, 1, 1), 2).unwrap();
        let mut p = SeriesPanel::new(grid);
        p.insert(RegionId::county("Q").unwrap(), vec![1.0, 2.0]).unwrap();
        assert!(roll_up(&p, &hierarchy()).is_err());
    }
}
