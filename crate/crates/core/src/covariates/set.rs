use std::collections::BTreeMap;
use std::io::Read;

use crate::error::{Error, Result};
use crate::panel::{GeoHierarchy, Level, RegionId, TimeGrid};

use super::{calendar_covariates, missing_flag, Channel, TrendChannel, MISSING_FLAG_SUFFIX};

/// Static attribute table keyed by (region, name).
pub type StaticTable = BTreeMap<(RegionId, String), f64>;

/// Named covariate channels per region on one grid.
///
/// `shared` holds channels identical for every region (calendar encodings);
/// `dynamic` holds per-region channels with origin masks; `statics` holds
/// time-invariant attributes.
#[derive(Debug, Clone, PartialEq)]
pub struct CovariateSet {
    grid: TimeGrid,
    shared: BTreeMap<String, Vec<f64>>,
    dynamic: BTreeMap<RegionId, BTreeMap<String, Channel>>,
    statics: BTreeMap<RegionId, BTreeMap<String, f64>>,
}

impl CovariateSet {
    pub fn new(grid: TimeGrid) -> Self {
        Self { grid, shared: BTreeMap::new(), dynamic: BTreeMap::new(), statics: BTreeMap::new() }
    }

    /// Empty set carrying only the calendar channels of `grid`.
    pub fn with_calendar(grid: TimeGrid) -> Self {
        let mut set = Self::new(grid);
        set.shared = calendar_covariates(&grid);
        set
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn shared(&self) -> &BTreeMap<String, Vec<f64>> {
        &self.shared
    }

    pub fn dynamic(&self, region: &RegionId) -> Option<&BTreeMap<String, Channel>> {
        self.dynamic.get(region)
    }

    pub fn channel(&self, region: &RegionId, name: &str) -> Option<&Channel> {
        self.dynamic.get(region)?.get(name)
    }

    pub fn static_value(&self, region: &RegionId, name: &str) -> Option<f64> {
        self.statics.get(region)?.get(name).copied()
    }

    pub fn statics(&self, region: &RegionId) -> Option<&BTreeMap<String, f64>> {
        self.statics.get(region)
    }

    pub fn regions(&self) -> impl Iterator<Item = &RegionId> {
        self.dynamic.keys()
    }

    /// Names of per-region dynamic channels (union over regions, sorted).
    pub fn dynamic_names(&self) -> Vec<String> {
        let mut names: Vec<String> = self.dynamic.values().flat_map(|m| m.keys().cloned()).collect();
        names.sort();
        names.dedup();
        names
    }

    pub fn static_names(&self) -> Vec<String> {
        let mut names: Vec<String> = self.statics.values().flat_map(|m| m.keys().cloned()).collect();
        names.sort();
        names.dedup();
        names
    }

    pub fn insert_shared(&mut self, name: impl Into<String>, values: Vec<f64>) -> Result<()> {
        let name = name.into();
        self.check_len(&name, values.len())?;
        if self.shared.contains_key(&name) {
            return Err(Error::channel(name, "duplicate shared channel"));
        }
        self.shared.insert(name, values);
        Ok(())
    }

    pub fn insert_channel(&mut self, region: RegionId, channel: Channel) -> Result<()> {
        self.check_len(channel.name(), channel.len())?;
        let slot = self.dynamic.entry(region.clone()).or_default();
        if slot.contains_key(channel.name()) {
            return Err(Error::channel(channel.name(), format!("duplicate channel for {region}")));
        }
        slot.insert(channel.name().to_string(), channel);
        Ok(())
    }

    /// Replace an existing channel (e.g. after gap filling). The origin mask
    /// must be unchanged.
    pub fn replace_channel(&mut self, region: &RegionId, channel: Channel) -> Result<()> {
        let slot = self
            .dynamic
            .get_mut(region)
            .and_then(|m| m.get_mut(channel.name()))
            .ok_or_else(|| Error::channel(channel.name(), format!("no such channel for {region}")))?;
        if slot.origin() != channel.origin() {
            return Err(Error::channel(channel.name(), "replacement changes the origin mask"));
        }
        *slot = channel;
        Ok(())
    }

    /// Add a fully observed derived channel for every region it covers.
    pub fn insert_trend(&mut self, trend: &TrendChannel) -> Result<()> {
        for (region, values) in &trend.values {
            self.insert_channel(region.clone(), Channel::observed(&trend.name, values.clone()))?;
        }
        Ok(())
    }

    /// Add a `__was_missing` companion for every dynamic channel that lacks one.
    pub fn add_missing_flags(&mut self) -> Result<()> {
        for channels in self.dynamic.values_mut() {
            let flags: Vec<Channel> = channels
                .values()
                .filter(|c| !c.name().ends_with(MISSING_FLAG_SUFFIX))
                .map(missing_flag)
                .filter(|f| !channels.contains_key(f.name()))
                .collect();
            for f in flags {
                channels.insert(f.name().to_string(), f);
            }
        }
        Ok(())
    }

    /// Every (region, channel) pair, mutable, for in-place filling.
    pub fn channels_mut(&mut self) -> impl Iterator<Item = (&RegionId, &mut Channel)> {
        self.dynamic.iter_mut().flat_map(|(r, m)| m.values_mut().map(move |c| (r, c)))
    }

    pub fn channels(&self) -> impl Iterator<Item = (&RegionId, &Channel)> {
        self.dynamic.iter().flat_map(|(r, m)| m.values().map(move |c| (r, c)))
    }

    fn check_len(&self, name: &str, len: usize) -> Result<()> {
        if len != self.grid.len() {
            return Err(Error::channel(name, format!("length {len} does not match grid length {}", self.grid.len())));
        }
        Ok(())
    }

    /// Restrict every channel to the first `len` steps.
    pub fn truncated(&self, len: usize) -> Result<CovariateSet> {
        let mut out = self.clone();
        out.grid = self.grid.with_len(len)?;
        out.shared.values_mut().for_each(|v| v.truncate(len));
        for channels in out.dynamic.values_mut() {
            for c in channels.values_mut() {
                *c = Channel::from_options(c.name(), c.values()[..len].to_vec());
            }
        }
        Ok(out)
    }
}

/// Merge static attributes. Districts and the state receive the unweighted
/// mean of their member counties unless the table provides them directly.
pub fn attach_static(set: &CovariateSet, table: &StaticTable, hierarchy: &GeoHierarchy) -> Result<CovariateSet> {
    let mut out = set.clone();
    for ((region, name), value) in table {
        if region.level() == Level::County && !hierarchy.contains_county(region) {
            return Err(Error::UnknownRegion(region.to_string()));
        }
        let slot = out.statics.entry(region.clone()).or_default();
        if slot.contains_key(name) {
            return Err(Error::invalid(format!("duplicate static `{name}` for {region}")));
        }
        slot.insert(name.clone(), *value);
    }
    let names: Vec<String> = table.keys().map(|(_, n)| n.clone()).collect::<std::collections::BTreeSet<_>>().into_iter().collect();
    let mut upper: Vec<RegionId> = hierarchy.districts().cloned().collect();
    upper.push(hierarchy.state().clone());
    for region in upper {
        let leaves = hierarchy.leaf_counties(&region)?;
        for name in &names {
            if out.statics.get(&region).is_some_and(|m| m.contains_key(name)) {
                continue;
            }
            let values: Vec<f64> = leaves.iter().filter_map(|c| out.static_value(c, name)).collect();
            if values.is_empty() {
                continue;
            }
            let mean = values.iter().sum::<f64>() / values.len() as f64;
            out.statics.entry(region.clone()).or_default().insert(name.clone(), mean);
        }
    }
    Ok(out)
}

/// Parse a `region,name,value` static file.
pub fn read_static_table<R: Read>(source: R) -> Result<StaticTable> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(source);
    let mut table = StaticTable::new();
    for row in rdr.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line());
        let parse_err = |message: String| Error::Parse { line, message };
        if row.len() < 3 {
            return Err(parse_err("expected `region,name,value`".into()));
        }
        let region = RegionId::parse(&row[0]).map_err(|e| parse_err(e.to_string()))?;
        let name = row[1].to_string();
        let value: f64 = row[2].parse().map_err(|_| parse_err(format!("invalid value `{}`", &row[2])))?;
        if table.insert((region.clone(), name.clone()), value).is_some() {
            return Err(parse_err(format!("duplicate static `{name}` for {region}")));
        }
    }
    Ok(table)
}

pub fn write_static_table<W: std::io::Write>(table: &StaticTable, writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(["region", "name", "value"])?;
    for ((region, name), value) in table {
        wtr.write_record([region.file_code(), name.clone(), value.to_string()])?;
    }
    wtr.flush().map_err(|e| Error::io("<static>", e))?;
    Ok(())
}

/// Place `region,date,value` rows on `grid`. Blank values and steps that
/// no row covers are missing; the origin mask is false exactly there.
pub fn ingest_dynamic_channel<R: Read>(source: R, name: &str, grid: &TimeGrid) -> Result<BTreeMap<RegionId, Channel>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).flexible(true).from_reader(source);
    let mut cells: BTreeMap<RegionId, Vec<Option<f64>>> = BTreeMap::new();
    let mut seen: std::collections::BTreeSet<(RegionId, usize)> = Default::default();
    for row in rdr.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line());
        let parse_err = |message: String| Error::Parse { line, message };
        let region = RegionId::parse(row.get(0).unwrap_or("")).map_err(|e| parse_err(e.to_string()))?;
        let raw_date = row.get(1).unwrap_or("");
        let date = chrono::NaiveDate::parse_from_str(raw_date, "%Y-%m-%d")
            .map_err(|e| parse_err(format!("malformed date `{raw_date}`: {e}")))?;
        let step = grid
            .step_of(date)
            .ok_or_else(|| parse_err(format!("date {date} does not fall on the grid starting {}", grid.start())))?;
        if !seen.insert((region.clone(), step)) {
            return Err(parse_err(format!("duplicate value for {region} at {date}")));
        }
        let raw = row.get(2).unwrap_or("");
        let value = if raw.is_empty() {
            None
        } else {
            Some(raw.parse::<f64>().map_err(|_| parse_err(format!("invalid value `{raw}`")))?)
        };
        cells.entry(region).or_insert_with(|| vec![None; grid.len()])[step] = value;
    }
    Ok(cells.into_iter().map(|(r, v)| (r, Channel::from_options(name, v))).collect())
}

pub fn write_dynamic_channel<W: std::io::Write>(
    channels: &BTreeMap<RegionId, Channel>,
    grid: &TimeGrid,
    writer: W,
) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(["region", "date", "value"])?;
    for (region, channel) in channels {
        for (t, v) in channel.values().iter().enumerate() {
            let value = v.map(|x| x.to_string()).unwrap_or_default();
            wtr.write_record([region.file_code(), grid.date_of(t).to_string(), value])?;
        }
    }
    wtr.flush().map_err(|e| Error::io("<channel>", e))?;
    Ok(())
}

/// Extend county channels to districts and the state by averaging member
/// counties. A step is observed at the upper level only when every member
/// observes it.
pub fn roll_up_channels(county: &BTreeMap<RegionId, Channel>, hierarchy: &GeoHierarchy) -> Result<BTreeMap<RegionId, Channel>> {
    let mut out = BTreeMap::new();
    for c in hierarchy.counties() {
        let ch = county.get(c).ok_or_else(|| Error::UnknownRegion(c.to_string()))?;
        out.insert(c.clone(), ch.clone());
    }
    let Some(first) = county.values().next() else { return Ok(out) };
    let (name, len) = (first.name().to_string(), first.len());
    let mut upper: Vec<RegionId> = hierarchy.districts().cloned().collect();
    upper.push(hierarchy.state().clone());
    for region in upper {
        let leaves = hierarchy.leaf_counties(&region)?;
        let values = (0..len)
            .map(|t| {
                let mut sum = 0.0;
                for c in &leaves {
                    sum += county[c].values()[t]?;
                }
                Some(sum / leaves.len() as f64)
            })
            .collect();
        out.insert(region, Channel::from_options(name.clone(), values));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::panel::Interval;
    use chrono::NaiveDate;

    fn grid(len: usize) -> TimeGrid {
        TimeGrid::new(Interval::Monthly, NaiveDate::from_ymd_opt(2018, 1, 1).unwrap(), len).unwrap()
    }

    fn hierarchy() -> GeoHierarchy {
        GeoHierarchy::from_pairs([("1", "D"), ("2", "D")], "S").unwrap()
    }

    #[test]
    fn static_storage_and_district_mean() {
        let mut table = StaticTable::new();
        table.insert((RegionId::county("1").unwrap(), "unemployment".into()), 0.04);
        table.insert((RegionId::county("2").unwrap(), "unemployment".into()), 0.06);
        let set = attach_static(&CovariateSet::new(grid(3)), &table, &hierarchy()).unwrap();
        assert_eq!(set.static_value(&RegionId::county("1").unwrap(), "unemployment"), Some(0.04));
        let d = set.static_value(&RegionId::district("D").unwrap(), "unemployment").unwrap();
        assert!((d - 0.05).abs() < 1e-15);
        // A direct district row wins over the mean.
        table.insert((RegionId::district("D").unwrap(), "unemployment".into()), 0.5);
        let set = attach_static(&CovariateSet::new(grid(3)), &table, &hierarchy()).unwrap();
        assert_eq!(set.static_value(&RegionId::district("D").unwrap(), "unemployment"), Some(0.5));
    }

    #[test]
    fn duplicate_static_rejected() {
        let mut table = StaticTable::new();
        table.insert((RegionId::county("1").unwrap(), "u".into()), 0.04);
        let set = attach_static(&CovariateSet::new(grid(3)), &table, &hierarchy()).unwrap();
        assert!(attach_static(&set, &table, &hierarchy()).is_err());
        assert!(read_static_table("region,name,value\n1,u,1\n1,u,2\n".as_bytes()).is_err());
    }

    #[test]
    fn leading_gap_from_late_coverage() {
        let g = grid(48);
        let mut text = String::from("region,date,value\n");
        for t in 48 - 12..48 {
            text.push_str(&format!("1,{},{}\n", g.date_of(t), t));
        }
        let ch = ingest_dynamic_channel(text.as_bytes(), "late", &g).unwrap();
        let c = &ch[&RegionId::county("1").unwrap()];
        assert!(c.values()[..36].iter().all(Option::is_none));
        assert_eq!(c.observed_count(), 12);
        assert_eq!(c.origin().iter().filter(|o| !**o).count(), 36);
    }

    #[test]
    fn blank_is_missing_and_off_grid_fails() {
        let g = grid(3);
        let ch = ingest_dynamic_channel("region,date,value\n1,2018-01-01,1\n1,2018-02-01,\n1,2018-03-01,3\n".as_bytes(), "x", &g)
            .unwrap();
        assert_eq!(ch[&RegionId::county("1").unwrap()].origin(), &[true, false, true]);
        assert!(ingest_dynamic_channel("region,date,value\n1,2019-01-01,1\n".as_bytes(), "x", &g).is_err());
    }

    #[test]
    fn roll_up_channels_means_and_masks() {
        let mut county = BTreeMap::new();
        county.insert(RegionId::county("1").unwrap(), Channel::from_options("x", vec![None, Some(2.0), Some(4.0)]));
        county.insert(RegionId::county("2").unwrap(), Channel::from_options("x", vec![Some(1.0), Some(4.0), Some(6.0)]));
        let all = roll_up_channels(&county, &hierarchy()).unwrap();
        let d = &all[&RegionId::district("D").unwrap()];
        assert_eq!(d.values(), &[None, Some(3.0), Some(5.0)]);
        assert_eq!(all.len(), 4);
    }

    #[test]
    fn flags_added_once_per_channel() {
        let mut set = CovariateSet::with_calendar(grid(3));
        let r = RegionId::county("1").unwrap();
        set.insert_channel(r.clone(), Channel::from_options("x", vec![None, Some(1.0), Some(1.0)])).unwrap();
        set.insert_channel(r.clone(), Channel::observed("y", vec![1.0; 3])).unwrap();
        set.add_missing_flags().unwrap();
        set.add_missing_flags().unwrap();
        assert_eq!(set.dynamic_names(), vec!["x", "x__was_missing", "y", "y__was_missing"]);
        assert_eq!(set.channel(&r, "x__was_missing").unwrap().dense().unwrap(), vec![1.0, 0.0, 0.0]);
    }
}
