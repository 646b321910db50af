use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Aggregation level of a region.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Level {
    County,
    District,
    State,
}

impl Level {
    pub const ALL: [Level; 3] = [Level::County, Level::District, Level::State];

    pub fn name(self) -> &'static str {
        match self {
            Level::County => "County",
            Level::District => "District",
            Level::State => "State",
        }
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Opaque region code tagged with its level.
///
/// Ordering is by level first, then code, which keeps counties ahead of
/// districts and the state in every map keyed by region.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct RegionId {
    level: Level,
    code: String,
}

impl RegionId {
    pub fn new(level: Level, code: impl Into<String>) -> Result<Self> {
        let code = code.into();
        if code.trim().is_empty() {
            return Err(Error::invalid("region code must be non-empty"));
        }
        Ok(Self { level, code })
    }

    pub fn county(code: impl Into<String>) -> Result<Self> {
        Self::new(Level::County, code)
    }

    pub fn district(code: impl Into<String>) -> Result<Self> {
        Self::new(Level::District, code)
    }

    pub fn state(code: impl Into<String>) -> Result<Self> {
        Self::new(Level::State, code)
    }

    /// Parse `Level:code` (as produced by `Display`) or a bare county code.
    pub fn parse(text: &str) -> Result<Self> {
        let text = text.trim();
        if let Some((prefix, code)) = text.split_once(':') {
            let level = match prefix {
                "County" => Some(Level::County),
                "District" => Some(Level::District),
                "State" => Some(Level::State),
                _ => None,
            };
            if let Some(level) = level {
                return Self::new(level, code);
            }
        }
        Self::county(text)
    }

    /// Inverse of [`RegionId::parse`]: bare code for counties, `Level:code` otherwise.
    pub fn file_code(&self) -> String {
        match self.level {
            Level::County => self.code.clone(),
            _ => self.to_string(),
        }
    }

    pub fn level(&self) -> Level {
        self.level
    }

    pub fn code(&self) -> &str {
        &self.code
    }
}

impl fmt::Display for RegionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.level, self.code)
    }
}

/// Three-level containment map: county -> district -> state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeoHierarchy {
    county_to_district: BTreeMap<RegionId, RegionId>,
    districts: BTreeMap<RegionId, Vec<RegionId>>,
    state: RegionId,
}

impl GeoHierarchy {
    /// Build from `(county code, district code)` pairs.
    pub fn from_pairs<I, A, B>(pairs: I, state_code: &str) -> Result<Self>
    where
        I: IntoIterator<Item = (A, B)>,
        A: Into<String>,
        B: Into<String>,
    {
        let mut county_to_district: BTreeMap<RegionId, RegionId> = BTreeMap::new();
        let mut districts: BTreeMap<RegionId, Vec<RegionId>> = BTreeMap::new();
        for (county, district) in pairs {
            let county = RegionId::county(county)?;
            let district = RegionId::district(district)?;
            if let Some(prev) = county_to_district.get(&county) {
                if prev != &district {
                    return Err(Error::invalid(format!(
                        "county `{}` mapped to both `{}` and `{}`",
                        county.code(),
                        prev.code(),
                        district.code()
                    )));
                }
                continue;
            }
            county_to_district.insert(county.clone(), district.clone());
            districts.entry(district).or_default().push(county);
        }
        if county_to_district.is_empty() {
            return Err(Error::invalid("hierarchy has no counties"));
        }
        for members in districts.values_mut() {
            members.sort();
        }
        Ok(Self { county_to_district, districts, state: RegionId::state(state_code)? })
    }

    /// Parse a `county,district` delimited file with a header row.
    pub fn read_csv<R: Read>(reader: R, state_code: &str) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers()?.clone();
        let col = |name: &str| {
            headers
                .iter()
                .position(|h| h.eq_ignore_ascii_case(name))
                .ok_or_else(|| Error::Parse { line: 1, message: format!("missing `{name}` column") })
        };
        let (ci, di) = (col("county")?, col("district")?);
        let mut pairs = Vec::new();
        for row in rdr.records() {
            let row = row?;
            let line = row.position().map_or(0, |p| p.line());
            let county = row.get(ci).unwrap_or("").to_string();
            let district = row.get(di).unwrap_or("").to_string();
            if county.is_empty() || district.is_empty() {
                return Err(Error::Parse { line, message: "empty county or district".into() });
            }
            pairs.push((county, district));
        }
        Self::from_pairs(pairs, state_code)
    }

    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        wtr.write_record(["county", "district"])?;
        for (county, district) in &self.county_to_district {
            wtr.write_record([county.code(), district.code()])?;
        }
        wtr.flush().map_err(|e| Error::io("<hierarchy>", e))?;
        Ok(())
    }

    pub fn counties(&self) -> impl Iterator<Item = &RegionId> {
        self.county_to_district.keys()
    }

    pub fn districts(&self) -> impl Iterator<Item = &RegionId> {
        self.districts.keys()
    }

    pub fn state(&self) -> &RegionId {
        &self.state
    }

    pub fn n_counties(&self) -> usize {
        self.county_to_district.len()
    }

    pub fn n_districts(&self) -> usize {
        self.districts.len()
    }

    pub fn contains_county(&self, county: &RegionId) -> bool {
        self.county_to_district.contains_key(county)
    }

    pub fn district_of(&self, county: &RegionId) -> Result<&RegionId> {
        self.county_to_district
            .get(county)
            .ok_or_else(|| Error::UnknownRegion(county.to_string()))
    }

    /// Sorted member counties of a district.
    pub fn members(&self, district: &RegionId) -> Result<&[RegionId]> {
        self.districts
            .get(district)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::UnknownRegion(district.to_string()))
    }

    /// Every region at every level, counties first.
    pub fn all_regions(&self) -> Vec<RegionId> {
        self.counties()
            .chain(self.districts())
            .cloned()
            .chain(std::iter::once(self.state.clone()))
            .collect()
    }

    /// Counties whose values feed a region: itself for a county, its members
    /// for a district, all counties for the state.
    pub fn leaf_counties(&self, region: &RegionId) -> Result<Vec<RegionId>> {
        match region.level() {
            Level::County => {
                self.district_of(region)?;
                Ok(vec![region.clone()])
            }
            Level::District => Ok(self.members(region)?.to_vec()),
            Level::State if region == &self.state => Ok(self.counties().cloned().collect()),
            Level::State => Err(Error::UnknownRegion(region.to_string())),
        }
    }

    pub fn district_set(&self) -> BTreeSet<RegionId> {
        self.districts.keys().cloned().collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_code_rejected() {
        assert!(RegionId::county("").is_err());
        assert!(RegionId::county("  ").is_err());
    }

    #[test]
    fn parse_round_trip() {
        for r in [RegionId::county("021").unwrap(), RegionId::district("7").unwrap(), RegionId::state("KY").unwrap()] {
            assert_eq!(RegionId::parse(&r.file_code()).unwrap(), r);
        }
    }

    #[test]
    fn conflicting_assignment_rejected() {
        let err = GeoHierarchy::from_pairs([("a", "d1"), ("a", "d2")], "KY").unwrap_err();
        assert!(err.to_string().contains("mapped to both"));
    }

    #[test]
    fn hierarchy_csv_round_trip() {
        let h = GeoHierarchy::from_pairs([("001", "A"), ("002", "A"), ("003", "B")], "KY").unwrap();
        let mut buf = Vec::new();
        h.write_csv(&mut buf).unwrap();
        let back = GeoHierarchy::read_csv(buf.as_slice(), "KY").unwrap();
        assert_eq!(h, back);
        assert_eq!(back.all_regions().len(), 3 + 2 + 1);
    }
}
