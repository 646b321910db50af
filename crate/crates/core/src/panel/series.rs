use std::collections::BTreeMap;

use crate::error::{Error, Result};

use super::{Level, RegionId, TimeGrid};

/// Aligned multi-region series on one [`TimeGrid`].
///
/// Counts are held as reals so raw and normalized panels share the type.
/// `mask` records observedness; `scale` is populated by [`SeriesPanel::normalize`].
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesPanel {
    grid: TimeGrid,
    series: BTreeMap<RegionId, Vec<f64>>,
    mask: BTreeMap<RegionId, Vec<bool>>,
    scale: BTreeMap<RegionId, f64>,
    normalized: bool,
}

impl SeriesPanel {
    pub fn new(grid: TimeGrid) -> Self {
        Self {
            grid,
            series: BTreeMap::new(),
            mask: BTreeMap::new(),
            scale: BTreeMap::new(),
            normalized: false,
        }
    }

    pub fn insert(&mut self, region: RegionId, values: Vec<f64>) -> Result<()> {
        let mask = vec![true; values.len()];
        self.insert_masked(region, values, mask)
    }

    pub fn insert_masked(&mut self, region: RegionId, values: Vec<f64>, mask: Vec<bool>) -> Result<()> {
        if values.len() != self.grid.len() || mask.len() != self.grid.len() {
            return Err(Error::invalid(format!(
                "series for {region} has length {} but the grid has {} steps",
                values.len(),
                self.grid.len()
            )));
        }
        self.mask.insert(region.clone(), mask);
        self.series.insert(region, values);
        Ok(())
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.series.len()
    }

    pub fn is_empty(&self) -> bool {
        self.series.is_empty()
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn get(&self, region: &RegionId) -> Option<&[f64]> {
        self.series.get(region).map(Vec::as_slice)
    }

    pub fn series(&self, region: &RegionId) -> Result<&[f64]> {
        self.get(region).ok_or_else(|| Error::UnknownRegion(region.to_string()))
    }

    pub fn get_mut(&mut self, region: &RegionId) -> Option<&mut Vec<f64>> {
        self.series.get_mut(region)
    }

    pub fn mask(&self, region: &RegionId) -> Option<&[bool]> {
        self.mask.get(region).map(Vec::as_slice)
    }

    pub fn scale(&self, region: &RegionId) -> Option<f64> {
        self.scale.get(region).copied()
    }

    pub fn regions(&self) -> impl Iterator<Item = &RegionId> {
        self.series.keys()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&RegionId, &[f64])> {
        self.series.iter().map(|(r, v)| (r, v.as_slice()))
    }

    pub fn regions_at(&self, level: Level) -> impl Iterator<Item = &RegionId> {
        self.series.keys().filter(move |r| r.level() == level)
    }

    /// Divide every series by its own maximum. All-zero series keep scale 1.
    pub fn normalize(&self) -> Result<SeriesPanel> {
        if self.normalized {
            return Err(Error::invalid("panel is already normalized"));
        }
        let mut out = self.clone();
        out.normalized = true;
        for (region, values) in out.series.iter_mut() {
            if let Some(v) = values.iter().find(|v| **v < 0.0 || v.is_nan()) {
                return Err(Error::invalid(format!("{region} has negative or NaN value {v}")));
            }
            let max = values.iter().copied().fold(0.0_f64, f64::max);
            let scale = if max > 0.0 { max } else { 1.0 };
            for v in values.iter_mut() {
                *v /= scale;
            }
            out.scale.insert(region.clone(), scale);
        }
        Ok(out)
    }

    pub fn denormalize(&self) -> Result<SeriesPanel> {
        let mut out = self.clone();
        for (region, values) in out.series.iter_mut() {
            let scale = *self
                .scale
                .get(region)
                .ok_or_else(|| Error::MissingScale { region: region.to_string() })?;
            for v in values.iter_mut() {
                *v *= scale;
            }
        }
        out.scale.clear();
        out.normalized = false;
        Ok(out)
    }

    /// Copy of the panel restricted to the first `len` steps.
    pub fn truncated(&self, len: usize) -> Result<SeriesPanel> {
        let grid = self.grid.with_len(len)?;
        if len > self.grid.len() {
            return Err(Error::invalid("cannot extend a panel by truncation"));
        }
        let mut out = self.clone();
        out.grid = grid;
        out.series.values_mut().for_each(|v| v.truncate(len));
        out.mask.values_mut().for_each(|m| m.truncate(len));
        Ok(out)
    }

    /// Write as a wide delimited table: `date,<region>...`.
    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        let mut header = vec!["date".to_string()];
        header.extend(self.series.keys().map(|r| r.to_string()));
        wtr.write_record(&header)?;
        for t in 0..self.grid.len() {
            let mut row = vec![self.grid.date_of(t).to_string()];
            row.extend(self.series.values().map(|v| v[t].to_string()));
            wtr.write_record(&row)?;
        }
        wtr.flush().map_err(|e| Error::io("<panel>", e))?;
        Ok(())
    }
}
