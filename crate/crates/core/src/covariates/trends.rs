use std::cmp::Ordering;
use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::panel::{GeoHierarchy, RegionId, SeriesPanel};

pub const NEARBY_TREND: &str = "nearby_trend";
pub const SIMILAR_TREND: &str = "similar_trend";

/// Lag and selection size for the similar-region trend.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LagSpec {
    pub lag_steps: usize,
    pub top_k: usize,
}

impl Default for LagSpec {
    fn default() -> Self {
        Self { lag_steps: 1, top_k: 5 }
    }
}

impl LagSpec {
    pub fn new(lag_steps: usize, top_k: usize) -> Result<Self> {
        if lag_steps == 0 || top_k == 0 {
            return Err(Error::invalid("lag_steps and top_k must be at least 1"));
        }
        Ok(Self { lag_steps, top_k })
    }
}

/// A derived channel for every region in the hierarchy.
#[derive(Debug, Clone, PartialEq)]
pub struct TrendChannel {
    pub name: String,
    pub values: BTreeMap<RegionId, Vec<f64>>,
    /// Counties whose neighbor or candidate set came up empty.
    pub warnings: Vec<String>,
}

/// Counties chosen for each target by [`similar_region_trend`], with their
/// lagged correlations, in selection order.
pub type Selection = BTreeMap<RegionId, Vec<(RegionId, f64)>>;

fn county_series<'a>(panel: &'a SeriesPanel, hierarchy: &GeoHierarchy) -> Result<BTreeMap<&'a RegionId, &'a [f64]>> {
    let mut out = BTreeMap::new();
    for county in hierarchy.counties() {
        let (key, values) = panel
            .iter()
            .find(|(r, _)| *r == county)
            .ok_or_else(|| Error::UnknownRegion(county.to_string()))?;
        out.insert(key, values);
    }
    Ok(out)
}

/// Mean of several equal-length series, summed in the given order.
fn mean_of(series: &[&[f64]], len: usize) -> Vec<f64> {
    let mut out = vec![0.0; len];
    if series.is_empty() {
        return out;
    }
    for s in series {
        for (o, v) in out.iter_mut().zip(s.iter()) {
            *o += v;
        }
    }
    let n = series.len() as f64;
    out.iter_mut().for_each(|v| *v /= n);
    out
}

/// Add district (mean of member counties) and state (mean of all counties)
/// channels to a county-level map.
fn extend_to_upper_levels(county: &mut BTreeMap<RegionId, Vec<f64>>, hierarchy: &GeoHierarchy, len: usize) -> Result<()> {
    let mut upper = Vec::new();
    for district in hierarchy.districts() {
        let members: Vec<&[f64]> = hierarchy.members(district)?.iter().map(|c| county[c].as_slice()).collect();
        upper.push((district.clone(), mean_of(&members, len)));
    }
    let all: Vec<&[f64]> = hierarchy.counties().map(|c| county[c].as_slice()).collect();
    upper.push((hierarchy.state().clone(), mean_of(&all, len)));
    county.extend(upper);
    Ok(())
}

/// Mean of the other counties in the same district, per county; districts
/// and the state average their member counties' channels.
pub fn nearby_region_trend(panel: &SeriesPanel, hierarchy: &GeoHierarchy) -> Result<TrendChannel> {
    let series = county_series(panel, hierarchy)?;
    let len = panel.grid().len();
    let mut values = BTreeMap::new();
    let mut warnings = Vec::new();
    for county in hierarchy.counties() {
        let district = hierarchy.district_of(county)?;
        let neighbors: Vec<&[f64]> = hierarchy
            .members(district)?
            .iter()
            .filter(|c| *c != county)
            .map(|c| series[c])
            .collect();
        if neighbors.is_empty() {
            let msg = format!("{county} has no other county in {district}; nearby trend set to zero");
            log::warn!("{msg}");
            warnings.push(msg);
        }
        values.insert(county.clone(), mean_of(&neighbors, len));
    }
    extend_to_upper_levels(&mut values, hierarchy, len)?;
    Ok(TrendChannel { name: NEARBY_TREND.into(), values, warnings })
}

/// Pearson correlation; `None` when either side has zero variance.
pub fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    assert_eq!(x.len(), y.len());
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Rank candidate counties by |lagged correlation| with `target`.
///
/// The target is read over steps `[lag, T)` and each candidate over
/// `[0, T - lag)`, so a candidate's past lines up with the target's present.
/// Ties in |r| are broken by region code.
pub fn rank_lagged_candidates(
    target: &[f64],
    candidates: &[(&RegionId, &[f64])],
    lag: usize,
) -> Vec<(RegionId, f64)> {
    let t = target.len();
    let y = &target[lag..];
    let mut scored: Vec<(RegionId, f64)> = candidates
        .iter()
        .filter_map(|(r, x)| pearson(&x[..t - lag], y).map(|c| ((*r).clone(), c)))
        .collect();
    scored.sort_by(|a, b| {
        b.1.abs()
            .partial_cmp(&a.1.abs())
            .unwrap_or(Ordering::Equal)
            .then_with(|| a.0.code().cmp(b.0.code()))
    });
    scored
}

/// Mean of the `top_k` counties whose lagged series correlate most strongly
/// (in absolute value) with each target county.
pub fn similar_region_trend(
    panel: &SeriesPanel,
    spec: LagSpec,
    hierarchy: &GeoHierarchy,
) -> Result<(TrendChannel, Selection)> {
    let len = panel.grid().len();
    if len <= spec.lag_steps + 2 {
        return Err(Error::invalid(format!(
            "similar-region trend needs more than {} steps, panel has {len}",
            spec.lag_steps + 2
        )));
    }
    let series = county_series(panel, hierarchy)?;
    let mut values = BTreeMap::new();
    let mut selection = BTreeMap::new();
    let mut warnings = Vec::new();
    for (county, target) in &series {
        let candidates: Vec<(&RegionId, &[f64])> =
            series.iter().filter(|(c, _)| *c != county).map(|(c, s)| (*c, *s)).collect();
        let mut chosen = rank_lagged_candidates(target, &candidates, spec.lag_steps);
        chosen.truncate(spec.top_k);
        if chosen.is_empty() {
            let msg = format!("{county} has no valid similar-trend candidate; channel set to zero");
            log::warn!("{msg}");
            warnings.push(msg);
        }
        let mut members: Vec<&RegionId> = chosen.iter().map(|(r, _)| r).collect();
        members.sort();
        let picked: Vec<&[f64]> = members.iter().map(|r| series[*r]).collect();
        values.insert((*county).clone(), mean_of(&picked, len));
        selection.insert((*county).clone(), chosen);
    }
    extend_to_upper_levels(&mut values, hierarchy, len)?;
    Ok((TrendChannel { name: SIMILAR_TREND.into(), values, warnings }, selection))
}
