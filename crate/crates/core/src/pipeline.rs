//! From raw inputs to model-ready datasets for each covariate choice.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::covariates::{
    attach_static, nearby_region_trend, roll_up_channels, similar_region_trend, Channel, CovariateSet, LagSpec,
    Selection, StaticTable,
};
use crate::error::{Error, Result};
use crate::gapfill::{fill_covariates, FillMethod};
use crate::models::Dataset;
use crate::panel::{aggregate_on, roll_up, EventRecord, GeoHierarchy, RegionId, SeriesPanel, TimeGrid};
use crate::synth::SynthOutput;

/// Which covariates the models see.
///
/// `Common` holds the similar-region trend, the nearby-region trend and the
/// static attributes. `All` adds calendar encodings, external channels and
/// their missingness flags.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CovariateChoice {
    None,
    Common,
    All,
}

impl CovariateChoice {
    pub const ALL: [CovariateChoice; 3] = [CovariateChoice::None, CovariateChoice::Common, CovariateChoice::All];

    pub fn name(self) -> &'static str {
        match self {
            CovariateChoice::None => "none",
            CovariateChoice::Common => "common",
            CovariateChoice::All => "all",
        }
    }
}

impl fmt::Display for CovariateChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CovariateChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CovariateChoice::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown covariate set `{s}` (expected none, common or all)")))
    }
}

/// Everything the pipeline consumes: events aggregated onto a grid, the
/// hierarchy, county-level external channels and static attributes.
#[derive(Debug, Clone, PartialEq)]
pub struct Inputs {
    pub hierarchy: GeoHierarchy,
    /// Raw counts for every county, district and the state.
    pub counts: SeriesPanel,
    pub channels: BTreeMap<String, BTreeMap<RegionId, Channel>>,
    pub statics: StaticTable,
}

impl Inputs {
    pub fn new(
        events: &[EventRecord],
        hierarchy: GeoHierarchy,
        grid: TimeGrid,
        channels: BTreeMap<String, BTreeMap<RegionId, Channel>>,
        statics: StaticTable,
    ) -> Result<Self> {
        let counts = roll_up(&aggregate_on(events, &hierarchy, grid)?, &hierarchy)?;
        Ok(Self { hierarchy, counts, channels, statics })
    }

    pub fn from_synth(out: &SynthOutput) -> Result<Self> {
        Self::new(&out.events, out.hierarchy.clone(), out.grid, out.channels.clone(), out.statics.clone())
    }

    pub fn grid(&self) -> &TimeGrid {
        self.counts.grid()
    }

    pub fn normalized(&self) -> Result<SeriesPanel> {
        self.counts.normalize()
    }

    /// Covariates for `choice`, or `None` when the models see the target
    /// alone. Trends are built from the max-normalized county series so
    /// dense counties do not drown out sparse ones.
    pub fn covariates(&self, choice: CovariateChoice, lag: LagSpec, fill: FillMethod) -> Result<Option<CovariateSet>> {
        self.covariates_with_selection(choice, lag, fill).map(|(set, _)| set)
    }

    pub fn covariates_with_selection(
        &self,
        choice: CovariateChoice,
        lag: LagSpec,
        fill: FillMethod,
    ) -> Result<(Option<CovariateSet>, Option<Selection>)> {
        if choice == CovariateChoice::None {
            return Ok((None, None));
        }
        let grid = *self.grid();
        let normalized = self.normalized()?;
        let mut set = if choice == CovariateChoice::All { CovariateSet::with_calendar(grid) } else { CovariateSet::new(grid) };
        let (similar, selection) = similar_region_trend(&normalized, lag, &self.hierarchy)?;
        set.insert_trend(&similar)?;
        set.insert_trend(&nearby_region_trend(&normalized, &self.hierarchy)?)?;
        if choice == CovariateChoice::All {
            for per_county in self.channels.values() {
                for (region, channel) in roll_up_channels(per_county, &self.hierarchy)? {
                    set.insert_channel(region, channel)?;
                }
            }
            set.add_missing_flags()?;
            fill_covariates(&mut set, fill)?;
        }
        if !self.statics.is_empty() {
            set = attach_static(&set, &self.statics, &self.hierarchy)?;
        }
        Ok((Some(set), Some(selection)))
    }

    pub fn dataset(&self, choice: CovariateChoice, lag: LagSpec, fill: FillMethod) -> Result<Dataset> {
        let covariates = self.covariates(choice, lag, fill)?;
        Dataset::assemble(&self.normalized()?, covariates.as_ref())
    }
}
