use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::covariates::{Channel, CovariateSet, MISSING_FLAG_SUFFIX};
use crate::error::{Error, Result};
use crate::panel::Interval;

use super::{fill_constant, fill_expsmooth, IterativeImputer, SEASON};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FillMethod {
    ConstantMean,
    IterativeImpute,
    ExpSmooth,
}

impl FillMethod {
    pub const ALL: [FillMethod; 3] = [FillMethod::ConstantMean, FillMethod::IterativeImpute, FillMethod::ExpSmooth];

    pub fn column_name(self) -> &'static str {
        match self {
            FillMethod::ConstantMean => "constant_mean",
            FillMethod::IterativeImpute => "iterative_impute",
            FillMethod::ExpSmooth => "exp_smooth",
        }
    }
}

/// Fill every channel of one region with `method`. The iterative imputer
/// treats the channels as one design; a lone channel falls back to the
/// constant fill.
pub fn fill_channels(channels: &[Channel], method: FillMethod, period: Option<usize>) -> Result<Vec<Channel>> {
    match method {
        FillMethod::ConstantMean => channels.iter().map(fill_constant).collect(),
        FillMethod::ExpSmooth => channels.iter().map(|c| fill_expsmooth(c, period)).collect(),
        FillMethod::IterativeImpute => {
            for c in channels {
                super::constant::check_end_gaps(c)?;
            }
            if channels.len() < 2 {
                log::warn!("iterative imputation with a single channel; using constant fill");
                return channels.iter().map(fill_constant).collect();
            }
            Ok(IterativeImputer::default().fit(channels)?.into_filled())
        }
    }
}

/// Fill every gap-bearing dynamic channel of a covariate set in place.
/// Missingness flags are left alone.
pub fn fill_covariates(set: &mut CovariateSet, method: FillMethod) -> Result<()> {
    let period = (set.grid().interval() == Interval::Monthly).then_some(SEASON);
    let regions: Vec<_> = set.regions().cloned().collect();
    for region in regions {
        let channels: Vec<Channel> = set
            .dynamic(&region)
            .map(|m| m.values().filter(|c| !c.name().ends_with(MISSING_FLAG_SUFFIX)).cloned().collect())
            .unwrap_or_default();
        if channels.iter().all(Channel::is_complete) {
            continue;
        }
        for filled in fill_channels(&channels, method, period)? {
            set.replace_channel(&region, filled)?;
        }
    }
    Ok(())
}

/// Holdout RMSE of a fill method on one channel.
///
/// The final `holdout` observed steps of `channels[target]` are blanked,
/// refilled with `method` (other channels serve as imputation predictors),
/// and compared to the truth on the channel's max-normalized scale.
pub fn evaluate_fill(
    channels: &[Channel],
    target: usize,
    holdout: usize,
    method: FillMethod,
    period: Option<usize>,
) -> Result<f64> {
    let channel = channels.get(target).ok_or_else(|| Error::invalid("target channel index out of range"))?;
    let (first, last) = super::constant::check_end_gaps(channel)?;
    if last + 1 - first <= holdout {
        return Err(Error::channel(channel.name(), format!("needs more than {holdout} observed steps for the holdout")));
    }
    let window = last + 1 - holdout..last + 1;
    let truth: Vec<f64> = channel.values()[window.clone()].iter().map(|v| v.expect("observed")).collect();
    let scale = channel.values().iter().flatten().fold(0.0_f64, |m, v| m.max(v.abs()));
    let scale = if scale > 0.0 { scale } else { 1.0 };

    let mut trial = channels.to_vec();
    trial[target] = channel.masked(window.clone());
    let filled = match method {
        FillMethod::IterativeImpute => fill_channels(&trial, method, period)?.swap_remove(target),
        _ => fill_channels(&trial[target..=target], method, period)?.swap_remove(0),
    };
    let predicted: Vec<f64> = filled.values()[window].iter().map(|v| v.expect("filled") / scale).collect();
    let truth: Vec<f64> = truth.iter().map(|v| v / scale).collect();
    crate::backtest::rmse(&predicted, &truth)
}

/// Channel x method holdout RMSEs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FillTable {
    pub rows: BTreeMap<String, BTreeMap<FillMethod, f64>>,
}

impl FillTable {
    /// Evaluate every method on every channel with a trailing holdout of
    /// `holdout` observed steps.
    pub fn evaluate(channels: &[Channel], holdout: usize, period: Option<usize>) -> Result<Self> {
        let mut rows = BTreeMap::new();
        for (i, c) in channels.iter().enumerate() {
            let mut row = BTreeMap::new();
            for method in FillMethod::ALL {
                row.insert(method, evaluate_fill(channels, i, holdout, method, period)?);
            }
            rows.insert(c.name().to_string(), row);
        }
        Ok(Self { rows })
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("channel");
        for m in FillMethod::ALL {
            write!(out, ",{}", m.column_name()).unwrap();
        }
        out.push('\n');
        for (name, row) in &self.rows {
            out.push_str(name);
            for m in FillMethod::ALL {
                write!(out, ",{:.4}", row[&m]).unwrap();
            }
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_channel_has_zero_constant_rmse() {
        let c = Channel::observed("flat", vec![7.0; 40]);
        assert_eq!(evaluate_fill(&[c], 0, 12, FillMethod::ConstantMean, Some(12)).unwrap(), 0.0);
    }

    #[test]
    fn table_has_three_method_columns() {
        let a = Channel::observed("a", (0..40).map(|t| t as f64).collect());
        let b = Channel::observed("b", (0..40).map(|t| (t % 12) as f64).collect());
        let table = FillTable::evaluate(&[a, b], crate::gapfill::YEAR_STEPS, Some(12)).unwrap();
        let csv = table.to_csv();
        assert!(csv.starts_with("channel,constant_mean,iterative_impute,exp_smooth\n"));
        assert_eq!(csv.lines().count(), 3);
    }

    #[test]
    fn holdout_longer_than_data_rejected() {
        let c = Channel::observed("short", vec![1.0; 10]);
        assert!(evaluate_fill(&[c], 0, 12, FillMethod::ExpSmooth, None).is_err());
    }
}
