use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Suffix appended to a channel name for its missingness flag.
pub const MISSING_FLAG_SUFFIX: &str = "__was_missing";

/// A dynamic covariate channel on a grid.
///
/// `origin[t]` is fixed at construction: true where the value was
/// originally observed. Gap filling writes `values` but never `origin`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Channel {
    name: String,
    values: Vec<Option<f64>>,
    origin: Vec<bool>,
}

impl Channel {
    pub fn from_options(name: impl Into<String>, values: Vec<Option<f64>>) -> Self {
        let origin = values.iter().map(Option::is_some).collect();
        Self { name: name.into(), values, origin }
    }

    pub fn observed(name: impl Into<String>, values: Vec<f64>) -> Self {
        Self::from_options(name, values.into_iter().map(Some).collect())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[Option<f64>] {
        &self.values
    }

    pub fn origin(&self) -> &[bool] {
        &self.origin
    }

    pub fn is_complete(&self) -> bool {
        self.values.iter().all(Option::is_some)
    }

    pub fn observed_count(&self) -> usize {
        self.origin.iter().filter(|o| **o).count()
    }

    /// Values with every gap filled, or an error naming the channel.
    pub fn dense(&self) -> Result<Vec<f64>> {
        self.values
            .iter()
            .map(|v| v.ok_or_else(|| Error::channel(&self.name, "channel still has missing cells")))
            .collect()
    }

    /// Replace current values, keeping the origin mask. Observed cells must
    /// not change.
    pub(crate) fn with_values(&self, values: Vec<Option<f64>>) -> Self {
        debug_assert_eq!(values.len(), self.values.len());
        debug_assert!(self
            .origin
            .iter()
            .zip(&values)
            .zip(&self.values)
            .all(|((o, new), old)| !o || new.map(f64::to_bits) == old.map(f64::to_bits)));
        Self { name: self.name.clone(), values, origin: self.origin.clone() }
    }

    /// Copy where the given steps are blanked and marked unobserved.
    pub fn masked(&self, steps: std::ops::Range<usize>) -> Self {
        let mut out = self.clone();
        for t in steps {
            out.values[t] = None;
            out.origin[t] = false;
        }
        out
    }

    pub fn reversed(&self) -> Self {
        let mut out = self.clone();
        out.values.reverse();
        out.origin.reverse();
        out
    }

    pub fn renamed(&self, name: impl Into<String>) -> Self {
        Self { name: name.into(), ..self.clone() }
    }

    /// Indices of the first and last observed step.
    pub fn observed_bounds(&self) -> Option<(usize, usize)> {
        let first = self.values.iter().position(Option::is_some)?;
        let last = self.values.iter().rposition(Option::is_some)?;
        Some((first, last))
    }

    /// True when every missing cell sits before the first or after the last
    /// observed cell.
    pub fn has_only_end_gaps(&self) -> bool {
        match self.observed_bounds() {
            None => false,
            Some((first, last)) => self.values[first..=last].iter().all(Option::is_some),
        }
    }
}

/// Companion 0/1 channel: 1 where the value was not originally observed.
pub fn missing_flag(channel: &Channel) -> Channel {
    Channel::observed(
        format!("{}{MISSING_FLAG_SUFFIX}", channel.name()),
        channel.origin().iter().map(|o| if *o { 0.0 } else { 1.0 }).collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flag_from_mask() {
        let c = Channel::from_options("x", vec![Some(1.0), Some(2.0), None, None]);
        let f = missing_flag(&c);
        assert_eq!(f.name(), "x__was_missing");
        assert_eq!(f.dense().unwrap(), vec![0.0, 0.0, 1.0, 1.0]);
        assert_eq!(missing_flag(&Channel::observed("y", vec![3.0; 4])).dense().unwrap(), vec![0.0; 4]);
    }

    #[test]
    fn end_gap_detection() {
        assert!(Channel::from_options("x", vec![None, Some(1.0), Some(2.0), None]).has_only_end_gaps());
        assert!(!Channel::from_options("x", vec![Some(1.0), None, Some(2.0)]).has_only_end_gaps());
        assert!(!Channel::from_options("x", vec![None, None]).has_only_end_gaps());
    }
}
