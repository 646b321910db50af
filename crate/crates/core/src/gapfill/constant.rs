use crate::covariates::Channel;
use crate::error::{Error, Result};

/// Steps averaged for the leading and trailing constant fills.
pub const YEAR_STEPS: usize = 12;

pub(crate) fn check_end_gaps(channel: &Channel) -> Result<(usize, usize)> {
    let (first, last) = channel
        .observed_bounds()
        .ok_or_else(|| Error::channel(channel.name(), "no observed values"))?;
    if !channel.values()[first..=last].iter().all(Option::is_some) {
        return Err(Error::channel(channel.name(), "interior gap; only leading/trailing gaps can be filled"));
    }
    Ok((first, last))
}

fn mean(values: &[Option<f64>]) -> f64 {
    let sum: f64 = values.iter().map(|v| v.expect("observed")).sum();
    sum / values.len() as f64
}

/// Leading gap <- mean of the first year of observations; trailing gap <-
/// mean of the last year (or of everything observed when shorter).
pub fn fill_constant(channel: &Channel) -> Result<Channel> {
    let (first, last) = check_end_gaps(channel)?;
    let observed = &channel.values()[first..=last];
    let n = observed.len().min(YEAR_STEPS);
    let head = mean(&observed[..n]);
    let tail = mean(&observed[observed.len() - n..]);
    let mut values = channel.values().to_vec();
    values[..first].iter_mut().for_each(|v| *v = Some(head));
    values[last + 1..].iter_mut().for_each(|v| *v = Some(tail));
    Ok(channel.with_values(values))
}
