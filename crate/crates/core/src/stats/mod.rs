//! Friedman omnibus test and Nemenyi post-hoc comparisons over per-region
//! error matrices.

mod friedman;
mod range;
mod report;

pub use friedman::{friedman, nemenyi, rank_rows, FriedmanResult, ScoreMatrix};
pub use range::{normal_cdf, studentized_range_cdf, studentized_range_sf};
pub use report::{architecture, format_p, ComparisonReport, LevelComparison};

#[cfg(test)]
mod tests;
