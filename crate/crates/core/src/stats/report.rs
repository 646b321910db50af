use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::friedman::{friedman, nemenyi, ScoreMatrix};
use crate::error::{Error, Result};

/// p-values below 1e-4 print as `<0.0001`, others with four decimals.
pub fn format_p(p: f64) -> String {
    if p < 1e-4 {
        "<0.0001".to_string()
    } else {
        format!("{p:.4}")
    }
}

/// Architecture part of a `model/covariates` configuration label.
pub fn architecture(label: &str) -> &str {
    label.split('/').next().unwrap_or(label)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelComparison {
    pub level: String,
    pub regions: usize,
    pub labels: Vec<String>,
    pub statistic: f64,
    pub p_value: f64,
    pub mean_ranks: Vec<f64>,
    pub pairwise: Vec<Vec<f64>>,
}

impl LevelComparison {
    /// Configuration indices from best (lowest mean rank) to worst.
    pub fn ranking(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.labels.len()).collect();
        order.sort_by(|&a, &b| self.mean_ranks[a].total_cmp(&self.mean_ranks[b]).then(a.cmp(&b)));
        order
    }
}

/// One independent Friedman + Nemenyi block per geographic level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub levels: Vec<LevelComparison>,
}

impl ComparisonReport {
    pub fn build(matrices: Vec<(String, ScoreMatrix)>) -> Result<Self> {
        if matrices.is_empty() {
            return Err(Error::invalid("no score matrices to compare"));
        }
        let levels = matrices
            .into_iter()
            .map(|(level, m)| {
                let f = friedman(&m);
                LevelComparison {
                    level,
                    regions: m.n(),
                    labels: m.labels().to_vec(),
                    statistic: f.statistic,
                    p_value: f.p_value,
                    mean_ranks: f.mean_ranks,
                    pairwise: nemenyi(&m),
                }
            })
            .collect();
        Ok(Self { levels })
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for block in &self.levels {
            let k = block.labels.len();
            let _ = writeln!(out, "== {} (N = {}, k = {k}) ==", block.level, block.regions);
            let _ = writeln!(out, "Friedman chi-square = {:.4}, p = {}", block.statistic, format_p(block.p_value));
            let _ = writeln!(out);
            let _ = writeln!(out, "Ranking (mean rank, lower is better):");
            for (place, &j) in block.ranking().iter().enumerate() {
                let _ = writeln!(out, "  {}. {} ({:.4})", place + 1, block.labels[j], block.mean_ranks[j]);
            }
            let _ = writeln!(out);
            let _ = writeln!(out, "Nemenyi p-values (* = same architecture):");
            let width = block.labels.iter().map(String::len).max().unwrap_or(0).max(8);
            let _ = write!(out, "{:width$}", "");
            for label in &block.labels {
                let _ = write!(out, "  {label:>width$}");
            }
            let _ = writeln!(out);
            for i in 0..k {
                let _ = write!(out, "{:width$}", block.labels[i]);
                for j in 0..k {
                    let cell = if i == j {
                        "-".to_string()
                    } else {
                        let mark = if architecture(&block.labels[i]) == architecture(&block.labels[j]) { "*" } else { "" };
                        format!("{}{mark}", format_p(block.pairwise[i][j]))
                    };
                    let _ = write!(out, "  {cell:>width$}");
                }
                let _ = writeln!(out);
            }
            let _ = writeln!(out);
        }
        out
    }

    /// Long-form pairwise table, one row per unordered pair.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("level,config_a,config_b,p_value,same_architecture\n");
        for block in &self.levels {
            for i in 0..block.labels.len() {
                for j in i + 1..block.labels.len() {
                    let same = architecture(&block.labels[i]) == architecture(&block.labels[j]);
                    let _ = writeln!(
                        out,
                        "{},{},{},{},{same}",
                        block.level,
                        block.labels[i],
                        block.labels[j],
                        format_p(block.pairwise[i][j])
                    );
                }
            }
        }
        out
    }
}
