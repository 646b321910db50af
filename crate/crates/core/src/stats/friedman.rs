use statrs::distribution::{ChiSquared, ContinuousCDF};

use super::range::studentized_range_sf;
use crate::error::{Error, Result};

/// Regions by configurations matrix of mean errors (lower is better).
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreMatrix {
    labels: Vec<String>,
    rows: Vec<Vec<f64>>,
}

impl ScoreMatrix {
    pub fn new(labels: Vec<String>, rows: Vec<Vec<f64>>) -> Result<Self> {
        let k = labels.len();
        if rows.len() < 2 || k < 2 {
            return Err(Error::invalid(format!(
                "need at least 2 regions and 2 configurations, got {} x {k}",
                rows.len()
            )));
        }
        if rows.iter().any(|r| r.len() != k) {
            return Err(Error::invalid("every row needs one score per configuration"));
        }
        if rows.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::invalid("scores must be finite"));
        }
        let mut seen = std::collections::BTreeSet::new();
        if let Some(dup) = labels.iter().find(|l| !seen.insert(l.as_str())) {
            return Err(Error::invalid(format!("duplicate configuration label `{dup}`")));
        }
        Ok(Self { labels, rows })
    }

    /// Unlabelled matrix; configurations are named by column index.
    pub fn unlabelled(rows: Vec<Vec<f64>>) -> Result<Self> {
        let k = rows.first().map_or(0, Vec::len);
        Self::new((0..k).map(|j| j.to_string()).collect(), rows)
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn n(&self) -> usize {
        self.rows.len()
    }

    pub fn k(&self) -> usize {
        self.labels.len()
    }
}

/// Ascending ranks per row, ties replaced by their average rank.
pub fn rank_rows(m: &ScoreMatrix) -> Vec<Vec<f64>> {
    m.rows
        .iter()
        .map(|row| {
            let mut order: Vec<usize> = (0..row.len()).collect();
            order.sort_by(|&a, &b| row[a].total_cmp(&row[b]));
            let mut ranks = vec![0.0; row.len()];
            let mut i = 0;
            while i < order.len() {
                let mut j = i;
                while j + 1 < order.len() && row[order[j + 1]] == row[order[i]] {
                    j += 1;
                }
                let avg = (i + j) as f64 / 2.0 + 1.0;
                for &o in &order[i..=j] {
                    ranks[o] = avg;
                }
                i = j + 1;
            }
            ranks
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct FriedmanResult {
    pub statistic: f64,
    pub p_value: f64,
    pub mean_ranks: Vec<f64>,
}

fn mean_ranks(m: &ScoreMatrix) -> Vec<f64> {
    let ranks = rank_rows(m);
    let n = m.n() as f64;
    (0..m.k()).map(|j| ranks.iter().map(|r| r[j]).sum::<f64>() / n).collect()
}

/// Friedman chi-square statistic with its upper-tail p-value on `k - 1`
/// degrees of freedom.
pub fn friedman(m: &ScoreMatrix) -> FriedmanResult {
    let (n, k) = (m.n() as f64, m.k() as f64);
    let mean_ranks = mean_ranks(m);
    let centre = (k + 1.0) / 2.0;
    let ss: f64 = mean_ranks.iter().map(|r| (r - centre).powi(2)).sum();
    let statistic = (12.0 * n / (k * (k + 1.0)) * ss).max(0.0);
    let chi = ChiSquared::new(k - 1.0).expect("k >= 2");
    let p_value = chi.sf(statistic).clamp(0.0, 1.0);
    FriedmanResult { statistic, p_value, mean_ranks }
}

/// Pairwise Nemenyi p-values, symmetric with a unit diagonal.
///
/// The mean-rank difference of a pair is divided by `sqrt(k(k+1)/(12N))`,
/// the null standard deviation of a single mean rank, which makes it a
/// draw from the studentized range of `k` groups.
pub fn nemenyi(m: &ScoreMatrix) -> Vec<Vec<f64>> {
    let k = m.k();
    let ranks = mean_ranks(m);
    let sd = (k as f64 * (k as f64 + 1.0) / (12.0 * m.n() as f64)).sqrt();
    let mut out = vec![vec![1.0; k]; k];
    for i in 0..k {
        for j in i + 1..k {
            let q = (ranks[i] - ranks[j]).abs() / sd;
            let p = studentized_range_sf(q, k);
            out[i][j] = p;
            out[j][i] = p;
        }
    }
    out
}
