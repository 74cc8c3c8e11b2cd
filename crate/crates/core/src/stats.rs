//! Rank-sum comparison of two solving alternatives.

use std::io::Write;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::io::fmt_f64;
use crate::{Error, Result};

/// Two-sided significance level.
pub const ALPHA: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    NoSignificance,
    /// The first sample ranks significantly lower (better for minimization).
    FirstBetter,
    SecondBetter,
}

impl Verdict {
    /// Table symbol when the first sample is the heuristic model.
    pub fn symbol(self) -> &'static str {
        match self {
            Verdict::NoSignificance => "-",
            Verdict::FirstBetter => "▲",
            Verdict::SecondBetter => "▼",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComparisonResult {
    /// Standardized rank sum of the first sample.
    pub z: f64,
    pub p_two_sided: f64,
    pub verdict: Verdict,
    pub mean_first: f64,
    pub std_first: f64,
    pub mean_second: f64,
    pub std_second: f64,
}

impl ComparisonResult {
    /// One-sided p-value for "first sample tends to be smaller".
    pub fn p_first_less(&self) -> f64 {
        std_normal().cdf(self.z)
    }

    /// One-sided p-value for "first sample tends to be larger".
    pub fn p_first_greater(&self) -> f64 {
        1.0 - std_normal().cdf(self.z)
    }
}

fn std_normal() -> Normal {
    Normal::new(0.0, 1.0).expect("unit normal")
}

/// Arithmetic mean and population standard deviation (`1/n`).
pub fn aggregate(values: &[f64]) -> Result<(f64, f64)> {
    if values.is_empty() {
        return Err(Error::arg("cannot aggregate an empty sample"));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    Ok((mean, var.sqrt()))
}

/// Sample standard deviation (`1/(n-1)`); zero for a single value.
pub fn sample_std(values: &[f64]) -> Result<f64> {
    let (mean, _) = aggregate(values)?;
    if values.len() < 2 {
        return Ok(0.0);
    }
    let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
    Ok((ss / (values.len() - 1) as f64).sqrt())
}

/// Midranks (1-based) of the pooled values, plus the tie correction term
/// `sum (t^3 - t)` over tie groups.
fn midranks(pooled: &[f64]) -> (Vec<f64>, f64) {
    let mut idx: Vec<usize> = (0..pooled.len()).collect();
    idx.sort_by(|&a, &b| pooled[a].total_cmp(&pooled[b]));
    let mut ranks = vec![0.0; pooled.len()];
    let mut ties = 0.0;
    let mut start = 0;
    while start < idx.len() {
        let mut end = start + 1;
        while end < idx.len() && pooled[idx[end]] == pooled[idx[start]] {
            end += 1;
        }
        let rank = (start + 1 + end) as f64 / 2.0;
        for &i in &idx[start..end] {
            ranks[i] = rank;
        }
        let t = (end - start) as f64;
        ties += t * t * t - t;
        start = end;
    }
    (ranks, ties)
}

/// Wilcoxon rank-sum test, normal approximation with midranks and
/// tie-corrected variance, no continuity correction.
pub fn wilcoxon_rank_sum(xs: &[f64], ys: &[f64]) -> Result<ComparisonResult> {
    if xs.len() < 3 || ys.len() < 3 {
        return Err(Error::arg(
            "rank-sum test needs at least 3 values per sample",
        ));
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(Error::arg("samples must be finite"));
    }
    let (mean_first, std_first) = aggregate(xs)?;
    let (mean_second, std_second) = aggregate(ys)?;
    let (n1, n2) = (xs.len() as f64, ys.len() as f64);
    let total = n1 + n2;
    let pooled: Vec<f64> = xs.iter().chain(ys).copied().collect();
    let (ranks, ties) = midranks(&pooled);
    let w: f64 = ranks[..xs.len()].iter().sum();
    let mu = n1 * (total + 1.0) / 2.0;
    let var = n1 * n2 / 12.0 * ((total + 1.0) - ties / (total * (total - 1.0)));

    let (z, p) = if var <= 0.0 {
        (0.0, 1.0)
    } else {
        let z = (w - mu) / var.sqrt();
        (z, (2.0 * (1.0 - std_normal().cdf(z.abs()))).min(1.0))
    };
    let verdict = if p >= ALPHA {
        Verdict::NoSignificance
    } else if z < 0.0 {
        Verdict::FirstBetter
    } else {
        Verdict::SecondBetter
    };
    Ok(ComparisonResult {
        z,
        p_two_sided: p,
        verdict,
        mean_first,
        std_first,
        mean_second,
        std_second,
    })
}

/// One row of the instance comparison table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub instance: String,
    pub optimum: Option<i64>,
    pub r_mean: f64,
    pub r_std: f64,
    pub h_mean: f64,
    pub h_std: f64,
    pub verdict: Verdict,
    /// `z` of the heuristic sample against the reference sample.
    pub z: f64,
}

impl TableRow {
    /// Compares tour lengths of the heuristic (`h`) and reference (`r`) runs.
    pub fn compare(
        instance: impl Into<String>,
        optimum: Option<i64>,
        r: &[f64],
        h: &[f64],
    ) -> Result<TableRow> {
        let cmp = wilcoxon_rank_sum(h, r)?;
        Ok(TableRow {
            instance: instance.into(),
            optimum,
            r_mean: cmp.mean_second,
            r_std: cmp.std_second,
            h_mean: cmp.mean_first,
            h_std: cmp.std_first,
            verdict: cmp.verdict,
            z: cmp.z,
        })
    }
}

/// `instance,optimum,r_mean,r_std,h_mean,h_std,verdict,z`.
pub fn write_table_csv<W: Write>(rows: &[TableRow], mut out: W) -> Result<()> {
    writeln!(out, "instance,optimum,r_mean,r_std,h_mean,h_std,verdict,z")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{:.4}",
            r.instance,
            r.optimum.map(|o| o.to_string()).unwrap_or_default(),
            fmt_f64(r.r_mean),
            fmt_f64(r.r_std),
            fmt_f64(r.h_mean),
            fmt_f64(r.h_std),
            r.verdict.symbol(),
            r.z
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_samples_tie() {
        let xs = [3.0, 1.0, 4.0, 1.0, 5.0];
        let r = wilcoxon_rank_sum(&xs, &xs).unwrap();
        assert_eq!(r.z, 0.0);
        assert_eq!(r.verdict, Verdict::NoSignificance);
    }

    #[test]
    fn constant_samples_are_degenerate() {
        let r = wilcoxon_rank_sum(&[2.0; 4], &[2.0; 5]).unwrap();
        assert_eq!(r.z, 0.0);
        assert_eq!(r.p_two_sided, 1.0);
        assert_eq!(r.verdict, Verdict::NoSignificance);
    }

    #[test]
    fn all_wins_ten_by_ten() {
        let xs: Vec<f64> = (0..10).map(f64::from).collect();
        let ys: Vec<f64> = (10..20).map(f64::from).collect();
        let r = wilcoxon_rank_sum(&xs, &ys).unwrap();
        assert!((r.z + 50.0 / 175f64.sqrt()).abs() < 1e-12);
        assert_eq!(r.verdict, Verdict::FirstBetter);
    }

    #[test]
    fn midranks_with_ties() {
        let (ranks, ties) = midranks(&[1.0, 2.0, 2.0, 3.0]);
        assert_eq!(ranks, vec![1.0, 2.5, 2.5, 4.0]);
        assert_eq!(ties, 6.0);
    }

    #[test]
    fn aggregate_cases() {
        assert_eq!(aggregate(&[7.5; 10]).unwrap(), (7.5, 0.0));
        assert_eq!(aggregate(&[0.0, 2.0]).unwrap(), (1.0, 1.0));
        assert!(aggregate(&[]).is_err());
        assert!((sample_std(&[0.0, 2.0]).unwrap() - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn small_samples_rejected() {
        assert!(wilcoxon_rank_sum(&[1.0, 2.0], &[1.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn table_csv() {
        let r = [898.0; 10];
        let row = TableRow::compare("burma5", Some(898), &r, &r).unwrap();
        let mut buf = Vec::new();
        write_table_csv(&[row], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text.lines().nth(1).unwrap(),
            "burma5,898,898,0,898,0,-,0.0000"
        );
    }
}
