use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::factorlab::{AuthorDataset, Dataset, AUTHOR_FEATURES};
use crate::learners::{information_gain_ratio, pearson_cc, BinningScheme};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationRow {
    pub factor: String,
    /// `None` when the factor or the target is constant.
    pub cc: Option<f64>,
}

pub fn correlation_table(names: &[String], columns: &[Vec<f64>], target: &[f64]) -> Vec<CorrelationRow> {
    names
        .iter()
        .zip(columns)
        .map(|(n, c)| CorrelationRow {
            factor: n.clone(),
            cc: pearson_cc(c, target).ok(),
        })
        .collect()
}

fn columns(ds: &Dataset) -> Vec<Vec<f64>> {
    (0..ds.feature_names.len())
        .map(|j| ds.examples.iter().map(|e| e.factors[j]).collect())
        .collect()
}

/// Correlation of each factor with the binary label.
pub fn label_correlations(ds: &Dataset) -> Vec<CorrelationRow> {
    let y: Vec<f64> = ds.examples.iter().map(|e| e.label as u8 as f64).collect();
    correlation_table(&ds.feature_names, &columns(ds), &y)
}

/// Correlation of each author feature with the future h-index.
pub fn author_correlations(ds: &AuthorDataset) -> Vec<CorrelationRow> {
    let names: Vec<String> = AUTHOR_FEATURES.iter().map(|s| s.to_string()).collect();
    let cols: Vec<Vec<f64>> = (0..names.len())
        .map(|j| ds.examples.iter().map(|e| e.features[j]).collect())
        .collect();
    correlation_table(&names, &cols, &ds.targets())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IgrRow {
    pub rank: usize,
    pub factor: String,
    pub igr: f64,
}

/// Factors ranked by information gain ratio, ties broken by name.
pub fn igr_table(ds: &Dataset, bins: usize) -> Vec<IgrRow> {
    let y = ds.labels();
    let mut rows: Vec<(String, f64)> = ds
        .feature_names
        .iter()
        .zip(columns(ds))
        .map(|(n, c)| (n.clone(), information_gain_ratio(&c, &y, bins).unwrap_or(0.0)))
        .collect();
    rows.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    rows.into_iter()
        .enumerate()
        .map(|(i, (factor, igr))| IgrRow { rank: i + 1, factor, igr })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResponsePoint {
    pub bin: usize,
    pub low: f64,
    pub high: f64,
    pub mean_value: f64,
    pub count: usize,
    pub positive_fraction: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResponseCurve {
    pub factor: String,
    pub points: Vec<ResponsePoint>,
}

/// 95% Wilson score interval for a binomial proportion.
pub fn wilson_interval(successes: usize, n: usize) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let z = 1.959_963_984_540_054;
    let nf = n as f64;
    let p = successes as f64 / nf;
    let denom = 1.0 + z * z / nf;
    let centre = (p + z * z / (2.0 * nf)) / denom;
    let half = z * (p * (1.0 - p) / nf + z * z / (4.0 * nf * nf)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// Positive fraction per equal-frequency bin of one factor.
pub fn response_curve(factor: &str, values: &[f64], labels: &[bool], bins: usize) -> ResponseCurve {
    let scheme = BinningScheme::equal_frequency(values, bins);
    let nb = scheme.num_bins();
    let mut acc = vec![(f64::INFINITY, f64::NEG_INFINITY, 0.0, 0usize, 0usize); nb];
    for (v, l) in values.iter().zip(labels) {
        let a = &mut acc[scheme.bin(*v)];
        a.0 = a.0.min(*v);
        a.1 = a.1.max(*v);
        a.2 += v;
        a.3 += 1;
        a.4 += *l as usize;
    }
    let points = acc
        .into_iter()
        .enumerate()
        .filter(|(_, a)| a.3 > 0)
        .map(|(bin, (low, high, sum, count, pos))| {
            let (ci_low, ci_high) = wilson_interval(pos, count);
            ResponsePoint {
                bin,
                low,
                high,
                mean_value: sum / count as f64,
                count,
                positive_fraction: pos as f64 / count as f64,
                ci_low,
                ci_high,
            }
        })
        .collect();
    ResponseCurve {
        factor: factor.to_string(),
        points,
    }
}

pub fn response_curves(ds: &Dataset, bins: usize) -> Vec<ResponseCurve> {
    let y = ds.labels();
    ds.feature_names
        .iter()
        .zip(columns(ds))
        .map(|(n, c)| response_curve(n, &c, &y, bins))
        .collect()
}

/// Tab-separated series, one row per (factor, bin).
pub fn response_curves_tsv(curves: &[ResponseCurve]) -> String {
    let mut out = String::from("factor\tbin\tlow\thigh\tmean_value\tcount\tpositive_fraction\tci_low\tci_high\n");
    for c in curves {
        for p in &c.points {
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
                c.factor, p.bin, p.low, p.high, p.mean_value, p.count, p.positive_fraction, p.ci_low, p.ci_high
            );
        }
    }
    out
}
