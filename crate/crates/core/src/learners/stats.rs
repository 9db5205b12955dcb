use serde::{Deserialize, Serialize};

use super::LearnerError;

/// Pearson correlation. Undefined when either side is constant.
pub fn pearson_cc(x: &[f64], y: &[f64]) -> Result<f64, LearnerError> {
    if x.len() != y.len() {
        return Err(LearnerError::Shape(format!("lengths {} and {}", x.len(), y.len())));
    }
    if x.len() < 2 {
        return Err(LearnerError::Undefined("fewer than two observations".into()));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx).powi(2);
        syy += (b - my).powi(2);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(LearnerError::Undefined("constant input".into()));
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Upper-exclusive cut points: a value lands in the bin equal to the number
/// of cuts strictly below it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinningScheme {
    pub cuts: Vec<f64>,
}

impl BinningScheme {
    /// Equal-frequency bins. A feature with at most `bins` distinct values
    /// gets one bin per value.
    pub fn equal_frequency(values: &[f64], bins: usize) -> Self {
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let mut distinct = sorted.clone();
        distinct.dedup();
        let Some(&max) = sorted.last() else {
            return BinningScheme { cuts: Vec::new() };
        };
        let mut cuts: Vec<f64> = if distinct.len() <= bins {
            distinct
        } else {
            let n = sorted.len();
            (1..bins).map(|i| sorted[(i * n).div_ceil(bins) - 1]).collect()
        };
        cuts.retain(|c| *c < max);
        cuts.dedup();
        BinningScheme { cuts }
    }

    pub fn num_bins(&self) -> usize {
        self.cuts.len() + 1
    }

    pub fn bin(&self, v: f64) -> usize {
        self.cuts.partition_point(|c| *c < v)
    }
}

fn entropy(counts: impl Iterator<Item = usize>, n: usize) -> f64 {
    counts
        .filter(|c| *c > 0)
        .map(|c| {
            let p = c as f64 / n as f64;
            -p * p.ln()
        })
        .sum()
}

/// Information gain ratio of a pre-binned feature. Returns 0 when the split
/// entropy is 0.
pub fn information_gain_ratio_binned(bins: &[usize], y: &[bool]) -> Result<f64, LearnerError> {
    if bins.len() != y.len() {
        return Err(LearnerError::Shape(format!("lengths {} and {}", bins.len(), y.len())));
    }
    let n = y.len();
    if n == 0 {
        return Err(LearnerError::Undefined("no observations".into()));
    }
    let nb = bins.iter().max().map_or(0, |m| m + 1);
    let mut table = vec![[0usize; 2]; nb];
    for (b, l) in bins.iter().zip(y) {
        table[*b][*l as usize] += 1;
    }
    let pos = y.iter().filter(|v| **v).count();
    let hy = entropy([n - pos, pos].into_iter(), n);
    let cond: f64 = table
        .iter()
        .map(|t| {
            let m = t[0] + t[1];
            if m == 0 { 0.0 } else { m as f64 / n as f64 * entropy(t.iter().copied(), m) }
        })
        .sum();
    let split = entropy(table.iter().map(|t| t[0] + t[1]), n);
    if split <= 0.0 {
        return Ok(0.0);
    }
    Ok(((hy - cond) / split).max(0.0))
}

/// Information gain ratio after equal-frequency binning into `bins` bins.
pub fn information_gain_ratio(x: &[f64], y: &[bool], bins: usize) -> Result<f64, LearnerError> {
    let scheme = BinningScheme::equal_frequency(x, bins);
    let b: Vec<usize> = x.iter().map(|v| scheme.bin(*v)).collect();
    information_gain_ratio_binned(&b, y)
}
