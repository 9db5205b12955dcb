use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{check_matrix, LearnerError, LearnerKind, ModelParams, Standardizer, TrainedModel};

/// Ordinary least squares on standardized features. `dropped` marks columns
/// removed as linearly dependent on earlier ones.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearParams {
    pub intercept: f64,
    pub coef: Vec<f64>,
    pub dropped: Vec<bool>,
}

impl LinearParams {
    pub(crate) fn score(&self, z: &[f64]) -> f64 {
        self.intercept + self.coef.iter().zip(z).map(|(w, v)| w * v).sum::<f64>()
    }

    /// Intercept and coefficients in the original feature units.
    pub fn unstandardized(&self, s: &Standardizer) -> (f64, Vec<f64>) {
        let mut intercept = self.intercept;
        let coef: Vec<f64> = (0..self.coef.len())
            .map(|j| {
                if s.constant[j] {
                    0.0
                } else {
                    let w = self.coef[j] / s.stds[j];
                    intercept -= w * s.means[j];
                    w
                }
            })
            .collect();
        (intercept, coef)
    }
}

const RANK_TOL: f64 = 1e-9;

fn solve_ls(x: &DMatrix<f64>, y: &DVector<f64>) -> Option<DVector<f64>> {
    let qr = x.clone().qr();
    let qty = qr.q().transpose() * y;
    qr.r().solve_upper_triangular(&qty)
}

pub fn fit_linear_regression(x: &[Vec<f64>], y: &[f64], names: &[String]) -> Result<TrainedModel, LearnerError> {
    let d = check_matrix(x)?;
    if x.len() != y.len() {
        return Err(LearnerError::Shape(format!("{} rows but {} targets", x.len(), y.len())));
    }
    if x.len() < d {
        return Err(LearnerError::Shape(format!("{} rows for {d} columns", x.len())));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(LearnerError::Shape("non-finite target".into()));
    }
    let s = Standardizer::fit(x)?;
    let z = s.transform(x);
    let n = x.len();
    let active = s.active();
    let design =
        |cols: &[usize]| DMatrix::from_fn(n, cols.len(), |i, c| z[i][cols[c]]);
    // Standardized columns are centered, so the intercept is the target mean
    // and the slopes come from the centered target.
    let intercept = y.iter().sum::<f64>() / n as f64;
    let yc = DVector::from_iterator(n, y.iter().map(|v| v - intercept));

    let kept: Vec<usize> = if active.is_empty() {
        Vec::new()
    } else {
        let r = design(&active).qr().r();
        let scale = (0..r.nrows().min(r.ncols())).map(|i| r[(i, i)].abs()).fold(0.0, f64::max);
        active
            .iter()
            .enumerate()
            .filter(|(c, _)| *c < r.nrows() && r[(*c, *c)].abs() > RANK_TOL * scale.max(1.0))
            .map(|(_, j)| *j)
            .collect()
    };

    let mut coef = vec![0.0; d];
    let mut dropped = vec![false; d];
    if !kept.is_empty() {
        let beta = solve_ls(&design(&kept), &yc).ok_or_else(|| LearnerError::Undefined("singular design".into()))?;
        for (c, j) in kept.iter().enumerate() {
            coef[*j] = beta[c];
        }
    }
    for j in s.active() {
        dropped[j] = !kept.contains(&j);
        if dropped[j] {
            log::warn!("dropping linearly dependent feature {}", names.get(j).map_or("?", String::as_str));
        }
    }
    TrainedModel::new(
        LearnerKind::LinearRegression,
        names,
        s,
        0,
        ModelParams::Linear(LinearParams { intercept, coef, dropped }),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearPrediction {
    pub value: f64,
    pub raw: f64,
    pub clipped: bool,
}

/// Regression prediction floored at the author's current h-index.
pub fn predict_linear(model: &TrainedModel, row: &[f64], current_h: f64) -> Result<LinearPrediction, LearnerError> {
    let raw = model.predict_value(row)?;
    let clipped = raw < current_h;
    Ok(LinearPrediction {
        value: if clipped { current_h } else { raw },
        raw,
        clipped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(d: usize) -> Vec<String> {
        (0..d).map(|j| format!("f{j}")).collect()
    }

    #[test]
    fn recovers_exact_plane() {
        let x: Vec<Vec<f64>> = (0..20).map(|i| vec![i as f64, ((i * 7) % 5) as f64]).collect();
        let y: Vec<f64> = x.iter().map(|r| 1.5 + 2.0 * r[0] - 0.5 * r[1]).collect();
        let m = fit_linear_regression(&x, &y, &names(2)).unwrap();
        let ModelParams::Linear(p) = &m.params else { panic!() };
        let (b0, w) = p.unstandardized(&m.standardization);
        assert!((b0 - 1.5).abs() < 1e-9 && (w[0] - 2.0).abs() < 1e-9 && (w[1] + 0.5).abs() < 1e-9);
    }

    #[test]
    fn drops_duplicate_and_constant_columns() {
        let x: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64, 2.0 * i as f64, 3.0]).collect();
        let y: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let m = fit_linear_regression(&x, &y, &names(3)).unwrap();
        let ModelParams::Linear(p) = &m.params else { panic!() };
        assert_eq!(p.dropped, vec![false, true, false]);
        assert_eq!(p.coef[1], 0.0);
        assert_eq!(p.coef[2], 0.0);
        assert!((m.predict_value(&[4.0, 8.0, 3.0]).unwrap() - 4.0).abs() < 1e-9);
    }

    #[test]
    fn clips_below_current_h() {
        let x: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64]).collect();
        let y: Vec<f64> = (0..10).map(|i| 10.0 - i as f64).collect();
        let m = fit_linear_regression(&x, &y, &names(1)).unwrap();
        let p = predict_linear(&m, &[9.0], 4.0).unwrap();
        assert!(p.clipped && p.value == 4.0 && (p.raw - 1.0).abs() < 1e-9);
        assert!(!predict_linear(&m, &[0.0], 4.0).unwrap().clipped);
    }
}
