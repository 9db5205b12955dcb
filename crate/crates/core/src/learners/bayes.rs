use serde::{Deserialize, Serialize};

use super::{check_labels, check_matrix, LearnerError, LearnerKind, ModelParams, Standardizer, TrainedModel};

pub const VARIANCE_FLOOR: f64 = 1e-9;

/// Gaussian class-conditional densities; index 0 is the negative class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NaiveBayesParams {
    pub log_prior: [f64; 2],
    pub means: [Vec<f64>; 2],
    pub vars: [Vec<f64>; 2],
    pub used: Vec<bool>,
}

impl NaiveBayesParams {
    fn log_joint(&self, class: usize, z: &[f64]) -> f64 {
        let mut lp = self.log_prior[class];
        for (j, v) in z.iter().enumerate() {
            if self.used[j] {
                let var = self.vars[class][j];
                let d = v - self.means[class][j];
                lp -= 0.5 * ((2.0 * std::f64::consts::PI * var).ln() + d * d / var);
            }
        }
        lp
    }

    pub(crate) fn proba(&self, z: &[f64]) -> f64 {
        let l0 = self.log_joint(0, z);
        let l1 = self.log_joint(1, z);
        1.0 / (1.0 + (l0 - l1).exp())
    }
}

pub fn fit_naive_bayes(x: &[Vec<f64>], y: &[bool], names: &[String]) -> Result<TrainedModel, LearnerError> {
    let d = check_matrix(x)?;
    check_labels(x, y)?;
    let s = Standardizer::fit(x)?;
    let z = s.transform(x);
    let mut counts = [0usize; 2];
    let mut means = [vec![0.0; d], vec![0.0; d]];
    for (row, &label) in z.iter().zip(y) {
        let c = label as usize;
        counts[c] += 1;
        for j in 0..d {
            means[c][j] += row[j];
        }
    }
    for c in 0..2 {
        means[c].iter_mut().for_each(|m| *m /= counts[c] as f64);
    }
    let mut vars = [vec![0.0; d], vec![0.0; d]];
    for (row, &label) in z.iter().zip(y) {
        let c = label as usize;
        for j in 0..d {
            vars[c][j] += (row[j] - means[c][j]).powi(2);
        }
    }
    for c in 0..2 {
        vars[c].iter_mut().for_each(|v| *v = (*v / counts[c] as f64).max(VARIANCE_FLOOR));
    }
    let n = x.len() as f64;
    let params = NaiveBayesParams {
        log_prior: [(counts[0] as f64 / n).ln(), (counts[1] as f64 / n).ln()],
        means,
        vars,
        used: s.constant.iter().map(|c| !c).collect(),
    };
    TrainedModel::new(LearnerKind::NaiveBayes, names, s, 0, ModelParams::NaiveBayes(params))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_classes_give_even_odds_at_midpoint() {
        let x = vec![vec![-1.0], vec![-1.0], vec![1.0], vec![1.0]];
        let y = vec![false, false, true, true];
        let m = fit_naive_bayes(&x, &y, &["f".to_string()]).unwrap();
        assert!((m.predict_proba(&[0.0]).unwrap() - 0.5).abs() < 1e-12);
        assert!(m.predict_proba(&[1.0]).unwrap() > 0.999);
    }

    #[test]
    fn constant_feature_is_ignored() {
        let x = vec![vec![0.0, 7.0], vec![1.0, 7.0], vec![2.0, 7.0], vec![3.0, 7.0]];
        let y = vec![false, false, true, true];
        let m = fit_naive_bayes(&x, &y, &["a".to_string(), "b".to_string()]).unwrap();
        let p1 = m.predict_proba(&[1.5, 7.0]).unwrap();
        let p2 = m.predict_proba(&[1.5, 100.0]).unwrap();
        assert_eq!(p1, p2);
        assert!((p1 - 0.5).abs() < 1e-12);
    }
}
