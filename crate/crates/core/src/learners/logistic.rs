use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{check_labels, check_matrix, LearnerError, LearnerKind, ModelParams, Standardizer, TrainedModel};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticConfig {
    pub l2: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for LogisticConfig {
    fn default() -> Self {
        LogisticConfig {
            l2: 1e-4,
            tol: 1e-8,
            max_iter: 500,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticParams {
    pub intercept: f64,
    pub coef: Vec<f64>,
    pub l2: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl LogisticParams {
    fn margin(&self, z: &[f64]) -> f64 {
        self.intercept + self.coef.iter().zip(z).map(|(w, v)| w * v).sum::<f64>()
    }

    pub(crate) fn proba(&self, z: &[f64]) -> f64 {
        sigmoid(self.margin(z))
    }
}

fn sigmoid(s: f64) -> f64 {
    if s >= 0.0 {
        1.0 / (1.0 + (-s).exp())
    } else {
        let e = s.exp();
        e / (1.0 + e)
    }
}

fn softplus(s: f64) -> f64 {
    s.max(0.0) + (-s.abs()).exp().ln_1p()
}

/// Mean negative log-likelihood plus the L2 penalty on non-intercept weights,
/// evaluated on standardized rows.
pub fn logistic_objective(z: &[Vec<f64>], y: &[bool], params: &LogisticParams) -> f64 {
    let nll: f64 = z
        .iter()
        .zip(y)
        .map(|(row, &label)| {
            let s = params.margin(row);
            if label { softplus(-s) } else { softplus(s) }
        })
        .sum::<f64>()
        / z.len() as f64;
    nll + 0.5 * params.l2 * params.coef.iter().map(|w| w * w).sum::<f64>()
}

struct Problem {
    x: DMatrix<f64>,
    y: DVector<f64>,
    l2: f64,
}

impl Problem {
    fn objective(&self, beta: &DVector<f64>) -> f64 {
        let s = &self.x * beta;
        let n = self.x.nrows() as f64;
        let nll: f64 = s
            .iter()
            .zip(self.y.iter())
            .map(|(s, y)| if *y > 0.5 { softplus(-s) } else { softplus(*s) })
            .sum::<f64>()
            / n;
        nll + 0.5 * self.l2 * beta.rows(1, beta.len() - 1).norm_squared()
    }

    fn gradient_hessian(&self, beta: &DVector<f64>) -> (DVector<f64>, DMatrix<f64>) {
        let n = self.x.nrows() as f64;
        let p: DVector<f64> = (&self.x * beta).map(sigmoid);
        let mut g = self.x.transpose() * (&p - &self.y) / n;
        let w = p.map(|v| (v * (1.0 - v)).max(1e-300));
        let xw = DMatrix::from_fn(self.x.nrows(), self.x.ncols(), |i, j| self.x[(i, j)] * w[i]);
        let mut h = self.x.transpose() * xw / n;
        for j in 1..beta.len() {
            g[j] += self.l2 * beta[j];
            h[(j, j)] += self.l2;
        }
        (g, h)
    }
}

fn newton_direction(h: &DMatrix<f64>, g: &DVector<f64>) -> DVector<f64> {
    let mut jitter = 0.0;
    for _ in 0..12 {
        let mut hj = h.clone();
        for j in 0..hj.nrows() {
            hj[(j, j)] += jitter;
        }
        if let Some(ch) = hj.cholesky() {
            return -ch.solve(g);
        }
        jitter = if jitter == 0.0 { 1e-10 } else { jitter * 10.0 };
    }
    -g.clone()
}

pub fn fit_logistic_regression(
    x: &[Vec<f64>],
    y: &[bool],
    names: &[String],
    cfg: &LogisticConfig,
) -> Result<TrainedModel, LearnerError> {
    let d = check_matrix(x)?;
    check_labels(x, y)?;
    let s = Standardizer::fit(x)?;
    let z = s.transform(x);
    let active = s.active();
    let n = x.len();
    let prob = Problem {
        x: DMatrix::from_fn(n, active.len() + 1, |i, c| if c == 0 { 1.0 } else { z[i][active[c - 1]] }),
        y: DVector::from_iterator(n, y.iter().map(|v| if *v { 1.0 } else { 0.0 })),
        l2: cfg.l2,
    };

    let mut beta = DVector::zeros(active.len() + 1);
    let pos = y.iter().filter(|v| **v).count() as f64 / n as f64;
    beta[0] = (pos / (1.0 - pos)).ln();
    let mut obj = prob.objective(&beta);
    let mut converged = false;
    let mut iterations = 0;
    while iterations < cfg.max_iter {
        let (g, h) = prob.gradient_hessian(&beta);
        if g.amax() < cfg.tol {
            converged = true;
            break;
        }
        iterations += 1;
        let dir = newton_direction(&h, &g);
        let slope = g.dot(&dir);
        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            let cand = &beta + &dir * step;
            let cand_obj = prob.objective(&cand);
            if cand_obj <= obj + 1e-4 * step * slope {
                beta = cand;
                obj = cand_obj;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            converged = g.amax() < cfg.tol.sqrt();
            break;
        }
    }
    if !converged {
        log::warn!("logistic regression stopped after {iterations} iterations without reaching tolerance");
    }

    let mut coef = vec![0.0; d];
    for (c, j) in active.iter().enumerate() {
        coef[*j] = beta[c + 1];
    }
    let params = LogisticParams {
        intercept: beta[0],
        coef,
        l2: cfg.l2,
        iterations,
        converged,
    };
    TrainedModel::new(LearnerKind::LogisticRegression, names, s, 0, ModelParams::Logistic(params))
}
