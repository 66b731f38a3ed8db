use rand::seq::SliceRandom;

use super::{sigmoid, softmax, Dataset, LinearModel, ModelKind, Parameters, TrainConfig};
use crate::error::{Error, Result};
use crate::numerics::matrix::dot;
use crate::numerics::seeded_rng;

/// Regularized hinge objective `λ/2 (‖w‖² + b²) + mean hinge`. The bias is
/// trained as an augmented constant feature, so it is regularized too.
pub fn svm_objective(w: &[f64], b: f64, x: &[Vec<f64>], y: &[usize], lambda: f64) -> f64 {
    let reg = 0.5 * lambda * (dot(w, w) + b * b);
    let hinge: f64 = x
        .iter()
        .zip(y)
        .map(|(xi, &yi)| {
            let s = if yi == 1 { 1.0 } else { -1.0 };
            (1.0 - s * (dot(w, xi) + b)).max(0.0)
        })
        .sum();
    reg + hinge / x.len() as f64
}

pub fn train_svm(data: &Dataset<'_>, config: &TrainConfig) -> Result<LinearModel> {
    train_svm_traced(data, config).map(|(m, _)| m)
}

/// Pegasos with step `1/(λt)` and projection onto the `1/sqrt(λ)` ball.
/// Also returns the objective after every epoch.
pub fn train_svm_traced(data: &Dataset<'_>, config: &TrainConfig) -> Result<(LinearModel, Vec<f64>)> {
    config.validate()?;
    data.binary()?;
    let d = data.dim();
    let lambda = config.lambda;
    let radius = 1.0 / lambda.sqrt();
    let mut rng = seeded_rng(config.seed, "models/svm");
    let mut order: Vec<usize> = (0..data.x.len()).collect();
    let mut w = vec![0.0; d];
    let mut b = 0.0;
    let mut t = 0u64;
    let mut trace = Vec::with_capacity(config.epochs);
    for _ in 0..config.epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            t += 1;
            let eta = 1.0 / (lambda * t as f64);
            let xi = &data.x[i];
            let s = if data.y[i] == 1 { 1.0 } else { -1.0 };
            let margin = s * (dot(&w, xi) + b);
            let shrink = 1.0 - eta * lambda;
            w.iter_mut().for_each(|v| *v *= shrink);
            b *= shrink;
            if margin < 1.0 {
                for (wj, xj) in w.iter_mut().zip(xi) {
                    *wj += eta * s * xj;
                }
                b += eta * s;
            }
            let norm = (dot(&w, &w) + b * b).sqrt();
            if norm > radius {
                let scale = radius / norm;
                w.iter_mut().for_each(|v| *v *= scale);
                b *= scale;
            }
        }
        trace.push(svm_objective(&w, b, data.x, data.y, lambda));
    }
    finite(&w, b)?;
    let model = LinearModel {
        kind: ModelKind::Svm,
        n_classes: 2,
        params: Parameters::Linear {
            weights: vec![w],
            bias: vec![b],
        },
        scaling: None,
        schema_fingerprint: data.schema.fingerprint.clone(),
        config: config.clone(),
    };
    Ok((model, trace))
}

fn finite(w: &[f64], b: f64) -> Result<()> {
    if w.iter().all(|v| v.is_finite()) && b.is_finite() {
        Ok(())
    } else {
        Err(Error::numeric("training diverged to non-finite parameters"))
    }
}

fn log1p_exp(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

/// Mean negative log-likelihood plus `λ/2 ‖w‖²` (bias unregularized) for
/// parameters laid out as `[w_0 .. w_{d-1}, b]`, with its gradient.
pub fn logistic_objective(params: &[f64], x: &[Vec<f64>], y: &[usize], lambda: f64) -> (f64, Vec<f64>) {
    let d = params.len() - 1;
    let (w, b) = (&params[..d], params[d]);
    let n = x.len() as f64;
    let mut loss = 0.0;
    let mut grad = vec![0.0; d + 1];
    for (xi, &yi) in x.iter().zip(y) {
        let z = dot(w, xi) + b;
        let target = if yi == 1 { 1.0 } else { 0.0 };
        loss += log1p_exp(z) - target * z;
        let r = sigmoid(z) - target;
        for (g, v) in grad.iter_mut().zip(xi) {
            *g += r * v;
        }
        grad[d] += r;
    }
    loss /= n;
    grad.iter_mut().for_each(|g| *g /= n);
    loss += 0.5 * lambda * dot(w, w);
    for (g, wj) in grad.iter_mut().zip(w) {
        *g += lambda * wj;
    }
    (loss, grad)
}

/// Softmax cross-entropy plus `λ/2 ‖W‖²` for parameters laid out class by
/// class as `[w_c0 .. w_c(d-1), b_c]`, with its gradient.
pub fn maxent_objective(
    params: &[f64],
    classes: usize,
    x: &[Vec<f64>],
    y: &[usize],
    lambda: f64,
) -> (f64, Vec<f64>) {
    let stride = params.len() / classes;
    let d = stride - 1;
    let n = x.len() as f64;
    let mut loss = 0.0;
    let mut grad = vec![0.0; params.len()];
    let mut scores = vec![0.0; classes];
    for (xi, &yi) in x.iter().zip(y) {
        for (c, s) in scores.iter_mut().enumerate() {
            let row = &params[c * stride..(c + 1) * stride];
            *s = dot(&row[..d], xi) + row[d];
        }
        let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lse = max + scores.iter().map(|s| (s - max).exp()).sum::<f64>().ln();
        loss += lse - scores[yi];
        let probs = softmax(&scores);
        for c in 0..classes {
            let r = probs[c] - if c == yi { 1.0 } else { 0.0 };
            let g = &mut grad[c * stride..(c + 1) * stride];
            for (gj, v) in g[..d].iter_mut().zip(xi) {
                *gj += r * v;
            }
            g[d] += r;
        }
    }
    loss /= n;
    grad.iter_mut().for_each(|g| *g /= n);
    for c in 0..classes {
        for j in 0..d {
            let k = c * stride + j;
            loss += 0.5 * lambda * params[k] * params[k];
            grad[k] += lambda * params[k];
        }
    }
    (loss, grad)
}

/// Seeded mini-batch gradient descent over `objective(params, batch_x, batch_y)`.
fn minibatch_descent<F>(data: &Dataset<'_>, config: &TrainConfig, label: &str, dim: usize, objective: F) -> Result<Vec<f64>>
where
    F: Fn(&[f64], &[Vec<f64>], &[usize]) -> (f64, Vec<f64>),
{
    let mut rng = seeded_rng(config.seed, label);
    let mut order: Vec<usize> = (0..data.x.len()).collect();
    let mut params = vec![0.0; dim];
    let mut bx = Vec::with_capacity(config.batch_size);
    let mut by = Vec::with_capacity(config.batch_size);
    for epoch in 0..config.epochs {
        let step = config.learning_rate / (1.0 + epoch as f64).sqrt();
        order.shuffle(&mut rng);
        for chunk in order.chunks(config.batch_size) {
            bx.clear();
            by.clear();
            for &i in chunk {
                bx.push(data.x[i].clone());
                by.push(data.y[i]);
            }
            let (_, grad) = objective(&params, &bx, &by);
            for (p, g) in params.iter_mut().zip(&grad) {
                *p -= step * g;
            }
        }
    }
    if params.iter().any(|p| !p.is_finite()) {
        return Err(Error::numeric("training diverged to non-finite parameters"));
    }
    Ok(params)
}

pub fn train_logistic(data: &Dataset<'_>, config: &TrainConfig) -> Result<LinearModel> {
    config.validate()?;
    data.binary()?;
    let d = data.dim();
    let params = minibatch_descent(data, config, "models/logistic", d + 1, |p, x, y| {
        logistic_objective(p, x, y, config.lambda)
    })?;
    Ok(LinearModel {
        kind: ModelKind::Logistic,
        n_classes: 2,
        params: Parameters::Linear {
            weights: vec![params[..d].to_vec()],
            bias: vec![params[d]],
        },
        scaling: None,
        schema_fingerprint: data.schema.fingerprint.clone(),
        config: config.clone(),
    })
}

pub fn train_maxent(data: &Dataset<'_>, config: &TrainConfig) -> Result<LinearModel> {
    config.validate()?;
    let classes = data.class_count()?;
    let d = data.dim();
    let params = minibatch_descent(data, config, "models/maxent", classes * (d + 1), |p, x, y| {
        maxent_objective(p, classes, x, y, config.lambda)
    })?;
    let rows: Vec<&[f64]> = params.chunks(d + 1).collect();
    Ok(LinearModel {
        kind: ModelKind::Maxent,
        n_classes: classes,
        params: Parameters::Linear {
            weights: rows.iter().map(|r| r[..d].to_vec()).collect(),
            bias: rows.iter().map(|r| r[d]).collect(),
        },
        scaling: None,
        schema_fingerprint: data.schema.fingerprint.clone(),
        config: config.clone(),
    })
}
