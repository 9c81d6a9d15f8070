//! Fairness reports and the downstream-classifier study.

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Matrix, Subspace};
use crate::objectives::{disparity_error, group_loss, FairPcaProblem};

/// Loss and disparity summary of a subspace against a baseline.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FairnessReport {
    pub target_dim: usize,
    pub per_group_losses: Vec<f64>,
    pub per_group_disparity: Vec<f64>,
    pub avg_disparity: f64,
    pub total_loss: f64,
    pub baseline_per_group_losses: Vec<f64>,
    pub baseline_per_group_disparity: Vec<f64>,
    pub baseline_total_loss: f64,
    pub baseline_avg_disparity: f64,
    /// Mean of `|E_i − E_j|` over unordered pairs; 0 for a single group.
    pub avg_pairwise_gap: f64,
    pub baseline_avg_pairwise_gap: f64,
}

struct Summary {
    losses: Vec<f64>,
    disparity: Vec<f64>,
    total: f64,
    avg: f64,
    gap: f64,
}

fn summarize(problem: &FairPcaProblem, u: &Subspace) -> Result<Summary> {
    if u.ambient_dim() != problem.ambient_dim() || u.target_dim() != problem.target_dim() {
        return Err(Error::InvalidInput(format!(
            "subspace is {}x{}, problem is {}x{}",
            u.ambient_dim(),
            u.target_dim(),
            problem.ambient_dim(),
            problem.target_dim()
        )));
    }
    let k = problem.group_count();
    let losses = (0..k).map(|i| group_loss(problem, i, u)).collect::<Result<Vec<_>>>()?;
    let disparity = (0..k).map(|i| disparity_error(problem, i, u)).collect::<Result<Vec<_>>>()?;
    let avg = disparity.iter().sum::<f64>() / k as f64;
    let gap = average_pairwise_gap(&disparity);
    Ok(Summary {
        total: losses.iter().sum(),
        losses,
        disparity,
        avg,
        gap,
    })
}

/// Mean absolute difference over unordered pairs.
pub fn average_pairwise_gap(values: &[f64]) -> f64 {
    let k = values.len();
    if k < 2 {
        return 0.0;
    }
    let mut sum = 0.0;
    for i in 0..k {
        for j in i + 1..k {
            sum += (values[i] - values[j]).abs();
        }
    }
    sum / (k * (k - 1) / 2) as f64
}

pub fn fairness_report(
    problem: &FairPcaProblem,
    u_fair: &Subspace,
    u_baseline: &Subspace,
) -> Result<FairnessReport> {
    let fair = summarize(problem, u_fair)?;
    let base = summarize(problem, u_baseline)?;
    Ok(FairnessReport {
        target_dim: problem.target_dim(),
        per_group_losses: fair.losses,
        per_group_disparity: fair.disparity,
        avg_disparity: fair.avg,
        total_loss: fair.total,
        baseline_per_group_losses: base.losses,
        baseline_per_group_disparity: base.disparity,
        baseline_total_loss: base.total,
        baseline_avg_disparity: base.avg,
        avg_pairwise_gap: fair.gap,
        baseline_avg_pairwise_gap: base.gap,
    })
}

impl FairnessReport {
    /// One `key=value` line per metric; vectors are comma separated.
    pub fn to_key_value(&self) -> String {
        fn list(v: &[f64]) -> String {
            v.iter().map(|x| format!("{x:.17e}")).collect::<Vec<_>>().join(",")
        }
        let mut out = String::new();
        let _ = writeln!(out, "target_dim={}", self.target_dim);
        let _ = writeln!(out, "total_loss={:.17e}", self.total_loss);
        let _ = writeln!(out, "avg_disparity={:.17e}", self.avg_disparity);
        let _ = writeln!(out, "avg_pairwise_gap={:.17e}", self.avg_pairwise_gap);
        let _ = writeln!(out, "per_group_losses={}", list(&self.per_group_losses));
        let _ = writeln!(out, "per_group_disparity={}", list(&self.per_group_disparity));
        let _ = writeln!(out, "baseline_total_loss={:.17e}", self.baseline_total_loss);
        let _ = writeln!(out, "baseline_avg_disparity={:.17e}", self.baseline_avg_disparity);
        let _ = writeln!(out, "baseline_avg_pairwise_gap={:.17e}", self.baseline_avg_pairwise_gap);
        let _ = writeln!(out, "baseline_per_group_losses={}", list(&self.baseline_per_group_losses));
        let _ = writeln!(
            out,
            "baseline_per_group_disparity={}",
            list(&self.baseline_per_group_disparity)
        );
        out
    }
}

/// Hyperparameters of the linear hinge-loss classifier.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassifierConfig {
    pub lambda: f64,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        Self {
            lambda: 1e-4,
            epochs: 50,
            seed: 0,
        }
    }
}

/// Linear decision rule `sign(wᵀz + b)` in the caller's feature space.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassifierModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub config: ClassifierConfig,
}

impl ClassifierModel {
    pub fn decision(&self, z: &[f64]) -> f64 {
        self.weights.iter().zip(z).map(|(w, x)| w * x).sum::<f64>() + self.bias
    }

    /// `+1` when the score is positive, else `-1`.
    pub fn predict(&self, z: &[f64]) -> i8 {
        if self.decision(z) > 0.0 {
            1
        } else {
            -1
        }
    }

    pub fn predict_all(&self, z: &Matrix) -> Result<Vec<i8>> {
        if z.ncols() != self.weights.len() {
            return Err(Error::Dimension(format!(
                "model expects {} features, got {}",
                self.weights.len(),
                z.ncols()
            )));
        }
        Ok((0..z.nrows())
            .map(|i| {
                let row: Vec<f64> = z.row(i).iter().copied().collect();
                self.predict(&row)
            })
            .collect())
    }
}

/// Regularized hinge objective `λ/2‖w‖² + mean(max(0, 1 − y(wᵀz + b)))`.
pub fn hinge_objective(model: &ClassifierModel, z: &Matrix, y: &[i8]) -> f64 {
    let n = z.nrows();
    let hinge: f64 = (0..n)
        .map(|i| {
            let row: Vec<f64> = z.row(i).iter().copied().collect();
            (1.0 - f64::from(y[i]) * model.decision(&row)).max(0.0)
        })
        .sum();
    0.5 * model.config.lambda * model.weights.iter().map(|w| w * w).sum::<f64>() + hinge / n as f64
}

fn check_labels(y: &[i8], n: usize) -> Result<()> {
    if y.len() != n {
        return Err(Error::Dimension(format!("{} labels for {n} rows", y.len())));
    }
    if let Some(bad) = y.iter().find(|&&v| v != 1 && v != -1) {
        return Err(Error::InvalidInput(format!("labels must be -1 or +1, found {bad}")));
    }
    Ok(())
}

/// Pegasos-style stochastic subgradient descent on the hinge loss.
///
/// Features are z-scored internally and the bias is learned as the weight of
/// a constant feature. The returned model averages the iterates of the final
/// epoch and is expressed in the original feature space.
pub fn train_linear_classifier(
    z: &Matrix,
    y: &[i8],
    config: &ClassifierConfig,
) -> Result<ClassifierModel> {
    let (n, r) = z.shape();
    check_labels(y, n)?;
    if n < 2 || !(y.contains(&1) && y.contains(&-1)) {
        return Err(Error::DegenerateLabels(
            "training needs at least two rows and both classes".into(),
        ));
    }
    if !(config.lambda > 0.0) || config.epochs == 0 {
        return Err(Error::Config("classifier needs lambda > 0 and epochs >= 1".into()));
    }
    if z.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("features must be finite".into()));
    }

    let mean: Vec<f64> = (0..r).map(|j| z.column(j).mean()).collect();
    let scale: Vec<f64> = (0..r)
        .map(|j| {
            let var = z.column(j).iter().map(|v| (v - mean[j]).powi(2)).sum::<f64>() / n as f64;
            if var > 0.0 {
                var.sqrt()
            } else {
                1.0
            }
        })
        .collect();
    // Standardized rows with a trailing constant feature for the bias.
    let x: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut row: Vec<f64> = (0..r).map(|j| (z[(i, j)] - mean[j]) / scale[j]).collect();
            row.push(1.0);
            row
        })
        .collect();

    let lambda = config.lambda;
    let radius = 1.0 / lambda.sqrt();
    let mut w = vec![0.0; r + 1];
    let mut avg = vec![0.0; r + 1];
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut t = 0usize;
    for epoch in 0..config.epochs {
        order.shuffle(&mut rng);
        let last = epoch + 1 == config.epochs;
        for &i in &order {
            t += 1;
            let eta = 1.0 / (lambda * t as f64);
            let yi = f64::from(y[i]);
            let margin = yi * dot(&w, &x[i]);
            let shrink = 1.0 - eta * lambda;
            for wj in w.iter_mut() {
                *wj *= shrink;
            }
            if margin < 1.0 {
                for (wj, xj) in w.iter_mut().zip(&x[i]) {
                    *wj += eta * yi * xj;
                }
            }
            let norm = dot(&w, &w).sqrt();
            if norm > radius {
                let s = radius / norm;
                w.iter_mut().for_each(|wj| *wj *= s);
            }
            if last {
                for (a, wj) in avg.iter_mut().zip(&w) {
                    *a += wj;
                }
            }
        }
    }
    avg.iter_mut().for_each(|a| *a /= n as f64);

    let weights: Vec<f64> = (0..r).map(|j| avg[j] / scale[j]).collect();
    let bias = avg[r] - (0..r).map(|j| weights[j] * mean[j]).sum::<f64>();
    Ok(ClassifierModel {
        weights,
        bias,
        config: *config,
    })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Accuracy and true-positive rate of one group.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupRates {
    pub group: usize,
    pub size: usize,
    pub positives: usize,
    pub accuracy: f64,
    /// `None` when the group has no positive samples.
    pub tpr: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupMetrics {
    pub groups: Vec<GroupRates>,
    pub overall_accuracy: f64,
}

impl GroupMetrics {
    /// `max − min` of the defined per-group TPRs.
    pub fn tpr_spread(&self) -> Option<f64> {
        let tprs: Vec<f64> = self.groups.iter().filter_map(|g| g.tpr).collect();
        if tprs.len() < 2 {
            return None;
        }
        let max = tprs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = tprs.iter().copied().fold(f64::INFINITY, f64::min);
        Some(max - min)
    }
}

/// Per-group confusion rates from predictions; `group_count` fixes `k`.
pub fn group_metrics_from_predictions(
    predictions: &[i8],
    y: &[i8],
    group_ids: &[usize],
    group_count: usize,
) -> Result<GroupMetrics> {
    let n = predictions.len();
    check_labels(y, n)?;
    if group_ids.len() != n {
        return Err(Error::Dimension(format!("{} group ids for {n} rows", group_ids.len())));
    }
    let mut size = vec![0usize; group_count];
    let mut correct = vec![0usize; group_count];
    let mut pos = vec![0usize; group_count];
    let mut tp = vec![0usize; group_count];
    for ((&p, &t), &g) in predictions.iter().zip(y).zip(group_ids) {
        if g >= group_count {
            return Err(Error::Range {
                index: g,
                len: group_count,
            });
        }
        size[g] += 1;
        correct[g] += usize::from(p == t);
        if t == 1 {
            pos[g] += 1;
            tp[g] += usize::from(p == 1);
        }
    }
    if let Some(empty) = size.iter().position(|&s| s == 0) {
        return Err(Error::Range {
            index: empty,
            len: group_count,
        });
    }
    let groups = (0..group_count)
        .map(|g| GroupRates {
            group: g,
            size: size[g],
            positives: pos[g],
            accuracy: correct[g] as f64 / size[g] as f64,
            tpr: (pos[g] > 0).then(|| tp[g] as f64 / pos[g] as f64),
        })
        .collect();
    Ok(GroupMetrics {
        groups,
        overall_accuracy: correct.iter().sum::<usize>() as f64 / n as f64,
    })
}

pub fn group_metrics(
    model: &ClassifierModel,
    z: &Matrix,
    y: &[i8],
    group_ids: &[usize],
    group_count: usize,
) -> Result<GroupMetrics> {
    group_metrics_from_predictions(&model.predict_all(z)?, y, group_ids, group_count)
}

/// `|TPR_a − TPR_b|` for exactly two groups, computed from predictions.
pub fn deo_from_predictions(predictions: &[i8], y: &[i8], group_ids: &[usize]) -> Result<f64> {
    let mut present: Vec<usize> = group_ids.to_vec();
    present.sort_unstable();
    present.dedup();
    if present.len() != 2 {
        return Err(Error::InvalidInput(format!(
            "equality of opportunity needs exactly 2 groups, found {}",
            present.len()
        )));
    }
    let remap: Vec<usize> = group_ids
        .iter()
        .map(|g| present.iter().position(|p| p == g).expect("present"))
        .collect();
    let metrics = group_metrics_from_predictions(predictions, y, &remap, 2)?;
    let rate = |i: usize| {
        metrics.groups[i].tpr.ok_or_else(|| {
            Error::UndefinedRate(format!("group {} has no positive samples", present[i]))
        })
    };
    Ok((rate(0)? - rate(1)?).abs())
}

/// Difference of equality of opportunity of `model` on the given samples.
pub fn deo(model: &ClassifierModel, z: &Matrix, y: &[i8], group_ids: &[usize]) -> Result<f64> {
    deo_from_predictions(&model.predict_all(z)?, y, group_ids)
}
