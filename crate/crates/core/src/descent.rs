//! Common descent direction for several objectives.
//!
//! The direction is `D = -Σ λ_i G_i` where `λ` is the minimum-norm point of
//! the convex hull of the gradients, found by minimizing `½ λᵀQλ` over the
//! probability simplex with `Q_ij = ⟨G_i, G_j⟩_F`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Frobenius norms at or below this are treated as zero by [`normalize_gradients`].
pub const ZERO_GRADIENT_TOL: f64 = 1e-14;

/// Frank–Wolfe iteration cap for `m > 2`. Cheap per step (`O(m²)`), and
/// degenerate faces where the origin lies in the hull need tens of thousands.
pub const MAX_QP_ITERS: usize = 50_000;

/// Relative Frank–Wolfe gap at which the QP stops.
pub const QP_GAP_TOL: f64 = 1e-12;

const SIMPLEX_TOL: f64 = 1e-10;
const SUPPORT_TOL: f64 = 1e-15;

/// A point of the probability simplex.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexWeights(Vec<f64>);

impl SimplexWeights {
    /// Validates non-negativity and unit sum (within `1e-10`).
    pub fn new(lambda: Vec<f64>) -> Result<Self> {
        if lambda.is_empty() {
            return Err(Error::InvalidInput("simplex weights cannot be empty".into()));
        }
        if lambda.iter().any(|&l| !l.is_finite() || l < -SIMPLEX_TOL) {
            return Err(Error::InvalidInput(format!("weights must be non-negative: {lambda:?}")));
        }
        let sum: f64 = lambda.iter().sum();
        if (sum - 1.0).abs() > SIMPLEX_TOL {
            return Err(Error::InvalidInput(format!("weights sum to {sum}, not 1")));
        }
        Ok(Self(lambda))
    }

    pub fn uniform(m: usize) -> Self {
        assert!(m > 0, "simplex dimension must be positive");
        Self(vec![1.0 / m as f64; m])
    }

    /// Coordinate-wise mean of a non-empty list of weight vectors.
    pub fn mean<'a, I>(weights: I) -> Result<Self>
    where
        I: IntoIterator<Item = &'a SimplexWeights>,
    {
        let mut sum: Vec<f64> = Vec::new();
        let mut count = 0usize;
        for w in weights {
            if sum.is_empty() {
                sum = vec![0.0; w.len()];
            } else if w.len() != sum.len() {
                return Err(Error::Dimension("weight vectors differ in length".into()));
            }
            for (s, l) in sum.iter_mut().zip(w.as_slice()) {
                *s += l;
            }
            count += 1;
        }
        if count == 0 {
            return Err(Error::InvalidInput("cannot average zero weight vectors".into()));
        }
        Self::new(sum.into_iter().map(|s| s / count as f64).collect())
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

/// Scales every gradient to unit Frobenius norm; near-zero ones pass through.
pub fn normalize_gradients(gradients: &[Matrix]) -> Vec<Matrix> {
    gradients
        .iter()
        .map(|g| {
            let n = g.norm();
            if n <= ZERO_GRADIENT_TOL {
                g.clone()
            } else {
                g / n
            }
        })
        .collect()
}

/// Matrix of pairwise Frobenius inner products.
pub fn gradient_gram(gradients: &[Matrix]) -> Result<DMatrix<f64>> {
    let m = gradients.len();
    if m == 0 {
        return Err(Error::InvalidInput("need at least one gradient".into()));
    }
    let shape = gradients[0].shape();
    if gradients.iter().any(|g| g.shape() != shape) {
        return Err(Error::Dimension("gradients differ in shape".into()));
    }
    if gradients.iter().any(|g| g.iter().any(|v| !v.is_finite())) {
        return Err(Error::InvalidInput("gradient has non-finite entries".into()));
    }
    let mut q = DMatrix::zeros(m, m);
    for i in 0..m {
        for j in i..m {
            let v = gradients[i].dot(&gradients[j]);
            q[(i, j)] = v;
            q[(j, i)] = v;
        }
    }
    Ok(q)
}

/// `argmin_{λ ∈ Δ_m} ½‖Σ λ_i G_i‖_F²`.
pub fn min_norm_weights(gradients: &[Matrix]) -> Result<SimplexWeights> {
    min_norm_weights_from_gram(&gradient_gram(gradients)?)
}

/// Same QP given the Gram matrix `Q` directly.
pub fn min_norm_weights_from_gram(q: &DMatrix<f64>) -> Result<SimplexWeights> {
    let m = q.nrows();
    if m == 0 || q.ncols() != m {
        return Err(Error::Dimension("Gram matrix must be square and non-empty".into()));
    }
    if q.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("Gram matrix has non-finite entries".into()));
    }
    let lambda = match m {
        1 => vec![1.0],
        2 => {
            let denom = q[(0, 0)] - 2.0 * q[(0, 1)] + q[(1, 1)];
            let l = if denom > 0.0 {
                ((q[(1, 1)] - q[(0, 1)]) / denom).clamp(0.0, 1.0)
            } else {
                0.5
            };
            vec![l, 1.0 - l]
        }
        _ => {
            let fw = frank_wolfe(q);
            match polish(q, &fw) {
                Some(p) if duality_gap(q, &p) <= duality_gap(q, &fw) => p,
                _ => fw,
            }
        }
    };
    SimplexWeights::new(lambda)
}

/// `D = -Σ λ_i G_i` together with the weights.
pub fn descent_direction(gradients: &[Matrix]) -> Result<(Matrix, SimplexWeights)> {
    let weights = min_norm_weights(gradients)?;
    let (rows, cols) = gradients[0].shape();
    let mut d = Matrix::zeros(rows, cols);
    for (g, &l) in gradients.iter().zip(weights.as_slice()) {
        if l != 0.0 {
            d -= g * l;
        }
    }
    Ok((d, weights))
}

/// `λᵀQλ − min_i (Qλ)_i`: zero exactly at the minimizer, and the largest
/// amount by which `⟨D, G_i⟩ ≤ −‖D‖²` can fail for the induced direction.
fn duality_gap(q: &DMatrix<f64>, lambda: &[f64]) -> f64 {
    let l = DVector::from_column_slice(lambda);
    let grad = q * &l;
    l.dot(&grad) - grad.min()
}

fn frank_wolfe(q: &DMatrix<f64>) -> Vec<f64> {
    let m = q.nrows();
    let scale = q.diagonal().max().max(1.0);
    let tol = QP_GAP_TOL * scale;
    let mut lambda = DVector::from_element(m, 1.0 / m as f64);
    let mut grad = q * &lambda;

    for _ in 0..MAX_QP_ITERS {
        let value = lambda.dot(&grad);
        let s = grad.imin();
        let fw_gap = value - grad[s];
        if fw_gap <= tol {
            break;
        }
        let away = (0..m)
            .filter(|&i| lambda[i] > SUPPORT_TOL)
            .max_by(|&a, &b| grad[a].total_cmp(&grad[b]))
            .unwrap_or(s);
        let away_gap = grad[away] - value;

        let mut dir = -lambda.clone();
        let gamma_max;
        if fw_gap >= away_gap || lambda[away] >= 1.0 - SUPPORT_TOL {
            dir[s] += 1.0;
            gamma_max = 1.0;
        } else {
            dir = -dir;
            dir[away] -= 1.0;
            gamma_max = lambda[away] / (1.0 - lambda[away]);
        }

        let qd = q * &dir;
        let curvature = dir.dot(&qd);
        let slope = grad.dot(&dir);
        let gamma = if curvature > 0.0 {
            (-slope / curvature).clamp(0.0, gamma_max)
        } else {
            gamma_max
        };
        if gamma == 0.0 {
            break;
        }
        lambda += &dir * gamma;
        for v in lambda.iter_mut() {
            if *v < SUPPORT_TOL {
                *v = 0.0;
            }
        }
        let total = lambda.sum();
        lambda /= total;
        grad = q * &lambda;
    }
    lambda.iter().copied().collect()
}

/// Solves the equality-constrained QP on the current support exactly and
/// keeps the result only if it is feasible.
fn polish(q: &DMatrix<f64>, lambda: &[f64]) -> Option<Vec<f64>> {
    let support: Vec<usize> = (0..lambda.len()).filter(|&i| lambda[i] > 1e-12).collect();
    let s = support.len();
    let mut kkt = DMatrix::zeros(s + 1, s + 1);
    for (a, &i) in support.iter().enumerate() {
        for (b, &j) in support.iter().enumerate() {
            kkt[(a, b)] = q[(i, j)];
        }
        kkt[(a, s)] = 1.0;
        kkt[(s, a)] = 1.0;
    }
    let mut rhs = DVector::zeros(s + 1);
    rhs[s] = 1.0;
    let sol = kkt.lu().solve(&rhs)?;
    if sol.iter().any(|v| !v.is_finite()) || sol.rows(0, s).iter().any(|&v| v < 0.0) {
        return None;
    }
    let mut out = vec![0.0; lambda.len()];
    for (a, &i) in support.iter().enumerate() {
        out[i] = sol[a];
    }
    let total: f64 = out.iter().sum();
    out.iter_mut().for_each(|v| *v /= total);
    Some(out)
}
