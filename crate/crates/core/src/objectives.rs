//! The fair-PCA objective vector and its gradients.
//!
//! Objective 0 is the trace form of the total reconstruction loss,
//! `-trace(UᵀXᵀXU)`. The remaining objectives penalize either each group's
//! disparity error `E_i(U) = L_i(U) - L_i(U_i*)` (single mode) or the
//! pairwise differences `Δ_ij = E_i - E_j` over unordered pairs `i < j` in
//! lexicographic order (pairwise mode). Every objective carries the
//! regularizer `(α/2)‖U‖_F²`.
//!
//! All evaluations go through Gram matrices, so they are defined for any
//! `d x r` matrix, not only orthonormal ones. The line search relies on this
//! to evaluate objectives at un-projected trial points.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{gram, top_r_eigensubspace, DataMatrix, Matrix, SymMatrix, Subspace};

/// Which fairness objectives accompany the total loss.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// One objective per group, `ψ(E_i)`.
    Single,
    /// One objective per unordered group pair, `ψ(Δ_ij)`.
    Pairwise,
}

/// Penalty `ψ` applied to disparity values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Penalty {
    /// `ψ(z) = z²/2`
    Squared,
    /// `ψ(z) = e^{-z}`
    #[value(name = "exp")]
    #[serde(rename = "exp")]
    Exponential,
}

impl Penalty {
    pub fn value(self, z: f64) -> f64 {
        match self {
            Penalty::Squared => 0.5 * z * z,
            Penalty::Exponential => (-z).exp(),
        }
    }

    pub fn derivative(self, z: f64) -> f64 {
        match self {
            Penalty::Squared => z,
            Penalty::Exponential => -(-z).exp(),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Single => "single",
            Mode::Pairwise => "pairwise",
        })
    }
}

impl fmt::Display for Penalty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Penalty::Squared => "squared",
            Penalty::Exponential => "exp",
        })
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "single" => Ok(Mode::Single),
            "pairwise" => Ok(Mode::Pairwise),
            other => Err(Error::Config(format!("unknown mode '{other}'"))),
        }
    }
}

impl FromStr for Penalty {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "squared" => Ok(Penalty::Squared),
            "exp" | "exponential" => Ok(Penalty::Exponential),
            other => Err(Error::Config(format!("unknown penalty '{other}'"))),
        }
    }
}

/// Options fixed when a problem is built.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProblemOptions {
    pub mode: Mode,
    pub penalty: Penalty,
    /// Regularization strength; `None` uses [`regularization_alpha`].
    pub alpha: Option<f64>,
}

impl Default for ProblemOptions {
    fn default() -> Self {
        Self {
            mode: Mode::Pairwise,
            penalty: Penalty::Squared,
            alpha: None,
        }
    }
}

/// Values of every objective at one point; entry 0 is the regularized total loss.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectiveVector(Vec<f64>);

impl ObjectiveVector {
    pub fn new(values: Vec<f64>) -> Self {
        Self(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

/// Precomputed per-group statistics plus objective settings.
#[derive(Debug, Clone)]
pub struct FairPcaProblem {
    global_gram: SymMatrix,
    total_energy: f64,
    group_grams: Vec<SymMatrix>,
    group_energies: Vec<f64>,
    group_sizes: Vec<usize>,
    local_optima: Vec<Subspace>,
    local_losses: Vec<f64>,
    pairs: Vec<(usize, usize)>,
    mode: Mode,
    penalty: Penalty,
    alpha: f64,
    target_dim: usize,
}

impl FairPcaProblem {
    /// Builds the problem from per-group data blocks.
    pub fn from_groups(groups: &[DataMatrix], r: usize, options: ProblemOptions) -> Result<Self> {
        let grams = groups.iter().map(gram).collect();
        let sizes = groups.iter().map(DataMatrix::nrows).collect();
        Self::from_grams(grams, sizes, r, options)
    }

    /// Builds the problem from per-group Gram matrices `X_iᵀX_i` and sizes `n_i`.
    pub fn from_grams(
        group_grams: Vec<SymMatrix>,
        group_sizes: Vec<usize>,
        r: usize,
        options: ProblemOptions,
    ) -> Result<Self> {
        let k = group_grams.len();
        if k == 0 {
            return Err(Error::InvalidInput("a problem needs at least one group".into()));
        }
        if group_sizes.len() != k {
            return Err(Error::Dimension(format!(
                "{k} Gram matrices but {} group sizes",
                group_sizes.len()
            )));
        }
        if group_sizes.contains(&0) {
            return Err(Error::InvalidInput("every group must be non-empty".into()));
        }
        let d = group_grams[0].dim();
        if group_grams.iter().any(|g| g.dim() != d) {
            return Err(Error::Dimension("group Gram matrices differ in size".into()));
        }
        if r == 0 || r > d {
            return Err(Error::Dimension(format!("need 1 <= r <= d, got r = {r}, d = {d}")));
        }

        let mut global = group_grams[0].clone();
        for g in &group_grams[1..] {
            global = &global + g;
        }
        let total_energy = global.trace();
        let group_energies = group_grams.iter().map(SymMatrix::trace).collect();

        let mut local_optima = Vec::with_capacity(k);
        let mut local_losses = Vec::with_capacity(k);
        for g in &group_grams {
            let eig = g.eigen()?;
            local_losses.push(eig.trailing_sum(d - r).max(0.0));
            local_optima.push(Subspace::new(eig.vectors.columns(0, r).into_owned())?);
        }

        let alpha = match options.alpha {
            Some(a) if !(a >= 0.0) || !a.is_finite() => {
                return Err(Error::InvalidInput(format!("alpha must be finite and >= 0, got {a}")))
            }
            Some(a) => a,
            None => regularization_alpha(&group_grams)?,
        };

        let pairs = (0..k)
            .flat_map(|i| (i + 1..k).map(move |j| (i, j)))
            .collect();

        Ok(Self {
            global_gram: global,
            total_energy,
            group_grams,
            group_energies,
            group_sizes,
            local_optima,
            local_losses,
            pairs,
            mode: options.mode,
            penalty: options.penalty,
            alpha,
            target_dim: r,
        })
    }

    /// Same statistics with a different objective configuration.
    pub fn with_options(&self, options: ProblemOptions) -> Result<Self> {
        let alpha = match options.alpha {
            Some(a) if !(a >= 0.0) || !a.is_finite() => {
                return Err(Error::InvalidInput(format!("alpha must be finite and >= 0, got {a}")))
            }
            Some(a) => a,
            None => regularization_alpha(&self.group_grams)?,
        };
        Ok(Self {
            mode: options.mode,
            penalty: options.penalty,
            alpha,
            ..self.clone()
        })
    }

    pub fn group_count(&self) -> usize {
        self.group_grams.len()
    }

    pub fn ambient_dim(&self) -> usize {
        self.global_gram.dim()
    }

    pub fn target_dim(&self) -> usize {
        self.target_dim
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn penalty(&self) -> Penalty {
        self.penalty
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn global_gram(&self) -> &SymMatrix {
        &self.global_gram
    }

    pub fn total_energy(&self) -> f64 {
        self.total_energy
    }

    pub fn group_grams(&self) -> &[SymMatrix] {
        &self.group_grams
    }

    pub fn group_energies(&self) -> &[f64] {
        &self.group_energies
    }

    pub fn group_sizes(&self) -> &[usize] {
        &self.group_sizes
    }

    pub fn local_optima(&self) -> &[Subspace] {
        &self.local_optima
    }

    pub fn local_losses(&self) -> &[f64] {
        &self.local_losses
    }

    /// Unordered group pairs `(i, j)`, `i < j`, in lexicographic order.
    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    /// Number of objectives `m`.
    pub fn objective_count(&self) -> usize {
        1 + match self.mode {
            Mode::Single => self.group_count(),
            Mode::Pairwise => self.pairs.len(),
        }
    }

    /// Optimal rank-r subspace for the pooled data.
    pub fn plain_pca(&self) -> Result<Subspace> {
        top_r_eigensubspace(&self.global_gram, self.target_dim)
    }

    fn check_group(&self, i: usize) -> Result<()> {
        if i >= self.group_count() {
            return Err(Error::Range {
                index: i,
                len: self.group_count(),
            });
        }
        Ok(())
    }

    fn check_shape(&self, u: &Matrix) {
        assert_eq!(
            u.shape(),
            (self.ambient_dim(), self.target_dim),
            "matrix shape does not match the problem's (d, r)"
        );
    }

    /// `E_i` from a precomputed `trace(UᵀS_iU)`.
    fn disparity_from_trace(&self, i: usize, captured: f64) -> f64 {
        self.group_energies[i] - captured - self.local_losses[i]
    }

    /// Objective values at any `d x r` matrix.
    pub fn evaluate(&self, u: &Matrix) -> ObjectiveVector {
        self.check_shape(u);
        let reg = 0.5 * self.alpha * u.norm_squared();
        let captured: Vec<f64> = self.group_grams.iter().map(|g| g.quadratic_trace(u)).collect();
        let main = -captured.iter().sum::<f64>() + reg;
        let mut values = Vec::with_capacity(self.objective_count());
        values.push(main);
        let e: Vec<f64> = (0..self.group_count())
            .map(|i| self.disparity_from_trace(i, captured[i]))
            .collect();
        match self.mode {
            Mode::Single => values.extend(e.iter().map(|&ei| self.penalty.value(ei) + reg)),
            Mode::Pairwise => values.extend(
                self.pairs
                    .iter()
                    .map(|&(i, j)| self.penalty.value(e[i] - e[j]) + reg),
            ),
        }
        ObjectiveVector(values)
    }

    /// Gradients of every objective at any `d x r` matrix.
    pub fn gradients(&self, u: &Matrix) -> Vec<Matrix> {
        self.check_shape(u);
        let products: Vec<Matrix> = self.group_grams.iter().map(|g| g.as_matrix() * u).collect();
        let captured: Vec<f64> = products.iter().map(|p| u.dot(p)).collect();
        let e: Vec<f64> = (0..self.group_count())
            .map(|i| self.disparity_from_trace(i, captured[i]))
            .collect();
        let reg = u * self.alpha;

        let mut grads = Vec::with_capacity(self.objective_count());
        let pooled = products
            .iter()
            .fold(Matrix::zeros(u.nrows(), u.ncols()), |acc, p| acc + p);
        grads.push(pooled * -2.0 + &reg);
        match self.mode {
            Mode::Single => {
                for (i, p) in products.iter().enumerate() {
                    let w = self.penalty.derivative(e[i]);
                    grads.push(&reg + p * (-2.0 * w));
                }
            }
            Mode::Pairwise => {
                for &(i, j) in &self.pairs {
                    let w = self.penalty.derivative(e[i] - e[j]);
                    grads.push(&reg + (&products[i] - &products[j]) * (-2.0 * w));
                }
            }
        }
        grads
    }
}

/// `‖X − XUUᵀ‖_F²` through the trace identity `total_energy − trace(UᵀSU)`.
pub fn reconstruction_loss(s: &SymMatrix, total_energy: f64, u: &Subspace) -> f64 {
    (total_energy - s.quadratic_trace(u.basis())).max(0.0)
}

/// `L_i(U)`, group `i`'s reconstruction loss (0-based index).
pub fn group_loss(problem: &FairPcaProblem, i: usize, u: &Subspace) -> Result<f64> {
    problem.check_group(i)?;
    Ok(reconstruction_loss(
        &problem.group_grams[i],
        problem.group_energies[i],
        u,
    ))
}

/// `E_i(U) = L_i(U) − L_i(U_i*)`.
pub fn disparity_error(problem: &FairPcaProblem, i: usize, u: &Subspace) -> Result<f64> {
    Ok(group_loss(problem, i, u)? - problem.local_losses[i])
}

/// `Δ_ij(U) = E_i(U) − E_j(U)`.
pub fn pairwise_disparity(problem: &FairPcaProblem, i: usize, j: usize, u: &Subspace) -> Result<f64> {
    if i == j {
        return Err(Error::InvalidPair(i));
    }
    Ok(disparity_error(problem, i, u)? - disparity_error(problem, j, u)?)
}

pub fn evaluate_objectives(problem: &FairPcaProblem, u: &Matrix) -> ObjectiveVector {
    problem.evaluate(u)
}

pub fn objective_gradients(problem: &FairPcaProblem, u: &Matrix) -> Vec<Matrix> {
    problem.gradients(u)
}

/// Smallest α making every regularized pairwise objective convex:
/// `max(0, max_{i≠j} γ_max(S_j) − γ_min(S_i))`. Zero for a single group.
pub fn regularization_alpha(group_grams: &[SymMatrix]) -> Result<f64> {
    if group_grams.is_empty() {
        return Err(Error::InvalidInput("need at least one group".into()));
    }
    let spectra = extreme_eigenvalues(group_grams)?;
    let mut alpha = 0.0_f64;
    for (i, &(min_i, _)) in spectra.iter().enumerate() {
        for (j, &(_, max_j)) in spectra.iter().enumerate() {
            if i != j {
                alpha = alpha.max(max_j - min_i);
            }
        }
    }
    Ok(alpha)
}

/// The alternative eigen-gap `max_{i≠j} γ_min(S_i) − γ_max(S_j)`, reported
/// for diagnostics only; `None` for a single group.
pub fn min_max_eigen_gap(group_grams: &[SymMatrix]) -> Result<Option<f64>> {
    let spectra = extreme_eigenvalues(group_grams)?;
    let mut gap: Option<f64> = None;
    for (i, &(min_i, _)) in spectra.iter().enumerate() {
        for (j, &(_, max_j)) in spectra.iter().enumerate() {
            if i != j {
                let g = min_i - max_j;
                gap = Some(gap.map_or(g, |c| c.max(g)));
            }
        }
    }
    Ok(gap)
}

fn extreme_eigenvalues(grams: &[SymMatrix]) -> Result<Vec<(f64, f64)>> {
    grams
        .iter()
        .map(|g| g.eigen().map(|e| (e.min(), e.max())))
        .collect()
}
