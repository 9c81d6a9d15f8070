//! Dense linear-algebra substrate: data and Gram matrices, sorted symmetric
//! eigendecompositions, orthonormal bases and the projection onto the set of
//! matrices with orthonormal columns.

use std::cmp::Ordering;

use nalgebra::{DMatrix, DVector, SymmetricEigen, SVD};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

pub type Matrix = DMatrix<f64>;

/// Orthonormality tolerance every [`Subspace`] is held to.
pub const ORTHONORMAL_TOL: f64 = 1e-10;

/// Relative tolerance for accepting a matrix as symmetric.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Eigenvalues closer than this are treated as tied when ordering eigenvectors.
pub const EIGEN_TIE_TOL: f64 = 1e-10;

/// Relative singular-value floor below which a projection input is rank deficient.
pub const RANK_TOL: f64 = 1e-12;

/// An `n x d` matrix of samples (rows) by features (columns).
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix(Matrix);

impl DataMatrix {
    pub fn new(values: Matrix) -> Result<Self> {
        if values.nrows() == 0 || values.ncols() == 0 {
            return Err(Error::InvalidInput(format!(
                "data matrix must be non-empty, got {}x{}",
                values.nrows(),
                values.ncols()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            let (row, col) = (pos % values.nrows(), pos / values.nrows());
            return Err(Error::InvalidInput(format!(
                "non-finite entry at row {row}, column {col}"
            )));
        }
        Ok(Self(values))
    }

    /// Builds a matrix from row vectors; all rows must share a length.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let d = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::Dimension("rows have differing lengths".into()));
        }
        Self::new(Matrix::from_fn(n, d, |i, j| rows[i][j]))
    }

    pub fn nrows(&self) -> usize {
        self.0.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.0.ncols()
    }

    pub fn as_matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix {
        self.0
    }

    /// Squared Frobenius norm, the trace of the Gram matrix.
    pub fn energy(&self) -> f64 {
        self.0.norm_squared()
    }

    /// Rows selected by index, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::InvalidInput("row selection is empty".into()));
        }
        Ok(Self(self.0.select_rows(rows)))
    }
}

/// A symmetric `d x d` matrix (Gram or covariance).
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix(Matrix);

impl SymMatrix {
    /// Accepts `values` when it is square, finite and symmetric to within
    /// [`SYMMETRY_TOL`] relative to its largest entry. The stored matrix is
    /// exactly symmetrized.
    pub fn new(values: Matrix) -> Result<Self> {
        if !values.is_square() || values.nrows() == 0 {
            return Err(Error::Dimension(format!(
                "symmetric matrix must be square and non-empty, got {}x{}",
                values.nrows(),
                values.ncols()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("symmetric matrix has non-finite entries".into()));
        }
        let scale = values.amax().max(1.0);
        let asym = (&values - values.transpose()).amax();
        if asym > SYMMETRY_TOL * scale {
            return Err(Error::InvalidInput(format!(
                "matrix is not symmetric (max asymmetry {asym:e})"
            )));
        }
        Ok(Self(symmetrize(values)))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }

    /// Eigendecomposition with eigenvalues sorted in descending order.
    pub fn eigen(&self) -> Result<SortedEigen> {
        SortedEigen::of(self)
    }

    /// `trace(Uᵀ S U)` for any `d x r` matrix `U`.
    pub fn quadratic_trace(&self, u: &Matrix) -> f64 {
        u.dot(&(&self.0 * u))
    }
}

impl std::ops::Add for &SymMatrix {
    type Output = SymMatrix;

    fn add(self, rhs: &SymMatrix) -> SymMatrix {
        SymMatrix(&self.0 + &rhs.0)
    }
}

fn symmetrize(m: Matrix) -> Matrix {
    let t = m.transpose();
    (m + t) * 0.5
}

/// Eigenpairs of a symmetric matrix, eigenvalues descending.
///
/// Each eigenvector's sign is fixed so its first component with magnitude
/// above `1e-12` is positive. Eigenvectors whose eigenvalues lie within
/// [`EIGEN_TIE_TOL`] (relative to the spectral radius) are ordered by
/// descending lexicographic comparison of their entries.
#[derive(Debug, Clone)]
pub struct SortedEigen {
    pub values: DVector<f64>,
    pub vectors: Matrix,
}

impl SortedEigen {
    fn of(s: &SymMatrix) -> Result<Self> {
        let d = s.dim();
        let eig = SymmetricEigen::try_new(s.0.clone(), f64::EPSILON, 0).ok_or_else(|| {
            Error::Numeric("symmetric eigensolver did not converge".into())
        })?;
        if eig.eigenvalues.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric("eigensolver produced non-finite values".into()));
        }

        let mut pairs: Vec<(f64, Vec<f64>)> = (0..d)
            .map(|j| {
                let mut v: Vec<f64> = eig.eigenvectors.column(j).iter().copied().collect();
                canonical_sign(&mut v);
                (eig.eigenvalues[j], v)
            })
            .collect();

        let scale = pairs.iter().fold(0.0_f64, |acc, p| acc.max(p.0.abs())).max(1.0);
        pairs.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(Ordering::Equal));
        // Reorder each run of tied eigenvalues lexicographically.
        let mut start = 0;
        while start < d {
            let mut end = start + 1;
            while end < d && (pairs[start].0 - pairs[end].0).abs() <= EIGEN_TIE_TOL * scale {
                end += 1;
            }
            if end - start > 1 {
                pairs[start..end].sort_by(|a, b| lexicographic(&b.1, &a.1));
            }
            start = end;
        }

        let values = DVector::from_iterator(d, pairs.iter().map(|p| p.0));
        let vectors = Matrix::from_fn(d, d, |i, j| pairs[j].1[i]);
        Ok(Self { values, vectors })
    }

    /// Sum of the `count` smallest eigenvalues.
    pub fn trailing_sum(&self, count: usize) -> f64 {
        let d = self.values.len();
        self.values.iter().skip(d - count.min(d)).sum()
    }

    /// Sum of the `count` largest eigenvalues.
    pub fn leading_sum(&self, count: usize) -> f64 {
        self.values.iter().take(count).sum()
    }

    pub fn max(&self) -> f64 {
        self.values[0]
    }

    pub fn min(&self) -> f64 {
        self.values[self.values.len() - 1]
    }
}

fn canonical_sign(v: &mut [f64]) {
    if let Some(first) = v.iter().find(|x| x.abs() > 1e-12) {
        if *first < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
}

fn lexicographic(a: &[f64], b: &[f64]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.partial_cmp(y).unwrap_or(Ordering::Equal))
        .find(|o| *o != Ordering::Equal)
        .unwrap_or(Ordering::Equal)
}

/// A `d x r` matrix with orthonormal columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace(Matrix);

impl Subspace {
    pub fn new(basis: Matrix) -> Result<Self> {
        let (d, r) = basis.shape();
        if r == 0 || r > d {
            return Err(Error::Dimension(format!(
                "subspace needs 1 <= r <= d, got d = {d}, r = {r}"
            )));
        }
        let err = orthonormality_error(&basis);
        if !(err <= ORTHONORMAL_TOL) {
            return Err(Error::InvalidInput(format!(
                "basis columns are not orthonormal (max |UᵀU - I| = {err:e})"
            )));
        }
        Ok(Self(basis))
    }

    pub fn ambient_dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn target_dim(&self) -> usize {
        self.0.ncols()
    }

    pub fn basis(&self) -> &Matrix {
        &self.0
    }

    pub fn into_basis(self) -> Matrix {
        self.0
    }
}

/// `max |UᵀU − I|` over all entries.
pub fn orthonormality_error(u: &Matrix) -> f64 {
    let r = u.ncols();
    (u.tr_mul(u) - Matrix::identity(r, r)).amax()
}

pub fn gram(x: &DataMatrix) -> SymMatrix {
    SymMatrix(symmetrize(x.0.tr_mul(&x.0)))
}

/// Leading `r`-dimensional eigenspace of `s`.
pub fn top_r_eigensubspace(s: &SymMatrix, r: usize) -> Result<Subspace> {
    let d = s.dim();
    if r == 0 || r > d {
        return Err(Error::Dimension(format!("need 1 <= r <= d, got r = {r}, d = {d}")));
    }
    let eig = s.eigen()?;
    Subspace::new(eig.vectors.columns(0, r).into_owned())
}

/// Frobenius-nearest matrix with orthonormal columns: the polar factor `A Bᵀ`
/// of the thin SVD `M = A Σ Bᵀ`.
pub fn stiefel_project(m: &Matrix) -> Result<Subspace> {
    let (d, r) = m.shape();
    if r == 0 || r > d {
        return Err(Error::Dimension(format!("need 1 <= r <= d, got d = {d}, r = {r}")));
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::DegenerateStep("projection input has non-finite entries".into()));
    }
    let svd = SVD::try_new(m.clone(), true, true, f64::EPSILON, 0)
        .ok_or_else(|| Error::Numeric("SVD did not converge".into()))?;
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if !(smax > 0.0) || smin <= RANK_TOL * smax {
        return Err(Error::DegenerateStep(format!(
            "projection input is rank deficient (singular values in [{smin:e}, {smax:e}])"
        )));
    }
    let (Some(a), Some(bt)) = (svd.u, svd.v_t) else {
        return Err(Error::Numeric("SVD returned no singular vectors".into()));
    };
    Subspace::new(a * bt)
}

/// Haar-distributed random orthonormal basis, deterministic in `seed`.
pub fn random_orthonormal(d: usize, r: usize, seed: u64) -> Result<Subspace> {
    if r == 0 || r > d {
        return Err(Error::Dimension(format!("need 1 <= r <= d, got d = {d}, r = {r}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = Matrix::from_fn(d, r, |_, _| StandardNormal.sample(&mut rng));
    let qr = g.qr();
    let mut q = qr.q();
    let rmat = qr.r();
    // Sign fix on R's diagonal makes the distribution uniform.
    for j in 0..r {
        if rmat[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    Subspace::new(q)
}
