//! Dense complex linear-algebra kernels.
//!
//! Everything downstream represents operators between finite-dimensional
//! Hilbert spaces as dense complex matrices. Closed ranges become explicit
//! orthonormal bases, and defect operators come from Hermitian square roots.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type ComplexMatrix = DMatrix<Complex64>;
pub type ComplexVector = DVector<Complex64>;

/// Eigenvalues below this are treated as zero when taking square roots.
pub const DEFAULT_CLAMP_TOL: f64 = 1e-10;
/// Relative singular-value cut used for numerical rank decisions.
pub const DEFAULT_RANK_TOL: f64 = 1e-10;
/// Asymmetry allowed before a matrix is rejected as non-Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-10;
const ABSOLUTE_RANK_FLOOR: f64 = 1e-12;

pub fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn real(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Builds a matrix from row-major real entries.
pub fn real_matrix(rows: usize, cols: usize, entries: &[f64]) -> ComplexMatrix {
    assert_eq!(entries.len(), rows * cols, "entry count must equal rows*cols");
    ComplexMatrix::from_fn(rows, cols, |i, j| real(entries[i * cols + j]))
}

pub fn identity(n: usize) -> ComplexMatrix {
    ComplexMatrix::identity(n, n)
}

pub fn is_finite(m: &ComplexMatrix) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

fn to_faer(m: &ComplexMatrix) -> faer::Mat<Complex64> {
    faer::Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

fn from_faer(m: faer::MatRef<'_, Complex64>) -> ComplexMatrix {
    ComplexMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

// nalgebra's complex SVD can stop with reconstruction errors near 1e-8, which
// is far above the tolerances used here, so SVD and Hermitian eigenproblems go
// through faer.

/// Singular values in nonincreasing order.
fn singular_values(m: &ComplexMatrix) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    to_faer(m)
        .singular_values()
        .expect("SVD iteration converges for finite input")
}

/// Full SVD `m = U diag(s) V^*` with `s` nonincreasing.
fn full_svd(m: &ComplexMatrix) -> (ComplexMatrix, Vec<f64>, ComplexMatrix) {
    let svd = to_faer(m)
        .svd()
        .expect("SVD iteration converges for finite input");
    let s = svd.S().column_vector().iter().map(|z| z.re).collect();
    (from_faer(svd.U()), s, from_faer(svd.V()))
}

/// Largest singular value; zero for empty matrices.
pub fn op_norm(m: &ComplexMatrix) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

/// Smallest singular value of a square matrix; `+inf` for the empty matrix.
pub fn sigma_min(m: &ComplexMatrix) -> f64 {
    singular_values(m).last().copied().unwrap_or(f64::INFINITY)
}

fn asymmetry(m: &ComplexMatrix) -> f64 {
    (m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn check_hermitian(m: &ComplexMatrix) -> Result<()> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "expected a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    let scale = m.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let asym = asymmetry(m);
    if asym > HERMITIAN_TOL * scale {
        return Err(Error::NonHermitian { asymmetry: asym });
    }
    Ok(())
}

/// Eigen-decomposition of the Hermitian part of `m`, eigenvalues ascending.
fn hermitian_eigen(m: &ComplexMatrix) -> (Vec<f64>, ComplexMatrix) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), ComplexMatrix::zeros(0, 0));
    }
    let sym = (m + m.adjoint()).scale(0.5);
    let eig = to_faer(&sym)
        .self_adjoint_eigen(faer::Side::Lower)
        .expect("Hermitian eigen iteration converges for finite input");
    let values = eig.S().column_vector().iter().map(|z| z.re).collect();
    (values, from_faer(eig.U()))
}

/// Positive square root of a Hermitian positive semidefinite matrix.
///
/// Eigenvalues in `[-clamp_tol, clamp_tol)` are set to zero before the root is
/// taken; anything more negative is reported as [`Error::IndefiniteMatrix`].
pub fn hermitian_sqrt(m: &ComplexMatrix, clamp_tol: f64) -> Result<ComplexMatrix> {
    check_hermitian(m)?;
    let n = m.nrows();
    if n == 0 {
        return Ok(ComplexMatrix::zeros(0, 0));
    }
    let (values, vectors) = hermitian_eigen(m);
    if values[0] < -clamp_tol {
        return Err(Error::IndefiniteMatrix {
            min_eigenvalue: values[0],
        });
    }
    let roots = values
        .iter()
        .map(|&v| if v < clamp_tol { 0.0 } else { v.sqrt() });
    let mut scaled = vectors.clone();
    for (j, r) in roots.enumerate() {
        scaled.column_mut(j).scale_mut(r);
    }
    let root = &scaled * vectors.adjoint();
    // Exact Hermitian symmetry downstream.
    Ok((&root + root.adjoint()).scale(0.5))
}

/// Defect operator `(I - M^* M)^{1/2}` of a contraction.
pub fn defect_operator(m: &ComplexMatrix, clamp_tol: f64) -> Result<ComplexMatrix> {
    let n = m.ncols();
    hermitian_sqrt(&(identity(n) - m.adjoint() * m), clamp_tol)
}

/// `1 - ||M||`; nonnegative exactly when `M` is a contraction.
pub fn contraction_margin(m: &ComplexMatrix) -> f64 {
    1.0 - op_norm(m)
}

/// Smallest eigenvalue of a Hermitian matrix (`+inf` for the empty matrix).
pub fn psd_margin(m: &ComplexMatrix) -> Result<f64> {
    check_hermitian(m)?;
    if m.nrows() == 0 {
        return Ok(f64::INFINITY);
    }
    Ok(hermitian_eigen(m).0[0])
}

/// Orthonormal basis of a subspace of `C^ambient_dim`, stored as the columns
/// of an `ambient_dim x dim` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceBasis {
    vectors: ComplexMatrix,
    tol: f64,
}

impl SubspaceBasis {
    pub fn empty(ambient_dim: usize) -> Self {
        SubspaceBasis {
            vectors: ComplexMatrix::zeros(ambient_dim, 0),
            tol: DEFAULT_RANK_TOL,
        }
    }

    pub fn full(ambient_dim: usize) -> Self {
        SubspaceBasis {
            vectors: identity(ambient_dim),
            tol: DEFAULT_RANK_TOL,
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.vectors.nrows()
    }

    pub fn dim(&self) -> usize {
        self.vectors.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.dim() == 0
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    /// Columns are the basis vectors; this is also the isometric embedding of
    /// subspace coordinates into the ambient space.
    pub fn matrix(&self) -> &ComplexMatrix {
        &self.vectors
    }

    /// Coordinate map from the ambient space onto the subspace.
    pub fn coords(&self) -> ComplexMatrix {
        self.vectors.adjoint()
    }

    pub fn projector(&self) -> ComplexMatrix {
        &self.vectors * self.vectors.adjoint()
    }

    /// Orthogonal complement inside the ambient space.
    pub fn complement(&self) -> SubspaceBasis {
        let n = self.ambient_dim();
        let proj = identity(n) - self.projector();
        SubspaceBasis {
            vectors: canonical_basis(&proj, n - self.dim()),
            tol: self.tol,
        }
    }

    /// `max |G - I|` over the Gram matrix of the stored vectors.
    pub fn gram_defect(&self) -> f64 {
        let gram = self.vectors.adjoint() * &self.vectors;
        (gram - identity(self.dim()))
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }
}

/// Orthonormal basis of the column space of `proj` (an orthogonal projector of
/// rank `rank`), picked by column-pivoted Gram-Schmidt so that the result
/// depends only on the subspace. Coordinate-aligned subspaces get standard
/// basis vectors.
fn canonical_basis(proj: &ComplexMatrix, rank: usize) -> ComplexMatrix {
    let n = proj.nrows();
    let mut residual = proj.clone();
    let mut chosen: Vec<ComplexVector> = Vec::with_capacity(rank);
    let mut used = vec![false; n];
    for _ in 0..rank {
        let mut best = None;
        let mut best_norm = -1.0;
        for (j, _) in used.iter().enumerate().filter(|(_, &u)| !u) {
            let norm = residual.column(j).norm();
            // ties go to the lower index
            if norm > best_norm * (1.0 + 1e-9) {
                best_norm = norm;
                best = Some(j);
            }
        }
        let Some(j) = best else { break };
        used[j] = true;
        let mut v: ComplexVector = residual.column(j).into_owned();
        // second pass keeps the Gram matrix at working precision
        for q in &chosen {
            let c = q.dotc(&v);
            v -= q * c;
        }
        let norm = v.norm();
        if norm == 0.0 {
            break;
        }
        v /= real(norm);
        for k in 0..n {
            let c = v.dotc(&residual.column(k));
            let update = &v * c;
            let mut col = residual.column_mut(k);
            col -= update;
        }
        chosen.push(v);
    }
    let mut out = ComplexMatrix::zeros(n, chosen.len());
    for (j, v) in chosen.iter().enumerate() {
        out.set_column(j, v);
    }
    out
}

/// Orthonormal basis of the closure of the column space of `m`.
///
/// Singular directions are kept when `sigma > rank_tol * sigma_max` and
/// `sigma > 1e-12`.
pub fn orthonormal_range(m: &ComplexMatrix, rank_tol: f64) -> SubspaceBasis {
    let rows = m.nrows();
    if m.is_empty() {
        return SubspaceBasis {
            vectors: ComplexMatrix::zeros(rows, 0),
            tol: rank_tol,
        };
    }
    let (u, sigma, _) = full_svd(m);
    let sigma_max = sigma.first().copied().unwrap_or(0.0);
    let cut = (rank_tol * sigma_max).max(ABSOLUTE_RANK_FLOOR);
    let keep: Vec<usize> = (0..sigma.len()).filter(|&k| sigma[k] > cut).collect();
    let mut range = ComplexMatrix::zeros(rows, keep.len());
    for (j, &k) in keep.iter().enumerate() {
        range.set_column(j, &u.column(k));
    }
    let proj = &range * range.adjoint();
    SubspaceBasis {
        vectors: canonical_basis(&proj, keep.len()),
        tol: rank_tol,
    }
}

/// Moore-Penrose pseudo-inverse with a relative singular-value cut.
pub fn pinv(m: &ComplexMatrix, rank_tol: f64) -> ComplexMatrix {
    if m.is_empty() {
        return ComplexMatrix::zeros(m.ncols(), m.nrows());
    }
    let (u, sigma, v) = full_svd(m);
    let sigma_max = sigma.first().copied().unwrap_or(0.0);
    let cut = (rank_tol * sigma_max).max(ABSOLUTE_RANK_FLOOR);
    let mut out = ComplexMatrix::zeros(m.ncols(), m.nrows());
    for (k, &s) in sigma.iter().enumerate().filter(|(_, &s)| s > cut) {
        out += v.column(k) * u.column(k).adjoint() * Complex64::new(1.0 / s, 0.0);
    }
    out
}

/// Spectral-norm distance, convenient for residual reporting.
pub fn dist(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    op_norm(&(a - b))
}
