//! Matrix-valued polynomials on the unit disk.
//!
//! A [`TaylorFn`] holds the Taylor coefficients `T_0, ..., T_N` of an analytic
//! function truncated at degree `N`. All arithmetic treats the stored
//! coefficients as exact and the tail as zero; callers that work with genuine
//! power series are responsible for tracking how far the coefficients remain
//! valid.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::opcore::{
    self, identity, op_norm, psd_margin, real, sigma_min, ComplexMatrix, ComplexVector,
};
use crate::serial::TaylorFnRepr;
use num_complex::Complex64;

pub const DEFAULT_DEGREE: usize = 32;
/// Radius of the circle sampled by the boundary part of [`schur_margin`].
pub const BOUNDARY_RADIUS: f64 = 0.999;
const DISK_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TaylorFnRepr", into = "TaylorFnRepr")]
pub struct TaylorFn {
    in_dim: usize,
    out_dim: usize,
    coeffs: Vec<ComplexMatrix>,
}

impl TaylorFn {
    pub fn new(out_dim: usize, in_dim: usize, coeffs: Vec<ComplexMatrix>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidInput("a series needs at least one coefficient".into()));
        }
        for (n, c) in coeffs.iter().enumerate() {
            if c.nrows() != out_dim || c.ncols() != in_dim {
                return Err(Error::DimensionMismatch(format!(
                    "coefficient {n} is {}x{}, expected {out_dim}x{in_dim}",
                    c.nrows(),
                    c.ncols()
                )));
            }
            if !opcore::is_finite(c) {
                return Err(Error::InvalidInput(format!("coefficient {n} is not finite")));
            }
        }
        Ok(TaylorFn {
            in_dim,
            out_dim,
            coeffs,
        })
    }

    pub fn zeros(out_dim: usize, in_dim: usize, degree: usize) -> Self {
        TaylorFn {
            in_dim,
            out_dim,
            coeffs: vec![ComplexMatrix::zeros(out_dim, in_dim); degree + 1],
        }
    }

    pub fn constant(m: ComplexMatrix) -> Self {
        TaylorFn {
            in_dim: m.ncols(),
            out_dim: m.nrows(),
            coeffs: vec![m],
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::constant(identity(dim))
    }

    /// Scalar polynomial with the given coefficients.
    pub fn scalar(coeffs: &[Complex64]) -> Self {
        assert!(!coeffs.is_empty());
        TaylorFn {
            in_dim: 1,
            out_dim: 1,
            coeffs: coeffs
                .iter()
                .map(|&c| ComplexMatrix::from_element(1, 1, c))
                .collect(),
        }
    }

    pub fn scalar_real(coeffs: &[f64]) -> Self {
        Self::scalar(&coeffs.iter().map(|&c| real(c)).collect::<Vec<_>>())
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[ComplexMatrix] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<ComplexMatrix> {
        self.coeffs
    }

    /// Coefficient `n`, zero beyond the stored degree.
    pub fn coeff(&self, n: usize) -> ComplexMatrix {
        self.coeffs
            .get(n)
            .cloned()
            .unwrap_or_else(|| ComplexMatrix::zeros(self.out_dim, self.in_dim))
    }

    pub fn is_square(&self) -> bool {
        self.in_dim == self.out_dim
    }

    /// Same function with the coefficient list cut or zero-padded to `degree`.
    pub fn with_degree(&self, degree: usize) -> TaylorFn {
        TaylorFn {
            in_dim: self.in_dim,
            out_dim: self.out_dim,
            coeffs: (0..=degree).map(|n| self.coeff(n)).collect(),
        }
    }

    pub fn map_coeffs(&self, f: impl Fn(&ComplexMatrix) -> ComplexMatrix) -> TaylorFn {
        let coeffs: Vec<ComplexMatrix> = self.coeffs.iter().map(f).collect();
        TaylorFn {
            out_dim: coeffs[0].nrows(),
            in_dim: coeffs[0].ncols(),
            coeffs,
        }
    }

    /// `L T(λ) R` for constant matrices `L`, `R`.
    pub fn sandwich(&self, left: &ComplexMatrix, right: &ComplexMatrix) -> TaylorFn {
        self.map_coeffs(|c| left * c * right)
    }

    pub fn scale(&self, s: Complex64) -> TaylorFn {
        self.map_coeffs(|c| c * s)
    }

    fn check_same_shape(&self, other: &TaylorFn) -> Result<()> {
        if self.in_dim != other.in_dim || self.out_dim != other.out_dim {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} vs {}x{}",
                self.out_dim, self.in_dim, other.out_dim, other.in_dim
            )));
        }
        Ok(())
    }

    /// Coefficient-wise sum, degree the larger of the two.
    pub fn add(&self, other: &TaylorFn) -> Result<TaylorFn> {
        self.check_same_shape(other)?;
        let degree = self.degree().max(other.degree());
        Ok(TaylorFn {
            in_dim: self.in_dim,
            out_dim: self.out_dim,
            coeffs: (0..=degree).map(|n| self.coeff(n) + other.coeff(n)).collect(),
        })
    }

    pub fn sub(&self, other: &TaylorFn) -> Result<TaylorFn> {
        self.add(&other.scale(real(-1.0)))
    }

    /// Multiplication by `λ`.
    pub fn shift_up(&self) -> TaylorFn {
        let mut coeffs = Vec::with_capacity(self.coeffs.len() + 1);
        coeffs.push(ComplexMatrix::zeros(self.out_dim, self.in_dim));
        coeffs.extend(self.coeffs.iter().cloned());
        TaylorFn {
            in_dim: self.in_dim,
            out_dim: self.out_dim,
            coeffs,
        }
    }

    /// Division by `λ` as an index shift; the constant coefficient is dropped.
    pub fn shift_down(&self) -> TaylorFn {
        let coeffs = if self.coeffs.len() > 1 {
            self.coeffs[1..].to_vec()
        } else {
            vec![ComplexMatrix::zeros(self.out_dim, self.in_dim)]
        };
        TaylorFn {
            in_dim: self.in_dim,
            out_dim: self.out_dim,
            coeffs,
        }
    }

    /// Stacks `self` on top of `lower` (same input space).
    pub fn stack(&self, lower: &TaylorFn) -> Result<TaylorFn> {
        if self.in_dim != lower.in_dim {
            return Err(Error::DimensionMismatch(format!(
                "cannot stack functions on {} and {} dimensional inputs",
                self.in_dim, lower.in_dim
            )));
        }
        let degree = self.degree().max(lower.degree());
        let rows = self.out_dim + lower.out_dim;
        let coeffs = (0..=degree)
            .map(|n| {
                let mut m = ComplexMatrix::zeros(rows, self.in_dim);
                m.rows_mut(0, self.out_dim).copy_from(&self.coeff(n));
                m.rows_mut(self.out_dim, lower.out_dim).copy_from(&lower.coeff(n));
                m
            })
            .collect();
        Ok(TaylorFn {
            in_dim: self.in_dim,
            out_dim: rows,
            coeffs,
        })
    }

    /// Row block `start..start+len` of every coefficient.
    pub fn rows(&self, start: usize, len: usize) -> TaylorFn {
        TaylorFn {
            in_dim: self.in_dim,
            out_dim: len,
            coeffs: self
                .coeffs
                .iter()
                .map(|c| c.rows(start, len).into_owned())
                .collect(),
        }
    }

    /// Largest spectral-norm coefficient difference over `0..=degree`.
    pub fn max_coeff_distance(&self, other: &TaylorFn, degree: usize) -> f64 {
        (0..=degree)
            .map(|n| op_norm(&(self.coeff(n) - other.coeff(n))))
            .fold(0.0, f64::max)
    }

    /// Horner evaluation at a point of the closed disk.
    pub fn eval(&self, lambda: Complex64) -> Result<ComplexMatrix> {
        if lambda.norm() > 1.0 + DISK_SLACK {
            return Err(Error::OutsideDisk {
                modulus: lambda.norm(),
            });
        }
        Ok(self.eval_unchecked(lambda))
    }

    pub(crate) fn eval_unchecked(&self, lambda: Complex64) -> ComplexMatrix {
        let mut acc = ComplexMatrix::zeros(self.out_dim, self.in_dim);
        for c in self.coeffs.iter().rev() {
            acc = acc * lambda + c;
        }
        acc
    }

    /// Coefficients of `T(λ) v` for a constant vector `v`.
    pub fn apply_vector(&self, v: &ComplexVector) -> Vec<ComplexVector> {
        self.coeffs.iter().map(|c| c * v).collect()
    }
}

/// Truncated Cauchy product. The result degree defaults to the smaller operand
/// degree.
pub fn mul(a: &TaylorFn, b: &TaylorFn, out_degree: Option<usize>) -> Result<TaylorFn> {
    if a.in_dim != b.out_dim {
        return Err(Error::DimensionMismatch(format!(
            "cannot multiply {}x{} by {}x{}",
            a.out_dim, a.in_dim, b.out_dim, b.in_dim
        )));
    }
    let degree = out_degree.unwrap_or_else(|| a.degree().min(b.degree()));
    let coeffs = (0..=degree)
        .map(|n| {
            let mut acc = ComplexMatrix::zeros(a.out_dim, b.in_dim);
            for k in 0..=n.min(a.degree()) {
                if n - k <= b.degree() {
                    acc += &a.coeffs[k] * &b.coeffs[n - k];
                }
            }
            acc
        })
        .collect();
    Ok(TaylorFn {
        in_dim: b.in_dim,
        out_dim: a.out_dim,
        coeffs,
    })
}

/// Series inverse of a square function with invertible constant term:
/// `R_0 = T_0^{-1}`, `R_n = -T_0^{-1} Σ_{k=1}^{n} T_k R_{n-k}`.
pub fn invert_unit(t: &TaylorFn, out_degree: usize) -> Result<TaylorFn> {
    if !t.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "cannot invert a {}x{} function",
            t.out_dim, t.in_dim
        )));
    }
    let d = t.in_dim;
    let smin = sigma_min(&t.coeffs[0]);
    if smin <= 1e-10 {
        return Err(Error::SingularConstantTerm { sigma_min: smin });
    }
    let t0_inv = t.coeffs[0]
        .clone()
        .try_inverse()
        .ok_or(Error::SingularConstantTerm { sigma_min: smin })?;
    let mut out: Vec<ComplexMatrix> = Vec::with_capacity(out_degree + 1);
    out.push(t0_inv.clone());
    for n in 1..=out_degree {
        let mut acc = ComplexMatrix::zeros(d, d);
        for k in 1..=n.min(t.degree()) {
            acc += &t.coeffs[k] * &out[n - k];
        }
        out.push(-(&t0_inv * acc));
    }
    Ok(TaylorFn {
        in_dim: d,
        out_dim: d,
        coeffs: out,
    })
}

/// Cayley transform `K(λ) = (I + λC(λ))(I - λC(λ))^{-1}`.
pub fn cayley(c: &TaylorFn, out_degree: usize) -> Result<TaylorFn> {
    if !c.is_square() {
        return Err(Error::DimensionMismatch("Cayley transform needs a square function".into()));
    }
    let lc = c.shift_up();
    let id = TaylorFn::identity(c.in_dim);
    let denom = invert_unit(&id.sub(&lc)?, out_degree)?;
    let mut k = mul(&id.add(&lc)?, &denom, Some(out_degree))?;
    // exact by construction; remove rounding
    k.coeffs[0] = identity(c.in_dim);
    Ok(k)
}

/// Inverse Cayley transform `C(λ) = λ^{-1}(K(λ) - I)(I + K(λ))^{-1}`.
///
/// The division by `λ` is an index shift: `C_n = [(K - I)(I + K)^{-1}]_{n+1}`.
pub fn inverse_cayley(k: &TaylorFn, out_degree: usize) -> Result<TaylorFn> {
    if !k.is_square() {
        return Err(Error::DimensionMismatch(
            "inverse Cayley transform needs a square function".into(),
        ));
    }
    let d = k.in_dim;
    let deviation = op_norm(&(&k.coeffs[0] - identity(d)));
    if deviation > 1e-10 {
        return Err(Error::ConstantTermNotIdentity { deviation });
    }
    let mut k_minus = k.sub(&TaylorFn::identity(d))?;
    k_minus.coeffs[0] = ComplexMatrix::zeros(d, d);
    let plus = k.add(&TaylorFn::identity(d))?;
    let inv = invert_unit(&plus, out_degree + 1)?;
    Ok(mul(&k_minus, &inv, Some(out_degree + 1))?.shift_down())
}

/// The `n x n` block Toeplitz matrix of `Re W`: diagonal blocks
/// `(W_0^* + W_0)/2`, block `(i, j)` equal to `W_{i-j}/2` below the diagonal
/// and `W_{j-i}^*/2` above it.
pub fn toeplitz_real_section(w: &TaylorFn, n: usize) -> Result<ComplexMatrix> {
    if !w.is_square() {
        return Err(Error::DimensionMismatch("Toeplitz section needs a square function".into()));
    }
    if n == 0 || n - 1 > w.degree() {
        return Err(Error::DegreeTooLow {
            degree: w.degree(),
            order: n,
        });
    }
    let d = w.in_dim;
    let mut out = ComplexMatrix::zeros(n * d, n * d);
    let diag = (&w.coeffs[0] + w.coeffs[0].adjoint()).scale(0.5);
    for i in 0..n {
        for j in 0..n {
            let block = match i.cmp(&j) {
                std::cmp::Ordering::Equal => diag.clone(),
                std::cmp::Ordering::Greater => w.coeffs[i - j].scale(0.5),
                std::cmp::Ordering::Less => w.coeffs[j - i].adjoint().scale(0.5),
            };
            out.view_mut((i * d, j * d), (d, d)).copy_from(&block);
        }
    }
    Ok(out)
}

/// `min_{1<=n<=n_max} λ_min(T_{Re W, n})`; nonnegative values certify positive
/// realness through the tested order. Coefficients past the stored degree
/// count as zero.
pub fn positive_real_margin(w: &TaylorFn, n_max: usize) -> Result<f64> {
    let padded;
    let w = if n_max > w.degree() + 1 {
        padded = w.with_degree(n_max - 1);
        &padded
    } else {
        w
    };
    let mut margin = f64::INFINITY;
    for n in 1..=n_max {
        margin = margin.min(psd_margin(&toeplitz_real_section(w, n)?)?);
    }
    Ok(margin)
}

/// Finite evidence that a function is in the Schur class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SchurCertificate {
    /// `1 - ||L_n||` for the lower-triangular block Toeplitz section `L_n`.
    pub section_margin: f64,
    /// `min (1 - ||T(λ)||)` over equispaced points on the circle of radius 0.999.
    pub boundary_margin: f64,
    pub sections_tested: usize,
    pub samples_tested: usize,
}

impl SchurCertificate {
    pub fn passes(&self, tol: f64) -> bool {
        self.section_margin >= -tol && self.boundary_margin >= -tol
    }

    pub fn worst(&self) -> f64 {
        self.section_margin.min(self.boundary_margin)
    }
}

/// Lower-triangular block Toeplitz matrix built from the first `n` coefficients.
pub fn multiplication_section(t: &TaylorFn, n: usize) -> ComplexMatrix {
    let (p, q) = (t.out_dim, t.in_dim);
    let mut out = ComplexMatrix::zeros(n * p, n * q);
    for i in 0..n {
        for j in 0..=i {
            if i - j <= t.degree() {
                out.view_mut((i * p, j * q), (p, q)).copy_from(&t.coeffs[i - j]);
            }
        }
    }
    out
}

/// Checks the two necessary Schur-class conditions. At least eight boundary
/// samples are always taken.
pub fn schur_margin(t: &TaylorFn, n_sections: usize, n_boundary_samples: usize) -> SchurCertificate {
    let n_sections = n_sections.max(1);
    let samples = n_boundary_samples.max(8);
    let section_margin = opcore::contraction_margin(&multiplication_section(t, n_sections));
    let boundary_margin = (0..samples)
        .map(|k| {
            let theta = 2.0 * PI * k as f64 / samples as f64;
            let lambda = Complex64::from_polar(BOUNDARY_RADIUS, theta);
            opcore::contraction_margin(&t.eval_unchecked(lambda))
        })
        .fold(1.0, f64::min);
    SchurCertificate {
        section_margin,
        boundary_margin,
        sections_tested: n_sections,
        samples_tested: samples,
    }
}

/// How hard to look before accepting a function as Schur class.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchurCheck {
    pub sections: usize,
    pub samples: usize,
    pub tol: f64,
}

impl Default for SchurCheck {
    fn default() -> Self {
        SchurCheck {
            sections: 8,
            samples: 64,
            tol: 1e-9,
        }
    }
}

impl SchurCheck {
    pub fn certify(&self, t: &TaylorFn) -> Result<SchurCertificate> {
        let cert = schur_margin(t, self.sections, self.samples);
        if cert.passes(self.tol) {
            Ok(cert)
        } else {
            Err(Error::ParameterNotSchur {
                section_margin: cert.section_margin,
                boundary_margin: cert.boundary_margin,
            })
        }
    }
}
