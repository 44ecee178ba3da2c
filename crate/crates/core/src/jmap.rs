//! The map from the constrained Schur class `S_Ω` back to Schur pairs.
//!
//! For a fixed solution `Γ`, `S_Ω` holds the Schur-class `C` on the defect
//! space of `Γ` with `C(λ)|F_Γ = Ω`. Each such `C` defines
//! `W = V + D_Γ K D_Γ`, `K` the Cayley transform of `C`, and the pair
//! `F = 2Θ(W + I)^{-1}`, `G = λ^{-1}(W - I)(W + I)^{-1}`, which reproduces `Θ`.

use serde::Serialize;

use crate::analytic::{cayley, invert_unit, mul, schur_margin, SchurCertificate, SchurCheck, TaylorFn};
use crate::error::{Error, Result};
use crate::lifting::{BigOmegaData, GammaOp};
use crate::majorant::w_from_k;
use crate::opcore::{identity, op_norm, real, ComplexMatrix};
use crate::schurpair::SchurPair;

#[derive(Debug, Clone, Serialize)]
pub struct SOmegaReport {
    pub schur: SchurCertificate,
    /// Coefficient-wise residuals `||C_0|F_Γ - Ω||`, `||C_n|F_Γ||`.
    pub restriction_residuals: Vec<f64>,
    pub max_restriction_residual: f64,
    pub tol: f64,
    pub pass: bool,
}

fn check_square_on_defect(bo: &BigOmegaData, c: &TaylorFn) -> Result<()> {
    let k = bo.defect().dim();
    if c.in_dim() != k || c.out_dim() != k {
        return Err(Error::DimensionMismatch(format!(
            "function is {}x{}, defect space of the symbol has dimension {k}",
            c.out_dim(),
            c.in_dim()
        )));
    }
    Ok(())
}

/// Membership test for `S_Ω`.
pub fn s_omega_margin(
    c: &TaylorFn,
    bo: &BigOmegaData,
    n_sections: usize,
    n_samples: usize,
    tol: f64,
) -> Result<SOmegaReport> {
    check_square_on_defect(bo, c)?;
    let schur = schur_margin(c, n_sections, n_samples);
    let restriction_residuals = bo.coupling().restriction_residuals(c);
    let max_restriction_residual = restriction_residuals.iter().copied().fold(0.0, f64::max);
    Ok(SOmegaReport {
        pass: schur.passes(tol) && max_restriction_residual <= tol,
        schur,
        restriction_residuals,
        max_restriction_residual,
        tol,
    })
}

/// The constant member `ΩΠ_{F_Γ}` of `S_Ω`.
pub fn canonical_parameter(bo: &BigOmegaData) -> TaylorFn {
    TaylorFn::constant(bo.coupling().base())
}

/// `C = ΩΠ_{F_Γ} + D_{Ω*} C_1 Π_{G_Γ}` for Schur-class `C_1: G_Γ -> D_{Ω*}`.
pub fn parameter_to_constrained(
    bo: &BigOmegaData,
    c1: &TaylorFn,
    out_degree: usize,
    check: &SchurCheck,
) -> Result<TaylorFn> {
    let (rows, cols) = bo.coupling().parameter_shape();
    if c1.out_dim() != rows || c1.in_dim() != cols {
        return Err(Error::DimensionMismatch(format!(
            "parameter is {}x{}, expected {rows}x{cols}",
            c1.out_dim(),
            c1.in_dim()
        )));
    }
    check.certify(c1)?;
    Ok(bo.coupling().assemble(c1)?.with_degree(out_degree))
}

/// Recovers `C_1` from a member of `S_Ω`.
pub fn constrained_to_parameter(bo: &BigOmegaData, c: &TaylorFn, tol: f64) -> Result<TaylorFn> {
    check_square_on_defect(bo, c)?;
    bo.coupling().recover(c, tol)
}

#[derive(Debug, Clone, Serialize)]
pub struct JGammaOutput {
    pub pair: SchurPair,
    pub w: TaylorFn,
    /// `||W_0 - I||` before the constant term is reset to `I`.
    pub w0_deviation: f64,
}

/// `J_Γ C` without the `S_Ω` membership test. `C` only needs to be a function
/// on the defect space of `Γ` whose Cayley transform exists.
pub fn j_gamma_unchecked(
    g: &GammaOp,
    bo: &BigOmegaData,
    c: &TaylorFn,
    out_degree: usize,
) -> Result<JGammaOutput> {
    check_square_on_defect(bo, c)?;
    let theta = g.theta();
    let d = theta.in_dim();
    let k = cayley(c, out_degree)?;
    let mut w = w_from_k(g, bo.defect(), &k, out_degree)?;
    let w0_deviation = op_norm(&(w.coeff(0) - identity(d)));
    let mut coeffs = w.into_coeffs();
    coeffs[0] = identity(d);
    w = TaylorFn::new(d, d, coeffs)?;

    let id = TaylorFn::identity(d);
    let inv = invert_unit(&w.add(&id)?, out_degree)?;
    let f = mul(theta, &inv, Some(out_degree))?.scale(real(2.0));
    let mut w_minus = w.sub(&id)?.into_coeffs();
    w_minus[0] = ComplexMatrix::zeros(d, d);
    let w_minus = TaylorFn::new(d, d, w_minus)?;
    let g_fn = mul(&w_minus, &inv, Some(out_degree))?.shift_down();
    Ok(JGammaOutput {
        pair: SchurPair::new(f, g_fn)?,
        w,
        w0_deviation,
    })
}

/// `J_Γ C` for `C` in `S_Ω`.
pub fn j_gamma(
    g: &GammaOp,
    bo: &BigOmegaData,
    c: &TaylorFn,
    out_degree: usize,
    check: &SchurCheck,
) -> Result<JGammaOutput> {
    let report = s_omega_margin(c, bo, check.sections, check.samples, check.tol)?;
    if !report.pass {
        return Err(Error::ParameterNotInSOmega(format!(
            "Schur margin {:.3e}, restriction residual {:.3e}",
            report.schur.worst(),
            report.max_restriction_residual
        )));
    }
    j_gamma_unchecked(g, bo, c, out_degree)
}
