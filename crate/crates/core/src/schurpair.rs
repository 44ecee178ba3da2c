//! Schur pairs `{F, G}`: stacked Schur-class functions `col[F, G]` on the
//! defect space of `A` whose restriction to `F` is the coupling contraction.
//!
//! Pairs are parameterized by Schur-class `H` from `G` into the range of
//! `D_{ω*}` through `col[F, G](λ) = ω Π_F + D_{ω*} H(λ) Π_G`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::analytic::{schur_margin, SchurCertificate, SchurCheck, TaylorFn, BOUNDARY_RADIUS};
use crate::dataset::OmegaData;
use crate::error::{Error, Result};
use crate::opcore::op_norm;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchurPair {
    /// `D_A -> D_{T'}`
    #[serde(rename = "F")]
    pub f: TaylorFn,
    /// `D_A -> D_A`
    #[serde(rename = "G")]
    pub g: TaylorFn,
}

impl SchurPair {
    pub fn new(f: TaylorFn, g: TaylorFn) -> Result<Self> {
        if f.in_dim() != g.in_dim() || !g.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "F is {}x{} and G is {}x{}",
                f.out_dim(),
                f.in_dim(),
                g.out_dim(),
                g.in_dim()
            )));
        }
        Ok(SchurPair { f, g })
    }

    pub fn stacked(&self) -> TaylorFn {
        self.f
            .stack(&self.g)
            .expect("pair components share their input space")
    }

    pub fn degree(&self) -> usize {
        self.f.degree().max(self.g.degree())
    }

    fn split(od: &OmegaData, full: TaylorFn) -> SchurPair {
        let dt = od.defects().dim_t();
        let da = od.defects().dim_a();
        SchurPair {
            f: full.rows(0, dt),
            g: full.rows(dt, da),
        }
    }
}

fn check_pair_shape(od: &OmegaData, p: &SchurPair) -> Result<()> {
    let (dt, da) = (od.defects().dim_t(), od.defects().dim_a());
    let ok = p.f.out_dim() == dt && p.f.in_dim() == da && p.g.out_dim() == da && p.g.in_dim() == da;
    if ok {
        Ok(())
    } else {
        Err(Error::DimensionMismatch(format!(
            "pair is F {}x{}, G {}x{}; data set needs F {dt}x{da}, G {da}x{da}",
            p.f.out_dim(),
            p.f.in_dim(),
            p.g.out_dim(),
            p.g.in_dim()
        )))
    }
}

/// Builds the pair of parameter `H`, cut or padded to `out_degree`.
pub fn pair_from_parameter(
    od: &OmegaData,
    h: &TaylorFn,
    out_degree: usize,
    check: &SchurCheck,
) -> Result<SchurPair> {
    let (rows, cols) = od.coupling().parameter_shape();
    if h.out_dim() != rows || h.in_dim() != cols {
        return Err(Error::DimensionMismatch(format!(
            "parameter is {}x{}, expected {rows}x{cols}",
            h.out_dim(),
            h.in_dim()
        )));
    }
    check.certify(h)?;
    let full = od.coupling().assemble(h)?.with_degree(out_degree);
    Ok(SchurPair::split(od, full))
}

#[derive(Debug, Clone, Serialize)]
pub struct PairReport {
    pub schur: SchurCertificate,
    /// Largest coefficient-wise restriction residual on `F`.
    pub restriction_residual: f64,
    /// Largest `||col[F,G](λ)|F - ω||` over boundary samples.
    pub sampled_restriction_residual: f64,
    pub tol: f64,
    pub pass: bool,
}

pub fn verify_pair(
    od: &OmegaData,
    p: &SchurPair,
    n_sections: usize,
    n_samples: usize,
    tol: f64,
) -> Result<PairReport> {
    check_pair_shape(od, p)?;
    let stacked = p.stacked();
    let schur = schur_margin(&stacked, n_sections, n_samples);
    let restriction_residual = od
        .coupling()
        .restriction_residuals(&stacked)
        .into_iter()
        .fold(0.0, f64::max);
    let f_basis = od.f_basis().matrix();
    let samples = n_samples.max(8);
    let sampled_restriction_residual = (0..samples)
        .map(|k| {
            let theta = std::f64::consts::TAU * k as f64 / samples as f64;
            let lambda = Complex64::from_polar(BOUNDARY_RADIUS, theta);
            let value = stacked.eval_unchecked(lambda);
            if f_basis.ncols() == 0 {
                0.0
            } else {
                op_norm(&(value * f_basis - od.omega()))
            }
        })
        .fold(0.0, f64::max);
    let pass = schur.passes(tol) && restriction_residual <= tol;
    Ok(PairReport {
        schur,
        restriction_residual,
        sampled_restriction_residual,
        tol,
        pass,
    })
}

/// Recovers `H` from a pair; fails when the pair's values on `G` leave the
/// range of `D_{ω*}` by more than `tol`.
pub fn parameter_from_pair(od: &OmegaData, p: &SchurPair, tol: f64) -> Result<TaylorFn> {
    check_pair_shape(od, p)?;
    od.coupling().recover(&p.stacked(), tol)
}
