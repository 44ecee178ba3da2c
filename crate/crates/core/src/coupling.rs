//! A contraction known on a subspace, and the parameterization of all of its
//! contractive extensions.
//!
//! Given vectors `x_h` spanning a subspace `F` of `C^d` and targets `y_h` with
//! `||y_h|| <= ||x_h||`, the relation `ω x_h = y_h` defines a contraction
//! `ω: F -> C^e`. Every function whose values restrict to `ω` on `F` and are
//! contractive has the form
//!
//! `X(λ) = ω Π_F + D_{ω*} P(λ) Π_G`,   `G = C^d ⊖ F`,
//!
//! with `P` a Schur-class function from `G` into the closed range of
//! `D_{ω*}`, and `X` determines `P`. The same structure serves the coupling
//! contraction of a data set and the one attached to a fixed solution.

use crate::analytic::TaylorFn;
use crate::error::{Error, Result};
use crate::opcore::{
    self, hermitian_sqrt, identity, op_norm, orthonormal_range, pinv, ComplexMatrix,
    SubspaceBasis,
};

#[derive(Debug, Clone)]
pub struct Coupling {
    f_basis: SubspaceBasis,
    g_basis: SubspaceBasis,
    /// `ω` in `F` coordinates, `e x dim F`.
    map: ComplexMatrix,
    /// `D_{ω*}`, `e x e`.
    dstar: ComplexMatrix,
    dstar_basis: SubspaceBasis,
    /// `D_{ω*}` restricted to its range, in range coordinates: `e x dim D_{ω*}`.
    dstar_embed: ComplexMatrix,
    dstar_embed_pinv: ComplexMatrix,
    defining_residual: f64,
    rank_tol: f64,
}

impl Coupling {
    /// Solves `ω · source = target` on the closure of the range of `source`.
    pub fn solve(
        source: &ComplexMatrix,
        target: &ComplexMatrix,
        rank_tol: f64,
        clamp_tol: f64,
    ) -> Result<Coupling> {
        if source.ncols() != target.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "source has {} columns, target {}",
                source.ncols(),
                target.ncols()
            )));
        }
        let e = target.nrows();
        let f_basis = orthonormal_range(source, rank_tol);
        let g_basis = f_basis.complement();
        let coords = f_basis.coords() * source;
        let map = target * pinv(&coords, rank_tol);
        let defining_residual = if target.is_empty() {
            0.0
        } else {
            op_norm(&(&map * &coords - target))
        };
        let dstar = hermitian_sqrt(&(identity(e) - &map * map.adjoint()), clamp_tol)?;
        Ok(Self::assemble_parts(
            f_basis,
            g_basis,
            map,
            dstar,
            defining_residual,
            rank_tol,
        ))
    }

    fn assemble_parts(
        f_basis: SubspaceBasis,
        g_basis: SubspaceBasis,
        map: ComplexMatrix,
        dstar: ComplexMatrix,
        defining_residual: f64,
        rank_tol: f64,
    ) -> Coupling {
        let dstar_basis = orthonormal_range(&dstar, rank_tol);
        let dstar_embed = &dstar * dstar_basis.matrix();
        let dstar_embed_pinv = pinv(&dstar_embed, rank_tol);
        Coupling {
            f_basis,
            g_basis,
            map,
            dstar,
            dstar_basis,
            dstar_embed,
            dstar_embed_pinv,
            defining_residual,
            rank_tol,
        }
    }

    pub fn f_basis(&self) -> &SubspaceBasis {
        &self.f_basis
    }

    pub fn g_basis(&self) -> &SubspaceBasis {
        &self.g_basis
    }

    pub fn map(&self) -> &ComplexMatrix {
        &self.map
    }

    pub fn dstar(&self) -> &ComplexMatrix {
        &self.dstar
    }

    pub fn dstar_basis(&self) -> &SubspaceBasis {
        &self.dstar_basis
    }

    /// `||ω · source - target||` left over by the least-squares solve.
    pub fn defining_residual(&self) -> f64 {
        self.defining_residual
    }

    pub fn domain_dim(&self) -> usize {
        self.f_basis.ambient_dim()
    }

    pub fn codomain_dim(&self) -> usize {
        self.map.nrows()
    }

    /// Shape `(rows, cols)` of the free parameter: `dim D_{ω*} x dim G`.
    pub fn parameter_shape(&self) -> (usize, usize) {
        (self.dstar_basis.dim(), self.g_basis.dim())
    }

    pub fn isometry_defect(&self) -> f64 {
        op_norm(&(self.map.adjoint() * &self.map - identity(self.map.ncols())))
    }

    pub fn is_isometric(&self, tol: f64) -> bool {
        self.isometry_defect() <= tol
    }

    pub fn contraction_margin(&self) -> f64 {
        opcore::contraction_margin(&self.map)
    }

    /// `ω Π_F` as a map on the whole domain.
    pub fn base(&self) -> ComplexMatrix {
        &self.map * self.f_basis.coords()
    }

    /// `ω Π_F + D_{ω*} P(λ) Π_G`.
    pub fn assemble(&self, param: &TaylorFn) -> Result<TaylorFn> {
        let (rows, cols) = self.parameter_shape();
        if param.out_dim() != rows || param.in_dim() != cols {
            return Err(Error::DimensionMismatch(format!(
                "parameter is {}x{}, expected {rows}x{cols}",
                param.out_dim(),
                param.in_dim()
            )));
        }
        let g_coords = self.g_basis.coords();
        let mut out = param.sandwich(&self.dstar_embed, &g_coords);
        let base = self.base();
        let coeffs: Vec<ComplexMatrix> = out
            .coeffs()
            .iter()
            .enumerate()
            .map(|(n, c)| if n == 0 { c + &base } else { c.clone() })
            .collect();
        out = TaylorFn::new(self.codomain_dim(), self.domain_dim(), coeffs)?;
        Ok(out)
    }

    /// Coefficient-wise restriction residuals: `||X_0|F - ω||` then
    /// `||X_n|F||` for `n >= 1`.
    pub fn restriction_residuals(&self, full: &TaylorFn) -> Vec<f64> {
        let f = self.f_basis.matrix();
        full.coeffs()
            .iter()
            .enumerate()
            .map(|(n, c)| {
                let restricted = c * f;
                if n == 0 {
                    op_norm(&(restricted - &self.map))
                } else {
                    op_norm(&restricted)
                }
            })
            .collect()
    }

    /// Inverts [`Coupling::assemble`]: solves `D_{ω*} P_n = X_n|G` on the range
    /// of `D_{ω*}`. Fails when `X_n|G` has a component outside that range.
    pub fn recover(&self, full: &TaylorFn, tol: f64) -> Result<TaylorFn> {
        if full.out_dim() != self.codomain_dim() || full.in_dim() != self.domain_dim() {
            return Err(Error::DimensionMismatch(format!(
                "function is {}x{}, expected {}x{}",
                full.out_dim(),
                full.in_dim(),
                self.codomain_dim(),
                self.domain_dim()
            )));
        }
        let g = self.g_basis.matrix();
        let (rows, cols) = self.parameter_shape();
        let mut worst = 0.0f64;
        let coeffs: Vec<ComplexMatrix> = full
            .coeffs()
            .iter()
            .map(|c| {
                let x = c * g;
                let p = &self.dstar_embed_pinv * &x;
                if !x.is_empty() {
                    worst = worst.max(op_norm(&(&self.dstar_embed * &p - &x)));
                }
                p
            })
            .collect();
        if worst > tol {
            return Err(Error::ResidualTooLarge {
                residual: worst,
                tol,
                context: "restriction to the complement leaves the range of the defect operator"
                    .into(),
            });
        }
        TaylorFn::new(rows, cols, coeffs)
    }

    pub fn rank_tol(&self) -> f64 {
        self.rank_tol
    }
}
