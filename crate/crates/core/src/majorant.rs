//! The positive real function `V` attached to a symbol `Θ`, the harmonic
//! majorant inequality `Θ(λ)^*Θ(λ) <= Re W(λ)`, and the parameterization
//! `W = V + D_Γ K D_Γ` of all majorants with `W(0) = I`.

use num_complex::Complex64;
use serde::Serialize;

use crate::analytic::{cayley, positive_real_margin, SchurCheck, TaylorFn};
use crate::error::{Error, Result};
use crate::lifting::{GammaDefect, GammaOp};
use crate::opcore::{identity, op_norm, pinv, psd_margin, ComplexMatrix, DEFAULT_CLAMP_TOL};

/// Radii of the circles sampled by [`majorant_gap`].
pub const GAP_RADII: [f64; 4] = [0.3, 0.6, 0.9, 0.99];

/// Default quadrature size for [`poisson_cross_check`].
pub const DEFAULT_NODES: usize = 4096;

/// Order of the Toeplitz sections used when checking positive realness.
pub const POSITIVE_REAL_ORDER: usize = 16;

/// `V_0 = Σ Θ_ν^* Θ_ν`, `V_n = 2 Σ Θ_ν^* Θ_{ν+n}`.
pub fn v_from_theta(theta: &TaylorFn, out_degree: usize) -> TaylorFn {
    let d = theta.in_dim();
    let c = theta.coeffs();
    let coeffs = (0..=out_degree)
        .map(|n| {
            let mut acc = ComplexMatrix::zeros(d, d);
            for nu in 0..c.len().saturating_sub(n) {
                acc += c[nu].adjoint() * &c[nu + n];
            }
            if n > 0 {
                acc *= Complex64::new(2.0, 0.0);
            }
            acc
        })
        .collect();
    TaylorFn::new(d, d, coeffs).expect("coefficients are square")
}

/// `min λ_min(Re W(λ) - Θ(λ)^*Θ(λ))` over `n_samples` points on each circle
/// of [`GAP_RADII`].
pub fn majorant_gap(theta: &TaylorFn, w: &TaylorFn, n_samples: usize) -> Result<f64> {
    let d = theta.in_dim();
    if w.in_dim() != d || w.out_dim() != d {
        return Err(Error::DimensionMismatch(format!(
            "W is {}x{}, expected {d}x{d}",
            w.out_dim(),
            w.in_dim()
        )));
    }
    let n_samples = n_samples.max(1);
    let mut gap = f64::INFINITY;
    for r in GAP_RADII {
        for k in 0..n_samples {
            let lambda = Complex64::from_polar(r, std::f64::consts::TAU * k as f64 / n_samples as f64);
            let wl = w.eval(lambda)?;
            let tl = theta.eval(lambda)?;
            let re = (&wl + wl.adjoint()) * Complex64::new(0.5, 0.0);
            let diff = re - tl.adjoint() * tl;
            // symmetrize away rounding before the eigenvalue test
            let diff = (&diff + diff.adjoint()) * Complex64::new(0.5, 0.0);
            gap = gap.min(psd_margin(&diff)?);
        }
    }
    Ok(gap)
}

fn check_parameter_shape(defect: &GammaDefect, c: &TaylorFn) -> Result<()> {
    let k = defect.dim();
    if c.in_dim() != k || c.out_dim() != k {
        return Err(Error::DimensionMismatch(format!(
            "parameter is {}x{}, defect space of the symbol has dimension {k}",
            c.out_dim(),
            c.in_dim()
        )));
    }
    Ok(())
}

/// `V + D_Γ K D_Γ` for a function `K` on the defect space of `Γ`.
pub fn w_from_k(g: &GammaOp, defect: &GammaDefect, k: &TaylorFn, out_degree: usize) -> Result<TaylorFn> {
    check_parameter_shape(defect, k)?;
    let v = v_from_theta(g.theta(), out_degree);
    let second = k.with_degree(out_degree).sandwich(&defect.embed, &defect.embed.adjoint());
    v.add(&second)
}

/// `W = V + D_Γ (I + λC)(I - λC)^{-1} D_Γ` for Schur-class `C` on the defect
/// space of `Γ`.
pub fn w_from_contraction_parameter(
    g: &GammaOp,
    c: &TaylorFn,
    out_degree: usize,
    check: &SchurCheck,
) -> Result<TaylorFn> {
    let defect = GammaDefect::new(g, DEFAULT_CLAMP_TOL, crate::opcore::DEFAULT_RANK_TOL)?;
    check_parameter_shape(&defect, c)?;
    check.certify(c)?;
    let k = cayley(c, out_degree)?;
    w_from_k(g, &defect, &k, out_degree)
}

#[derive(Debug, Clone, Serialize)]
pub struct DeltaFactor {
    /// `K` with `W - V = D_Γ K D_Γ`, constant term forced to `I`.
    pub k: TaylorFn,
    /// `||K_0 - I||` before forcing.
    pub k0_deviation: f64,
    /// Largest `||D_Γ K_n D_Γ - Δ_n||`.
    pub residual: f64,
    pub positive_real_margin: f64,
}

/// Factors `Δ = W - V` as `D_Γ K D_Γ` by solving on the range of `D_Γ`.
pub fn factor_delta(g: &GammaOp, w: &TaylorFn, rank_tol: f64, tol: f64) -> Result<DeltaFactor> {
    let defect = GammaDefect::new(g, DEFAULT_CLAMP_TOL, rank_tol)?;
    let d = g.theta().in_dim();
    if w.in_dim() != d || w.out_dim() != d {
        return Err(Error::DimensionMismatch(format!(
            "W is {}x{}, expected {d}x{d}",
            w.out_dim(),
            w.in_dim()
        )));
    }
    let delta = w.sub(&v_from_theta(g.theta(), w.degree()))?;
    let left = pinv(&defect.embed, rank_tol);
    let right = left.adjoint();
    let mut residual = 0.0f64;
    let mut coeffs: Vec<ComplexMatrix> = delta
        .coeffs()
        .iter()
        .map(|dn| {
            let kn = &left * dn * &right;
            residual = residual.max(op_norm(&(&defect.embed * &kn * defect.embed.adjoint() - dn)));
            kn
        })
        .collect();
    if residual > tol {
        return Err(Error::ResidualTooLarge {
            residual,
            tol,
            context: "W - V has components outside the range of the defect of the symbol".into(),
        });
    }
    let k0_deviation = op_norm(&(&coeffs[0] - identity(defect.dim())));
    coeffs[0] = identity(defect.dim());
    let k = TaylorFn::new(defect.dim(), defect.dim(), coeffs)?;
    let positive_real_margin = positive_real_margin(&k, POSITIVE_REAL_ORDER.min(k.degree() + 1))?;
    if positive_real_margin < -tol {
        return Err(Error::NotPositiveReal {
            margin: positive_real_margin,
        });
    }
    Ok(DeltaFactor {
        k,
        k0_deviation,
        residual,
        positive_real_margin,
    })
}

/// Value of `V` at `λ` and the trapezoid approximation of
/// `(1/2π) ∫ (e^{iω} + λ)/(e^{iω} - λ) |θ(e^{iω})|² dω` for scalar `θ`.
pub fn poisson_cross_check(theta: &TaylorFn, lambda: Complex64, n_nodes: usize) -> Result<(Complex64, Complex64)> {
    if theta.in_dim() != 1 || theta.out_dim() != 1 {
        return Err(Error::NotScalar {
            rows: theta.out_dim(),
            cols: theta.in_dim(),
        });
    }
    if lambda.norm() >= 1.0 {
        return Err(Error::OutsideDisk {
            modulus: lambda.norm(),
        });
    }
    if n_nodes == 0 {
        return Err(Error::InvalidInput("quadrature needs at least one node".into()));
    }
    let v = v_from_theta(theta, theta.degree()).eval(lambda)?[(0, 0)];
    let mut sum = Complex64::new(0.0, 0.0);
    for k in 0..n_nodes {
        let z = Complex64::from_polar(1.0, std::f64::consts::TAU * k as f64 / n_nodes as f64);
        let weight = theta.eval(z)?[(0, 0)].norm_sqr();
        sum += (z + lambda) / (z - lambda) * weight;
    }
    Ok((v, sum / n_nodes as f64))
}

/// `Re W - Θ^*Θ` is checked pointwise; `W - V` is checked by Toeplitz sections.
#[derive(Debug, Clone, Serialize)]
pub struct MajorantReport {
    pub v: TaylorFn,
    pub w: TaylorFn,
    pub gap_v: f64,
    pub gap_w: f64,
    pub positive_real_margin_v: f64,
    pub positive_real_margin_excess: f64,
    pub w0_deviation: f64,
    pub tol: f64,
    pub pass: bool,
}

/// Runs the majorant checks for `Γ` and an optional parameter `C` (zero when
/// absent).
pub fn majorant_report(
    g: &GammaOp,
    c: Option<&TaylorFn>,
    out_degree: usize,
    n_samples: usize,
    check: &SchurCheck,
    tol: f64,
) -> Result<MajorantReport> {
    let defect = GammaDefect::new(g, DEFAULT_CLAMP_TOL, crate::opcore::DEFAULT_RANK_TOL)?;
    let zero;
    let c = match c {
        Some(c) => c,
        None => {
            zero = TaylorFn::zeros(defect.dim(), defect.dim(), 0);
            &zero
        }
    };
    let v = v_from_theta(g.theta(), out_degree);
    let w = w_from_contraction_parameter(g, c, out_degree, check)?;
    let order = POSITIVE_REAL_ORDER.min(out_degree + 1);
    let gap_v = majorant_gap(g.theta(), &v, n_samples)?;
    let gap_w = majorant_gap(g.theta(), &w, n_samples)?;
    let positive_real_margin_v = positive_real_margin(&v, order)?;
    let positive_real_margin_excess = positive_real_margin(&w.sub(&v)?, order)?;
    let w0_deviation = op_norm(&(w.coeff(0) - identity(w.in_dim())));
    let pass = gap_v >= -tol
        && gap_w >= -tol
        && positive_real_margin_v >= -tol
        && positive_real_margin_excess >= -tol;
    Ok(MajorantReport {
        v,
        w,
        gap_v,
        gap_w,
        positive_real_margin_v,
        positive_real_margin_excess,
        w0_deviation,
        tol,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opcore::{c64, real_matrix};

    fn ds3_theta() -> GammaOp {
        GammaOp::new(
            TaylorFn::new(
                1,
                2,
                vec![real_matrix(1, 2, &[0.0, 1.0]), real_matrix(1, 2, &[1.0, 0.0])],
            )
            .unwrap(),
        )
    }

    #[test]
    fn v_examples() {
        let v = v_from_theta(&TaylorFn::scalar_real(&[0.0, 1.0]), 4);
        assert_eq!(v.coeff(0)[(0, 0)], c64(1.0, 0.0));
        assert!((1..=4).all(|n| v.coeff(n)[(0, 0)].norm() == 0.0));

        let v = v_from_theta(&TaylorFn::scalar_real(&[0.5, 0.5]), 3);
        assert!((v.coeff(0)[(0, 0)].re - 0.5).abs() < 1e-15);
        assert!((v.coeff(1)[(0, 0)].re - 0.5).abs() < 1e-15);
        assert_eq!(v.coeff(2)[(0, 0)].norm(), 0.0);

        let v = v_from_theta(ds3_theta().theta(), 2);
        assert_eq!(v.coeff(0), identity(2));
        assert_eq!(v.coeff(1), real_matrix(2, 2, &[0.0, 0.0, 2.0, 0.0]));
    }

    #[test]
    fn gap_examples() {
        let theta = TaylorFn::scalar_real(&[0.0, 1.0]);
        let v = v_from_theta(&theta, 4);
        let gap = majorant_gap(&theta, &v, 64).unwrap();
        assert!((gap - (1.0 - 0.99f64 * 0.99)).abs() < 1e-12);
        let shifted = v.add(&TaylorFn::identity(1)).unwrap();
        assert!((majorant_gap(&theta, &shifted, 64).unwrap() - gap - 1.0).abs() < 1e-12);

        let g = ds3_theta();
        let v = v_from_theta(g.theta(), 4);
        assert!(majorant_gap(g.theta(), &v, 64).unwrap().abs() < 1e-12);
    }

    #[test]
    fn w_examples() {
        let check = SchurCheck::default();
        let zero = GammaOp::new(TaylorFn::zeros(2, 2, 3));
        let w = w_from_contraction_parameter(&zero, &TaylorFn::zeros(2, 2, 0), 5, &check).unwrap();
        assert!(w.max_coeff_distance(&TaylorFn::identity(2), 5) < 1e-15);

        let g = ds3_theta();
        let w = w_from_contraction_parameter(&g, &TaylorFn::zeros(0, 0, 0), 5, &check).unwrap();
        assert!(w.max_coeff_distance(&v_from_theta(g.theta(), 5), 5) == 0.0);

        let half = GammaOp::new(TaylorFn::scalar_real(&[0.5]));
        let w = w_from_contraction_parameter(&half, &TaylorFn::scalar_real(&[0.0]), 4, &check).unwrap();
        assert!(w.max_coeff_distance(&TaylorFn::identity(1), 4) < 1e-15);
    }

    #[test]
    fn factor_examples() {
        let zero = GammaOp::new(TaylorFn::zeros(1, 1, 2));
        let w = TaylorFn::scalar_real(&[1.0, 0.5, 0.25]);
        let f = factor_delta(&zero, &w, 1e-10, 1e-9).unwrap();
        assert!(f.k.max_coeff_distance(&w, 2) < 1e-15);

        let g = GammaOp::new(TaylorFn::scalar_real(&[0.3, 0.4]));
        let c = TaylorFn::scalar_real(&[0.2, -0.5]);
        let w = w_from_contraction_parameter(&g, &c, 12, &SchurCheck::default()).unwrap();
        let f = factor_delta(&g, &w, 1e-10, 1e-9).unwrap();
        let k = cayley(&c, 12).unwrap();
        assert!(f.k.max_coeff_distance(&k, 12) < 1e-12);

        let iso = ds3_theta();
        let w = v_from_theta(iso.theta(), 4);
        let f = factor_delta(&iso, &w, 1e-10, 1e-9).unwrap();
        assert_eq!(f.k.in_dim(), 0);
    }

    #[test]
    fn factor_rejects_foreign_delta() {
        let g = ds3_theta();
        let w = v_from_theta(g.theta(), 2).add(&TaylorFn::identity(2)).unwrap();
        assert!(matches!(
            factor_delta(&g, &w, 1e-10, 1e-9),
            Err(Error::ResidualTooLarge { .. })
        ));
    }

    #[test]
    fn poisson_examples() {
        let lambda = c64(0.3, -0.4);
        let (v, q) = poisson_cross_check(&TaylorFn::scalar_real(&[0.0, 1.0]), lambda, 4096).unwrap();
        assert!((v - 1.0).norm() < 1e-12 && (q - 1.0).norm() < 1e-12);
        let (v, q) = poisson_cross_check(&TaylorFn::scalar_real(&[0.5, 0.5]), c64(0.0, 0.0), 4096).unwrap();
        assert!((v - 0.5).norm() < 1e-12 && (q - 0.5).norm() < 1e-12);
        let (v, q) = poisson_cross_check(&TaylorFn::scalar_real(&[0.0]), lambda, 64).unwrap();
        assert_eq!(v.norm() + q.norm(), 0.0);
        assert!(matches!(
            poisson_cross_check(&TaylorFn::zeros(2, 1, 0), lambda, 64),
            Err(Error::NotScalar { .. })
        ));
    }
}
