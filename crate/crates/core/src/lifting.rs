//! Solutions of the lifting problem and the contraction `Ω` they induce.
//!
//! A solution is `B = col[A, Γ D_A]` with `Γ: D_A -> H²(D_{T'})` given by its
//! symbol `Θ`. The shift on `H²` is an index shift on coefficient lists, so
//! no shift matrices appear.

use serde::{Deserialize, Serialize};

use crate::analytic::{SchurCheck, TaylorFn, DEFAULT_DEGREE};
use crate::coupling::Coupling;
use crate::dataset::{DataSet, DefectSpaces, OmegaData};
use crate::error::{Error, Result};
use crate::opcore::{
    hermitian_sqrt, identity, op_norm, orthonormal_range, psd_margin, ComplexMatrix,
    ComplexVector, SubspaceBasis, DEFAULT_CLAMP_TOL, DEFAULT_RANK_TOL,
};
use crate::schurpair::{pair_from_parameter, SchurPair};
use crate::serial;

/// An operator `Γ: D_A -> H²(D_{T'})` stored through its symbol, truncated at
/// `degree`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GammaOp {
    theta: TaylorFn,
}

impl GammaOp {
    pub fn new(theta: TaylorFn) -> Self {
        GammaOp { theta }
    }

    pub fn theta(&self) -> &TaylorFn {
        &self.theta
    }

    pub fn degree(&self) -> usize {
        self.theta.degree()
    }

    /// `Σ_{ν<=N} Θ_ν^* Θ_ν`, the truncated `Γ^*Γ`.
    pub fn gram(&self) -> ComplexMatrix {
        let d = self.theta.in_dim();
        self.theta
            .coeffs()
            .iter()
            .fold(ComplexMatrix::zeros(d, d), |acc, c| acc + c.adjoint() * c)
    }

    /// `1 - λ_max(Σ Θ_ν^* Θ_ν)`.
    pub fn contraction_margin(&self) -> f64 {
        let d = self.theta.in_dim();
        match psd_margin(&(identity(d) - self.gram())) {
            Ok(m) if m.is_finite() => m,
            _ => 1.0,
        }
    }

    /// Norm of the last stored coefficient, a proxy for the truncated tail.
    pub fn tail_norm(&self) -> f64 {
        op_norm(&self.theta.coeff(self.degree()))
    }
}

/// Coefficients of an element of the truncated `H²(D_{T'})`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TruncatedH2 {
    #[serde(serialize_with = "serialize_vectors")]
    pub coeffs: Vec<ComplexVector>,
}

fn serialize_vectors<S: serde::Serializer>(v: &[ComplexVector], s: S) -> std::result::Result<S::Ok, S::Error> {
    let rows: Vec<_> = v.iter().map(serial::vector_to_json).collect();
    rows.serialize(s)
}

impl TruncatedH2 {
    pub fn norm_squared(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_squared()).sum()
    }

    /// Multiplication by `λ`.
    pub fn shift(&self) -> TruncatedH2 {
        let mut coeffs = Vec::with_capacity(self.coeffs.len() + 1);
        if let Some(first) = self.coeffs.first() {
            coeffs.push(ComplexVector::zeros(first.len()));
        }
        coeffs.extend(self.coeffs.iter().cloned());
        TruncatedH2 { coeffs }
    }
}

/// `Θ(λ) = F(λ)(I - λG(λ))^{-1}` through degree `n`, from
/// `Θ_n = F_n + Σ_{k<n} Θ_k G_{n-1-k}`.
pub fn gamma_from_pair(p: &SchurPair, n: usize) -> GammaOp {
    let mut coeffs: Vec<ComplexMatrix> = Vec::with_capacity(n + 1);
    for m in 0..=n {
        let mut c = p.f.coeff(m);
        for (k, theta_k) in coeffs.iter().enumerate() {
            let j = m - 1 - k;
            if j <= p.g.degree() {
                c += theta_k * &p.g.coeffs()[j];
            }
        }
        coeffs.push(c);
    }
    GammaOp::new(
        TaylorFn::new(p.f.out_dim(), p.f.in_dim(), coeffs).expect("coefficient shapes follow F"),
    )
}

#[derive(Debug, Clone, Serialize)]
pub struct SolutionReport {
    /// `1 - λ_max(Σ Θ_ν^* Θ_ν)`
    pub contraction_margin: f64,
    /// `r_0 = ||Θ_0 D_A Q - D_{T'} A R||`, `r_{n+1} = ||Θ_{n+1} D_A Q - Θ_n D_A R||`.
    pub residuals: Vec<f64>,
    pub max_residual: f64,
    pub degree: usize,
    pub tail_norm: f64,
    pub tol: f64,
    pub pass: bool,
}

fn check_theta_shape(defects: &DefectSpaces, g: &GammaOp) -> Result<()> {
    let t = g.theta();
    if t.in_dim() != defects.dim_a() || t.out_dim() != defects.dim_t() {
        return Err(Error::DimensionMismatch(format!(
            "symbol is {}x{}, data set needs {}x{}",
            t.out_dim(),
            t.in_dim(),
            defects.dim_t(),
            defects.dim_a()
        )));
    }
    Ok(())
}

/// Checks `Γ` against the lifting constraints coefficient by coefficient.
pub fn verify_solution(ds: &DataSet, g: &GammaOp, tol: f64) -> Result<SolutionReport> {
    let defects = DefectSpaces::new(ds, DEFAULT_CLAMP_TOL, DEFAULT_RANK_TOL)?;
    check_theta_shape(&defects, g)?;
    let da_q = defects.d_a_coords(ds.q());
    let da_r = defects.d_a_coords(ds.r());
    let dt_ar = defects.d_t_coords(&(ds.a() * ds.r()));
    let theta = g.theta();
    let mut residuals = Vec::with_capacity(theta.degree() + 1);
    residuals.push(op_norm(&(&theta.coeffs()[0] * &da_q - &dt_ar)));
    for n in 0..theta.degree() {
        residuals.push(op_norm(
            &(&theta.coeffs()[n + 1] * &da_q - &theta.coeffs()[n] * &da_r),
        ));
    }
    let max_residual = residuals.iter().copied().fold(0.0, f64::max);
    let contraction_margin = g.contraction_margin();
    Ok(SolutionReport {
        contraction_margin,
        pass: contraction_margin >= -tol && max_residual <= tol,
        residuals,
        max_residual,
        degree: theta.degree(),
        tail_norm: g.tail_norm(),
        tol,
    })
}

/// `B = col[A, Γ D_A]: H -> H' ⊕ H²(D_{T'})`.
#[derive(Debug, Clone)]
pub struct BlockSolution {
    ds: DataSet,
    gamma: GammaOp,
    defects: DefectSpaces,
}

impl BlockSolution {
    pub fn new(ds: DataSet, gamma: GammaOp) -> Result<Self> {
        let defects = DefectSpaces::new(&ds, DEFAULT_CLAMP_TOL, DEFAULT_RANK_TOL)?;
        check_theta_shape(&defects, &gamma)?;
        Ok(BlockSolution { ds, gamma, defects })
    }

    pub fn data_set(&self) -> &DataSet {
        &self.ds
    }

    pub fn gamma(&self) -> &GammaOp {
        &self.gamma
    }

    /// `(A h, Θ(λ) D_A h)`, the second component in ambient coordinates of
    /// `H'`.
    pub fn apply(&self, h: &ComplexVector) -> Result<(ComplexVector, TruncatedH2)> {
        if h.len() != self.ds.a().ncols() {
            return Err(Error::DimensionMismatch(format!(
                "vector has length {}, expected {}",
                h.len(),
                self.ds.a().ncols()
            )));
        }
        let top = self.ds.a() * h;
        let x = self.defects.basis_a.coords() * &self.defects.d_a * h;
        let to_ambient = self.defects.basis_t.matrix();
        let coeffs = self
            .gamma
            .theta()
            .apply_vector(&x)
            .into_iter()
            .map(|c| to_ambient * c)
            .collect();
        Ok((top, TruncatedH2 { coeffs }))
    }
}

pub fn apply_solution(b: &BlockSolution, h: &ComplexVector) -> Result<(ComplexVector, TruncatedH2)> {
    b.apply(h)
}

/// `D_Γ` from the truncated `Γ^*Γ`. Truncation makes it an overestimate of
/// the true defect.
pub fn gamma_defect(g: &GammaOp, clamp_tol: f64) -> Result<ComplexMatrix> {
    let d = g.theta().in_dim();
    hermitian_sqrt(&(identity(d) - g.gram()), clamp_tol)
}

/// `D_Γ` together with an orthonormal basis of its range. Functions on the
/// defect space of `Γ` (the parameters `C`, `K`) use those coordinates.
#[derive(Debug, Clone)]
pub struct GammaDefect {
    pub matrix: ComplexMatrix,
    pub basis: SubspaceBasis,
    /// `D_Γ` restricted to its range: `dim D_A x dim D_Γ`.
    pub embed: ComplexMatrix,
}

impl GammaDefect {
    pub fn new(g: &GammaOp, clamp_tol: f64, rank_tol: f64) -> Result<Self> {
        let matrix = gamma_defect(g, clamp_tol)?;
        let basis = orthonormal_range(&matrix, rank_tol);
        let embed = &matrix * basis.matrix();
        Ok(GammaDefect {
            matrix,
            basis,
            embed,
        })
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    /// Coordinates of `D_Γ x` in the basis of the defect space.
    pub fn coords_of(&self, x: &ComplexMatrix) -> ComplexMatrix {
        self.embed.adjoint() * x
    }
}

/// `Ω: F_Γ -> D_Γ` defined by `Ω D_Γ D_A Q h = D_Γ D_A R h`, with
/// `F_Γ = closure(D_Γ F)`.
#[derive(Debug, Clone)]
pub struct BigOmegaData {
    defect: GammaDefect,
    coupling: Coupling,
    isometric: bool,
    /// `max ||Ω D_Γ f - D_Γ ω_2 f||` over an orthonormal basis of `F`.
    compatibility_residual: f64,
}

impl BigOmegaData {
    pub fn defect(&self) -> &GammaDefect {
        &self.defect
    }

    pub fn coupling(&self) -> &Coupling {
        &self.coupling
    }

    pub fn omega(&self) -> &ComplexMatrix {
        self.coupling.map()
    }

    pub fn f_basis(&self) -> &SubspaceBasis {
        self.coupling.f_basis()
    }

    pub fn g_basis(&self) -> &SubspaceBasis {
        self.coupling.g_basis()
    }

    pub fn isometric(&self) -> bool {
        self.isometric
    }

    pub fn compatibility_residual(&self) -> f64 {
        self.compatibility_residual
    }

    pub fn summary(&self) -> BigOmegaSummary {
        BigOmegaSummary {
            dim_defect_gamma: self.defect.dim(),
            dim_f: self.f_basis().dim(),
            dim_g: self.g_basis().dim(),
            dim_dstar: self.coupling.dstar_basis().dim(),
            contraction_margin: self.coupling.contraction_margin(),
            isometry_defect: self.coupling.isometry_defect(),
            defining_residual: self.coupling.defining_residual(),
            compatibility_residual: self.compatibility_residual,
            isometric: self.isometric,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BigOmegaSummary {
    pub dim_defect_gamma: usize,
    pub dim_f: usize,
    pub dim_g: usize,
    pub dim_dstar: usize,
    pub contraction_margin: f64,
    pub isometry_defect: f64,
    pub defining_residual: f64,
    pub compatibility_residual: f64,
    pub isometric: bool,
}

/// Builds `Ω` for a verified solution. `tol` is the solution-level tolerance;
/// the `Ω`-level checks use `10 * tol` because `D_Γ` carries truncation bias.
pub fn build_big_omega(
    ds: &DataSet,
    od: &OmegaData,
    g: &GammaOp,
    rank_tol: f64,
    tol: f64,
) -> Result<BigOmegaData> {
    let report = verify_solution(ds, g, tol)?;
    if !report.pass {
        return Err(Error::SolutionInvalid(format!(
            "contraction margin {:.3e}, largest residual {:.3e}",
            report.contraction_margin, report.max_residual
        )));
    }
    let omega_tol = 10.0 * tol;
    let defect = GammaDefect::new(g, DEFAULT_CLAMP_TOL, rank_tol)?;
    let source = defect.coords_of(od.da_q());
    let target = defect.coords_of(od.da_r());
    // Ω is only known to `omega_tol`; smaller eigenvalues of `I - ΩΩ^*` are
    // truncation noise and would add spurious, ill-conditioned defect
    // directions.
    let coupling = Coupling::solve(&source, &target, rank_tol, omega_tol)?;

    let f = od.f_basis().matrix();
    let compatibility_residual = if f.ncols() == 0 || defect.dim() == 0 {
        0.0
    } else {
        let lhs = coupling.base() * defect.coords_of(f);
        let rhs = defect.coords_of(&od.omega2());
        op_norm(&(lhs - rhs))
    };
    if coupling.defining_residual() > omega_tol || compatibility_residual > omega_tol {
        return Err(Error::SolutionInvalid(format!(
            "defining residual {:.3e}, compatibility residual {:.3e}",
            coupling.defining_residual(),
            compatibility_residual
        )));
    }
    let isometric = coupling.is_isometric(omega_tol);
    Ok(BigOmegaData {
        defect,
        coupling,
        isometric,
        compatibility_residual,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Uniqueness {
    Unique,
    NonUnique,
    NotApplicable,
}

#[derive(Debug, Clone, Serialize)]
pub struct UniquenessReport {
    pub verdict: Uniqueness,
    /// `R = I` and `Q` isometric.
    pub classical: bool,
    /// `R` and `Q` both isometric.
    pub isometric_data: bool,
    pub dim_f: usize,
    pub dim_defect_a: usize,
    pub omega_rank: usize,
    pub omega_codomain_dim: usize,
    /// Coefficient distance of two exhibited solutions, when computed.
    pub witness_distance: Option<f64>,
}

/// Decides whether the problem has exactly one solution when the classical
/// criterion applies.
///
/// For `R = I`, `Q` isometric the answer is exact: unique iff `F` is the
/// whole defect space of `A` or `ω` maps onto `D_{T'} ⊕ D_A`. When `R` and `Q`
/// are isometries but `R != I`, non-uniqueness is reported only if two
/// distinct solutions are exhibited; otherwise the verdict is
/// `not_applicable`.
pub fn uniqueness_check(ds: &DataSet, od: &OmegaData, tol: f64) -> Result<UniquenessReport> {
    let n0 = ds.r().ncols();
    let r_isometric = op_norm(&(ds.r().adjoint() * ds.r() - identity(n0))) <= tol;
    let q_isometric = op_norm(&(ds.q().adjoint() * ds.q() - identity(n0))) <= tol;
    let classical = ds.r().nrows() == n0 && op_norm(&(ds.r() - identity(n0))) <= tol && q_isometric;
    let isometric_data = r_isometric && q_isometric;

    let dim_f = od.f_basis().dim();
    let dim_defect_a = od.defects().dim_a();
    let omega_rank = orthonormal_range(od.omega(), od.coupling().rank_tol()).dim();
    let omega_codomain_dim = od.omega().nrows();
    let single_pair = dim_f == dim_defect_a || omega_rank == omega_codomain_dim;

    let mut witness_distance = None;
    let verdict = if classical {
        if single_pair {
            Uniqueness::Unique
        } else {
            Uniqueness::NonUnique
        }
    } else if isometric_data {
        if single_pair {
            Uniqueness::Unique
        } else {
            let d = two_solution_distance(od)?;
            witness_distance = Some(d);
            if d > 1e3 * tol {
                Uniqueness::NonUnique
            } else {
                Uniqueness::NotApplicable
            }
        }
    } else {
        Uniqueness::NotApplicable
    };
    Ok(UniquenessReport {
        verdict,
        classical,
        isometric_data,
        dim_f,
        dim_defect_a,
        omega_rank,
        omega_codomain_dim,
        witness_distance,
    })
}

/// Distance between the solutions of parameters `0` and the constant with a
/// single unit entry.
fn two_solution_distance(od: &OmegaData) -> Result<f64> {
    let (rows, cols) = od.coupling().parameter_shape();
    let check = SchurCheck::default();
    let zero = TaylorFn::zeros(rows, cols, 0);
    let mut unit = ComplexMatrix::zeros(rows, cols);
    unit[(0, 0)] = crate::opcore::real(1.0);
    let unit = TaylorFn::constant(unit);
    let a = gamma_from_pair(&pair_from_parameter(od, &zero, 0, &check)?, DEFAULT_DEGREE);
    let b = gamma_from_pair(&pair_from_parameter(od, &unit, 0, &check)?, DEFAULT_DEGREE);
    Ok(a.theta().max_coeff_distance(b.theta(), DEFAULT_DEGREE))
}
