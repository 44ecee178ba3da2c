//! Problem instances: the operators `A`, `T'`, `R`, `Q`, their validation, the
//! coupling contraction `ω`, and seeded instance generators.
//!
//! The isometric lifting of `T'` is always the Sz.-Nagy–Schäffer one on
//! `H' ⊕ H²(D_{T'})`, so it is never stored.
//!
//! Defect spaces are represented in coordinates of an orthonormal basis of the
//! range of the defect operator. When the defect operator is injective that
//! basis is the standard one, so the coordinates are the ambient ones.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::coupling::Coupling;
use crate::error::{Error, Result};
use crate::opcore::{
    c64, contraction_margin, defect_operator, hermitian_sqrt, identity, op_norm,
    orthonormal_range, psd_margin, ComplexMatrix, SubspaceBasis, DEFAULT_CLAMP_TOL,
    DEFAULT_RANK_TOL,
};
use crate::serial::{self, MatrixJson};

/// Dimensions `(dim H_0, dim H, dim H')`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dims {
    pub h0: usize,
    pub h: usize,
    pub hp: usize,
}

impl Dims {
    pub fn new(h0: usize, h: usize, hp: usize) -> Self {
        Dims { h0, h, hp }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DataSetRepr", into = "DataSetRepr")]
pub struct DataSet {
    a: ComplexMatrix,
    tprime: ComplexMatrix,
    r: ComplexMatrix,
    q: ComplexMatrix,
}

#[derive(Serialize, Deserialize)]
struct DataSetRepr {
    #[serde(rename = "A")]
    a: MatrixJson,
    #[serde(rename = "Tprime")]
    tprime: MatrixJson,
    #[serde(rename = "R")]
    r: MatrixJson,
    #[serde(rename = "Q")]
    q: MatrixJson,
}

impl TryFrom<DataSetRepr> for DataSet {
    type Error = Error;

    fn try_from(r: DataSetRepr) -> Result<Self> {
        DataSet::new(
            serial::matrix_from_json(&r.a, None)?,
            serial::matrix_from_json(&r.tprime, None)?,
            serial::matrix_from_json(&r.r, None)?,
            serial::matrix_from_json(&r.q, None)?,
        )
    }
}

impl From<DataSet> for DataSetRepr {
    fn from(d: DataSet) -> Self {
        DataSetRepr {
            a: serial::matrix_to_json(&d.a),
            tprime: serial::matrix_to_json(&d.tprime),
            r: serial::matrix_to_json(&d.r),
            q: serial::matrix_to_json(&d.q),
        }
    }
}

impl DataSet {
    /// `A: H -> H'`, `T'` on `H'`, and `R, Q: H_0 -> H`.
    pub fn new(
        a: ComplexMatrix,
        tprime: ComplexMatrix,
        r: ComplexMatrix,
        q: ComplexMatrix,
    ) -> Result<Self> {
        let (hp, h) = a.shape();
        let h0 = r.ncols();
        if h0 == 0 || h == 0 || hp == 0 {
            return Err(Error::DimensionMismatch("all spaces must be nonzero".into()));
        }
        if tprime.shape() != (hp, hp) {
            return Err(Error::DimensionMismatch(format!(
                "Tprime is {:?}, expected ({hp}, {hp})",
                tprime.shape()
            )));
        }
        if r.shape() != (h, h0) || q.shape() != (h, h0) {
            return Err(Error::DimensionMismatch(format!(
                "R is {:?} and Q is {:?}, both must be ({h}, {h0})",
                r.shape(),
                q.shape()
            )));
        }
        for m in [&a, &tprime, &r, &q] {
            if !crate::opcore::is_finite(m) {
                return Err(Error::InvalidInput("data set entries must be finite".into()));
            }
        }
        Ok(DataSet { a, tprime, r, q })
    }

    pub fn a(&self) -> &ComplexMatrix {
        &self.a
    }

    pub fn tprime(&self) -> &ComplexMatrix {
        &self.tprime
    }

    pub fn r(&self) -> &ComplexMatrix {
        &self.r
    }

    pub fn q(&self) -> &ComplexMatrix {
        &self.q
    }

    pub fn dims(&self) -> Dims {
        Dims::new(self.r.ncols(), self.a.ncols(), self.a.nrows())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ValidationReport {
    /// `||T'AR - AQ||`
    pub intertwining_residual: f64,
    /// `λ_min(Q*Q - R*R)`
    pub inequality_margin: f64,
    pub a_contraction_margin: f64,
    pub tprime_contraction_margin: f64,
    pub tol: f64,
    pub pass: bool,
}

pub fn validate(ds: &DataSet, tol: f64) -> Result<ValidationReport> {
    let intertwining_residual = op_norm(&(&ds.tprime * &ds.a * &ds.r - &ds.a * &ds.q));
    let gap = ds.q.adjoint() * &ds.q - ds.r.adjoint() * &ds.r;
    let inequality_margin = psd_margin(&gap)?;
    let a_contraction_margin = contraction_margin(&ds.a);
    let tprime_contraction_margin = contraction_margin(&ds.tprime);
    let pass = intertwining_residual <= tol
        && inequality_margin >= -tol
        && a_contraction_margin >= -tol
        && tprime_contraction_margin >= -tol;
    Ok(ValidationReport {
        intertwining_residual,
        inequality_margin,
        a_contraction_margin,
        tprime_contraction_margin,
        tol,
        pass,
    })
}

/// Defect operators of `A` and `T'` and orthonormal bases of their ranges.
#[derive(Debug, Clone)]
pub struct DefectSpaces {
    pub d_a: ComplexMatrix,
    pub d_t: ComplexMatrix,
    pub basis_a: SubspaceBasis,
    pub basis_t: SubspaceBasis,
}

impl DefectSpaces {
    pub fn new(ds: &DataSet, clamp_tol: f64, rank_tol: f64) -> Result<Self> {
        let d_a = defect_operator(&ds.a, clamp_tol)?;
        let d_t = defect_operator(&ds.tprime, clamp_tol)?;
        let basis_a = orthonormal_range(&d_a, rank_tol);
        let basis_t = orthonormal_range(&d_t, rank_tol);
        Ok(DefectSpaces {
            d_a,
            d_t,
            basis_a,
            basis_t,
        })
    }

    /// `dim D_A`
    pub fn dim_a(&self) -> usize {
        self.basis_a.dim()
    }

    /// `dim D_{T'}`
    pub fn dim_t(&self) -> usize {
        self.basis_t.dim()
    }

    /// Coordinates of `D_A x` in the basis of `D_A`.
    pub fn d_a_coords(&self, x: &ComplexMatrix) -> ComplexMatrix {
        self.basis_a.coords() * &self.d_a * x
    }

    /// Coordinates of `D_{T'} y` in the basis of `D_{T'}`.
    pub fn d_t_coords(&self, y: &ComplexMatrix) -> ComplexMatrix {
        self.basis_t.coords() * &self.d_t * y
    }
}

/// The coupling contraction `ω: F -> D_{T'} ⊕ D_A` of a data set, defined by
/// `ω D_A Q h = (D_{T'} A R h, D_A R h)`, together with `F`, `G = D_A ⊖ F`
/// and the defect `D_{ω*}`.
#[derive(Debug, Clone)]
pub struct OmegaData {
    defects: DefectSpaces,
    /// `D_A Q` in `D_A` coordinates.
    da_q: ComplexMatrix,
    /// `D_A R` in `D_A` coordinates.
    da_r: ComplexMatrix,
    /// `D_{T'} A R` in `D_{T'}` coordinates.
    dt_ar: ComplexMatrix,
    coupling: Coupling,
    isometric: bool,
}

impl OmegaData {
    pub fn defects(&self) -> &DefectSpaces {
        &self.defects
    }

    pub fn coupling(&self) -> &Coupling {
        &self.coupling
    }

    pub fn da_q(&self) -> &ComplexMatrix {
        &self.da_q
    }

    pub fn da_r(&self) -> &ComplexMatrix {
        &self.da_r
    }

    pub fn dt_ar(&self) -> &ComplexMatrix {
        &self.dt_ar
    }

    pub fn omega(&self) -> &ComplexMatrix {
        self.coupling.map()
    }

    pub fn omega1(&self) -> ComplexMatrix {
        self.omega().rows(0, self.defects.dim_t()).into_owned()
    }

    pub fn omega2(&self) -> ComplexMatrix {
        self.omega()
            .rows(self.defects.dim_t(), self.defects.dim_a())
            .into_owned()
    }

    pub fn f_basis(&self) -> &SubspaceBasis {
        self.coupling.f_basis()
    }

    pub fn g_basis(&self) -> &SubspaceBasis {
        self.coupling.g_basis()
    }

    pub fn dstar_basis(&self) -> &SubspaceBasis {
        self.coupling.dstar_basis()
    }

    pub fn dstar_defect(&self) -> &ComplexMatrix {
        self.coupling.dstar()
    }

    pub fn isometric(&self) -> bool {
        self.isometric
    }

    /// Residual of the defining relation of `ω` on the spanning vectors.
    pub fn defining_residual(&self) -> f64 {
        self.coupling.defining_residual()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct OmegaSummary {
    pub dim_defect_a: usize,
    pub dim_defect_t: usize,
    pub dim_f: usize,
    pub dim_g: usize,
    pub dim_dstar: usize,
    pub contraction_margin: f64,
    pub isometry_defect: f64,
    pub defining_residual: f64,
    pub isometric: bool,
    #[serde(with = "serial::matrix")]
    pub omega: ComplexMatrix,
}

impl OmegaData {
    pub fn summary(&self) -> OmegaSummary {
        OmegaSummary {
            dim_defect_a: self.defects.dim_a(),
            dim_defect_t: self.defects.dim_t(),
            dim_f: self.f_basis().dim(),
            dim_g: self.g_basis().dim(),
            dim_dstar: self.dstar_basis().dim(),
            contraction_margin: self.coupling.contraction_margin(),
            isometry_defect: self.coupling.isometry_defect(),
            defining_residual: self.defining_residual(),
            isometric: self.isometric,
            omega: self.omega().clone(),
        }
    }
}

/// Builds `ω` and its satellite subspaces. The data set must pass
/// [`validate`] at `tol`; `tol` also decides the isometry flag.
pub fn build_omega(ds: &DataSet, rank_tol: f64, tol: f64) -> Result<OmegaData> {
    let report = validate(ds, tol)?;
    if !report.pass {
        return Err(Error::ValidationFailed(format!("{report:?}")));
    }
    let defects = DefectSpaces::new(ds, DEFAULT_CLAMP_TOL, rank_tol)?;
    let da_q = defects.d_a_coords(&ds.q);
    let da_r = defects.d_a_coords(&ds.r);
    let dt_ar = defects.d_t_coords(&(&ds.a * &ds.r));
    let mut target = ComplexMatrix::zeros(defects.dim_t() + defects.dim_a(), ds.r.ncols());
    target.rows_mut(0, defects.dim_t()).copy_from(&dt_ar);
    target
        .rows_mut(defects.dim_t(), defects.dim_a())
        .copy_from(&da_r);
    let coupling = Coupling::solve(&da_q, &target, rank_tol, DEFAULT_CLAMP_TOL)?;
    let isometric = coupling.is_isometric(tol);
    Ok(OmegaData {
        defects,
        da_q,
        da_r,
        dt_ar,
        coupling,
        isometric,
    })
}

/// Instance families for [`random_dataset`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    /// `R*R <= Q*Q` with strict inequality in general.
    Generic,
    /// `R*R = Q*Q`, so `ω` is an isometry.
    ExactEquality,
    /// `R = I` (Treil–Volberg setting), `R*R <= Q*Q`.
    TreilVolberg,
    /// `H_0 = H`, `R = I`, `Q` unitary.
    Classical,
}

impl std::str::FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "generic" => Ok(Preset::Generic),
            "exact_equality" => Ok(Preset::ExactEquality),
            "treil_volberg" => Ok(Preset::TreilVolberg),
            "classical" => Ok(Preset::Classical),
            other => Err(Error::InvalidInput(format!("unknown preset {other:?}"))),
        }
    }
}

const MAX_ATTEMPTS: usize = 64;
const GENERATION_TOL: f64 = 1e-10;

fn gaussian(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> ComplexMatrix {
    DMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        c64(re, im) * std::f64::consts::FRAC_1_SQRT_2
    })
}

fn random_unitary(rng: &mut ChaCha8Rng, n: usize) -> ComplexMatrix {
    gaussian(rng, n, n).qr().q()
}

/// Random matrix rescaled to the given spectral norm.
fn with_norm(rng: &mut ChaCha8Rng, rows: usize, cols: usize, norm: f64) -> ComplexMatrix {
    let m = gaussian(rng, rows, cols);
    let s = op_norm(&m);
    m * c64(norm / s, 0.0)
}

/// Deterministic instance generator. Every returned data set passes
/// [`validate`] at `1e-10`.
///
/// `generic` and `exact_equality` draw `R`, `Q`, `T'` first and then project a
/// random `A` onto the solution space of `T'AR = AQ`. That space is
/// nontrivial for generic draws only when `dim H_0 < dim H`. `classical` and
/// `treil_volberg` need `dim H_0 = dim H` and are built from a normal `Q`,
/// unitary for `classical` and with `Q*Q >= I` for `treil_volberg`.
pub fn random_dataset(seed: u64, dims: Dims, preset: Preset) -> Result<DataSet> {
    if dims.h0 == 0 || dims.h == 0 || dims.hp == 0 {
        return Err(Error::InvalidInput("dimensions must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..MAX_ATTEMPTS {
        let candidate = match preset {
            Preset::Classical | Preset::TreilVolberg => structured_candidate(&mut rng, dims, preset)?,
            Preset::Generic | Preset::ExactEquality => projected_candidate(&mut rng, dims, preset),
        };
        if let Some(ds) = candidate {
            if validate(&ds, GENERATION_TOL)?.pass {
                return Ok(ds);
            }
        }
    }
    Err(Error::GenerationFailed(format!(
        "no valid {preset:?} instance with dims {dims:?} after {MAX_ATTEMPTS} attempts"
    )))
}

fn projected_candidate(rng: &mut ChaCha8Rng, dims: Dims, preset: Preset) -> Option<DataSet> {
    let Dims { h0, h, hp } = dims;
    let q = gaussian(rng, h, h0);
    let r = match preset {
        Preset::ExactEquality => random_unitary(rng, h) * &q,
        _ => {
            // scale so that ||R (Q*Q)^{-1/2}|| = s < 1, i.e. R*R <= s^2 Q*Q
            let r = gaussian(rng, h, h0);
            let qq = hermitian_sqrt(&(q.adjoint() * &q), DEFAULT_CLAMP_TOL).ok()?;
            let qq_inv = qq.try_inverse()?;
            let s: f64 = rng.random_range(0.3..0.95);
            let ratio = op_norm(&(&r * qq_inv));
            r * c64(s / ratio, 0.0)
        }
    };
    let t_norm: f64 = rng.random_range(0.5..0.95);
    let tprime = with_norm(rng, hp, hp, t_norm);

    // vec(T'AR - AQ) = (R^T ⊗ T' - Q^T ⊗ I) vec(A), column-major vec
    let op = r.transpose().kronecker(&tprime) - q.transpose().kronecker(&identity(hp));
    let row_space = orthonormal_range(&op.adjoint(), DEFAULT_RANK_TOL);
    let kernel = row_space.complement();
    if kernel.is_empty() {
        return None;
    }
    let draw = gaussian(rng, hp * h, 1);
    let projected = kernel.matrix() * (kernel.coords() * draw);
    let a = ComplexMatrix::from_column_slice(hp, h, projected.as_slice());
    let norm = op_norm(&a);
    if norm < 1e-8 {
        return None;
    }
    let a_norm: f64 = rng.random_range(0.5..0.95);
    let a = a * c64(a_norm / norm, 0.0);
    DataSet::new(a, tprime, r, q).ok()
}

/// Data with `H_0 = H` and `R = I`. `T'AR = AQ` then reads `T'A = AQ`: take
/// `Q = U diag(z) U*`, let `A = a V P` where `P` picks `k` eigenvectors of `Q`
/// with `|z| = 1` and `V` is an isometry, and let `T'` act as `V diag(z_k) V*`
/// on the range of `V` and as a strict contraction on its complement.
fn structured_candidate(
    rng: &mut ChaCha8Rng,
    dims: Dims,
    preset: Preset,
) -> Result<Option<DataSet>> {
    let Dims { h0, h, hp } = dims;
    if h0 != h {
        return Err(Error::InvalidInput(format!(
            "{preset:?} preset needs dim H_0 = dim H, got {h0} and {h}"
        )));
    }
    let u = random_unitary(rng, h);
    let k_max = if hp >= 2 { (hp - 1).min(h) } else { 1 };
    let k = rng.random_range(1..=k_max);
    // eigenvalues seen by A are unimodular; the rest may expand (Q*Q >= I)
    let eig: Vec<_> = (0..h)
        .map(|i| {
            let rho = match preset {
                Preset::TreilVolberg if i >= k => rng.random_range(1.0..1.5),
                _ => 1.0,
            };
            let phase: f64 = rng.random_range(0.0..std::f64::consts::TAU);
            num_complex::Complex64::from_polar(rho, phase)
        })
        .collect();
    let diag = ComplexMatrix::from_diagonal(&nalgebra::DVector::from_vec(eig.clone()));
    let q = &u * diag * u.adjoint();

    let p = u.columns(0, k).adjoint();
    let lam = ComplexMatrix::from_diagonal(&nalgebra::DVector::from_vec(eig[..k].to_vec()));
    let w = random_unitary(rng, hp);
    let v = w.columns(0, k).into_owned();
    let vc = w.columns(k, hp - k).into_owned();
    let a_scale: f64 = rng.random_range(0.5..0.95);
    let a = &v * p * c64(a_scale, 0.0);
    let mut tprime = &v * lam * v.adjoint();
    if hp > k {
        let x_norm: f64 = rng.random_range(0.3..0.9);
        let x = with_norm(rng, hp - k, hp - k, x_norm);
        tprime += &vc * x * vc.adjoint();
    }
    let r = identity(h);
    Ok(DataSet::new(a, tprime, r, q).ok())
}
