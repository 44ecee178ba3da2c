//! Construction, parameterization and verification of all solutions of
//! finite-dimensional relaxed commutant lifting problems.
//!
//! A problem instance is a [`DataSet`] `{A, T', R, Q}` with `T'AR = AQ` and
//! `R*R <= Q*Q`. Its solutions are parameterized by Schur pairs
//! ([`schurpair`]), turned into symbols `Θ` ([`lifting`]), and mapped back to
//! pairs through the constrained Schur class of a fixed solution ([`jmap`]).

pub mod analytic;
pub mod cli;
pub mod coupling;
pub mod dataset;
pub mod error;
pub mod jmap;
pub mod lifting;
pub mod majorant;
pub mod opcore;
pub mod schurpair;
pub mod serial;

pub use analytic::{SchurCertificate, SchurCheck, TaylorFn};
pub use dataset::{build_omega, random_dataset, validate, DataSet, Dims, OmegaData, Preset};
pub use error::{Error, Result};
pub use jmap::{canonical_parameter, j_gamma, parameter_to_constrained};
pub use lifting::{
    build_big_omega, gamma_from_pair, uniqueness_check, verify_solution, BigOmegaData, BlockSolution,
    GammaOp, Uniqueness,
};
pub use opcore::{ComplexMatrix, ComplexVector, SubspaceBasis};
pub use schurpair::{pair_from_parameter, parameter_from_pair, verify_pair, SchurPair};

/// Version string reported by the command line tool.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
