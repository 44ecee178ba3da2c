use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (asymmetry {asymmetry:.3e})")]
    NonHermitian { asymmetry: f64 },

    #[error("matrix is indefinite (smallest eigenvalue {min_eigenvalue:.3e})")]
    IndefiniteMatrix { min_eigenvalue: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("point {modulus} lies outside the closed unit disk")]
    OutsideDisk { modulus: f64 },

    #[error("constant term is singular (smallest singular value {sigma_min:.3e})")]
    SingularConstantTerm { sigma_min: f64 },

    #[error("constant term differs from the identity by {deviation:.3e}")]
    ConstantTermNotIdentity { deviation: f64 },

    #[error("series degree {degree} is too low for a section of order {order}")]
    DegreeTooLow { degree: usize, order: usize },

    #[error("data set failed validation: {0}")]
    ValidationFailed(String),

    #[error("instance generation failed: {0}")]
    GenerationFailed(String),

    #[error("parameter is not in the Schur class (section margin {section_margin:.3e}, boundary margin {boundary_margin:.3e})")]
    ParameterNotSchur {
        section_margin: f64,
        boundary_margin: f64,
    },

    #[error("residual {residual:.3e} exceeds tolerance {tol:.1e}: {context}")]
    ResidualTooLarge {
        residual: f64,
        tol: f64,
        context: String,
    },

    #[error("function is not positive real (Toeplitz margin {margin:.3e})")]
    NotPositiveReal { margin: f64 },

    #[error("operator is not a solution of the lifting problem: {0}")]
    SolutionInvalid(String),

    #[error("parameter does not satisfy the restriction constraint: {0}")]
    ParameterNotInSOmega(String),

    #[error("expected a scalar-valued function, got {rows}x{cols}")]
    NotScalar { rows: usize, cols: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}
