//! JSON encodings.
//!
//! Complex scalars are `[re, im]` pairs, matrices are row-major nested arrays,
//! and a [`TaylorFn`] is `{"in_dim", "out_dim", "coeffs": [matrix, ...]}`.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::analytic::TaylorFn;
use crate::error::Error;
use crate::opcore::{c64, ComplexMatrix, ComplexVector};

pub type MatrixJson = Vec<Vec<[f64; 2]>>;

pub fn matrix_to_json(m: &ComplexMatrix) -> MatrixJson {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

/// Parses a row-major matrix. `cols_hint` gives the column count when there
/// are no rows to read it from.
pub fn matrix_from_json(rows: &MatrixJson, cols_hint: Option<usize>) -> Result<ComplexMatrix, Error> {
    let ncols = rows.first().map(Vec::len).or(cols_hint).unwrap_or(0);
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::InvalidInput("ragged matrix rows".into()));
    }
    if let Some(c) = cols_hint {
        if c != ncols {
            return Err(Error::DimensionMismatch(format!("expected {c} columns, found {ncols}")));
        }
    }
    let m = ComplexMatrix::from_fn(rows.len(), ncols, |i, j| c64(rows[i][j][0], rows[i][j][1]));
    if !crate::opcore::is_finite(&m) {
        return Err(Error::InvalidInput("matrix entries must be finite".into()));
    }
    Ok(m)
}

pub fn vector_to_json(v: &ComplexVector) -> Vec<[f64; 2]> {
    v.iter().map(|z| [z.re, z.im]).collect()
}

pub fn vector_from_json(v: &[[f64; 2]]) -> Result<ComplexVector, Error> {
    if v.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Error::InvalidInput("vector entries must be finite".into()));
    }
    Ok(ComplexVector::from_iterator(v.len(), v.iter().map(|p| c64(p[0], p[1]))))
}

/// `#[serde(with = "crate::serial::matrix")]` adapter for matrix fields.
pub mod matrix {
    use super::*;

    pub fn serialize<S: Serializer>(m: &ComplexMatrix, s: S) -> Result<S::Ok, S::Error> {
        matrix_to_json(m).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<ComplexMatrix, D::Error> {
        let rows = MatrixJson::deserialize(d)?;
        matrix_from_json(&rows, None).map_err(serde::de::Error::custom)
    }
}

#[derive(Serialize, Deserialize)]
pub struct TaylorFnRepr {
    pub in_dim: usize,
    pub out_dim: usize,
    pub coeffs: Vec<MatrixJson>,
}

impl TryFrom<TaylorFnRepr> for TaylorFn {
    type Error = Error;

    fn try_from(r: TaylorFnRepr) -> Result<Self, Error> {
        let coeffs = r
            .coeffs
            .iter()
            .map(|c| {
                let m = matrix_from_json(c, Some(r.in_dim))?;
                if m.nrows() != r.out_dim {
                    return Err(Error::DimensionMismatch(format!(
                        "coefficient has {} rows, expected {}",
                        m.nrows(),
                        r.out_dim
                    )));
                }
                Ok(m)
            })
            .collect::<Result<Vec<_>, Error>>()?;
        TaylorFn::new(r.out_dim, r.in_dim, coeffs)
    }
}

impl From<TaylorFn> for TaylorFnRepr {
    fn from(t: TaylorFn) -> Self {
        TaylorFnRepr {
            in_dim: t.in_dim(),
            out_dim: t.out_dim(),
            coeffs: t.coeffs().iter().map(matrix_to_json).collect(),
        }
    }
}
