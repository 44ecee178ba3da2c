#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use rcl_core::opcore::{op_norm, real_matrix};
use rcl_core::{ComplexMatrix, DataSet, GammaOp, TaylorFn};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> ComplexMatrix {
    DMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re, im)
    })
}

/// Random polynomial with `Σ ||T_k|| = total`, hence in the Schur class when
/// `total <= 1`.
pub fn random_schur(rng: &mut ChaCha8Rng, rows: usize, cols: usize, degree: usize, total: f64) -> TaylorFn {
    let raw: Vec<ComplexMatrix> = (0..=degree).map(|_| gaussian(rng, rows, cols)).collect();
    let sum: f64 = raw.iter().map(op_norm).sum();
    let scale = if sum > 0.0 { total / sum } else { 0.0 };
    let coeffs = raw.into_iter().map(|c| c * Complex64::new(scale, 0.0)).collect();
    TaylorFn::new(rows, cols, coeffs).unwrap()
}

/// Random symbol with `λ_max(Σ Θ_ν^* Θ_ν) = level`.
pub fn random_contractive_theta(
    rng: &mut ChaCha8Rng,
    rows: usize,
    cols: usize,
    degree: usize,
    level: f64,
) -> GammaOp {
    let raw: Vec<ComplexMatrix> = (0..=degree)
        .map(|n| gaussian(rng, rows, cols) * Complex64::new(0.8f64.powi(n as i32), 0.0))
        .collect();
    let gram = raw
        .iter()
        .fold(ComplexMatrix::zeros(cols, cols), |acc, c| acc + c.adjoint() * c);
    let top = op_norm(&gram);
    let scale = (level / top).sqrt();
    let coeffs = raw.into_iter().map(|c| c * Complex64::new(scale, 0.0)).collect();
    GammaOp::new(TaylorFn::new(rows, cols, coeffs).unwrap())
}

/// Symbol whose stacked coefficients form an isometry, so `Σ Θ_ν^* Θ_ν = I`.
pub fn random_isometric_theta(rng: &mut ChaCha8Rng, rows: usize, cols: usize, degree: usize) -> GammaOp {
    let tall = rows * (degree + 1);
    assert!(tall >= cols);
    let q = gaussian(rng, tall, cols).qr().q();
    let coeffs = (0..=degree)
        .map(|n| q.rows(n * rows, rows).into_owned())
        .collect();
    GammaOp::new(TaylorFn::new(rows, cols, coeffs).unwrap())
}

pub fn ds1() -> DataSet {
    DataSet::new(
        real_matrix(1, 1, &[0.0]),
        real_matrix(1, 1, &[0.0]),
        real_matrix(1, 1, &[1.0]),
        real_matrix(1, 1, &[1.0]),
    )
    .unwrap()
}

pub fn ds3() -> DataSet {
    DataSet::new(
        real_matrix(1, 2, &[0.0, 0.0]),
        real_matrix(1, 1, &[0.0]),
        real_matrix(2, 1, &[0.0, 1.0]),
        real_matrix(2, 1, &[1.0, 0.0]),
    )
    .unwrap()
}

/// `Θ(λ) = [λ, 1]`
pub fn ds3_theta() -> GammaOp {
    GammaOp::new(
        TaylorFn::new(
            1,
            2,
            vec![real_matrix(1, 2, &[0.0, 1.0]), real_matrix(1, 2, &[1.0, 0.0])],
        )
        .unwrap(),
    )
}

/// `A = 0`, `T' = 0`, `R = Q = 0`: every contraction `D_A -> H²(D_{T'})` is a
/// solution.
pub fn unconstrained(h: usize, hp: usize) -> DataSet {
    DataSet::new(
        ComplexMatrix::zeros(hp, h),
        ComplexMatrix::zeros(hp, hp),
        ComplexMatrix::zeros(h, 1),
        ComplexMatrix::zeros(h, 1),
    )
    .unwrap()
}

pub fn max_abs_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Points `r e^{2πik/n}`.
pub fn circle(r: f64, n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|k| Complex64::from_polar(r, std::f64::consts::TAU * k as f64 / n as f64))
        .collect()
}
