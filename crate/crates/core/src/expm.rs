//! Matrix exponential via scaling-and-squaring with Padé(13) approximation,
//! following Higham (2005), "The Scaling and Squaring Method for the Matrix
//! Exponential Revisited".

use crate::error::{Error, Result};
use crate::matrix::{Matrix, Tolerance};
use crate::scalar::ExpScalar;

/// Padé(13,13) numerator coefficients (Higham 2005). Exact integers, so they
/// embed losslessly into any scalar via `from_ratio`.
const PADE13: [i64; 14] = [
    64_764_752_532_480_000,
    32_382_376_266_240_000,
    7_771_770_303_897_600,
    1_187_353_796_428_800,
    129_060_195_264_000,
    10_559_470_521_600,
    670_442_572_800,
    33_522_128_640,
    1_323_241_920,
    40_840_800,
    960_960,
    16_380,
    182,
    1,
];

/// Scaling threshold theta_13 from Higham's analysis.
const THETA13: f64 = 5.371_920_351_148_152;

/// Compute `exp(A * t)` for a square matrix.
pub fn mat_exp<T: ExpScalar>(a: &Matrix<T>, t: f64) -> Result<Matrix<T>> {
    if !a.is_square() {
        return Err(Error::NonSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    let n = a.rows();
    if n == 0 {
        return Ok(Matrix::zeros(0, 0));
    }
    let at = a.scale(&T::from_f64(t));
    if n == 1 {
        return Ok(Matrix::from_rows(vec![vec![at[(0, 0)].exp()]]));
    }

    let norm = at.one_norm();
    let squarings = if norm > THETA13 {
        (norm / THETA13).log2().ceil() as u32
    } else {
        0
    };
    let scaled = at.scale(&T::from_f64(0.5f64.powi(squarings as i32)));

    let mut result = pade13(&scaled)?;
    for _ in 0..squarings {
        result = &result * &result;
    }
    Ok(result)
}

fn pade13<T: ExpScalar>(a: &Matrix<T>) -> Result<Matrix<T>> {
    let n = a.rows();
    let eye = Matrix::identity(n);
    let b: Vec<T> = PADE13.iter().map(|&c| T::from_ratio(c, 1)).collect();

    let a2 = a * a;
    let a4 = &a2 * &a2;
    let a6 = &a2 * &a4;

    let w1 = &(&a6.scale(&b[13]) + &a4.scale(&b[11])) + &a2.scale(&b[9]);
    let w2 = &(&(&w1 * &a6) + &a6.scale(&b[7]))
        + &(&(&a4.scale(&b[5]) + &a2.scale(&b[3])) + &eye.scale(&b[1]));
    let u = a * &w2;

    let v1 = &(&a6.scale(&b[12]) + &a4.scale(&b[10])) + &a2.scale(&b[8]);
    let v = &(&(&v1 * &a6) + &a6.scale(&b[6]))
        + &(&(&a4.scale(&b[4]) + &a2.scale(&b[2])) + &eye.scale(&b[0]));

    // exp(A) ~ (V - U)^{-1} (V + U). The denominator is well conditioned for
    // ||A|| below theta_13, so a tight pivot threshold is appropriate.
    let numerator = &v + &u;
    let denominator = &v - &u;
    denominator.solve(&numerator, &Tolerance::default().with_rank_tol(1e-14))
}
