//! Matrix pencils `sF - G`: regularity classification and spectral structure.

use crate::error::{Error, Result};
use crate::matrix::{Matrix, Tolerance};
use crate::poly::{interpolate, PencilScalar, Poly};
use crate::scalar::{RealScalar, Scalar};

/// The pair (F, G) of square matrices defining the pencil `sF - G`.
#[derive(Debug, Clone, PartialEq)]
pub struct Pencil<T> {
    f: Matrix<T>,
    g: Matrix<T>,
}

impl<T: Scalar> Pencil<T> {
    pub fn new(f: Matrix<T>, g: Matrix<T>) -> Result<Self> {
        if !f.is_square() {
            return Err(Error::NonSquare {
                rows: f.rows(),
                cols: f.cols(),
            });
        }
        if f.rows() != g.rows() || f.cols() != g.cols() {
            return Err(Error::dim(format!(
                "pencil matrices disagree: F is {}x{}, G is {}x{}",
                f.rows(),
                f.cols(),
                g.rows(),
                g.cols()
            )));
        }
        if f.rows() == 0 {
            return Err(Error::dim("pencil matrices must be nonempty".to_string()));
        }
        Ok(Pencil { f, g })
    }

    pub fn f(&self) -> &Matrix<T> {
        &self.f
    }

    pub fn g(&self) -> &Matrix<T> {
        &self.g
    }

    pub fn dim(&self) -> usize {
        self.f.rows()
    }

    /// Evaluate `s F - G` at a point.
    pub fn eval(&self, s: &T) -> Matrix<T> {
        &self.f.scale(s) - &self.g
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PencilClass {
    Regular,
    Singular,
}

/// Finite eigenvalues with algebraic multiplicities, plus the multiplicity of
/// the eigenvalue at infinity. Always satisfies `p + q = m`.
#[derive(Debug, Clone)]
pub struct SpectralStructure<T: RealScalar> {
    pub finite: Vec<(T::Cx, usize)>,
    pub p: usize,
    pub q: usize,
}

impl<T: RealScalar> SpectralStructure<T> {
    pub fn dim(&self) -> usize {
        self.p + self.q
    }
}

/// Coefficients of `det(sF - G)` in `s`, low degree first, length `m + 1`.
///
/// Computed by evaluating the determinant at `m + 1` distinct integer nodes
/// and interpolating; with exact scalars this is exact, in float mode the
/// high-order coefficient noise is controlled by `rank_tol`.
pub fn det_polynomial<T: Scalar>(pencil: &Pencil<T>, tol: &Tolerance) -> Poly<T> {
    let m = pencil.dim();
    let offset = (m / 2) as i64;
    let mut xs = Vec::with_capacity(m + 1);
    let mut ys = Vec::with_capacity(m + 1);
    for i in 0..=m {
        let node = T::from_ratio(i as i64 - offset, 1);
        let value = pencil
            .eval(&node)
            .det(tol)
            .expect("pencil matrices are square");
        xs.push(node);
        ys.push(value);
    }
    let mut poly = interpolate(&xs, &ys);
    poly.coeffs.resize(m + 1, T::zero());
    poly
}

/// Regular iff `det(sF - G)` is not the zero polynomial.
pub fn classify_pencil<T: Scalar>(pencil: &Pencil<T>, tol: &Tolerance) -> PencilClass {
    let poly = det_polynomial(pencil, tol);
    // Scale check: determinant values grow like (entry scale)^m, so the zero
    // test for the whole polynomial uses that scale rather than the
    // polynomial's own maximum.
    if T::EXACT {
        if poly.is_zero_poly() {
            return PencilClass::Singular;
        }
        return PencilClass::Regular;
    }
    let scale = pencil.f.max_abs().max(pencil.g.max_abs()).max(1.0);
    let threshold = tol.rank_tol * scale.powi(pencil.dim() as i32);
    if poly.coeffs.iter().all(|c| c.is_negligible(threshold)) {
        PencilClass::Singular
    } else {
        PencilClass::Regular
    }
}

/// Finite eigenvalues (roots of the determinant polynomial, with
/// multiplicity) and the infinite multiplicity `q = m - deg det`.
pub fn spectral_structure<T: PencilScalar>(
    pencil: &Pencil<T>,
    tol: &Tolerance,
) -> Result<SpectralStructure<T>> {
    if classify_pencil(pencil, tol) == PencilClass::Singular {
        return Err(Error::SingularPencil);
    }
    let m = pencil.dim();
    let poly = det_polynomial(pencil, tol).trimmed(tol);
    let deg = poly.degree(tol).unwrap_or(0);
    let finite = if deg == 0 {
        vec![]
    } else {
        T::poly_roots(&poly, tol)?
    };
    let p: usize = finite.iter().map(|(_, mult)| mult).sum();
    debug_assert_eq!(p, deg);
    Ok(SpectralStructure {
        finite,
        p,
        q: m - deg,
    })
}
