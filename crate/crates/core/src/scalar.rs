//! Scalar abstraction: the matrix layer is generic over the entry type, with
//! floating-point scalars using tolerance-based zero tests and exact rational
//! scalars using true equality.

use std::fmt::{Debug, Display};
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

/// Field scalar usable as a matrix entry.
///
/// `EXACT` scalars admit exact equality tests and ignore tolerances; float
/// scalars only support tolerance-based comparison via [`Scalar::magnitude`].
pub trait Scalar:
    Clone
    + PartialEq
    + Debug
    + Display
    + Zero
    + One
    + Neg<Output = Self>
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Send
    + Sync
    + 'static
{
    const EXACT: bool;

    /// Approximate absolute value, used for pivot selection and zero tests in
    /// float mode. Exact scalars only use it for pivot ordering, never for
    /// correctness decisions.
    fn magnitude(&self) -> f64;

    /// Embed the rational constant `num / den`.
    fn from_ratio(num: i64, den: i64) -> Self;

    /// Zero test: exact for `EXACT` scalars, `magnitude <= threshold` otherwise.
    fn is_negligible(&self, threshold: f64) -> bool {
        if Self::EXACT {
            self.is_zero()
        } else {
            self.magnitude() <= threshold
        }
    }
}

/// Scalar supporting the exponential function; required by [`crate::expm::mat_exp`].
pub trait ExpScalar: Scalar {
    fn from_f64(x: f64) -> Self;
    fn exp(&self) -> Self;
}

/// Real scalar with a complex extension, used by the spectral machinery.
/// Eigenvalues of a real pencil may be complex even when inputs are real.
pub trait RealScalar: Scalar + PartialOrd {
    type Cx: Scalar;

    fn complexify(&self) -> Self::Cx;
    fn complex(re: Self, im: Self) -> Self::Cx;
    fn real_part(z: &Self::Cx) -> Self;
    fn imag_part(z: &Self::Cx) -> Self;

    fn conj(z: &Self::Cx) -> Self::Cx {
        Self::complex(Self::real_part(z), -Self::imag_part(z))
    }
}

macro_rules! impl_float_scalar {
    ($t:ty) => {
        impl Scalar for $t {
            const EXACT: bool = false;
            fn magnitude(&self) -> f64 {
                (*self as f64).abs()
            }
            fn from_ratio(num: i64, den: i64) -> Self {
                num as $t / den as $t
            }
        }

        impl ExpScalar for $t {
            fn from_f64(x: f64) -> Self {
                x as $t
            }
            fn exp(&self) -> Self {
                <$t>::exp(*self)
            }
        }
    };
}

impl_float_scalar!(f32);
impl_float_scalar!(f64);

impl Scalar for Complex<f64> {
    const EXACT: bool = false;
    fn magnitude(&self) -> f64 {
        self.norm()
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        Complex::new(num as f64 / den as f64, 0.0)
    }
}

impl ExpScalar for Complex<f64> {
    fn from_f64(x: f64) -> Self {
        Complex::new(x, 0.0)
    }
    fn exp(&self) -> Self {
        Complex::exp(*self)
    }
}

impl RealScalar for f64 {
    type Cx = Complex<f64>;
    fn complexify(&self) -> Complex<f64> {
        Complex::new(*self, 0.0)
    }
    fn complex(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }
    fn real_part(z: &Complex<f64>) -> f64 {
        z.re
    }
    fn imag_part(z: &Complex<f64>) -> f64 {
        z.im
    }
}

impl Scalar for BigRational {
    const EXACT: bool = true;
    fn magnitude(&self) -> f64 {
        self.to_f64().map(f64::abs).unwrap_or(f64::MAX)
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }
}

impl Scalar for Complex<BigRational> {
    const EXACT: bool = true;
    fn magnitude(&self) -> f64 {
        let re = self.re.to_f64().unwrap_or(f64::MAX);
        let im = self.im.to_f64().unwrap_or(f64::MAX);
        re.hypot(im)
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        Complex::new(BigRational::from_ratio(num, den), BigRational::zero())
    }
}

impl RealScalar for BigRational {
    type Cx = Complex<BigRational>;
    fn complexify(&self) -> Complex<BigRational> {
        Complex::new(self.clone(), BigRational::zero())
    }
    fn complex(re: BigRational, im: BigRational) -> Complex<BigRational> {
        Complex::new(re, im)
    }
    fn real_part(z: &Complex<BigRational>) -> BigRational {
        z.re.clone()
    }
    fn imag_part(z: &Complex<BigRational>) -> BigRational {
        z.im.clone()
    }
}
