//! Scalar abstractions.
//!
//! Graph storage, the Laplacian, the carré du champ and the simplex solver are
//! written against [`Scalar`], which covers `f32`, `f64` and exact rationals.
//! Routines that need square roots or eigenvalues ask for [`Real`] instead.

use std::fmt::{Debug, Display};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, ToPrimitive};

/// Exact rational scalar used by the oracle paths.
pub type Rational = BigRational;

/// Ordered field element usable as a vertex or edge weight.
pub trait Scalar:
    Num + Clone + PartialOrd + Debug + Display + FromPrimitive + ToPrimitive + Send + Sync + 'static
{
    /// Comparison slack for pivoting and sign tests; zero for exact types.
    fn tolerance() -> Self;

    /// `true` when arithmetic is exact.
    fn is_exact() -> bool {
        false
    }

    /// Conversion from `f64`. Rationals convert exactly.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("finite f64 converts to every scalar")
    }

    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn abs_val(&self) -> Self {
        if *self < Self::zero() {
            Self::zero() - self.clone()
        } else {
            self.clone()
        }
    }

    fn max_of(a: Self, b: Self) -> Self {
        if a >= b {
            a
        } else {
            b
        }
    }

    fn min_of(a: Self, b: Self) -> Self {
        if a <= b {
            a
        } else {
            b
        }
    }

    fn half() -> Self {
        Self::one() / (Self::one() + Self::one())
    }
}

impl Scalar for f64 {
    fn tolerance() -> Self {
        1e-11
    }
}

impl Scalar for f32 {
    fn tolerance() -> Self {
        1e-5
    }
}

impl Scalar for BigRational {
    fn tolerance() -> Self {
        BigRational::from_integer(BigInt::from(0))
    }

    fn is_exact() -> bool {
        true
    }
}

/// Floating-point scalar with the linear algebra needed by eigen and sparse solvers.
pub trait Real: Scalar + nalgebra::RealField + Copy {
    /// Smallest relative slack the PSD test can honour for this precision.
    fn psd_floor() -> Self;
}

impl Real for f64 {
    fn psd_floor() -> Self {
        1e-10
    }
}

impl Real for f32 {
    fn psd_floor() -> Self {
        1e-4
    }
}
