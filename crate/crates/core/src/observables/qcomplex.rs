use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Exact complex number `re + i·im` with arbitrary-precision rational parts.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct QComplex {
    pub re: BigRational,
    pub im: BigRational,
}

impl QComplex {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        Self { re, im }
    }

    pub fn int(n: i64) -> Self {
        Self::real(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn real(re: BigRational) -> Self {
        Self {
            re,
            im: BigRational::zero(),
        }
    }

    pub fn ratio(num: i64, den: i64) -> Self {
        Self::real(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    /// Exact conversion: every finite `f64` is a dyadic rational.
    pub fn from_f64(z: Complex64) -> Self {
        let conv = |x: f64| {
            BigRational::from_float(x).unwrap_or_else(|| panic!("non-finite value {x}"))
        };
        Self {
            re: conv(z.re),
            im: conv(z.im),
        }
    }

    pub fn to_c64(&self) -> Complex64 {
        Complex64::new(
            self.re.to_f64().unwrap_or(f64::NAN),
            self.im.to_f64().unwrap_or(f64::NAN),
        )
    }

    pub fn conj(&self) -> Self {
        Self {
            re: self.re.clone(),
            im: -self.im.clone(),
        }
    }

    /// Division by a nonzero rational scalar.
    pub fn div_rational(&self, d: &BigRational) -> Self {
        Self {
            re: &self.re / d,
            im: &self.im / d,
        }
    }

    pub fn scale_int(&self, k: i64) -> Self {
        let k = BigRational::from_integer(BigInt::from(k));
        Self {
            re: &self.re * &k,
            im: &self.im * &k,
        }
    }
}

impl Zero for QComplex {
    fn zero() -> Self {
        Self::default()
    }
    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
}

impl One for QComplex {
    fn one() -> Self {
        Self::int(1)
    }
}

impl Add for QComplex {
    type Output = QComplex;
    fn add(self, rhs: Self) -> Self {
        &self + &rhs
    }
}

impl<'a> Add<&'a QComplex> for &'a QComplex {
    type Output = QComplex;
    fn add(self, rhs: &QComplex) -> QComplex {
        QComplex {
            re: &self.re + &rhs.re,
            im: &self.im + &rhs.im,
        }
    }
}

impl AddAssign<&QComplex> for QComplex {
    fn add_assign(&mut self, rhs: &QComplex) {
        self.re += &rhs.re;
        self.im += &rhs.im;
    }
}

impl<'a> Sub<&'a QComplex> for &'a QComplex {
    type Output = QComplex;
    fn sub(self, rhs: &QComplex) -> QComplex {
        QComplex {
            re: &self.re - &rhs.re,
            im: &self.im - &rhs.im,
        }
    }
}

impl Neg for QComplex {
    type Output = QComplex;
    fn neg(self) -> QComplex {
        QComplex {
            re: -self.re,
            im: -self.im,
        }
    }
}

impl Neg for &QComplex {
    type Output = QComplex;
    fn neg(self) -> QComplex {
        QComplex {
            re: -self.re.clone(),
            im: -self.im.clone(),
        }
    }
}

impl Mul for QComplex {
    type Output = QComplex;
    fn mul(self, rhs: Self) -> Self {
        &self * &rhs
    }
}

impl<'a> Mul<&'a QComplex> for &'a QComplex {
    type Output = QComplex;
    fn mul(self, rhs: &QComplex) -> QComplex {
        if self.im.is_zero() && rhs.im.is_zero() {
            return QComplex::real(&self.re * &rhs.re);
        }
        QComplex {
            re: &self.re * &rhs.re - &self.im * &rhs.im,
            im: &self.re * &rhs.im + &self.im * &rhs.re,
        }
    }
}

impl fmt::Debug for QComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for QComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.re.is_zero(), self.im.is_zero()) {
            (_, true) => write!(f, "{}", self.re),
            (true, false) => write!(f, "{}i", self.im),
            (false, false) => {
                let sign = if self.im.is_negative() { "-" } else { "+" };
                write!(f, "({} {} {}i)", self.re, sign, self.im.abs())
            }
        }
    }
}
