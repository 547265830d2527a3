//! Truncated Taylor and Laurent series over `Complex64`.
//!
//! A [`TruncatedSeries`] of order `N` carries the coefficients of
//! `z^0 ..= z^N`; everything above `N` has been discarded. Binary operations
//! truncate to the smaller order of their inputs, so every coefficient that
//! survives an operation is exact (up to floating-point rounding).
//!
//! A [`TruncatedLaurent`] carries the window `z^{-m} ..= z^N`. Coefficients
//! below `-m` are zero by construction; coefficients above `N` are unknown.

use std::fmt;
use std::ops::{Add, Neg, Sub};

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SeriesError {
    #[error("series has zero constant term; reciprocal undefined")]
    ZeroConstantTerm,
    #[error("inner series of a composition must vanish at the origin (constant term {0})")]
    InnerConstantTermNonzero(Complex64),
    #[error("exponential needs a series without constant term (constant term {0})")]
    NonzeroConstantTerm(Complex64),
}

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Coefficients `a_0 ..= a_N` of a power series truncated at order `N`.
#[derive(Clone, PartialEq)]
pub struct TruncatedSeries {
    coeffs: Vec<Complex64>,
}

impl fmt::Debug for TruncatedSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TruncatedSeries")
            .field("order", &self.order())
            .field("coeffs", &self.coeffs)
            .finish()
    }
}

impl TruncatedSeries {
    /// Builds a series of order `coeffs.len() - 1`. An empty vector yields the
    /// order-0 zero series.
    pub fn new(mut coeffs: Vec<Complex64>) -> Self {
        if coeffs.is_empty() {
            coeffs.push(ZERO);
        }
        Self { coeffs }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn zero(order: usize) -> Self {
        Self {
            coeffs: vec![ZERO; order + 1],
        }
    }

    pub fn one(order: usize) -> Self {
        Self::constant(ONE, order)
    }

    pub fn constant(value: Complex64, order: usize) -> Self {
        let mut s = Self::zero(order);
        s.coeffs[0] = value;
        s
    }

    /// The identity map `z` (order at least 1).
    pub fn identity(order: usize) -> Self {
        let mut s = Self::zero(order.max(1));
        s.coeffs[1] = ONE;
        s
    }

    pub fn from_fn(order: usize, f: impl FnMut(usize) -> Complex64) -> Self {
        Self {
            coeffs: (0..=order).map(f).collect(),
        }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Coefficient of `z^k`; zero outside the window.
    pub fn coeff(&self, k: usize) -> Complex64 {
        self.coeffs.get(k).copied().unwrap_or(ZERO)
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    pub fn set_coeff(&mut self, k: usize, value: Complex64) {
        self.coeffs[k] = value;
    }

    /// Drops (or zero-pads) to the requested order.
    pub fn truncate(&self, order: usize) -> Self {
        Self::from_fn(order, |k| self.coeff(k))
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|&a| a * factor).collect(),
        }
    }

    /// Horner evaluation of the retained polynomial.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(ZERO, |acc, &a| acc * z + a)
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|a| a.norm()).fold(0.0, f64::max)
    }

    /// Cauchy product truncated to the smaller order.
    pub fn mul(&self, other: &Self) -> Self {
        let order = self.order().min(other.order());
        Self::from_fn(order, |k| {
            (0..=k).map(|i| self.coeffs[i] * other.coeffs[k - i]).sum()
        })
    }

    /// Multiplicative inverse via `b_n = -(1/a_0) Σ_{k=1}^{n} a_k b_{n-k}`.
    pub fn reciprocal(&self) -> Result<Self, SeriesError> {
        let a0 = self.coeffs[0];
        if a0 == ZERO {
            return Err(SeriesError::ZeroConstantTerm);
        }
        let inv0 = a0.inv();
        let mut b = Vec::with_capacity(self.coeffs.len());
        b.push(inv0);
        for n in 1..self.coeffs.len() {
            let acc: Complex64 = (1..=n).map(|k| self.coeffs[k] * b[n - k]).sum();
            b.push(-acc * inv0);
        }
        Ok(Self { coeffs: b })
    }

    /// `self ∘ inner`, accumulated Horner-style with truncation after every
    /// multiplication.
    pub fn compose(&self, inner: &Self) -> Result<Self, SeriesError> {
        if inner.coeffs[0] != ZERO {
            return Err(SeriesError::InnerConstantTermNonzero(inner.coeffs[0]));
        }
        let order = self.order().min(inner.order());
        let inner = inner.truncate(order);
        let mut acc = Self::zero(order);
        for &p in self.coeffs.iter().rev() {
            acc = acc.mul(&inner);
            acc.coeffs[0] += p;
        }
        Ok(acc)
    }

    /// Term-wise derivative. The result has order `N - 1` (order 0 stays 0).
    pub fn differentiate(&self) -> Self {
        let order = self.order().saturating_sub(1);
        Self::from_fn(order, |k| self.coeff(k + 1) * (k as f64 + 1.0))
    }

    /// Truncated `exp(a)` from `n b_n = Σ_{k=1}^{n} k a_k b_{n-k}`.
    pub fn exp_series(&self) -> Result<Self, SeriesError> {
        if self.coeffs[0] != ZERO {
            return Err(SeriesError::NonzeroConstantTerm(self.coeffs[0]));
        }
        let mut b = Vec::with_capacity(self.coeffs.len());
        b.push(ONE);
        for n in 1..self.coeffs.len() {
            let acc: Complex64 = (1..=n)
                .map(|k| self.coeffs[k] * b[n - k] * k as f64)
                .sum();
            b.push(acc / n as f64);
        }
        Ok(Self { coeffs: b })
    }
}

impl Add for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn add(self, rhs: Self) -> TruncatedSeries {
        let order = self.order().min(rhs.order());
        TruncatedSeries::from_fn(order, |k| self.coeffs[k] + rhs.coeffs[k])
    }
}

impl Sub for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn sub(self, rhs: Self) -> TruncatedSeries {
        let order = self.order().min(rhs.order());
        TruncatedSeries::from_fn(order, |k| self.coeffs[k] - rhs.coeffs[k])
    }
}

impl Neg for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn neg(self) -> TruncatedSeries {
        self.scale(-ONE)
    }
}

/// Coefficients of `z^{-m} ..= z^N`.
#[derive(Clone, PartialEq)]
pub struct TruncatedLaurent {
    low: usize,
    coeffs: Vec<Complex64>,
}

impl fmt::Debug for TruncatedLaurent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TruncatedLaurent")
            .field("window", &(self.min_power(), self.max_power()))
            .field("coeffs", &self.coeffs)
            .finish()
    }
}

impl TruncatedLaurent {
    /// Window `[-low, high]`, all zero.
    pub fn zero(low: usize, high: usize) -> Self {
        Self {
            low,
            coeffs: vec![ZERO; low + high + 1],
        }
    }

    /// Builds from coefficients starting at power `min_power`. A positive
    /// `min_power` is zero-padded down to `z^0`; the top of the window must be
    /// nonnegative.
    pub fn from_coeffs(min_power: i64, coeffs: Vec<Complex64>) -> Self {
        let max_power = min_power + coeffs.len() as i64 - 1;
        assert!(
            max_power >= 0,
            "Laurent window must reach z^0 (max power {max_power})"
        );
        if min_power > 0 {
            let mut padded = vec![ZERO; min_power as usize];
            padded.extend(coeffs);
            Self {
                low: 0,
                coeffs: padded,
            }
        } else {
            Self {
                low: (-min_power) as usize,
                coeffs,
            }
        }
    }

    pub fn from_series(s: &TruncatedSeries) -> Self {
        Self {
            low: 0,
            coeffs: s.coeffs().to_vec(),
        }
    }

    pub fn from_fn(low: usize, high: usize, mut f: impl FnMut(i64) -> Complex64) -> Self {
        Self {
            low,
            coeffs: (-(low as i64)..=high as i64).map(&mut f).collect(),
        }
    }

    /// `m`, so that the lowest retained power is `z^{-m}`.
    pub fn low_order(&self) -> usize {
        self.low
    }

    /// `N`, the highest retained power.
    pub fn high_order(&self) -> usize {
        self.coeffs.len() - 1 - self.low
    }

    pub fn min_power(&self) -> i64 {
        -(self.low as i64)
    }

    pub fn max_power(&self) -> i64 {
        self.high_order() as i64
    }

    pub fn coeff(&self, power: i64) -> Complex64 {
        let idx = power + self.low as i64;
        if idx < 0 {
            return ZERO;
        }
        self.coeffs.get(idx as usize).copied().unwrap_or(ZERO)
    }

    pub fn set_coeff(&mut self, power: i64, value: Complex64) {
        let idx = (power + self.low as i64) as usize;
        self.coeffs[idx] = value;
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn powers(&self) -> impl Iterator<Item = i64> {
        self.min_power()..=self.max_power()
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        let zinv = z.inv();
        self.powers()
            .map(|p| {
                let zp = if p >= 0 {
                    z.powi(p as i32)
                } else {
                    zinv.powi((-p) as i32)
                };
                self.coeff(p) * zp
            })
            .sum()
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self {
            low: self.low,
            coeffs: self.coeffs.iter().map(|&a| a * factor).collect(),
        }
    }

    /// Cauchy product. The lower edge is exact (`-(m1 + m2)`); the upper edge
    /// is the largest power not reached by either unknown tail,
    /// `min(N1 - m2, N2 - m1)`, clamped at zero.
    pub fn mul(&self, other: &Self) -> Self {
        let low = self.low + other.low;
        let high = (self.high_order() as i64 - other.low as i64)
            .min(other.high_order() as i64 - self.low as i64)
            .max(0) as usize;
        Self::from_fn(low, high, |k| {
            self.powers()
                .map(|i| self.coeff(i) * other.coeff(k - i))
                .sum()
        })
    }

    /// Term-wise derivative, `z^k ↦ k z^{k-1}`. The window becomes
    /// `[-m-1, N-1]` (with `N = 0` staying at `0`).
    pub fn differentiate(&self) -> Self {
        let low = if self.low == 0 { 0 } else { self.low + 1 };
        let high = self.high_order().saturating_sub(1);
        Self::from_fn(low, high, |k| self.coeff(k + 1) * (k as f64 + 1.0))
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let lo = self.min_power().min(other.min_power());
        let hi = self.max_power().min(other.max_power());
        (lo..=hi)
            .map(|p| (self.coeff(p) - other.coeff(p)).norm())
            .fold(0.0, f64::max)
    }
}

impl Sub for &TruncatedLaurent {
    type Output = TruncatedLaurent;
    fn sub(self, rhs: Self) -> TruncatedLaurent {
        let low = self.low.max(rhs.low);
        let high = self.high_order().min(rhs.high_order());
        TruncatedLaurent::from_fn(low, high, |k| self.coeff(k) - rhs.coeff(k))
    }
}

impl Add for &TruncatedLaurent {
    type Output = TruncatedLaurent;
    fn add(self, rhs: Self) -> TruncatedLaurent {
        let low = self.low.max(rhs.low);
        let high = self.high_order().min(rhs.high_order());
        TruncatedLaurent::from_fn(low, high, |k| self.coeff(k) + rhs.coeff(k))
    }
}
