//! Truncated Taylor polynomials in `(t_1, t_2, t_3)` with weights 1, 2, 3.
//!
//! A jet keeps every monomial `t^α` with `α_1 + 2α_2 + 3α_3 ≤ weight`. The
//! weighting matches the shift rule `∂_{t_k} ↔ shift by k`, so a jet of
//! `A` built from the shifts `A_0..A_W` is exact to weight `W`.

use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

pub type MultiIndex = [u32; 3];

pub fn weight(a: MultiIndex) -> u32 {
    a[0] + 2 * a[1] + 3 * a[2]
}

pub fn factorial(a: MultiIndex) -> f64 {
    a.iter()
        .map(|&k| (1..=k).map(f64::from).product::<f64>())
        .product()
}

/// All multi-indices of weight at most `w`.
pub fn indices(w: u32) -> Vec<MultiIndex> {
    let mut out = Vec::new();
    for a3 in 0..=w / 3 {
        for a2 in 0..=(w - 3 * a3) / 2 {
            for a1 in 0..=(w - 3 * a3 - 2 * a2) {
                out.push([a1, a2, a3]);
            }
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct Jet {
    weight: u32,
    coeffs: BTreeMap<MultiIndex, Complex64>,
}

impl Jet {
    pub fn zero(weight: u32) -> Self {
        Self {
            weight,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn constant(c: Complex64, weight: u32) -> Self {
        let mut j = Self::zero(weight);
        j.coeffs.insert([0, 0, 0], c);
        j
    }

    /// Jet whose derivative `∂^α` at the base point is `d(α)`.
    pub fn from_derivatives(weight: u32, d: impl Fn(MultiIndex) -> Complex64) -> Self {
        let coeffs = indices(weight)
            .into_iter()
            .map(|a| (a, d(a) / factorial(a)))
            .collect();
        Self { weight, coeffs }
    }

    pub fn weight(&self) -> u32 {
        self.weight
    }

    pub fn coeff(&self, a: MultiIndex) -> Complex64 {
        self.coeffs.get(&a).copied().unwrap_or_default()
    }

    /// `∂^α` at the base point.
    pub fn derivative_at(&self, a: MultiIndex) -> Complex64 {
        self.coeff(a) * factorial(a)
    }

    pub fn value(&self) -> Complex64 {
        self.coeff([0, 0, 0])
    }

    /// `∂/∂t_{i+1}`; the weight drops by `i + 1`.
    pub fn diff(&self, i: usize) -> Self {
        let w = i as u32 + 1;
        let mut out = Self::zero(self.weight.saturating_sub(w));
        for (a, &v) in &self.coeffs {
            if a[i] > 0 {
                let mut b = *a;
                b[i] -= 1;
                if weight(b) <= out.weight {
                    out.coeffs.insert(b, v * a[i] as f64);
                }
            }
        }
        out
    }

    pub fn scale(&self, k: Complex64) -> Self {
        Self {
            weight: self.weight,
            coeffs: self.coeffs.iter().map(|(a, v)| (*a, v * k)).collect(),
        }
    }

    /// `1/self`, requiring a nonzero constant term.
    pub fn recip(&self) -> Self {
        let c0 = self.value();
        // 1/(c0 (1 + u)) = Σ (-u)^k / c0 with u nilpotent to this weight
        let u = (self - &Self::constant(c0, self.weight)).scale(1.0 / c0);
        let mut acc = Self::constant(Complex64::new(1.0, 0.0), self.weight);
        let mut term = acc.clone();
        for _ in 0..self.weight {
            term = &term * &(-&u);
            acc = &acc + &term;
        }
        acc.scale(1.0 / c0)
    }
}

impl Add for &Jet {
    type Output = Jet;
    fn add(self, o: &Jet) -> Jet {
        let w = self.weight.min(o.weight);
        let mut coeffs: BTreeMap<MultiIndex, Complex64> = BTreeMap::new();
        for (a, v) in self.coeffs.iter().chain(&o.coeffs) {
            if weight(*a) <= w {
                *coeffs.entry(*a).or_default() += v;
            }
        }
        Jet { weight: w, coeffs }
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(Complex64::new(-1.0, 0.0))
    }
}

impl Sub for &Jet {
    type Output = Jet;
    fn sub(self, o: &Jet) -> Jet {
        self + &(-o)
    }
}

impl Mul for &Jet {
    type Output = Jet;
    fn mul(self, o: &Jet) -> Jet {
        let w = self.weight.min(o.weight);
        let mut coeffs: BTreeMap<MultiIndex, Complex64> = BTreeMap::new();
        for (a, u) in &self.coeffs {
            for (b, v) in &o.coeffs {
                let s = [a[0] + b[0], a[1] + b[1], a[2] + b[2]];
                if weight(s) <= w {
                    *coeffs.entry(s).or_default() += u * v;
                }
            }
        }
        Jet { weight: w, coeffs }
    }
}
