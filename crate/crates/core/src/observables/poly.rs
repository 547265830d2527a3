use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_complex::Complex64;
use num_traits::{One, Zero};

use super::qcomplex::QComplex;
use super::BracketWindow;

/// Phase-space coordinate: an affine coefficient `c_n` (`n ≥ 1`) or a
/// momentum coefficient `ψ̄_m` (`m ∈ ℤ`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Var {
    C(u32),
    Psi(i32),
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Var::C(n) => write!(f, "c{n}"),
            Var::Psi(m) => write!(f, "ψ̄{m}"),
        }
    }
}

/// Sorted product of variable powers; exponents are nonzero.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial(Vec<(Var, u32)>);

impl Monomial {
    pub fn one() -> Self {
        Self(Vec::new())
    }

    pub fn var(v: Var) -> Self {
        Self(vec![(v, 1)])
    }

    pub fn from_powers(powers: impl IntoIterator<Item = (Var, u32)>) -> Self {
        let mut map: BTreeMap<Var, u32> = BTreeMap::new();
        for (v, e) in powers {
            *map.entry(v).or_default() += e;
        }
        Self(map.into_iter().filter(|&(_, e)| e > 0).collect())
    }

    pub fn powers(&self) -> &[(Var, u32)] {
        &self.0
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&(_, e)| e).sum()
    }

    pub fn exponent(&self, v: Var) -> u32 {
        self.0
            .iter()
            .find(|&&(w, _)| w == v)
            .map_or(0, |&(_, e)| e)
    }

    pub fn vars(&self) -> impl Iterator<Item = Var> + '_ {
        self.0.iter().map(|&(v, _)| v)
    }

    fn mul(&self, other: &Self) -> Self {
        let (a, b) = (&self.0, &other.0);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                std::cmp::Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(b[j]);
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    out.push((a[i].0, a[i].1 + b[j].1));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Self(out)
    }

    /// `∂/∂v` of the monomial: the multiplicity and the reduced monomial.
    fn derive(&self, v: Var) -> Option<(u32, Self)> {
        let pos = self.0.iter().position(|&(w, _)| w == v)?;
        let e = self.0[pos].1;
        let mut rest = self.0.clone();
        if e == 1 {
            rest.remove(pos);
        } else {
            rest[pos].1 = e - 1;
        }
        Some((e, Self(rest)))
    }

    fn eval(&self, c: &dyn Fn(u32) -> Complex64, psi: &dyn Fn(i32) -> Complex64) -> Complex64 {
        self.0
            .iter()
            .map(|&(v, e)| {
                let x = match v {
                    Var::C(n) => c(n),
                    Var::Psi(m) => psi(m),
                };
                x.powu(e)
            })
            .product()
    }
}

/// Exact polynomial in the phase coordinates `{c_n}` and `{ψ̄_m}`.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct PhasePoly {
    terms: BTreeMap<Monomial, QComplex>,
}

impl PhasePoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(value: QComplex) -> Self {
        let mut p = Self::zero();
        p.add_term(Monomial::one(), value);
        p
    }

    pub fn int(n: i64) -> Self {
        Self::constant(QComplex::int(n))
    }

    pub fn var(v: Var) -> Self {
        let mut p = Self::zero();
        p.add_term(Monomial::var(v), QComplex::one());
        p
    }

    /// `c_n`, with the convention `c_0 = 1`.
    pub fn c(n: u32) -> Self {
        if n == 0 {
            Self::int(1)
        } else {
            Self::var(Var::C(n))
        }
    }

    pub fn psibar(m: i32) -> Self {
        Self::var(Var::Psi(m))
    }

    pub fn monomial(m: Monomial, coeff: QComplex) -> Self {
        let mut p = Self::zero();
        p.add_term(m, coeff);
        p
    }

    pub fn add_term(&mut self, m: Monomial, coeff: QComplex) {
        if coeff.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(coeff);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += &coeff;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &QComplex)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, m: &Monomial) -> QComplex {
        self.terms.get(m).cloned().unwrap_or_default()
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.add_assign(other);
        out
    }

    pub fn add_assign(&mut self, other: &Self) {
        for (m, a) in &other.terms {
            self.add_term(m.clone(), a.clone());
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (m, a) in &other.terms {
            out.add_term(m.clone(), -a);
        }
        out
    }

    pub fn neg(&self) -> Self {
        self.scale(&QComplex::int(-1))
    }

    pub fn scale(&self, k: &QComplex) -> Self {
        let mut out = Self::zero();
        if k.is_zero() {
            return out;
        }
        for (m, a) in &self.terms {
            out.add_term(m.clone(), a * k);
        }
        out
    }

    pub fn scale_int(&self, k: i64) -> Self {
        self.scale(&QComplex::int(k))
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (ma, a) in &self.terms {
            for (mb, b) in &other.terms {
                out.add_term(ma.mul(mb), a * b);
            }
        }
        out
    }

    pub fn derivative(&self, v: Var) -> Self {
        let mut out = Self::zero();
        for (m, a) in &self.terms {
            if let Some((e, rest)) = m.derive(v) {
                out.add_term(rest, a.scale_int(e as i64));
            }
        }
        out
    }

    pub fn variables(&self) -> BTreeSet<Var> {
        self.terms.keys().flat_map(|m| m.vars()).collect()
    }

    pub fn max_c_index(&self) -> u32 {
        self.variables()
            .into_iter()
            .filter_map(|v| match v {
                Var::C(n) => Some(n),
                Var::Psi(_) => None,
            })
            .max()
            .unwrap_or(0)
    }

    /// Keeps only monomials whose variables all lie inside `window`.
    pub fn restrict(&self, window: &BracketWindow) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.vars().all(|v| window.contains(v)))
                .map(|(m, a)| (m.clone(), a.clone()))
                .collect(),
        }
    }

    /// Equality of the monomials whose variables all lie inside `window`.
    pub fn eq_within(&self, other: &Self, window: &BracketWindow) -> bool {
        self.restrict(window) == other.restrict(window)
    }

    /// Replaces every coefficient by its complex conjugate.
    pub fn conj_coefficients(&self) -> Self {
        Self {
            terms: self.terms.iter().map(|(m, a)| (m.clone(), a.conj())).collect(),
        }
    }

    pub fn eval(
        &self,
        c: &dyn Fn(u32) -> Complex64,
        psi: &dyn Fn(i32) -> Complex64,
    ) -> Complex64 {
        self.terms
            .iter()
            .map(|(m, a)| a.to_c64() * m.eval(c, psi))
            .sum()
    }

    /// Evaluates a polynomial in the `c` variables only (`c_n` beyond the
    /// slice read as zero; any `ψ̄` reads as zero).
    pub fn eval_c(&self, c: &[Complex64]) -> Complex64 {
        let get = |n: u32| c.get(n as usize - 1).copied().unwrap_or_default();
        self.eval(&get, &|_| Complex64::zero())
    }

    /// Splits a polynomial that is homogeneous of degree one in the `ψ̄`
    /// variables into its `ψ̄_m` coefficients. Returns `None` when some
    /// monomial is not of the form `(c-monomial)·ψ̄_m`.
    pub fn psi_linear_parts(&self) -> Option<BTreeMap<i32, PhasePoly>> {
        let mut parts: BTreeMap<i32, PhasePoly> = BTreeMap::new();
        for (m, a) in &self.terms {
            let psis: Vec<(Var, u32)> = m
                .powers()
                .iter()
                .copied()
                .filter(|(v, _)| matches!(v, Var::Psi(_)))
                .collect();
            let [(Var::Psi(idx), 1)] = psis.as_slice() else {
                return None;
            };
            let rest = m.derive(Var::Psi(*idx))?.1;
            parts
                .entry(*idx)
                .or_default()
                .add_term(rest, a.clone());
        }
        Some(parts)
    }
}

impl fmt::Debug for PhasePoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for PhasePoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (m, a)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{a}")?;
            for &(v, e) in m.powers() {
                if e == 1 {
                    write!(f, "·{v}")?;
                } else {
                    write!(f, "·{v}^{e}")?;
                }
            }
        }
        Ok(())
    }
}

/// Canonical bracket: `{c_n, ψ̄_m} = δ_{nm}`, `{c_n, c_k} = {ψ̄_l, ψ̄_m} = 0`,
/// extended by bilinearity and the Leibniz rule.
pub fn poisson_bracket(a: &PhasePoly, b: &PhasePoly) -> PhasePoly {
    let va = a.variables();
    let vb = b.variables();
    let mut pairs: BTreeSet<u32> = BTreeSet::new();
    for v in &va {
        match *v {
            Var::C(n) if vb.contains(&Var::Psi(n as i32)) => {
                pairs.insert(n);
            }
            Var::Psi(m) if m >= 1 && vb.contains(&Var::C(m as u32)) => {
                pairs.insert(m as u32);
            }
            _ => {}
        }
    }
    let mut out = PhasePoly::zero();
    for n in pairs {
        let (c, p) = (Var::C(n), Var::Psi(n as i32));
        out.add_assign(&a.derivative(c).mul(&b.derivative(p)));
        out.add_assign(&a.derivative(p).mul(&b.derivative(c)).neg());
    }
    out
}
