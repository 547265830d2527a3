//! Generalized times, the bilinear form `A`, the Baker-Akhiezer function and
//! the τ-function of a graph `W_{T_n}`, and the KP residual.
//!
//! With `g(z) = exp(Σ t_k z^k) = Σ a_m z^m` and the first row `T_0` of the
//! `n = 1` graph operator, the bilinear form is
//! `A_s = Σ_j T_{0j} a_{j+1-s}` (with `a_0 = 1`, `a_{<0} = 0`). The shift
//! rule `∂_{t_k} a_m = a_{m-k}` gives `∂^α A = A_{α_1 + 2α_2 + 3α_3}`
//! exactly, so every derivative below is read from the table `A_s`.

pub mod jet;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use thiserror::Error;

use crate::grassmannian::{step2_graph, GrassmannianError, GraphOperator};
use crate::observables::{PhasePoly, QComplex};
use crate::series::{TruncatedLaurent, TruncatedSeries};
use jet::{Jet, MultiIndex};

/// Largest shift needed by the KP residual: `∂_1^6 A`, `∂_1²∂_2² A`,
/// `∂_1³∂_3 A` all have weight 6.
pub const MAX_SHIFT: u32 = 6;

const NEAR_SINGULAR: f64 = 1e-10;
const TAIL_TOL: f64 = 1e-14;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KpError {
    #[error("at least three generalized times are required, got {0}")]
    TooFewTimes(usize),
    #[error("truncation N = {order} too small: tail term {tail:e} exceeds tolerance")]
    WindowTooSmall { order: usize, tail: f64 },
    #[error("derivative of weight {0} exceeds the stored table")]
    OutsideTable(u32),
    #[error("1 - A = {0} is too close to zero")]
    NearSingularA(Complex64),
    #[error("Baker-Akhiezer system is singular")]
    SingularSystem,
    #[error(transparent)]
    Graph(#[from] GrassmannianError),
}

#[derive(Clone, Debug, PartialEq)]
pub struct GeneralizedTimes {
    t: Vec<Complex64>,
}

impl GeneralizedTimes {
    pub fn new(t: Vec<Complex64>) -> Result<Self, KpError> {
        if t.len() < 3 {
            return Err(KpError::TooFewTimes(t.len()));
        }
        Ok(Self { t })
    }

    pub fn real(t: &[f64]) -> Result<Self, KpError> {
        Self::new(t.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    /// `t_k`, 1-based; zero beyond the stored times.
    pub fn get(&self, k: usize) -> Complex64 {
        if k == 0 {
            Complex64::default()
        } else {
            self.t.get(k - 1).copied().unwrap_or_default()
        }
    }

    pub fn times(&self) -> &[Complex64] {
        &self.t
    }

    /// `t_k + δ` on one coordinate.
    pub fn bumped(&self, k: usize, delta: f64) -> Self {
        let mut t = self.t.clone();
        if t.len() < k {
            t.resize(k, Complex64::default());
        }
        t[k - 1] += delta;
        Self { t }
    }

    /// `t - [z^{-1}]`: `t_k - z^{-k}/k` for `k = 1..=len`.
    pub fn sato_shift(&self, z: Complex64, len: usize) -> Self {
        let len = len.max(self.t.len());
        Self {
            t: (1..=len)
                .map(|k| self.get(k) - z.powi(-(k as i32)) / k as f64)
                .collect(),
        }
    }

    /// `ξ(t, z) = Σ t_k z^k`.
    pub fn xi(&self, z: Complex64) -> Complex64 {
        self.t
            .iter()
            .enumerate()
            .map(|(i, &tk)| tk * z.powi(i as i32 + 1))
            .sum()
    }
}

/// `S_0..=S_K` from `1 + Σ S_k z^k = exp(Σ t_k z^k)`.
pub fn schur(t: &GeneralizedTimes, order: usize) -> Vec<Complex64> {
    let xi = TruncatedSeries::from_fn(order, |k| t.get(k));
    xi.exp_series()
        .expect("ξ has no constant term")
        .into_coeffs()
}

/// `S_0..=S_K` as exact polynomials, with the variable `c_k` standing for
/// `t_k`. Uses `n S_n = Σ_k k t_k S_{n-k}`.
pub fn schur_polynomials(order: usize) -> Vec<PhasePoly> {
    let mut s = vec![PhasePoly::int(1)];
    for n in 1..=order {
        let mut acc = PhasePoly::zero();
        for k in 1..=n {
            acc.add_assign(&PhasePoly::c(k as u32).scale_int(k as i64).mul(&s[n - k]));
        }
        s.push(acc.scale(&QComplex::ratio(1, n as i64)));
    }
    s
}

/// Table `A_0..=A_MAX_SHIFT` of the bilinear form and its shifts.
#[derive(Clone, Debug, PartialEq)]
pub struct ABForm {
    pub order: usize,
    /// `T_{0j}` for `j = 0..=N`.
    pub row: Vec<Complex64>,
    /// `a_0..a_{N+1}`.
    pub a: Vec<Complex64>,
    pub table: Vec<Complex64>,
}

impl ABForm {
    pub fn from_graph(op: &GraphOperator, t: &GeneralizedTimes) -> Result<Self, KpError> {
        let order = op.order;
        let row: Vec<Complex64> = op.t.row(0).iter().copied().collect();
        let a = schur(t, order + 1);
        let a_at = |m: i64| if m < 0 { Complex64::default() } else { a[m as usize] };
        let table: Vec<Complex64> = (0..=MAX_SHIFT as i64)
            .map(|s| {
                row.iter()
                    .enumerate()
                    .map(|(j, &r)| r * a_at(j as i64 + 1 - s))
                    .sum()
            })
            .collect();
        // contribution of the last retained column to A itself
        let tail = (row[order] * a_at(order as i64 + 1)).norm();
        if tail > TAIL_TOL {
            return Err(KpError::WindowTooSmall { order, tail });
        }
        Ok(Self { order, row, a, table })
    }

    /// Builds the `n = 1` graph of `f` at truncation `N`.
    pub fn new(c: &[Complex64], t: &GeneralizedTimes, order: usize) -> Result<Self, KpError> {
        Self::from_graph(&step2_graph(c, 1, order)?, t)
    }

    /// `∂^α A` over `(t_1, t_2, t_3)`.
    pub fn derivative(&self, alpha: MultiIndex) -> Result<Complex64, KpError> {
        let s = jet::weight(alpha);
        self.table
            .get(s as usize)
            .copied()
            .ok_or(KpError::OutsideTable(s))
    }

    pub fn a_value(&self) -> Complex64 {
        self.table[0]
    }

    /// `B = ∂_{t_1} A`.
    pub fn b_value(&self) -> Complex64 {
        self.table[1]
    }

    /// Jet of `A` at the base point, exact to weight [`MAX_SHIFT`].
    pub fn jet(&self) -> Jet {
        Jet::from_derivatives(MAX_SHIFT, |a| self.table[jet::weight(a) as usize])
    }
}

/// `∂^α A` for `f` given by `c` at truncation `N`.
pub fn a_form(
    c: &[Complex64],
    t: &GeneralizedTimes,
    alpha: MultiIndex,
    order: usize,
) -> Result<Complex64, KpError> {
    ABForm::new(c, t, order)?.derivative(alpha)
}

/// `ω_1 = ∂A/(1 - A)` as a jet, exact to weight 5.
#[derive(Clone, Debug, PartialEq)]
pub struct OmegaJet {
    pub jet: Jet,
}

impl OmegaJet {
    pub fn value(&self) -> Complex64 {
        self.jet.value()
    }

    pub fn partial(&self, alpha: MultiIndex) -> Complex64 {
        self.jet.derivative_at(alpha)
    }
}

/// `ω_1` and its `(t_1, t_2, t_3)` partials by the quotient rule on the
/// exact `A` table.
pub fn omega1_and_partials(ab: &ABForm) -> Result<OmegaJet, KpError> {
    let a = ab.jet();
    let one_minus = &Jet::constant(Complex64::new(1.0, 0.0), a.weight()) - &a;
    if one_minus.value().norm() < NEAR_SINGULAR {
        return Err(KpError::NearSingularA(one_minus.value()));
    }
    Ok(OmegaJet {
        jet: &a.diff(0) * &one_minus.recip(),
    })
}

/// `∂²A/(1 - A) + (∂A/(1 - A))²`, the closed form of `∂_{t_1} ω_1`.
pub fn omega1_t1_closed_form(ab: &ABForm) -> Result<Complex64, KpError> {
    let d = 1.0 - ab.a_value();
    if d.norm() < NEAR_SINGULAR {
        return Err(KpError::NearSingularA(d));
    }
    let r = ab.table[1] / d;
    Ok(ab.table[2] / d + r * r)
}

/// `|3∂²_{t_2}λ - ∂(4∂_{t_3}λ - 12λ∂λ - ∂³λ)|` with `λ = -∂ω_1`, `∂ = ∂_{t_1}`.
pub fn kp_residual_from(ab: &ABForm) -> Result<f64, KpError> {
    let omega = omega1_and_partials(ab)?.jet;
    let lambda = -&omega.diff(0);
    let d1 = |j: &Jet| j.diff(0);
    let lhs = lambda.diff(1).diff(1).scale(Complex64::new(3.0, 0.0));
    let inner = &(&lambda.diff(2).scale(Complex64::new(4.0, 0.0))
        - &(&lambda * &d1(&lambda)).scale(Complex64::new(12.0, 0.0)))
        - &d1(&d1(&d1(&lambda)));
    Ok((lhs.value() - d1(&inner).value()).norm())
}

pub fn kp_residual(c: &[Complex64], t: &GeneralizedTimes, order: usize) -> Result<f64, KpError> {
    kp_residual_from(&ABForm::new(c, t, order)?)
}

#[derive(Clone, Debug, PartialEq)]
pub struct BakerAkhiezer {
    pub n: usize,
    /// `ω_1..ω_n`.
    pub omega: Vec<Complex64>,
    /// Coefficients of `Ψ = g(z)(1 + Σ ω_k z^{-k})` on `[-n, N]`.
    pub laurent: TruncatedLaurent,
    pub samples: Vec<Complex64>,
    /// `e^{ξ(t,z)}(1 + Σ ω_k z^{-k})` at the samples.
    pub values: Vec<Complex64>,
}

/// Solves for `ω_1..ω_n` so that `Ψ = g(1 + Σ ω_k z^{-k})` lies in the graph:
/// its `z^{-r-1}` coefficient equals `(T Ψ_+)_r` for every row `r`.
pub fn baker_akhiezer(
    op: &GraphOperator,
    t: &GeneralizedTimes,
    samples: &[Complex64],
) -> Result<BakerAkhiezer, KpError> {
    let (n, order) = (op.n, op.order);
    let a = schur(t, order + n);
    let a_at = |m: i64| if m < 0 { Complex64::default() } else { a[m as usize] };
    let mut m = DMatrix::<Complex64>::zeros(n, n);
    let mut rhs = DVector::<Complex64>::zeros(n);
    for r in 0..n {
        for k in 1..=n {
            let tail: Complex64 = (0..=order).map(|j| op.t[(r, j)] * a_at((j + k) as i64)).sum();
            m[(r, k - 1)] = a_at(k as i64 - r as i64 - 1) - tail;
        }
        rhs[r] = (0..=order).map(|j| op.t[(r, j)] * a_at(j as i64)).sum();
    }
    let omega = m.lu().solve(&rhs).ok_or(KpError::SingularSystem)?;
    if omega.iter().any(|w| !w.is_finite()) {
        return Err(KpError::SingularSystem);
    }
    let omega: Vec<Complex64> = omega.iter().copied().collect();
    let w_at = |k: usize| if k == 0 { Complex64::new(1.0, 0.0) } else { omega[k - 1] };
    let laurent = TruncatedLaurent::from_fn(n, order, |j| {
        (0..=n).map(|k| w_at(k) * a_at(j + k as i64)).sum()
    });
    let values = samples
        .iter()
        .map(|&z| {
            let tail: Complex64 = (0..=n).map(|k| w_at(k) * z.powi(-(k as i32))).sum();
            t.xi(z).exp() * tail
        })
        .collect();
    Ok(BakerAkhiezer {
        n,
        omega,
        laurent,
        samples: samples.to_vec(),
        values,
    })
}

/// Coefficients `γ_0..γ_K` of `g^{-1} = exp(-ξ)`.
fn inverse_schur(t: &GeneralizedTimes, order: usize) -> Vec<Complex64> {
    let xi = TruncatedSeries::from_fn(order, |k| -t.get(k));
    xi.exp_series().expect("ξ has no constant term").into_coeffs()
}

/// Blocks `a⁻¹` (`(N+1)×(N+1)`) and `b` (`(N+1)×n`) of multiplication by
/// `g^{-1}`.
fn multiplication_blocks(op: &GraphOperator, t: &GeneralizedTimes) -> (DMatrix<Complex64>, DMatrix<Complex64>) {
    let dim = op.order + 1;
    let s = schur(t, dim);
    let gamma = inverse_schur(t, dim + op.n);
    let a_inv = DMatrix::from_fn(dim, dim, |i, j| if i >= j { s[i - j] } else { Complex64::default() });
    let b = DMatrix::from_fn(dim, op.n, |m, r| gamma[m + r + 1]);
    (a_inv, b)
}

/// `τ(t) = det(1 + a⁻¹ b T_n)` on the `(N+1)`-dimensional truncation.
pub fn tau(op: &GraphOperator, t: &GeneralizedTimes) -> Complex64 {
    let (a_inv, b) = multiplication_blocks(op, t);
    let k = &a_inv * &b * &op.t;
    (DMatrix::identity(op.order + 1, op.order + 1) + k).determinant()
}

/// The same determinant reduced to `n × n` by `det(1 + XY) = det(1 + YX)`.
pub fn tau_reduced(op: &GraphOperator, t: &GeneralizedTimes) -> Complex64 {
    let (a_inv, b) = multiplication_blocks(op, t);
    let k = &op.t * &a_inv * &b;
    (DMatrix::identity(op.n, op.n) + k).determinant()
}

/// `e^{ξ(t,z)} τ(t - [z^{-1}]) / τ(t)`.
pub fn sato_psi(op: &GraphOperator, t: &GeneralizedTimes, z: Complex64) -> Complex64 {
    let shifted = t.sato_shift(z, op.order + op.n + 1);
    t.xi(z).exp() * tau(op, &shifted) / tau(op, t)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cr(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn times() -> GeneralizedTimes {
        GeneralizedTimes::real(&[0.05, 0.03, 0.02]).unwrap()
    }

    fn decaying(n: usize) -> Vec<Complex64> {
        (1..=n).map(|k| cr(0.5f64.powi(k as i32) / k as f64)).collect()
    }

    #[test]
    fn schur_low_orders() {
        let t = GeneralizedTimes::real(&[0.3, -0.2, 0.1, 0.4]).unwrap();
        let s = schur(&t, 4);
        let (t1, t2, t3, t4) = (0.3, -0.2, 0.1, 0.4);
        assert_eq!(s[0], cr(1.0));
        assert!((s[1] - t1).norm() < 1e-16);
        assert!((s[2] - (t1 * t1 / 2.0 + t2)).norm() < 1e-16);
        assert!((s[3] - (t1.powi(3) / 6.0 + t1 * t2 + t3)).norm() < 1e-16);
        let s4 = t1.powi(4) / 24.0 + t2 * t2 / 2.0 + t1 * t1 * t2 / 2.0 + t1 * t3 + t4;
        assert!((s[4] - s4).norm() < 1e-16);
        assert!(GeneralizedTimes::real(&[0.1, 0.2]).is_err());
    }

    #[test]
    fn zero_map_gives_zero_form() {
        assert!(matches!(
            ABForm::new(&decaying(8), &times(), 8),
            Err(KpError::WindowTooSmall { .. })
        ));
        let ab = ABForm::new(&[], &times(), 12).unwrap();
        assert!(ab.table.iter().all(|a| a.norm() == 0.0));
        assert_eq!(kp_residual_from(&ab).unwrap(), 0.0);
        let ab = ABForm::new(&decaying(12), &GeneralizedTimes::real(&[0.0; 3]).unwrap(), 12).unwrap();
        assert_eq!(ab.a_value(), cr(0.0));
    }

    #[test]
    fn b_column_is_shifted() {
        let c = decaying(16);
        let ab = ABForm::new(&c, &times(), 16).unwrap();
        let b: Complex64 = ab.row.iter().enumerate().map(|(j, r)| r * ab.a[j]).sum();
        assert!((b - ab.b_value()).norm() < 1e-17);
        assert!(matches!(ab.derivative([0, 0, 3]), Err(KpError::OutsideTable(9))));
    }

    #[test]
    fn n1_system_matches_closed_form() {
        let c = decaying(16);
        let op = step2_graph(&c, 1, 16).unwrap();
        let ab = ABForm::from_graph(&op, &times()).unwrap();
        let ba = baker_akhiezer(&op, &times(), &[]).unwrap();
        let closed = ab.b_value() / (1.0 - ab.a_value());
        assert!((ba.omega[0] - closed).norm() < 1e-15);
    }

    #[test]
    fn identity_tau_is_one() {
        let op = step2_graph(&[], 2, 8).unwrap();
        assert_eq!(tau(&op, &times()), cr(1.0));
        let op = step2_graph(&decaying(8), 2, 8).unwrap();
        let t0 = GeneralizedTimes::real(&[0.0; 3]).unwrap();
        assert_eq!(tau(&op, &t0), cr(1.0));
    }

    #[test]
    fn tau_n1_is_one_minus_a() {
        let c = decaying(16);
        let op = step2_graph(&c, 1, 16).unwrap();
        let ab = ABForm::from_graph(&op, &times()).unwrap();
        assert!((tau(&op, &times()) - (1.0 - ab.a_value())).norm() < 1e-15);
        assert!((tau(&op, &times()) - tau_reduced(&op, &times())).norm() < 1e-15);
    }

    #[test]
    fn symbolic_schur_matches_recurrence_display() {
        let s = schur_polynomials(3);
        let t = |k| PhasePoly::c(k);
        let s3 = t(1).mul(&t(1)).mul(&t(1)).scale(&QComplex::ratio(1, 6))
            .add(&t(1).mul(&t(2)))
            .add(&t(3));
        assert_eq!(s[3], s3);
    }
}
