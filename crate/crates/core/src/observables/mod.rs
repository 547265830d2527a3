//! Exact observables on phase space.
//!
//! Observables are polynomials in the affine coefficients `c_n` of
//! `f(z) = z(1 + Σ c_n z^n)` and the coefficients `ψ̄_m` of the conjugate
//! momentum `ψ̄(z) = Σ ψ̄_m z^{1-m}`. The canonical bracket pairs `c_n` with
//! `ψ̄_n`. Coefficients are exact complex rationals so that bracket
//! identities can be compared for equality rather than to a tolerance.
//!
//! The generating function `f'ψ̄` has coefficients
//! `Ḡ_k = Σ_{j≥0} (j+1) c_j ψ̄_{k+j}` (with `c_0 = 1`); this module produces
//! them, their corrected non-positive counterparts `G_0, G_{-1}, G_{-2}`, and
//! the map `ι: ψ̄_k ↦ ∂/∂c_k` onto vector fields.

mod poly;
mod qcomplex;

pub use poly::{poisson_bracket, Monomial, PhasePoly, Var};
pub use qcomplex::QComplex;

use thiserror::Error;

use crate::virasoro::VectorFieldOnF0;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ObservablesError {
    #[error("index {index} lies outside the window {window:?}")]
    IndexOutOfWindow { index: i64, window: BracketWindow },
    #[error("observable is not linear in ψ̄_k with k ≥ 1: {0}")]
    NotLinearInPsi(String),
    #[error("invalid bracket window: {0}")]
    InvalidWindow(String),
    #[error("corrected coefficient G_{0} is only available for 0, -1, -2")]
    UnsupportedCorrection(i32),
}

/// Truncation of the bi-infinite index set: `c_1..=c_{n_c}` and
/// `ψ̄_{-m}..=ψ̄_{n_psi}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BracketWindow {
    pub n_c: u32,
    pub m: u32,
    pub n_psi: i32,
}

impl BracketWindow {
    pub fn new(n_c: u32, m: u32, n_psi: i32) -> Result<Self, ObservablesError> {
        if n_c < 1 {
            return Err(ObservablesError::InvalidWindow("n_c must be at least 1".into()));
        }
        if n_psi < -(m as i32) {
            return Err(ObservablesError::InvalidWindow(format!(
                "empty ψ̄ window [-{m}, {n_psi}]"
            )));
        }
        Ok(Self { n_c, m, n_psi })
    }

    pub fn contains(&self, v: Var) -> bool {
        match v {
            Var::C(n) => n >= 1 && n <= self.n_c,
            Var::Psi(k) => k >= -(self.m as i32) && k <= self.n_psi,
        }
    }

    fn check_psi(&self, k: i64) -> Result<(), ObservablesError> {
        if k < -(self.m as i64) || k > self.n_psi as i64 {
            Err(ObservablesError::IndexOutOfWindow {
                index: k,
                window: *self,
            })
        } else {
            Ok(())
        }
    }
}

/// `(j+1) c_j` with `c_0 = 1`, or zero when `c_j` is outside the window.
fn weighted_c(j: u32, window: &BracketWindow) -> PhasePoly {
    if j > window.n_c {
        PhasePoly::zero()
    } else {
        PhasePoly::c(j).scale_int(j as i64 + 1)
    }
}

fn c_in(j: u32, window: &BracketWindow) -> PhasePoly {
    if j > window.n_c {
        PhasePoly::zero()
    } else {
        PhasePoly::c(j)
    }
}

/// Coefficient `Ḡ_k = Σ_{j≥0} (j+1) c_j ψ̄_{k+j}` of the generating function,
/// keeping every term whose variables lie inside `window`.
pub fn gbar_coefficient(k: i32, window: &BracketWindow) -> Result<PhasePoly, ObservablesError> {
    window.check_psi(k as i64)?;
    let mut out = PhasePoly::zero();
    for idx in k..=window.n_psi {
        let j = (idx - k) as u32;
        out.add_assign(&weighted_c(j, window).mul(&PhasePoly::psibar(idx)));
    }
    Ok(out)
}

/// `Ḡ_k` with its dependence on the non-positive momenta removed:
/// `G̃_k = Σ_{m≥1} (m-k+1) c_{m-k} ψ̄_m`.
pub fn g_tilde(k: i32, window: &BracketWindow) -> Result<PhasePoly, ObservablesError> {
    if window.n_psi < 1 {
        return Err(ObservablesError::IndexOutOfWindow {
            index: 1,
            window: *window,
        });
    }
    let mut out = PhasePoly::zero();
    for m in k.max(1)..=window.n_psi {
        let j = (m - k) as u32;
        out.add_assign(&weighted_c(j, window).mul(&PhasePoly::psibar(m)));
    }
    Ok(out)
}

/// Polynomials `a_0..=a_n_max` of the reciprocal recurrence
/// `a_n = -Σ_{k=1}^{n} c_k a_{n-k}`, `a_0 = 1`, in the variables `c_1..=c_{n_c}`.
pub fn reciprocal_coefficients(n_max: u32, n_c: u32) -> Vec<PhasePoly> {
    let mut a = vec![PhasePoly::int(1)];
    for n in 1..=n_max {
        let mut acc = PhasePoly::zero();
        for k in 1..=n.min(n_c) {
            acc.add_assign(&PhasePoly::c(k).mul(&a[(n - k) as usize]));
        }
        a.push(acc.neg());
    }
    a
}

/// The corrected coefficients `G_0`, `G_{-1}`, `G_{-2}` obtained from
/// `G̃_0`, `G̃_{-1}`, `G̃_{-2}`:
///
/// * `G_0 = G̃_0 - ψ̄*_0` with `ψ̄*_0 = Σ c_k ψ̄_k`,
/// * `G_{-1} = G̃_{-1} - 2 c_1 ψ̄*_0`,
/// * `G_{-2} = G̃_{-2} + Σ ((c_1² - 4c_2) c_k - a_{k+2}) ψ̄_k`.
///
/// Conjugation bars on `c` are dropped; see the crate docs for the
/// convention. The `ψ̄_0`-window bound `m` is irrelevant here since only
/// `ψ̄_k`, `k ≥ 1`, appear.
pub fn corrected_g(j: i32, window: &BracketWindow) -> Result<PhasePoly, ObservablesError> {
    if !(-2..=0).contains(&j) {
        return Err(ObservablesError::UnsupportedCorrection(j));
    }
    if window.n_psi < 1 {
        return Err(ObservablesError::IndexOutOfWindow {
            index: 1,
            window: *window,
        });
    }
    let tilde = g_tilde(j, window)?;
    let psi_star = (1..=window.n_psi).fold(PhasePoly::zero(), |acc, k| {
        acc.add(&c_in(k as u32, window).mul(&PhasePoly::psibar(k)))
    });
    Ok(match j {
        0 => tilde.sub(&psi_star),
        -1 => tilde.sub(&c_in(1, window).scale_int(2).mul(&psi_star)),
        _ => {
            let a = reciprocal_coefficients(window.n_psi as u32 + 2, window.n_c);
            let c1 = c_in(1, window);
            let shape = c1.mul(&c1).sub(&c_in(2, window).scale_int(4));
            let mut corr = PhasePoly::zero();
            for k in 1..=window.n_psi {
                let coeff = shape
                    .mul(&c_in(k as u32, window))
                    .sub(&a[k as usize + 2]);
                corr.add_assign(&coeff.mul(&PhasePoly::psibar(k)));
            }
            tilde.add(&corr).restrict(window)
        }
    })
}

/// `ι`: replaces `ψ̄_k` by `∂_k = ∂/∂c_k`. The result's window is the largest
/// `ψ̄` index present.
pub fn iota(p: &PhasePoly) -> Result<VectorFieldOnF0, ObservablesError> {
    let parts = p
        .psi_linear_parts()
        .ok_or_else(|| ObservablesError::NotLinearInPsi(p.to_string()))?;
    if let Some((&k, _)) = parts.iter().find(|(&k, _)| k < 1) {
        return Err(ObservablesError::NotLinearInPsi(format!(
            "contains ψ̄_{k} with non-positive index"
        )));
    }
    let window = parts.keys().copied().max().unwrap_or(0) as usize;
    Ok(VectorFieldOnF0::from_components(
        window,
        parts.into_iter().map(|(k, v)| (k as usize, v)).collect(),
    ))
}

/// `{G_k, G_l}_n`: the bracket when `k + l ≥ -n + 1`, zero otherwise.
pub fn truncated_witt_bracket(
    (k, gk): (i32, &PhasePoly),
    (l, gl): (i32, &PhasePoly),
    n: i32,
) -> PhasePoly {
    if k + l > -n {
        poisson_bracket(gk, gl)
    } else {
        PhasePoly::zero()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(n_c: u32, m: u32, n_psi: i32) -> BracketWindow {
        BracketWindow::new(n_c, m, n_psi).unwrap()
    }

    #[test]
    fn canonical_pairs() {
        let b = poisson_bracket(&PhasePoly::c(2), &PhasePoly::psibar(2));
        assert_eq!(b, PhasePoly::int(1));
        assert!(poisson_bracket(&PhasePoly::c(1), &PhasePoly::c(2)).is_zero());
        assert!(poisson_bracket(&PhasePoly::psibar(1), &PhasePoly::psibar(-3)).is_zero());
        assert!(poisson_bracket(&PhasePoly::c(1), &PhasePoly::psibar(2)).is_zero());
        assert_eq!(
            poisson_bracket(&PhasePoly::psibar(3), &PhasePoly::c(3)),
            PhasePoly::int(-1)
        );
    }

    #[test]
    fn leibniz_by_hand() {
        let c1c2 = PhasePoly::c(1).mul(&PhasePoly::c(2));
        assert_eq!(poisson_bracket(&c1c2, &PhasePoly::psibar(2)), PhasePoly::c(1));
    }

    #[test]
    fn gbar_low_coefficients() {
        let win = w(6, 2, 6);
        let g1 = gbar_coefficient(1, &win).unwrap();
        let expect = PhasePoly::psibar(1)
            .add(&PhasePoly::c(1).scale_int(2).mul(&PhasePoly::psibar(2)))
            .add(&PhasePoly::c(2).scale_int(3).mul(&PhasePoly::psibar(3)));
        let prefix = w(2, 2, 3);
        assert!(g1.eq_within(&expect, &prefix));
        assert_eq!(g1.len(), 6);
        let g2 = gbar_coefficient(2, &win).unwrap();
        let expect = PhasePoly::psibar(2).add(&PhasePoly::c(1).scale_int(2).mul(&PhasePoly::psibar(3)));
        assert!(g2.eq_within(&expect, &w(1, 2, 3)));
    }

    #[test]
    fn gbar_at_identity_is_psibar() {
        let win = w(5, 3, 5);
        for k in -3..=5 {
            let g = gbar_coefficient(k, &win).unwrap();
            let at_id = g.eval(&|_| 0.0.into(), &|m| if m == k { 1.0.into() } else { 0.0.into() });
            assert_eq!(at_id, 1.0.into());
        }
        assert!(matches!(
            gbar_coefficient(6, &win),
            Err(ObservablesError::IndexOutOfWindow { .. })
        ));
        assert!(gbar_coefficient(-4, &win).is_err());
    }

    #[test]
    fn corrected_g0_is_euler_field() {
        let win = w(8, 0, 6);
        let g0 = corrected_g(0, &win).unwrap();
        let mut expect = PhasePoly::zero();
        for k in 1..=6 {
            expect.add_assign(&PhasePoly::c(k as u32).scale_int(k as i64).mul(&PhasePoly::psibar(k)));
        }
        assert_eq!(g0, expect);
    }

    #[test]
    fn corrected_g_minus_one_vanishes_at_identity() {
        let win = w(8, 0, 6);
        let g = corrected_g(-1, &win).unwrap();
        let at_id = g.eval(&|_| 0.0.into(), &|_| 1.0.into());
        assert_eq!(at_id, 0.0.into());
        assert!(corrected_g(1, &win).is_err());
        assert!(corrected_g(-3, &win).is_err());
    }

    #[test]
    fn corrected_g_minus_two_display() {
        let win = w(9, 0, 5);
        let g = corrected_g(-2, &win).unwrap();
        let a = reciprocal_coefficients(7, 9);
        let shape = PhasePoly::c(1).mul(&PhasePoly::c(1)).sub(&PhasePoly::c(2).scale_int(4));
        let mut expect = g_tilde(-2, &win).unwrap();
        for k in 1..=5u32 {
            let coeff = shape.mul(&PhasePoly::c(k)).sub(&a[k as usize + 2]);
            expect.add_assign(&coeff.mul(&PhasePoly::psibar(k as i32)));
        }
        assert_eq!(g, expect);
    }

    #[test]
    fn reciprocal_polys_low_orders() {
        let a = reciprocal_coefficients(3, 3);
        let c1 = PhasePoly::c(1);
        let c2 = PhasePoly::c(2);
        assert_eq!(a[1], c1.neg());
        assert_eq!(a[2], c1.mul(&c1).sub(&c2));
        let a3 = c1.mul(&c1).mul(&c1).neg()
            .add(&c1.mul(&c2).scale_int(2))
            .sub(&PhasePoly::c(3));
        assert_eq!(a[3], a3);
    }

    #[test]
    fn iota_of_single_momentum() {
        let f = iota(&PhasePoly::psibar(3)).unwrap();
        assert_eq!(f.component(3), PhasePoly::int(1));
        assert!(f.component(2).is_zero());
        assert!(iota(&PhasePoly::psibar(0)).is_err());
        assert!(iota(&PhasePoly::psibar(1).mul(&PhasePoly::psibar(2))).is_err());
        assert!(iota(&PhasePoly::c(1)).is_err());
    }

    #[test]
    fn truncation_of_witt_bracket() {
        let win = w(10, 0, 8);
        let g0 = corrected_g(0, &win).unwrap();
        assert!(truncated_witt_bracket((0, &g0), (0, &g0), 1).is_zero());
        let gm1 = corrected_g(-1, &win).unwrap();
        assert!(truncated_witt_bracket((0, &g0), (-1, &gm1), 1).is_zero());
        let b = truncated_witt_bracket((0, &g0), (-1, &gm1), 2);
        assert!(b.eq_within(&gm1.neg(), &w(7, 0, 6)));
    }
}
