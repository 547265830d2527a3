//! Löwner-Kufarev evolution of `f` together with its conjugate momentum `ψ̄`.
//!
//! With `w = e^{-t} f` the system is
//!
//! ```text
//! df/dt = f (1 - p(w, t))
//! dψ̄/dt = -(1 - p(w, t) - w p'(w, t)) ψ̄
//! ```
//!
//! and `f'ψ̄` is constant in time. Both equations are integrated in
//! coefficient space with classical RK4.
//!
//! The multiplier `q = 1 - p(w) - w p'(w)` has no constant term and is known
//! exactly through `z^{N+1}` from `c_1..c_N`, so `ψ̄_m` for `m` in
//! `[-M, N_ψ]` evolves exactly when `N + 1 ≥ N_ψ + M`.

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::driver::{DriverError, HerglotzDriver};
use crate::observables::{PhasePoly, QComplex};
use crate::series::{SeriesError, TruncatedLaurent, TruncatedSeries};

pub const DIVERGENCE_GUARD: f64 = 1e6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvolutionError {
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Driver(#[from] DriverError),
    #[error("step rejected at t = {t}: |c_{index}| = {value:e} exceeds the divergence guard")]
    StepRejected { t: f64, index: usize, value: f64 },
    #[error("invalid integration parameters: {0}")]
    InvalidParameters(String),
    #[error("state windows differ")]
    WindowMismatch,
}

/// `ψ̄_m` window `[-m, n_psi]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct PsiWindow {
    pub m: usize,
    pub n_psi: usize,
}

impl PsiWindow {
    pub fn len(&self) -> usize {
        self.m + self.n_psi + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn indices(&self) -> impl Iterator<Item = i32> {
        -(self.m as i32)..=self.n_psi as i32
    }

    fn slot(&self, idx: i32) -> Option<usize> {
        let s = idx + self.m as i32;
        (s >= 0 && idx <= self.n_psi as i32).then_some(s as usize)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ShapeState {
    pub t: f64,
    /// `c_1..=c_N`.
    pub c: Vec<Complex64>,
    /// `ψ̄_{-m}..=ψ̄_{n_psi}`.
    pub psibar: Vec<Complex64>,
    pub window: PsiWindow,
}

impl ShapeState {
    /// `f = id` at `t = 0` with the given momenta.
    pub fn identity(order: usize, window: PsiWindow, psibar: Vec<Complex64>) -> Self {
        assert_eq!(psibar.len(), window.len(), "ψ̄ vector does not fill its window");
        Self {
            t: 0.0,
            c: vec![Complex64::default(); order],
            psibar,
            window,
        }
    }

    pub fn order(&self) -> usize {
        self.c.len()
    }

    /// `c_n` with `c_0 = 1` and zero beyond the order.
    pub fn c_at(&self, n: usize) -> Complex64 {
        match n {
            0 => Complex64::new(1.0, 0.0),
            n => self.c.get(n - 1).copied().unwrap_or_default(),
        }
    }

    /// `ψ̄_m`, zero outside the window.
    pub fn psibar_at(&self, m: i32) -> Complex64 {
        self.window.slot(m).map_or(Complex64::default(), |s| self.psibar[s])
    }

    /// `f` as a series of order `N + 1`.
    pub fn f_series(&self) -> TruncatedSeries {
        let mut v = vec![Complex64::default(), Complex64::new(1.0, 0.0)];
        v.extend_from_slice(&self.c);
        TruncatedSeries::new(v)
    }

    /// `Ḡ_k = Σ_{j≥0} (j+1) c_j ψ̄_{k+j}` for `k` in the momentum window.
    pub fn gbar(&self, k: i32) -> Complex64 {
        let top = self.window.n_psi as i32;
        (k..=top)
            .map(|idx| {
                let j = (idx - k) as usize;
                self.c_at(j) * (j as f64 + 1.0) * self.psibar_at(idx)
            })
            .sum()
    }

    /// All `Ḡ_k`, `k = -m..=n_psi`.
    pub fn gbar_all(&self) -> Vec<Complex64> {
        self.window.indices().map(|k| self.gbar(k)).collect()
    }

    /// `G_0 = Σ_k k c_k ψ̄_k`.
    pub fn corrected_g0(&self) -> Complex64 {
        (1..=self.window.n_psi.min(self.order()))
            .map(|k| self.c_at(k) * k as f64 * self.psibar_at(k as i32))
            .sum()
    }

    fn axpy(&self, h: f64, dc: &[Complex64], dpsi: &[Complex64]) -> Self {
        Self {
            t: self.t + h,
            c: self.c.iter().zip(dc).map(|(a, b)| a + b * h).collect(),
            psibar: self.psibar.iter().zip(dpsi).map(|(a, b)| a + b * h).collect(),
            window: self.window,
        }
    }
}

/// `F = f (1 - p(e^{-t} f, t))` and `q = 1 - p(w) - w p'(w)` as series of
/// order `N + 1`.
fn flow_series(
    s: &ShapeState,
    d: &HerglotzDriver,
) -> Result<(TruncatedSeries, TruncatedSeries), EvolutionError> {
    let order = s.order() + 1;
    let f = s.f_series();
    let w = f.scale(Complex64::new((-s.t).exp(), 0.0));
    let p = d.p_series(s.t, order + 1)?;
    let pw = p.truncate(order).compose(&w)?;
    let dpw = p.differentiate().compose(&w)?;
    let one = TruncatedSeries::one(order);
    let one_minus = &one - &pw;
    let big_f = f.mul(&one_minus);
    let q = &one_minus - &w.mul(&dpw);
    Ok((big_f, q))
}

/// Time derivatives `(dc/dt, dψ̄/dt)`.
pub fn rhs(
    s: &ShapeState,
    d: &HerglotzDriver,
) -> Result<(Vec<Complex64>, Vec<Complex64>), EvolutionError> {
    let (big_f, q) = flow_series(s, d)?;
    let dc = (1..=s.order()).map(|n| big_f.coeff(n + 1)).collect();
    let top = s.window.n_psi as i32;
    let qmax = q.order() as i32;
    let dpsi = s
        .window
        .indices()
        .map(|m| {
            -(1..=(top - m).min(qmax))
                .map(|j| q.coeff(j as usize) * s.psibar_at(m + j))
                .sum::<Complex64>()
        })
        .collect();
    Ok((dc, dpsi))
}

/// `H = Σ_{n≥2} F_n ψ̄_{n-1}`, the `z^0` pairing of `z̄² F ψ̄` on the circle.
pub fn pseudo_hamiltonian(s: &ShapeState, d: &HerglotzDriver) -> Result<Complex64, EvolutionError> {
    let (big_f, _) = flow_series(s, d)?;
    let top = s.window.n_psi.min(s.order());
    Ok((1..=top)
        .map(|k| big_f.coeff(k + 1) * s.psibar_at(k as i32))
        .sum())
}

/// `f'ψ̄` as a Laurent series: `Ḡ_k` sits at `z^{1-k}`.
pub fn generating_function(s: &ShapeState) -> TruncatedLaurent {
    let g = s.gbar_all();
    let min_power = 1 - s.window.n_psi as i64;
    // ascending powers means descending k
    TruncatedLaurent::from_coeffs(min_power, g.into_iter().rev().collect())
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryRecord {
    pub times: Vec<f64>,
    pub states: Vec<ShapeState>,
    /// `Ḡ_k` for `k = -m..=n_psi` at each snapshot.
    pub gbar: Vec<Vec<Complex64>>,
    pub hamiltonian: Vec<Complex64>,
}

impl TrajectoryRecord {
    /// `max_t |Ḡ_k(t) - Ḡ_k(0)| / (1 + |Ḡ_k(0)|)` for each `k` in the window.
    pub fn gbar_drift(&self) -> Vec<f64> {
        let g0 = &self.gbar[0];
        (0..g0.len())
            .map(|i| {
                self.gbar
                    .iter()
                    .map(|g| (g[i] - g0[i]).norm() / (1.0 + g0[i].norm()))
                    .fold(0.0, f64::max)
            })
            .collect()
    }

    pub fn last(&self) -> &ShapeState {
        self.states.last().expect("trajectory has at least one snapshot")
    }
}

fn guard(s: &ShapeState) -> Result<(), EvolutionError> {
    for (i, c) in s.c.iter().enumerate() {
        let v = c.norm();
        if v.is_nan() || v > DIVERGENCE_GUARD {
            return Err(EvolutionError::StepRejected {
                t: s.t,
                index: i + 1,
                value: v,
            });
        }
    }
    Ok(())
}

/// One classical RK4 step.
pub fn rk4_step(s: &ShapeState, d: &HerglotzDriver, h: f64) -> Result<ShapeState, EvolutionError> {
    let (k1c, k1p) = rhs(s, d)?;
    let (k2c, k2p) = rhs(&s.axpy(h / 2.0, &k1c, &k1p), d)?;
    let (k3c, k3p) = rhs(&s.axpy(h / 2.0, &k2c, &k2p), d)?;
    let (k4c, k4p) = rhs(&s.axpy(h, &k3c, &k3p), d)?;
    let comb = |a: &[Complex64], b: &[Complex64], c: &[Complex64], e: &[Complex64]| -> Vec<Complex64> {
        (0..a.len())
            .map(|i| (a[i] + 2.0 * b[i] + 2.0 * c[i] + e[i]) / 6.0)
            .collect()
    };
    let next = s.axpy(h, &comb(&k1c, &k2c, &k3c, &k4c), &comb(&k1p, &k2p, &k3p, &k4p));
    guard(&next)?;
    Ok(next)
}

/// Integrates from `s0.t` to `s0.t + horizon` with `ceil(horizon / h)`
/// equal steps (the step is shortened so the horizon is hit exactly).
pub fn evolve(
    s0: &ShapeState,
    d: &HerglotzDriver,
    horizon: f64,
    h: f64,
) -> Result<TrajectoryRecord, EvolutionError> {
    if h.is_nan() || h <= 0.0 || !horizon.is_finite() || horizon < 0.0 {
        return Err(EvolutionError::InvalidParameters(format!(
            "need h > 0 and T ≥ 0, got h = {h}, T = {horizon}"
        )));
    }
    if s0.psibar.len() != s0.window.len() {
        return Err(EvolutionError::WindowMismatch);
    }
    let steps = ((horizon / h) - 1e-9).ceil().max(0.0) as usize;
    let step = if steps == 0 { 0.0 } else { horizon / steps as f64 };
    let mut rec = TrajectoryRecord {
        times: Vec::with_capacity(steps + 1),
        states: Vec::with_capacity(steps + 1),
        gbar: Vec::with_capacity(steps + 1),
        hamiltonian: Vec::with_capacity(steps + 1),
    };
    let push = |rec: &mut TrajectoryRecord, s: ShapeState| -> Result<(), EvolutionError> {
        rec.times.push(s.t);
        rec.gbar.push(s.gbar_all());
        rec.hamiltonian.push(pseudo_hamiltonian(&s, d)?);
        rec.states.push(s);
        Ok(())
    };
    guard(s0)?;
    push(&mut rec, s0.clone())?;
    let mut cur = s0.clone();
    for i in 1..=steps {
        let mut next = rk4_step(&cur, d, step)?;
        next.t = s0.t + horizon * i as f64 / steps as f64;
        push(&mut rec, next.clone())?;
        cur = next;
    }
    Ok(rec)
}

/// Solution `w(z, t)` of `w/(1+w)² = e^{-t} z/(1+z)²` near `w = 0`: the
/// trajectory of the autonomous single atom at `θ = 0`.
pub fn atom_at_zero_w(z: Complex64, t: f64) -> Complex64 {
    let u = (-t).exp() * z / ((1.0 + z) * (1.0 + z));
    if u.norm() < 1e-300 {
        return u;
    }
    let s = (1.0 - 4.0 * u).sqrt();
    // rationalized root avoids cancellation for small u
    2.0 * u / ((1.0 - 2.0 * u) + s)
}

/// Sample points used for the closed-form comparison.
pub const IMPLICIT_SAMPLES: [Complex64; 4] = [
    Complex64::new(0.15, 0.0),
    Complex64::new(0.0, 0.18),
    Complex64::new(-0.12, 0.1),
    Complex64::new(0.1, -0.14),
];

/// `max |e^{-t} f(z, t) - w(z, t)|` over [`IMPLICIT_SAMPLES`].
pub fn implicit_error(s: &ShapeState) -> f64 {
    let f = s.f_series();
    let e = (-s.t).exp();
    IMPLICIT_SAMPLES
        .iter()
        .map(|&z| (f.eval(z) * e - atom_at_zero_w(z, s.t)).norm())
        .fold(0.0, f64::max)
}

fn series_mul(a: &[PhasePoly], b: &[PhasePoly]) -> Vec<PhasePoly> {
    let n = a.len().min(b.len());
    (0..n)
        .map(|k| {
            (0..=k).fold(PhasePoly::zero(), |acc, i| acc.add(&a[i].mul(&b[k - i])))
        })
        .collect()
}

/// The pseudo-Hamiltonian as an exact polynomial in `c_1..=c_order` and
/// `ψ̄_1..=ψ̄_{n_psi}`, with the driver coefficients at time `t` and `e^{-t}`
/// converted exactly from their floating-point values.
pub fn hamiltonian_observable(
    d: &HerglotzDriver,
    t: f64,
    order: usize,
    n_psi: usize,
) -> Result<PhasePoly, EvolutionError> {
    let len = order + 2;
    let p = d.p_series(t, order + 1)?;
    let exact = |z: Complex64| PhasePoly::constant(QComplex::from_f64(z));
    let mut f = vec![PhasePoly::zero(), PhasePoly::int(1)];
    f.extend((1..=order).map(|n| PhasePoly::c(n as u32)));
    let scale = exact(Complex64::new((-t).exp(), 0.0));
    let w: Vec<PhasePoly> = f.iter().map(|x| x.mul(&scale)).collect();
    // Horner: p(w) = p_0 + w (p_1 + w (p_2 + ...))
    let mut acc = vec![PhasePoly::zero(); len];
    for k in (0..len).rev() {
        acc = series_mul(&acc, &w);
        acc[0] = acc[0].add(&exact(p.coeff(k)));
    }
    let mut one_minus: Vec<PhasePoly> = acc.iter().map(|x| x.neg()).collect();
    one_minus[0] = one_minus[0].add(&PhasePoly::int(1));
    let big_f = series_mul(&f, &one_minus);
    Ok((1..=n_psi.min(order))
        .fold(PhasePoly::zero(), |h, k| {
            h.add(&big_f[k + 1].mul(&PhasePoly::psibar(k as i32)))
        }))
}
