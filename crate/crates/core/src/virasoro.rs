//! Kirillov vector fields on the space of normalized univalent maps.
//!
//! A field is stored in affine coordinates: the `∂_n` component is a
//! polynomial in the coefficients `c_m` of `f(z) = z(1 + Σ c_m z^m)`. The
//! same field seen as a variation of `f` is the series whose `z^{n+1}`
//! coefficient is the `∂_n` component.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;
use thiserror::Error;

use crate::observables::{reciprocal_coefficients, PhasePoly, QComplex, Var};
use crate::series::TruncatedSeries;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VirasoroError {
    #[error("window {window} is too small for L_{k}")]
    WindowTooSmall { k: i32, window: usize },
    #[error("closed form of L_{0} is only available for k ≥ -2")]
    NoClosedForm(i32),
    #[error("quadrature degenerate: |f(w) - f(z)| = {0:e}")]
    QuadratureDegenerate(f64),
    #[error("f is not univalent on the unit circle grid (min separation {0:e})")]
    NotUnivalent(f64),
    #[error("invalid map: {0}")]
    InvalidMap(String),
}

/// First-order vector field `Σ_n X_n ∂_n`. Components `1..=window` are
/// exact; components above the window are unknown rather than zero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VectorFieldOnF0 {
    window: usize,
    components: BTreeMap<usize, PhasePoly>,
}

impl VectorFieldOnF0 {
    pub fn from_components(window: usize, components: BTreeMap<usize, PhasePoly>) -> Self {
        let components = components
            .into_iter()
            .filter(|(n, p)| *n >= 1 && *n <= window && !p.is_zero())
            .collect();
        Self { window, components }
    }

    pub fn zero(window: usize) -> Self {
        Self::from_components(window, BTreeMap::new())
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn component(&self, n: usize) -> PhasePoly {
        self.components.get(&n).cloned().unwrap_or_default()
    }

    pub fn components(&self) -> impl Iterator<Item = (usize, &PhasePoly)> {
        self.components.iter().map(|(&n, p)| (n, p))
    }

    /// Restriction to the components `1..=window`.
    pub fn truncate(&self, window: usize) -> Self {
        Self::from_components(window.min(self.window), self.components.clone())
    }

    pub fn scale(&self, k: &QComplex) -> Self {
        Self::from_components(
            self.window,
            self.components.iter().map(|(&n, p)| (n, p.scale(k))).collect(),
        )
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut comps = self.components.clone();
        for (&n, p) in &other.components {
            comps.entry(n).or_default().add_assign(p);
        }
        Self::from_components(self.window.min(other.window), comps)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&QComplex::int(-1)))
    }

    /// Directional derivative `Σ_m X_m ∂p/∂c_m` of a polynomial in `c`.
    pub fn act(&self, p: &PhasePoly) -> PhasePoly {
        let mut out = PhasePoly::zero();
        for v in p.variables() {
            if let Var::C(m) = v {
                if let Some(xm) = self.components.get(&(m as usize)) {
                    out.add_assign(&xm.mul(&p.derivative(v)));
                }
            }
        }
        out
    }

    /// Largest `c` index appearing in component `n`.
    fn reach(&self, n: usize) -> usize {
        self.components.get(&n).map_or(0, |p| p.max_c_index() as usize)
    }

    /// Exact equality of components `1..=upto`.
    pub fn agrees_with(&self, other: &Self, upto: usize) -> bool {
        (1..=upto).all(|n| self.component(n) == other.component(n))
    }

    /// The variation series: `z^{n+1}` coefficient is the `∂_n` component
    /// evaluated at `c`. Order is `window + 1`.
    pub fn series_form(&self, c: &[Complex64]) -> TruncatedSeries {
        let mut s = TruncatedSeries::zero(self.window + 1);
        for (&n, p) in &self.components {
            s.set_coeff(n + 1, p.eval_c(c));
        }
        s
    }
}

/// Lie bracket with `[L_k, L_n] = (n - k) L_{k+n}`: the `∂_n` component is
/// `Y(X_n) - X(Y_n)`. The result window is the longest prefix of components
/// whose inputs are all exactly known.
pub fn commutator(x: &VectorFieldOnF0, y: &VectorFieldOnF0) -> VectorFieldOnF0 {
    let limit = x.window.min(y.window);
    let mut comps = BTreeMap::new();
    let mut window = 0;
    for n in 1..=limit {
        if x.reach(n).max(y.reach(n)) > limit {
            break;
        }
        let xn = x.component(n);
        let yn = y.component(n);
        comps.insert(n, y.act(&xn).sub(&x.act(&yn)));
        window = n;
    }
    VectorFieldOnF0::from_components(window, comps)
}

fn c_poly(n: usize) -> PhasePoly {
    PhasePoly::c(n as u32)
}

fn closed_form_field(k: i32, window: usize) -> VectorFieldOnF0 {
    let mut comps = BTreeMap::new();
    match k {
        0 => {
            for n in 1..=window {
                comps.insert(n, c_poly(n).scale_int(n as i64));
            }
        }
        -1 => {
            let c1 = c_poly(1);
            for n in 1..=window {
                let p = c_poly(n + 1)
                    .scale_int(n as i64 + 2)
                    .sub(&c1.mul(&c_poly(n)).scale_int(2));
                comps.insert(n, p);
            }
        }
        -2 => {
            let a = reciprocal_coefficients(window as u32 + 2, window as u32 + 2);
            let c1 = c_poly(1);
            let shape = c1.mul(&c1).sub(&c_poly(2).scale_int(4));
            for n in 1..=window {
                let p = c_poly(n + 2)
                    .scale_int(n as i64 + 3)
                    .add(&shape.mul(&c_poly(n)))
                    .sub(&a[n + 2]);
                comps.insert(n, p);
            }
        }
        k => {
            let k = k as usize;
            for n in k..=window {
                comps.insert(n, c_poly(n - k).scale_int((n - k) as i64 + 1));
            }
        }
    }
    VectorFieldOnF0::from_components(window, comps)
}

/// `L_k` in affine coordinates with components `1..=window`.
///
/// `k ≥ -2` use closed forms; lower indices come from
/// `[L_{-1}, L_{-j}] = (1 - j) L_{-j-1}`.
pub fn kirillov_l(k: i32, window: usize) -> Result<VectorFieldOnF0, VirasoroError> {
    if window == 0 || (k > 0 && k as usize > window) {
        return Err(VirasoroError::WindowTooSmall { k, window });
    }
    if k >= -2 {
        return Ok(closed_form_field(k, window));
    }
    let depth = (-k) as usize;
    // each bracket shortens the exact prefix, so widen the start until it suffices
    let mut big = window + depth;
    loop {
        let lm1 = closed_form_field(-1, big);
        let mut cur = closed_form_field(-2, big);
        for j in 2..depth {
            let br = commutator(&lm1, &cur);
            cur = br.scale(&QComplex::ratio(1, 1 - j as i64));
        }
        if cur.window() >= window {
            return Ok(cur.truncate(window));
        }
        big += depth;
    }
}

fn check_map(f: &TruncatedSeries) -> Result<(), VirasoroError> {
    if f.order() < 1 || f.coeff(0).norm() > 0.0 || f.coeff(1) != Complex64::new(1.0, 0.0) {
        return Err(VirasoroError::InvalidMap(
            "expected f(z) = z + c_1 z^2 + ...".into(),
        ));
    }
    Ok(())
}

/// Closed-form variation series of `L_k[f]` for `k ≥ -2`, with `f` read as
/// the polynomial its coefficients describe:
///
/// * `k ≥ 1`: `z^{k+1} f'`
/// * `k = 0`: `z f' - f`
/// * `k = -1`: `f' - 2c_1 f - 1`
/// * `k = -2`: `f'/z - 1/f - 3c_1 + (c_1² - 4c_2) f`
///
/// The result has order `f.order() + max(k, 0)`.
pub fn closed_form_series(k: i32, f: &TruncatedSeries) -> Result<TruncatedSeries, VirasoroError> {
    check_map(f)?;
    let nf = f.order();
    let fc = |j: i64| -> Complex64 {
        if j < 0 || j as usize > nf {
            Complex64::default()
        } else {
            f.coeff(j as usize)
        }
    };
    let c = |n: i64| fc(n + 1);
    Ok(match k {
        k if k >= 1 => {
            let k = k as usize;
            TruncatedSeries::from_fn(nf + k, |j| {
                if j < k + 1 {
                    Complex64::default()
                } else {
                    let i = (j - k - 1) as f64;
                    fc((j - k) as i64) * (i + 1.0)
                }
            })
        }
        0 => TruncatedSeries::from_fn(nf, |j| fc(j as i64) * (j as f64 - 1.0)),
        -1 => TruncatedSeries::from_fn(nf, |j| {
            let j = j as i64;
            let mut v = fc(j + 1) * (j + 1) as f64 - c(1) * fc(j) * 2.0;
            if j == 0 {
                v -= 1.0;
            }
            v
        }),
        -2 => {
            let mut a = vec![Complex64::new(1.0, 0.0)];
            for n in 1..=nf + 2 {
                let s: Complex64 = (1..=n).map(|j| c(j as i64) * a[n - j]).sum();
                a.push(-s);
            }
            let shape = c(1) * c(1) - c(2) * 4.0;
            TruncatedSeries::from_fn(nf, |j| {
                if j < 2 {
                    return Complex64::default();
                }
                let n = j as i64 - 1;
                c(n + 2) * (n + 3) as f64 + shape * c(n) - a[(n + 2) as usize]
            })
        }
        k => return Err(VirasoroError::NoClosedForm(k)),
    })
}

fn unit_grid(q: usize) -> Vec<Complex64> {
    (0..q)
        .map(|j| Complex64::from_polar(1.0, 2.0 * PI * j as f64 / q as f64))
        .collect()
}

/// Schaeffer-Spencer variation `L[f, v_k]` with `v_k = -i z^k`, evaluated
/// at the points `zs` by the trapezoid rule on `q` points of the unit
/// circle:
///
/// `L(z) = f(z)²/(2π) ∫ (w f'(w)/f(w))² w^k / (f(w) - f(z)) dθ`.
pub fn schaeffer_spencer_values(
    f: &TruncatedSeries,
    k: i32,
    q: usize,
    zs: &[Complex64],
) -> Result<Vec<Complex64>, VirasoroError> {
    check_map(f)?;
    let df = f.differentiate();
    let grid = unit_grid(q);
    let fw: Vec<Complex64> = grid.iter().map(|&w| f.eval(w)).collect();
    let weight: Vec<Complex64> = grid
        .iter()
        .zip(&fw)
        .map(|(&w, &fwv)| {
            let r = w * df.eval(w) / fwv;
            r * r * w.powi(k)
        })
        .collect();
    let mut out = Vec::with_capacity(zs.len());
    for &z in zs {
        let fz = f.eval(z);
        let mut acc = Complex64::default();
        for (wt, &fwv) in weight.iter().zip(&fw) {
            let d = fwv - fz;
            if d.norm() < 1e-8 {
                return Err(VirasoroError::QuadratureDegenerate(d.norm()));
            }
            acc += wt / d;
        }
        out.push(fz * fz * acc / q as f64);
    }
    Ok(out)
}

/// Minimum pairwise distance of `f` on `q` points of the unit circle.
pub fn boundary_separation(f: &TruncatedSeries, q: usize) -> f64 {
    let pts: Vec<Complex64> = unit_grid(q).into_iter().map(|w| f.eval(w)).collect();
    let mut best = f64::INFINITY;
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            best = best.min((pts[i] - pts[j]).norm());
        }
    }
    best
}

/// Taylor coefficients of `L[f, v_k]` up to `order`, from values on the
/// circle `|z| = r` by discrete Fourier transform.
pub fn schaeffer_spencer(
    f: &TruncatedSeries,
    k: i32,
    q: usize,
    r: f64,
    order: usize,
) -> Result<TruncatedSeries, VirasoroError> {
    let sep = boundary_separation(f, q.min(1024));
    if sep < 1e-8 {
        return Err(VirasoroError::NotUnivalent(sep));
    }
    let p = (2 * (order + 1)).next_power_of_two().max(64);
    let zs: Vec<Complex64> = (0..p)
        .map(|j| Complex64::from_polar(r, 2.0 * PI * j as f64 / p as f64))
        .collect();
    let mut vals = schaeffer_spencer_values(f, k, q, &zs)?;
    FftPlanner::new().plan_fft_forward(p).process(&mut vals);
    Ok(TruncatedSeries::from_fn(order, |n| {
        vals[n] / (p as f64 * r.powi(n as i32))
    }))
}
